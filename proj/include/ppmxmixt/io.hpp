#pragma once

#include <string>
#include <vector>

#include "ppmxmixt/conjugate.hpp"
#include "ppmxmixt/dataset.hpp"

namespace ppmxmixt {

// Regression CSV schema: header "y" first, then "c:<name>" columns for the
// continuous covariates and "b:<name>" columns for the binary ones, in that
// order. All cells are plain numbers.
struct RegressionCsv {
  RegressionDataset data;
  std::vector<std::string> cont_names;
  std::vector<std::string> bin_names;
};

RegressionCsv load_regression_csv(const std::string& path,
                                  MetricKind metric = MetricKind::Pooled);

// Writers emit doubles with 17 significant digits, so a written file reloads
// to the exact same values. Empty name lists fall back to x1, x2, ...
void save_regression_csv(const RegressionDataset& d, const std::string& path,
                         const std::vector<std::string>& cont_names = {},
                         const std::vector<std::string>& bin_names = {});

// Recurrent-event schema, two files.
//
// Events (long format): header "subject,occasion" then exactly one of
// "log_gap" or "gap" (raw gaps are logged on load), then optional "t:<name>"
// time-varying covariate columns. Occasions per subject must run 1..m
// contiguously; when time-varying covariates are present, one extra row with
// occasion m+1 and an empty gap cell carries their values for the censored
// occasion.
//
// Subjects: header "subject,tau" then optional "c:<name>"/"b:<name>" static
// covariate columns (these drive the similarity) and an optional
// "log_censor_gap" column. tau is the total follow-up time on the raw gap
// scale; the censored occasion's lower bound is log(tau - sum of gaps).
// Writers also emit log_censor_gap with the bound verbatim, and the loader
// prefers it when present, which keeps save/load round trips exact where the
// tau arithmetic alone would lose the last bits.
struct RecurrentCsv {
  RecurrentDataset data;
  std::vector<std::string> subject_ids;
  std::vector<std::string> cont_names;
  std::vector<std::string> bin_names;
  std::vector<std::string> time_names;
};

RecurrentCsv load_recurrent_csv(const std::string& events_path,
                                const std::string& subjects_path,
                                MetricKind metric = MetricKind::Pooled);

void save_recurrent_csv(const RecurrentDataset& d,
                        const std::string& events_path,
                        const std::string& subjects_path,
                        const std::vector<std::string>& subject_ids = {},
                        const std::vector<std::string>& cont_names = {},
                        const std::vector<std::string>& bin_names = {},
                        const std::vector<std::string>& time_names = {});

// Trace files. trace.csv holds one row per retained sweep with the packed
// allocation and per-item log predictive ordinates; params.csv holds one row
// per (sweep, block) with that block's parameters.
void write_conjugate_trace_csv(const ConjTrace& t, const std::string& path);
void write_conjugate_params_csv(const ConjTrace& t, const std::string& path);
ConjTrace load_conjugate_trace_csv(const std::string& trace_path,
                                   const std::string& params_path = "");

// "a;b;c" with 17-digit doubles, used for packed per-item columns
std::string pack_ints(const std::vector<std::int32_t>& v);
std::string pack_doubles(const std::vector<double>& v);
std::vector<std::int32_t> unpack_ints(const std::string& s);
std::vector<double> unpack_doubles(const std::string& s);

}  // namespace ppmxmixt
