#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ppmxmixt/covariates.hpp"
#include "ppmxmixt/params.hpp"

namespace ppmxmixt {

// Flat "key = value" text, one pair per line; '#' starts a comment, blank
// lines are skipped, duplicate keys are rejected. Values stay verbatim until
// a typed getter parses them, and every getter records the key it touched so
// leftover (misspelled) keys can be reported.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;
  static KeyValueConfig from_file(const std::string& path);
  static KeyValueConfig from_string(const std::string& text);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return kv_.count(key) != 0; }
  bool empty() const { return kv_.empty(); }

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_uint64(const std::string& key,
                           std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  // keys present in the source that no getter has read yet
  std::vector<std::string> unread_keys() const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
  mutable std::set<std::string> read_;
};

enum class ModelKind { ConjugateRegression, Recurrent };

// Everything a run needs beyond the data. Prior knobs whose shape depends on
// the data dimension are stored as scalars here and materialized once the
// dimension is known.
struct RunConfig {
  ModelKind model = ModelKind::ConjugateRegression;
  NggParams ngg;
  SimilarityConfig similarity;
  double eps_star = 0.0;  // > 0 requests lambda calibration from the data
  SamplerConfig sampler;
  MetricKind metric = MetricKind::Pooled;

  double prior_mu0 = 0.0;         // fills every coordinate of mu0
  double prior_b0_scale = 100.0;  // B0 = scale * I
  double prior_a0 = 2.0;
  double prior_b0 = 1.0;

  RecPriorConfig rec;             // Sigma0 left empty until rec_prior()
  double rec_sigma0_scale = 100.0;

  std::uint64_t seed = 0;
  std::string output_dir = ".";

  ConjPriorConfig conj_prior(int p) const;
  RecPriorConfig rec_prior(int p1) const;
};

// Builds a RunConfig from parsed keys. Environment variables override file
// values: key ngg.kappa maps to PPMXMIXT_NGG_KAPPA (dots to underscores,
// uppercased). Unknown keys and invalid values raise ValidationError naming
// the key.
RunConfig make_run_config(KeyValueConfig& kv);
RunConfig load_run_config(const std::string& path);

const char* to_string(ModelKind m);
const char* to_string(SimilarityFamily f);
const char* to_string(InitKind k);
const char* to_string(MetricKind k);

// resolved configuration as config-file text, one line per key
std::string run_config_text(const RunConfig& cfg);

// FNV-1a over the resolved configuration text; stable across runs and
// platforms, used to stamp run manifests
std::uint64_t config_hash(const RunConfig& cfg);

}  // namespace ppmxmixt
