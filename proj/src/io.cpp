#include "ppmxmixt/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "ppmxmixt/errors.hpp"

namespace ppmxmixt {

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> split_csv_line(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return cells;
}

double parse_cell(const std::string& cell, const std::string& file, int row,
                  int col) {
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(cell.c_str(), &end);
  if (cell.empty() || end != cell.c_str() + cell.size() || errno == ERANGE)
    throw ParseError(file + ": row " + std::to_string(row) + " column " +
                     std::to_string(col) + ": cannot parse '" + cell +
                     "' as a number");
  return x;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // file row = index + 2
  std::string file;
};

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  CsvTable t;
  t.file = path;
  std::string line;
  if (!std::getline(in, line))
    throw ParseError(path + ": empty file, expected a header row");
  t.header = split_csv_line(std::move(line));
  int rowno = 1;
  while (std::getline(in, line)) {
    ++rowno;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> cells = split_csv_line(std::move(line));
    if (cells.size() != t.header.size())
      throw ParseError(path + ": row " + std::to_string(rowno) + " has " +
                       std::to_string(cells.size()) + " cells, header has " +
                       std::to_string(t.header.size()));
    t.rows.push_back(std::move(cells));
  }
  return t;
}

bool has_prefix(const std::string& s, const char* p) {
  return s.rfind(p, 0) == 0;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  return out;
}

std::string nth_name(const std::vector<std::string>& names, std::size_t i) {
  return i < names.size() ? names[i] : "x" + std::to_string(i + 1);
}

}  // namespace

RegressionCsv load_regression_csv(const std::string& path, MetricKind metric) {
  CsvTable t = read_csv(path);
  if (t.header.empty() || t.header[0] != "y")
    throw ParseError(path + ": first header column must be 'y'");
  RegressionCsv out;
  std::vector<int> cont_cols, bin_cols;
  for (std::size_t c = 1; c < t.header.size(); ++c) {
    const std::string& h = t.header[c];
    if (has_prefix(h, "c:")) {
      if (!bin_cols.empty())
        throw ParseError(path + ": continuous column '" + h +
                         "' appears after a binary column");
      cont_cols.push_back(static_cast<int>(c));
      out.cont_names.push_back(h.substr(2));
    } else if (has_prefix(h, "b:")) {
      bin_cols.push_back(static_cast<int>(c));
      out.bin_names.push_back(h.substr(2));
    } else {
      throw ParseError(path + ": header column '" + h +
                       "' must start with 'c:' or 'b:'");
    }
  }
  const int n = static_cast<int>(t.rows.size());
  if (n == 0) throw ParseError(path + ": no data rows");

  Eigen::VectorXd y(n);
  Eigen::MatrixXd cont(n, static_cast<int>(cont_cols.size()));
  Eigen::MatrixXd bin(n, static_cast<int>(bin_cols.size()));
  for (int i = 0; i < n; ++i) {
    const int file_row = i + 2;
    y[i] = parse_cell(t.rows[i][0], path, file_row, 1);
    for (std::size_t j = 0; j < cont_cols.size(); ++j)
      cont(i, static_cast<int>(j)) =
          parse_cell(t.rows[i][cont_cols[j]], path, file_row,
                     cont_cols[j] + 1);
    for (std::size_t j = 0; j < bin_cols.size(); ++j) {
      const double v = parse_cell(t.rows[i][bin_cols[j]], path, file_row,
                                  bin_cols[j] + 1);
      if (v != 0.0 && v != 1.0)
        throw NonBinaryValue(path + ": row " + std::to_string(file_row) +
                             " column " + std::to_string(bin_cols[j] + 1) +
                             ": binary column 'b:" + out.bin_names[j] +
                             "' holds " + t.rows[i][bin_cols[j]]);
      bin(i, static_cast<int>(j)) = v;
    }
  }
  out.data = make_regression_dataset(
      std::move(y), make_covariates(std::move(cont), std::move(bin), metric));
  return out;
}

void save_regression_csv(const RegressionDataset& d, const std::string& path,
                         const std::vector<std::string>& cont_names,
                         const std::vector<std::string>& bin_names) {
  std::ofstream out = open_out(path);
  out << "y";
  for (int j = 0; j < d.X.mc; ++j)
    out << ",c:" << nth_name(cont_names, static_cast<std::size_t>(j));
  for (int j = 0; j < d.X.mb; ++j)
    out << ",b:" << nth_name(bin_names, static_cast<std::size_t>(j));
  out << '\n';
  for (int i = 0; i < d.n(); ++i) {
    out << fmt(d.y[i]);
    for (int j = 0; j < d.X.mc; ++j) out << ',' << fmt(d.X.continuous(i, j));
    for (int j = 0; j < d.X.mb; ++j)
      out << ',' << (d.X.binary(i, j) != 0.0 ? '1' : '0');
    out << '\n';
  }
}

RecurrentCsv load_recurrent_csv(const std::string& events_path,
                                const std::string& subjects_path,
                                MetricKind metric) {
  CsvTable ev = read_csv(events_path);
  if (ev.header.size() < 3 || ev.header[0] != "subject" ||
      ev.header[1] != "occasion" ||
      (ev.header[2] != "log_gap" && ev.header[2] != "gap"))
    throw ParseError(events_path +
                     ": header must start 'subject,occasion,log_gap' or "
                     "'subject,occasion,gap'");
  const bool raw_gaps = ev.header[2] == "gap";
  RecurrentCsv out;
  for (std::size_t c = 3; c < ev.header.size(); ++c) {
    if (!has_prefix(ev.header[c], "t:"))
      throw ParseError(events_path + ": header column '" + ev.header[c] +
                       "' must start with 't:'");
    out.time_names.push_back(ev.header[c].substr(2));
  }
  const int p2 = static_cast<int>(out.time_names.size());

  CsvTable su = read_csv(subjects_path);
  if (su.header.size() < 2 || su.header[0] != "subject" ||
      su.header[1] != "tau")
    throw ParseError(subjects_path + ": header must start 'subject,tau'");
  std::vector<int> cont_cols, bin_cols;
  int bound_col = -1;
  for (std::size_t c = 2; c < su.header.size(); ++c) {
    const std::string& h = su.header[c];
    if (has_prefix(h, "c:")) {
      cont_cols.push_back(static_cast<int>(c));
      out.cont_names.push_back(h.substr(2));
    } else if (has_prefix(h, "b:")) {
      bin_cols.push_back(static_cast<int>(c));
      out.bin_names.push_back(h.substr(2));
    } else if (h == "log_censor_gap") {
      bound_col = static_cast<int>(c);
    } else {
      throw ParseError(subjects_path + ": header column '" + h +
                       "' must start with 'c:' or 'b:'");
    }
  }

  const int n = static_cast<int>(su.rows.size());
  if (n == 0) throw ParseError(subjects_path + ": no data rows");
  std::map<std::string, int> index;
  std::vector<double> tau(n);
  std::vector<double> bound_in(n,
                               std::numeric_limits<double>::quiet_NaN());
  Eigen::MatrixXd cont(n, static_cast<int>(cont_cols.size()));
  Eigen::MatrixXd bin(n, static_cast<int>(bin_cols.size()));
  for (int i = 0; i < n; ++i) {
    const int file_row = i + 2;
    const std::string& id = su.rows[i][0];
    if (id.empty())
      throw ParseError(subjects_path + ": row " + std::to_string(file_row) +
                       ": empty subject id");
    if (!index.emplace(id, i).second)
      throw ParseError(subjects_path + ": row " + std::to_string(file_row) +
                       ": duplicate subject '" + id + "'");
    out.subject_ids.push_back(id);
    tau[i] = parse_cell(su.rows[i][1], subjects_path, file_row, 2);
    if (bound_col >= 0)
      bound_in[i] =
          parse_cell(su.rows[i][bound_col], subjects_path, file_row,
                     bound_col + 1);
    for (std::size_t j = 0; j < cont_cols.size(); ++j)
      cont(i, static_cast<int>(j)) = parse_cell(
          su.rows[i][cont_cols[j]], subjects_path, file_row, cont_cols[j] + 1);
    for (std::size_t j = 0; j < bin_cols.size(); ++j) {
      const double v = parse_cell(su.rows[i][bin_cols[j]], subjects_path,
                                  file_row, bin_cols[j] + 1);
      if (v != 0.0 && v != 1.0)
        throw NonBinaryValue(subjects_path + ": row " +
                             std::to_string(file_row) + " column " +
                             std::to_string(bin_cols[j] + 1) +
                             ": binary column holds " + su.rows[i][bin_cols[j]]);
      bin(i, static_cast<int>(j)) = v;
    }
  }

  RecurrentDataset d;
  d.subjects.resize(n);
  d.p2 = p2;
  for (std::size_t r = 0; r < ev.rows.size(); ++r) {
    const int file_row = static_cast<int>(r) + 2;
    const std::string& id = ev.rows[r][0];
    auto it = index.find(id);
    if (it == index.end())
      throw ParseError(events_path + ": row " + std::to_string(file_row) +
                       ": subject '" + id + "' is not in the subjects file");
    RecSubject& s = d.subjects[it->second];
    const double occ = parse_cell(ev.rows[r][1], events_path, file_row, 2);
    const int rows_so_far = p2 > 0 ? static_cast<int>(s.x_time.size())
                                   : static_cast<int>(s.y.size());
    const int expected = rows_so_far + 1;
    if (occ != expected)
      throw NonMonotoneOccasions(
          events_path + ": row " + std::to_string(file_row) + ": subject '" +
          id + "' occasion " + ev.rows[r][1] + ", expected " +
          std::to_string(expected));
    const std::string& gap_cell = ev.rows[r][2];
    if (gap_cell.empty()) {
      // covariate-only row for the censored occasion; must be last and only
      // meaningful when time-varying covariates exist
      if (p2 == 0)
        throw ParseError(events_path + ": row " + std::to_string(file_row) +
                         ": empty gap without time-varying covariates");
    } else {
      if (s.x_time.size() > s.y.size())
        throw NonMonotoneOccasions(events_path + ": row " +
                                   std::to_string(file_row) + ": subject '" +
                                   id + "' has gaps after its censored row");
      const double v = parse_cell(gap_cell, events_path, file_row, 3);
      if (raw_gaps && !(v > 0.0))
        throw ParseError(events_path + ": row " + std::to_string(file_row) +
                         ": raw gap must be positive, got " + gap_cell);
      s.y.push_back(raw_gaps ? std::log(v) : v);
    }
    if (p2 > 0) {
      Eigen::VectorXd xt(p2);
      for (int j = 0; j < p2; ++j)
        xt[j] = parse_cell(ev.rows[r][3 + j], events_path, file_row, 4 + j);
      s.x_time.push_back(std::move(xt));
    }
  }

  for (int i = 0; i < n; ++i) {
    RecSubject& s = d.subjects[i];
    if (s.y.empty())
      throw ParseError(events_path + ": subject '" + out.subject_ids[i] +
                       "' has no event rows");
    double total = 0.0;
    for (double lg : s.y) total += std::exp(lg);
    if (!(tau[i] > total))
      throw CensorBeforeLastEvent(
          subjects_path + ": subject '" + out.subject_ids[i] +
          "': tau = " + fmt(tau[i]) +
          " does not exceed the summed gaps = " + fmt(total));
    const double computed = std::log(tau[i] - total);
    if (std::isnan(bound_in[i])) {
      s.censor_bound = computed;
    } else {
      if (std::fabs(bound_in[i] - computed) >
          1e-6 * (1.0 + std::fabs(computed)))
        throw ParseError(subjects_path + ": subject '" + out.subject_ids[i] +
                         "': log_censor_gap disagrees with tau");
      s.censor_bound = bound_in[i];
    }
    if (p2 > 0 && static_cast<int>(s.x_time.size()) != s.m() + 1)
      throw ParseError(events_path + ": subject '" + out.subject_ids[i] +
                       "' has " + std::to_string(s.x_time.size()) +
                       " occasion covariate rows, expected " +
                       std::to_string(s.m() + 1) +
                       " (observed gaps plus the censored occasion)");
    s.x_fixed.resize(cont.cols() + bin.cols());
    for (int j = 0; j < cont.cols(); ++j) s.x_fixed[j] = cont(i, j);
    for (int j = 0; j < bin.cols(); ++j)
      s.x_fixed[static_cast<int>(cont.cols()) + j] = bin(i, j);
  }
  d.p1 = static_cast<int>(cont.cols() + bin.cols());

  if (cont.cols() + bin.cols() > 0) {
    d.X = make_covariates(std::move(cont), std::move(bin), metric);
  } else {
    d.X.n = n;  // no similarity covariates: only the constant g is usable
  }
  finalize(d);
  out.data = std::move(d);
  return out;
}

void save_recurrent_csv(const RecurrentDataset& d,
                        const std::string& events_path,
                        const std::string& subjects_path,
                        const std::vector<std::string>& subject_ids,
                        const std::vector<std::string>& cont_names,
                        const std::vector<std::string>& bin_names,
                        const std::vector<std::string>& time_names) {
  auto sid = [&](int i) {
    return i < static_cast<int>(subject_ids.size())
               ? subject_ids[i]
               : "s" + std::to_string(i + 1);
  };

  std::ofstream ev = open_out(events_path);
  ev << "subject,occasion,log_gap";
  for (int j = 0; j < d.p2; ++j)
    ev << ",t:" << nth_name(time_names, static_cast<std::size_t>(j));
  ev << '\n';
  for (int i = 0; i < d.n(); ++i) {
    const RecSubject& s = d.subjects[i];
    for (int t = 0; t < s.horizon(); ++t) {
      ev << sid(i) << ',' << (t + 1) << ',';
      if (t < s.m()) ev << fmt(s.y[t]);
      for (int j = 0; j < d.p2; ++j) ev << ',' << fmt(s.x_time[t][j]);
      ev << '\n';
    }
  }

  std::ofstream su = open_out(subjects_path);
  su << "subject,tau";
  for (int j = 0; j < d.X.mc; ++j)
    su << ",c:" << nth_name(cont_names, static_cast<std::size_t>(j));
  for (int j = 0; j < d.X.mb; ++j)
    su << ",b:" << nth_name(bin_names, static_cast<std::size_t>(j));
  su << ",log_censor_gap\n";
  for (int i = 0; i < d.n(); ++i) {
    const RecSubject& s = d.subjects[i];
    double total = 0.0;
    for (double lg : s.y) total += std::exp(lg);
    const double tau = total + std::exp(s.censor_bound);
    su << sid(i) << ',' << fmt(tau);
    for (int j = 0; j < d.X.mc; ++j) su << ',' << fmt(d.X.continuous(i, j));
    for (int j = 0; j < d.X.mb; ++j)
      su << ',' << (d.X.binary(i, j) != 0.0 ? '1' : '0');
    su << ',' << fmt(s.censor_bound) << '\n';
  }
}

std::string pack_ints(const std::vector<std::int32_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ';';
    s += std::to_string(v[i]);
  }
  return s;
}

std::string pack_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ';';
    s += fmt(v[i]);
  }
  return s;
}

namespace {

std::vector<std::string> split_packed(const std::string& s) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t semi = s.find(';', start);
    if (semi == std::string::npos) {
      parts.push_back(s.substr(start));
      break;
    }
    parts.push_back(s.substr(start, semi - start));
    start = semi + 1;
  }
  return parts;
}

}  // namespace

std::vector<std::int32_t> unpack_ints(const std::string& s) {
  std::vector<std::int32_t> out;
  if (s.empty()) return out;
  for (const std::string& p : split_packed(s))
    out.push_back(static_cast<std::int32_t>(std::strtol(p.c_str(), nullptr, 10)));
  return out;
}

std::vector<double> unpack_doubles(const std::string& s) {
  std::vector<double> out;
  if (s.empty()) return out;
  for (const std::string& p : split_packed(s))
    out.push_back(std::strtod(p.c_str(), nullptr));
  return out;
}

void write_conjugate_trace_csv(const ConjTrace& t, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "iter,u,k,alloc,log_pred\n";
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const ConjTraceRow& row = t.rows[r];
    out << r << ',' << fmt(row.u) << ',' << row.params.size() << ','
        << pack_ints(row.alloc) << ',' << pack_doubles(row.log_pred) << '\n';
  }
}

void write_conjugate_params_csv(const ConjTrace& t, const std::string& path) {
  std::ofstream out = open_out(path);
  const int p =
      t.rows.empty() || t.rows[0].params.empty()
          ? 0
          : static_cast<int>(t.rows[0].params[0].beta.size());
  out << "iter,block,sigma2";
  for (int j = 0; j < p; ++j) out << ",beta" << j;
  out << '\n';
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    for (std::size_t b = 0; b < t.rows[r].params.size(); ++b) {
      const ConjClusterParams& cp = t.rows[r].params[b];
      out << r << ',' << b << ',' << fmt(cp.sigma2);
      for (int j = 0; j < cp.beta.size(); ++j) out << ',' << fmt(cp.beta[j]);
      out << '\n';
    }
}

ConjTrace load_conjugate_trace_csv(const std::string& trace_path,
                                   const std::string& params_path) {
  CsvTable t = read_csv(trace_path);
  if (t.header != std::vector<std::string>{"iter", "u", "k", "alloc",
                                           "log_pred"})
    throw ParseError(trace_path + ": unexpected trace header");
  ConjTrace out;
  out.rows.resize(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const int file_row = static_cast<int>(r) + 2;
    ConjTraceRow& row = out.rows[r];
    row.u = parse_cell(t.rows[r][1], trace_path, file_row, 2);
    row.alloc = unpack_ints(t.rows[r][3]);
    row.log_pred = unpack_doubles(t.rows[r][4]);
    const int k = static_cast<int>(
        parse_cell(t.rows[r][2], trace_path, file_row, 3));
    row.params.resize(k);
    if (row.alloc.empty())
      throw ParseError(trace_path + ": row " + std::to_string(file_row) +
                       ": empty allocation");
  }
  if (!params_path.empty()) {
    CsvTable pt = read_csv(params_path);
    if (pt.header.size() < 3)
      throw ParseError(params_path + ": unexpected params header");
    const int p = static_cast<int>(pt.header.size()) - 3;
    for (std::size_t r = 0; r < pt.rows.size(); ++r) {
      const int file_row = static_cast<int>(r) + 2;
      const std::size_t it = static_cast<std::size_t>(
          parse_cell(pt.rows[r][0], params_path, file_row, 1));
      const std::size_t b = static_cast<std::size_t>(
          parse_cell(pt.rows[r][1], params_path, file_row, 2));
      if (it >= out.rows.size() || b >= out.rows[it].params.size())
        throw ParseError(params_path + ": row " + std::to_string(file_row) +
                         ": (iter, block) outside the trace");
      ConjClusterParams& cp = out.rows[it].params[b];
      cp.sigma2 = parse_cell(pt.rows[r][2], params_path, file_row, 3);
      cp.beta.resize(p);
      for (int j = 0; j < p; ++j)
        cp.beta[j] = parse_cell(pt.rows[r][3 + j], params_path, file_row,
                                4 + j);
    }
  }
  return out;
}

}  // namespace ppmxmixt
