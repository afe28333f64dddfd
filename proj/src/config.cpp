#include "ppmxmixt/config.hpp"

#include <cctype>
#include <cerrno>
#include <climits>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ppmxmixt/errors.hpp"

namespace ppmxmixt {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const char* want) {
  throw ValidationError("config key '" + key + "': cannot parse '" + value +
                        "' as " + want);
}

}  // namespace

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

KeyValueConfig KeyValueConfig::from_string(const std::string& text) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("config line " + std::to_string(lineno) +
                       ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ParseError("config line " + std::to_string(lineno) +
                       ": empty key");
    if (cfg.kv_.count(key))
      throw ParseError("config line " + std::to_string(lineno) +
                       ": duplicate key '" + key + "'");
    cfg.kv_[key] = value;
  }
  return cfg;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  kv_[key] = value;
}

std::string KeyValueConfig::get_string(const std::string& key) const {
  auto it = kv_.find(key);
  if (it == kv_.end())
    throw ValidationError("missing required config key '" + key + "'");
  read_.insert(key);
  return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& fallback) const {
  read_.insert(key);
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key) const {
  const std::string v = get_string(key);
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end != v.c_str() + v.size() || v.empty() || errno == ERANGE)
    bad_value(key, v, "a number");
  return x;
}

double KeyValueConfig::get_double(const std::string& key,
                                  double fallback) const {
  read_.insert(key);
  return kv_.count(key) ? get_double(key) : fallback;
}

int KeyValueConfig::get_int(const std::string& key) const {
  const std::string v = get_string(key);
  errno = 0;
  char* end = nullptr;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (end != v.c_str() + v.size() || v.empty() || errno == ERANGE ||
      x < INT_MIN || x > INT_MAX)
    bad_value(key, v, "an integer");
  return static_cast<int>(x);
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
  read_.insert(key);
  return kv_.count(key) ? get_int(key) : fallback;
}

std::uint64_t KeyValueConfig::get_uint64(const std::string& key,
                                         std::uint64_t fallback) const {
  read_.insert(key);
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  const std::string& v = it->second;
  errno = 0;
  char* end = nullptr;
  const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (end != v.c_str() + v.size() || v.empty() || errno == ERANGE ||
      v.find('-') != std::string::npos)
    bad_value(key, v, "a non-negative integer");
  return static_cast<std::uint64_t>(x);
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  read_.insert(key);
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  bad_value(key, v, "a boolean (true/false)");
}

std::vector<std::string> KeyValueConfig::unread_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : kv_)
    if (!read_.count(k)) out.push_back(k);
  return out;
}

const char* to_string(ModelKind m) {
  return m == ModelKind::ConjugateRegression ? "conjugate_regression"
                                             : "recurrent";
}

const char* to_string(SimilarityFamily f) {
  switch (f) {
    case SimilarityFamily::GA: return "GA";
    case SimilarityFamily::GB: return "GB";
    case SimilarityFamily::GC: return "GC";
    default: return "ONE";
  }
}

const char* to_string(InitKind k) {
  return k == InitKind::Singletons ? "singletons" : "kmeans";
}

const char* to_string(MetricKind k) {
  return k == MetricKind::Pooled ? "pooled" : "identity";
}

ConjPriorConfig RunConfig::conj_prior(int p) const {
  ConjPriorConfig c;
  c.mu0 = Eigen::VectorXd::Constant(p, prior_mu0);
  c.B0 = Eigen::MatrixXd::Identity(p, p) * prior_b0_scale;
  c.a0 = prior_a0;
  c.b0 = prior_b0;
  return c;
}

RecPriorConfig RunConfig::rec_prior(int p1) const {
  RecPriorConfig c = rec;
  c.Sigma0 = Eigen::MatrixXd::Identity(p1, p1) * rec_sigma0_scale;
  return c;
}

namespace {

// the full key vocabulary; anything else in a config file is a typo
const char* const kKnownKeys[] = {
    "model",
    "ngg.kappa",
    "ngg.sigma",
    "similarity.family",
    "similarity.lambda",
    "similarity.alpha",
    "similarity.eps_star",
    "sampler.n_iter",
    "sampler.n_burnin",
    "sampler.u_proposal_sd",
    "sampler.init",
    "sampler.adapt_u_proposal",
    "covariates.metric",
    "prior.mu0",
    "prior.B0_scale",
    "prior.a0",
    "prior.b0",
    "rec.R",
    "rec.alpha0",
    "rec.psi0",
    "rec.kappa0",
    "rec.kappa1",
    "rec.a",
    "rec.b",
    "rec.nu0",
    "rec.gamma0",
    "rec.Sigma0_scale",
    "seed",
    "output_dir",
};

std::string env_name(const std::string& key) {
  std::string e = "PPMXMIXT_";
  for (char c : key)
    e += (c == '.') ? '_' : static_cast<char>(std::toupper(
                                static_cast<unsigned char>(c)));
  return e;
}

}  // namespace

RunConfig make_run_config(KeyValueConfig& kv) {
  for (const char* key : kKnownKeys) {
    const char* env = std::getenv(env_name(key).c_str());
    if (env != nullptr) kv.set(key, env);
  }

  RunConfig cfg;

  const std::string model = kv.get_string("model", "conjugate_regression");
  if (model == "conjugate_regression")
    cfg.model = ModelKind::ConjugateRegression;
  else if (model == "recurrent")
    cfg.model = ModelKind::Recurrent;
  else
    throw ValidationError(
        "config key 'model': expected conjugate_regression or recurrent, got "
        "'" +
        model + "'");

  cfg.ngg.kappa = kv.get_double("ngg.kappa", cfg.ngg.kappa);
  cfg.ngg.sigma = kv.get_double("ngg.sigma", cfg.ngg.sigma);

  const std::string fam = kv.get_string("similarity.family", "ONE");
  if (fam == "GA")
    cfg.similarity.family = SimilarityFamily::GA;
  else if (fam == "GB")
    cfg.similarity.family = SimilarityFamily::GB;
  else if (fam == "GC")
    cfg.similarity.family = SimilarityFamily::GC;
  else if (fam == "ONE")
    cfg.similarity.family = SimilarityFamily::ONE;
  else
    throw ValidationError(
        "config key 'similarity.family': expected GA, GB, GC or ONE, got '" +
        fam + "'");
  cfg.similarity.lambda =
      kv.get_double("similarity.lambda", cfg.similarity.lambda);
  cfg.similarity.alpha =
      kv.get_double("similarity.alpha", cfg.similarity.alpha);
  cfg.eps_star = kv.get_double("similarity.eps_star", cfg.eps_star);
  if (kv.has("similarity.eps_star") && !(cfg.eps_star > 0.0))
    throw ValidationError("config key 'similarity.eps_star' must be positive");

  cfg.sampler.n_iter = kv.get_int("sampler.n_iter", cfg.sampler.n_iter);
  cfg.sampler.n_burnin = kv.get_int("sampler.n_burnin", cfg.sampler.n_burnin);
  cfg.sampler.u_proposal_sd =
      kv.get_double("sampler.u_proposal_sd", cfg.sampler.u_proposal_sd);
  const std::string init = kv.get_string("sampler.init", "singletons");
  if (init == "singletons")
    cfg.sampler.init = InitKind::Singletons;
  else if (init == "kmeans")
    cfg.sampler.init = InitKind::KmeansStyle;
  else
    throw ValidationError(
        "config key 'sampler.init': expected singletons or kmeans, got '" +
        init + "'");
  cfg.sampler.adapt_u_proposal =
      kv.get_bool("sampler.adapt_u_proposal", cfg.sampler.adapt_u_proposal);

  const std::string metric = kv.get_string("covariates.metric", "pooled");
  if (metric == "pooled")
    cfg.metric = MetricKind::Pooled;
  else if (metric == "identity")
    cfg.metric = MetricKind::Identity;
  else
    throw ValidationError(
        "config key 'covariates.metric': expected pooled or identity, got '" +
        metric + "'");

  cfg.prior_mu0 = kv.get_double("prior.mu0", cfg.prior_mu0);
  cfg.prior_b0_scale = kv.get_double("prior.B0_scale", cfg.prior_b0_scale);
  cfg.prior_a0 = kv.get_double("prior.a0", cfg.prior_a0);
  cfg.prior_b0 = kv.get_double("prior.b0", cfg.prior_b0);
  if (!(cfg.prior_b0_scale > 0.0))
    throw ValidationError("config key 'prior.B0_scale' must be positive");
  if (!(cfg.prior_a0 > 0.0))
    throw ValidationError("config key 'prior.a0' must be positive");
  if (!(cfg.prior_b0 > 0.0))
    throw ValidationError("config key 'prior.b0' must be positive");

  cfg.rec.R = kv.get_int("rec.R", cfg.rec.R);
  cfg.rec.alpha0 = kv.get_double("rec.alpha0", cfg.rec.alpha0);
  cfg.rec.psi0 = kv.get_double("rec.psi0", cfg.rec.psi0);
  cfg.rec.kappa0 = kv.get_double("rec.kappa0", cfg.rec.kappa0);
  cfg.rec.kappa1 = kv.get_double("rec.kappa1", cfg.rec.kappa1);
  cfg.rec.a = kv.get_double("rec.a", cfg.rec.a);
  cfg.rec.b = kv.get_double("rec.b", cfg.rec.b);
  cfg.rec.nu0 = kv.get_double("rec.nu0", cfg.rec.nu0);
  cfg.rec.gamma0 = kv.get_double("rec.gamma0", cfg.rec.gamma0);
  cfg.rec_sigma0_scale =
      kv.get_double("rec.Sigma0_scale", cfg.rec_sigma0_scale);
  if (!(cfg.rec_sigma0_scale > 0.0))
    throw ValidationError("config key 'rec.Sigma0_scale' must be positive");

  cfg.seed = kv.get_uint64("seed", cfg.seed);
  cfg.output_dir = kv.get_string("output_dir", cfg.output_dir);

  const std::vector<std::string> leftover = kv.unread_keys();
  if (!leftover.empty())
    throw ValidationError("unknown config key '" + leftover.front() + "'");

  validate(cfg.ngg);
  validate(cfg.similarity);
  validate(cfg.sampler);
  validate(cfg.rec_prior(1));
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  KeyValueConfig kv = KeyValueConfig::from_file(path);
  return make_run_config(kv);
}

std::string run_config_text(const RunConfig& cfg) {
  std::ostringstream out;
  out.precision(17);
  out << "model = " << to_string(cfg.model) << '\n'
      << "ngg.kappa = " << cfg.ngg.kappa << '\n'
      << "ngg.sigma = " << cfg.ngg.sigma << '\n'
      << "similarity.family = " << to_string(cfg.similarity.family) << '\n'
      << "similarity.lambda = " << cfg.similarity.lambda << '\n'
      << "similarity.alpha = " << cfg.similarity.alpha << '\n'
      << "similarity.eps_star = " << cfg.eps_star << '\n'
      << "sampler.n_iter = " << cfg.sampler.n_iter << '\n'
      << "sampler.n_burnin = " << cfg.sampler.n_burnin << '\n'
      << "sampler.u_proposal_sd = " << cfg.sampler.u_proposal_sd << '\n'
      << "sampler.init = " << to_string(cfg.sampler.init) << '\n'
      << "sampler.adapt_u_proposal = "
      << (cfg.sampler.adapt_u_proposal ? "true" : "false") << '\n'
      << "covariates.metric = " << to_string(cfg.metric) << '\n'
      << "prior.mu0 = " << cfg.prior_mu0 << '\n'
      << "prior.B0_scale = " << cfg.prior_b0_scale << '\n'
      << "prior.a0 = " << cfg.prior_a0 << '\n'
      << "prior.b0 = " << cfg.prior_b0 << '\n'
      << "rec.R = " << cfg.rec.R << '\n'
      << "rec.alpha0 = " << cfg.rec.alpha0 << '\n'
      << "rec.psi0 = " << cfg.rec.psi0 << '\n'
      << "rec.kappa0 = " << cfg.rec.kappa0 << '\n'
      << "rec.kappa1 = " << cfg.rec.kappa1 << '\n'
      << "rec.a = " << cfg.rec.a << '\n'
      << "rec.b = " << cfg.rec.b << '\n'
      << "rec.nu0 = " << cfg.rec.nu0 << '\n'
      << "rec.gamma0 = " << cfg.rec.gamma0 << '\n'
      << "rec.Sigma0_scale = " << cfg.rec_sigma0_scale << '\n'
      << "seed = " << cfg.seed << '\n'
      << "output_dir = " << cfg.output_dir << '\n';
  return out.str();
}

std::uint64_t config_hash(const RunConfig& cfg) {
  const std::string text = run_config_text(cfg);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace ppmxmixt
