#include "fracdiff/run_config.hpp"

#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <vector>

#include "fracdiff/error.hpp"

namespace fracdiff {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::logic_error&) {
  }
  fail(ErrorKind::Config, "key '" + key + "' expects a number, got '" + v + "'");
}

long long to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long d = std::stoll(v, &used);
    if (used == v.size()) return d;
  } catch (const std::logic_error&) {
  }
  fail(ErrorKind::Config, "key '" + key + "' expects an integer, got '" + v + "'");
}

std::size_t to_count(const std::string& key, const std::string& v) {
  const long long n = to_int(key, v);
  if (n < 0) fail(ErrorKind::Config, "key '" + key + "' must be non-negative");
  return static_cast<std::size_t>(n);
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct Field {
  Setter set;
  Getter get;
};

#define FD_DOUBLE(expr)                                                                     \
  Field {                                                                                   \
    [](RunConfig& c, const std::string& k, const std::string& v) { c.expr = to_double(k, v); }, \
        [](const RunConfig& c) { return fmt(c.expr); }                                      \
  }
#define FD_COUNT(expr)                                                                      \
  Field {                                                                                   \
    [](RunConfig& c, const std::string& k, const std::string& v) {                          \
      c.expr = static_cast<decltype(c.expr)>(to_count(k, v));                               \
    },                                                                                      \
        [](const RunConfig& c) { return std::to_string(c.expr); }                           \
  }
#define FD_STRING(expr)                                                                           \
  Field {                                                                                         \
    [](RunConfig& c, const std::string&, const std::string& v) { c.expr = v; },                   \
        [](const RunConfig& c) { return c.expr; }                                                 \
  }

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = {
      {"H", FD_DOUBLE(H)},
      {"kind",
       {[](RunConfig& c, const std::string&, const std::string& v) {
          c.schedule.kind = parse_dynamics(v);
        },
        [](const RunConfig& c) { return to_string(c.schedule.kind); }}},
      {"sigma_min", FD_DOUBLE(schedule.sigma_min)},
      {"sigma_max", FD_DOUBLE(schedule.sigma_max)},
      {"beta_min", FD_DOUBLE(schedule.beta_min)},
      {"beta_max", FD_DOUBLE(schedule.beta_max)},
      {"horizon_T", FD_DOUBLE(schedule.horizon_T)},
      {"m", FD_COUNT(m)},
      {"r", FD_DOUBLE(r)},
      {"K", FD_COUNT(K)},
      {"output_stride", FD_COUNT(output_stride)},
      {"batch_size", FD_COUNT(train.batch_size)},
      {"steps", FD_COUNT(train.steps)},
      {"learning_rate", FD_DOUBLE(train.learning_rate)},
      {"ema_decay", FD_DOUBLE(train.ema_decay)},
      {"eps_t", FD_DOUBLE(train.eps_t)},
      {"weighting",
       {[](RunConfig& c, const std::string& k, const std::string& v) {
          if (v == "sigma2") {
            c.train.weighting = LossWeighting::SigmaSquared;
          } else if (v == "unit") {
            c.train.weighting = LossWeighting::Unit;
          } else {
            fail(ErrorKind::Config, "key '" + k + "' expects sigma2 or unit, got '" + v + "'");
          }
        },
        [](const RunConfig& c) {
          return std::string(c.train.weighting == LossWeighting::SigmaSquared ? "sigma2" : "unit");
        }}},
      {"method",
       {[](RunConfig& c, const std::string&, const std::string& v) {
          c.sampler.method = parse_method(v);
        },
        [](const RunConfig& c) { return to_string(c.sampler.method); }}},
      {"n_steps", FD_COUNT(sampler.n_steps)},
      {"n_samples", FD_COUNT(sampler.n_samples)},
      {"t_end", FD_DOUBLE(sampler.t_end)},
      {"dataset", FD_STRING(dataset)},
      {"data_path", FD_STRING(data_path)},
      {"n_train", FD_COUNT(n_train)},
      {"n_eval", FD_COUNT(n_eval)},
      {"noise_std", FD_DOUBLE(noise_std)},
      {"noise_paths", FD_COUNT(noise_paths)},
      {"noise_K", FD_COUNT(noise_K)},
      {"noise_dims", FD_COUNT(noise_dims)},
      {"noise_record_stride", FD_COUNT(noise_record_stride)},
      {"n_slices", FD_COUNT(metrics.n_slices)},
      {"knn_k", FD_COUNT(metrics.k)},
      {"vendi_kernel",
       {[](RunConfig& c, const std::string& k, const std::string& v) {
          if (v == "cosine") {
            c.metrics.vendi.kernel = VendiKernel::Cosine;
          } else if (v == "rbf") {
            c.metrics.vendi.kernel = VendiKernel::Rbf;
          } else {
            fail(ErrorKind::Config, "key '" + k + "' expects cosine or rbf, got '" + v + "'");
          }
        },
        [](const RunConfig& c) {
          return std::string(c.metrics.vendi.kernel == VendiKernel::Cosine ? "cosine" : "rbf");
        }}},
      {"vendi_bandwidth", FD_DOUBLE(metrics.vendi.bandwidth)},
      {"seed", FD_COUNT(seed)},
      {"threads", FD_COUNT(threads)},
      {"out", FD_STRING(out)},
  };
  return table;
}

#undef FD_DOUBLE
#undef FD_COUNT
#undef FD_STRING

}  // namespace

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> unknown;
  std::map<std::string, std::size_t> seen;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      fail(ErrorKind::Config, "line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    const auto it = fields().find(key);
    if (it == fields().end()) {
      unknown.push_back(key);
      continue;
    }
    if (seen.count(key)) {
      fail(ErrorKind::Config, "line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    seen[key] = lineno;
    it->second.set(c, key, value);
  }
  if (!unknown.empty()) {
    std::string names;
    for (const auto& k : unknown) names += (names.empty() ? "" : ", ") + k;
    fail(ErrorKind::Config, "unknown config keys: " + names);
  }
  if (!seen.count("H")) fail(ErrorKind::Config, "missing required key 'H'");
  HurstIndex(c.H);  // range check
  c.schedule.validate();
  c.finalize();
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string RunConfig::to_text() const {
  std::ostringstream out;
  for (const auto& [key, f] : fields()) out << key << '=' << f.get(*this) << '\n';
  return out.str();
}

void RunConfig::finalize() {
  train.seed = seed;
  sampler.seed = seed;
  sampler.threads = threads;
  metrics.seed = seed;
  metrics.vendi.seed = seed;
}

void RunConfig::validate_for_training() const {
  if (H > 0.5) {
    fail(ErrorKind::Unsupported,
         "training requires H <= 0.5: learned-score rescaling is only derived for H <= 1/2");
  }
  train.validate();
}

}  // namespace fracdiff
