#include "fracdiff/checkpoint.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <type_traits>

#include "fracdiff/error.hpp"

namespace fracdiff {

namespace {

constexpr char kMagic[8] = {'F', 'R', 'A', 'C', 'D', 'I', 'F', 'F'};

class Writer {
 public:
  template <class T>
  void put(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    buf_.append(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void put_vec(const std::vector<double>& v) {
    put<std::uint64_t>(v.size());
    buf_.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
  }
  void put_str(const std::string& s) {
    put<std::uint64_t>(s.size());
    buf_ += s;
  }
  void section(const char tag[4], const std::string& payload) {
    buf_.append(tag, 4);
    put<std::uint64_t>(payload.size());
    buf_ += payload;
  }
  std::string& str() { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(const std::string& s) : s_(s) {}
  template <class T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, s_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::vector<double> get_vec() {
    const auto n = get<std::uint64_t>();
    if (n > (s_.size() - pos_) / sizeof(double)) fail(ErrorKind::Parse, "truncated array");
    std::vector<double> v(n);
    std::memcpy(v.data(), s_.data() + pos_, n * sizeof(double));
    pos_ += n * sizeof(double);
    return v;
  }
  std::string get_str() {
    const auto n = get<std::uint64_t>();
    need(n);
    std::string v = s_.substr(pos_, n);
    pos_ += n;
    return v;
  }
  std::string get_raw(std::size_t n) {
    need(n);
    std::string v = s_.substr(pos_, n);
    pos_ += n;
    return v;
  }
  bool done() const { return pos_ >= s_.size(); }

 private:
  void need(std::size_t n) const {
    if (n > s_.size() - pos_) fail(ErrorKind::Parse, "checkpoint is truncated");
  }
  const std::string& s_;
  std::size_t pos_ = 0;
};

std::string schedule_json(const Schedule& s) {
  nlohmann::json j;
  j["kind"] = to_string(s.kind);
  j["sigma_min"] = s.sigma_min;
  j["sigma_max"] = s.sigma_max;
  j["beta_min"] = s.beta_min;
  j["beta_max"] = s.beta_max;
  j["horizon_T"] = s.horizon_T;
  j["norm_factor"] = s.norm_factor;
  return j.dump();
}

Schedule schedule_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    Schedule s;
    s.kind = parse_dynamics(j.at("kind").get<std::string>());
    s.sigma_min = j.at("sigma_min").get<double>();
    s.sigma_max = j.at("sigma_max").get<double>();
    s.beta_min = j.at("beta_min").get<double>();
    s.beta_max = j.at("beta_max").get<double>();
    s.horizon_T = j.at("horizon_T").get<double>();
    s.norm_factor = j.at("norm_factor").get<double>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, std::string("bad schedule section: ") + e.what());
  }
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }
Eigen::VectorXd from_std(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string serialize_tables(const KernelTables& t) {
  Writer w;
  w.put<double>(t.H);
  w.put_vec(t.x);
  w.put_vec(t.q);
  w.put<double>(t.c_h);
  w.put<double>(t.T);
  w.put<std::uint64_t>(t.K);
  w.put<std::uint64_t>(t.stride);
  for (const auto* v : {&t.g_inner, &t.c_inner, &t.times, &t.c_vals, &t.sigma2, &t.sigma2_i,
                        &t.tau2_i, &t.tau2_tilde_i, &t.yz_cov_i, &t.xcov_i, &t.xzcov_i, &t.rho_i}) {
    w.put_vec(*v);
  }
  return w.str();
}

KernelTables deserialize_tables(const std::string& bytes) {
  Reader r(bytes);
  KernelTables t;
  t.H = r.get<double>();
  t.x = r.get_vec();
  t.q = r.get_vec();
  t.c_h = r.get<double>();
  t.T = r.get<double>();
  t.K = r.get<std::uint64_t>();
  t.stride = r.get<std::uint64_t>();
  for (auto* v : {&t.g_inner, &t.c_inner, &t.times, &t.c_vals, &t.sigma2, &t.sigma2_i, &t.tau2_i,
                  &t.tau2_tilde_i, &t.yz_cov_i, &t.xcov_i, &t.xzcov_i, &t.rho_i}) {
    *v = r.get_vec();
  }
  if (t.K == 0 || t.stride == 0 || t.g_inner.size() != t.K + 1 ||
      t.times.size() != t.K / t.stride + 1 || t.sigma2_i.size() != t.times.size() * t.x.size()) {
    fail(ErrorKind::Parse, "inconsistent kernel table section");
  }
  return t;
}

ScoreNet Checkpoint::ema_net() const {
  return ScoreNet::from_parts(net.dim(), net.hidden(), net.frequencies(), ema);
}

std::string checkpoint_to_bytes(const Checkpoint& c) {
  Writer w;
  w.str().append(kMagic, 8);
  w.put<std::uint32_t>(kCheckpointVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(c.dim));
  w.put<double>(c.H);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(c.schedule.kind));

  w.section("GRID", c.grid.to_text());
  w.section("SCHD", schedule_json(c.schedule));
  {
    Writer t;
    t.put<std::uint64_t>(c.grid.hash());
    t.put_str(serialize_tables(c.tables));
    w.section("TABL", t.str());
  }
  {
    Writer s;
    s.put_vec(to_std(c.standardizer.mean));
    s.put_vec(to_std(c.standardizer.std));
    w.section("STDZ", s.str());
  }
  w.section("CONF", c.config_text);
  {
    Writer n;
    n.put<std::uint32_t>(static_cast<std::uint32_t>(c.net.hidden().size()));
    for (int h : c.net.hidden()) n.put<std::uint32_t>(static_cast<std::uint32_t>(h));
    n.put_vec(c.net.frequencies());
    w.section("ARCH", n.str());
  }
  {
    Writer p;
    p.put_vec(c.net.params());
    w.section("RAWW", p.str());
  }
  {
    Writer p;
    p.put_vec(c.ema);
    w.section("EMAW", p.str());
  }
  w.section("RNGS", c.rng_state);
  {
    Writer s;
    s.put<double>(c.final_loss);
    s.put<std::int64_t>(c.steps);
    w.section("TRST", s.str());
  }
  w.section("END ", "");
  return w.str();
}

Checkpoint checkpoint_from_bytes(const std::string& bytes) {
  Reader r(bytes);
  if (r.get_raw(8) != std::string(kMagic, 8)) fail(ErrorKind::Parse, "not a checkpoint file");
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    fail(ErrorKind::Parse, "checkpoint version " + std::to_string(version) + " is not supported (expected " +
                               std::to_string(kCheckpointVersion) + ")");
  }
  Checkpoint c;
  c.dim = static_cast<int>(r.get<std::uint32_t>());
  c.H = r.get<double>();
  const auto kind = r.get<std::uint32_t>();
  std::vector<int> hidden;
  std::vector<double> freqs, raw;
  bool have_grid = false, have_tables = false, have_arch = false, ended = false;
  std::uint64_t tables_grid_hash = 0;
  while (!r.done()) {
    const std::string tag = r.get_raw(4);
    const std::string payload = r.get_str();
    if (tag == "END ") {
      ended = true;
      break;
    }
    if (tag == "GRID") {
      c.grid = SpaceGrid::from_text(payload);
      have_grid = true;
    } else if (tag == "SCHD") {
      c.schedule = schedule_from_json(payload);
    } else if (tag == "TABL") {
      Reader t(payload);
      tables_grid_hash = t.get<std::uint64_t>();
      c.tables = deserialize_tables(t.get_str());
      have_tables = true;
    } else if (tag == "STDZ") {
      Reader s(payload);
      c.standardizer.mean = from_std(s.get_vec());
      c.standardizer.std = from_std(s.get_vec());
    } else if (tag == "CONF") {
      c.config_text = payload;
    } else if (tag == "ARCH") {
      Reader n(payload);
      const auto layers = n.get<std::uint32_t>();
      for (std::uint32_t k = 0; k < layers; ++k) hidden.push_back(static_cast<int>(n.get<std::uint32_t>()));
      freqs = n.get_vec();
      have_arch = true;
    } else if (tag == "RAWW") {
      Reader p(payload);
      raw = p.get_vec();
    } else if (tag == "EMAW") {
      Reader p(payload);
      c.ema = p.get_vec();
    } else if (tag == "RNGS") {
      c.rng_state = payload;
    } else if (tag == "TRST") {
      Reader s(payload);
      c.final_loss = s.get<double>();
      c.steps = s.get<std::int64_t>();
    }
    // unknown tags are skipped
  }
  if (!ended) fail(ErrorKind::Parse, "checkpoint has no end marker");
  if (!have_grid || !have_tables || !have_arch) fail(ErrorKind::Parse, "checkpoint is missing sections");
  if (tables_grid_hash != c.grid.hash()) fail(ErrorKind::Parse, "kernel tables do not match the grid");
  if (static_cast<std::uint32_t>(c.schedule.kind) != kind) {
    fail(ErrorKind::Parse, "header and schedule section disagree");
  }
  c.net = ScoreNet::from_parts(c.dim, hidden, freqs, raw);
  if (c.ema.size() != c.net.n_params()) fail(ErrorKind::Parse, "EMA weights have the wrong size");
  return c;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write " + tmp);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) fail(ErrorKind::Io, "write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorKind::Io, "cannot rename " + tmp + ": " + ec.message());
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  write_file_atomic(path, checkpoint_to_bytes(ckpt));
}

Checkpoint load_checkpoint(const std::string& path) { return checkpoint_from_bytes(read_file(path)); }

}  // namespace fracdiff
