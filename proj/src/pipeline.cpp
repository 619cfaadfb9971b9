#include "fracdiff/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "fracdiff/error.hpp"
#include "fracdiff/fbm_noise.hpp"

namespace fracdiff {

namespace fs = std::filesystem;

namespace {

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::Io, "cannot create directory " + dir + ": " + ec.message());
}

std::string hex(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

}  // namespace

Prepared prepare(const RunConfig& cfg) {
  Prepared p;
  p.grid = build_space_grid(HurstIndex(cfg.H), cfg.m, cfg.r, cfg.schedule.horizon_T);
  auto [schedule, tables] =
      build_normalized_tables(cfg.schedule, p.grid, {cfg.K, cfg.output_stride});
  p.schedule = schedule;
  p.tables = std::move(tables);
  return p;
}

Dataset load_dataset(const RunConfig& cfg, std::size_t n, std::uint64_t seed) {
  if (cfg.dataset == "half_moons") return half_moons(n, cfg.noise_std, seed);
  if (cfg.dataset == "gaussian") return gaussian_reference(n, 2, seed);
  if (cfg.dataset == "csv") {
    if (cfg.data_path.empty()) fail(ErrorKind::Config, "dataset=csv needs data_path");
    Dataset ds;
    ds.name = "csv";
    const Eigen::MatrixXd raw = read_points_csv(cfg.data_path);
    ds.standardizer = Standardizer::fit(raw);
    ds.points = ds.standardizer.apply(raw);
    return ds;
  }
  fail(ErrorKind::Config, "unknown dataset '" + cfg.dataset + "'");
}

Checkpoint train_checkpoint(const RunConfig& cfg, std::ostream* log, std::vector<double>* losses) {
  cfg.validate_for_training();
  Prepared p = prepare(cfg);
  const Dataset data = load_dataset(cfg, cfg.n_train, cfg.seed);
  Engine init = make_engine(cfg.seed, 0x1417);
  ScoreNet net = ScoreNet::make(data.dim(), init);
  const int every = std::max(1, cfg.train.steps / 20);
  TrainResult res = train(net, cfg.train, data.points, p.tables, [&](int step, double loss) {
    if (log && (step % every == 0 || step + 1 == cfg.train.steps)) {
      *log << "step " << step << " loss " << loss << '\n';
    }
  });
  Checkpoint c;
  c.dim = data.dim();
  c.H = cfg.H;
  c.schedule = p.schedule;
  c.grid = p.grid;
  c.tables = std::move(p.tables);
  c.standardizer = data.standardizer;
  c.config_text = cfg.to_text();
  c.net = std::move(res.net);
  c.ema = std::move(res.ema);
  c.rng_state = res.rng_state;
  c.final_loss = res.final_loss;
  c.steps = cfg.train.steps;
  if (losses) *losses = std::move(res.losses);
  return c;
}

Eigen::MatrixXd sample_checkpoint(const Checkpoint& ckpt, const SamplerConfig& sampler) {
  const ScoreNet net = ckpt.ema_net();
  const KernelTables& tables = ckpt.tables;
  const Schedule schedule = ckpt.schedule;
  ScoreFn score = [&](const Eigen::MatrixXd& x, double t) -> Eigen::MatrixXd {
    return -net.forward(tables, x, Eigen::VectorXd::Constant(x.cols(), t));
  };
  auto mu = [schedule](double t) { return drift_mu(schedule, t); };
  const Eigen::MatrixXd z = sample(tables, mu, score, ScoreSource::Learned, ckpt.dim, sampler);
  return ckpt.standardizer.invert(z.transpose());
}

std::string cmd_train(const RunConfig& cfg, std::ostream* log) {
  ensure_dir(cfg.out);
  std::vector<double> losses;
  const Checkpoint c = train_checkpoint(cfg, log, &losses);
  const std::string path = join(cfg.out, "model.ckpt");
  save_checkpoint(path, c);
  std::ostringstream csv;
  csv << "step,loss\n" << std::setprecision(17);
  for (std::size_t k = 0; k < losses.size(); ++k) csv << k << ',' << losses[k] << '\n';
  write_file_atomic(join(cfg.out, "train_loss.csv"), csv.str());
  return path;
}

std::string cmd_sample(const std::string& checkpoint_path, const RunConfig& cfg) {
  const std::string bytes = read_file(checkpoint_path);
  const Checkpoint ckpt = checkpoint_from_bytes(bytes);
  const Eigen::MatrixXd x = sample_checkpoint(ckpt, cfg.sampler);
  ensure_dir(cfg.out);
  std::ostringstream csv;
  write_points_csv(csv, x, true);
  const std::string path = join(cfg.out, "samples.csv");
  write_file_atomic(path, csv.str());
  std::ostringstream man;
  man << std::setprecision(17) << "method=" << to_string(cfg.sampler.method) << "\nH=" << ckpt.H
      << "\nkind=" << to_string(ckpt.schedule.kind) << "\nn_steps=" << cfg.sampler.n_steps
      << "\nn_samples=" << cfg.sampler.n_samples << "\nt_end=" << cfg.sampler.t_end
      << "\nseed=" << cfg.sampler.seed << "\ncheckpoint=" << checkpoint_path
      << "\ncheckpoint_fnv1a=" << hex(fnv1a(bytes)) << "\nsamples_fnv1a=" << hex(fnv1a(csv.str()))
      << '\n';
  write_file_atomic(join(cfg.out, "manifest.txt"), man.str());
  return path;
}

MetricReport cmd_eval(const std::string& real_csv, const std::string& gen_csv, const RunConfig& cfg) {
  const Eigen::MatrixXd real = read_points_csv(real_csv);
  const Eigen::MatrixXd gen = read_points_csv(gen_csv);
  MetricReport r = evaluate(real, gen, cfg.metrics);
  ensure_dir(cfg.out);
  write_file_atomic(join(cfg.out, "report.txt"), r.to_text());
  return r;
}

std::string cmd_inspect(const std::string& checkpoint_path, const std::string& out_dir) {
  const Checkpoint c = load_checkpoint(checkpoint_path);
  const KernelTables& t = c.tables;
  ensure_dir(out_dir);
  std::ostringstream var, rho, alpha;
  var << std::setprecision(17) << "time,c,sigma2\n";
  rho << std::setprecision(17) << "time";
  for (std::size_t i = 0; i < t.m(); ++i) rho << ",rho_" << i;
  rho << '\n';
  for (std::size_t n = 0; n < t.n_out(); ++n) {
    var << t.times[n] << ',' << t.c_vals[n] << ',' << t.sigma2[n] << '\n';
    rho << t.times[n];
    for (std::size_t i = 0; i < t.m(); ++i) rho << ',' << t.rho_i[n * t.m() + i];
    rho << '\n';
  }
  const AlphaProfile p = alpha_profile(t, t.T);
  alpha << std::setprecision(17) << "s,alpha\n";
  for (std::size_t j = 0; j < p.s.size(); j += t.stride) alpha << p.s[j] << ',' << p.alpha[j] << '\n';
  write_file_atomic(join(out_dir, "sigma2.csv"), var.str());
  write_file_atomic(join(out_dir, "rho.csv"), rho.str());
  write_file_atomic(join(out_dir, "alpha_T.csv"), alpha.str());
  write_file_atomic(join(out_dir, "grid.json"), c.grid.to_text() + "\n");
  return join(out_dir, "sigma2.csv");
}

std::string cmd_noise_sim(const RunConfig& cfg) {
  const SpaceGrid grid = build_space_grid(HurstIndex(cfg.H), cfg.m, cfg.r, cfg.schedule.horizon_T);
  const auto times = uniform_time_grid(cfg.schedule.horizon_T, cfg.noise_K);
  NoiseOptions opt;
  opt.dims = cfg.noise_dims;
  opt.record_stride = cfg.noise_record_stride;
  opt.threads = cfg.threads;
  const auto paths = simulate_noise(grid, times, cfg.noise_paths, cfg.seed, opt);
  ensure_dir(cfg.out);
  std::ostringstream csv;
  write_noise_csv(csv, paths);
  const std::string path = join(cfg.out, "noise.csv");
  write_file_atomic(path, csv.str());
  return path;
}

}  // namespace fracdiff
