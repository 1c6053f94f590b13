#include "privae/harness.hpp"

#include "privae/checkpoint.hpp"
#include "privae/classic.hpp"
#include "privae/csv.hpp"
#include "privae/factor_dataset.hpp"
#include "privae/renyi.hpp"
#include "privae/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

namespace privae {

namespace {

std::map<std::string, std::string> read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

double parse_or_nan(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    return used == s.size() ? v : kNaN;
  } catch (const std::exception&) {
    return kNaN;
  }
}

std::string gamma_tag(double g) { return format_double(g); }

}  // namespace

// ---- training -------------------------------------------------------------------

void RunSummary::write(std::ostream& out) const {
  out << "loss = " << loss << "\n";
  out << "steps_completed = " << steps_completed << "\n";
  out << "diverged = " << (diverged ? "true" : "false") << "\n";
  if (diverged) out << "divergence = " << divergence << "\n";
  out << "final_mig = " << format_double(final_mig) << "\n";
  out << "recon_loss_initial = " << format_double(recon_initial) << "\n";
  out << "recon_loss_final = " << format_double(recon_final) << "\n";
  out << "pearson_I_T = " << format_double(pearson_i_t) << "\n";
  out << "I_peak_step = " << i_peak_step << "\n";
  out << "I_final_below_peak = " << (i_final_below_peak ? "true" : "false") << "\n";
  out << "T_peak_step = " << t_peak_step << "\n";
  out << "T_final_below_peak = " << (t_final_below_peak ? "true" : "false") << "\n";
  out << "latent_std = " << format_double(latent_std) << "\n";
}

RunSummary RunSummary::read(const std::filesystem::path& path) {
  const auto kv = read_key_values(path);
  auto get = [&](const char* key) -> std::string {
    const auto it = kv.find(key);
    if (it == kv.end()) throw std::runtime_error("'" + path.string() + "' lacks '" + key + "'");
    return it->second;
  };
  RunSummary s;
  s.loss = get("loss");
  s.steps_completed = static_cast<std::size_t>(parse_or_nan(get("steps_completed")));
  s.diverged = get("diverged") == "true";
  if (kv.count("divergence")) s.divergence = kv.at("divergence");
  s.final_mig = parse_or_nan(get("final_mig"));
  s.recon_initial = parse_or_nan(get("recon_loss_initial"));
  s.recon_final = parse_or_nan(get("recon_loss_final"));
  s.pearson_i_t = parse_or_nan(get("pearson_I_T"));
  s.i_peak_step = static_cast<std::size_t>(parse_or_nan(get("I_peak_step")));
  s.i_final_below_peak = get("I_final_below_peak") == "true";
  s.t_peak_step = static_cast<std::size_t>(parse_or_nan(get("T_peak_step")));
  s.t_final_below_peak = get("T_final_below_peak") == "true";
  s.latent_std = parse_or_nan(get("latent_std"));
  return s;
}

TrainRun run_training(const RunConfig& cfg, const RecordCallback& on_record) {
  if (cfg.alphas.empty()) throw std::invalid_argument("alphas must not be empty");
  const FactorGrid grid;
  const Matrix& images = grid.images();

  vae::Architecture arch;
  arch.input_dim = grid.pixels();
  arch.latent_dim = cfg.latent_dim;
  TrainRun run{vae::VaeModel(arch, cfg.seed), {}, {}, std::nullopt};

  TrainConfig tc;
  tc.loss = cfg.loss;
  tc.adam.lr = cfg.lr;
  tc.steps = cfg.steps;
  tc.batch_size = cfg.batch_size;
  tc.seed = cfg.seed;
  tc.log_every = cfg.log_every;
  tc.force = cfg.force;
  tc.dataset_size = cfg.dataset_size;
  tc.info.samples = cfg.info_samples;
  tc.info.batch = cfg.info_batch;
  tc.info.kernel = cfg.kernel;
  tc.info.alphas = cfg.alphas;
  tc.info.keep_latents = cfg.keep_latents;
  run.result = train(run.model, images, tc, on_record);

  RunSummary& s = run.summary;
  s.loss = cfg.loss.describe();
  s.steps_completed = run.result.steps_completed;
  s.diverged = run.result.diverged;
  s.divergence = run.result.divergence;

  const auto& recs = run.result.records;
  if (!recs.empty()) {
    s.recon_initial = recs.front().recon_loss;
    s.recon_final = recs.back().recon_loss;
    std::vector<double> is, ts;
    for (const auto& r : recs) {
      is.push_back(r.points.front().mutual_information_bits);
      ts.push_back(r.points.front().total_correlation_bits);
    }
    try {
      s.pearson_i_t = pearson(is, ts);
    } catch (const std::invalid_argument&) {
      s.pearson_i_t = kNaN;
    }
    if (is.size() > 2 * cfg.smooth_window) {
      const auto pi = phase_detect(is, cfg.smooth_window);
      const auto pt = phase_detect(ts, cfg.smooth_window);
      s.i_peak_step = recs[pi.peak_index].step;
      s.i_final_below_peak = pi.final_below_peak;
      s.t_peak_step = recs[pt.peak_index].step;
      s.t_final_below_peak = pt.final_below_peak;
    }
  }

  if (!s.diverged) {
    const Matrix z = encode_samples(run.model, images, cfg.seed + 1);
    if (z.allFinite()) {
      double acc = 0.0;
      for (Eigen::Index j = 0; j < z.cols(); ++j) {
        const double m = z.col(j).mean();
        acc += std::sqrt((z.col(j).array() - m).square().sum() / static_cast<double>(z.rows() - 1));
      }
      s.latent_std = acc / static_cast<double>(z.cols());
      run.mig = mig(encode_means(run.model, images), grid.factor_table(), cfg.mig_bins);
      s.final_mig = run.mig->score;
    }
  }
  return run;
}

void write_training_outputs(const RunConfig& cfg, const TrainRun& run) {
  std::filesystem::create_directories(cfg.out);
  {
    std::ofstream out(cfg.out / "config.txt");
    cfg.write(out);
  }
  for (std::size_t a = 0; a < cfg.alphas.size(); ++a) {
    const auto name = a == 0 ? std::string("info_plane.csv")
                             : "info_plane_alpha_" + format_double(cfg.alphas[a]) + ".csv";
    CsvWriter csv(cfg.out / name,
                  {"step", "I_xz_bits", "T_z_bits", "H_z_bits", "recon_loss", "total_loss"});
    for (const auto& r : run.result.records) {
      const auto& p = r.points[a];
      csv.row({static_cast<double>(r.step), p.mutual_information_bits, p.total_correlation_bits,
               p.entropy_bits, r.recon_loss, r.total_loss});
    }
  }
  {
    std::ofstream out(cfg.out / "summary.txt");
    run.summary.write(out);
    if (run.mig) {
      for (const auto& w : run.mig->warnings) out << "# " << w << "\n";
    }
  }
  save_checkpoint(run.model.parameters(), cfg.out / "model.ckpt");
}

int cmd_train(const RunConfig& cfg, std::ostream& log) {
  for (const auto& w : cfg.loss.validate(cfg.force)) log << "warning: " << w << "\n";
  log << "training " << cfg.loss.describe() << " for " << cfg.steps << " steps (seed " << cfg.seed
      << ")\n";
  const TrainRun run = run_training(cfg, [&](const InfoPlaneRecord& r) {
    const auto& p = r.points.front();
    log << "step " << r.step << "  I(x;z) " << p.mutual_information_bits << "  T(z) "
        << p.total_correlation_bits << "  recon " << r.recon_loss << "\n";
  });
  write_training_outputs(cfg, run);
  if (run.result.diverged) {
    log << "error: training diverged at " << run.result.divergence
        << "; last good record index " << run.result.last_good_record << "\n";
    return 3;
  }
  log << "final MIG " << run.summary.final_mig << ", outputs in " << cfg.out.string() << "\n";
  return 0;
}

// ---- PRI ------------------------------------------------------------------------

Matrix two_moons(std::size_t n, double noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> jitter(0.0, noise);
  const std::size_t outer = n - n / 2;
  const std::size_t inner = n / 2;
  Matrix x(static_cast<Eigen::Index>(n), 2);
  auto angle = [](std::size_t i, std::size_t count) {
    return count <= 1 ? 0.0 : std::numbers::pi * static_cast<double>(i) / static_cast<double>(count - 1);
  };
  for (std::size_t i = 0; i < outer; ++i) {
    const double t = angle(i, outer);
    x(static_cast<Eigen::Index>(i), 0) = std::cos(t);
    x(static_cast<Eigen::Index>(i), 1) = std::sin(t);
  }
  for (std::size_t i = 0; i < inner; ++i) {
    const double t = angle(i, inner);
    x(static_cast<Eigen::Index>(outer + i), 0) = 1.0 - std::cos(t);
    x(static_cast<Eigen::Index>(outer + i), 1) = 0.5 - std::sin(t);
  }
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] += jitter(rng);
  return x;
}

Matrix isotropic_gaussian(std::size_t n, std::size_t dims, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dims));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = n01(rng);
  }
  return x;
}

Matrix pri_dataset(const RunConfig& cfg) {
  if (cfg.pri_data == "two_moons") return two_moons(cfg.pri_samples, 0.05, cfg.seed);
  if (cfg.pri_data == "gaussian3d") return isotropic_gaussian(cfg.pri_samples, 3, cfg.seed);
  return read_numeric_csv(cfg.pri_data).data;
}

double mean_nearest_distance(const Matrix& y, const Matrix& x) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < x.rows(); ++j) best = std::min(best, (y.row(i) - x.row(j)).squaredNorm());
    acc += std::sqrt(best);
  }
  return acc / static_cast<double>(y.rows());
}

double cloud_stddev(const Matrix& y) {
  if (y.rows() < 2) return 0.0;
  const Eigen::RowVectorXd mu = y.colwise().mean();
  return std::sqrt((y.rowwise() - mu).array().square().sum() /
                   static_cast<double>((y.rows() - 1) * y.cols()));
}

PriSweepReport run_pri_sweep(const Matrix& x, const RunConfig& cfg) {
  if (cfg.gammas.empty()) throw std::invalid_argument("pri: gamma list is empty");
  if (cfg.alphas.empty()) throw std::invalid_argument("pri: alphas must not be empty");
  PriSweepReport report;
  report.data = x;
  report.sigma = resolve_width(x, cfg.pri_kernel);

  PriConfig base;
  base.sigma = report.sigma;
  base.max_iters = cfg.pri_max_iters;
  base.tol = cfg.pri_tol * data_scale(x);
  SweepOptions opt;
  opt.seed = cfg.seed;
  opt.record_every = cfg.pri_record_every;
  report.runs = pri_sweep(x, cfg.gammas, base, opt);
  for (const auto& run : report.runs) {
    const auto& y = run.result.points;
    report.entropy_bits.push_back(
        y.rows() < 2 ? 0.0 : entropy(gram_with_width(y, report.sigma), cfg.alphas.front()).bits);
  }
  return report;
}

void write_pri_outputs(const RunConfig& cfg, const PriSweepReport& report) {
  std::filesystem::create_directories(cfg.out);
  {
    std::ofstream out(cfg.out / "config.txt");
    cfg.write(out);
  }
  const Matrix& x = report.data;
  const auto dims = static_cast<std::size_t>(x.cols());
  CsvWriter summary(cfg.out / "pri_summary.csv",
                    {"gamma", "iterations", "converged", "objective", "entropy_bits",
                     "cloud_std", "mean_nearest_data"});

  for (std::size_t g = 0; g < report.runs.size(); ++g) {
    const PriRun& run = report.runs[g];
    const std::string tag = gamma_tag(run.gamma);

    std::vector<std::string> header = {"iter", "point_id"};
    for (std::size_t d = 0; d < dims; ++d) header.push_back("y" + std::to_string(d));
    header.push_back("objective");
    CsvWriter traj(cfg.out / ("trajectory_gamma_" + tag + ".csv"), header);
    std::vector<double> row(header.size());
    for (std::size_t t = 0; t < run.trajectory.size(); ++t) {
      const Matrix& y = run.trajectory[t];
      for (Eigen::Index i = 0; i < y.rows(); ++i) {
        row[0] = static_cast<double>(run.recorded[t]);
        row[1] = static_cast<double>(i);
        for (std::size_t d = 0; d < dims; ++d) row[2 + d] = y(i, static_cast<Eigen::Index>(d));
        row.back() = run.objective[run.recorded[t]];
        traj.row(row);
      }
    }

    const Matrix& y = run.result.points;
    summary.row({run.gamma, static_cast<double>(run.result.generation), run.converged ? 1.0 : 0.0,
                 run.objective.back(), report.entropy_bits[g], cloud_stddev(y),
                 mean_nearest_distance(y, x)});

    SvgPlot plot;
    plot.title = "PRI, gamma = " + tag + ", sigma = " + format_double(report.sigma);
    SvgSeries data{"data X", {}, {}, "#999999", false, 2.0, 0.6};
    SvgSeries cloud{"converged Y", {}, {}, palette(g), false, 2.5, 0.9};
    if (dims >= 2) {
      plot.x_label = "x0";
      plot.y_label = "x1";
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        data.x.push_back(x(i, 0));
        data.y.push_back(x(i, 1));
      }
      for (Eigen::Index i = 0; i < y.rows(); ++i) {
        cloud.x.push_back(y(i, 0));
        cloud.y.push_back(y(i, 1));
      }
    } else {
      plot.x_label = "sample index";
      plot.y_label = "x0";
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        data.x.push_back(static_cast<double>(i));
        data.y.push_back(x(i, 0));
      }
      for (Eigen::Index i = 0; i < y.rows(); ++i) {
        cloud.x.push_back(static_cast<double>(i));
        cloud.y.push_back(y(i, 0));
      }
    }
    plot.series = {data, cloud};
    write_svg(cfg.out / ("pri_gamma_" + tag + ".svg"), plot);
  }
}

int cmd_pri(const RunConfig& cfg, std::ostream& log) {
  const Matrix x = pri_dataset(cfg);
  const PriSweepReport report = run_pri_sweep(x, cfg);
  write_pri_outputs(cfg, report);
  log << "PRI sweep on " << x.rows() << " points (sigma " << report.sigma << ")\n";
  for (std::size_t g = 0; g < report.runs.size(); ++g) {
    const auto& r = report.runs[g];
    log << "  gamma " << r.gamma << ": " << r.result.generation << " iterations"
        << (r.converged ? "" : " (not converged)") << ", entropy " << report.entropy_bits[g]
        << " bits\n";
  }
  return 0;
}

// ---- estimate -------------------------------------------------------------------

EstimateResult run_estimate(const EstimateOptions& opt) {
  if (opt.files.empty()) throw std::invalid_argument("estimate: no input files");
  std::vector<Matrix> data;
  for (const auto& f : opt.files) data.push_back(read_numeric_csv(f).data);

  const bool renyi = opt.estimator == "renyi";
  if (!renyi && opt.estimator != "knn" && opt.estimator != "kde") {
    throw std::invalid_argument("unknown estimator '" + opt.estimator + "' (expected renyi, knn, kde)");
  }
  EstimateResult res;
  res.units = renyi ? "bits" : "nats";

  auto classic_h = [&](const Matrix& m) {
    if (m.cols() > kMaxClassicDimension) {
      throw std::invalid_argument("classic estimators support at most " +
                                  std::to_string(kMaxClassicDimension) + " dimensions");
    }
    return opt.estimator == "knn" ? knn_entropy(m, opt.k) : kde_entropy(m);
  };

  // Renyi quantities on one batch of rows.
  auto renyi_on = [&](const Matrix& a, const Matrix* b) -> double {
    if (opt.quantity == "entropy") return entropy(gram(a, opt.kernel), opt.alpha).bits;
    if (opt.quantity == "mi") return mutual_information(gram(a, opt.kernel), gram(*b, opt.kernel), opt.alpha);
    const auto grams = per_dimension_grams(a, opt.kernel);
    return total_correlation(grams, opt.alpha);
  };

  const Matrix& a = data[0];
  const Matrix* b = nullptr;
  if (opt.quantity == "mi") {
    if (data.size() != 2) throw std::invalid_argument("estimate mi needs exactly two files");
    if (data[1].rows() != a.rows()) {
      throw std::invalid_argument("estimate mi: files have " + std::to_string(a.rows()) + " and " +
                                  std::to_string(data[1].rows()) + " rows");
    }
    b = &data[1];
  } else if (opt.quantity == "entropy" || opt.quantity == "tc") {
    if (data.size() != 1) throw std::invalid_argument("estimate " + opt.quantity + " takes one file");
    if (opt.quantity == "tc" && a.cols() < 2) {
      throw std::invalid_argument("estimate tc needs at least two columns");
    }
  } else {
    throw std::invalid_argument("unknown quantity '" + opt.quantity + "' (expected entropy, mi, tc)");
  }

  if (renyi) {
    const auto n = static_cast<std::size_t>(a.rows());
    const std::size_t batch = opt.batch == 0 ? n : opt.batch;
    if (batch < 2 || batch > n) throw std::invalid_argument("estimate: batch must lie in [2, rows]");
    const std::size_t batches = n / batch;
    double acc = 0.0;
    for (std::size_t i = 0; i < batches; ++i) {
      const auto start = static_cast<Eigen::Index>(i * batch);
      const auto len = static_cast<Eigen::Index>(batch);
      const Matrix sa = a.middleRows(start, len);
      if (b) {
        const Matrix sb = b->middleRows(start, len);
        acc += renyi_on(sa, &sb);
      } else {
        acc += renyi_on(sa, nullptr);
      }
    }
    res.value = acc / static_cast<double>(batches);
    return res;
  }

  if (opt.quantity == "entropy") {
    res.value = classic_h(a);
  } else if (opt.quantity == "mi") {
    Matrix joint(a.rows(), a.cols() + b->cols());
    joint << a, *b;
    res.value = classic_h(a) + classic_h(*b) - classic_h(joint);
  } else {
    res.value = classic_total_correlation(a, parse_classic_estimator(opt.estimator), opt.k);
  }
  return res;
}

int cmd_estimate(const EstimateOptions& opt, std::ostream& out, std::ostream& err) {
  EstimateResult res;
  try {
    res = run_estimate(opt);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  out << "quantity  estimator  alpha  value  units\n";
  out << opt.quantity << "  " << opt.estimator << "  " << format_double(opt.alpha) << "  "
      << format_double(res.value) << "  " << res.units << "\n";
  if (!opt.out.empty()) {
    CsvWriter csv(opt.out, {"alpha", "value"});
    csv.row({opt.alpha, res.value});
  }
  return 0;
}

// ---- compare --------------------------------------------------------------------

int cmd_compare(const std::vector<std::filesystem::path>& runs, const std::filesystem::path& out,
                std::ostream& log, std::ostream& err) {
  struct Usable {
    std::filesystem::path dir;
    RunSummary summary;
    std::optional<NumericTable> curve;
  };
  std::vector<Usable> usable;
  for (const auto& dir : runs) {
    try {
      Usable u{dir, RunSummary::read(dir / "summary.txt"), std::nullopt};
      if (std::filesystem::exists(dir / "info_plane.csv")) {
        try {
          u.curve = read_numeric_csv(dir / "info_plane.csv");
        } catch (const std::exception&) {
          // header-only curves (zero steps) have nothing to plot
        }
      }
      usable.push_back(std::move(u));
    } catch (const std::exception& e) {
      err << "warning: skipping '" << dir.string() << "': " << e.what() << "\n";
    }
  }
  if (usable.size() < 2) {
    err << "error: compare needs at least two runs with summaries, found " << usable.size() << "\n";
    return 1;
  }

  std::filesystem::create_directories(out);
  CsvWriter csv(out / "compare.csv", {"run", "final_mig", "recon_loss_final", "pearson_I_T"});
  std::ofstream names(out / "compare_runs.txt");
  log << "run  loss  final_mig  recon_loss_final  pearson_I_T\n";
  SvgPlot plot{"Information plane curves", "training step", "bits", {}};
  for (std::size_t i = 0; i < usable.size(); ++i) {
    const auto& u = usable[i];
    csv.row({static_cast<double>(i), u.summary.final_mig, u.summary.recon_final, u.summary.pearson_i_t});
    names << i << " = " << u.dir.string() << "\n";
    log << u.dir.filename().string() << "  " << u.summary.loss << "  "
        << format_double(u.summary.final_mig) << "  " << format_double(u.summary.recon_final) << "  "
        << format_double(u.summary.pearson_i_t) << "\n";
    if (u.curve && u.curve->data.cols() >= 3) {
      const auto& d = u.curve->data;
      SvgSeries si{u.dir.filename().string() + " I(x;z)", {}, {}, palette(2 * i), true};
      SvgSeries st{u.dir.filename().string() + " T(z)", {}, {}, palette(2 * i + 1), true};
      for (Eigen::Index r = 0; r < d.rows(); ++r) {
        si.x.push_back(d(r, 0));
        si.y.push_back(d(r, 1));
        st.x.push_back(d(r, 0));
        st.y.push_back(d(r, 2));
      }
      plot.series.push_back(std::move(si));
      plot.series.push_back(std::move(st));
    }
  }
  write_svg(out / "compare.svg", plot);
  return 0;
}

}  // namespace privae
