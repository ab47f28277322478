#include "lscd/cli/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "lscd/baselines/baselines.hpp"
#include "lscd/cli/config.hpp"
#include "lscd/core/error.hpp"
#include "lscd/core/io.hpp"
#include "lscd/diffusion/sampler.hpp"
#include "lscd/lombscargle/fap.hpp"
#include "lscd/lombscargle/fft_psd.hpp"
#include "lscd/lombscargle/periodogram.hpp"
#include "lscd/metrics/metrics.hpp"

namespace lscd::cli {
namespace {

namespace fs = std::filesystem;
using io::format_double;

struct Options {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed_override;
  std::size_t threads = 1;
  std::string input, truth, checkpoint, method;
  std::vector<std::string> preds, results;
};

// One subcommand invocation: resolved config plus the provenance it records.
class Run {
 public:
  Run(std::string command, const Options& opt, std::ostream& out, bool config_required)
      : command_(std::move(command)), out_dir_(opt.out_dir), threads_(opt.threads), out(out) {
    if (threads_ == 0) throw ValueError("--threads must be >= 1");
    if (!opt.config_path.empty()) {
      cfg = ExperimentConfig::from_json(io::read_json(opt.config_path), opt.seed_override);
      has_config_ = true;
      record_input(opt.config_path);
    } else if (config_required) {
      throw ValueError(command_ + ": --config is required");
    }
    fs::create_directories(out_dir_);
  }

  ExperimentConfig cfg;
  /// Command-specific facts copied into the manifest.
  nlohmann::json extra = nlohmann::json::object();

  std::string run_id() const { return has_config_ ? cfg.hash().substr(0, 12) : "none"; }

  TimeSeriesBatch load(const std::string& path) {
    if (path.empty()) throw ValueError(command_ + ": missing input path");
    record_input(path);
    auto b = io::load_batch(path);
    b.validate();
    for (std::size_t i = 0; i < b.values.size(); ++i)
      if (b.obs_mask[i] && !std::isfinite(b.values[i]))
        throw DivergenceError(path + ": non-finite observed value at flat index " + std::to_string(i));
    return b;
  }

  void record_input(const fs::path& path) { inputs_.push_back({path.string(), io::content_hash(io::read_text(path))}); }

  fs::path path(const std::string& name) const { return out_dir_ / name; }

  void write(const std::string& name, const std::string& text) {
    io::write_text(text, path(name));
    outputs_.push_back({name, io::content_hash(text)});
  }
  void write_batch(const std::string& name, const TimeSeriesBatch& b) { write(name, io::to_json(b).dump() + "\n"); }
  void record_output(const std::string& name) { outputs_.push_back({name, io::content_hash(io::read_text(path(name)))}); }

  void finish() {
    nlohmann::json in = nlohmann::json::array(), outj = nlohmann::json::array();
    for (const auto& [p, h] : inputs_) in.push_back({{"path", p}, {"hash", h}});
    for (const auto& [p, h] : outputs_) outj.push_back({{"path", p}, {"hash", h}});
    nlohmann::json m{{"command", command_}, {"threads", threads_}, {"inputs", in}, {"outputs", outj}};
    if (has_config_) {
      m["run_id"] = run_id();
      m["config_hash"] = cfg.hash();
      m["seed"] = cfg.seed;
      m["config"] = cfg.to_json();
    }
    if (!extra.empty()) m["extra"] = extra;
    io::write_json(m, path("manifest_" + command_ + ".json"));
  }

  FrequencyGrid grid(const TimeSeriesBatch& b) const { return FrequencyGrid::from_json(cfg.grid, b); }

  TimeSeriesBatch test_part(const TimeSeriesBatch& b) const {
    const std::size_t n = b.batch();
    const std::size_t first = cfg.split.n_train(n) + cfg.split.n_val(n);
    if (first >= n) throw ValueError(command_ + ": the configured split leaves no test samples");
    return b.slice(first, n - first);
  }

 private:
  std::string command_;
  fs::path out_dir_;
  std::size_t threads_;
  bool has_config_ = false;
  std::vector<std::pair<std::string, std::string>> inputs_, outputs_;

 public:
  std::ostream& out;
};

std::pair<std::string, std::string> named_path(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) return {"", spec};
  return {spec.substr(0, eq), spec.substr(eq + 1)};
}

std::string method_name(const std::string& given, const TimeSeriesBatch& b, const std::string& path) {
  if (!given.empty()) return given;
  if (b.meta.contains("method")) return b.meta["method"].get<std::string>();
  return fs::path(path).stem().string();
}

void require_finite(const Values& v, const std::string& what) {
  for (double x : v.data())
    if (!std::isfinite(x)) throw DivergenceError(what + " contains non-finite values");
}

void write_trace(Run& run, const std::string& name, const diffusion::TrainResult& r) {
  std::string text;
  for (const auto& rec : r.trace) text += rec.to_json().dump() + "\n";
  run.write(name, text);
}

diffusion::EpochCallback progress(Run& run, const std::string& stage, std::size_t epochs) {
  return [&run, stage, epochs](std::size_t epoch, const diffusion::LscdModel&, bool best) {
    if (epoch == 1 || epoch == epochs || epoch % 10 == 0)
      run.out << stage << ": epoch " << epoch << "/" << epochs << (best ? " (best)" : "") << "\n";
  };
}

// ---------------------------------------------------------------- commands

void cmd_gen_sines(Run& run) {
  const auto ds = synth::generate_sines(run.cfg.dataset);
  run.write_batch("dataset.json", ds.batch);
  run.write("ground_truth.json", ds.ground_truth_json().dump() + "\n");
  run.out << "gen-sines: " << ds.batch.batch() << " samples, " << ds.batch.channels() << " channels, "
          << ds.batch.steps() << " steps\n";
}

void cmd_mask(Run& run, const Options& opt) {
  const auto batch = run.load(opt.input);
  const missing::MissingnessSpec base{missing::Mechanism::mcar, run.cfg.base_mcar, 1, 1, 1,
                                      derive_seed(run.cfg.seed, kSeedBaseMcar)};
  const auto observed = missing::apply_missingness(batch, base);
  const auto masked = missing::apply_missingness(observed.batch, run.cfg.missingness);
  run.write_batch("observed.json", observed.batch);
  run.write_batch("masked.json", masked.batch);
  nlohmann::json stats{{"base_mcar_achieved", observed.achieved_rate},
                       {"mechanism", to_string(run.cfg.missingness.mechanism)},
                       {"achieved_rate", masked.achieved_rate},
                       {"removed", masked.removed},
                       {"target_reached", masked.target_reached},
                       {"missing_fraction", missing::missing_fraction(masked.batch.obs_mask)}};
  if (!masked.warning.empty()) {
    stats["warning"] = masked.warning;
    run.out << "mask: warning: " << masked.warning << "\n";
  }
  run.write("mask_stats.json", stats.dump(2) + "\n");
  run.extra["missingness"] = stats;
  run.out << "mask: missing fraction " << format_double(missing::missing_fraction(masked.batch.obs_mask)) << "\n";
}

void cmd_psd(Run& run, const Options& opt) {
  const auto batch = run.load(opt.input);
  const auto grid = run.grid(batch);
  const auto p = ls::periodogram(batch, grid, true);
  const auto fap = ls::false_alarm_probability(p, static_cast<double>(grid.size()));
  std::ostringstream csv;
  csv << "sample,channel,omega,power,fap\n";
  for (std::size_t b = 0; b < batch.batch(); ++b)
    for (std::size_t k = 0; k < batch.channels(); ++k)
      for (std::size_t j = 0; j < grid.size(); ++j)
        csv << b << ',' << k << ',' << format_double(grid.omega(j)) << ',' << format_double(p.power(b, k, j)) << ','
            << format_double(fap.fap(b, k, j)) << '\n';
  run.write("periodogram.csv", csv.str());
}

struct SpectrumRows {
  std::string method;
  std::vector<double> lead;                   // [B * K], NaN for skipped rows
  std::optional<ls::Periodogram> periodogram;  // on the shared LS grid
};

void cmd_compare_spectra(Run& run, const Options& opt) {
  const auto truth = run.test_part(run.load(opt.truth));
  const auto masked = run.test_part(run.load(opt.input));
  if (truth.shape() != masked.shape()) throw ShapeError("compare-spectra: truth and input shapes differ");
  const auto grid = run.grid(truth);
  const std::size_t B = truth.batch(), K = truth.channels(), J = grid.size();

  auto ls_rows = [&](const std::string& name, const Values& values, const Mask& mask) {
    SpectrumRows r{name, std::vector<double>(B * K, NAN), ls::periodogram(values, truth.timestamps, mask, grid, true)};
    for (std::size_t i = 0; i < B * K; ++i)
      if (!r.periodogram->degenerate[i])
        r.lead[i] = metrics::lead_frequency({r.periodogram->power.data().data() + i * J, J}, grid);
    return r;
  };
  std::vector<SpectrumRows> methods;
  const auto gt = ls_rows("GT", truth.values, truth.obs_mask);
  methods.push_back(ls_rows("LS", masked.values, masked.obs_mask));
  {
    const auto fft = ls::fft_psd_with_fill(masked, ls::FillStrategy::linear_interp);
    const std::size_t M = fft.frequencies.size();
    SpectrumRows r{"FFT+Lerp", std::vector<double>(B * K, NAN), std::nullopt};
    for (std::size_t i = 0; i < B * K; ++i)
      r.lead[i] = fft.frequencies[ls::argmax({fft.power.data().data() + i * M, M}, 1)];
    methods.push_back(std::move(r));
  }
  for (const auto& spec : opt.preds) {
    const auto [given, p] = named_path(spec);
    const auto pred = run.load(p);
    if (pred.shape() != truth.shape()) throw ShapeError("compare-spectra: prediction " + p + " has the wrong shape");
    require_finite(pred.values, "prediction " + p);
    methods.push_back(ls_rows(method_name(given, pred, p), pred.values, truth.obs_mask));
  }

  const double f_max = grid.frequency(J - 1);
  const std::size_t nb = run.cfg.eval.lf_bins;
  std::ostringstream hist, summary, diff;
  hist << "method,bin_lo,bin_hi,count\n";
  summary << "method,mean_lfe,std_lfe,rows\n";
  diff << "method,channel,omega,mean,std\n";
  auto add_hist = [&](const std::string& name, const std::vector<double>& lead) {
    std::vector<std::size_t> counts(nb, 0);
    for (double f : lead)
      if (std::isfinite(f)) ++counts[std::min(nb - 1, static_cast<std::size_t>(std::max(0.0, f / f_max * nb)))];
    for (std::size_t i = 0; i < nb; ++i)
      hist << name << ',' << format_double(f_max * i / nb) << ',' << format_double(f_max * (i + 1) / nb) << ','
           << counts[i] << '\n';
  };
  add_hist("GT", gt.lead);
  for (const auto& m : methods) {
    add_hist(m.method, m.lead);
    double sum = 0, sq = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < B * K; ++i)
      if (std::isfinite(gt.lead[i]) && std::isfinite(m.lead[i])) {
        const double e = std::abs(gt.lead[i] - m.lead[i]);
        sum += e;
        sq += e * e;
        ++n;
      }
    const double mean = n ? sum / n : NAN;
    const double sd = n ? std::sqrt(std::max(0.0, sq / n - mean * mean)) : NAN;
    summary << m.method << ',' << format_double(mean) << ',' << format_double(sd) << ',' << n << '\n';
    if (!m.periodogram) continue;
    // Sum-normalized PSD(GT) - PSD(pred), mean and std over samples.
    for (std::size_t k = 0; k < K; ++k) {
      std::vector<double> s1(J, 0.0), s2(J, 0.0);
      std::size_t rows = 0;
      for (std::size_t b = 0; b < B; ++b) {
        const std::size_t i = b * K + k;
        const double* pg = gt.periodogram->power.data().data() + i * J;
        const double* pp = m.periodogram->power.data().data() + i * J;
        double zg = 0, zp = 0;
        for (std::size_t j = 0; j < J; ++j) {
          zg += pg[j];
          zp += pp[j];
        }
        if (zg <= 0 || zp <= 0) continue;
        ++rows;
        for (std::size_t j = 0; j < J; ++j) {
          const double d = pg[j] / zg - pp[j] / zp;
          s1[j] += d;
          s2[j] += d * d;
        }
      }
      for (std::size_t j = 0; j < J; ++j) {
        const double mean_d = rows ? s1[j] / rows : NAN;
        const double sd_d = rows ? std::sqrt(std::max(0.0, s2[j] / rows - mean_d * mean_d)) : NAN;
        diff << m.method << ',' << k << ',' << format_double(grid.omega(j)) << ',' << format_double(mean_d) << ','
             << format_double(sd_d) << '\n';
      }
    }
  }
  run.write("lf_hist.csv", hist.str());
  run.write("lfe_summary.csv", summary.str());
  run.write("psd_diff.csv", diff.str());
  run.out << summary.str();
}

void cmd_train(Run& run, const Options& opt, bool spectral) {
  const auto data = run.load(opt.input);
  const std::size_t n = data.batch(), n_train = run.cfg.split.n_train(n), n_val = run.cfg.split.n_val(n);
  if (n_train == 0) throw ValueError("train: the configured split leaves no training samples");
  const auto train = data.slice(0, n_train);
  const auto val = data.slice(n_train, n_val);
  std::unique_ptr<diffusion::LscdModel> model;
  diffusion::TrainResult result;
  const std::string stage = spectral ? "finetune" : "train";
  if (spectral) {
    if (opt.checkpoint.empty()) throw ValueError("finetune: --checkpoint is required");
    run.record_input(opt.checkpoint + ".json");
    run.record_input(opt.checkpoint + ".bin");
    model = diffusion::LscdModel::load(opt.checkpoint);
    if (model->config().n_channels != data.channels()) throw ShapeError("finetune: checkpoint channel count differs");
    result = diffusion::finetune_spectral(*model, train, val, run.cfg.finetune,
                                          progress(run, stage, run.cfg.finetune.epochs));
  } else {
    auto mc = run.cfg.model;
    mc.n_channels = data.channels();
    mc.grid_omegas = run.grid(data).omegas();
    model = std::make_unique<diffusion::LscdModel>(mc);
    result = diffusion::train_main(*model, train, val, run.cfg.train, progress(run, stage, run.cfg.train.epochs));
  }
  const std::string name = spectral ? "finetuned" : "model";
  model->save(run.path(name), {{"stage", stage}, {"run_id", run.run_id()}, {"best_epoch", result.best_epoch}});
  run.record_output(name + ".json");
  run.record_output(name + ".bin");
  write_trace(run, spectral ? "finetune_trace.jsonl" : "loss_trace.jsonl", result);
  run.out << stage << ": best epoch " << result.best_epoch << ", objective " << format_double(result.best_objective)
          << "\n";
}

void cmd_impute(Run& run, const Options& opt) {
  const auto test = run.test_part(run.load(opt.input));
  const auto split = split_from_masks(test.obs_mask, test.obs_mask);
  Values pred;
  std::string method = opt.method;
  if (method == "mean") {
    pred = baselines::impute_mean(test, split);
    method = "Mean";
  } else if (method == "lerp") {
    pred = baselines::impute_lerp(test, split);
    method = "Lerp";
  } else if (method == "lscd") {
    if (opt.checkpoint.empty()) throw ValueError("impute: --checkpoint is required for method lscd");
    run.record_input(opt.checkpoint + ".json");
    run.record_input(opt.checkpoint + ".bin");
    const auto model = diffusion::LscdModel::load(opt.checkpoint);
    diffusion::SampleOptions so{run.cfg.eval.n_draws, run.cfg.eval.noise_scale, run.cfg.eval.chunk};
    Rng rng(derive_seed(run.cfg.seed, kSeedImpute));
    pred = diffusion::sample_impute(*model, test, test.obs_mask, so, rng).median;
    method = "LSCD";
  } else {
    throw ValueError("impute: unknown method '" + opt.method + "' (mean, lerp, lscd)");
  }
  require_finite(pred, "imputation");
  TimeSeriesBatch out(pred, test.timestamps, Mask(test.shape(), 1));
  out.meta["method"] = method;
  run.write_batch("pred_" + opt.method + ".json", out);
}

const std::vector<std::string> kMetrics{"MAE", "RMSE", "S-MAE", "LFE"};

void cmd_eval(Run& run, const Options& opt) {
  const auto truth = run.test_part(run.load(opt.truth));
  const auto input = run.test_part(run.load(opt.input));
  if (truth.shape() != input.shape()) throw ShapeError("eval: truth and input shapes differ");
  for (std::size_t i = 0; i < truth.obs_mask.size(); ++i)
    if (input.obs_mask[i] && !truth.obs_mask[i]) throw ValueError("eval: input observes entries missing from truth");
  const auto split = split_from_masks(truth.obs_mask, input.obs_mask);
  const auto grid = run.grid(truth);
  if (opt.preds.empty()) throw ValueError("eval: at least one --pred is required");

  const auto& ms = run.cfg.missingness;
  std::ostringstream csv;
  csv << "run_id,dataset,mechanism,rate,method,metric,value\n";
  nlohmann::json reports = nlohmann::json::object();
  for (const auto& spec : opt.preds) {
    const auto [given, p] = named_path(spec);
    const auto pred = run.load(p);
    if (pred.shape() != truth.shape()) throw ShapeError("eval: prediction " + p + " has the wrong shape");
    require_finite(pred.values, "prediction " + p);
    const auto name = method_name(given, pred, p);
    const auto r = metrics::evaluate(truth, pred.values, split, grid);
    const double vals[] = {r.mae, r.rmse, r.s_mae, r.lfe};
    for (std::size_t m = 0; m < kMetrics.size(); ++m)
      csv << run.run_id() << ',' << run.cfg.dataset_name << ',' << to_string(ms.mechanism) << ','
          << format_double(ms.rate) << ',' << name << ',' << kMetrics[m] << ',' << format_double(vals[m]) << '\n';
    reports[name] = r.to_json();
    run.out << "eval: " << name << " MAE " << format_double(r.mae) << " RMSE " << format_double(r.rmse) << " S-MAE "
            << format_double(r.s_mae) << "\n";
  }
  run.write("results.csv", csv.str());
  run.write("eval_report.json", reports.dump(2) + "\n");
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> f;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) f.push_back(cell);
  return f;
}

void cmd_report(Run& run, const Options& opt) {
  if (opt.results.empty()) throw ValueError("report: at least one --results file is required");
  // (dataset, mechanism, rate, metric) -> method -> values over runs
  using Key = std::tuple<std::string, std::string, double, std::string>;
  std::map<Key, std::map<std::string, std::vector<double>>> cells;
  std::vector<std::string> methods;
  for (const auto& path : opt.results) {
    run.record_input(path);
    std::istringstream in(io::read_text(path));
    std::string line;
    std::getline(in, line);
    if (line.rfind("run_id,dataset,mechanism,rate,method,metric,value", 0) != 0)
      throw IoError("report: " + path + " is not a results CSV");
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto f = split_csv_line(line);
      if (f.size() != 7) throw IoError("report: malformed row in " + path + ": " + line);
      if (f[5] == "LFE") continue;
      try {
        cells[{f[1], f[2], std::stod(f[3]), f[5]}][f[4]].push_back(std::stod(f[6]));
      } catch (const std::exception&) {
        throw IoError("report: malformed number in " + path + ": " + line);
      }
      if (std::find(methods.begin(), methods.end(), f[4]) == methods.end()) methods.push_back(f[4]);
    }
  }
  auto metric_rank = [](const std::string& m) {
    return static_cast<std::size_t>(std::find(kMetrics.begin(), kMetrics.end(), m) - kMetrics.begin());
  };
  std::vector<Key> keys;
  for (const auto& [k, _] : cells) keys.push_back(k);
  std::stable_sort(keys.begin(), keys.end(), [&](const Key& a, const Key& b) {
    const auto ra = std::make_tuple(std::get<0>(a), std::get<1>(a), std::get<2>(a), metric_rank(std::get<3>(a)));
    const auto rb = std::make_tuple(std::get<0>(b), std::get<1>(b), std::get<2>(b), metric_rank(std::get<3>(b)));
    return ra < rb;
  });
  std::ostringstream csv, md;
  csv << "dataset,type,rate,metric";
  md << "| dataset | type | % | metric |";
  for (const auto& m : methods) {
    csv << ',' << m;
    md << ' ' << m << " |";
  }
  csv << '\n';
  md << "\n|---|---|---|---|";
  for (std::size_t i = 0; i < methods.size(); ++i) md << "---|";
  md << '\n';
  for (const auto& key : keys) {
    const auto& row = cells.at(key);
    csv << std::get<0>(key) << ',' << std::get<1>(key) << ',' << format_double(std::get<2>(key)) << ','
        << std::get<3>(key);
    md << "| " << std::get<0>(key) << " | " << std::get<1>(key) << " | " << format_double(std::get<2>(key)) << " | "
       << std::get<3>(key) << " |";
    for (const auto& m : methods) {
      const auto it = row.find(m);
      if (it == row.end()) {
        csv << ',';
        md << "  |";
        continue;
      }
      double mean = 0;
      for (double v : it->second) mean += v;
      mean /= static_cast<double>(it->second.size());
      csv << ',' << format_double(mean);
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.4f", mean);
      md << ' ' << buf << " |";
    }
    csv << '\n';
    md << '\n';
  }
  run.write("table.csv", csv.str());
  run.write("table.md", md.str());
  run.out << md.str();
}

int fail(std::ostream& err, const std::string& kind, const std::string& message, int code) {
  err << nlohmann::json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << "\n";
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectrum-conditioned diffusion imputation toolkit", "lscd"};
  app.require_subcommand(1, 1);
  Options opt;
  std::uint64_t seed = 0;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "experiment config (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--out-dir", opt.out_dir, "directory for outputs");
    sub->add_option("--seed-override", seed, "replace the config seed");
    sub->add_option("--threads", opt.threads, "worker threads (computation is single threaded)");
  };
  auto* gen = app.add_subcommand("gen-sines", "generate the sum-of-sines dataset");
  auto* mask = app.add_subcommand("mask", "apply base MCAR then the configured missingness");
  auto* psd = app.add_subcommand("psd", "masked Lomb-Scargle periodogram CSV");
  auto* cmp = app.add_subcommand("compare-spectra", "leading-frequency histograms and PSD differences");
  auto* train = app.add_subcommand("train", "train the diffusion imputer");
  auto* ft = app.add_subcommand("finetune", "fine-tune with the spectral consistency loss");
  auto* imp = app.add_subcommand("impute", "impute the test samples");
  auto* ev = app.add_subcommand("eval", "metrics of predictions against the truth");
  auto* rep = app.add_subcommand("report", "aggregate results CSVs into a table");
  for (auto* s : {gen, mask, psd, cmp, train, ft, imp, ev, rep}) common(s);
  for (auto* s : {mask, psd, cmp, train, ft, imp, ev})
    s->add_option("--input", opt.input, "dataset (JSON or CSV)")->required()->check(CLI::ExistingFile);
  for (auto* s : {cmp, ev}) s->add_option("--truth", opt.truth, "reference dataset")->required()->check(CLI::ExistingFile);
  cmp->add_option("--pred", opt.preds, "[name=]prediction file, repeatable");
  ev->add_option("--pred", opt.preds, "[name=]prediction file, repeatable")->required();
  ft->add_option("--checkpoint", opt.checkpoint, "checkpoint prefix")->required();
  imp->add_option("--checkpoint", opt.checkpoint, "checkpoint prefix (lscd)");
  imp->add_option("--method", opt.method, "mean, lerp or lscd")->required();
  rep->add_option("--results", opt.results, "results CSV, repeatable")->required()->check(CLI::ExistingFile);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    return fail(err, "UsageError", e.what(), 2);
  }
  for (auto* s : app.get_subcommands())
    if (s->count("--seed-override")) opt.seed_override = seed;

  auto* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    Run r(name, opt, out, name != "report");
    if (name == "gen-sines") cmd_gen_sines(r);
    else if (name == "mask") cmd_mask(r, opt);
    else if (name == "psd") cmd_psd(r, opt);
    else if (name == "compare-spectra") cmd_compare_spectra(r, opt);
    else if (name == "train") cmd_train(r, opt, false);
    else if (name == "finetune") cmd_train(r, opt, true);
    else if (name == "impute") cmd_impute(r, opt);
    else if (name == "eval") cmd_eval(r, opt);
    else if (name == "report") cmd_report(r, opt);
    r.finish();
  } catch (const IoError& e) {
    return fail(err, "IoError", e.what(), 3);
  } catch (const DivergenceError& e) {
    return fail(err, "DivergenceError", e.what(), 4);
  } catch (const ShapeError& e) {
    return fail(err, "ShapeError", e.what(), 2);
  } catch (const ValueError& e) {
    return fail(err, "ValueError", e.what(), 2);
  } catch (const fs::filesystem_error& e) {
    return fail(err, "IoError", e.what(), 3);
  } catch (const nlohmann::json::exception& e) {
    return fail(err, "IoError", std::string("malformed JSON: ") + e.what(), 3);
  } catch (const std::exception& e) {
    return fail(err, "Error", e.what(), 1);
  }
  return 0;
}

}  // namespace lscd::cli
