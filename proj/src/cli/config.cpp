#include "lscd/cli/config.hpp"

#include <cmath>
#include <set>

#include "lscd/core/error.hpp"
#include "lscd/core/io.hpp"

namespace lscd::cli {

std::size_t SampleSplit::n_train(std::size_t n) const {
  return static_cast<std::size_t>(std::llround(train * static_cast<double>(n)));
}

std::size_t SampleSplit::n_val(std::size_t n) const {
  return std::min(n - n_train(n), static_cast<std::size_t>(std::llround(val * static_cast<double>(n))));
}

namespace {

const std::set<std::string> kTopKeys{"seed",  "dataset", "missingness", "grid",     "split",
                                     "model", "train",   "finetune",    "eval"};

void parse(ExperimentConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) throw ValueError("config: top level must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!kTopKeys.count(key)) throw ValueError("config: unknown key '" + key + "'");
  c.seed = j.value("seed", std::uint64_t{0});

  const auto ds = j.value("dataset", nlohmann::json::object());
  c.dataset_name = ds.value("name", std::string("sines"));
  if (c.dataset_name != "sines") throw ValueError("config: unsupported dataset '" + c.dataset_name + "'");
  c.dataset = synth::SinesConfig::from_json(ds);
  for (const auto& ch : c.dataset.channels) ch.validate();
  if (c.dataset.n_samples == 0 || c.dataset.length < 2) throw ValueError("config: dataset needs samples and length >= 2");

  auto ms = j.value("missingness", nlohmann::json::object());
  c.base_mcar = ms.value("base_mcar", c.base_mcar);
  if (!(c.base_mcar >= 0.0 && c.base_mcar < 1.0)) throw ValueError("config: base_mcar must be in [0, 1)");
  c.missingness = missing::MissingnessSpec::from_json(ms);
  c.missingness.validate({c.dataset.n_samples, c.dataset.channels.size(), c.dataset.length});

  c.grid = j.value("grid", nlohmann::json::object());
  const auto sp = j.value("split", nlohmann::json::object());
  c.split.train = sp.value("train", c.split.train);
  c.split.val = sp.value("val", c.split.val);
  if (c.split.train < 0 || c.split.val < 0 || c.split.train + c.split.val > 1.0)
    throw ValueError("config: split fractions must be >= 0 and sum to <= 1");

  c.model = diffusion::ModelConfig::from_json(j.value("model", nlohmann::json::object()));
  c.model.n_channels = c.dataset.channels.size();
  c.train = diffusion::TrainConfig::from_json(j.value("train", nlohmann::json::object()));
  auto ft = j.value("finetune", nlohmann::json::object());
  c.finetune = diffusion::TrainConfig::from_json(ft);
  if (!ft.contains("epochs")) c.finetune.epochs = 10;

  const auto ev = j.value("eval", nlohmann::json::object());
  c.eval.n_draws = ev.value("n_draws", c.eval.n_draws);
  c.eval.chunk = ev.value("chunk", c.eval.chunk);
  c.eval.noise_scale = ev.value("noise_scale", c.eval.noise_scale);
  c.eval.lf_bins = ev.value("lf_bins", c.eval.lf_bins);
  if (c.eval.n_draws == 0 || c.eval.chunk == 0 || c.eval.lf_bins == 0)
    throw ValueError("config: eval n_draws, chunk and lf_bins must be >= 1");
  if (!(c.eval.noise_scale >= 0.0)) throw ValueError("config: eval noise_scale must be >= 0");

  // All randomness follows from the single experiment seed.
  c.dataset.seed = derive_seed(c.seed, kSeedDataset);
  c.missingness.seed = derive_seed(c.seed, kSeedMechanism);
  c.model.init_seed = derive_seed(c.seed, kSeedInit);
  c.train.seed = derive_seed(c.seed, kSeedTrain);
  c.finetune.seed = derive_seed(c.seed, kSeedFinetune);
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j, std::optional<std::uint64_t> seed_override) {
  ExperimentConfig c;
  auto src = j;
  if (seed_override && src.is_object()) src["seed"] = *seed_override;
  try {
    parse(c, src);
  } catch (const nlohmann::json::exception& e) {
    throw ValueError(std::string("config: ") + e.what());
  }
  return c;
}

nlohmann::json ExperimentConfig::to_json() const {
  auto ds = dataset.to_json();
  ds["name"] = dataset_name;
  auto ms = missingness.to_json();
  ms["base_mcar"] = base_mcar;
  auto model_json = model.to_json();
  model_json.erase("grid_omegas");
  return {{"seed", seed},
          {"dataset", ds},
          {"missingness", ms},
          {"grid", grid},
          {"split", {{"train", split.train}, {"val", split.val}}},
          {"model", model_json},
          {"train", train.to_json()},
          {"finetune", finetune.to_json()},
          {"eval",
           {{"n_draws", eval.n_draws},
            {"chunk", eval.chunk},
            {"noise_scale", eval.noise_scale},
            {"lf_bins", eval.lf_bins}}}};
}

std::string ExperimentConfig::hash() const { return io::content_hash(to_json().dump()); }

}  // namespace lscd::cli
