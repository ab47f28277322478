#include "lscd/missingness/missingness.hpp"

#include <algorithm>
#include <cmath>

#include "lscd/core/error.hpp"
#include "lscd/core/random.hpp"

namespace lscd::missing {

Mechanism parse_mechanism(const std::string& name) {
  if (name == "mcar" || name == "point") return Mechanism::mcar;
  if (name == "sequence" || name == "seq") return Mechanism::sequence;
  if (name == "block") return Mechanism::block;
  throw ValueError("unknown missingness mechanism: " + name);
}

std::string to_string(Mechanism m) {
  switch (m) {
    case Mechanism::mcar: return "mcar";
    case Mechanism::sequence: return "sequence";
    case Mechanism::block: return "block";
  }
  return "mcar";
}

void MissingnessSpec::validate(const Shape3& shape) const {
  if (!(rate >= 0.0 && rate <= 1.0)) throw ValueError("MissingnessSpec: rate/factor must lie in [0, 1]");
  if (mechanism == Mechanism::sequence && (seq_len < 1 || seq_len > shape.steps))
    throw ValueError("MissingnessSpec: seq_len must be in [1, L]");
  if (mechanism == Mechanism::block) {
    if (block_len < 1 || block_len > shape.steps) throw ValueError("MissingnessSpec: block_len must be in [1, L]");
    if (block_width < 1 || block_width > shape.channels)
      throw ValueError("MissingnessSpec: block_width must be in [1, K]");
  }
}

nlohmann::json MissingnessSpec::to_json() const {
  nlohmann::json j{{"mechanism", to_string(mechanism)}, {"rate", rate}, {"seed", seed}};
  if (mechanism == Mechanism::sequence) j["seq_len"] = seq_len;
  if (mechanism == Mechanism::block) {
    j["block_len"] = block_len;
    j["block_width"] = block_width;
  }
  return j;
}

MissingnessSpec MissingnessSpec::from_json(const nlohmann::json& j) {
  MissingnessSpec s;
  s.mechanism = parse_mechanism(j.value("mechanism", std::string("mcar")));
  if (j.contains("rate")) s.rate = j.at("rate").get<double>();
  if (j.contains("factor")) s.rate = j.at("factor").get<double>();
  s.seq_len = j.value("seq_len", std::size_t{1});
  s.block_len = j.value("block_len", std::size_t{1});
  s.block_width = j.value("block_width", std::size_t{1});
  s.seed = j.value("seed", std::uint64_t{0});
  return s;
}

double missing_fraction(const Mask& mask) {
  if (mask.size() == 0) return 0.0;
  std::size_t missing = 0;
  for (auto m : mask.data()) missing += m ? 0 : 1;
  return static_cast<double>(missing) / static_cast<double>(mask.size());
}

std::size_t block_count(const MissingnessSpec& spec, const Shape3& s) {
  const double cells = static_cast<double>(s.batch * s.channels * s.steps);
  return static_cast<std::size_t>(
      std::llround(spec.rate * cells / static_cast<double>(spec.block_len * spec.block_width)));
}

namespace {

void drop_mcar(Mask& mask, const MissingnessSpec& spec) {
  const Shape3& s = mask.shape();
  for (std::size_t b = 0; b < s.batch; ++b) {
    Rng rng(derive_seed(spec.seed, b));
    for (std::size_t k = 0; k < s.channels; ++k)
      for (auto& m : mask.row(b, k))
        if (m && uniform01(rng) < spec.rate) m = 0;
  }
}

/// Disjoint windows per channel, anchors drawn without replacement; a
/// window is kept only if it moves the removed count closer to the target.
bool drop_sequences(Mask& mask, const MissingnessSpec& spec) {
  const Shape3& s = mask.shape();
  const std::size_t len = spec.seq_len;
  const std::size_t n_anchor = s.steps - len + 1;
  bool reached = true;
  std::vector<std::pair<std::size_t, std::size_t>> candidates;
  std::vector<std::uint8_t> windowed(s.channels * s.steps);
  for (std::size_t b = 0; b < s.batch; ++b) {
    Rng rng(derive_seed(spec.seed, b));
    std::size_t observed = 0;
    for (std::size_t k = 0; k < s.channels; ++k)
      for (auto m : mask.row(b, k)) observed += m;
    const double target = spec.rate * static_cast<double>(observed);
    if (target <= 0.0) continue;
    candidates.clear();
    for (std::size_t k = 0; k < s.channels; ++k)
      for (std::size_t a = 0; a < n_anchor; ++a) candidates.emplace_back(k, a);
    std::shuffle(candidates.begin(), candidates.end(), rng);
    std::ranges::fill(windowed, 0);
    double removed = 0.0;
    for (auto [k, a] : candidates) {
      if (removed >= target) break;
      const std::uint8_t* w = windowed.data() + k * s.steps;
      if (std::any_of(w + a, w + a + len, [](std::uint8_t v) { return v != 0; })) continue;
      auto row = mask.row(b, k);
      std::size_t fresh = 0;
      for (std::size_t l = a; l < a + len; ++l) fresh += row[l];
      if (std::abs(removed + static_cast<double>(fresh) - target) >= std::abs(removed - target)) continue;
      for (std::size_t l = a; l < a + len; ++l) {
        row[l] = 0;
        windowed[k * s.steps + l] = 1;
      }
      removed += static_cast<double>(fresh);
    }
    if (target - removed > static_cast<double>(len)) reached = false;
  }
  return reached;
}

void drop_blocks(Mask& mask, const MissingnessSpec& spec) {
  const Shape3& s = mask.shape();
  const std::size_t count = block_count(spec, s);
  Rng rng(derive_seed(spec.seed, 0xB10C));
  std::uniform_int_distribution<std::size_t> pick_b(0, s.batch - 1);
  std::uniform_int_distribution<std::size_t> pick_k(0, s.channels - spec.block_width);
  std::uniform_int_distribution<std::size_t> pick_l(0, s.steps - spec.block_len);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t b = pick_b(rng);
    const std::size_t k0 = pick_k(rng);
    const std::size_t l0 = pick_l(rng);
    for (std::size_t k = k0; k < k0 + spec.block_width; ++k)
      for (std::size_t l = l0; l < l0 + spec.block_len; ++l) mask(b, k, l) = 0;
  }
}

}  // namespace

MissingnessResult apply_missingness(const TimeSeriesBatch& batch, const MissingnessSpec& spec) {
  spec.validate(batch.shape());
  MissingnessResult res;
  res.batch = batch;
  Mask& mask = res.batch.obs_mask;
  if (batch.batch() > 0 && spec.rate > 0.0) {
    switch (spec.mechanism) {
      case Mechanism::mcar: drop_mcar(mask, spec); break;
      case Mechanism::sequence: res.target_reached = drop_sequences(mask, spec); break;
      case Mechanism::block: drop_blocks(mask, spec); break;
    }
  }
  for (std::size_t i = 0; i < mask.size(); ++i) {
    res.originally_observed += batch.obs_mask[i];
    res.removed += batch.obs_mask[i] && !mask[i] ? 1 : 0;
  }
  res.achieved_rate = res.originally_observed
                          ? static_cast<double>(res.removed) / static_cast<double>(res.originally_observed)
                          : 0.0;
  if (!res.target_reached)
    res.warning = "sequence target rate " + std::to_string(spec.rate) + " not reachable; achieved " +
                  std::to_string(res.achieved_rate);
  res.batch.meta["missingness"] = spec.to_json();
  res.batch.meta["missingness"]["achieved_rate"] = res.achieved_rate;
  if (!res.warning.empty()) res.batch.meta["missingness"]["warning"] = res.warning;
  return res;
}

}  // namespace lscd::missing
