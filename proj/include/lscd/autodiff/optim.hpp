#pragma once

#include <filesystem>

#include "lscd/autodiff/tape.hpp"

namespace lscd::ad {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  /// One update from the accumulated Parameter::grad values. Throws
  /// DivergenceError if a gradient or updated value is not finite.
  void step(ParameterStore& params);
  std::size_t steps() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  std::size_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

/// Writes `<prefix>.json` (names, shapes, offsets, extra metadata) and
/// `<prefix>.bin` (little-endian float64 values in manifest order).
void save_checkpoint(const ParameterStore& params, const std::filesystem::path& prefix,
                     const nlohmann::json& extra = nlohmann::json::object());
/// Loads values into an already-constructed store; names and shapes must match.
nlohmann::json load_checkpoint(ParameterStore& params, const std::filesystem::path& prefix);

}  // namespace lscd::ad
