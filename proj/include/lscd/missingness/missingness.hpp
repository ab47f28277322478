#pragma once

#include <cstdint>
#include <string>

#include "lscd/core/types.hpp"

namespace lscd::missing {

enum class Mechanism { mcar, sequence, block };

Mechanism parse_mechanism(const std::string& name);
std::string to_string(Mechanism m);

/// Parameters of one missingness mechanism.
///
/// `rate` is the drop probability for mcar, the target fraction for
/// sequence, and the block-count factor for block.
struct MissingnessSpec {
  Mechanism mechanism = Mechanism::mcar;
  double rate = 0.0;
  std::size_t seq_len = 1;
  std::size_t block_len = 1;
  std::size_t block_width = 1;
  std::uint64_t seed = 0;

  void validate(const Shape3& shape) const;
  nlohmann::json to_json() const;
  static MissingnessSpec from_json(const nlohmann::json& j);
};

struct MissingnessResult {
  TimeSeriesBatch batch;
  /// Fraction of originally observed entries that were removed.
  double achieved_rate = 0.0;
  std::size_t removed = 0;
  std::size_t originally_observed = 0;
  bool target_reached = true;
  std::string warning;
};

/// Remove entries from the observation mask. Only currently observed
/// entries are touched, so the new mask is elementwise <= the old one.
MissingnessResult apply_missingness(const TimeSeriesBatch& batch, const MissingnessSpec& spec);

/// Fraction of all [B, K, L] entries that are unobserved.
double missing_fraction(const Mask& mask);

/// Number of blocks placed for a block spec on the given shape.
std::size_t block_count(const MissingnessSpec& spec, const Shape3& shape);

}  // namespace lscd::missing
