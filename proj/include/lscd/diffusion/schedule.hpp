#pragma once

#include <string>
#include <vector>

#include "lscd/core/random.hpp"
#include "lscd/core/types.hpp"

namespace lscd::diffusion {

enum class ScheduleKind { quadratic, linear };

ScheduleKind parse_schedule_kind(const std::string& name);
std::string to_string(ScheduleKind k);

/// Steps are 1-based: beta(1) .. beta(T).
struct NoiseSchedule {
  ScheduleKind kind = ScheduleKind::quadratic;
  double beta_min = 1e-4;
  double beta_max = 0.5;
  std::vector<double> betas;       // [T]
  std::vector<double> alphas_cum;  // [T], prod_{i<=t} (1 - beta_i)

  std::size_t steps() const { return betas.size(); }
  double beta(std::size_t t) const { return betas.at(t - 1); }
  /// Cumulative alpha; alpha(0) = 1.
  double alpha(std::size_t t) const { return t == 0 ? 1.0 : alphas_cum.at(t - 1); }
  /// Reverse-step variance: (1 - alpha_{t-1}) / (1 - alpha_t) * beta_t for t > 1, beta_1 at t = 1.
  double sigma2(std::size_t t) const;

  nlohmann::json to_json() const;
  static NoiseSchedule from_json(const nlohmann::json& j);
};

/// Quadratic: beta_t = (linspace(sqrt(beta_min), sqrt(beta_max), T))^2. Linear: linspace(beta_min, beta_max, T).
NoiseSchedule make_schedule(std::size_t T, ScheduleKind kind = ScheduleKind::quadratic, double beta_min = 1e-4,
                            double beta_max = 0.5);

struct Noised {
  Values x_t;
  Values eps;  // zero outside the target mask
};

/// x_t = sqrt(alpha_t) x_0 + sqrt(1 - alpha_t) eps on target entries; other
/// entries of x_t are 0. `t` holds one step per sample (1-based).
Noised forward_noise(const Values& x0, const Mask& target, const std::vector<std::size_t>& t,
                     const NoiseSchedule& schedule, Rng& rng);

}  // namespace lscd::diffusion
