#include "lscd/diffusion/schedule.hpp"

#include <cmath>

namespace lscd::diffusion {

ScheduleKind parse_schedule_kind(const std::string& name) {
  if (name == "quadratic" || name == "quad") return ScheduleKind::quadratic;
  if (name == "linear") return ScheduleKind::linear;
  throw ValueError("unknown schedule kind '" + name + "'");
}

std::string to_string(ScheduleKind k) { return k == ScheduleKind::quadratic ? "quadratic" : "linear"; }

double NoiseSchedule::sigma2(std::size_t t) const {
  if (t == 1) return beta(1);
  return (1.0 - alpha(t - 1)) / (1.0 - alpha(t)) * beta(t);
}

nlohmann::json NoiseSchedule::to_json() const {
  return {{"steps", steps()}, {"kind", to_string(kind)}, {"beta_min", beta_min}, {"beta_max", beta_max}};
}

NoiseSchedule NoiseSchedule::from_json(const nlohmann::json& j) {
  return make_schedule(j.value("steps", std::size_t{50}), parse_schedule_kind(j.value("kind", "quadratic")),
                       j.value("beta_min", 1e-4), j.value("beta_max", 0.5));
}

NoiseSchedule make_schedule(std::size_t T, ScheduleKind kind, double beta_min, double beta_max) {
  if (T < 1) throw ValueError("make_schedule: T must be >= 1");
  if (!(beta_min > 0.0 && beta_max < 1.0 && beta_min <= beta_max))
    throw ValueError("make_schedule: need 0 < beta_min <= beta_max < 1");
  NoiseSchedule s;
  s.kind = kind;
  s.beta_min = beta_min;
  s.beta_max = beta_max;
  s.betas.resize(T);
  for (std::size_t i = 0; i < T; ++i) {
    const double u = T == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(T - 1);
    if (kind == ScheduleKind::quadratic) {
      const double r = std::sqrt(beta_min) + u * (std::sqrt(beta_max) - std::sqrt(beta_min));
      s.betas[i] = r * r;
    } else {
      s.betas[i] = beta_min + u * (beta_max - beta_min);
    }
  }
  s.alphas_cum.resize(T);
  double a = 1.0;
  for (std::size_t i = 0; i < T; ++i) s.alphas_cum[i] = (a *= 1.0 - s.betas[i]);
  return s;
}

Noised forward_noise(const Values& x0, const Mask& target, const std::vector<std::size_t>& t,
                     const NoiseSchedule& schedule, Rng& rng) {
  const Shape3 s = x0.shape();
  if (target.shape() != s) throw ShapeError("forward_noise: mask shape mismatch");
  if (t.size() != s.batch) throw ShapeError("forward_noise: need one step per sample");
  Noised out{Values(s), Values(s)};
  for (std::size_t b = 0; b < s.batch; ++b) {
    if (t[b] < 1 || t[b] > schedule.steps()) throw ValueError("forward_noise: step out of range");
    const double sa = std::sqrt(schedule.alpha(t[b]));
    const double sn = std::sqrt(1.0 - schedule.alpha(t[b]));
    for (std::size_t k = 0; k < s.channels; ++k)
      for (std::size_t l = 0; l < s.steps; ++l) {
        const std::size_t i = x0.index(b, k, l);
        // Draw for every entry so the stream does not depend on the mask.
        const double e = standard_normal(rng);
        if (!target[i]) continue;
        out.eps[i] = e;
        out.x_t[i] = sa * x0[i] + sn * e;
      }
  }
  return out;
}

}  // namespace lscd::diffusion
