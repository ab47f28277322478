#include "lscd/diffusion/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "lscd/core/normalize.hpp"

namespace lscd::diffusion {

Values reverse_sample(const Values& cond_values, const Mask& cond_mask, const EpsPredictor& eps,
                      const NoiseSchedule& schedule, double noise_scale, Rng& rng) {
  const Shape3 s = cond_mask.shape();
  if (cond_values.shape() != s) throw ShapeError("reverse_sample: shape mismatch");
  Values x(s);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double z = standard_normal(rng);
    if (!cond_mask[i]) x[i] = z;
  }
  for (std::size_t t = schedule.steps(); t >= 1; --t) {
    const auto e = eps(x, std::vector<std::size_t>(s.batch, t));
    if (e.shape() != s) throw ShapeError("reverse_sample: predictor returned the wrong shape");
    const double beta = schedule.beta(t);
    const double c_eps = beta / std::sqrt(1.0 - schedule.alpha(t));
    const double c_out = 1.0 / std::sqrt(1.0 - beta);
    const double sigma = noise_scale * std::sqrt(schedule.sigma2(t));
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double z = standard_normal(rng);
      if (cond_mask[i]) continue;
      x[i] = c_out * (x[i] - c_eps * e[i]) + sigma * z;
    }
    if (!std::all_of(x.data().begin(), x.data().end(), [](double v) { return std::isfinite(v); }))
      throw DivergenceError("reverse_sample: non-finite state at step " + std::to_string(t));
  }
  for (std::size_t i = 0; i < x.size(); ++i)
    if (cond_mask[i]) x[i] = cond_values[i];
  return x;
}

Values median_of(const std::vector<Values>& draws) {
  if (draws.empty()) throw ValueError("median_of: no draws");
  Values out(draws[0].shape());
  std::vector<double> col(draws.size());
  const std::size_t n = draws.size();
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (std::size_t d = 0; d < n; ++d) col[d] = draws[d][i];
    std::sort(col.begin(), col.end());
    out[i] = n % 2 ? col[n / 2] : 0.5 * (col[n / 2 - 1] + col[n / 2]);
  }
  return out;
}

SampleResult sample_impute(const LscdModel& model, const TimeSeriesBatch& batch, const Mask& cond_mask,
                           const SampleOptions& options, Rng& rng) {
  if (options.n_draws < 1) throw ValueError("sample_impute: n_draws must be >= 1");
  if (!model.params().all_finite()) throw DivergenceError("sample_impute: model parameters are not finite");
  const Shape3 s = batch.shape();
  const auto norm = apply_normalization(batch, model.stats);
  const std::size_t chunk = std::max<std::size_t>(1, options.chunk);

  SampleResult result;
  result.draws.assign(options.n_draws, Values(s));
  for (std::size_t first = 0; first < s.batch; first += chunk) {
    const std::size_t count = std::min(chunk, s.batch - first);
    const auto part = norm.slice(first, count);
    Mask part_mask(part.shape());
    std::copy_n(cond_mask.data().begin() + first * s.channels * s.steps, part_mask.size(), part_mask.data().begin());
    const auto cond = make_conditioning(part, part_mask);

    // The spectrum embedding and side projections depend only on the
    // condition; per-step nodes are dropped after each call.
    ad::Tape tape(false);
    std::optional<ad::Var> z;
    if (model.config().use_spectrum)
      z = model.encode(tape, tape.constant(ad::Tensor({count, s.channels, s.steps}, cond.cond_values.data())), cond);
    const auto ctx = model.context(tape, cond, z ? &*z : nullptr);
    const std::size_t base = tape.size();
    EpsPredictor eps = [&](const Values& x_t, const std::vector<std::size_t>& steps) {
      auto out = model.denoise(tape, tape.constant(ad::Tensor({count, s.channels, s.steps}, x_t.data())), cond, steps,
                               ctx);
      Values e(x_t.shape(), out.value().to_vector());
      tape.truncate(base);
      return e;
    };
    for (std::size_t d = 0; d < options.n_draws; ++d) {
      auto x = reverse_sample(cond.cond_values, part_mask, eps, model.schedule(), options.noise_scale, rng);
      auto& dst = result.draws[d];
      for (std::size_t b = 0; b < count; ++b)
        for (std::size_t k = 0; k < s.channels; ++k) {
          const double mu = model.stats.mean[k], sd = model.stats.std[k];
          for (std::size_t l = 0; l < s.steps; ++l) {
            const std::size_t gi = dst.index(first + b, k, l);
            dst[gi] = cond_mask[gi] ? batch.values[gi] : x(b, k, l) * sd + mu;
          }
        }
    }
  }
  result.median = median_of(result.draws);
  return result;
}

}  // namespace lscd::diffusion
