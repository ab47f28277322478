#include "lscd/autodiff/optim.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "lscd/core/io.hpp"

namespace lscd::ad {

void Adam::step(ParameterStore& params) {
  auto& ps = params.all();
  if (m_.size() != ps.size()) {
    m_.assign(ps.size(), {});
    v_.assign(ps.size(), {});
    for (std::size_t i = 0; i < ps.size(); ++i) {
      m_[i].assign(ps[i]->value.size(), 0.0);
      v_[i].assign(ps[i]->value.size(), 0.0);
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < ps.size(); ++i) {
    auto& p = *ps[i];
    if (!p.grad.all_finite()) throw DivergenceError("Adam: non-finite gradient in '" + p.name + "'");
    for (std::size_t j = 0; j < p.value.size(); ++j) {
      const double g = p.grad[j];
      m_[i][j] = cfg_.beta1 * m_[i][j] + (1.0 - cfg_.beta1) * g;
      v_[i][j] = cfg_.beta2 * v_[i][j] + (1.0 - cfg_.beta2) * g * g;
      const double mh = m_[i][j] / bc1;
      const double vh = v_[i][j] / bc2;
      p.value[j] -= cfg_.lr * mh / (std::sqrt(vh) + cfg_.eps);
    }
    if (!p.value.all_finite()) throw DivergenceError("Adam: non-finite value in '" + p.name + "'");
  }
}

namespace {

std::filesystem::path with_ext(const std::filesystem::path& prefix, const char* ext) {
  return std::filesystem::path(prefix.string() + ext);
}

}  // namespace

void save_checkpoint(const ParameterStore& params, const std::filesystem::path& prefix, const nlohmann::json& extra) {
  nlohmann::json manifest;
  manifest["format"] = "lscd-checkpoint-v1";
  manifest["dtype"] = "float64-le";
  manifest["extra"] = extra;
  manifest["params"] = nlohmann::json::array();
  std::string blob;
  std::size_t offset = 0;
  for (const auto* p : params.all()) {
    manifest["params"].push_back({{"name", p->name}, {"shape", p->value.shape}, {"offset", offset}, {"init", p->init}});
    for (double v : p->value.data) {
      auto bits = std::bit_cast<std::uint64_t>(v);
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
      char buf[8];
      std::memcpy(buf, &bits, 8);
      blob.append(buf, 8);
    }
    offset += p->value.size();
  }
  manifest["count"] = offset;
  manifest["blob_hash"] = io::content_hash(blob);
  io::write_json(manifest, with_ext(prefix, ".json"));
  io::write_text(blob, with_ext(prefix, ".bin"));
}

nlohmann::json load_checkpoint(ParameterStore& params, const std::filesystem::path& prefix) {
  const auto manifest = io::read_json(with_ext(prefix, ".json"));
  if (manifest.value("format", "") != "lscd-checkpoint-v1") throw IoError("checkpoint: unknown format");
  const std::string blob = io::read_text(with_ext(prefix, ".bin"));
  if (blob.size() != 8 * manifest.at("count").get<std::size_t>()) throw IoError("checkpoint: blob size mismatch");
  const auto& entries = manifest.at("params");
  if (entries.size() != params.all().size()) throw IoError("checkpoint: parameter count mismatch");
  for (const auto& e : entries) {
    auto name = e.at("name").get<std::string>();
    if (!params.contains(name)) throw IoError("checkpoint: unexpected parameter '" + name + "'");
    auto& p = params.get(name);
    if (e.at("shape").get<Shape>() != p.value.shape) throw IoError("checkpoint: shape mismatch for '" + name + "'");
    const std::size_t off = e.at("offset").get<std::size_t>();
    for (std::size_t j = 0; j < p.value.size(); ++j) {
      std::uint64_t bits;
      std::memcpy(&bits, blob.data() + 8 * (off + j), 8);
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
      p.value[j] = std::bit_cast<double>(bits);
    }
  }
  return manifest.at("extra");
}

}  // namespace lscd::ad
