#include "lscd/core/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lscd/core/error.hpp"

namespace lscd::io {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string content_hash(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json to_json(const TimeSeriesBatch& batch) {
  const Shape3& s = batch.shape();
  nlohmann::json values = nlohmann::json::array();
  nlohmann::json mask = nlohmann::json::array();
  nlohmann::json times = nlohmann::json::array();
  for (std::size_t b = 0; b < s.batch; ++b) {
    nlohmann::json vb = nlohmann::json::array();
    nlohmann::json mb = nlohmann::json::array();
    for (std::size_t k = 0; k < s.channels; ++k) {
      nlohmann::json vk = nlohmann::json::array();
      nlohmann::json mk = nlohmann::json::array();
      for (std::size_t l = 0; l < s.steps; ++l) {
        const double v = batch.values(b, k, l);
        if (std::isfinite(v))
          vk.push_back(v);
        else
          vk.push_back(nullptr);
        mk.push_back(static_cast<int>(batch.obs_mask(b, k, l)));
      }
      vb.push_back(std::move(vk));
      mb.push_back(std::move(mk));
    }
    values.push_back(std::move(vb));
    mask.push_back(std::move(mb));
    auto t = batch.times(b);
    times.push_back(std::vector<double>(t.begin(), t.end()));
  }
  return {{"values", std::move(values)}, {"timestamps", std::move(times)}, {"obs_mask", std::move(mask)},
          {"meta", batch.meta}};
}

TimeSeriesBatch batch_from_json(const nlohmann::json& j) {
  for (const char* key : {"values", "timestamps", "obs_mask"})
    if (!j.contains(key)) throw IoError(std::string("batch JSON missing field: ") + key);
  const auto& jv = j.at("values");
  const auto& jm = j.at("obs_mask");
  const auto& jt = j.at("timestamps");
  const std::size_t B = jv.size();
  const std::size_t K = B ? jv.at(0).size() : 0;
  const std::size_t L = K ? jv.at(0).at(0).size() : 0;
  const Shape3 s{B, K, L};
  Values values(s);
  Mask mask(s);
  std::vector<double> times(B * L);
  if (jm.size() != B || jt.size() != B) throw IoError("batch JSON: inconsistent sample counts");
  for (std::size_t b = 0; b < B; ++b) {
    if (jv[b].size() != K || jm[b].size() != K || jt[b].size() != L) throw IoError("batch JSON: ragged arrays");
    for (std::size_t l = 0; l < L; ++l) times[b * L + l] = jt[b][l].get<double>();
    for (std::size_t k = 0; k < K; ++k) {
      if (jv[b][k].size() != L || jm[b][k].size() != L) throw IoError("batch JSON: ragged arrays");
      for (std::size_t l = 0; l < L; ++l) {
        const auto& v = jv[b][k][l];
        const int m = jm[b][k][l].get<int>();
        if (m != 0 && m != 1) throw IoError("batch JSON: obs_mask entries must be 0 or 1");
        // null encodes a non-finite value; only observed ones are kept as NaN
        values(b, k, l) = v.is_null() ? (m ? std::nan("") : 0.0) : v.get<double>();
        mask(b, k, l) = static_cast<std::uint8_t>(m);
      }
    }
  }
  TimeSeriesBatch batch(std::move(values), std::move(times), std::move(mask));
  if (j.contains("meta")) batch.meta = j.at("meta");
  return batch;
}

std::string to_csv(const TimeSeriesBatch& batch) {
  const Shape3& s = batch.shape();
  std::string out = "sample_id,channel,step,time,value,observed\n";
  for (std::size_t b = 0; b < s.batch; ++b)
    for (std::size_t k = 0; k < s.channels; ++k)
      for (std::size_t l = 0; l < s.steps; ++l) {
        out += std::to_string(b) + ',' + std::to_string(k) + ',' + std::to_string(l) + ',' +
               format_double(batch.times(b)[l]) + ',' + format_double(batch.values(b, k, l)) + ',' +
               std::to_string(batch.obs_mask(b, k, l)) + '\n';
      }
  return out;
}

namespace {

double parse_double(std::string_view f) {
  if (f == "nan") return std::nan("");
  if (f == "inf") return INFINITY;
  if (f == "-inf") return -INFINITY;
  double v = 0.0;
  auto res = std::from_chars(f.data(), f.data() + f.size(), v);
  if (res.ec != std::errc() || res.ptr != f.data() + f.size()) throw IoError("CSV: bad number '" + std::string(f) + "'");
  return v;
}

std::size_t parse_index(std::string_view f) {
  std::size_t v = 0;
  auto res = std::from_chars(f.data(), f.data() + f.size(), v);
  if (res.ec != std::errc() || res.ptr != f.data() + f.size()) throw IoError("CSV: bad index '" + std::string(f) + "'");
  return v;
}

struct CsvRow {
  std::size_t b, k, l;
  double t, v;
  std::uint8_t m;
};

}  // namespace

TimeSeriesBatch batch_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("sample_id,channel,step,time,value,observed", 0) != 0)
    throw IoError("CSV: missing header sample_id,channel,step,time,value,observed");
  std::vector<CsvRow> rows;
  std::size_t B = 0, K = 0, L = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::string_view sv(line);
    std::string_view f[6];
    for (int i = 0; i < 6; ++i) {
      auto pos = sv.find(',');
      if (i < 5 && pos == std::string_view::npos) throw IoError("CSV: expected 6 fields");
      f[i] = sv.substr(0, pos);
      sv = pos == std::string_view::npos ? std::string_view{} : sv.substr(pos + 1);
    }
    CsvRow r{parse_index(f[0]), parse_index(f[1]), parse_index(f[2]), parse_double(f[3]), parse_double(f[4]),
             static_cast<std::uint8_t>(parse_index(f[5]))};
    if (r.m > 1) throw IoError("CSV: observed must be 0 or 1");
    B = std::max(B, r.b + 1);
    K = std::max(K, r.k + 1);
    L = std::max(L, r.l + 1);
    rows.push_back(r);
  }
  if (rows.size() != B * K * L) throw IoError("CSV: rows do not cover a dense [B, K, L] grid");
  const Shape3 s{B, K, L};
  Values values(s);
  Mask mask(s);
  std::vector<double> times(B * L);
  for (const auto& r : rows) {
    values(r.b, r.k, r.l) = r.v;
    mask(r.b, r.k, r.l) = r.m;
    times[r.b * L + r.l] = r.t;
  }
  return TimeSeriesBatch(std::move(values), std::move(times), std::move(mask));
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& text, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

nlohmann::json read_json(const std::filesystem::path& path) {
  try {
    return nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

void write_json(const nlohmann::json& j, const std::filesystem::path& path) { write_text(j.dump(1) + "\n", path); }

void save_batch(const TimeSeriesBatch& batch, const std::filesystem::path& path) {
  if (path.extension() == ".csv")
    write_text(to_csv(batch), path);
  else
    write_text(to_json(batch).dump() + "\n", path);
}

TimeSeriesBatch load_batch(const std::filesystem::path& path) {
  if (path.extension() == ".csv") return batch_from_csv(read_text(path));
  return batch_from_json(read_json(path));
}

}  // namespace lscd::io
