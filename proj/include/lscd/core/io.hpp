#pragma once

#include <filesystem>
#include <string>

#include "lscd/core/types.hpp"

namespace lscd::io {

nlohmann::json to_json(const TimeSeriesBatch& batch);
TimeSeriesBatch batch_from_json(const nlohmann::json& j);

/// Flat CSV: sample_id,channel,step,time,value,observed
std::string to_csv(const TimeSeriesBatch& batch);
TimeSeriesBatch batch_from_csv(const std::string& text);

void save_batch(const TimeSeriesBatch& batch, const std::filesystem::path& path);
/// Format chosen by extension (.json or .csv).
TimeSeriesBatch load_batch(const std::filesystem::path& path);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const nlohmann::json& j, const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);
void write_text(const std::string& text, const std::filesystem::path& path);

/// Shortest decimal form that round-trips a double exactly.
std::string format_double(double v);

/// 64-bit FNV-1a content hash, hex encoded.
std::string content_hash(const std::string& bytes);

}  // namespace lscd::io
