#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace msa::jsonl {

// Shared on-disk container: UTF-8, newline-delimited JSON records, preceded
// by a single header line {"schema": "...", "version": N}. Datasets, training
// histories, evaluation results and report tables all use this format, so one
// parser round-trips them all. Serialization is deterministic: object keys
// are emitted sorted and doubles use shortest round-trip notation.
struct Container {
  std::string schema;
  int version = 0;
  std::vector<nlohmann::json> records;
};

Container read(const std::filesystem::path& path);

/// Reads and checks the header against an expected schema name.
Container read(const std::filesystem::path& path, const std::string& schema);

void write(const std::filesystem::path& path, const std::string& schema,
           int version, std::span<const nlohmann::json> records);

}  // namespace msa::jsonl
