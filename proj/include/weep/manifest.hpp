#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace weep {

// 64-bit FNV-1a digest as 16 lowercase hex digits.
std::string fnv1a64_hex(std::string_view bytes);
std::string fnv1a64_file(const std::filesystem::path& path);

// Reproducibility record written next to every generated artifact tree:
// which subcommand ran, with which resolved parameters, over which input
// files (path + content digest). Serialization is key-sorted with no
// timestamps, so reruns produce identical bytes.
struct RunManifest {
  std::string subcommand;
  nlohmann::json parameters = nlohmann::json::object();
  std::vector<std::pair<std::string, std::string>> inputs;  // (path, digest)
  std::string tool_version;

  std::string to_json() const;
};

}  // namespace weep
