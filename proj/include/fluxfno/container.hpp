#pragma once

// Shared framing for the binary dataset (FFNO) and model (FFNM) files:
//   4 magic bytes | u32 LE header length | UTF-8 JSON header | raw LE payload

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace fluxfno {

using json = nlohmann::json;

/// Malformed or unreadable file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Container {
  json header;
  std::vector<std::uint8_t> payload;
};

void write_container(const std::filesystem::path& path, std::string_view magic, const json& header,
                     std::span<const std::uint8_t> payload);
Container read_container(const std::filesystem::path& path, std::string_view magic);

void append_f64_le(std::vector<std::uint8_t>& out, std::span<const double> values);
/// Decodes `count` doubles starting at byte `offset`.
std::vector<double> read_f64_le(std::span<const std::uint8_t> bytes, std::size_t offset, std::size_t count);

}  // namespace fluxfno
