#include "fluxfno/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace fluxfno {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace

void append_f64_le(std::vector<std::uint8_t>& out, std::span<const double> values) {
  out.reserve(out.size() + 8 * values.size());
  for (double v : values) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
}

std::vector<double> read_f64_le(std::span<const std::uint8_t> bytes, std::size_t offset,
                                std::size_t count) {
  if (offset + 8 * count > bytes.size()) throw FormatError("payload shorter than declared");
  std::vector<double> out(count);
  const std::uint8_t* p = bytes.data() + offset;
  for (std::size_t k = 0; k < count; ++k, p += 8) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    out[k] = std::bit_cast<double>(bits);
  }
  return out;
}

void write_container(const std::filesystem::path& path, std::string_view magic, const json& header,
                     std::span<const std::uint8_t> payload) {
  const std::string text = header.dump();
  std::vector<std::uint8_t> head(magic.begin(), magic.end());
  put_u32(head, static_cast<std::uint32_t>(text.size()));
  head.insert(head.end(), text.begin(), text.end());

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os.write(reinterpret_cast<const char*>(head.data()), static_cast<std::streamsize>(head.size()));
  os.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

Container read_container(const std::filesystem::path& path, std::string_view magic) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (bytes.size() < 8) throw FormatError(path.string() + ": file too short for header");
  if (std::memcmp(bytes.data(), magic.data(), 4) != 0) {
    throw FormatError(path.string() + ": bad magic, expected '" + std::string(magic) + "'");
  }
  const std::uint32_t len = get_u32(bytes.data() + 4);
  if (8 + static_cast<std::size_t>(len) > bytes.size()) {
    throw FormatError(path.string() + ": header length " + std::to_string(len) + " exceeds file size");
  }
  Container c;
  try {
    c.header = json::parse(bytes.begin() + 8, bytes.begin() + 8 + len);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": corrupt header: " + e.what());
  }
  if (!c.header.is_object()) throw FormatError(path.string() + ": header is not a JSON object");
  c.payload.assign(bytes.begin() + 8 + len, bytes.end());
  return c;
}

}  // namespace fluxfno
