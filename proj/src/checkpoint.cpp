#include "edgefl/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <stdexcept>

#include "edgefl/errors.hpp"

namespace edgefl::checkpoint {

namespace {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

template <typename T>
T get_le(const std::vector<std::uint8_t>& in, std::size_t offset) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(static_cast<T>(in[offset + i]) << (8 * i));
  return value;
}

std::uint16_t narrow16(std::size_t v) {
  if (v > std::numeric_limits<std::uint16_t>::max()) throw ContractViolation("checkpoint: dimension exceeds 65535");
  return static_cast<std::uint16_t>(v);
}

}  // namespace

std::vector<std::uint8_t> encode(const nn::MlpParams& params) {
  const nn::MlpShape& s = params.shape();
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + 8 * s.param_count());
  for (char c : {'I', 'E', 'A', 'I'}) out.push_back(static_cast<std::uint8_t>(c));
  put_le<std::uint16_t>(out, kFormatVersion);
  put_le<std::uint16_t>(out, narrow16(s.input_dim));
  put_le<std::uint16_t>(out, narrow16(s.hidden_dim));
  put_le<std::uint16_t>(out, narrow16(s.output_dim));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.param_count()));
  for (double v : params.values()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

nn::MlpParams decode(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kHeaderBytes || std::memcmp(bytes.data(), "IEAI", 4) != 0) {
    throw std::runtime_error("checkpoint: bad magic");
  }
  if (get_le<std::uint16_t>(bytes, 4) != kFormatVersion) throw std::runtime_error("checkpoint: unsupported version");
  nn::MlpShape shape{get_le<std::uint16_t>(bytes, 6), get_le<std::uint16_t>(bytes, 8), get_le<std::uint16_t>(bytes, 10)};
  const std::uint32_t count = get_le<std::uint32_t>(bytes, 12);
  if (count != shape.param_count() || bytes.size() != kHeaderBytes + 8 * static_cast<std::size_t>(count)) {
    throw std::runtime_error("checkpoint: size does not match header");
  }
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    values[i] = std::bit_cast<double>(get_le<std::uint64_t>(bytes, kHeaderBytes + 8 * i));
  }
  return nn::MlpParams(shape, std::move(values));
}

void save(const std::filesystem::path& path, const nn::MlpParams& params) {
  const auto bytes = encode(params);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("checkpoint: cannot open " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path.string());
}

nn::MlpParams load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode(bytes);
}

}  // namespace edgefl::checkpoint
