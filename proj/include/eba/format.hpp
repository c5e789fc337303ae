#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <system_error>

namespace eba {

/// Shortest decimal string that parses back to exactly `v`.
inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf.data(), end);
}

/// FNV-1a, used to fingerprint configurations in output headers.
inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

/// Joins already formatted cells into one CSV line (no trailing newline).
template <class... Cells>
std::string csv_row(const Cells&... cells) {
  std::string line;
  bool first = true;
  auto add = [&](const auto& cell) {
    if (!first) line += ',';
    first = false;
    using T = std::decay_t<decltype(cell)>;
    if constexpr (std::is_same_v<T, double> || std::is_same_v<T, float>) {
      line += format_double(static_cast<double>(cell));
    } else if constexpr (std::is_integral_v<T>) {
      line += std::to_string(cell);
    } else {
      line += std::string_view(cell);
    }
  };
  (add(cells), ...);
  return line;
}

}  // namespace eba
