#pragma once

// EBV1 checkpoint files (little-endian):
//   "EBV1" | u32 n_modes | f64 alpha | f64 gamma | f64 time
//   [u8 component count, vector files only]
//   per component: n_modes^2 pairs (f64 re, f64 im), row-major over
//   (k1, k2), each axis ordered -n/2 ... n/2-1, k1 slowest.
// Scalar and vector files are told apart by their length.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "eba/error.hpp"
#include "eba/spectral.hpp"

namespace eba {

struct CheckpointHeader {
  std::uint32_t n_modes = 0;
  double alpha = 0.0;
  double gamma = 0.0;
  double time = 0.0;
  friend bool operator==(const CheckpointHeader&, const CheckpointHeader&) = default;
};

struct Checkpoint {
  CheckpointHeader header;
  std::vector<SpectralField> components;
};

namespace detail {

inline constexpr std::array<char, 4> kCheckpointMagic{'E', 'B', 'V', '1'};
inline constexpr std::size_t kCheckpointHeaderBytes = 4 + 4 + 3 * 8;

inline void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
inline void put_f64(std::vector<std::uint8_t>& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

inline std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}
inline std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}
inline double get_f64(const std::uint8_t* p) { return std::bit_cast<double>(get_u64(p)); }

inline void put_header(std::vector<std::uint8_t>& out, const CheckpointHeader& h) {
  out.insert(out.end(), kCheckpointMagic.begin(), kCheckpointMagic.end());
  put_u32(out, h.n_modes);
  put_f64(out, h.alpha);
  put_f64(out, h.gamma);
  put_f64(out, h.time);
}

inline void put_field(std::vector<std::uint8_t>& out, const SpectralField& f) {
  const int n = f.grid().n();
  for (int k1 = -n / 2; k1 < n / 2; ++k1) {
    for (int k2 = -n / 2; k2 < n / 2; ++k2) {
      const Complex v = f.get(k1, k2);
      put_f64(out, v.real());
      put_f64(out, v.imag());
    }
  }
}

inline SpectralField get_field(const FourierGrid& g, const std::uint8_t* p) {
  const int n = g.n();
  SpectralField f(g);
  for (int k1 = -n / 2; k1 < n / 2; ++k1) {
    for (int k2 = -n / 2; k2 < n / 2; ++k2) {
      const Complex v(get_f64(p), get_f64(p + 8));
      p += 16;
      if (k2 >= 0) {
        f[g.index(g.row(k1), k2)] = v;
      } else if (k2 == -n / 2) {
        const int mk1 = (k1 == -n / 2) ? k1 : -k1;
        f[g.index(g.row(mk1), n / 2)] = std::conj(v);
      }
    }
  }
  return f;
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_checkpoint(const CheckpointHeader& h,
                                                   const std::vector<const SpectralField*>& comps,
                                                   bool vector_layout) {
  std::vector<std::uint8_t> out;
  detail::put_header(out, h);
  if (vector_layout) out.push_back(static_cast<std::uint8_t>(comps.size()));
  for (const SpectralField* c : comps) {
    if (static_cast<std::uint32_t>(c->grid().n()) != h.n_modes)
      throw GridMismatch("checkpoint component grid does not match header");
    detail::put_field(out, *c);
  }
  return out;
}

inline Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < detail::kCheckpointHeaderBytes ||
      std::memcmp(bytes.data(), detail::kCheckpointMagic.data(), 4) != 0)
    throw IoError("not an EBV1 checkpoint");
  Checkpoint cp;
  const std::uint8_t* p = bytes.data() + 4;
  cp.header.n_modes = detail::get_u32(p);
  cp.header.alpha = detail::get_f64(p + 4);
  cp.header.gamma = detail::get_f64(p + 12);
  cp.header.time = detail::get_f64(p + 20);
  const std::size_t n = cp.header.n_modes;
  if (n < 4 || n % 2 != 0 || n > 65536) throw IoError("checkpoint has invalid n_modes");
  const std::size_t field_bytes = n * n * 16;
  const std::size_t rest = bytes.size() - detail::kCheckpointHeaderBytes;
  std::size_t count = 1;
  std::size_t offset = detail::kCheckpointHeaderBytes;
  if (rest != field_bytes) {
    count = bytes[offset];
    offset += 1;
    if (count == 0 || rest != 1 + count * field_bytes) throw IoError("checkpoint has inconsistent length");
  }
  const FourierGrid g(static_cast<int>(n));
  for (std::size_t c = 0; c < count; ++c)
    cp.components.push_back(detail::get_field(g, bytes.data() + offset + c * field_bytes));
  return cp;
}

inline void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw IoError("write failed for " + path.string());
}

inline std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(is), {});
}

inline void write_checkpoint(const std::filesystem::path& path, const SpectralField& f, double alpha,
                             double gamma, double time) {
  const CheckpointHeader h{static_cast<std::uint32_t>(f.grid().n()), alpha, gamma, time};
  write_bytes(path, encode_checkpoint(h, {&f}, false));
}

inline void write_checkpoint(const std::filesystem::path& path, const VectorField& v, double alpha,
                             double gamma, double time) {
  const CheckpointHeader h{static_cast<std::uint32_t>(v.grid().n()), alpha, gamma, time};
  write_bytes(path, encode_checkpoint(h, {&v.u1, &v.u2}, true));
}

inline Checkpoint read_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_bytes(path));
}

}  // namespace eba
