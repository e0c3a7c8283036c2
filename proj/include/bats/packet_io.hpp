#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "batch.hpp"
#include "precode.hpp"

namespace bats {

// Symbols of width m packed MSB-first; m = 8 is one symbol per byte.
inline std::size_t packed_size(std::size_t count, unsigned m) { return (count * m + 7) / 8; }

inline void pack_symbols(const Symbol* s, std::size_t count, unsigned m, std::vector<std::uint8_t>& out) {
  if (m == 8) {
    out.insert(out.end(), s, s + count);
    return;
  }
  std::size_t base = out.size();
  out.resize(base + packed_size(count, m), 0);
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t bit = i * m;
    out[base + bit / 8] |= static_cast<std::uint8_t>(s[i] << (8 - m - bit % 8));
  }
}

inline std::vector<Symbol> unpack_symbols(const std::uint8_t* p, std::size_t count, unsigned m) {
  std::vector<Symbol> s(count);
  if (m == 8) {
    std::memcpy(s.data(), p, count);
    return s;
  }
  const unsigned mask = (1u << m) - 1;
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t bit = i * m;
    s[i] = static_cast<Symbol>(p[bit / 8] >> (8 - m - bit % 8) & mask);
  }
  return s;
}

inline std::size_t packet_wire_size(std::size_t M, std::size_t T, unsigned m) {
  return 4 + packed_size(M, m) + packed_size(T, m);
}

inline std::vector<std::uint8_t> serialize_packet(const Packet& p, unsigned m) {
  std::vector<std::uint8_t> out;
  out.reserve(packet_wire_size(p.coding_vector.size(), p.payload.size(), m));
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(p.batch_id >> (8 * i)));
  pack_symbols(p.coding_vector.data(), p.coding_vector.size(), m, out);
  pack_symbols(p.payload.data(), p.payload.size(), m, out);
  return out;
}

inline Packet parse_packet(const std::uint8_t* data, std::size_t size, std::size_t M, std::size_t T, unsigned m) {
  if (size != packet_wire_size(M, T, m)) throw Error("packet has the wrong length for its parameters");
  Packet p;
  for (int i = 0; i < 4; ++i) p.batch_id |= static_cast<std::uint32_t>(data[i]) << (8 * i);
  p.coding_vector = unpack_symbols(data + 4, M, m);
  p.payload = unpack_symbols(data + 4 + packed_size(M, m), T, m);
  const unsigned top = 1u << m;
  for (auto v : p.coding_vector)
    if (v >= top) throw Error("coding vector symbol out of range");
  return p;
}

struct FileHeader {
  std::uint32_t k_prime = 0;
  std::uint32_t K = 0;
  std::uint16_t M = 0;
  std::uint16_t q = 0;
  std::uint32_t T = 0;
  std::uint64_t seed = 0;
  PrecodeSpec precode;

  friend bool operator==(const FileHeader& a, const FileHeader& b) {
    return a.k_prime == b.k_prime && a.K == b.K && a.M == b.M && a.q == b.q && a.T == b.T && a.seed == b.seed &&
           a.precode.mode == b.precode.mode && a.precode.rate == b.precode.rate &&
           a.precode.row_weight == b.precode.row_weight && a.precode.seed == b.precode.seed;
  }
};

inline constexpr std::uint8_t file_version = 1;

namespace detail {

template <class U>
void put(std::ostream& os, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) os.put(static_cast<char>(static_cast<std::uint64_t>(v) >> (8 * i) & 0xFF));
}

template <class U>
U get(std::istream& is) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    int c = is.get();
    if (c == std::char_traits<char>::eof()) throw Error("truncated packet file");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return static_cast<U>(v);
}

}  // namespace detail

// "BATS", version, header, packet count, then fixed-size packets.
inline void write_packet_file(std::ostream& os, const FileHeader& h, const std::vector<Packet>& packets) {
  unsigned m = width_for_size(h.q);
  os.write("BATS", 4);
  detail::put<std::uint8_t>(os, file_version);
  detail::put(os, h.k_prime);
  detail::put(os, h.K);
  detail::put(os, h.M);
  detail::put(os, h.q);
  detail::put(os, h.T);
  detail::put(os, h.seed);
  detail::put<std::uint8_t>(os, static_cast<std::uint8_t>(h.precode.mode));
  detail::put(os, std::bit_cast<std::uint64_t>(h.precode.rate));
  detail::put(os, static_cast<std::uint32_t>(h.precode.row_weight));
  detail::put(os, h.precode.seed);
  detail::put(os, static_cast<std::uint64_t>(packets.size()));
  for (const auto& p : packets) {
    if (p.coding_vector.size() != h.M || p.payload.size() != h.T) throw Error("packet does not match the file header");
    auto b = serialize_packet(p, m);
    os.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  }
  if (!os) throw Error("failed writing packet file");
}

inline std::vector<Packet> read_packet_file(std::istream& is, FileHeader& h) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "BATS", 4) != 0) throw Error("not a BATS packet file");
  if (detail::get<std::uint8_t>(is) != file_version) throw Error("unsupported packet file version");
  h.k_prime = detail::get<std::uint32_t>(is);
  h.K = detail::get<std::uint32_t>(is);
  h.M = detail::get<std::uint16_t>(is);
  h.q = detail::get<std::uint16_t>(is);
  h.T = detail::get<std::uint32_t>(is);
  h.seed = detail::get<std::uint64_t>(is);
  auto mode = detail::get<std::uint8_t>(is);
  if (mode > 1) throw Error("unknown precode mode");
  h.precode.mode = static_cast<PrecodeMode>(mode);
  h.precode.rate = std::bit_cast<double>(detail::get<std::uint64_t>(is));
  h.precode.row_weight = static_cast<int>(detail::get<std::uint32_t>(is));
  h.precode.seed = detail::get<std::uint64_t>(is);
  h.precode.validate();
  unsigned m = width_for_size(h.q);
  auto n = detail::get<std::uint64_t>(is);
  std::vector<Packet> out;
  std::vector<std::uint8_t> buf(packet_wire_size(h.M, h.T, m));
  for (std::uint64_t i = 0; i < n; ++i) {
    if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size())))
      throw Error("truncated packet file");
    out.push_back(parse_packet(buf.data(), buf.size(), h.M, h.T, m));
  }
  return out;
}

}  // namespace bats
