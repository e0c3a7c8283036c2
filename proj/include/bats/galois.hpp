#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace bats {

using Symbol = std::uint8_t;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reduction polynomials, low bits included.
//   m=1: x+1 (degenerate, GF(2) arithmetic is plain AND/XOR)
//   m=2: x^2+x+1
//   m=4: x^4+x+1
//   m=8: x^8+x^4+x^3+x+1
inline unsigned reduction_polynomial(unsigned m) {
  switch (m) {
    case 1: return 0x3;
    case 2: return 0x7;
    case 4: return 0x13;
    case 8: return 0x11B;
  }
  throw Error("unsupported field width m=" + std::to_string(m));
}

// Carry-less multiply with reduction, bit by bit.
inline unsigned poly_mul(unsigned a, unsigned b, unsigned m) {
  unsigned poly = reduction_polynomial(m);
  unsigned r = 0;
  while (b) {
    if (b & 1) r ^= a;
    b >>= 1;
    a <<= 1;
    if (a & (1u << m)) a ^= poly;
  }
  return r;
}

// GF(2^m) with full multiplication and inverse tables.
class GaloisField {
 public:
  explicit GaloisField(unsigned m) : m_(m), q_(1u << m), mul_(q_ * q_), inv_(q_, 0) {
    reduction_polynomial(m);
    for (unsigned a = 0; a < q_; ++a)
      for (unsigned b = 0; b < q_; ++b) mul_[a * q_ + b] = static_cast<Symbol>(poly_mul(a, b, m));
    for (unsigned a = 1; a < q_; ++a)
      for (unsigned b = 1; b < q_; ++b)
        if (mul_[a * q_ + b] == 1) inv_[a] = static_cast<Symbol>(b);
  }

  unsigned m() const { return m_; }
  unsigned q() const { return q_; }

  Symbol add(Symbol a, Symbol b) const { return a ^ b; }
  Symbol sub(Symbol a, Symbol b) const { return a ^ b; }
  Symbol mul(Symbol a, Symbol b) const { return mul_[a * q_ + b]; }
  Symbol inv(Symbol a) const {
    if (a == 0) throw Error("inverse of zero");
    return inv_[a];
  }
  Symbol div(Symbol a, Symbol b) const { return mul(a, inv(b)); }

  // Row of the multiplication table for a fixed left factor.
  const Symbol* mul_row(Symbol c) const { return &mul_[c * q_]; }

  // dst[i] += c * src[i]
  void axpy(Symbol* dst, const Symbol* src, Symbol c, std::size_t n) const {
    if (c == 0) return;
    if (c == 1) {
      for (std::size_t i = 0; i < n; ++i) dst[i] ^= src[i];
      return;
    }
    const Symbol* t = mul_row(c);
    for (std::size_t i = 0; i < n; ++i) dst[i] ^= t[src[i]];
  }

  void scale(Symbol* v, Symbol c, std::size_t n) const {
    const Symbol* t = mul_row(c);
    for (std::size_t i = 0; i < n; ++i) v[i] = t[v[i]];
  }

 private:
  unsigned m_;
  unsigned q_;
  std::vector<Symbol> mul_;
  std::vector<Symbol> inv_;
};

// Shared immutable instance for each supported width.
inline const GaloisField& field(unsigned m) {
  static const GaloisField f1(1), f2(2), f4(4), f8(8);
  switch (m) {
    case 1: return f1;
    case 2: return f2;
    case 4: return f4;
    case 8: return f8;
  }
  throw Error("unsupported field width m=" + std::to_string(m));
}

inline unsigned width_for_size(unsigned q) {
  switch (q) {
    case 2: return 1;
    case 4: return 2;
    case 16: return 4;
    case 256: return 8;
  }
  throw Error("unsupported field size q=" + std::to_string(q));
}

inline const GaloisField& field_of_size(unsigned q) { return field(width_for_size(q)); }

}  // namespace bats
