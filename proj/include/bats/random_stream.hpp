#pragma once

#include <cstdint>
#include <initializer_list>

namespace bats {

inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

// Domain tags for key derivation.
enum class Domain : std::uint64_t {
  batch = 1,
  precode = 2,
  link = 3,
  recode = 4,
  pnc = 5,
  payload = 6,
  shrink = 7,
  sampler = 8,
  trial = 9,
  decoder = 10,
};

inline std::uint64_t derive_key(Domain tag, std::initializer_list<std::uint64_t> ids) {
  std::uint64_t k = mix64(static_cast<std::uint64_t>(tag) * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL);
  for (std::uint64_t id : ids) k = mix64(k ^ (id + 0x9e3779b97f4a7c15ULL + (k << 6) + (k >> 2)));
  return k;
}

// Counter-based generator: the i-th output depends only on (seed, key, i).
class RandomStream {
 public:
  RandomStream() = default;
  RandomStream(std::uint64_t seed, std::uint64_t key, std::uint64_t counter = 0)
      : base_(mix64(seed ^ mix64(key ^ 0xd1b54a32d192ed03ULL))), seed_(seed), key_(key), counter_(counter) {}
  RandomStream(std::uint64_t seed, Domain tag, std::initializer_list<std::uint64_t> ids)
      : RandomStream(seed, derive_key(tag, ids)) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t next() { return mix64(base_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  // Uniform integer in [0, n), Lemire's multiply-and-reject.
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    std::uint64_t x = next();
    __uint128_t p = static_cast<__uint128_t>(x) * n;
    std::uint64_t lo = static_cast<std::uint64_t>(p);
    if (lo < n) {
      std::uint64_t t = (0 - n) % n;
      while (lo < t) {
        x = next();
        p = static_cast<__uint128_t>(x) * n;
        lo = static_cast<std::uint64_t>(p);
      }
    }
    return static_cast<std::uint64_t>(p >> 64);
  }

  // Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t base_ = 0;
  std::uint64_t seed_ = 0;
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

// Buffered source of m-bit symbols drawn from a stream.
class SymbolSource {
 public:
  SymbolSource(RandomStream& s, unsigned m) : s_(s), m_(m), mask_((1u << m) - 1) {}

  unsigned get() {
    if (bits_ < m_) {
      word_ = s_.next();
      bits_ = 64;
    }
    unsigned v = static_cast<unsigned>(word_) & mask_;
    word_ >>= m_;
    bits_ -= m_;
    return v;
  }

  unsigned nonzero() {
    for (;;) {
      unsigned v = get();
      if (v) return v;
    }
  }

 private:
  RandomStream& s_;
  unsigned m_;
  unsigned mask_;
  std::uint64_t word_ = 0;
  unsigned bits_ = 0;
};

}  // namespace bats
