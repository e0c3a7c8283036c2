#include <gtest/gtest.h>

#include <bats/matrix.hpp>

#include <cmath>
#include <set>

using namespace bats;

namespace {

// Reference multiply: schoolbook polynomial product, then long division.
unsigned ref_mul(unsigned a, unsigned b, unsigned m, unsigned poly) {
  unsigned p = 0;
  for (unsigned i = 0; i < m; ++i)
    if (b >> i & 1) p ^= a << i;
  for (int bit = 2 * m - 2; bit >= static_cast<int>(m); --bit)
    if (p >> bit & 1) p ^= poly << (bit - m);
  return p;
}

}  // namespace

TEST(Field, SmallFieldsMatchPolynomialArithmetic) {
  for (unsigned m : {1u, 2u, 4u}) {
    const auto& F = field(m);
    for (unsigned a = 0; a < F.q(); ++a)
      for (unsigned b = 0; b < F.q(); ++b) {
        EXPECT_EQ(F.mul(a, b), ref_mul(a, b, m, reduction_polynomial(m))) << m << " " << a << " " << b;
        EXPECT_EQ(F.add(a, b), a ^ b);
      }
  }
}

TEST(Field, Gf256MatchesPolynomialArithmetic) {
  const auto& F = field(8);
  for (unsigned a = 0; a < 256; ++a)
    for (unsigned b = 0; b < 256; ++b) ASSERT_EQ(F.mul(a, b), ref_mul(a, b, 8, 0x11B));
  // AES test vector: {57} x {83} = {c1}
  EXPECT_EQ(F.mul(0x57, 0x83), 0xC1);
}

TEST(Field, InversesExhaustive) {
  for (unsigned m : {1u, 2u, 4u, 8u}) {
    const auto& F = field(m);
    for (unsigned x = 1; x < F.q(); ++x) {
      EXPECT_EQ(F.mul(x, F.inv(x)), 1);
      EXPECT_EQ(F.div(x, x), 1);
    }
  }
}

TEST(Field, Identities) {
  const auto& F = field(8);
  for (unsigned x = 0; x < 256; ++x) {
    EXPECT_EQ(F.add(x, x), 0);
    EXPECT_EQ(F.mul(1, x), x);
  }
  EXPECT_THROW(F.inv(0), Error);
  EXPECT_THROW(F.div(3, 0), Error);
  EXPECT_THROW(field(3), Error);
}

TEST(Field, Distributivity) {
  const auto& F = field(4);
  for (unsigned a = 0; a < 16; ++a)
    for (unsigned b = 0; b < 16; ++b)
      for (unsigned c = 0; c < 16; ++c) {
        EXPECT_EQ(F.mul(a, F.add(b, c)), F.add(F.mul(a, b), F.mul(a, c)));
        EXPECT_EQ(F.mul(a, F.mul(b, c)), F.mul(F.mul(a, b), c));
      }
}

TEST(Rank, IdentityAndZero) {
  const auto& F = field(8);
  EXPECT_EQ(rank(F, Matrix::identity(7)), 7u);
  EXPECT_EQ(rank(F, Matrix(5, 4)), 0u);
  EXPECT_EQ(rank(F, Matrix(0, 4)), 0u);
}

TEST(Rank, AllTwoByTwoOverGf2) {
  const auto& F = field(1);
  int full = 0;
  for (unsigned bits = 0; bits < 16; ++bits) {
    Matrix A(2, 2, {Symbol(bits & 1), Symbol(bits >> 1 & 1), Symbol(bits >> 2 & 1), Symbol(bits >> 3 & 1)});
    if (rank(F, A) == 2) ++full;
  }
  EXPECT_EQ(full, 6);
}

TEST(Rank, ProductBound) {
  const auto& F = field(2);
  RandomStream s(1, 2);
  for (int t = 0; t < 300; ++t) {
    std::size_t r = 1 + s.below(5), k = 1 + s.below(5), c = 1 + s.below(5);
    Matrix A = random_matrix(F, r, k, s), B = random_matrix(F, k, c, s);
    auto ra = rank(F, A), rb = rank(F, B), rab = rank(F, multiply(F, A, B));
    EXPECT_LE(rab, std::min(ra, rb));
    EXPECT_LE(ra, std::min(r, k));
  }
}

TEST(Solve, IdentityReturnsY) {
  const auto& F = field(8);
  RandomStream s(3, 4);
  Matrix Y = random_matrix(F, 6, 5, s);
  EXPECT_EQ(solve(F, Matrix::identity(5), Y), Y);
}

TEST(Solve, RoundTrip) {
  for (unsigned m : {1u, 2u, 4u, 8u}) {
    const auto& F = field(m);
    RandomStream s(5, m);
    int done = 0;
    while (done < 100) {
      std::size_t d = 1 + s.below(6), c = d + s.below(4), T = 1 + s.below(5);
      Matrix A = random_matrix(F, d, c, s);
      if (rank(F, A) != d) continue;
      Matrix B = random_matrix(F, T, d, s);
      EXPECT_EQ(solve(F, A, multiply(F, B, A)), B);
      ++done;
    }
  }
}

TEST(Solve, ScalarCase) {
  const auto& F = field(8);
  Matrix A(1, 2, {0x53, 0});
  Matrix Y(3, 2, {7, 0, 9, 0, 200, 0});
  Matrix B = solve(F, A, Y);
  for (std::size_t t = 0; t < 3; ++t) EXPECT_EQ(B(t, 0), F.mul(Y(t, 0), F.inv(0x53)));
}

TEST(Solve, RankDeficientThrows) {
  const auto& F = field(8);
  Matrix A(2, 3, {1, 2, 3, 2, 4, 6});
  A(1, 0) = F.mul(2, 1), A(1, 1) = F.mul(2, 2), A(1, 2) = F.mul(2, 3);
  EXPECT_THROW(solve(F, A, Matrix(1, 3)), Error);
}

TEST(RandomMatrix, Deterministic) {
  const auto& F = field(8);
  RandomStream a(11, 22, 5), b(11, 22, 5);
  EXPECT_EQ(random_matrix(F, 9, 7, a), random_matrix(F, 9, 7, b));
  RandomStream c(11, 23, 5);
  RandomStream d(11, 22, 5);
  EXPECT_FALSE(random_matrix(F, 9, 7, c) == random_matrix(F, 9, 7, d));
}

TEST(RandomMatrix, FullRankFrequencyGf2) {
  const auto& F = field(1);
  RandomStream s(7, 8);
  int full = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i)
    if (rank(F, random_matrix(F, 2, 2, s)) == 2) ++full;
  EXPECT_NEAR(static_cast<double>(full) / n, 0.375, 0.01);
}

TEST(RandomMatrix, Gf256SymbolsUniform) {
  const auto& F = field(8);
  RandomStream s(9, 10);
  std::vector<double> count(256, 0);
  Matrix A = random_matrix(F, 1000, 1000, s);
  for (Symbol v : A.data()) count[v] += 1;
  double expect = 1e6 / 256, chi = 0;
  for (double c : count) chi += (c - expect) * (c - expect) / expect;
  // 99% band of chi-square with 255 degrees of freedom.
  EXPECT_GT(chi, 200.59);
  EXPECT_LT(chi, 316.92);
}

TEST(RandomStream, BelowIsUniform) {
  RandomStream s(1, 1);
  std::vector<int> c(7, 0);
  for (int i = 0; i < 70000; ++i) ++c[s.below(7)];
  for (int v : c) EXPECT_NEAR(v, 10000, 500);
  for (int i = 0; i < 1000; ++i) {
    double u = s.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(RandomStream, CounterAddressable) {
  RandomStream a(5, 6);
  for (int i = 0; i < 10; ++i) a.next();
  RandomStream b(5, 6, 10);
  EXPECT_EQ(a.next(), b.next());
}
