#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "galois.hpp"

namespace bats {

enum class LPStatus { optimal, infeasible, unbounded };

inline const char* to_string(LPStatus s) {
  switch (s) {
    case LPStatus::optimal: return "optimal";
    case LPStatus::infeasible: return "infeasible";
    case LPStatus::unbounded: return "unbounded";
  }
  return "?";
}

enum class Sense { le, ge, eq };

struct LPConstraint {
  std::vector<double> a;
  Sense sense = Sense::le;
  double b = 0;
};

// maximize c.x subject to the constraints and x >= 0.
struct LinearProgram {
  std::size_t n = 0;
  std::vector<double> c;
  std::vector<LPConstraint> rows;

  explicit LinearProgram(std::size_t vars = 0) : n(vars), c(vars, 0.0) {}
  void add(std::vector<double> a, Sense s, double b) { rows.push_back({std::move(a), s, b}); }
};

struct LPSolution {
  LPStatus status = LPStatus::infeasible;
  double objective = 0;
  std::vector<double> x;
  std::size_t pivots = 0;
};

// Largest violation of the constraints (and of x >= 0) at x.
inline double lp_violation(const LinearProgram& lp, const std::vector<double>& x) {
  double v = 0;
  for (double xi : x) v = std::max(v, -xi);
  for (const auto& r : lp.rows) {
    double s = 0;
    for (std::size_t j = 0; j < lp.n; ++j) s += r.a[j] * x[j];
    double d = r.sense == Sense::le ? s - r.b : r.sense == Sense::ge ? r.b - s : std::abs(s - r.b);
    v = std::max(v, d);
  }
  return v;
}

namespace detail {

class Tableau {
 public:
  Tableau(std::size_t m, std::size_t cols) : m_(m), w_(cols + 1), t_((m + 1) * (cols + 1), 0.0), basis_(m) {}

  double& at(std::size_t r, std::size_t c) { return t_[r * w_ + c]; }
  double* row(std::size_t r) { return t_.data() + r * w_; }
  double& rhs(std::size_t r) { return t_[r * w_ + w_ - 1]; }
  std::size_t cols() const { return w_ - 1; }
  std::size_t rows() const { return m_; }
  std::vector<std::size_t>& basis() { return basis_; }

  // Objective row lives at index m_ and holds reduced costs of a minimization.
  void pivot(std::size_t r, std::size_t c) {
    double* pr = row(r);
    double inv = 1.0 / pr[c];
    for (std::size_t j = 0; j < w_; ++j) pr[j] *= inv;
    pr[c] = 1.0;
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r) continue;
      double* ri = row(i);
      double f = ri[c];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < w_; ++j)
        if (pr[j] != 0.0) ri[j] -= f * pr[j];
      ri[c] = 0.0;
    }
    basis_[r] = c;
  }

  // Returns false when unbounded. `allowed` masks entering columns.
  bool optimize(const std::vector<char>& allowed, std::size_t& pivots) {
    const double eps = 1e-9;
    std::size_t degenerate = 0;
    for (;;) {
      double* obj = row(m_);
      bool bland = degenerate > 50;
      std::size_t enter = cols();
      double best = -eps;
      for (std::size_t j = 0; j < cols(); ++j) {
        if (!allowed[j] || obj[j] >= -eps) continue;
        if (bland) {
          enter = j;
          break;
        }
        if (obj[j] < best) best = obj[j], enter = j;
      }
      if (enter == cols()) return true;
      std::size_t leave = m_;
      double ratio = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m_; ++i) {
        double a = at(i, enter);
        if (a <= eps) continue;
        double q = rhs(i) / a;
        if (q < ratio - 1e-12 ||
            (q <= ratio + 1e-12 && leave < m_ &&
             (bland ? basis_[i] < basis_[leave] : a > at(leave, enter)))) {
          ratio = q;
          leave = i;
        }
      }
      if (leave == m_) return false;
      degenerate = ratio < 1e-12 ? degenerate + 1 : 0;
      pivot(leave, enter);
      ++pivots;
    }
  }

 private:
  std::size_t m_, w_;
  std::vector<double> t_;
  std::vector<std::size_t> basis_;
};

}  // namespace detail

// Two-phase dense tableau simplex.
inline LPSolution solve_lp(const LinearProgram& lp) {
  const std::size_t n = lp.n, m = lp.rows.size();
  std::size_t nslack = 0, nart = 0;
  std::vector<double> sign(m, 1.0);
  std::vector<Sense> sense(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (lp.rows[i].a.size() != n) throw Error("constraint width does not match variable count");
    sense[i] = lp.rows[i].sense;
    if (lp.rows[i].b < 0 || (lp.rows[i].b == 0 && sense[i] == Sense::ge)) {
      sign[i] = -1.0;
      if (sense[i] == Sense::le) sense[i] = Sense::ge;
      else if (sense[i] == Sense::ge) sense[i] = Sense::le;
    }
    if (sense[i] != Sense::eq) ++nslack;
    if (sense[i] != Sense::le) ++nart;
  }
  const std::size_t art0 = n + nslack, total = n + nslack + nart;
  detail::Tableau T(m, total);
  std::size_t s = n, a = art0;
  std::vector<char> is_art(total, 0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) T.at(i, j) = sign[i] * lp.rows[i].a[j];
    T.rhs(i) = sign[i] * lp.rows[i].b;
    if (sense[i] == Sense::le) {
      T.at(i, s) = 1.0;
      T.basis()[i] = s++;
    } else {
      if (sense[i] == Sense::ge) T.at(i, s++) = -1.0;
      T.at(i, a) = 1.0;
      is_art[a] = 1;
      T.basis()[i] = a++;
    }
  }
  LPSolution sol;
  std::vector<char> allowed(total, 1);
  if (nart) {
    // Phase 1: minimize the sum of artificials.
    double* obj = T.row(m);
    for (std::size_t j = art0; j < total; ++j) obj[j] = 1.0;
    for (std::size_t i = 0; i < m; ++i)
      if (is_art[T.basis()[i]]) {
        double* r = T.row(i);
        for (std::size_t j = 0; j <= total; ++j) obj[j] -= r[j];
      }
    T.optimize(allowed, sol.pivots);
    double infeas = -T.rhs(m);
    double scale = 1.0;
    for (std::size_t i = 0; i < m; ++i) scale = std::max(scale, std::abs(lp.rows[i].b));
    if (infeas > 1e-8 * scale) {
      sol.status = LPStatus::infeasible;
      return sol;
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (!is_art[T.basis()[i]]) continue;
      std::size_t best = total;
      double mag = 1e-9;
      for (std::size_t j = 0; j < art0; ++j)
        if (std::abs(T.at(i, j)) > mag) mag = std::abs(T.at(i, j)), best = j;
      if (best < total) T.pivot(i, best), ++sol.pivots;
    }
    for (std::size_t j = art0; j < total; ++j) allowed[j] = 0;
  }
  // Phase 2: minimize -c.x.
  double* obj = T.row(m);
  std::fill(obj, obj + total + 1, 0.0);
  for (std::size_t j = 0; j < n; ++j) obj[j] = -lp.c[j];
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t b = T.basis()[i];
    double f = obj[b];
    if (f == 0.0) continue;
    double* r = T.row(i);
    for (std::size_t j = 0; j <= total; ++j) obj[j] -= f * r[j];
  }
  if (!T.optimize(allowed, sol.pivots)) {
    sol.status = LPStatus::unbounded;
    return sol;
  }
  sol.status = LPStatus::optimal;
  sol.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (T.basis()[i] < n) sol.x[T.basis()[i]] = std::max(0.0, T.rhs(i));
  sol.objective = 0;
  for (std::size_t j = 0; j < n; ++j) sol.objective += lp.c[j] * sol.x[j];
  return sol;
}

}  // namespace bats
