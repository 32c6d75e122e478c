#include "conspec/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "conspec/error.hpp"
#include "conspec/simd.hpp"

namespace conspec {

std::string_view to_string(LpStatus s) {
  return s == LpStatus::Optimal ? "Optimal" : "Infeasible";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Tableau rows hold B^-1 [A | b]; every row is an equality whose basic
// column is a unit vector. Nonbasic variables sit at a bound, or at zero
// when free.
class Simplex {
 public:
  Simplex(const LinearProgram& lp, const LpOptions& o) : lp_(lp), opt_(o) {}

  LpResult solve() {
    validate();
    const std::size_t n = lp_.num_vars();
    for (std::size_t j = 0; j < n; ++j) {
      if (lp_.lower[j] > lp_.upper[j]) return infeasible();
    }
    setup();

    if (num_art_ > 0) {
      Vector cost(width_ - 1, 0.0);
      for (std::size_t k = 0; k < num_art_; ++k) cost[n + m_ + k] = -1.0;
      run(cost);
      recompute_basics();
      double residual = 0;
      for (std::size_t k = 0; k < num_art_; ++k) residual += val_[n + m_ + k];
      if (residual > 1e-9 * (1.0 + initial_infeasibility_)) return infeasible();
      for (std::size_t k = 0; k < num_art_; ++k) hi_[n + m_ + k] = 0.0;
    }

    Vector cost(width_ - 1, 0.0);
    std::copy(lp_.objective.begin(), lp_.objective.end(), cost.begin());
    run(cost);
    recompute_basics();

    LpResult res;
    res.status = LpStatus::Optimal;
    res.iterations = iterations_;
    res.point.assign(val_.begin(), val_.begin() + static_cast<std::ptrdiff_t>(n));
    for (std::size_t j = 0; j < n; ++j) res.point[j] = std::clamp(res.point[j], lp_.lower[j], lp_.upper[j]);
    res.value = simd::dot(lp_.objective, res.point);
    return res;
  }

 private:
  void validate() const {
    const std::size_t n = lp_.num_vars();
    if (lp_.upper.size() != n || lp_.objective.size() != n) {
      throw Error(ErrorKind::DimMismatch, "LP bounds and objective sizes differ");
    }
    if (!all_finite(lp_.objective)) throw Error(ErrorKind::InvalidArgument, "non-finite LP objective");
    for (std::size_t j = 0; j < n; ++j) {
      if (std::isnan(lp_.lower[j]) || std::isnan(lp_.upper[j])) {
        throw Error(ErrorKind::InvalidArgument, "NaN LP bound");
      }
    }
    for (const auto& c : lp_.constraints) {
      if (c.coeffs.size() != n) throw Error(ErrorKind::DimMismatch, "LP constraint width differs from variable count");
      if (!all_finite(c.coeffs) || !std::isfinite(c.rhs)) {
        throw Error(ErrorKind::InvalidArgument, "non-finite LP constraint");
      }
    }
  }

  LpResult infeasible() const {
    LpResult res;
    res.status = LpStatus::Infeasible;
    res.iterations = iterations_;
    return res;
  }

  void setup() {
    const std::size_t n = lp_.num_vars();
    m_ = lp_.constraints.size();

    Vector x0(n);
    for (std::size_t j = 0; j < n; ++j) {
      x0[j] = std::isfinite(lp_.lower[j]) ? lp_.lower[j] : std::isfinite(lp_.upper[j]) ? lp_.upper[j] : 0.0;
    }
    Vector resid(m_);
    num_art_ = 0;
    for (std::size_t i = 0; i < m_; ++i) {
      resid[i] = simd::dot(lp_.constraints[i].coeffs, x0) - lp_.constraints[i].rhs;
      if (resid[i] < 0) ++num_art_;
    }

    const std::size_t cols = n + m_ + num_art_;
    width_ = cols + 1;
    tab_ = Matrix(m_, width_);
    lo_.assign(cols, 0.0);
    hi_.assign(cols, kInf);
    val_.assign(cols, 0.0);
    basic_.assign(cols, false);
    basis_.assign(m_, 0);
    for (std::size_t j = 0; j < n; ++j) {
      lo_[j] = lp_.lower[j];
      hi_[j] = lp_.upper[j];
      val_[j] = x0[j];
    }

    initial_infeasibility_ = 0;
    std::size_t art = n + m_;
    for (std::size_t i = 0; i < m_; ++i) {
      auto row = tab_.row(i);
      const auto& c = lp_.constraints[i];
      if (resid[i] >= 0) {
        // -a.x + s = -b with the slack basic
        for (std::size_t j = 0; j < n; ++j) row[j] = -c.coeffs[j];
        row[n + i] = 1.0;
        row[cols] = -c.rhs;
        basis_[i] = n + i;
        val_[n + i] = resid[i];
      } else {
        // a.x - s + t = b with the artificial t basic
        for (std::size_t j = 0; j < n; ++j) row[j] = c.coeffs[j];
        row[n + i] = -1.0;
        row[art] = 1.0;
        row[cols] = c.rhs;
        basis_[i] = art;
        val_[art] = -resid[i];
        initial_infeasibility_ += -resid[i];
        ++art;
      }
      basic_[basis_[i]] = true;
    }
  }

  void run(const Vector& cost) {
    const std::size_t cols = width_ - 1;
    Vector z(width_, 0.0);
    std::copy(cost.begin(), cost.end(), z.begin());
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = cost[basis_[i]];
      if (cb != 0) simd::axpy(-cb, tab_.row(i), z);
    }

    const double tol = opt_.pivot_tolerance;
    for (;;) {
      std::size_t enter = cols;
      for (std::size_t j = 0; j < cols; ++j) {
        if (basic_[j]) continue;
        if ((z[j] > tol && val_[j] < hi_[j]) || (z[j] < -tol && val_[j] > lo_[j])) {
          enter = j;
          break;
        }
      }
      if (enter == cols) return;
      if (++iterations_ > opt_.max_iterations) {
        throw Error(ErrorKind::NumericalBreakdown,
                    "simplex exceeded " + std::to_string(opt_.max_iterations) + " iterations");
      }

      const double sigma = z[enter] > 0 ? 1.0 : -1.0;
      double theta = sigma > 0 ? hi_[enter] - val_[enter] : val_[enter] - lo_[enter];
      std::size_t leave = m_;
      bool leave_to_upper = false;
      for (std::size_t i = 0; i < m_; ++i) {
        const double t = tab_(i, enter);
        if (std::abs(t) <= tol) continue;
        const double rate = -sigma * t;
        const std::size_t b = basis_[i];
        double limit = kInf;
        bool to_upper = false;
        if (rate < 0 && std::isfinite(lo_[b])) {
          limit = std::max(0.0, val_[b] - lo_[b]) / -rate;
        } else if (rate > 0 && std::isfinite(hi_[b])) {
          limit = std::max(0.0, hi_[b] - val_[b]) / rate;
          to_upper = true;
        }
        if (limit < theta || (limit == theta && leave < m_ && b < basis_[leave])) {
          theta = limit;
          leave = i;
          leave_to_upper = to_upper;
        }
      }
      if (!std::isfinite(theta)) {
        throw Error(ErrorKind::NumericalBreakdown, "improving column " + std::to_string(enter) + " has no usable pivot");
      }

      val_[enter] += sigma * theta;
      for (std::size_t i = 0; i < m_; ++i) val_[basis_[i]] -= sigma * theta * tab_(i, enter);
      if (leave == m_) {
        val_[enter] = sigma > 0 ? hi_[enter] : lo_[enter];
        continue;
      }
      const std::size_t out = basis_[leave];
      val_[out] = leave_to_upper ? hi_[out] : lo_[out];
      pivot(leave, enter, z);
      basic_[out] = false;
      basic_[enter] = true;
      basis_[leave] = enter;
    }
  }

  void pivot(std::size_t r, std::size_t j, Vector& z) {
    auto prow = tab_.row(r);
    const double inv = 1.0 / prow[j];
    for (double& v : prow) v *= inv;
    prow[j] = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      const double f = tab_(i, j);
      if (f == 0) continue;
      simd::axpy(-f, prow, tab_.row(i));
      tab_(i, j) = 0.0;
    }
    const double f = z[j];
    if (f != 0) simd::axpy(-f, prow, z);
    z[j] = 0.0;
  }

  void recompute_basics() {
    const std::size_t cols = width_ - 1;
    for (std::size_t i = 0; i < m_; ++i) {
      double v = tab_(i, cols);
      for (std::size_t j = 0; j < cols; ++j) {
        if (!basic_[j] && tab_(i, j) != 0) v -= tab_(i, j) * val_[j];
      }
      val_[basis_[i]] = v;
    }
  }

  const LinearProgram& lp_;
  const LpOptions& opt_;
  std::size_t m_ = 0;
  std::size_t num_art_ = 0;
  std::size_t width_ = 0;
  Matrix tab_;
  Vector lo_, hi_, val_;
  std::vector<bool> basic_;
  std::vector<std::size_t> basis_;
  std::size_t iterations_ = 0;
  double initial_infeasibility_ = 0;
};

}  // namespace

LpResult solve_lp_max(const LinearProgram& lp, const LpOptions& options) {
  return Simplex(lp, options).solve();
}

}  // namespace conspec
