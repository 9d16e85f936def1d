#pragma once

#include "feasreg/common.hpp"
#include "feasreg/geometry.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace feasreg {

/// Dense LP in the form  max objective.x  s.t.  eq_A x = eq_b,
/// ineq_C x <= ineq_d,  lower <= x <= upper (entries may be +-inf).
struct LinearProgram {
  VecX objective;
  MatX eq_A;
  VecX eq_b;
  MatX ineq_C;
  VecX ineq_d;
  VecX lower;  // empty == all -inf
  VecX upper;  // empty == all +inf

  int num_vars() const { return static_cast<int>(objective.size()); }

  void validate() const {
    const int n = num_vars();
    if (n <= 0) throw DimensionMismatch("LinearProgram: no variables");
    if (eq_A.size() > 0 && eq_A.cols() != n) throw DimensionMismatch("LinearProgram: eq_A columns");
    if (eq_A.rows() != eq_b.size()) throw DimensionMismatch("LinearProgram: eq rows");
    if (ineq_C.size() > 0 && ineq_C.cols() != n)
      throw DimensionMismatch("LinearProgram: ineq_C columns");
    if (ineq_C.rows() != ineq_d.size()) throw DimensionMismatch("LinearProgram: ineq rows");
    if (lower.size() > 0 && lower.size() != n) throw DimensionMismatch("LinearProgram: lower bounds");
    if (upper.size() > 0 && upper.size() != n) throw DimensionMismatch("LinearProgram: upper bounds");
    auto finite = [](const auto& m) {
      for (int i = 0; i < m.size(); ++i)
        if (std::isnan(m(i)) || std::isinf(m(i))) return false;
      return true;
    };
    if (!finite(objective) || !finite(eq_A) || !finite(eq_b) || !finite(ineq_C) || !finite(ineq_d))
      throw DimensionMismatch("LinearProgram: non-finite entry");
  }
};

enum class LPStatus { optimal, infeasible, unbounded };

struct LPSolution {
  LPStatus status = LPStatus::infeasible;
  VecX x;
  double objective_value = 0.0;
  int iterations = 0;
  VecX eq_duals;    // y, one per equality row (free sign)
  VecX ineq_duals;  // lambda, one per ineq_C row (>= 0 at optimum)
};

/// Plain-text debug dump: "max c.x" then "A|b" and "C|d", one row per line.
inline std::string dump_lp(const LinearProgram& lp) {
  std::ostringstream os;
  os << "max";
  for (int j = 0; j < lp.objective.size(); ++j) os << ' ' << lp.objective[j];
  os << '\n';
  for (int i = 0; i < lp.eq_A.rows(); ++i) {
    for (int j = 0; j < lp.eq_A.cols(); ++j) os << lp.eq_A(i, j) << ' ';
    os << "| " << lp.eq_b[i] << '\n';
  }
  for (int i = 0; i < lp.ineq_C.rows(); ++i) {
    for (int j = 0; j < lp.ineq_C.cols(); ++j) os << lp.ineq_C(i, j) << ' ';
    os << "| " << lp.ineq_d[i] << '\n';
  }
  return os.str();
}

namespace detail {

// Two-phase primal simplex on a dense tableau. Variables are split
// x = xp - xm, every inequality (finite bounds included) gets a slack,
// equality rows get artificials. Dantzig pricing with lowest-index
// tie-breaks; Bland's rule engages after 50 consecutive degenerate pivots.
class SimplexTableau {
 public:
  explicit SimplexTableau(const LinearProgram& lp) {
    const int n = lp.num_vars();
    n_orig_ = n;
    std::vector<VecX> raw_rows;
    std::vector<double> raw_rhs;
    num_eq_ = static_cast<int>(lp.eq_A.rows());
    num_ineq_ = static_cast<int>(lp.ineq_C.rows());
    for (int i = 0; i < lp.eq_A.rows(); ++i) {
      raw_rows.push_back(lp.eq_A.row(i).transpose());
      raw_rhs.push_back(lp.eq_b[i]);
    }
    for (int i = 0; i < lp.ineq_C.rows(); ++i) {
      raw_rows.push_back(lp.ineq_C.row(i).transpose());
      raw_rhs.push_back(lp.ineq_d[i]);
    }
    for (int j = 0; j < n; ++j) {
      if (lp.upper.size() > 0 && std::isfinite(lp.upper[j])) {
        VecX r = VecX::Zero(n);
        r[j] = 1.0;
        raw_rows.push_back(r);
        raw_rhs.push_back(lp.upper[j]);
      }
      if (lp.lower.size() > 0 && std::isfinite(lp.lower[j])) {
        VecX r = VecX::Zero(n);
        r[j] = -1.0;
        raw_rows.push_back(r);
        raw_rhs.push_back(-lp.lower[j]);
      }
    }

    const int R = static_cast<int>(raw_rows.size());
    num_struct_ = 2 * n;
    const int num_slack = R - num_eq_;
    cols_ = num_struct_ + num_slack;

    // Column layout: [xp | xm | slacks | artificials].
    int num_art = 0;
    dual_info_.resize(static_cast<std::size_t>(R));
    for (int i = 0; i < R; ++i) {
      const double s = raw_rhs[static_cast<std::size_t>(i)] < 0.0 ? -1.0 : 1.0;
      const bool needs_art = (i < num_eq_) || s < 0.0;
      dual_info_[static_cast<std::size_t>(i)] = {s, i >= num_eq_ ? num_struct_ + (i - num_eq_) : -1,
                                                 needs_art ? cols_ + num_art : -1};
      if (needs_art) ++num_art;
    }
    total_cols_ = cols_ + num_art;

    A_.setZero(R, total_cols_);
    b_.setZero(R);
    basis_.assign(static_cast<std::size_t>(R), -1);
    row_origin_.resize(static_cast<std::size_t>(R));
    for (int i = 0; i < R; ++i) {
      const auto& info = dual_info_[static_cast<std::size_t>(i)];
      A_.block(i, 0, 1, n) = info.sign * raw_rows[static_cast<std::size_t>(i)].transpose();
      A_.block(i, n, 1, n) = -info.sign * raw_rows[static_cast<std::size_t>(i)].transpose();
      if (info.slack_col >= 0) A_(i, info.slack_col) = info.sign;
      if (info.art_col >= 0) A_(i, info.art_col) = 1.0;
      b_[i] = info.sign * raw_rhs[static_cast<std::size_t>(i)];
      basis_[static_cast<std::size_t>(i)] = info.art_col >= 0 ? info.art_col : info.slack_col;
      row_origin_[static_cast<std::size_t>(i)] = i;
    }
  }

  // Returns false when phase 1 proves infeasibility.
  bool phase1(int& iterations) {
    if (rows() == 0) return true;
    VecX c = VecX::Zero(total_cols_);
    for (int j = cols_; j < total_cols_; ++j) c[j] = -1.0;
    if (!run(c, /*allow_artificials=*/true, iterations))
      throw NumericalBreakdown("simplex: phase 1 unbounded");
    double art_level = 0.0;
    for (std::size_t i = 0; i < basis_.size(); ++i)
      if (basis_[i] >= cols_) art_level += b_[static_cast<int>(i)];
    const double feas_tol = tol::lp_feasibility * (1.0 + b_.cwiseAbs().maxCoeff());
    if (art_level > feas_tol) return false;
    drive_out_artificials();
    return true;
  }

  // Returns false on unbounded objective.
  bool phase2(const VecX& objective, int& iterations) {
    VecX c = VecX::Zero(total_cols_);
    c.head(n_orig_) = objective;
    c.segment(n_orig_, n_orig_) = -objective;
    return run(c, /*allow_artificials=*/false, iterations);
  }

  VecX primal() const {
    VecX z = VecX::Zero(total_cols_);
    for (std::size_t i = 0; i < basis_.size(); ++i) z[basis_[i]] = b_[static_cast<int>(i)];
    VecX x(n_orig_);
    for (int j = 0; j < n_orig_; ++j) x[j] = z[j] - z[n_orig_ + j];
    return x;
  }

  // Row duals from the final reduced costs. For a row stored with sign s,
  // the slack column equals s*e_i, so y_i = -z_slack; equality rows use the
  // artificial column (y_i = -s * z_art). Rows dropped as redundant get 0.
  void duals(VecX& eq_duals, VecX& ineq_duals) const {
    eq_duals = VecX::Zero(num_eq_);
    ineq_duals = VecX::Zero(num_ineq_);
    for (std::size_t i = 0; i < row_origin_.size(); ++i) {
      const int orig = row_origin_[i];
      const auto& info = dual_info_[static_cast<std::size_t>(orig)];
      const double y =
          info.slack_col >= 0 ? -z_[info.slack_col] : -info.sign * z_[info.art_col];
      if (orig < num_eq_)
        eq_duals[orig] = y;
      else if (orig - num_eq_ < num_ineq_)
        ineq_duals[orig - num_eq_] = y;
    }
  }

 private:
  static constexpr double kPivotTol = 1e-9;
  static constexpr double kCostTol = 1e-9;

  int rows() const { return static_cast<int>(basis_.size()); }

  void drive_out_artificials() {
    std::vector<int> drop;
    for (int i = 0; i < rows(); ++i) {
      if (basis_[static_cast<std::size_t>(i)] < cols_) continue;
      int enter = -1;
      double best = 1e-7;
      for (int j = 0; j < cols_; ++j) {
        const double a = std::abs(A_(i, j));
        if (a > best) {
          best = a;
          enter = j;
        }
      }
      if (enter >= 0)
        pivot(i, enter);
      else
        drop.push_back(i);  // dependent row, nothing left to pivot on
    }
    if (!drop.empty()) remove_rows(drop);
  }

  void remove_rows(const std::vector<int>& drop) {
    const int R = rows();
    std::vector<int> keep;
    keep.reserve(static_cast<std::size_t>(R));
    for (int i = 0, k = 0; i < R; ++i) {
      if (k < static_cast<int>(drop.size()) && drop[static_cast<std::size_t>(k)] == i) {
        ++k;
        continue;
      }
      keep.push_back(i);
    }
    MatX A2(static_cast<int>(keep.size()), total_cols_);
    VecX b2(static_cast<int>(keep.size()));
    std::vector<int> basis2, origin2;
    for (int i = 0; i < static_cast<int>(keep.size()); ++i) {
      A2.row(i) = A_.row(keep[static_cast<std::size_t>(i)]);
      b2[i] = b_[keep[static_cast<std::size_t>(i)]];
      basis2.push_back(basis_[static_cast<std::size_t>(keep[static_cast<std::size_t>(i)])]);
      origin2.push_back(row_origin_[static_cast<std::size_t>(keep[static_cast<std::size_t>(i)])]);
    }
    A_ = std::move(A2);
    b_ = std::move(b2);
    basis_ = std::move(basis2);
    row_origin_ = std::move(origin2);
  }

  bool run(const VecX& c, bool allow_artificials, int& iterations) {
    const int R = rows();
    z_ = c;
    for (int i = 0; i < R; ++i) {
      const double cb = c[basis_[static_cast<std::size_t>(i)]];
      if (cb != 0.0) z_ -= cb * A_.row(i).transpose();
    }
    int degenerate_streak = 0;
    bool bland = false;
    const int cap = 10 * (R + total_cols_);
    const int scan = allow_artificials ? total_cols_ : cols_;
    for (int it = 0;; ++it) {
      if (it >= cap) throw NumericalBreakdown("simplex: iteration cap exhausted");
      int enter = -1;
      if (bland) {
        for (int j = 0; j < scan; ++j)
          if (z_[j] > kCostTol && !is_basic(j)) {
            enter = j;
            break;
          }
      } else {
        double best = kCostTol;
        for (int j = 0; j < scan; ++j)
          if (z_[j] > best && !is_basic(j)) {
            best = z_[j];
            enter = j;
          }
      }
      if (enter < 0) {
        iterations += it;
        return true;
      }

      int leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (int i = 0; i < R; ++i) {
        const double aij = A_(i, enter);
        if (aij <= kPivotTol) continue;
        const double ratio = b_[i] / aij;
        if (leave < 0 || ratio < best_ratio - 1e-12) {
          best_ratio = ratio;
          leave = i;
        } else if (ratio < best_ratio + 1e-12) {
          const bool take =
              bland ? basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)]
                    : false;  // Dantzig mode keeps the lowest row index
          if (take) {
            best_ratio = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) {
        iterations += it;
        return false;  // improving ray, objective unbounded
      }
      if (best_ratio < 1e-12) {
        if (++degenerate_streak > 50) bland = true;
      } else {
        degenerate_streak = 0;
      }
      pivot(leave, enter);
    }
  }

  bool is_basic(int col) const {
    for (int b : basis_)
      if (b == col) return true;
    return false;
  }

  void pivot(int row, int col) {
    const double piv = A_(row, col);
    A_.row(row) /= piv;
    b_[row] /= piv;
    for (int i = 0; i < A_.rows(); ++i) {
      if (i == row) continue;
      const double f = A_(i, col);
      if (f != 0.0) {
        A_.row(i) -= f * A_.row(row);
        A_(i, col) = 0.0;
        b_[i] -= f * b_[row];
        if (b_[i] < 0.0 && b_[i] > -1e-11) b_[i] = 0.0;
      }
    }
    const double zf = z_[col];
    if (zf != 0.0) {
      z_ -= zf * A_.row(row).transpose();
      z_[col] = 0.0;
    }
    basis_[static_cast<std::size_t>(row)] = col;
  }

  struct RowDualInfo {
    double sign = 1.0;
    int slack_col = -1;
    int art_col = -1;
  };

  MatX A_;
  VecX b_;
  VecX z_;
  std::vector<int> basis_;
  std::vector<int> row_origin_;
  std::vector<RowDualInfo> dual_info_;  // indexed by original row
  int num_eq_ = 0, num_ineq_ = 0, num_struct_ = 0, cols_ = 0, total_cols_ = 0, n_orig_ = 0;
};

}  // namespace detail

/// Deterministic two-phase dense simplex. Identical inputs give identical
/// outputs bit for bit (fixed pivot rules, no randomness). Throws
/// NumericalBreakdown if the 10*(rows+cols) pivot cap is exhausted.
inline LPSolution solve_lp(const LinearProgram& lp) {
  lp.validate();
  detail::SimplexTableau tab(lp);
  LPSolution sol;
  sol.iterations = 0;
  if (!tab.phase1(sol.iterations)) {
    sol.status = LPStatus::infeasible;
    return sol;
  }
  const bool bounded = tab.phase2(lp.objective, sol.iterations);
  sol.x = tab.primal();
  tab.duals(sol.eq_duals, sol.ineq_duals);
  if (!bounded) {
    sol.status = LPStatus::unbounded;
    sol.objective_value = std::numeric_limits<double>::infinity();
    return sol;
  }
  sol.status = LPStatus::optimal;
  sol.objective_value = lp.objective.dot(sol.x);
  return sol;
}

/// Signed margin of c inside the polygon: min_i (b_i - a_i.c) over unit-norm
/// halfspaces. Positive iff strictly inside; equals the radius of the largest
/// inscribed ball centered at c.
inline double chebyshev_margin(const Polygon2& p, const Vec2& c) {
  if (p.halfspaces().empty()) throw EmptySet("chebyshev_margin: polygon has no halfspaces");
  double r = std::numeric_limits<double>::infinity();
  for (const Halfspace2& h : p.halfspaces()) r = std::min(r, h.eval(c));
  return r;
}

/// Chebyshev center: the (center, radius) of the largest inscribed ball,
/// found by the LP  max r  s.t.  a_i.x + r <= b_i.
inline std::pair<Vec2, double> chebyshev_center(const Polygon2& p) {
  const auto& hs = p.halfspaces();
  LinearProgram lp;
  lp.objective = VecX::Zero(3);
  lp.objective[2] = 1.0;
  lp.ineq_C.setZero(static_cast<int>(hs.size()), 3);
  lp.ineq_d.resize(static_cast<int>(hs.size()));
  for (int i = 0; i < static_cast<int>(hs.size()); ++i) {
    lp.ineq_C(i, 0) = hs[static_cast<std::size_t>(i)].a.x();
    lp.ineq_C(i, 1) = hs[static_cast<std::size_t>(i)].a.y();
    lp.ineq_C(i, 2) = 1.0;  // unit normals, so ||a_i|| = 1
    lp.ineq_d[i] = hs[static_cast<std::size_t>(i)].b;
  }
  const LPSolution sol = solve_lp(lp);
  if (sol.status != LPStatus::optimal) throw EmptySet("chebyshev_center: infeasible polygon");
  return {Vec2(sol.x[0], sol.x[1]), sol.x[2]};
}

/// Euclidean projection onto the polygon by exhaustive edge/vertex
/// enumeration; exact in 2D with a handful of edges.
inline Vec2 closest_point_in_polygon(const Polygon2& p, const Vec2& c) {
  if (p.vertices().empty()) throw EmptySet("closest_point_in_polygon: empty polygon");
  if (point_in_polygon(p, c).location != PointLocation::outside) return c;
  const auto& v = p.vertices();
  double best = std::numeric_limits<double>::infinity();
  Vec2 best_x = v.front();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2& a = v[i];
    const Vec2& b = v[(i + 1) % v.size()];
    const Vec2 ab = b - a;
    const double t = std::clamp((c - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    const Vec2 x = a + t * ab;
    const double d = (c - x).squaredNorm();
    if (d < best) {
      best = d;
      best_x = x;
    }
  }
  return best_x;
}

enum class ScalePivot { centroid, chebyshev };

inline Polygon2 scale_polygon(const Polygon2& p, double s, ScalePivot pivot) {
  const Vec2 c = pivot == ScalePivot::centroid ? p.vertex_centroid() : chebyshev_center(p).first;
  return scale_polygon(p, s, c);
}

/// Conic membership x in cone(rays), decided by an LP over nonnegative
/// ray coefficients.
inline bool cone_contains(const PolyhedralCone& cone, const VecX& x, double tolerance = 1e-8) {
  if (cone.rays.empty()) return x.norm() <= tolerance;
  const int d = cone.dimension();
  if (x.size() != d) throw DimensionMismatch("cone_contains: point dimension");
  const int p = static_cast<int>(cone.rays.size());
  LinearProgram lp;
  lp.objective = VecX::Zero(p);
  lp.eq_A.resize(d, p);
  for (int j = 0; j < p; ++j) lp.eq_A.col(j) = cone.rays[static_cast<std::size_t>(j)];
  lp.eq_b = x;
  lp.lower = VecX::Zero(p);
  lp.upper = VecX::Constant(p, std::numeric_limits<double>::infinity());
  return solve_lp(lp).status == LPStatus::optimal;
}

/// Zonotope membership via the coefficient-box feasibility LP.
inline bool zonotope_contains(const Zonotope& z, const VecX& x) {
  const int d = static_cast<int>(z.center.size());
  const int p = static_cast<int>(z.generators.size());
  if (x.size() != d) throw DimensionMismatch("zonotope_contains: point dimension");
  if (p == 0) return (x - z.center).norm() <= 1e-9;
  LinearProgram lp;
  lp.objective = VecX::Zero(p);
  lp.eq_A.resize(d, p);
  for (int j = 0; j < p; ++j) lp.eq_A.col(j) = z.generators[static_cast<std::size_t>(j)];
  lp.eq_b = x - z.center;
  lp.lower = VecX::Constant(p, -1.0);
  lp.upper = VecX::Constant(p, 1.0);
  return solve_lp(lp).status == LPStatus::optimal;
}

/// Removes rays expressible as conic combinations of the remaining ones.
/// Display helper; the ray-union sum itself keeps its redundant rays.
inline PolyhedralCone prune_cone_rays(const PolyhedralCone& cone) {
  PolyhedralCone out = cone;
  std::size_t i = 0;
  while (i < out.rays.size()) {
    PolyhedralCone rest;
    rest.rays.reserve(out.rays.size() - 1);
    for (std::size_t j = 0; j < out.rays.size(); ++j)
      if (j != i) rest.rays.push_back(out.rays[j]);
    if (!rest.rays.empty() && cone_contains(rest, out.rays[i]))
      out.rays.erase(out.rays.begin() + static_cast<std::ptrdiff_t>(i));
    else
      ++i;
  }
  return out;
}

}  // namespace feasreg
