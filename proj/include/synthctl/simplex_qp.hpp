#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "synthctl/error.hpp"

namespace synthctl {

/// Least squares over the probability simplex:
///
///   min_{w >= 0, sum w = 1, c}  sum_r d_r (target_r - c - design_r . w)^2 + ridge * |w|^2
///
/// where the intercept c is present only when `intercept` is set (and is then
/// profiled out by weighted centering).
struct SimplexQp {
  Eigen::MatrixXd design;       // m x n, one column per atom
  Eigen::VectorXd target;       // m
  Eigen::VectorXd row_weights;  // m, empty means all ones
  double ridge = 0.0;
  bool intercept = false;
};

struct SimplexQpOptions {
  int max_iterations = 10000;
  /// Stop once the Frank-Wolfe duality gap falls below this, relative to max(1, f(w0)).
  double gap_tolerance = 1e-15;
  /// Stop when 100 iterations improve the objective by less than this fraction.
  double improvement_tolerance = 1e-12;
  /// Re-solve exactly on the active face whenever the support settles.
  bool polish = true;
};

struct SimplexQpResult {
  Eigen::VectorXd weights;
  double objective = 0.0;
  double intercept = 0.0;
  double gap = 0.0;
  int iterations = 0;
  bool converged = false;
  /// The active face has a singular Hessian, so the minimizer may not be unique.
  bool degenerate = false;
};

namespace detail {

struct PreparedQp {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  Eigen::VectorXd a_mean;  // weighted column means removed when centering
  double b_mean = 0.0;
};

inline PreparedQp prepare(const SimplexQp& qp) {
  const Eigen::Index m = qp.design.rows();
  if (qp.target.size() != m) throw DomainError("simplex QP: target length does not match design rows");
  if (qp.design.cols() < 1) throw DomainError("simplex QP: no atoms");
  if (qp.row_weights.size() != 0 && qp.row_weights.size() != m)
    throw DomainError("simplex QP: row weight length does not match design rows");
  if (qp.ridge < 0.0) throw DomainError("simplex QP: negative ridge");
  PreparedQp p;
  Eigen::VectorXd d = qp.row_weights.size() ? qp.row_weights : Eigen::VectorXd::Ones(m);
  if (d.size() > 0 && d.minCoeff() < 0.0) throw DomainError("simplex QP: negative row weight");
  p.a = qp.design;
  p.b = qp.target;
  p.a_mean = Eigen::VectorXd::Zero(qp.design.cols());
  if (qp.intercept && m > 0) {
    const double dsum = d.sum();
    if (dsum > 0.0) {
      p.a_mean = (qp.design.transpose() * d) / dsum;
      p.b_mean = d.dot(qp.target) / dsum;
      p.a.rowwise() -= p.a_mean.transpose();
      p.b.array() -= p.b_mean;
    }
  }
  const Eigen::VectorXd sd = d.cwiseSqrt();
  p.a = sd.asDiagonal() * p.a;
  p.b = sd.cwiseProduct(p.b);
  return p;
}

/// Minimizer on the affine hull of the atoms in `support` (may leave the simplex),
/// choosing the one closest to `current` when it is not unique.
inline Eigen::VectorXd solve_on_face_unclipped(const PreparedQp& p, double ridge,
                                               const std::vector<Eigen::Index>& support,
                                               const Eigen::VectorXd& current, bool& singular) {
  const auto k = static_cast<Eigen::Index>(support.size());
  const Eigen::Index n = p.a.cols();
  singular = false;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  if (k == 1) {
    u[support[0]] = 1.0;
    return u;
  }
  // u_S = e_last + N z, N = [e_i - e_last]
  const Eigen::Index last = support.back();
  const Eigen::Index m = p.a.rows();
  const Eigen::Index rows = m + (ridge > 0.0 ? k : 0);
  Eigen::MatrixXd bz(rows, k - 1);
  Eigen::VectorXd rhs(rows);
  bz.topRows(m).setZero();
  for (Eigen::Index i = 0; i + 1 < k; ++i) bz.col(i).head(m) = p.a.col(support[static_cast<std::size_t>(i)]) - p.a.col(last);
  rhs.head(m) = p.b - p.a.col(last);
  if (ridge > 0.0) {
    const double s = std::sqrt(ridge);
    bz.bottomRows(k).setZero();
    for (Eigen::Index i = 0; i + 1 < k; ++i) {
      bz(m + i, i) = s;
      bz(m + k - 1, i) = -s;
    }
    rhs.tail(k).setZero();
    rhs[m + k - 1] = -s;
  }
  Eigen::VectorXd z0(k - 1);
  for (Eigen::Index i = 0; i + 1 < k; ++i) z0[i] = current[support[static_cast<std::size_t>(i)]];
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(bz);
  singular = cod.rank() < k - 1;
  const Eigen::VectorXd z = z0 + cod.solve(rhs - bz * z0);
  double rest = 1.0;
  for (Eigen::Index i = 0; i + 1 < k; ++i) {
    u[support[static_cast<std::size_t>(i)]] = z[i];
    rest -= z[i];
  }
  u[last] = rest;
  return u;
}

/// Move from `w` toward the minimizer on its support face, dropping atoms that reach
/// zero on the way, until the face minimizer is feasible. The objective never increases.
inline Eigen::VectorXd polish_on_faces(const PreparedQp& p, double ridge, Eigen::VectorXd w, bool& singular) {
  singular = false;
  for (Eigen::Index round = 0; round <= w.size(); ++round) {
    std::vector<Eigen::Index> support;
    for (Eigen::Index i = 0; i < w.size(); ++i)
      if (w[i] > 0.0) support.push_back(i);
    if (support.empty()) break;
    bool face_singular = false;
    Eigen::VectorXd u = solve_on_face_unclipped(p, ridge, support, w, face_singular);
    singular = face_singular;
    if (!u.allFinite()) break;
    double alpha = 1.0;
    Eigen::Index hit = -1;
    for (auto i : support)
      if (u[i] < 0.0) {
        const double a = w[i] / (w[i] - u[i]);
        if (a < alpha) {
          alpha = a;
          hit = i;
        }
      }
    w += alpha * (u - w);
    if (hit < 0) break;
    w[hit] = 0.0;
    w = w.cwiseMax(0.0);
    w /= w.sum();
  }
  return w;
}

}  // namespace detail

/// Away-step conditional gradient (simplex vertices as atoms, exact line search)
/// with exact re-solves on the active face.
inline SimplexQpResult solve_simplex_qp(const SimplexQp& qp, const SimplexQpOptions& opts = {},
                                        const Eigen::VectorXd* warm_start = nullptr) {
  const detail::PreparedQp p = detail::prepare(qp);
  const Eigen::Index n = p.a.cols();
  const double ridge = qp.ridge;

  Eigen::VectorXd w;
  if (warm_start && warm_start->size() == n && warm_start->minCoeff() >= 0.0 &&
      std::abs(warm_start->sum() - 1.0) < 1e-9) {
    w = *warm_start / warm_start->sum();
  } else {
    w = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  }

  auto objective_of = [&](const Eigen::VectorXd& r, const Eigen::VectorXd& x) {
    return r.squaredNorm() + ridge * x.squaredNorm();
  };
  Eigen::VectorXd r = p.b - p.a * w;
  double f = objective_of(r, w);
  const double tol = opts.gap_tolerance * std::max(1.0, f);

  SimplexQpResult res;
  std::vector<Eigen::Index> polished_support;
  double f_window_start = f;
  Eigen::VectorXd g(n);
  Eigen::VectorXd ad(p.a.rows());
  int it = 0;
  double gap = std::numeric_limits<double>::infinity();

  auto support_of = [&](const Eigen::VectorXd& x) {
    std::vector<Eigen::Index> s;
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (x[i] > 0.0) s.push_back(i);
    return s;
  };

  for (; it < opts.max_iterations; ++it) {
    g.noalias() = -2.0 * (p.a.transpose() * r);
    if (ridge > 0.0) g += 2.0 * ridge * w;
    Eigen::Index s = 0;
    g.minCoeff(&s);
    const double gw = g.dot(w);
    gap = gw - g[s];
    if (gap <= tol) {
      res.converged = true;
      break;
    }
    Eigen::Index v = -1;
    double gv = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i)
      if (w[i] > 0.0 && g[i] > gv) {
        gv = g[i];
        v = i;
      }
    const bool away = v >= 0 && (gv - gw) > gap && w[v] < 1.0;
    double gamma_max;
    Eigen::VectorXd d;
    if (away) {
      gamma_max = w[v] / (1.0 - w[v]);
      d = w;
      d[v] -= 1.0;
      ad = (p.b - r) - p.a.col(v);
    } else {
      gamma_max = 1.0;
      d = -w;
      d[s] += 1.0;
      ad = p.a.col(s) - (p.b - r);
    }
    const double num = r.dot(ad) - ridge * w.dot(d);
    const double den = ad.squaredNorm() + ridge * d.squaredNorm();
    double gamma = den > 0.0 ? std::clamp(num / den, 0.0, gamma_max) : gamma_max;
    if (!(gamma > 0.0)) {
      res.converged = gap <= std::sqrt(tol);
      break;
    }
    w += gamma * d;
    if (away && gamma == gamma_max) w[v] = 0.0;
    w = w.cwiseMax(0.0);
    if ((it & 63) == 63) {
      w /= w.sum();
      r = p.b - p.a * w;
    } else {
      r -= gamma * ad;
    }
    const double f_new = objective_of(r, w);

    // Support changed: re-solve on the new face.
    const auto support = support_of(w);
    if (opts.polish && support != polished_support) {
      bool singular = false;
      Eigen::VectorXd u = detail::polish_on_faces(p, ridge, w, singular);
      Eigen::VectorXd ru = p.b - p.a * u;
      if (objective_of(ru, u) <= f_new) {
        w = std::move(u);
        r = std::move(ru);
        res.degenerate = singular;
      }
      polished_support = support_of(w);
    }
    f = objective_of(r, w);

    if ((it % 100) == 99) {
      if (f_window_start - f <= opts.improvement_tolerance * std::max(f_window_start, 1e-300)) {
        res.converged = true;
        ++it;
        break;
      }
      f_window_start = f;
    }
  }

  // Final exact pass on the face we ended on.
  if (opts.polish) {
    bool singular = false;
    Eigen::VectorXd u = detail::polish_on_faces(p, ridge, w, singular);
    Eigen::VectorXd ru = p.b - p.a * u;
    if (objective_of(ru, u) <= objective_of(r, w)) {
      w = std::move(u);
      r = std::move(ru);
    }
    res.degenerate = res.degenerate || (singular && ridge == 0.0);
  }

  w = w.cwiseMax(0.0);
  w /= w.sum();
  r = p.b - p.a * w;
  g.noalias() = -2.0 * (p.a.transpose() * r);
  if (ridge > 0.0) g += 2.0 * ridge * w;
  res.gap = std::max(0.0, g.dot(w) - g.minCoeff());
  if (res.gap <= tol) res.converged = true;
  res.weights = std::move(w);
  res.objective = objective_of(r, res.weights);
  res.intercept = qp.intercept ? p.b_mean - p.a_mean.dot(res.weights) : 0.0;
  res.iterations = it;
  return res;
}

}  // namespace synthctl
