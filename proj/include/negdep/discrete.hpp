#pragma once

#include "negdep/errors.hpp"
#include "negdep/scalar.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

namespace negdep {

/// Distribution of a single real random variable on a finite support.
/// The support is strictly increasing and probabilities are positive.
template <class Scalar>
struct UnivariateDiscrete {
  Vector<Scalar> support;
  Vector<Scalar> probs;

  Eigen::Index size() const { return support.size(); }

  Scalar mean() const {
    Scalar m = scalar_traits<Scalar>::zero();
    for (Eigen::Index i = 0; i < size(); ++i) m += probs[i] * support[i];
    return m;
  }

  Scalar second_moment() const {
    Scalar m = scalar_traits<Scalar>::zero();
    for (Eigen::Index i = 0; i < size(); ++i) m += probs[i] * support[i] * support[i];
    return m;
  }

  Scalar variance() const {
    const Scalar m = mean();
    return second_moment() - m * m;
  }

  /// P(X <= x).
  Scalar cdf(const Scalar& x) const {
    Scalar acc = scalar_traits<Scalar>::zero();
    for (Eigen::Index i = 0; i < size() && support[i] <= x; ++i) acc += probs[i];
    return acc;
  }
};

namespace detail {

template <class Scalar>
bool lex_less_row(const Matrix<Scalar>& pts, Eigen::Index a, Eigen::Index b) {
  for (Eigen::Index k = 0; k < pts.cols(); ++k) {
    if (pts(a, k) < pts(b, k)) return true;
    if (pts(b, k) < pts(a, k)) return false;
  }
  return false;
}

template <class Scalar>
bool rows_equal(const Matrix<Scalar>& lhs, Eigen::Index a, const Matrix<Scalar>& rhs, Eigen::Index b) {
  for (Eigen::Index k = 0; k < lhs.cols(); ++k)
    if (!(lhs(a, k) == rhs(b, k))) return false;
  return true;
}

}  // namespace detail

/// Finite-support joint distribution on R^n.
///
/// Atoms are rows of `points()` with matching entries of `probs()`; the
/// canonical form is lexicographically sorted with duplicate points merged
/// and zero-probability atoms removed.  Instances are immutable values.
template <class Scalar>
class DiscreteJoint {
 public:
  DiscreteJoint() = default;

  /// Validates and normalizes: merges duplicate points (summing their
  /// probabilities), drops zero-probability atoms, and enforces the mass
  /// and nonnegativity invariants.
  static DiscreteJoint make(Matrix<Scalar> points, Vector<Scalar> probs) {
    if (points.rows() != probs.size())
      throw Error(ErrorCode::DimMismatch, "atom/probability count mismatch");
    if (points.cols() < 1) throw Error(ErrorCode::DimMismatch, "dimension must be >= 1");
    const Scalar zero = scalar_traits<Scalar>::zero();
    for (Eigen::Index i = 0; i < probs.size(); ++i)
      if (probs[i] < zero) throw Error(ErrorCode::NegativeProb, "atom " + std::to_string(i));

    Scalar mass = zero;
    for (Eigen::Index i = 0; i < probs.size(); ++i) mass += probs[i];
    if (scalar_traits<Scalar>::abs(mass - Scalar(1)) > scalar_traits<Scalar>::mass_tolerance())
      throw Error(ErrorCode::MassNotOne, "total mass " + std::to_string(to_double(mass)));

    std::vector<Eigen::Index> order(static_cast<std::size_t>(points.rows()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return detail::lex_less_row(points, a, b);
    });

    DiscreteJoint d;
    d.points_.resize(points.rows(), points.cols());
    d.probs_.resize(probs.size());
    Eigen::Index out = 0;
    for (std::size_t r = 0; r < order.size(); ++r) {
      const Eigen::Index src = order[r];
      if (out > 0 && detail::rows_equal(d.points_, out - 1, points, src)) {
        d.probs_[out - 1] += probs[src];
      } else {
        d.points_.row(out) = points.row(src);
        d.probs_[out] = probs[src];
        ++out;
      }
    }
    // Drop exact zeros so every retained atom has positive probability.
    Eigen::Index kept = 0;
    for (Eigen::Index r = 0; r < out; ++r) {
      if (d.probs_[r] == zero) continue;
      if (kept != r) {
        d.points_.row(kept) = d.points_.row(r);
        d.probs_[kept] = d.probs_[r];
      }
      ++kept;
    }
    d.points_.conservativeResize(kept, points.cols());
    d.probs_.conservativeResize(kept);
    return d;
  }

  static DiscreteJoint point_mass(const Vector<Scalar>& x) {
    Matrix<Scalar> pts(1, x.size());
    pts.row(0) = x.transpose();
    Vector<Scalar> p(1);
    p[0] = Scalar(1);
    return make(std::move(pts), std::move(p));
  }

  Eigen::Index dim() const { return points_.cols(); }
  Eigen::Index atom_count() const { return points_.rows(); }
  const Matrix<Scalar>& points() const { return points_; }
  const Vector<Scalar>& probs() const { return probs_; }

  /// Structural comparison of canonical forms; `tol` bounds both coordinate
  /// and probability discrepancies (use 0 for the exact backend).
  bool approx_equal(const DiscreteJoint& other, const Scalar& tol) const {
    if (dim() != other.dim() || atom_count() != other.atom_count()) return false;
    for (Eigen::Index r = 0; r < atom_count(); ++r) {
      for (Eigen::Index k = 0; k < dim(); ++k)
        if (scalar_traits<Scalar>::abs(points_(r, k) - other.points_(r, k)) > tol) return false;
      if (scalar_traits<Scalar>::abs(probs_[r] - other.probs_[r]) > tol) return false;
    }
    return true;
  }

 private:
  Matrix<Scalar> points_;
  Vector<Scalar> probs_;
};

/// Mean vector, covariance matrix, and (binary64) correlation matrix.
/// Correlation entries touching a zero-variance coordinate are undefined.
template <class Scalar>
struct MomentSummary {
  Vector<Scalar> mean;
  Matrix<Scalar> cov;
  Eigen::MatrixXd corr;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> corr_defined;
};

template <class Scalar>
UnivariateDiscrete<Scalar> marginal(const DiscreteJoint<Scalar>& d, Eigen::Index i) {
  if (i < 0 || i >= d.dim()) throw Error(ErrorCode::IndexOutOfRange, "marginal index " + std::to_string(i));
  std::vector<std::pair<Scalar, Scalar>> acc;
  for (Eigen::Index r = 0; r < d.atom_count(); ++r) acc.emplace_back(d.points()(r, i), d.probs()[r]);
  std::sort(acc.begin(), acc.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  UnivariateDiscrete<Scalar> m;
  std::vector<Scalar> sup, pr;
  for (const auto& [x, p] : acc) {
    if (!sup.empty() && sup.back() == x) {
      pr.back() += p;
    } else {
      sup.push_back(x);
      pr.push_back(p);
    }
  }
  m.support.resize(static_cast<Eigen::Index>(sup.size()));
  m.probs.resize(static_cast<Eigen::Index>(pr.size()));
  for (std::size_t k = 0; k < sup.size(); ++k) {
    m.support[static_cast<Eigen::Index>(k)] = sup[k];
    m.probs[static_cast<Eigen::Index>(k)] = pr[k];
  }
  return m;
}

template <class Scalar>
std::vector<UnivariateDiscrete<Scalar>> all_marginals(const DiscreteJoint<Scalar>& d) {
  std::vector<UnivariateDiscrete<Scalar>> out;
  out.reserve(static_cast<std::size_t>(d.dim()));
  for (Eigen::Index i = 0; i < d.dim(); ++i) out.push_back(marginal(d, i));
  return out;
}

/// Distribution of X^perp: independent components with the marginals of d.
template <class Scalar>
DiscreteJoint<Scalar> product_independent(const DiscreteJoint<Scalar>& d) {
  const auto margs = all_marginals(d);
  Eigen::Index count = 1;
  for (const auto& m : margs) count *= m.size();
  Matrix<Scalar> pts(count, d.dim());
  Vector<Scalar> pr(count);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(d.dim()), 0);
  for (Eigen::Index r = 0; r < count; ++r) {
    Scalar p(1);
    for (Eigen::Index k = 0; k < d.dim(); ++k) {
      pts(r, k) = margs[static_cast<std::size_t>(k)].support[idx[static_cast<std::size_t>(k)]];
      p *= margs[static_cast<std::size_t>(k)].probs[idx[static_cast<std::size_t>(k)]];
    }
    pr[r] = p;
    for (Eigen::Index k = d.dim() - 1; k >= 0; --k) {
      auto& j = idx[static_cast<std::size_t>(k)];
      if (++j < margs[static_cast<std::size_t>(k)].size()) break;
      j = 0;
    }
  }
  return DiscreteJoint<Scalar>::make(std::move(pts), std::move(pr));
}

/// Distribution of (X_{perm[0]}, ..., X_{perm[n-1]}).
template <class Scalar>
DiscreteJoint<Scalar> permute(const DiscreteJoint<Scalar>& d, const std::vector<Eigen::Index>& perm) {
  if (static_cast<Eigen::Index>(perm.size()) != d.dim())
    throw Error(ErrorCode::DimMismatch, "permutation length");
  Matrix<Scalar> pts(d.atom_count(), d.dim());
  for (Eigen::Index r = 0; r < d.atom_count(); ++r)
    for (Eigen::Index k = 0; k < d.dim(); ++k) pts(r, k) = d.points()(r, perm[static_cast<std::size_t>(k)]);
  return DiscreteJoint<Scalar>::make(std::move(pts), Vector<Scalar>(d.probs()));
}

/// Uniform mixture of d over all coordinate permutations; the result is
/// exchangeable and shares any constant-sum center with d.
template <class Scalar>
DiscreteJoint<Scalar> symmetrize(const DiscreteJoint<Scalar>& d) {
  const Eigen::Index n = d.dim();
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  Eigen::Index nfact = 1;
  for (Eigen::Index k = 2; k <= n; ++k) nfact *= k;

  Matrix<Scalar> pts(d.atom_count() * nfact, n);
  Vector<Scalar> pr(d.atom_count() * nfact);
  const Scalar w = Scalar(1) / Scalar(static_cast<long long>(nfact));
  Eigen::Index out = 0;
  do {
    for (Eigen::Index r = 0; r < d.atom_count(); ++r) {
      for (Eigen::Index k = 0; k < n; ++k) pts(out, k) = d.points()(r, perm[static_cast<std::size_t>(k)]);
      pr[out] = w * d.probs()[r];
      ++out;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return DiscreteJoint<Scalar>::make(std::move(pts), std::move(pr));
}

template <class Scalar>
MomentSummary<Scalar> moments(const DiscreteJoint<Scalar>& d) {
  MomentSummary<Scalar> s;
  const Eigen::Index n = d.dim();
  s.mean = d.points().transpose() * d.probs();
  // E[X X^T] - mean mean^T keeps the exact backend exact.
  Matrix<Scalar> second = d.points().transpose() * d.probs().asDiagonal() * d.points();
  s.cov = second - s.mean * s.mean.transpose();
  s.corr.setConstant(n, n, std::numeric_limits<double>::quiet_NaN());
  s.corr_defined.setConstant(n, n, false);
  const Scalar zero = scalar_traits<Scalar>::zero();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (s.cov(i, i) <= zero) continue;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (s.cov(j, j) <= zero) continue;
      s.corr(i, j) = to_double(s.cov(i, j)) / std::sqrt(to_double(s.cov(i, i)) * to_double(s.cov(j, j)));
      s.corr_defined(i, j) = true;
    }
  }
  return s;
}

template <class Scalar>
struct JointMixResult {
  bool is_joint_mix = false;
  Scalar center{};  // mass-weighted mean component sum
  // On failure: atoms realizing the extreme sums.
  Eigen::Index witness_low = -1;
  Eigen::Index witness_high = -1;
  Scalar sum_low{};
  Scalar sum_high{};
};

/// Decides whether all atom coordinate sums agree within tol.
template <class Scalar>
JointMixResult<Scalar> is_joint_mix(const DiscreteJoint<Scalar>& d,
                                    const Scalar& tol = scalar_traits<Scalar>::sum_tolerance()) {
  JointMixResult<Scalar> res;
  Vector<Scalar> sums = d.points().rowwise().sum();
  Eigen::Index lo = 0, hi = 0;
  Scalar mean_sum = scalar_traits<Scalar>::zero();
  for (Eigen::Index r = 0; r < sums.size(); ++r) {
    if (sums[r] < sums[lo]) lo = r;
    if (sums[r] > sums[hi]) hi = r;
    mean_sum += d.probs()[r] * sums[r];
  }
  res.center = mean_sum;
  res.sum_low = sums[lo];
  res.sum_high = sums[hi];
  if (sums[hi] - sums[lo] <= tol) {
    res.is_joint_mix = true;
  } else {
    res.witness_low = lo;
    res.witness_high = hi;
  }
  return res;
}

/// Exchangeability via the n-1 adjacent transpositions, which generate the
/// symmetric group.
template <class Scalar>
bool is_exchangeable(const DiscreteJoint<Scalar>& d,
                     const Scalar& tol = scalar_traits<Scalar>::sum_tolerance()) {
  const Eigen::Index n = d.dim();
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(i + 1)]);
    if (!permute(d, perm).approx_equal(d, tol)) return false;
  }
  return true;
}

/// Multinomial distribution with k trials and event probabilities p,
/// supported on {x in N^n : sum x_i = k}.
template <class Scalar>
DiscreteJoint<Scalar> make_multinomial(int trials, const Vector<Scalar>& p) {
  const Eigen::Index n = p.size();
  if (trials < 1) throw Error(ErrorCode::BadProbabilityVector, "trials must be >= 1");
  if (n < 1) throw Error(ErrorCode::BadProbabilityVector, "empty probability vector");
  Scalar mass = scalar_traits<Scalar>::zero();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (p[i] < scalar_traits<Scalar>::zero())
      throw Error(ErrorCode::BadProbabilityVector, "negative entry");
    mass += p[i];
  }
  if (scalar_traits<Scalar>::abs(mass - Scalar(1)) > scalar_traits<Scalar>::mass_tolerance())
    throw Error(ErrorCode::BadProbabilityVector, "entries must sum to 1");

  std::vector<Vector<Scalar>> pts;
  std::vector<Scalar> pr;
  Vector<Scalar> x = Vector<Scalar>::Zero(n);
  // Factorials fit comfortably: supports are tiny at desk scale.
  std::vector<Scalar> fact(static_cast<std::size_t>(trials) + 1, Scalar(1));
  for (int k = 1; k <= trials; ++k)
    fact[static_cast<std::size_t>(k)] = fact[static_cast<std::size_t>(k - 1)] * Scalar(k);

  const std::function<void(Eigen::Index, int)> rec = [&](Eigen::Index coord, int remaining) {
    if (coord == n - 1) {
      x[coord] = Scalar(remaining);
      Scalar prob = fact[static_cast<std::size_t>(trials)];
      for (Eigen::Index i = 0; i < n; ++i) {
        int xi = static_cast<int>(to_double(x[i]) + 0.5);
        prob /= fact[static_cast<std::size_t>(xi)];
        for (int t = 0; t < xi; ++t) prob *= p[i];
      }
      if (prob > scalar_traits<Scalar>::zero()) {
        pts.push_back(x);
        pr.push_back(prob);
      }
      return;
    }
    for (int v = 0; v <= remaining; ++v) {
      x[coord] = Scalar(v);
      rec(coord + 1, remaining - v);
    }
  };
  rec(0, trials);

  Matrix<Scalar> points(static_cast<Eigen::Index>(pts.size()), n);
  Vector<Scalar> probs(static_cast<Eigen::Index>(pr.size()));
  for (std::size_t r = 0; r < pts.size(); ++r) {
    points.row(static_cast<Eigen::Index>(r)) = pts[r].transpose();
    probs[static_cast<Eigen::Index>(r)] = pr[r];
  }
  return DiscreteJoint<Scalar>::make(std::move(points), std::move(probs));
}

/// Uniform distribution over the distinct coordinate permutations of a.
template <class Scalar>
DiscreteJoint<Scalar> make_orbit_uniform(const Vector<Scalar>& a) {
  const Eigen::Index n = a.size();
  if (n < 1) throw Error(ErrorCode::DimMismatch, "empty base vector");
  std::vector<Scalar> sorted(a.data(), a.data() + n);
  std::sort(sorted.begin(), sorted.end());
  std::vector<Vector<Scalar>> orbit;
  do {
    Vector<Scalar> v(n);
    for (Eigen::Index k = 0; k < n; ++k) v[k] = sorted[static_cast<std::size_t>(k)];
    orbit.push_back(std::move(v));
  } while (std::next_permutation(sorted.begin(), sorted.end()));
  Matrix<Scalar> pts(static_cast<Eigen::Index>(orbit.size()), n);
  Vector<Scalar> pr(static_cast<Eigen::Index>(orbit.size()));
  const Scalar w = Scalar(1) / Scalar(static_cast<long long>(orbit.size()));
  for (std::size_t r = 0; r < orbit.size(); ++r) {
    pts.row(static_cast<Eigen::Index>(r)) = orbit[r].transpose();
    pr[static_cast<Eigen::Index>(r)] = w;
  }
  return DiscreteJoint<Scalar>::make(std::move(pts), std::move(pr));
}

}  // namespace negdep
