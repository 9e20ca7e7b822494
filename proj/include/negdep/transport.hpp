#pragma once

#include "negdep/discrete.hpp"
#include "negdep/errors.hpp"
#include "negdep/gaussian.hpp"
#include "negdep/lp.hpp"
#include "negdep/scalar.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <vector>

namespace negdep {

/// Probability measure on the subsets of [n], keyed by coordinate bitmask.
template <class Scalar>
struct SubsetMeasure {
  std::vector<std::pair<std::uint32_t, Scalar>> weights;

  void validate(Eigen::Index n) const {
    Scalar mass = scalar_traits<Scalar>::zero();
    for (const auto& [mask, w] : weights) {
      if (mask >= (std::uint32_t{1} << n)) throw Error(ErrorCode::BadSubset, "mask out of range");
      if (w < scalar_traits<Scalar>::zero()) throw Error(ErrorCode::BadSubset, "negative weight");
      mass += w;
    }
    if (scalar_traits<Scalar>::abs(mass - Scalar(1)) > scalar_traits<Scalar>::mass_tolerance())
      throw Error(ErrorCode::BadSubset, "subset weights must sum to 1");
  }

  /// Canonical (mask-sorted, merged) copy for comparisons.
  SubsetMeasure canonical() const {
    SubsetMeasure out = *this;
    std::sort(out.weights.begin(), out.weights.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::pair<std::uint32_t, Scalar>> merged;
    for (const auto& [mask, w] : out.weights) {
      if (!merged.empty() && merged.back().first == mask)
        merged.back().second += w;
      else
        merged.emplace_back(mask, w);
    }
    out.weights = std::move(merged);
    return out;
  }

  /// Image under a coordinate permutation (perm[i] = new position of i).
  SubsetMeasure permuted(const std::vector<Eigen::Index>& perm) const {
    SubsetMeasure out;
    for (const auto& [mask, w] : weights) {
      std::uint32_t m = 0;
      for (std::size_t i = 0; i < perm.size(); ++i)
        if (mask & (std::uint32_t{1} << i)) m |= std::uint32_t{1} << perm[i];
      out.weights.emplace_back(m, w);
    }
    return out.canonical();
  }
};

/// Family of measures on 2^[n] aggregated by worst case.
template <class Scalar>
struct UncertaintySpec {
  enum class Kind { AllSubsets, FixedCardinality, Explicit };
  Kind kind = Kind::AllSubsets;
  Eigen::Index n = 0;
  int cardinality = 0;
  std::vector<SubsetMeasure<Scalar>> measures;

  static UncertaintySpec all_subsets(Eigen::Index n) {
    UncertaintySpec u;
    u.kind = Kind::AllSubsets;
    u.n = n;
    return u;
  }
  static UncertaintySpec fixed_cardinality(Eigen::Index n, int k) {
    if (k < 1 || k > n) throw Error(ErrorCode::BadSubset, "cardinality out of [1, n]");
    UncertaintySpec u;
    u.kind = Kind::FixedCardinality;
    u.n = n;
    u.cardinality = k;
    return u;
  }
  static UncertaintySpec explicit_measures(Eigen::Index n, std::vector<SubsetMeasure<Scalar>> ms) {
    if (ms.empty()) throw Error(ErrorCode::BadSubset, "empty uncertainty set");
    for (const auto& m : ms) m.validate(n);
    UncertaintySpec u;
    u.kind = Kind::Explicit;
    u.n = n;
    u.measures = std::move(ms);
    return u;
  }

  /// AllSubsets and FixedCardinality are symmetric by construction; an
  /// explicit list must be closed under coordinate permutations.
  bool is_symmetric() const {
    if (kind != Kind::Explicit) return true;
    std::vector<SubsetMeasure<Scalar>> canon;
    canon.reserve(measures.size());
    for (const auto& m : measures) canon.push_back(m.canonical());
    const auto contains = [&](const SubsetMeasure<Scalar>& target) {
      for (const auto& c : canon) {
        if (c.weights.size() != target.weights.size()) continue;
        bool same = true;
        for (std::size_t i = 0; i < c.weights.size() && same; ++i)
          same = c.weights[i].first == target.weights[i].first &&
                 !(scalar_traits<Scalar>::abs(c.weights[i].second - target.weights[i].second) >
                   scalar_traits<Scalar>::mass_tolerance());
        if (same) return true;
      }
      return false;
    };
    // adjacent transpositions generate the symmetric group
    for (Eigen::Index t = 0; t + 1 < n; ++t) {
      std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
      std::iota(perm.begin(), perm.end(), Eigen::Index{0});
      std::swap(perm[static_cast<std::size_t>(t)], perm[static_cast<std::size_t>(t + 1)]);
      for (const auto& m : measures)
        if (!contains(m.permuted(perm))) return false;
    }
    return true;
  }
};

/// Cost model f applied to subset sums.
template <class Scalar>
struct CostSpec {
  enum class Kind { Quadratic, Variance, RepulsiveHarmonic, ConvexTabulated };
  Kind kind = Kind::Quadratic;
  std::vector<std::pair<Scalar, Scalar>> table;  // sorted (sum, f(sum))

  static CostSpec quadratic() { return {}; }
  static CostSpec variance() {
    CostSpec c;
    c.kind = Kind::Variance;
    return c;
  }
  static CostSpec repulsive_harmonic() {
    CostSpec c;
    c.kind = Kind::RepulsiveHarmonic;
    return c;
  }
  static CostSpec tabulated(std::vector<std::pair<Scalar, Scalar>> table) {
    CostSpec c;
    c.kind = Kind::ConvexTabulated;
    std::sort(table.begin(), table.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    // midpoint convexity on the grid: slopes must be nondecreasing
    for (std::size_t i = 2; i < table.size(); ++i) {
      const Scalar lhs = (table[i - 1].second - table[i - 2].second) * (table[i].first - table[i - 1].first);
      const Scalar rhs = (table[i].second - table[i - 1].second) * (table[i - 1].first - table[i - 2].first);
      if (lhs > rhs) throw Error(ErrorCode::BadCost, "tabulated cost is not convex on its grid");
    }
    c.table = std::move(table);
    return c;
  }

  Scalar eval(const Scalar& sum) const {
    if (kind != Kind::ConvexTabulated) throw Error(ErrorCode::BadCost, "eval needs a tabulated cost");
    for (const auto& [x, fx] : table)
      if (!(x < sum) && !(sum < x)) return fx;
    throw Error(ErrorCode::BadCost, "sum value missing from the cost table");
  }
};

/// E[(sum_{i in K} X_i)^2] from mean and covariance.
inline double cost_from_cov(const CovModel& model, std::uint32_t mask) {
  const Eigen::Index n = model.dim();
  if (mask >= (std::uint32_t{1} << n)) throw Error(ErrorCode::BadSubset, "mask out of range");
  double mu = 0.0, quad = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(mask & (std::uint32_t{1} << i))) continue;
    mu += model.mean[i];
    for (Eigen::Index j = 0; j < n; ++j)
      if (mask & (std::uint32_t{1} << j)) quad += model.cov(i, j);
  }
  return mu * mu + quad;
}

namespace detail {

/// Subset cost of one notion for a covariance model.
inline double subset_cost(const CovModel& model, const CostSpec<double>& cost, std::uint32_t mask) {
  switch (cost.kind) {
    case CostSpec<double>::Kind::Quadratic:
      return cost_from_cov(model, mask);
    case CostSpec<double>::Kind::Variance: {
      double mu = 0.0;
      for (Eigen::Index i = 0; i < model.dim(); ++i)
        if (mask & (std::uint32_t{1} << i)) mu += model.mean[i];
      return cost_from_cov(model, mask) - mu * mu;
    }
    case CostSpec<double>::Kind::RepulsiveHarmonic: {
      double second = 0.0;
      int k = 0;
      for (Eigen::Index i = 0; i < model.dim(); ++i)
        if (mask & (std::uint32_t{1} << i)) {
          second += model.cov(i, i) + model.mean[i] * model.mean[i];
          ++k;
        }
      return -2.0 * k * second + 2.0 * cost_from_cov(model, mask);
    }
    case CostSpec<double>::Kind::ConvexTabulated:
      throw Error(ErrorCode::BadCost, "tabulated costs need a discrete distribution");
  }
  return 0.0;
}

/// Subset cost for a discrete joint distribution.
template <class Scalar>
Scalar subset_cost(const DiscreteJoint<Scalar>& d, const CostSpec<Scalar>& cost, std::uint32_t mask) {
  const Eigen::Index n = d.dim();
  if (mask >= (std::uint32_t{1} << n)) throw Error(ErrorCode::BadSubset, "mask out of range");
  Scalar quad = scalar_traits<Scalar>::zero();
  Scalar mean = scalar_traits<Scalar>::zero();
  Scalar second = scalar_traits<Scalar>::zero();
  Scalar tabulated = scalar_traits<Scalar>::zero();
  int k = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (mask & (std::uint32_t{1} << i)) ++k;
  for (Eigen::Index r = 0; r < d.atom_count(); ++r) {
    Scalar s = scalar_traits<Scalar>::zero();
    for (Eigen::Index i = 0; i < n; ++i)
      if (mask & (std::uint32_t{1} << i)) {
        s += d.points()(r, i);
        second += d.probs()[r] * d.points()(r, i) * d.points()(r, i);
      }
    quad += d.probs()[r] * s * s;
    mean += d.probs()[r] * s;
    if (cost.kind == CostSpec<Scalar>::Kind::ConvexTabulated)
      tabulated += d.probs()[r] * cost.eval(s);
  }
  switch (cost.kind) {
    case CostSpec<Scalar>::Kind::Quadratic: return quad;
    case CostSpec<Scalar>::Kind::Variance: return quad - mean * mean;
    case CostSpec<Scalar>::Kind::RepulsiveHarmonic: return Scalar(-2) * Scalar(k) * second + Scalar(2) * quad;
    case CostSpec<Scalar>::Kind::ConvexTabulated: return tabulated;
  }
  return scalar_traits<Scalar>::zero();
}

}  // namespace detail

template <class Scalar>
struct ObjectiveResult {
  Scalar value{};
  std::uint32_t argmax_mask = 0;   // AllSubsets / FixedCardinality
  int argmax_measure = -1;         // Explicit
};

/// Worst-case aggregated cost over the uncertainty family.
template <class Input, class Scalar>
ObjectiveResult<Scalar> objective(const Input& input, const CostSpec<Scalar>& cost,
                                  const UncertaintySpec<Scalar>& unc) {
  ObjectiveResult<Scalar> res;
  bool first = true;
  const auto consider = [&](const Scalar& v, std::uint32_t mask, int measure) {
    if (first || res.value < v) {
      res.value = v;
      res.argmax_mask = mask;
      res.argmax_measure = measure;
      first = false;
    }
  };
  switch (unc.kind) {
    case UncertaintySpec<Scalar>::Kind::AllSubsets:
      for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << unc.n); ++mask)
        consider(detail::subset_cost(input, cost, mask), mask, -1);
      break;
    case UncertaintySpec<Scalar>::Kind::FixedCardinality:
      for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << unc.n); ++mask)
        if (std::popcount(mask) == unc.cardinality)
          consider(detail::subset_cost(input, cost, mask), mask, -1);
      break;
    case UncertaintySpec<Scalar>::Kind::Explicit:
      for (std::size_t m = 0; m < unc.measures.size(); ++m) {
        Scalar v = scalar_traits<Scalar>::zero();
        for (const auto& [mask, w] : unc.measures[m].weights)
          v += w * detail::subset_cost(input, cost, mask);
        consider(v, 0, static_cast<int>(m));
      }
      break;
  }
  return res;
}

struct TransportCaps {
  long long lp_variable_cap = 200'000;
};

template <class Scalar>
struct TransportSolution {
  LpStatus status = LpStatus::Infeasible;
  DiscreteJoint<Scalar> coupling;
  Scalar value{};
  std::vector<std::pair<std::uint32_t, Scalar>> per_subset_costs;
  Eigen::MatrixXd corr;
};

namespace detail {

template <class Scalar>
struct ProductGrid {
  Matrix<Scalar> points;  // one grid atom per row
  Eigen::Index count = 0;
};

template <class Scalar>
ProductGrid<Scalar> product_grid(const std::vector<UnivariateDiscrete<Scalar>>& marginals,
                                 long long cap) {
  const Eigen::Index n = static_cast<Eigen::Index>(marginals.size());
  long long count = 1;
  for (const auto& m : marginals) {
    count *= static_cast<long long>(m.size());
    if (count > cap) throw Error(ErrorCode::SizeCap, "product grid exceeds the LP variable cap");
  }
  ProductGrid<Scalar> g;
  g.count = static_cast<Eigen::Index>(count);
  g.points.resize(g.count, n);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n), 0);
  for (Eigen::Index r = 0; r < g.count; ++r) {
    for (Eigen::Index i = 0; i < n; ++i)
      g.points(r, i) = marginals[static_cast<std::size_t>(i)].support[idx[static_cast<std::size_t>(i)]];
    for (Eigen::Index i = n - 1; i >= 0; --i) {
      auto& k = idx[static_cast<std::size_t>(i)];
      if (++k < marginals[static_cast<std::size_t>(i)].size()) break;
      k = 0;
    }
  }
  return g;
}

/// Marginal equality rows for a coupling supported on `grid`.
template <class Scalar>
void add_marginal_rows(LpProblem<Scalar>& lp, const Matrix<Scalar>& grid,
                       const std::vector<UnivariateDiscrete<Scalar>>& marginals,
                       Eigen::Index extra_vars) {
  const Eigen::Index vars = grid.rows() + extra_vars;
  for (std::size_t i = 0; i < marginals.size(); ++i) {
    for (Eigen::Index v = 0; v < marginals[i].size(); ++v) {
      Vector<Scalar> row = Vector<Scalar>::Zero(vars);
      for (Eigen::Index r = 0; r < grid.rows(); ++r)
        if (grid(r, static_cast<Eigen::Index>(i)) == marginals[i].support[v]) row[r] = Scalar(1);
      lp.add_row(std::move(row), Relation::Equal, marginals[i].probs[v]);
    }
  }
}

template <class Scalar>
DiscreteJoint<Scalar> coupling_from_primal(const Matrix<Scalar>& grid, const Vector<Scalar>& pi) {
  std::vector<Eigen::Index> keep;
  Scalar mass = scalar_traits<Scalar>::zero();
  const Scalar floor_weight = scalar_traits<Scalar>::from_double(
      scalar_traits<Scalar>::is_exact ? 0.0 : 1e-12);
  for (Eigen::Index r = 0; r < grid.rows(); ++r)
    if (pi[r] > floor_weight) {
      keep.push_back(r);
      mass += pi[r];
    }
  Matrix<Scalar> pts(static_cast<Eigen::Index>(keep.size()), grid.cols());
  Vector<Scalar> pr(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    pts.row(static_cast<Eigen::Index>(k)) = grid.row(keep[k]);
    // renormalize away LP residual so the distribution invariant holds
    pr[static_cast<Eigen::Index>(k)] = pi[keep[k]] / mass;
  }
  return DiscreteJoint<Scalar>::make(std::move(pts), std::move(pr));
}

}  // namespace detail

/// Minimizes the worst-case subset cost over the coupling polytope of the
/// given marginals: one LP variable per product-grid atom, one epigraph
/// variable t, marginal equality rows, and a cost row per family element.
///
/// Variance and repulsive-harmonic costs stay linear in the coupling: the
/// marginals pin every E[X_i] and E[X_i^2], so those costs differ from the
/// quadratic one by per-subset constants that fold into the row offsets.
/// Tabulated costs are evaluation-only and are rejected here.
template <class Scalar>
TransportSolution<Scalar> solve_minimax(const std::vector<UnivariateDiscrete<Scalar>>& marginals,
                                        const UncertaintySpec<Scalar>& unc,
                                        const CostSpec<Scalar>& cost = CostSpec<Scalar>::quadratic(),
                                        const TransportCaps& caps = {}) {
  const Eigen::Index n = static_cast<Eigen::Index>(marginals.size());
  if (unc.n != n) throw Error(ErrorCode::DimMismatch, "uncertainty dimension mismatch");
  if (cost.kind == CostSpec<Scalar>::Kind::ConvexTabulated)
    throw Error(ErrorCode::BadCost, "the minimax LP supports quadratic-type costs only");
  const auto grid = detail::product_grid(marginals, caps.lp_variable_cap);
  const Eigen::Index tvar = grid.count;  // epigraph variable index

  LpProblem<Scalar> lp(grid.count + 1);
  lp.objective[tvar] = Scalar(1);
  lp.lower[static_cast<std::size_t>(tvar)] = std::nullopt;  // harmonic costs go negative

  detail::add_marginal_rows(lp, grid.points, marginals, /*extra_vars=*/1);

  const auto subset_sum_sq = [&](Eigen::Index r, std::uint32_t mask) {
    Scalar s = scalar_traits<Scalar>::zero();
    for (Eigen::Index i = 0; i < n; ++i)
      if (mask & (std::uint32_t{1} << i)) s += grid.points(r, i);
    return s * s;
  };
  // per-subset constants fixed by the marginals
  const auto subset_mean = [&](std::uint32_t mask) {
    Scalar s = scalar_traits<Scalar>::zero();
    for (Eigen::Index i = 0; i < n; ++i)
      if (mask & (std::uint32_t{1} << i)) s += marginals[static_cast<std::size_t>(i)].mean();
    return s;
  };
  const auto subset_second = [&](std::uint32_t mask) {
    Scalar s = scalar_traits<Scalar>::zero();
    for (Eigen::Index i = 0; i < n; ++i)
      if (mask & (std::uint32_t{1} << i)) s += marginals[static_cast<std::size_t>(i)].second_moment();
    return s;
  };
  // cost_K(pi) = scale * sum_x pi(x) q_K(x) + offset_K
  const auto cost_scale = [&]() {
    return cost.kind == CostSpec<Scalar>::Kind::RepulsiveHarmonic ? Scalar(2) : Scalar(1);
  }();
  const auto cost_offset = [&](std::uint32_t mask) {
    switch (cost.kind) {
      case CostSpec<Scalar>::Kind::Quadratic: return scalar_traits<Scalar>::zero();
      case CostSpec<Scalar>::Kind::Variance: {
        const Scalar m = subset_mean(mask);
        return Scalar(-1) * m * m;
      }
      case CostSpec<Scalar>::Kind::RepulsiveHarmonic:
        return Scalar(-2) * Scalar(std::popcount(mask)) * subset_second(mask);
      case CostSpec<Scalar>::Kind::ConvexTabulated: break;
    }
    return scalar_traits<Scalar>::zero();
  };
  const auto add_cost_row = [&](auto&& coeff_of, const Scalar& offset) {
    Vector<Scalar> row = Vector<Scalar>::Zero(grid.count + 1);
    for (Eigen::Index r = 0; r < grid.count; ++r) row[r] = coeff_of(r);
    row[tvar] = Scalar(-1);
    lp.add_row(std::move(row), Relation::LessEq, Scalar(-1) * offset);
  };

  std::vector<std::uint32_t> family_masks;
  switch (unc.kind) {
    case UncertaintySpec<Scalar>::Kind::AllSubsets:
      for (std::uint32_t mask = 1; mask < (std::uint32_t{1} << n); ++mask) family_masks.push_back(mask);
      break;
    case UncertaintySpec<Scalar>::Kind::FixedCardinality:
      for (std::uint32_t mask = 1; mask < (std::uint32_t{1} << n); ++mask)
        if (std::popcount(mask) == unc.cardinality) family_masks.push_back(mask);
      break;
    case UncertaintySpec<Scalar>::Kind::Explicit:
      break;
  }
  if (unc.kind == UncertaintySpec<Scalar>::Kind::Explicit) {
    for (const auto& m : unc.measures) {
      m.validate(n);
      Scalar offset = scalar_traits<Scalar>::zero();
      for (const auto& [mask, w] : m.weights) offset += w * cost_offset(mask);
      add_cost_row(
          [&](Eigen::Index r) {
            Scalar v = scalar_traits<Scalar>::zero();
            for (const auto& [mask, w] : m.weights) v += w * cost_scale * subset_sum_sq(r, mask);
            return v;
          },
          offset);
    }
  } else {
    for (std::uint32_t mask : family_masks)
      add_cost_row([&](Eigen::Index r) { return cost_scale * subset_sum_sq(r, mask); },
                   cost_offset(mask));
  }

  const auto sol = solve(lp);
  TransportSolution<Scalar> out;
  out.status = sol.status;
  if (sol.status != LpStatus::Optimal) {
    if (sol.status == LpStatus::Infeasible)
      throw Error(ErrorCode::LpFailure, "coupling polytope reported infeasible");
    throw Error(ErrorCode::LpFailure, "minimax transport LP did not reach an optimum");
  }
  out.value = sol.primal[tvar];
  out.coupling = detail::coupling_from_primal(grid.points, Vector<Scalar>(sol.primal.head(grid.count)));
  const auto mom = moments(out.coupling);
  out.corr = mom.corr;
  const auto quad = CostSpec<Scalar>::quadratic();
  for (std::uint32_t mask = 1; mask < (std::uint32_t{1} << n); ++mask)
    out.per_subset_costs.emplace_back(mask, detail::subset_cost(out.coupling, quad, mask));
  return out;
}

template <class Scalar>
struct JmFeasibility {
  bool jointly_mixable = false;
  Scalar center{};
  std::optional<DiscreteJoint<Scalar>> coupling;
  Eigen::Index support_size = 0;  // grid atoms on the constant-sum slice
};

/// Joint-mix feasibility: a coupling must concentrate on the slice where
/// the coordinate sum equals the sum of marginal means (the center is
/// forced by linearity).  Optional objective coefficients select among
/// feasible vertices; zero gives the plain feasibility answer.
template <class Scalar>
JmFeasibility<Scalar> solve_jm_feasibility(const std::vector<UnivariateDiscrete<Scalar>>& marginals,
                                           const TransportCaps& caps = {},
                                           const std::optional<Vector<Scalar>>& vertex_objective = {}) {
  const Eigen::Index n = static_cast<Eigen::Index>(marginals.size());
  const auto grid = detail::product_grid(marginals, caps.lp_variable_cap);
  JmFeasibility<Scalar> out;
  for (const auto& m : marginals) out.center += m.mean();

  const Scalar tol = scalar_traits<Scalar>::sum_tolerance();
  std::vector<Eigen::Index> slice;
  for (Eigen::Index r = 0; r < grid.count; ++r) {
    Scalar s = scalar_traits<Scalar>::zero();
    for (Eigen::Index i = 0; i < n; ++i) s += grid.points(r, i);
    if (scalar_traits<Scalar>::abs(s - out.center) <= tol) slice.push_back(r);
  }
  out.support_size = static_cast<Eigen::Index>(slice.size());
  if (slice.empty()) return out;

  Matrix<Scalar> pts(out.support_size, n);
  for (std::size_t k = 0; k < slice.size(); ++k)
    pts.row(static_cast<Eigen::Index>(k)) = grid.points.row(slice[k]);

  LpProblem<Scalar> lp(out.support_size);
  if (vertex_objective) {
    if (vertex_objective->size() != out.support_size)
      throw Error(ErrorCode::DimMismatch, "vertex objective length");
    lp.objective = *vertex_objective;
  }
  detail::add_marginal_rows(lp, pts, marginals, /*extra_vars=*/0);
  const auto sol = solve(lp);
  if (sol.status != LpStatus::Optimal) return out;  // infeasible slice
  out.jointly_mixable = true;
  out.coupling = detail::coupling_from_primal(pts, sol.primal);
  return out;
}

template <class Scalar>
struct SymmetrizationCheck {
  Scalar original{};
  Scalar symmetrized{};
  bool improved = false;  // symmetrized <= original (within tolerance)
};

/// Worst-case objective of the symmetrized coupling never exceeds the
/// original's under a symmetric uncertainty set.
template <class Scalar>
SymmetrizationCheck<Scalar> verify_symmetrization_improvement(const DiscreteJoint<Scalar>& d,
                                                              const UncertaintySpec<Scalar>& unc,
                                                              const CostSpec<Scalar>& cost) {
  if (!unc.is_symmetric())
    throw Error(ErrorCode::NotSymmetricUncertainty,
                "explicit uncertainty set is not permutation-closed");
  SymmetrizationCheck<Scalar> out;
  out.original = objective(d, cost, unc).value;
  out.symmetrized = objective(symmetrize(d), cost, unc).value;
  out.improved = !(out.symmetrized > out.original + scalar_traits<Scalar>::sum_tolerance());
  return out;
}

struct ThmOptEntry {
  int k = 0;                   // 0 encodes the AllSubsets case
  bool unique_corr_expected = false;
  double value = 0.0;
  double expected_value = 0.0;
  double corr_max_deviation = 0.0;  // vs the equicorrelation matrix
  bool pass = false;
};

struct ThmOptReport {
  bool preconditions_ok = false;
  std::string precondition_failure;
  double variance = 0.0;
  std::vector<ThmOptEntry> entries;
  bool all_pass() const {
    if (!preconditions_ok) return false;
    for (const auto& e : entries)
      if (!e.pass) return false;
    return !entries.empty();
  }
};

/// Desk-scale verification of the quadratic minimax optimality statement:
/// with an n-completely-mixable zero-mean marginal, the LP minimizer's
/// correlation matrix is the equicorrelation matrix, and the optimal value
/// is k*(n-k*)/(n-1) Var(F) for AllSubsets and k(n-k)/(n-1) Var(F) for
/// fixed cardinality k outside {1, n-1, n} (where only the value is pinned
/// and the correlation is not unique).
inline ThmOptReport verify_thm_opt(const UnivariateDiscrete<double>& marginal, Eigen::Index n,
                                   const std::vector<int>& k_values, double tol = 1e-6,
                                   const TransportCaps& caps = {}) {
  ThmOptReport rep;
  if (n < 3) {
    rep.precondition_failure = "n must be at least 3";
    return rep;
  }
  if (std::abs(marginal.mean()) > 1e-9) {
    rep.precondition_failure = "marginal mean must be 0";
    return rep;
  }
  rep.variance = marginal.variance();
  if (!(rep.variance > 0)) {
    rep.precondition_failure = "marginal variance must be positive";
    return rep;
  }
  std::vector<UnivariateDiscrete<double>> marginals(static_cast<std::size_t>(n), marginal);
  const auto feas = solve_jm_feasibility(marginals, caps);
  if (!feas.jointly_mixable) {
    rep.precondition_failure = "marginal is not n-completely mixable";
    return rep;
  }
  rep.preconditions_ok = true;

  const auto corr_deviation = [&](const Eigen::MatrixXd& corr) {
    double dev = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (i != j) dev = std::max(dev, std::abs(corr(i, j) + 1.0 / static_cast<double>(n - 1)));
    return dev;
  };

  {
    ThmOptEntry e;
    e.k = 0;
    e.unique_corr_expected = true;
    const Eigen::Index kstar = n / 2;
    e.expected_value =
        static_cast<double>(kstar) * static_cast<double>(n - kstar) / static_cast<double>(n - 1) * rep.variance;
    const auto sol = solve_minimax(marginals, UncertaintySpec<double>::all_subsets(n), CostSpec<double>::quadratic(), caps);
    e.value = sol.value;
    e.corr_max_deviation = corr_deviation(sol.corr);
    e.pass = std::abs(e.value - e.expected_value) <= tol && e.corr_max_deviation <= tol;
    rep.entries.push_back(e);
  }
  for (int k : k_values) {
    if (k < 1 || k > n) throw Error(ErrorCode::BadSubset, "k outside [1, n]");
    ThmOptEntry e;
    e.k = k;
    e.unique_corr_expected = k != 1 && k != n - 1 && k != n;
    e.expected_value = static_cast<double>(k) * static_cast<double>(n - k) /
                       static_cast<double>(n - 1) * rep.variance;
    const auto sol = solve_minimax(marginals, UncertaintySpec<double>::fixed_cardinality(n, k), CostSpec<double>::quadratic(), caps);
    e.value = sol.value;
    e.corr_max_deviation = corr_deviation(sol.corr);
    e.pass = std::abs(e.value - e.expected_value) <= tol &&
             (!e.unique_corr_expected || e.corr_max_deviation <= tol);
    rep.entries.push_back(e);
  }
  return rep;
}

}  // namespace negdep
