#pragma once

#include "negdep/discrete.hpp"
#include "negdep/errors.hpp"
#include "negdep/lp.hpp"
#include "negdep/scalar.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace negdep {

enum class VerdictStatus { Holds, Fails, Skipped };

inline const char* verdict_status_name(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::Holds: return "holds";
    case VerdictStatus::Fails: return "fails";
    case VerdictStatus::Skipped: return "skipped";
  }
  return "unknown";
}

/// Outcome of one dependence-notion check.  `boundary` marks float verdicts
/// that rested on values inside the zero band.
template <class W>
struct Verdict {
  VerdictStatus status = VerdictStatus::Skipped;
  std::optional<W> witness;
  bool boundary = false;
  std::string skip_reason;

  bool holds() const { return status == VerdictStatus::Holds; }
  bool fails() const { return status == VerdictStatus::Fails; }
  bool skipped() const { return status == VerdictStatus::Skipped; }

  static Verdict make_holds(bool boundary_flag = false) {
    Verdict v;
    v.status = VerdictStatus::Holds;
    v.boundary = boundary_flag;
    return v;
  }
  static Verdict make_fails(W w, bool boundary_flag = false) {
    Verdict v;
    v.status = VerdictStatus::Fails;
    v.witness = std::move(w);
    v.boundary = boundary_flag;
    return v;
  }
  static Verdict make_skipped(std::string reason) {
    Verdict v;
    v.status = VerdictStatus::Skipped;
    v.skip_reason = std::move(reason);
    return v;
  }
};

struct CheckOptions {
  long long grid_cap = 10'000'000;      // orthant evaluation grid points
  long long nsd_grid_cap = 2'000;       // supermodular LP variables
  long long upper_set_cap = 1'000'000;  // upper sets per block and per pair product
};

template <class Scalar>
struct CovPairWitness {
  Eigen::Index i = 0, j = 0;
  Scalar covariance{};
};

template <class Scalar>
struct OrthantWitness {
  Vector<Scalar> threshold;
  Scalar p_joint{}, p_independent{};
  bool upper = false;  // true: P(X > t) side, false: P(X <= t) side
};

template <class Scalar>
struct SupermodularWitness {
  Matrix<Scalar> grid;  // one grid point per row
  Vector<Scalar> phi;   // optimizing supermodular test function
  Scalar gap{};         // E[phi(X)] - E[phi(X_perp)]
};

template <class Scalar>
struct UpperSetWitness {
  std::vector<Eigen::Index> block_a, block_b;
  Matrix<Scalar> upper_a, upper_b;  // member points of the violating upper sets
  Scalar covariance{};
};

template <class Scalar>
struct CtWitness {
  Eigen::Index coord_i = 0, coord_j = 0;
  Vector<Scalar> atom_a, atom_b;
  Scalar product{};
};

namespace detail {

/// Fixed-size bitset over the points of a projected support.
struct PointSet {
  std::vector<std::uint64_t> words;
  explicit PointSet(std::size_t bits = 0) : words((bits + 63) / 64, 0) {}
  void set(std::size_t i) { words[i / 64] |= std::uint64_t{1} << (i % 64); }
  bool test(std::size_t i) const { return (words[i / 64] >> (i % 64)) & 1u; }
};

/// All upper sets of the componentwise order on the given points (rows),
/// including the empty and full sets.  Throws EnumerationTooLarge past cap.
template <class Scalar>
std::vector<PointSet> upper_sets(const Matrix<Scalar>& pts, long long cap) {
  const std::size_t m = static_cast<std::size_t>(pts.rows());
  // topological order: componentwise-smaller points first (sum is a strict
  // monotone of the partial order on distinct points)
  std::vector<std::size_t> topo(m);
  for (std::size_t i = 0; i < m; ++i) topo[i] = i;
  std::sort(topo.begin(), topo.end(), [&](std::size_t a, std::size_t b) {
    Scalar sa = pts.row(static_cast<Eigen::Index>(a)).sum();
    Scalar sb = pts.row(static_cast<Eigen::Index>(b)).sum();
    if (sa < sb) return true;
    if (sb < sa) return false;
    return detail::lex_less_row(pts, static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  });
  const auto leq = [&](std::size_t a, std::size_t b) {
    for (Eigen::Index k = 0; k < pts.cols(); ++k)
      if (pts(static_cast<Eigen::Index>(b), k) < pts(static_cast<Eigen::Index>(a), k)) return false;
    return true;
  };
  // predecessors[i] = indices (in topo position) of points below topo[i]
  std::vector<std::vector<std::size_t>> below(m);
  for (std::size_t bi = 0; bi < m; ++bi)
    for (std::size_t ai = 0; ai < bi; ++ai)
      if (leq(topo[ai], topo[bi])) below[bi].push_back(ai);

  std::vector<PointSet> result;
  std::vector<char> member(m, 0);
  const std::function<void(std::size_t)> rec = [&](std::size_t pos) {
    if (pos == m) {
      PointSet s(m);
      for (std::size_t i = 0; i < m; ++i)
        if (member[i]) s.set(topo[i]);
      if (static_cast<long long>(result.size()) >= cap)
        throw Error(ErrorCode::EnumerationTooLarge,
                    "more than " + std::to_string(cap) + " upper sets");
      result.push_back(std::move(s));
      return;
    }
    member[pos] = 1;  // adding a point to an upper set is always legal
    rec(pos + 1);
    member[pos] = 0;  // omitting requires no smaller member present
    bool ok = true;
    for (std::size_t a : below[pos])
      if (member[a]) {
        ok = false;
        break;
      }
    if (ok) rec(pos + 1);
  };
  rec(0);
  return result;
}

/// Distinct projections of atoms onto a coordinate block.
template <class Scalar>
struct Projection {
  Matrix<Scalar> points;                   // distinct projected points (rows)
  std::vector<Eigen::Index> atom_to_point; // per source atom
  Vector<Scalar> marg;                     // projected marginal probabilities
};

template <class Scalar>
Projection<Scalar> project_block(const DiscreteJoint<Scalar>& d,
                                 const std::vector<Eigen::Index>& block) {
  const Eigen::Index m = d.atom_count();
  const Eigen::Index k = static_cast<Eigen::Index>(block.size());
  Matrix<Scalar> proj(m, k);
  for (Eigen::Index r = 0; r < m; ++r)
    for (Eigen::Index c = 0; c < k; ++c) proj(r, c) = d.points()(r, block[static_cast<std::size_t>(c)]);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return lex_less_row(proj, a, b); });

  Projection<Scalar> out;
  out.atom_to_point.resize(static_cast<std::size_t>(m));
  std::vector<Eigen::Index> reps;
  for (Eigen::Index pos = 0; pos < m; ++pos) {
    const Eigen::Index r = order[static_cast<std::size_t>(pos)];
    if (reps.empty() || !rows_equal(proj, reps.back(), proj, r)) reps.push_back(r);
    out.atom_to_point[static_cast<std::size_t>(r)] = static_cast<Eigen::Index>(reps.size()) - 1;
  }
  out.points.resize(static_cast<Eigen::Index>(reps.size()), k);
  for (std::size_t i = 0; i < reps.size(); ++i) out.points.row(static_cast<Eigen::Index>(i)) = proj.row(reps[i]);
  out.marg = Vector<Scalar>::Zero(static_cast<Eigen::Index>(reps.size()));
  for (Eigen::Index r = 0; r < m; ++r)
    out.marg[out.atom_to_point[static_cast<std::size_t>(r)]] += d.probs()[r];
  return out;
}

inline std::vector<Eigen::Index> mask_to_block(std::uint32_t mask, Eigen::Index n) {
  std::vector<Eigen::Index> block;
  for (Eigen::Index i = 0; i < n; ++i)
    if (mask & (std::uint32_t{1} << i)) block.push_back(i);
  return block;
}

}  // namespace detail

/// NCD: every off-diagonal covariance <= 0.
template <class Scalar>
Verdict<CovPairWitness<Scalar>> is_ncd(const DiscreteJoint<Scalar>& d, const CheckOptions& = {}) {
  const auto mom = moments(d);
  const Scalar band = scalar_traits<Scalar>::sign_band();
  bool boundary = false;
  for (Eigen::Index i = 0; i < d.dim(); ++i) {
    for (Eigen::Index j = i + 1; j < d.dim(); ++j) {
      const Scalar c = mom.cov(i, j);
      if (scalar_traits<Scalar>::abs(c) <= band && !(c == scalar_traits<Scalar>::zero()))
        boundary = true;
      if (c > band)
        return Verdict<CovPairWitness<Scalar>>::make_fails({i, j, c});
    }
  }
  return Verdict<CovPairWitness<Scalar>>::make_holds(boundary);
}

namespace detail {

template <class Scalar>
struct OrthantVerdicts {
  Verdict<OrthantWitness<Scalar>> nlod, nuod;
};

/// Shared scan for NLOD/NUOD.  Thresholds run over the product of marginal
/// supports extended by a below-minimum sentinel per coordinate: both
/// orthant probabilities are piecewise constant with breakpoints only at
/// support values, so this grid is exhaustive.
template <class Scalar>
OrthantVerdicts<Scalar> orthant_scan(const DiscreteJoint<Scalar>& d, const CheckOptions& opts) {
  const Eigen::Index n = d.dim();
  const auto margs = all_marginals(d);

  long long grid_size = 1;
  for (const auto& m : margs) {
    grid_size *= static_cast<long long>(m.size()) + 1;
    if (grid_size > opts.grid_cap)
      throw Error(ErrorCode::GridTooLarge,
                  "orthant grid exceeds " + std::to_string(opts.grid_cap) + " points");
  }

  // rank of each atom coordinate within its marginal support
  Matrix<Scalar> pts = d.points();
  std::vector<std::vector<Eigen::Index>> rank(static_cast<std::size_t>(d.atom_count()),
                                              std::vector<Eigen::Index>(static_cast<std::size_t>(n)));
  for (Eigen::Index r = 0; r < d.atom_count(); ++r)
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& sup = margs[static_cast<std::size_t>(i)].support;
      Eigen::Index lo = 0, hi = sup.size() - 1, found = 0;
      while (lo <= hi) {
        const Eigen::Index mid = (lo + hi) / 2;
        if (sup[mid] < pts(r, i)) {
          lo = mid + 1;
        } else if (pts(r, i) < sup[mid]) {
          hi = mid - 1;
        } else {
          found = mid;
          break;
        }
      }
      rank[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)] = found;
    }

  // cumulative marginal cdf indexed by threshold position (0 = sentinel)
  std::vector<std::vector<Scalar>> cdf(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& m = margs[static_cast<std::size_t>(i)];
    auto& c = cdf[static_cast<std::size_t>(i)];
    c.resize(static_cast<std::size_t>(m.size()) + 1);
    c[0] = scalar_traits<Scalar>::zero();
    for (Eigen::Index k = 0; k < m.size(); ++k)
      c[static_cast<std::size_t>(k) + 1] = c[static_cast<std::size_t>(k)] + m.probs[k];
  }

  const Scalar band = scalar_traits<Scalar>::sign_band();
  const Scalar one(1);
  OrthantVerdicts<Scalar> out;
  bool lod_boundary = false, uod_boundary = false;
  std::optional<OrthantWitness<Scalar>> lod_witness, uod_witness;

  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n), 0);  // 0 = sentinel
  while (true) {
    Scalar p_lo_ind = one, p_up_ind = one;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& c = cdf[static_cast<std::size_t>(i)];
      p_lo_ind *= c[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
      p_up_ind *= c.back() - c[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
    }
    Scalar p_lo = scalar_traits<Scalar>::zero(), p_up = scalar_traits<Scalar>::zero();
    for (Eigen::Index r = 0; r < d.atom_count(); ++r) {
      bool below = true, above = true;
      for (Eigen::Index i = 0; i < n && (below || above); ++i) {
        const Eigen::Index t = idx[static_cast<std::size_t>(i)];
        const Eigen::Index rk = rank[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)];
        if (rk + 1 > t) below = false;  // x_i <= threshold fails
        if (rk + 1 <= t) above = false; // x_i > threshold fails
      }
      if (below) p_lo += d.probs()[r];
      if (above) p_up += d.probs()[r];
    }

    const auto threshold_of = [&]() {
      Vector<Scalar> t(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto& m = margs[static_cast<std::size_t>(i)];
        const Eigen::Index k = idx[static_cast<std::size_t>(i)];
        t[i] = k == 0 ? Scalar(m.support[0] - Scalar(1)) : Scalar(m.support[k - 1]);
      }
      return t;
    };
    if (!lod_witness && p_lo > p_lo_ind + band)
      lod_witness = OrthantWitness<Scalar>{threshold_of(), p_lo, p_lo_ind, false};
    if (!uod_witness && p_up > p_up_ind + band)
      uod_witness = OrthantWitness<Scalar>{threshold_of(), p_up, p_up_ind, true};
    const Scalar dl = p_lo - p_lo_ind, du = p_up - p_up_ind;
    if (scalar_traits<Scalar>::abs(dl) <= band && !(dl == scalar_traits<Scalar>::zero())) lod_boundary = true;
    if (scalar_traits<Scalar>::abs(du) <= band && !(du == scalar_traits<Scalar>::zero())) uod_boundary = true;
    if (lod_witness && uod_witness) break;

    Eigen::Index i = n - 1;
    for (; i >= 0; --i) {
      auto& k = idx[static_cast<std::size_t>(i)];
      if (++k <= margs[static_cast<std::size_t>(i)].size()) break;
      k = 0;
    }
    if (i < 0) break;
  }

  out.nlod = lod_witness ? Verdict<OrthantWitness<Scalar>>::make_fails(*lod_witness, lod_boundary)
                         : Verdict<OrthantWitness<Scalar>>::make_holds(lod_boundary);
  out.nuod = uod_witness ? Verdict<OrthantWitness<Scalar>>::make_fails(*uod_witness, uod_boundary)
                         : Verdict<OrthantWitness<Scalar>>::make_holds(uod_boundary);
  return out;
}

}  // namespace detail

template <class Scalar>
Verdict<OrthantWitness<Scalar>> is_nlod(const DiscreteJoint<Scalar>& d, const CheckOptions& opts = {}) {
  return detail::orthant_scan(d, opts).nlod;
}

template <class Scalar>
Verdict<OrthantWitness<Scalar>> is_nuod(const DiscreteJoint<Scalar>& d, const CheckOptions& opts = {}) {
  return detail::orthant_scan(d, opts).nuod;
}

/// NOD = NLOD and NUOD.
template <class Scalar>
Verdict<OrthantWitness<Scalar>> is_nod(const DiscreteJoint<Scalar>& d, const CheckOptions& opts = {}) {
  auto both = detail::orthant_scan(d, opts);
  if (both.nlod.fails()) return both.nlod;
  if (both.nuod.fails()) return both.nuod;
  return Verdict<OrthantWitness<Scalar>>::make_holds(both.nlod.boundary || both.nuod.boundary);
}

/// NSD via a decision LP over supermodular test functions on the support
/// grid.  Adjacent-pair increment constraints characterize supermodularity
/// on a finite lattice, and phi == 0 is feasible, so the optimum is the
/// largest achievable gap E[phi(X)] - E[phi(X_perp)] over phi in [-1,1]^G.
template <class Scalar>
Verdict<SupermodularWitness<Scalar>> is_nsd(const DiscreteJoint<Scalar>& d,
                                            const CheckOptions& opts = {},
                                            const Scalar& tol = scalar_traits<Scalar>::sum_tolerance()) {
  const Eigen::Index n = d.dim();
  const auto margs = all_marginals(d);

  long long grid_size = 1;
  for (const auto& m : margs) {
    grid_size *= static_cast<long long>(m.size());
    if (grid_size > opts.nsd_grid_cap)
      throw Error(ErrorCode::GridTooLarge,
                  "supermodular grid exceeds " + std::to_string(opts.nsd_grid_cap) + " points");
  }
  const Eigen::Index G = static_cast<Eigen::Index>(grid_size);

  std::vector<Eigen::Index> sizes(static_cast<std::size_t>(n));
  std::vector<Eigen::Index> stride(static_cast<std::size_t>(n));
  Eigen::Index acc = 1;
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    sizes[static_cast<std::size_t>(i)] = margs[static_cast<std::size_t>(i)].size();
    stride[static_cast<std::size_t>(i)] = acc;
    acc *= sizes[static_cast<std::size_t>(i)];
  }

  const auto coord_rank = [&](Eigen::Index atom, Eigen::Index i) {
    const auto& sup = margs[static_cast<std::size_t>(i)].support;
    for (Eigen::Index k = 0; k < sup.size(); ++k)
      if (sup[k] == d.points()(atom, i)) return k;
    throw Error(ErrorCode::LpFailure, "atom coordinate missing from marginal support");
  };

  Vector<Scalar> diff = Vector<Scalar>::Zero(G);  // p_X - p_perp on the grid
  for (Eigen::Index r = 0; r < d.atom_count(); ++r) {
    Eigen::Index g = 0;
    for (Eigen::Index i = 0; i < n; ++i) g += coord_rank(r, i) * stride[static_cast<std::size_t>(i)];
    diff[g] += d.probs()[r];
  }
  {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n), 0);
    for (Eigen::Index g = 0; g < G; ++g) {
      Scalar p(1);
      for (Eigen::Index i = 0; i < n; ++i) p *= margs[static_cast<std::size_t>(i)].probs[idx[static_cast<std::size_t>(i)]];
      diff[g] -= p;
      for (Eigen::Index i = n - 1; i >= 0; --i) {
        auto& k = idx[static_cast<std::size_t>(i)];
        if (++k < sizes[static_cast<std::size_t>(i)]) break;
        k = 0;
      }
    }
  }

  LpProblem<Scalar> lp(G);
  lp.maximize = true;
  lp.objective = diff;
  for (Eigen::Index g = 0; g < G; ++g) {
    lp.lower[static_cast<std::size_t>(g)] = Scalar(-1);
    lp.upper[static_cast<std::size_t>(g)] = Scalar(1);
  }
  {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n), 0);
    for (Eigen::Index g = 0; g < G; ++g) {
      for (Eigen::Index a = 0; a < n; ++a) {
        if (idx[static_cast<std::size_t>(a)] + 1 >= sizes[static_cast<std::size_t>(a)]) continue;
        for (Eigen::Index b = a + 1; b < n; ++b) {
          if (idx[static_cast<std::size_t>(b)] + 1 >= sizes[static_cast<std::size_t>(b)]) continue;
          Vector<Scalar> row = Vector<Scalar>::Zero(G);
          const Eigen::Index ga = g + stride[static_cast<std::size_t>(a)];
          const Eigen::Index gb = g + stride[static_cast<std::size_t>(b)];
          const Eigen::Index gab = ga + stride[static_cast<std::size_t>(b)];
          row[gab] += Scalar(1);
          row[g] += Scalar(1);
          row[ga] -= Scalar(1);
          row[gb] -= Scalar(1);
          lp.add_row(std::move(row), Relation::GreaterEq, scalar_traits<Scalar>::zero());
        }
      }
      for (Eigen::Index i = n - 1; i >= 0; --i) {
        auto& k = idx[static_cast<std::size_t>(i)];
        if (++k < sizes[static_cast<std::size_t>(i)]) break;
        k = 0;
      }
    }
  }

  const auto sol = solve(lp);
  if (sol.status != LpStatus::Optimal)
    throw Error(ErrorCode::LpFailure, std::string("supermodular LP ") + lp_status_name(sol.status));

  // The optimizing phi is reported either way: on a pass it certifies the
  // optimum, on a failure it is the violating supermodular function.
  SupermodularWitness<Scalar> w;
  w.grid.resize(G, n);
  {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n), 0);
    for (Eigen::Index g = 0; g < G; ++g) {
      for (Eigen::Index i = 0; i < n; ++i)
        w.grid(g, i) = margs[static_cast<std::size_t>(i)].support[idx[static_cast<std::size_t>(i)]];
      for (Eigen::Index i = n - 1; i >= 0; --i) {
        auto& k = idx[static_cast<std::size_t>(i)];
        if (++k < sizes[static_cast<std::size_t>(i)]) break;
        k = 0;
      }
    }
  }
  w.phi = sol.primal;
  w.gap = sol.value;
  if (sol.value <= tol) {
    auto v = Verdict<SupermodularWitness<Scalar>>::make_holds();
    v.witness = std::move(w);
    return v;
  }
  return Verdict<SupermodularWitness<Scalar>>::make_fails(std::move(w));
}

/// NA restricted to two-block partitions (the Theorem-1 style reduction:
/// increasing functions factor through the blocks they depend on).  On a
/// finite support, increasing indicator tests over upper sets exhaust the
/// increasing functions up to positive combinations and constants.
template <class Scalar>
Verdict<UpperSetWitness<Scalar>> is_na(const DiscreteJoint<Scalar>& d, const CheckOptions& opts = {}) {
  const Eigen::Index n = d.dim();
  if (n > 20) throw Error(ErrorCode::EnumerationTooLarge, "dimension too large for partition scan");
  const Scalar band = scalar_traits<Scalar>::sign_band();
  bool boundary = false;

  const std::uint32_t full = (std::uint32_t{1} << n) - 1;
  for (std::uint32_t mask = 1; mask < full; ++mask) {
    if (!(mask & 1u)) continue;  // unordered partitions: block A holds coordinate 0
    const auto block_a = detail::mask_to_block(mask, n);
    const auto block_b = detail::mask_to_block(full & ~mask, n);
    const auto pa = detail::project_block(d, block_a);
    const auto pb = detail::project_block(d, block_b);

    const auto ua = detail::upper_sets(pa.points, opts.upper_set_cap);
    const auto ub = detail::upper_sets(pb.points, opts.upper_set_cap);
    if (static_cast<long long>(ua.size()) * static_cast<long long>(ub.size()) > opts.upper_set_cap)
      throw Error(ErrorCode::EnumerationTooLarge, "upper-set pair count exceeds cap");

    const std::size_t mb = static_cast<std::size_t>(pb.points.rows());
    std::vector<Scalar> tv(ub.size());
    for (std::size_t v = 0; v < ub.size(); ++v) {
      Scalar t = scalar_traits<Scalar>::zero();
      for (std::size_t y = 0; y < mb; ++y)
        if (ub[v].test(y)) t += pb.marg[static_cast<Eigen::Index>(y)];
      tv[v] = t;
    }

    std::vector<Scalar> ru(mb);
    for (std::size_t u = 0; u < ua.size(); ++u) {
      // skip trivial sets: constant indicators have zero covariance
      Scalar su = scalar_traits<Scalar>::zero();
      std::size_t ucount = 0;
      for (std::size_t x = 0; x < static_cast<std::size_t>(pa.points.rows()); ++x)
        if (ua[u].test(x)) {
          su += pa.marg[static_cast<Eigen::Index>(x)];
          ++ucount;
        }
      if (ucount == 0 || ucount == static_cast<std::size_t>(pa.points.rows())) continue;

      std::fill(ru.begin(), ru.end(), scalar_traits<Scalar>::zero());
      for (Eigen::Index r = 0; r < d.atom_count(); ++r)
        if (ua[u].test(static_cast<std::size_t>(pa.atom_to_point[static_cast<std::size_t>(r)])))
          ru[static_cast<std::size_t>(pb.atom_to_point[static_cast<std::size_t>(r)])] += d.probs()[r];

      for (std::size_t v = 0; v < ub.size(); ++v) {
        Scalar joint = scalar_traits<Scalar>::zero();
        for (std::size_t y = 0; y < mb; ++y)
          if (ub[v].test(y)) joint += ru[y];
        const Scalar cov = joint - su * tv[v];
        if (scalar_traits<Scalar>::abs(cov) <= band && !(cov == scalar_traits<Scalar>::zero()))
          boundary = true;
        if (cov > band) {
          UpperSetWitness<Scalar> w;
          w.block_a = block_a;
          w.block_b = block_b;
          w.covariance = cov;
          std::vector<Eigen::Index> ai, bi;
          for (std::size_t x = 0; x < static_cast<std::size_t>(pa.points.rows()); ++x)
            if (ua[u].test(x)) ai.push_back(static_cast<Eigen::Index>(x));
          for (std::size_t y = 0; y < mb; ++y)
            if (ub[v].test(y)) bi.push_back(static_cast<Eigen::Index>(y));
          w.upper_a.resize(static_cast<Eigen::Index>(ai.size()), pa.points.cols());
          for (std::size_t x = 0; x < ai.size(); ++x) w.upper_a.row(static_cast<Eigen::Index>(x)) = pa.points.row(ai[x]);
          w.upper_b.resize(static_cast<Eigen::Index>(bi.size()), pb.points.cols());
          for (std::size_t y = 0; y < bi.size(); ++y) w.upper_b.row(static_cast<Eigen::Index>(y)) = pb.points.row(bi[y]);
          return Verdict<UpperSetWitness<Scalar>>::make_fails(std::move(w), boundary);
        }
      }
    }
  }
  return Verdict<UpperSetWitness<Scalar>>::make_holds(boundary);
}

/// CT: every coordinate pair is countermonotonic across the support.
template <class Scalar>
Verdict<CtWitness<Scalar>> is_ct(const DiscreteJoint<Scalar>& d, const CheckOptions& = {}) {
  const Scalar band = scalar_traits<Scalar>::sign_band();
  bool boundary = false;
  for (Eigen::Index r = 0; r < d.atom_count(); ++r) {
    for (Eigen::Index s = r + 1; s < d.atom_count(); ++s) {
      for (Eigen::Index i = 0; i < d.dim(); ++i) {
        for (Eigen::Index j = i + 1; j < d.dim(); ++j) {
          const Scalar prod =
              (d.points()(r, i) - d.points()(s, i)) * (d.points()(r, j) - d.points()(s, j));
          if (scalar_traits<Scalar>::abs(prod) <= band && !(prod == scalar_traits<Scalar>::zero()))
            boundary = true;
          if (prod > band) {
            CtWitness<Scalar> w;
            w.coord_i = i;
            w.coord_j = j;
            w.atom_a = d.points().row(r).transpose();
            w.atom_b = d.points().row(s).transpose();
            w.product = prod;
            return Verdict<CtWitness<Scalar>>::make_fails(std::move(w), boundary);
          }
        }
      }
    }
  }
  return Verdict<CtWitness<Scalar>>::make_holds(boundary);
}

template <class Scalar>
struct DependenceReport {
  JointMixResult<Scalar> jm;
  Verdict<CtWitness<Scalar>> ct;
  Verdict<UpperSetWitness<Scalar>> na;
  Verdict<SupermodularWitness<Scalar>> nsd;
  Verdict<OrthantWitness<Scalar>> nod;
  Verdict<OrthantWitness<Scalar>> nuod;
  Verdict<OrthantWitness<Scalar>> nlod;
  Verdict<CovPairWitness<Scalar>> ncd;
  std::string backend;
};

/// Runs every checker; cap overruns demote a notion to skipped instead of
/// aborting the report.
template <class Scalar>
DependenceReport<Scalar> check_all(const DiscreteJoint<Scalar>& d, const CheckOptions& opts = {}) {
  DependenceReport<Scalar> rep;
  rep.backend = scalar_traits<Scalar>::backend_name();
  rep.jm = is_joint_mix(d);
  const auto guarded = [&](auto&& fn, auto& slot) {
    using VerdictType = std::decay_t<decltype(slot)>;
    try {
      slot = fn();
    } catch (const Error& e) {
      if (e.code() == ErrorCode::GridTooLarge || e.code() == ErrorCode::EnumerationTooLarge)
        slot = VerdictType::make_skipped(e.what());
      else
        throw;
    }
  };
  guarded([&] { return is_ct(d, opts); }, rep.ct);
  guarded([&] { return is_na(d, opts); }, rep.na);
  guarded([&] { return is_nsd(d, opts); }, rep.nsd);
  try {
    const auto both = detail::orthant_scan(d, opts);
    rep.nlod = both.nlod;
    rep.nuod = both.nuod;
    if (rep.nlod.fails())
      rep.nod = rep.nlod;
    else if (rep.nuod.fails())
      rep.nod = rep.nuod;
    else
      rep.nod = Verdict<OrthantWitness<Scalar>>::make_holds(rep.nlod.boundary || rep.nuod.boundary);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::GridTooLarge) throw;
    rep.nlod = Verdict<OrthantWitness<Scalar>>::make_skipped(e.what());
    rep.nuod = rep.nlod;
    rep.nod = rep.nlod;
  }
  guarded([&] { return is_ncd(d, opts); }, rep.ncd);
  return rep;
}

struct ChainViolation {
  std::string antecedent;
  std::string consequent;
};

template <class Scalar>
struct ChainReport {
  DependenceReport<Scalar> report;
  std::vector<ChainViolation> violations;
  bool consistent() const { return violations.empty(); }
};

/// Audits the implication chain CT => NA => NSD => NOD => (NUOD and NLOD)
/// => NCD, plus JM => CT when n = 2.  A violation indicts the checkers, not
/// the distribution.
template <class Scalar>
ChainReport<Scalar> check_chain(const DiscreteJoint<Scalar>& d, const CheckOptions& opts = {}) {
  ChainReport<Scalar> out;
  out.report = check_all(d, opts);
  const auto& r = out.report;
  const auto imply = [&](const char* name_a, bool a_holds, bool a_usable, const char* name_b,
                         bool b_holds, bool b_usable) {
    if (a_usable && b_usable && a_holds && !b_holds) out.violations.push_back({name_a, name_b});
  };
  const auto usable = [](const auto& v) { return !v.skipped(); };
  imply("CT", r.ct.holds(), usable(r.ct), "NA", r.na.holds(), usable(r.na));
  imply("NA", r.na.holds(), usable(r.na), "NSD", r.nsd.holds(), usable(r.nsd));
  imply("NSD", r.nsd.holds(), usable(r.nsd), "NOD", r.nod.holds(), usable(r.nod));
  imply("NOD", r.nod.holds(), usable(r.nod), "NUOD", r.nuod.holds(), usable(r.nuod));
  imply("NOD", r.nod.holds(), usable(r.nod), "NLOD", r.nlod.holds(), usable(r.nlod));
  imply("NUOD", r.nuod.holds(), usable(r.nuod), "NCD", r.ncd.holds(), usable(r.ncd));
  imply("NLOD", r.nlod.holds(), usable(r.nlod), "NCD", r.ncd.holds(), usable(r.ncd));
  if (d.dim() == 2)
    imply("JM", r.jm.is_joint_mix, true, "CT", r.ct.holds(), usable(r.ct));
  return out;
}

}  // namespace negdep
