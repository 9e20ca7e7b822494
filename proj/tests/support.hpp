#pragma once

// Shared helpers for the test suites: small constructors, random instance
// generators, and brute-force oracles kept independent of the library's
// decision paths.

#include "negdep/dependence.hpp"
#include "negdep/discrete.hpp"
#include "negdep/scalar.hpp"

#include <random>
#include <vector>

namespace testsupport {

using negdep::DiscreteJoint;
using negdep::Matrix;
using negdep::Rational;
using negdep::Vector;

template <class Scalar>
DiscreteJoint<Scalar> joint_from(std::vector<std::vector<Scalar>> rows, std::vector<Scalar> probs) {
  const auto nr = static_cast<Eigen::Index>(rows.size());
  const auto nc = static_cast<Eigen::Index>(rows.front().size());
  Matrix<Scalar> pts(nr, nc);
  for (Eigen::Index r = 0; r < nr; ++r)
    for (Eigen::Index c = 0; c < nc; ++c) pts(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  Vector<Scalar> p(nr);
  for (Eigen::Index r = 0; r < nr; ++r) p[r] = probs[static_cast<std::size_t>(r)];
  return DiscreteJoint<Scalar>::make(std::move(pts), std::move(p));
}

template <class Scalar>
Vector<Scalar> vec(std::vector<Scalar> xs) {
  Vector<Scalar> v(static_cast<Eigen::Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) v[static_cast<Eigen::Index>(i)] = xs[i];
  return v;
}

/// Random distribution with small integer coordinates and rational weights.
inline DiscreteJoint<Rational> random_rational_joint(std::mt19937_64& rng, int n, int max_atoms,
                                                     int coord_span = 2) {
  const int atoms = 1 + static_cast<int>(rng() % static_cast<unsigned>(max_atoms));
  Matrix<Rational> pts(atoms, n);
  Vector<Rational> pr(atoms);
  long long total = 0;
  std::vector<long long> w(static_cast<std::size_t>(atoms));
  for (int r = 0; r < atoms; ++r) {
    for (int c = 0; c < n; ++c)
      pts(r, c) = Rational(static_cast<long long>(rng() % (2 * coord_span + 1)) - coord_span);
    w[static_cast<std::size_t>(r)] = 1 + static_cast<long long>(rng() % 7);
    total += w[static_cast<std::size_t>(r)];
  }
  for (int r = 0; r < atoms; ++r) pr[r] = Rational(w[static_cast<std::size_t>(r)], total);
  return DiscreteJoint<Rational>::make(std::move(pts), std::move(pr));
}

/// Random joint mix: last coordinate balances each atom to a common center.
inline DiscreteJoint<Rational> random_rational_jm(std::mt19937_64& rng, int n, int max_atoms,
                                                  int coord_span = 2) {
  const int atoms = 1 + static_cast<int>(rng() % static_cast<unsigned>(max_atoms));
  const long long center = static_cast<long long>(rng() % 5) - 2;
  Matrix<Rational> pts(atoms, n);
  Vector<Rational> pr(atoms);
  long long total = 0;
  std::vector<long long> w(static_cast<std::size_t>(atoms));
  for (int r = 0; r < atoms; ++r) {
    Rational sum(0);
    for (int c = 0; c + 1 < n; ++c) {
      pts(r, c) = Rational(static_cast<long long>(rng() % (2 * coord_span + 1)) - coord_span);
      sum += pts(r, c);
    }
    pts(r, n - 1) = Rational(center) - sum;
    w[static_cast<std::size_t>(r)] = 1 + static_cast<long long>(rng() % 7);
    total += w[static_cast<std::size_t>(r)];
  }
  for (int r = 0; r < atoms; ++r) pr[r] = Rational(w[static_cast<std::size_t>(r)], total);
  return DiscreteJoint<Rational>::make(std::move(pts), std::move(pr));
}

/// Mixture of orbit uniforms sharing one center: exchangeable and JM.
inline DiscreteJoint<Rational> random_orbit_mixture(std::mt19937_64& rng, int n, int max_orbits = 3,
                                                    int coord_span = 2) {
  const int orbits = 1 + static_cast<int>(rng() % static_cast<unsigned>(max_orbits));
  const long long center = static_cast<long long>(rng() % 3) - 1;
  std::vector<DiscreteJoint<Rational>> parts;
  std::vector<long long> w;
  long long total = 0;
  for (int o = 0; o < orbits; ++o) {
    Vector<Rational> base(n);
    Rational sum(0);
    for (int c = 0; c + 1 < n; ++c) {
      base[c] = Rational(static_cast<long long>(rng() % (2 * coord_span + 1)) - coord_span);
      sum += base[c];
    }
    base[n - 1] = Rational(center) - sum;
    parts.push_back(negdep::make_orbit_uniform(base));
    w.push_back(1 + static_cast<long long>(rng() % 5));
    total += w.back();
  }
  Eigen::Index rows = 0;
  for (const auto& p : parts) rows += p.atom_count();
  Matrix<Rational> pts(rows, n);
  Vector<Rational> pr(rows);
  Eigen::Index at = 0;
  for (std::size_t o = 0; o < parts.size(); ++o) {
    const Rational scale(w[o], total);
    for (Eigen::Index r = 0; r < parts[o].atom_count(); ++r, ++at) {
      pts.row(at) = parts[o].points().row(r);
      pr[at] = scale * parts[o].probs()[r];
    }
  }
  return DiscreteJoint<Rational>::make(std::move(pts), std::move(pr));
}

template <class Scalar>
DiscreteJoint<double> to_float(const DiscreteJoint<Scalar>& d) {
  Matrix<double> pts(d.atom_count(), d.dim());
  Vector<double> pr(d.atom_count());
  for (Eigen::Index r = 0; r < d.atom_count(); ++r) {
    for (Eigen::Index c = 0; c < d.dim(); ++c) pts(r, c) = negdep::to_double(d.points()(r, c));
    pr[r] = negdep::to_double(d.probs()[r]);
  }
  return DiscreteJoint<double>::make(std::move(pts), std::move(pr));
}

/// Brute-force NSD oracle for 2-dimensional grids with few points:
/// exhaustively scans {0,1}-valued supermodular functions.  On bivariate
/// grids these indicators settle the supermodular order against the
/// independent coupling.
template <class Scalar>
bool nsd_oracle_2d(const DiscreteJoint<Scalar>& d, const Scalar& tol) {
  const auto margs = negdep::all_marginals(d);
  const Eigen::Index m0 = margs[0].size(), m1 = margs[1].size();
  const Eigen::Index G = m0 * m1;
  if (d.dim() != 2 || G > 16) throw std::logic_error("oracle limited to small 2-d grids");

  Vector<Scalar> diff = Vector<Scalar>::Zero(G);
  for (Eigen::Index r = 0; r < d.atom_count(); ++r) {
    Eigen::Index i = 0, j = 0;
    while (!(margs[0].support[i] == d.points()(r, 0))) ++i;
    while (!(margs[1].support[j] == d.points()(r, 1))) ++j;
    diff[i * m1 + j] += d.probs()[r];
  }
  for (Eigen::Index i = 0; i < m0; ++i)
    for (Eigen::Index j = 0; j < m1; ++j) diff[i * m1 + j] -= margs[0].probs[i] * margs[1].probs[j];

  for (std::uint32_t bits = 0; bits < (std::uint32_t{1} << G); ++bits) {
    const auto phi = [&](Eigen::Index i, Eigen::Index j) {
      return static_cast<int>((bits >> (i * m1 + j)) & 1u);
    };
    bool supermodular = true;
    for (Eigen::Index i = 0; i + 1 < m0 && supermodular; ++i)
      for (Eigen::Index j = 0; j + 1 < m1 && supermodular; ++j)
        if (phi(i + 1, j + 1) + phi(i, j) < phi(i + 1, j) + phi(i, j + 1)) supermodular = false;
    if (!supermodular) continue;
    Scalar gap = negdep::scalar_traits<Scalar>::zero();
    for (Eigen::Index i = 0; i < m0; ++i)
      for (Eigen::Index j = 0; j < m1; ++j)
        if (phi(i, j)) gap += diff[i * m1 + j];
    if (gap > tol) return false;
  }
  return true;
}

/// Brute-force upper-set enumeration: every subset, filtered by definition.
template <class Scalar>
std::vector<std::uint32_t> upper_sets_oracle(const Matrix<Scalar>& pts) {
  const Eigen::Index m = pts.rows();
  std::vector<std::uint32_t> out;
  const auto leq = [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index k = 0; k < pts.cols(); ++k)
      if (pts(b, k) < pts(a, k)) return false;
    return true;
  };
  for (std::uint32_t s = 0; s < (std::uint32_t{1} << m); ++s) {
    bool ok = true;
    for (Eigen::Index a = 0; a < m && ok; ++a) {
      if (!((s >> a) & 1u)) continue;
      for (Eigen::Index b = 0; b < m && ok; ++b)
        if (b != a && leq(a, b) && !((s >> b) & 1u)) ok = false;
    }
    if (ok) out.push_back(s);
  }
  return out;
}

}  // namespace testsupport
