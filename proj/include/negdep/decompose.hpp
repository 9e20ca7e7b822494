#pragma once

#include "negdep/discrete.hpp"
#include "negdep/errors.hpp"
#include "negdep/scalar.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <map>
#include <vector>

namespace negdep {

/// Pathwise representation of a finite joint mix as a linear combination of
/// binary multinomial random vectors.  Component k maps every source atom
/// to a {0,1}^n unit vector; `one_position(k, atom)` stores the index of
/// its single 1.  The first `levels().size() - 1` coefficients are the
/// level increments, the optional trailing n coefficients are the shift
/// block (m times each canonical unit vector).
template <class Scalar>
struct BinaryMultinomialDecomposition {
  DiscreteJoint<Scalar> source;
  std::vector<Scalar> coefficients;
  Eigen::MatrixXi one_position;  // component x atom
  std::vector<Scalar> levels;    // v_0 < ... < v_K of the shifted partial sums
  Scalar shift{};                // m; 0 when every coordinate is positive

  Eigen::Index component_count() const { return static_cast<Eigen::Index>(coefficients.size()); }
};

/// Distribution of one component (the pushforward of the source law).
template <class Scalar>
DiscreteJoint<Scalar> component_distribution(const BinaryMultinomialDecomposition<Scalar>& dec,
                                             Eigen::Index k) {
  const Eigen::Index n = dec.source.dim();
  Matrix<Scalar> pts(dec.source.atom_count(), n);
  pts.setConstant(Scalar(0));
  for (Eigen::Index r = 0; r < dec.source.atom_count(); ++r) pts(r, dec.one_position(k, r)) = Scalar(1);
  return DiscreteJoint<Scalar>::make(std::move(pts), Vector<Scalar>(dec.source.probs()));
}

/// Decomposes a finite joint mix into binary multinomial components.
///
/// Constructive route: shift coordinates positive, collect the level set V
/// of all partial sums, and let component k flip exactly where the running
/// sum crosses level v_k.  Coefficients are the level increments; a
/// negative shift m adds m times the n canonical unit vectors.
template <class Scalar>
BinaryMultinomialDecomposition<Scalar> binary_multinomial_decompose(const DiscreteJoint<Scalar>& d) {
  const auto jm = is_joint_mix(d);
  if (!jm.is_joint_mix)
    throw Error(ErrorCode::NotJointMix, "binary multinomial decomposition requires a joint mix");
  const Eigen::Index n = d.dim();
  const Eigen::Index atoms = d.atom_count();

  BinaryMultinomialDecomposition<Scalar> dec;
  dec.source = d;

  Scalar min_coord = d.points()(0, 0);
  for (Eigen::Index r = 0; r < atoms; ++r)
    for (Eigen::Index c = 0; c < n; ++c)
      if (d.points()(r, c) < min_coord) min_coord = d.points()(r, c);
  dec.shift = min_coord > Scalar(0) ? Scalar(0)
                                    : scalar_traits<Scalar>::floor(min_coord) - Scalar(1);

  // partial sums of the shifted atoms; strictly increasing in i
  Matrix<Scalar> psum(atoms, n + 1);
  for (Eigen::Index r = 0; r < atoms; ++r) {
    psum(r, 0) = Scalar(0);
    for (Eigen::Index c = 0; c < n; ++c)
      psum(r, c + 1) = psum(r, c) + (d.points()(r, c) - dec.shift);
  }

  std::vector<Scalar> levels;
  for (Eigen::Index r = 0; r < atoms; ++r)
    for (Eigen::Index c = 0; c <= n; ++c) levels.push_back(psum(r, c));
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  dec.levels = levels;

  const Eigen::Index K = static_cast<Eigen::Index>(levels.size()) - 1;
  const bool shifted = !(dec.shift == Scalar(0));
  dec.coefficients.reserve(static_cast<std::size_t>(K + (shifted ? n : 0)));
  dec.one_position.resize(K + (shifted ? n : 0), atoms);

  for (Eigen::Index k = 1; k <= K; ++k) {
    dec.coefficients.push_back(levels[static_cast<std::size_t>(k)] -
                               levels[static_cast<std::size_t>(k - 1)]);
    for (Eigen::Index r = 0; r < atoms; ++r) {
      Eigen::Index i = 1;
      while (psum(r, i) < levels[static_cast<std::size_t>(k)]) ++i;  // i <= n by v_k <= c'
      dec.one_position(k - 1, r) = static_cast<int>(i - 1);
    }
  }
  if (shifted) {
    for (Eigen::Index c = 0; c < n; ++c) {
      dec.coefficients.push_back(dec.shift);
      for (Eigen::Index r = 0; r < atoms; ++r) dec.one_position(K + c, r) = static_cast<int>(c);
    }
  }
  return dec;
}

/// Rebuilds the joint distribution from a decomposition; exact in rational
/// mode, within accumulated rounding in float mode.
template <class Scalar>
DiscreteJoint<Scalar> recompose(const BinaryMultinomialDecomposition<Scalar>& dec) {
  const Eigen::Index n = dec.source.dim();
  const Eigen::Index atoms = dec.source.atom_count();
  if (dec.one_position.rows() != dec.component_count() || dec.one_position.cols() != atoms)
    throw Error(ErrorCode::InconsistentComponents, "component table shape mismatch");
  Matrix<Scalar> pts(atoms, n);
  pts.setConstant(Scalar(0));
  for (Eigen::Index k = 0; k < dec.component_count(); ++k)
    for (Eigen::Index r = 0; r < atoms; ++r) {
      const int pos = dec.one_position(k, r);
      if (pos < 0 || pos >= n)
        throw Error(ErrorCode::InconsistentComponents, "component entry is not a unit vector");
      pts(r, pos) += dec.coefficients[static_cast<std::size_t>(k)];
    }
  return DiscreteJoint<Scalar>::make(std::move(pts), Vector<Scalar>(dec.source.probs()));
}

/// Mixture-of-orbit-uniforms decomposition of an exchangeable joint mix.
template <class Scalar>
struct OrbitMixture {
  Vector<Scalar> weights;
  Matrix<Scalar> bases;  // one sorted base vector per orbit (rows)
  Scalar center{};
};

template <class Scalar>
OrbitMixture<Scalar> orbit_mixture_decompose(const DiscreteJoint<Scalar>& d,
                                             const Scalar& tol = scalar_traits<Scalar>::sum_tolerance()) {
  const auto jm = is_joint_mix(d, tol);
  if (!jm.is_joint_mix) throw Error(ErrorCode::NotJointMix, "orbit decomposition requires a joint mix");
  if (!is_exchangeable(d, tol))
    throw Error(ErrorCode::NotExchangeable, "orbit decomposition requires exchangeability");

  const Eigen::Index n = d.dim();
  std::map<std::vector<Scalar>, Scalar> orbits;  // sorted coordinates -> mass
  for (Eigen::Index r = 0; r < d.atom_count(); ++r) {
    std::vector<Scalar> key(static_cast<std::size_t>(n));
    for (Eigen::Index c = 0; c < n; ++c) key[static_cast<std::size_t>(c)] = d.points()(r, c);
    std::sort(key.begin(), key.end());
    auto [it, fresh] = orbits.try_emplace(std::move(key), scalar_traits<Scalar>::zero());
    it->second += d.probs()[r];
  }

  OrbitMixture<Scalar> mix;
  mix.center = jm.center;
  mix.weights.resize(static_cast<Eigen::Index>(orbits.size()));
  mix.bases.resize(static_cast<Eigen::Index>(orbits.size()), n);
  Eigen::Index at = 0;
  for (const auto& [key, mass] : orbits) {
    mix.weights[at] = mass;
    for (Eigen::Index c = 0; c < n; ++c) mix.bases(at, c) = key[static_cast<std::size_t>(c)];
    ++at;
  }

  // reconstruction audit: sum of weighted orbit uniforms must equal d
  Eigen::Index rows = 0;
  std::vector<DiscreteJoint<Scalar>> parts;
  for (Eigen::Index o = 0; o < mix.bases.rows(); ++o) {
    parts.push_back(make_orbit_uniform(Vector<Scalar>(mix.bases.row(o).transpose())));
    rows += parts.back().atom_count();
  }
  Matrix<Scalar> pts(rows, n);
  Vector<Scalar> pr(rows);
  Eigen::Index r = 0;
  for (Eigen::Index o = 0; o < mix.bases.rows(); ++o) {
    for (Eigen::Index k = 0; k < parts[static_cast<std::size_t>(o)].atom_count(); ++k, ++r) {
      pts.row(r) = parts[static_cast<std::size_t>(o)].points().row(k);
      pr[r] = mix.weights[o] * parts[static_cast<std::size_t>(o)].probs()[k];
    }
  }
  const auto rebuilt = DiscreteJoint<Scalar>::make(std::move(pts), std::move(pr));
  if (!rebuilt.approx_equal(d, tol))
    throw Error(ErrorCode::NotExchangeable, "orbit reconstruction mismatch");
  return mix;
}

}  // namespace negdep
