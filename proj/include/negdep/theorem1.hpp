#pragma once

#include "negdep/dependence.hpp"
#include "negdep/discrete.hpp"

#include <optional>
#include <vector>

namespace negdep {

/// Result of the conditional-structure test: a joint mix whose blocks are
/// conditionally independent given their partial sum (a) and conditionally
/// stochastically increasing in it (b) is negatively associated.
template <class Scalar>
struct Theorem1Report {
  enum class Outcome { Applies, ConditionAFails, ConditionBFails, NotJointMix };
  Outcome outcome = Outcome::NotJointMix;
  Scalar center{};
  std::vector<Eigen::Index> block;  // witnessing subset A
  Scalar s_value{};                 // conditioning value at the failure
  Scalar s_value_next{};            // next conditioning value ((b) only)
  Scalar discrepancy{};             // TV distance or monotonicity drop
  Matrix<Scalar> upper_set;         // member points ((b) only)
  std::optional<bool> na_agrees;    // cross-check against is_na when it ran
};

namespace detail {

template <class Scalar>
struct SumGroups {
  std::vector<Scalar> values;                      // ascending
  std::vector<std::vector<Eigen::Index>> members;  // atom indices per value
  std::vector<Scalar> mass;
};

template <class Scalar>
SumGroups<Scalar> group_by_partial_sum(const DiscreteJoint<Scalar>& d,
                                       const std::vector<Eigen::Index>& block,
                                       const Scalar& tol) {
  std::vector<std::pair<Scalar, Eigen::Index>> sums;
  sums.reserve(static_cast<std::size_t>(d.atom_count()));
  for (Eigen::Index r = 0; r < d.atom_count(); ++r) {
    Scalar s = scalar_traits<Scalar>::zero();
    for (Eigen::Index i : block) s += d.points()(r, i);
    sums.emplace_back(s, r);
  }
  std::sort(sums.begin(), sums.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  SumGroups<Scalar> g;
  for (const auto& [s, r] : sums) {
    if (g.values.empty() || s - g.values.back() > tol) {
      g.values.push_back(s);
      g.members.emplace_back();
      g.mass.push_back(scalar_traits<Scalar>::zero());
    }
    g.members.back().push_back(r);
    g.mass.back() += d.probs()[r];
  }
  return g;
}

}  // namespace detail

template <class Scalar>
Theorem1Report<Scalar> check_theorem1(const DiscreteJoint<Scalar>& d,
                                      const Scalar& tol = scalar_traits<Scalar>::sum_tolerance(),
                                      const CheckOptions& opts = {}) {
  Theorem1Report<Scalar> rep;
  const auto jm = is_joint_mix(d, tol);
  if (!jm.is_joint_mix) {
    rep.outcome = Theorem1Report<Scalar>::Outcome::NotJointMix;
    return rep;
  }
  rep.center = jm.center;

  const Eigen::Index n = d.dim();
  if (n > 20) throw Error(ErrorCode::EnumerationTooLarge, "dimension too large for subset scan");
  const std::uint32_t full = (std::uint32_t{1} << n) - 1;

  // (a) conditional factorization of (X_A, X_B) given S_A = s
  for (std::uint32_t mask = 1; mask < full; ++mask) {
    const auto block_a = detail::mask_to_block(mask, n);
    const auto block_b = detail::mask_to_block(full & ~mask, n);
    const auto pa = detail::project_block(d, block_a);
    const auto pb = detail::project_block(d, block_b);
    const auto groups = detail::group_by_partial_sum(d, block_a, tol);
    for (std::size_t g = 0; g < groups.values.size(); ++g) {
      Matrix<Scalar> joint = Matrix<Scalar>::Zero(pa.points.rows(), pb.points.rows());
      for (Eigen::Index r : groups.members[g])
        joint(pa.atom_to_point[static_cast<std::size_t>(r)],
              pb.atom_to_point[static_cast<std::size_t>(r)]) += d.probs()[r];
      joint /= groups.mass[g];
      const Vector<Scalar> rowm = joint.rowwise().sum();
      const Vector<Scalar> colm = joint.colwise().sum().transpose();
      Scalar tv = scalar_traits<Scalar>::zero();
      for (Eigen::Index x = 0; x < joint.rows(); ++x)
        for (Eigen::Index y = 0; y < joint.cols(); ++y)
          tv += scalar_traits<Scalar>::abs(joint(x, y) - rowm[x] * colm[y]);
      tv /= Scalar(2);
      if (tv > tol) {
        rep.outcome = Theorem1Report<Scalar>::Outcome::ConditionAFails;
        rep.block = block_a;
        rep.s_value = groups.values[g];
        rep.discrepancy = tv;
        return rep;
      }
    }
  }

  // (b) P(X_A in U | S_A = s) nondecreasing in s for every upper set U
  for (std::uint32_t mask = 1; mask < full; ++mask) {
    const auto block_a = detail::mask_to_block(mask, n);
    const auto pa = detail::project_block(d, block_a);
    const auto groups = detail::group_by_partial_sum(d, block_a, tol);
    if (groups.values.size() < 2) continue;
    const auto uppers = detail::upper_sets(pa.points, opts.upper_set_cap);
    for (const auto& u : uppers) {
      Scalar prev = scalar_traits<Scalar>::zero();
      bool have_prev = false;
      for (std::size_t g = 0; g < groups.values.size(); ++g) {
        Scalar q = scalar_traits<Scalar>::zero();
        for (Eigen::Index r : groups.members[g])
          if (u.test(static_cast<std::size_t>(pa.atom_to_point[static_cast<std::size_t>(r)])))
            q += d.probs()[r];
        q /= groups.mass[g];
        if (have_prev && q < prev - tol) {
          rep.outcome = Theorem1Report<Scalar>::Outcome::ConditionBFails;
          rep.block = block_a;
          rep.s_value = groups.values[g - 1];
          rep.s_value_next = groups.values[g];
          rep.discrepancy = prev - q;
          std::vector<Eigen::Index> in;
          for (std::size_t x = 0; x < static_cast<std::size_t>(pa.points.rows()); ++x)
            if (u.test(x)) in.push_back(static_cast<Eigen::Index>(x));
          rep.upper_set.resize(static_cast<Eigen::Index>(in.size()), pa.points.cols());
          for (std::size_t x = 0; x < in.size(); ++x)
            rep.upper_set.row(static_cast<Eigen::Index>(x)) = pa.points.row(in[x]);
          return rep;
        }
        prev = q;
        have_prev = true;
      }
    }
  }

  rep.outcome = Theorem1Report<Scalar>::Outcome::Applies;
  try {
    rep.na_agrees = is_na(d, opts).holds();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EnumerationTooLarge) throw;
  }
  return rep;
}

}  // namespace negdep
