#pragma once

#include "negdep/decompose.hpp"
#include "negdep/dependence.hpp"
#include "negdep/discrete.hpp"
#include "negdep/elliptical.hpp"
#include "negdep/errors.hpp"
#include "negdep/gaussian.hpp"
#include "negdep/scalar.hpp"
#include "negdep/theorem1.hpp"
#include "negdep/transport.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace negdep::io {

using nlohmann::json;

inline json scalar_to_json(double x) { return json(x); }
inline json scalar_to_json(const Rational& x) { return json(x.str()); }

template <class Scalar>
Scalar scalar_from_json(const json& j);

template <>
inline double scalar_from_json<double>(const json& j) {
  if (j.is_number()) return j.get<double>();
  throw Error(ErrorCode::ParseError, "expected a number, got " + j.dump());
}

template <>
inline Rational scalar_from_json<Rational>(const json& j) {
  if (j.is_string()) return Rational::parse(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<long long>());
  if (j.is_number_float()) return Rational::from_double(j.get<double>());  // exact dyadic
  throw Error(ErrorCode::ParseError, "expected a rational literal, got " + j.dump());
}

template <class Scalar>
json vector_to_json(const Vector<Scalar>& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(scalar_to_json(v[i]));
  return out;
}

inline json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

template <class Scalar>
json matrix_to_json(const Matrix<Scalar>& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(scalar_to_json(m(r, c)));
    out.push_back(std::move(row));
  }
  return out;
}

inline json matrix_to_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

template <class Scalar>
Vector<Scalar> vector_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "expected an array");
  Vector<Scalar> v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = scalar_from_json<Scalar>(j[i]);
  return v;
}

inline Eigen::MatrixXd matrixxd_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw Error(ErrorCode::ParseError, "expected a matrix");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j[static_cast<std::size_t>(r)].size()) != cols)
      throw Error(ErrorCode::ParseError, "ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = scalar_from_json<double>(j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]);
  }
  return m;
}

// ---------------------------------------------------------------------------
// DiscreteJoint: {"dim": n, "atoms": [{"x": [...], "p": ...}], "number_mode": ...}

template <class Scalar>
json joint_to_json(const DiscreteJoint<Scalar>& d) {
  json atoms = json::array();
  for (Eigen::Index r = 0; r < d.atom_count(); ++r) {
    json x = json::array();
    for (Eigen::Index c = 0; c < d.dim(); ++c) x.push_back(scalar_to_json(d.points()(r, c)));
    atoms.push_back(json{{"x", std::move(x)}, {"p", scalar_to_json(d.probs()[r])}});
  }
  return json{{"dim", d.dim()},
              {"atoms", std::move(atoms)},
              {"number_mode", scalar_traits<Scalar>::backend_name()}};
}

template <class Scalar>
DiscreteJoint<Scalar> joint_from_json(const json& j) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("atoms"))
    throw Error(ErrorCode::ParseError, "distribution needs 'dim' and 'atoms'");
  const auto dim = j.at("dim").get<Eigen::Index>();
  const auto& atoms = j.at("atoms");
  if (!atoms.is_array() || atoms.empty()) throw Error(ErrorCode::ParseError, "'atoms' must be a nonempty array");
  Matrix<Scalar> pts(static_cast<Eigen::Index>(atoms.size()), dim);
  Vector<Scalar> probs(static_cast<Eigen::Index>(atoms.size()));
  for (std::size_t r = 0; r < atoms.size(); ++r) {
    const auto& a = atoms[r];
    if (!a.contains("x") || !a.contains("p")) throw Error(ErrorCode::ParseError, "atom needs 'x' and 'p'");
    const auto& x = a.at("x");
    if (static_cast<Eigen::Index>(x.size()) != dim)
      throw Error(ErrorCode::DimMismatch, "atom " + std::to_string(r) + " has wrong length");
    for (Eigen::Index c = 0; c < dim; ++c)
      pts(static_cast<Eigen::Index>(r), c) = scalar_from_json<Scalar>(x[static_cast<std::size_t>(c)]);
    probs[static_cast<Eigen::Index>(r)] = scalar_from_json<Scalar>(a.at("p"));
  }
  return DiscreteJoint<Scalar>::make(std::move(pts), std::move(probs));
}

/// number_mode of a serialized distribution or marginal file ("float" when absent).
inline std::string number_mode_of(const json& j) {
  return j.is_object() && j.contains("number_mode") ? j.at("number_mode").get<std::string>()
                                                    : std::string("float");
}

// ---------------------------------------------------------------------------
// Marginal lists: {"marginals": [{"support": [...], "probs": [...]}], "number_mode": ...}

template <class Scalar>
json marginals_to_json(const std::vector<UnivariateDiscrete<Scalar>>& ms) {
  json arr = json::array();
  for (const auto& m : ms)
    arr.push_back(json{{"support", vector_to_json(m.support)}, {"probs", vector_to_json(m.probs)}});
  return json{{"marginals", std::move(arr)}, {"number_mode", scalar_traits<Scalar>::backend_name()}};
}

template <class Scalar>
std::vector<UnivariateDiscrete<Scalar>> marginals_from_json(const json& j) {
  if (!j.is_object() || !j.contains("marginals"))
    throw Error(ErrorCode::ParseError, "marginal file needs a 'marginals' array");
  std::vector<UnivariateDiscrete<Scalar>> out;
  for (const auto& mj : j.at("marginals")) {
    UnivariateDiscrete<Scalar> m;
    m.support = vector_from_json<Scalar>(mj.at("support"));
    m.probs = vector_from_json<Scalar>(mj.at("probs"));
    if (m.support.size() != m.probs.size())
      throw Error(ErrorCode::DimMismatch, "support/probs length mismatch");
    Scalar mass = scalar_traits<Scalar>::zero();
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      if (i > 0 && !(m.support[i - 1] < m.support[i]))
        throw Error(ErrorCode::ParseError, "support must be strictly increasing");
      if (m.probs[i] < scalar_traits<Scalar>::zero())
        throw Error(ErrorCode::NegativeProb, "marginal probability");
      mass += m.probs[i];
    }
    if (scalar_traits<Scalar>::abs(mass - Scalar(1)) > scalar_traits<Scalar>::mass_tolerance())
      throw Error(ErrorCode::MassNotOne, "marginal mass");
    out.push_back(std::move(m));
  }
  if (out.empty()) throw Error(ErrorCode::ParseError, "no marginals given");
  return out;
}

// ---------------------------------------------------------------------------
// CovModel / EllipticalSpec:
// {"mean": [...], "cov": [[...]], "family": {"tag": ..., ...}}

inline json family_to_json(const Family& f) {
  switch (f.tag) {
    case Family::Tag::Gaussian: return json{{"tag", "gaussian"}};
    case Family::Tag::StudentT: return json{{"tag", "student_t"}, {"nu", f.nu}};
    case Family::Tag::ScaleMixture:
      return json{{"tag", "scale_mixture"},
                  {"scales", vector_to_json(f.mixture_scales)},
                  {"weights", vector_to_json(f.mixture_weights)}};
  }
  return json{};
}

inline Family family_from_json(const json& j) {
  if (!j.is_object() || !j.contains("tag")) throw Error(ErrorCode::ParseError, "family needs a 'tag'");
  const auto tag = j.at("tag").get<std::string>();
  if (tag == "gaussian") return Family::gaussian();
  if (tag == "student_t") return Family::student_t(j.at("nu").get<double>());
  if (tag == "scale_mixture") {
    Eigen::VectorXd scales = vector_from_json<double>(j.at("scales"));
    Eigen::VectorXd weights = vector_from_json<double>(j.at("weights"));
    if (scales.size() != weights.size())
      throw Error(ErrorCode::DimMismatch, "scales/weights length mismatch");
    if ((scales.array() < 0).any() || (weights.array() < 0).any())
      throw Error(ErrorCode::ParseError, "scale mixture entries must be nonnegative");
    if (std::abs(weights.sum() - 1.0) > 1e-12)
      throw Error(ErrorCode::ParseError, "scale mixture weights must sum to 1");
    return Family::scale_mixture(std::move(scales), std::move(weights));
  }
  throw Error(ErrorCode::ParseError, "unknown family tag '" + tag + "'");
}

inline json cov_model_to_json(const CovModel& m) {
  return json{{"mean", vector_to_json(m.mean)},
              {"cov", matrix_to_json(m.cov)},
              {"family", family_to_json(m.family)}};
}

inline CovModel cov_model_from_json(const json& j) {
  CovModel m;
  if (!j.is_object() || !j.contains("mean") || !j.contains("cov"))
    throw Error(ErrorCode::ParseError, "model needs 'mean' and 'cov'");
  m.mean = vector_from_json<double>(j.at("mean"));
  m.cov = matrixxd_from_json(j.at("cov"));
  if (m.cov.rows() != m.mean.size() || m.cov.cols() != m.mean.size())
    throw Error(ErrorCode::DimMismatch, "mean/cov shape mismatch");
  m.family = j.contains("family") ? family_from_json(j.at("family")) : Family::gaussian();
  return m;
}

inline EllipticalSpec elliptical_from_json(const json& j) {
  const CovModel m = cov_model_from_json(j);
  return EllipticalSpec{m.mean, m.cov, m.family};
}

// ---------------------------------------------------------------------------
// UncertaintySpec files: {"measures": [{"weights": [{"subset": [0,2], "w": 0.5}, ...]}]}

template <class Scalar>
json subset_to_json(std::uint32_t mask, Eigen::Index n) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < n; ++i)
    if (mask & (std::uint32_t{1} << i)) arr.push_back(i);
  return arr;
}

template <class Scalar>
UncertaintySpec<Scalar> uncertainty_from_json(const json& j, Eigen::Index n) {
  if (!j.is_object() || !j.contains("measures"))
    throw Error(ErrorCode::ParseError, "uncertainty file needs a 'measures' array");
  std::vector<SubsetMeasure<Scalar>> measures;
  for (const auto& mj : j.at("measures")) {
    SubsetMeasure<Scalar> m;
    for (const auto& wj : mj.at("weights")) {
      std::uint32_t mask = 0;
      for (const auto& idx : wj.at("subset")) {
        const auto i = idx.get<Eigen::Index>();
        if (i < 0 || i >= n) throw Error(ErrorCode::BadSubset, "subset index out of range");
        mask |= std::uint32_t{1} << i;
      }
      m.weights.emplace_back(mask, scalar_from_json<Scalar>(wj.at("w")));
    }
    measures.push_back(m.canonical());
  }
  return UncertaintySpec<Scalar>::explicit_measures(n, std::move(measures));
}

// ---------------------------------------------------------------------------
// Reports

template <class W>
json verdict_to_json(const Verdict<W>& v, const json& witness_json) {
  json out{{"status", verdict_status_name(v.status)}};
  if (v.boundary) out["boundary"] = true;
  if (v.fails() && !witness_json.is_null()) out["witness"] = witness_json;
  if (v.skipped()) out["reason"] = v.skip_reason;
  return out;
}

template <class Scalar>
json report_to_json(const DependenceReport<Scalar>& r) {
  json out;
  out["backend"] = r.backend;

  json jm{{"status", r.jm.is_joint_mix ? "holds" : "fails"}};
  if (r.jm.is_joint_mix)
    jm["center"] = scalar_to_json(r.jm.center);
  else
    jm["witness"] = json{{"sum_low", scalar_to_json(r.jm.sum_low)},
                         {"sum_high", scalar_to_json(r.jm.sum_high)}};
  out["JM"] = std::move(jm);

  json ct_witness;
  if (r.ct.witness)
    ct_witness = json{{"i", r.ct.witness->coord_i},
                      {"j", r.ct.witness->coord_j},
                      {"atom_a", vector_to_json(r.ct.witness->atom_a)},
                      {"atom_b", vector_to_json(r.ct.witness->atom_b)},
                      {"product", scalar_to_json(r.ct.witness->product)}};
  out["CT"] = verdict_to_json(r.ct, ct_witness);

  json na_witness;
  if (r.na.witness)
    na_witness = json{{"block_a", r.na.witness->block_a},
                      {"block_b", r.na.witness->block_b},
                      {"upper_a", matrix_to_json(r.na.witness->upper_a)},
                      {"upper_b", matrix_to_json(r.na.witness->upper_b)},
                      {"covariance", scalar_to_json(r.na.witness->covariance)}};
  out["NA"] = verdict_to_json(r.na, na_witness);

  json nsd_witness;
  if (r.nsd.witness && r.nsd.fails())
    nsd_witness = json{{"gap", scalar_to_json(r.nsd.witness->gap)},
                       {"grid", matrix_to_json(r.nsd.witness->grid)},
                       {"phi", vector_to_json(r.nsd.witness->phi)}};
  json nsd = verdict_to_json(r.nsd, nsd_witness);
  if (r.nsd.witness) nsd["lp_optimum"] = scalar_to_json(r.nsd.witness->gap);
  out["NSD"] = std::move(nsd);

  const auto orthant = [](const Verdict<OrthantWitness<Scalar>>& v) {
    json w;
    if (v.witness)
      w = json{{"threshold", vector_to_json(v.witness->threshold)},
               {"p_joint", scalar_to_json(v.witness->p_joint)},
               {"p_independent", scalar_to_json(v.witness->p_independent)},
               {"side", v.witness->upper ? "upper" : "lower"}};
    return verdict_to_json(v, w);
  };
  out["NOD"] = orthant(r.nod);
  out["NUOD"] = orthant(r.nuod);
  out["NLOD"] = orthant(r.nlod);

  json ncd_witness;
  if (r.ncd.witness)
    ncd_witness = json{{"i", r.ncd.witness->i},
                       {"j", r.ncd.witness->j},
                       {"covariance", scalar_to_json(r.ncd.witness->covariance)}};
  out["NCD"] = verdict_to_json(r.ncd, ncd_witness);
  return out;
}

template <class Scalar>
json chain_to_json(const ChainReport<Scalar>& c) {
  json out;
  out["report"] = report_to_json(c.report);
  out["consistent"] = c.consistent();
  json v = json::array();
  for (const auto& viol : c.violations)
    v.push_back(json{{"antecedent", viol.antecedent}, {"consequent", viol.consequent}});
  out["violations"] = std::move(v);
  return out;
}

template <class Scalar>
json theorem1_to_json(const Theorem1Report<Scalar>& r) {
  using Outcome = typename Theorem1Report<Scalar>::Outcome;
  json out;
  switch (r.outcome) {
    case Outcome::Applies: out["outcome"] = "applies"; break;
    case Outcome::ConditionAFails: out["outcome"] = "condition_a_fails"; break;
    case Outcome::ConditionBFails: out["outcome"] = "condition_b_fails"; break;
    case Outcome::NotJointMix: out["outcome"] = "not_jm"; break;
  }
  if (r.outcome == Outcome::Applies) {
    out["na_asserted"] = true;
    out["center"] = scalar_to_json(r.center);
    if (r.na_agrees) out["na_cross_check"] = *r.na_agrees;
  }
  if (r.outcome == Outcome::ConditionAFails || r.outcome == Outcome::ConditionBFails) {
    out["witness"] = json{{"block", r.block},
                          {"s_value", scalar_to_json(r.s_value)},
                          {"discrepancy", scalar_to_json(r.discrepancy)}};
    if (r.outcome == Outcome::ConditionBFails) {
      out["witness"]["s_value_next"] = scalar_to_json(r.s_value_next);
      out["witness"]["upper_set"] = matrix_to_json(r.upper_set);
    }
  }
  return out;
}

inline json construction_to_json(const ConstructionTrace& t) {
  return json{{"variances", vector_to_json(t.variances)},
              {"sorted_variances", vector_to_json(t.sorted_variances)},
              {"lambda", t.lambda},
              {"increments", vector_to_json(t.increments)},
              {"cov", matrix_to_json(t.cov)},
              {"min_eigenvalue", t.min_eigenvalue},
              {"max_abs_row_sum", t.max_abs_row_sum},
              {"max_offdiagonal", t.max_offdiagonal}};
}

template <class Scalar>
json decomposition_to_json(const BinaryMultinomialDecomposition<Scalar>& dec) {
  json coeffs = json::array();
  for (const auto& c : dec.coefficients) coeffs.push_back(scalar_to_json(c));
  json levels = json::array();
  for (const auto& v : dec.levels) levels.push_back(scalar_to_json(v));
  json components = json::array();
  const Eigen::Index n = dec.source.dim();
  for (Eigen::Index k = 0; k < dec.component_count(); ++k) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < dec.source.atom_count(); ++r) {
      json unit = json::array();
      for (Eigen::Index c = 0; c < n; ++c) unit.push_back(dec.one_position(k, r) == c ? 1 : 0);
      rows.push_back(std::move(unit));
    }
    components.push_back(std::move(rows));
  }
  return json{{"coefficients", std::move(coeffs)},
              {"levels", std::move(levels)},
              {"shift", scalar_to_json(dec.shift)},
              {"atoms", joint_to_json(dec.source)},
              {"components", std::move(components)}};
}

template <class Scalar>
json orbit_mixture_to_json(const OrbitMixture<Scalar>& mix) {
  return json{{"weights", vector_to_json(mix.weights)},
              {"orbit_bases", matrix_to_json(mix.bases)},
              {"center", scalar_to_json(mix.center)}};
}

template <class Scalar>
json transport_solution_to_json(const TransportSolution<Scalar>& sol, Eigen::Index n) {
  json per_subset = json::array();
  for (const auto& [mask, cost] : sol.per_subset_costs)
    per_subset.push_back(json{{"subset", subset_to_json<Scalar>(mask, n)}, {"cost", scalar_to_json(cost)}});
  return json{{"status", lp_status_name(sol.status)},
              {"value", scalar_to_json(sol.value)},
              {"coupling", joint_to_json(sol.coupling)},
              {"per_subset_costs", std::move(per_subset)},
              {"corr", matrix_to_json(sol.corr)}};
}

inline json thm_opt_to_json(const ThmOptReport& rep) {
  json entries = json::array();
  for (const auto& e : rep.entries)
    entries.push_back(json{{"k", e.k == 0 ? json("all") : json(e.k)},
                           {"unique_corr_expected", e.unique_corr_expected},
                           {"value", e.value},
                           {"expected_value", e.expected_value},
                           {"corr_max_deviation", e.corr_max_deviation},
                           {"pass", e.pass}});
  json out{{"preconditions_ok", rep.preconditions_ok},
           {"variance", rep.variance},
           {"entries", std::move(entries)},
           {"all_pass", rep.all_pass()}};
  if (!rep.preconditions_ok) out["precondition_failure"] = rep.precondition_failure;
  return out;
}

}  // namespace negdep::io
