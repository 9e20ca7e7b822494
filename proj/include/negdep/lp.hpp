#pragma once

#include "negdep/errors.hpp"
#include "negdep/scalar.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace negdep {

enum class LpStatus { Optimal, Infeasible, Unbounded };

inline const char* lp_status_name(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
  }
  return "unknown";
}

enum class Relation { LessEq, Equal, GreaterEq };

/// Dense linear program.  Row i reads  lhs[i] . x  (rel)  rhs[i];
/// variable bounds default to [0, +inf).
template <class Scalar>
struct LpProblem {
  bool maximize = false;
  Vector<Scalar> objective;
  std::vector<Vector<Scalar>> rows;
  std::vector<Relation> relations;
  std::vector<Scalar> rhs;
  std::vector<std::optional<Scalar>> lower;
  std::vector<std::optional<Scalar>> upper;

  explicit LpProblem(Eigen::Index nvars = 0) { resize_vars(nvars); }

  void resize_vars(Eigen::Index nvars) {
    objective = Vector<Scalar>::Zero(nvars);
    lower.assign(static_cast<std::size_t>(nvars), Scalar(0));
    upper.assign(static_cast<std::size_t>(nvars), std::nullopt);
  }

  Eigen::Index var_count() const { return objective.size(); }
  Eigen::Index row_count() const { return static_cast<Eigen::Index>(rows.size()); }

  void add_row(Vector<Scalar> coeffs, Relation rel, Scalar b) {
    if (coeffs.size() != var_count()) throw Error(ErrorCode::DimMismatch, "constraint row length");
    rows.push_back(std::move(coeffs));
    relations.push_back(rel);
    rhs.push_back(std::move(b));
  }
};

template <class Scalar>
struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  Scalar value{};
  Vector<Scalar> primal;           // user variable values (Optimal only)
  Vector<Scalar> dual;             // one multiplier per user row (Optimal only)
  long iterations = 0;
  Scalar feasibility_residual{};   // max constraint/bound violation of primal
  Scalar duality_gap{};            // |primal obj - dual obj| in standard form
};

struct LpOptions {
  long max_iterations = 0;         // 0: automatic from problem size
  std::ostream* trace = nullptr;   // tableau dump per pivot when set
};

namespace detail {

template <class Scalar>
struct SimplexTolerances {
  Scalar entering;
  Scalar pivot;
  Scalar phase1;
  static SimplexTolerances defaults() {
    if constexpr (scalar_traits<Scalar>::is_exact)
      return {Scalar(0), Scalar(0), Scalar(0)};
    else
      return {Scalar(1e-9), Scalar(1e-9), Scalar(1e-7)};
  }
};

}  // namespace detail

/// Two-phase dense primal simplex with Bland's rule.
///
/// Bounds are folded into a standard-form program (shifted/negated columns,
/// explicit upper-bound rows); every row gets an artificial column so the
/// phase-1 basis and the dual extraction are uniform.  Deterministic:
/// identical inputs produce identical pivot sequences.
template <class Scalar>
class SimplexSolver {
 public:
  explicit SimplexSolver(const LpProblem<Scalar>& p, LpOptions options = {})
      : user_(p), options_(options), tol_(detail::SimplexTolerances<Scalar>::defaults()) {}

  LpSolution<Scalar> solve() {
    build_standard_form();
    LpSolution<Scalar> sol;
    if (trivially_infeasible_) {
      sol.status = LpStatus::Infeasible;
      return sol;
    }
    setup_tableau();

    run_phase1(sol);
    if (sol.status == LpStatus::Infeasible) {
      extract_duals(sol);
      return sol;
    }
    drive_out_artificials();
    const LpStatus st = run_phase2(sol);
    sol.status = st;
    if (st != LpStatus::Optimal) return sol;
    extract_primal(sol);
    extract_duals(sol);
    compute_certificates(sol);
    return sol;
  }

 private:
  enum class VarKind { Shifted, Flipped, FreePair };

  struct VarMap {
    VarKind kind;
    Eigen::Index col;       // first standard column
    Scalar offset;          // lo for Shifted, hi for Flipped
  };

  void build_standard_form() {
    const Eigen::Index nv = user_.var_count();
    const Scalar zero = scalar_traits<Scalar>::zero();

    Eigen::Index ncols = 0;
    maps_.clear();
    std::vector<std::pair<Eigen::Index, Scalar>> bound_rows;  // (std col, width)
    for (Eigen::Index j = 0; j < nv; ++j) {
      const auto& lo = user_.lower[static_cast<std::size_t>(j)];
      const auto& hi = user_.upper[static_cast<std::size_t>(j)];
      if (lo) {
        maps_.push_back({VarKind::Shifted, ncols, *lo});
        if (hi) {
          const Scalar width = *hi - *lo;
          if (width < zero) trivially_infeasible_ = true;
          bound_rows.emplace_back(ncols, width);
        }
        ncols += 1;
      } else if (hi) {
        maps_.push_back({VarKind::Flipped, ncols, *hi});
        ncols += 1;
      } else {
        maps_.push_back({VarKind::FreePair, ncols, zero});
        ncols += 2;
      }
    }
    struct_cols_ = ncols;

    const Eigen::Index user_rows = user_.row_count();
    n_rows_ = user_rows + static_cast<Eigen::Index>(bound_rows.size());
    n_user_rows_ = user_rows;

    // slack columns: one per inequality row (user + bound rows)
    Eigen::Index slack_count = static_cast<Eigen::Index>(bound_rows.size());
    for (Relation rel : user_.relations)
      if (rel != Relation::Equal) ++slack_count;
    total_cols_ = struct_cols_ + slack_count;

    A0_ = Matrix<Scalar>::Zero(n_rows_, total_cols_);
    b0_ = Vector<Scalar>::Zero(n_rows_);
    row_sign_.assign(static_cast<std::size_t>(n_rows_), Scalar(1));

    slack_col_.assign(static_cast<std::size_t>(n_rows_), Eigen::Index{-1});
    Eigen::Index slack_at = struct_cols_;
    for (Eigen::Index i = 0; i < user_rows; ++i) {
      Scalar b = user_.rhs[static_cast<std::size_t>(i)];
      const Vector<Scalar>& row = user_.rows[static_cast<std::size_t>(i)];
      for (Eigen::Index j = 0; j < nv; ++j) {
        const Scalar& a = row[j];
        if (a == zero) continue;
        const VarMap& m = maps_[static_cast<std::size_t>(j)];
        switch (m.kind) {
          case VarKind::Shifted:
            A0_(i, m.col) += a;
            b -= a * m.offset;
            break;
          case VarKind::Flipped:
            A0_(i, m.col) -= a;
            b -= a * m.offset;
            break;
          case VarKind::FreePair:
            A0_(i, m.col) += a;
            A0_(i, m.col + 1) -= a;
            break;
        }
      }
      const Relation rel = user_.relations[static_cast<std::size_t>(i)];
      if (rel == Relation::LessEq) {
        slack_col_[static_cast<std::size_t>(i)] = slack_at;
        A0_(i, slack_at++) = Scalar(1);
      }
      if (rel == Relation::GreaterEq) {
        slack_col_[static_cast<std::size_t>(i)] = slack_at;
        A0_(i, slack_at++) = Scalar(-1);
      }
      b0_[i] = b;
    }
    for (std::size_t k = 0; k < bound_rows.size(); ++k) {
      const Eigen::Index i = user_rows + static_cast<Eigen::Index>(k);
      A0_(i, bound_rows[k].first) = Scalar(1);
      slack_col_[static_cast<std::size_t>(i)] = slack_at;
      A0_(i, slack_at++) = Scalar(1);
      b0_[i] = bound_rows[k].second;
    }
    for (Eigen::Index i = 0; i < n_rows_; ++i) {
      // Keep b >= 0; additionally orient zero-rhs rows so their slack can
      // seed the initial basis.
      const Eigen::Index sc = slack_col_[static_cast<std::size_t>(i)];
      const bool flip = b0_[i] < zero || (b0_[i] == zero && sc >= 0 && A0_(i, sc) < zero);
      if (flip) {
        A0_.row(i) = -A0_.row(i);
        b0_[i] = -b0_[i];
        row_sign_[static_cast<std::size_t>(i)] = Scalar(-1);
      }
    }

    // standard-form objective (always minimize)
    c_ = Vector<Scalar>::Zero(total_cols_);
    for (Eigen::Index j = 0; j < nv; ++j) {
      Scalar cj = user_.objective[j];
      if (user_.maximize) cj = -cj;
      if (cj == zero) continue;
      const VarMap& m = maps_[static_cast<std::size_t>(j)];
      switch (m.kind) {
        case VarKind::Shifted: c_[m.col] += cj; break;
        case VarKind::Flipped: c_[m.col] -= cj; break;
        case VarKind::FreePair:
          c_[m.col] += cj;
          c_[m.col + 1] -= cj;
          break;
      }
    }
  }

  void setup_tableau() {
    T_ = Matrix<Scalar>::Zero(n_rows_, total_cols_ + n_rows_);
    T_.leftCols(total_cols_) = A0_;
    for (Eigen::Index i = 0; i < n_rows_; ++i) T_(i, total_cols_ + i) = Scalar(1);
    b_ = b0_;
    basis_.resize(static_cast<std::size_t>(n_rows_));
    for (Eigen::Index i = 0; i < n_rows_; ++i) {
      // A +1 slack column already reads e_i, so it can enter the basis
      // without pivoting; rows without one start on their artificial.
      const Eigen::Index sc = slack_col_[static_cast<std::size_t>(i)];
      const bool slack_ok = sc >= 0 && A0_(i, sc) == Scalar(1);
      basis_[static_cast<std::size_t>(i)] = slack_ok ? sc : total_cols_ + i;
    }
  }

  bool is_artificial(Eigen::Index col) const { return col >= total_cols_; }

  void pivot(Eigen::Index row, Eigen::Index col) {
    const Scalar piv = T_(row, col);
    T_.row(row) /= piv;
    b_[row] /= piv;
    for (Eigen::Index k = 0; k < n_rows_; ++k) {
      if (k == row) continue;
      const Scalar f = T_(k, col);
      if (f == scalar_traits<Scalar>::zero()) continue;
      T_.row(k) -= f * T_.row(row);
      b_[k] -= f * b_[row];
    }
    const Scalar re = r_[col];
    if (!(re == scalar_traits<Scalar>::zero())) {
      r_ -= re * T_.row(row).transpose();
      z_ += re * b_[row];
    }
    r_[col] = scalar_traits<Scalar>::zero();
    basis_[static_cast<std::size_t>(row)] = col;
    if (options_.trace) dump_tableau(row, col);
  }

  /// Bland: entering = lowest-index eligible column with negative reduced
  /// cost; leaving = lexicographic ratio test with lowest basis index ties.
  /// Returns Optimal when no entering column exists.
  LpStatus iterate(bool phase2) {
    const Scalar zero = scalar_traits<Scalar>::zero();
    const long cap = iteration_cap();
    while (true) {
      Eigen::Index entering = -1;
      const Eigen::Index limit = phase2 ? total_cols_ : total_cols_ + n_rows_;
      for (Eigen::Index j = 0; j < limit; ++j) {
        if (r_[j] < -tol_.entering) {
          entering = j;
          break;
        }
      }
      if (entering < 0) return LpStatus::Optimal;

      Eigen::Index leaving = -1;
      Scalar best_ratio = zero;
      for (Eigen::Index i = 0; i < n_rows_; ++i) {
        if (T_(i, entering) <= tol_.pivot) continue;
        const Scalar ratio = b_[i] / T_(i, entering);
        if (leaving < 0 || ratio < best_ratio ||
            (ratio == best_ratio &&
             basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leaving)])) {
          leaving = i;
          best_ratio = ratio;
        }
      }
      if (leaving < 0) return LpStatus::Unbounded;
      pivot(leaving, entering);
      if (++iterations_ > cap) {
        if constexpr (scalar_traits<Scalar>::is_exact)
          throw Error(ErrorCode::LpFailure, "iteration cap exceeded in exact mode");
        else
          throw Error(ErrorCode::NumericBreakdown,
                      "simplex iteration cap exceeded; retry in rational mode");
      }
    }
  }

  void run_phase1(LpSolution<Scalar>& sol) {
    r_ = Vector<Scalar>::Zero(total_cols_ + n_rows_);
    z_ = scalar_traits<Scalar>::zero();
    // cost 1 on every artificial, eliminated over the artificial basics
    for (Eigen::Index i = 0; i < n_rows_; ++i) r_[total_cols_ + i] = Scalar(1);
    for (Eigen::Index i = 0; i < n_rows_; ++i) {
      if (!is_artificial(basis_[static_cast<std::size_t>(i)])) continue;
      r_ -= T_.row(i).transpose();
      z_ += b_[i];
    }
    const LpStatus st = iterate(/*phase2=*/false);
    if (st != LpStatus::Optimal)
      throw Error(ErrorCode::LpFailure, "phase 1 cannot be unbounded");
    if (z_ > tol_.phase1) {
      sol.status = LpStatus::Infeasible;
      sol.iterations = iterations_;
    } else {
      sol.status = LpStatus::Optimal;  // feasible so far
    }
  }

  void drive_out_artificials() {
    for (Eigen::Index i = 0; i < n_rows_; ++i) {
      if (!is_artificial(basis_[static_cast<std::size_t>(i)])) continue;
      // Largest-magnitude pivot: the leaving artificial is (near) zero and a
      // small pivot would amplify that residual into the entering variable.
      Eigen::Index col = -1;
      Scalar best = tol_.pivot;
      for (Eigen::Index j = 0; j < total_cols_; ++j) {
        const Scalar mag = scalar_traits<Scalar>::abs(T_(i, j));
        if (mag > best) {
          col = j;
          best = mag;
        }
      }
      // Basic artificial sits at value zero; a redundant row keeps it.
      if (col >= 0) pivot(i, col);
    }
  }

  LpStatus run_phase2(LpSolution<Scalar>& sol) {
    r_ = Vector<Scalar>::Zero(total_cols_ + n_rows_);
    z_ = scalar_traits<Scalar>::zero();
    for (Eigen::Index j = 0; j < total_cols_; ++j) r_[j] = c_[j];
    for (Eigen::Index i = 0; i < n_rows_; ++i) {
      const Eigen::Index bi = basis_[static_cast<std::size_t>(i)];
      if (is_artificial(bi)) continue;  // parked at zero with cost zero
      const Scalar cb = c_[bi];
      if (cb == scalar_traits<Scalar>::zero()) continue;
      r_ -= cb * T_.row(i).transpose();
      z_ += cb * b_[i];
    }
    for (Eigen::Index i = 0; i < n_rows_; ++i) r_[basis_[static_cast<std::size_t>(i)]] = scalar_traits<Scalar>::zero();
    const LpStatus st = iterate(/*phase2=*/true);
    sol.iterations = iterations_;
    return st;
  }

  void extract_primal(LpSolution<Scalar>& sol) const {
    Vector<Scalar> y = Vector<Scalar>::Zero(total_cols_);
    for (Eigen::Index i = 0; i < n_rows_; ++i) {
      const Eigen::Index bi = basis_[static_cast<std::size_t>(i)];
      if (bi < total_cols_) y[bi] = b_[i];
    }
    sol.primal = Vector<Scalar>::Zero(user_.var_count());
    for (Eigen::Index j = 0; j < user_.var_count(); ++j) {
      const VarMap& m = maps_[static_cast<std::size_t>(j)];
      switch (m.kind) {
        case VarKind::Shifted: sol.primal[j] = m.offset + y[m.col]; break;
        case VarKind::Flipped: sol.primal[j] = m.offset - y[m.col]; break;
        case VarKind::FreePair: sol.primal[j] = y[m.col] - y[m.col + 1]; break;
      }
    }
    Scalar val = scalar_traits<Scalar>::zero();
    for (Eigen::Index j = 0; j < user_.var_count(); ++j) val += user_.objective[j] * sol.primal[j];
    sol.value = val;
    std_primal_ = y;
  }

  void extract_duals(LpSolution<Scalar>& sol) const {
    // Artificial column i started as e_i, so its reduced cost exposes the
    // simplex multiplier of row i.
    Vector<Scalar> y(n_rows_);
    const bool phase1 = sol.status == LpStatus::Infeasible;
    for (Eigen::Index i = 0; i < n_rows_; ++i) {
      const Scalar rc = r_[total_cols_ + i];
      y[i] = phase1 ? Scalar(1) - rc : -rc;
    }
    std_dual_ = y;
    sol.dual = Vector<Scalar>::Zero(n_user_rows_);
    for (Eigen::Index i = 0; i < n_user_rows_; ++i) {
      Scalar v = row_sign_[static_cast<std::size_t>(i)] * y[i];
      if (user_.maximize) v = -v;
      sol.dual[i] = v;
    }
  }

  void compute_certificates(LpSolution<Scalar>& sol) const {
    const Scalar zero = scalar_traits<Scalar>::zero();
    Scalar resid = zero;
    const Vector<Scalar> ax = A0_ * std_primal_;
    for (Eigen::Index i = 0; i < n_rows_; ++i) {
      // Rows were normalized to equalities with explicit slack columns, so
      // the residual is plain |Ax - b|.
      const Scalar v = scalar_traits<Scalar>::abs(ax[i] - b0_[i]);
      if (v > resid) resid = v;
    }
    for (Eigen::Index j = 0; j < total_cols_; ++j)
      if (std_primal_[j] < zero && -std_primal_[j] > resid) resid = -std_primal_[j];
    sol.feasibility_residual = resid;

    Scalar zp = zero;
    for (Eigen::Index j = 0; j < total_cols_; ++j) zp += c_[j] * std_primal_[j];
    Scalar zd = zero;
    for (Eigen::Index i = 0; i < n_rows_; ++i) zd += std_dual_[i] * b0_[i];
    sol.duality_gap = scalar_traits<Scalar>::abs(zp - zd);
  }

  long iteration_cap() const {
    if (options_.max_iterations > 0) return options_.max_iterations;
    const long size_term = static_cast<long>(n_rows_ + total_cols_);
    return 20000 + 200 * size_term;
  }

  void dump_tableau(Eigen::Index row, Eigen::Index col) const {
    std::ostream& os = *options_.trace;
    os << "pivot r" << row << " c" << col << " z=" << to_double(z_) << "\n";
    for (Eigen::Index i = 0; i < n_rows_; ++i) {
      os << "  [" << basis_[static_cast<std::size_t>(i)] << "]";
      for (Eigen::Index j = 0; j < total_cols_ + n_rows_; ++j) os << " " << to_double(T_(i, j));
      os << " | " << to_double(b_[i]) << "\n";
    }
  }

  const LpProblem<Scalar>& user_;
  LpOptions options_;
  detail::SimplexTolerances<Scalar> tol_;

  std::vector<VarMap> maps_;
  bool trivially_infeasible_ = false;
  Eigen::Index struct_cols_ = 0;
  Eigen::Index total_cols_ = 0;
  Eigen::Index n_rows_ = 0;
  Eigen::Index n_user_rows_ = 0;
  Matrix<Scalar> A0_;
  Vector<Scalar> b0_;
  std::vector<Scalar> row_sign_;
  std::vector<Eigen::Index> slack_col_;
  Vector<Scalar> c_;

  Matrix<Scalar> T_;
  Vector<Scalar> b_;
  Vector<Scalar> r_;
  Scalar z_{};
  std::vector<Eigen::Index> basis_;
  long iterations_ = 0;
  mutable Vector<Scalar> std_primal_;
  mutable Vector<Scalar> std_dual_;
};

template <class Scalar>
LpSolution<Scalar> solve(const LpProblem<Scalar>& p, LpOptions options = {}) {
  return SimplexSolver<Scalar>(p, options).solve();
}

/// Exact re-solve of a binary64 problem: coefficients convert to rationals
/// losslessly, so verdicts are free of pivot round-off.
inline LpSolution<Rational> solve_exact(const LpProblem<double>& p, LpOptions options = {}) {
  LpProblem<Rational> q(p.var_count());
  q.maximize = p.maximize;
  for (Eigen::Index j = 0; j < p.var_count(); ++j) {
    q.objective[j] = Rational::from_double(p.objective[j]);
    const auto& lo = p.lower[static_cast<std::size_t>(j)];
    const auto& hi = p.upper[static_cast<std::size_t>(j)];
    q.lower[static_cast<std::size_t>(j)] = lo ? std::optional<Rational>(Rational::from_double(*lo)) : std::nullopt;
    q.upper[static_cast<std::size_t>(j)] = hi ? std::optional<Rational>(Rational::from_double(*hi)) : std::nullopt;
  }
  for (Eigen::Index i = 0; i < p.row_count(); ++i) {
    Vector<Rational> row(p.var_count());
    for (Eigen::Index j = 0; j < p.var_count(); ++j)
      row[j] = Rational::from_double(p.rows[static_cast<std::size_t>(i)][j]);
    q.add_row(std::move(row), p.relations[static_cast<std::size_t>(i)],
              Rational::from_double(p.rhs[static_cast<std::size_t>(i)]));
  }
  return solve(q, options);
}

}  // namespace negdep
