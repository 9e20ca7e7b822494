#pragma once

#include "negdep/errors.hpp"
#include "negdep/gaussian.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

namespace negdep {

/// Elliptical model fixed by its Gaussian variance-mixture representation
/// X = location + sqrt(W) A Z with A A^T = dispersion:
///   gaussian       W == 1
///   student_t(nu)  W = nu / chi^2_nu
///   scale_mixture  W from a finite table of nonnegative scales.
struct EllipticalSpec {
  Eigen::VectorXd location;
  Eigen::MatrixXd dispersion;
  Family family;

  Eigen::Index dim() const { return location.size(); }
};

namespace detail {

/// Factor A with A A^T = sigma.  Joint-mix dispersions are singular, so the
/// Cholesky path is tried first and the eigendecomposition is the fallback.
inline Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& sigma, double tol = 1e-9) {
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
  if (es.eigenvalues().minCoeff() < -tol)
    throw Error(ErrorCode::NotPsd, "dispersion matrix has a negative eigenvalue");
  const Eigen::VectorXd scale = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  Eigen::MatrixXd a = es.eigenvectors() * scale.asDiagonal();
  if (cov_is_jm(sigma)) {
    // Pin the singular direction: component sums of A z then vanish exactly.
    const Eigen::Index n = sigma.rows();
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    for (Eigen::Index j = 0; j < a.cols(); ++j) a.col(j) -= ones * (ones.dot(a.col(j)) / n);
  }
  return a;
}

inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2_v<double>); }

}  // namespace detail

/// Draws `count` samples (one per row), reproducible for a given seed.
inline Eigen::MatrixXd sample(const EllipticalSpec& spec, Eigen::Index count, std::uint64_t seed) {
  const Eigen::Index n = spec.dim();
  if (spec.dispersion.rows() != n || spec.dispersion.cols() != n)
    throw Error(ErrorCode::DimMismatch, "dispersion shape");
  const Eigen::MatrixXd a = detail::psd_factor(spec.dispersion);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::chi_squared_distribution<double> chi2(spec.family.nu);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  Eigen::MatrixXd out(count, n);
  Eigen::VectorXd z(a.cols());
  for (Eigen::Index r = 0; r < count; ++r) {
    for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = gauss(rng);
    double w = 1.0;
    switch (spec.family.tag) {
      case Family::Tag::Gaussian: break;
      case Family::Tag::StudentT: {
        if (spec.family.nu <= 0) throw Error(ErrorCode::WrongFamily, "student_t needs nu > 0");
        w = spec.family.nu / chi2(rng);
        break;
      }
      case Family::Tag::ScaleMixture: {
        const double u = unif(rng);
        double acc = 0.0;
        w = spec.family.mixture_scales[spec.family.mixture_scales.size() - 1];
        for (Eigen::Index k = 0; k < spec.family.mixture_weights.size(); ++k) {
          acc += spec.family.mixture_weights[k];
          if (u <= acc) {
            w = spec.family.mixture_scales[k];
            break;
          }
        }
        break;
      }
    }
    out.row(r) = (spec.location + std::sqrt(w) * (a * z)).transpose();
  }
  return out;
}

struct OrthantDemoResult {
  double max_violation = 0.0;
  double at_x1 = 0.0, at_x2 = 0.0;
};

/// Scans P(X1<=x1, X2<=x2) - P(X1<=x1) P(X2<=x2) for a bivariate elliptical
/// model with diagonal dispersion.  Uncorrelated non-Gaussian members are
/// not independent, and the scan exhibits the resulting NOD violation; the
/// Gaussian family is the zero control.
///
/// Mixture evaluation: conditionally on W = w the vector is Gaussian, so
/// the orthant probability is an average of Phi products.  For student_t
/// the average over W = nu/chi^2_nu is computed by quadrature in u with
/// q = u^2, which removes the density singularity at zero.
inline OrthantDemoResult demo_bivariate_zero_corr_not_nod(const EllipticalSpec& spec,
                                                          double grid_lo = -3.0,
                                                          double grid_hi = 3.0,
                                                          double grid_step = 0.1) {
  if (spec.dim() != 2) throw Error(ErrorCode::WrongFamily, "demo requires dimension 2");
  if (std::abs(spec.dispersion(0, 1)) > 0 || std::abs(spec.dispersion(1, 0)) > 0)
    throw Error(ErrorCode::WrongFamily, "demo requires a diagonal dispersion");
  const double s1 = std::sqrt(spec.dispersion(0, 0));
  const double s2 = std::sqrt(spec.dispersion(1, 1));

  // per-node scale factors 1/sqrt(w) and weights of the mixing law
  std::vector<double> inv_root_w, weight;
  switch (spec.family.tag) {
    case Family::Tag::Gaussian:
      inv_root_w = {1.0};
      weight = {1.0};
      break;
    case Family::Tag::ScaleMixture: {
      for (Eigen::Index k = 0; k < spec.family.mixture_scales.size(); ++k) {
        const double w = spec.family.mixture_scales[k];
        inv_root_w.push_back(w > 0 ? 1.0 / std::sqrt(w) : std::numeric_limits<double>::infinity());
        weight.push_back(spec.family.mixture_weights[k]);
      }
      break;
    }
    case Family::Tag::StudentT: {
      const double nu = spec.family.nu;
      if (nu <= 0) throw Error(ErrorCode::WrongFamily, "student_t needs nu > 0");
      // E[g(W)] with W = nu/q, q ~ chi^2_nu: substitute q = u^2, then the
      // integrand weight is u^{nu-1} exp(-u^2/2) (normalized numerically).
      const double umax = std::sqrt(std::max(150.0, nu + 40.0 * std::sqrt(2.0 * nu)));
      const int panels = 2000;  // composite Simpson, 2*panels+1 nodes
      const double h = umax / (2 * panels);
      double total = 0.0;
      for (int i = 0; i <= 2 * panels; ++i) {
        const double u = i * h;
        const double simpson = (i == 0 || i == 2 * panels) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        const double w = simpson * std::pow(u, nu - 1.0) * std::exp(-0.5 * u * u);
        if (w <= 0) continue;
        // 1/sqrt(W) = u / sqrt(nu)
        inv_root_w.push_back(u / std::sqrt(nu));
        weight.push_back(w);
        total += w;
      }
      for (double& w : weight) w /= total;
      break;
    }
  }

  const auto cdf_given_node = [&](double x, double sigma, double irw) {
    if (std::isinf(irw)) return x < 0 ? 0.0 : 1.0;  // scale 0: degenerate at the location
    return detail::std_normal_cdf(x * irw / sigma);
  };

  OrthantDemoResult res;
  const int steps = static_cast<int>(std::round((grid_hi - grid_lo) / grid_step));
  for (int i = 0; i <= steps; ++i) {
    const double x1 = grid_lo + i * grid_step;
    for (int j = 0; j <= steps; ++j) {
      const double x2 = grid_lo + j * grid_step;
      double joint = 0.0, m1 = 0.0, m2 = 0.0;
      for (std::size_t k = 0; k < weight.size(); ++k) {
        const double c1 = cdf_given_node(x1, s1, inv_root_w[k]);
        const double c2 = cdf_given_node(x2, s2, inv_root_w[k]);
        joint += weight[k] * c1 * c2;
        m1 += weight[k] * c1;
        m2 += weight[k] * c2;
      }
      const double viol = joint - m1 * m2;
      if (viol > res.max_violation) {
        res.max_violation = viol;
        res.at_x1 = x1;
        res.at_x2 = x2;
      }
    }
  }
  return res;
}

}  // namespace negdep
