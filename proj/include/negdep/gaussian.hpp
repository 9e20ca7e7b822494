#pragma once

#include "negdep/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

namespace negdep {

/// Family tag of a location/dispersion model.
struct Family {
  enum class Tag { Gaussian, StudentT, ScaleMixture };
  Tag tag = Tag::Gaussian;
  double nu = 0.0;                 // StudentT degrees of freedom
  Eigen::VectorXd mixture_scales;  // ScaleMixture: variance factors w > = 0
  Eigen::VectorXd mixture_weights;

  static Family gaussian() { return {}; }
  static Family student_t(double nu) {
    Family f;
    f.tag = Tag::StudentT;
    f.nu = nu;
    return f;
  }
  static Family scale_mixture(Eigen::VectorXd scales, Eigen::VectorXd weights) {
    Family f;
    f.tag = Tag::ScaleMixture;
    f.mixture_scales = std::move(scales);
    f.mixture_weights = std::move(weights);
    return f;
  }
};

struct CovModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  Family family;

  Eigen::Index dim() const { return mean.size(); }
};

/// PSD verdict with the round-off projection path: matrices failing only by
/// eigenvalue noise in [-tol, 0) are clipped and re-certified.
struct PsdCertificate {
  bool psd = false;
  double min_eigenvalue = 0.0;
  bool projected = false;
  Eigen::MatrixXd matrix;  // the (possibly clipped) matrix
};

inline PsdCertificate certify_psd(const Eigen::MatrixXd& sigma, double tol = 1e-9) {
  PsdCertificate cert;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
  cert.min_eigenvalue = es.eigenvalues().minCoeff();
  cert.matrix = sigma;
  if (cert.min_eigenvalue >= 0) {
    cert.psd = true;
    return cert;
  }
  if (cert.min_eigenvalue < -tol) return cert;
  const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
  cert.matrix = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
  cert.matrix = 0.5 * (cert.matrix + cert.matrix.transpose().eval());
  cert.projected = true;
  cert.psd = true;
  return cert;
}

/// Necessary condition for an NCD joint mix: twice the largest variance
/// cannot exceed the total variance.
inline bool check_ncd_necessary(const Eigen::VectorXd& variances) {
  if ((variances.array() < 0).any()) throw Error(ErrorCode::PreconditionFailed, "negative variance");
  return 2.0 * variances.maxCoeff() <= variances.sum();
}

/// Necessary condition for any joint mix: twice the largest standard
/// deviation cannot exceed the total standard deviation.
inline bool check_jm_necessary(const Eigen::VectorXd& sigmas) {
  if ((sigmas.array() < 0).any()) throw Error(ErrorCode::PreconditionFailed, "negative sigma");
  return 2.0 * sigmas.maxCoeff() <= sigmas.sum();
}

/// Record of the constructive covariance build: sorted variances, the
/// mixing weight lambda, the variance increments, and the assembled matrix
/// in caller order.
struct ConstructionTrace {
  Eigen::VectorXd variances;         // caller order (diagonal of cov)
  Eigen::VectorXd sorted_variances;  // ascending
  std::vector<Eigen::Index> order;   // sorted position -> caller index
  double lambda = 0.0;
  Eigen::VectorXd increments;        // alpha_k = sqrt(sigma2_(k) - sigma2_(k-1))
  Eigen::MatrixXd cov;               // caller order
  double min_eigenvalue = 0.0;
  double max_abs_row_sum = 0.0;
  double max_offdiagonal = 0.0;
};

/// Builds a covariance matrix of a Gaussian NA joint mix with the given
/// variances.  Requires 2 max sigma_i^2 <= sum sigma_i^2.
///
/// Following the constructive argument: with variances sorted ascending and
/// lambda^2 (sum_{i<n} s_i - s_{n-1}) = s_n - s_{n-1}, the off-diagonal
/// entries are
///   cov(k,l) = -(1-lambda^2) sum_{j<=k} alpha_j^2 / (n-j)        k < l < n,
///   cov(k,n) = -lambda^2 s_k - (1-lambda^2) sum_{j<=k} alpha_j^2/(n-j),
/// which sums each row to zero and keeps every off-diagonal nonpositive.
inline ConstructionTrace construct_na_gaussian_cov(const Eigen::VectorXd& variances) {
  const Eigen::Index n = variances.size();
  if (n < 2) throw Error(ErrorCode::DegenerateInput, "need at least two variances");
  if (!check_ncd_necessary(variances))
    throw Error(ErrorCode::PreconditionFailed,
                "2 max sigma^2 <= sum sigma^2 fails for the given variances");

  ConstructionTrace trace;
  trace.variances = variances;
  trace.order.resize(static_cast<std::size_t>(n));
  std::iota(trace.order.begin(), trace.order.end(), Eigen::Index{0});
  std::stable_sort(trace.order.begin(), trace.order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return variances[a] < variances[b]; });
  Eigen::VectorXd s(n);
  for (Eigen::Index k = 0; k < n; ++k) s[k] = variances[trace.order[static_cast<std::size_t>(k)]];
  trace.sorted_variances = s;

  const double numer = s[n - 1] - (n >= 2 ? s[n - 2] : 0.0);
  const double denom = s.head(n - 1).sum() - (n >= 2 ? s[n - 2] : 0.0);
  double lambda2 = 0.0;
  if (numer > 0.0) {
    if (denom <= 0.0)
      throw Error(ErrorCode::DegenerateInput,
                  "all mass in one coordinate; no joint mix supports these variances");
    lambda2 = numer / denom;
  }
  lambda2 = std::min(lambda2, 1.0);
  trace.lambda = std::sqrt(lambda2);
  const double d2 = 1.0 - lambda2;

  trace.increments.resize(n - 1);
  Eigen::VectorXd alpha2(n - 1);
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    alpha2[k] = s[k] - (k == 0 ? 0.0 : s[k - 1]);
    trace.increments[k] = std::sqrt(std::max(alpha2[k], 0.0));
  }

  // prefix_k = sum_{j <= k} alpha_j^2 / (n - j) with 1-based j
  Eigen::VectorXd prefix(n - 1);
  double acc = 0.0;
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    acc += alpha2[k] / static_cast<double>(n - 1 - k);
    prefix[k] = acc;
  }

  Eigen::MatrixXd sorted_cov = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) sorted_cov(k, k) = s[k];
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    for (Eigen::Index l = k + 1; l < n; ++l) {
      double v = -d2 * prefix[k];
      if (l == n - 1) v -= lambda2 * s[k];
      sorted_cov(k, l) = v;
      sorted_cov(l, k) = v;
    }
  }

  trace.cov.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index l = 0; l < n; ++l)
      trace.cov(trace.order[static_cast<std::size_t>(k)], trace.order[static_cast<std::size_t>(l)]) =
          sorted_cov(k, l);
  // diagonal is the input, bitwise
  for (Eigen::Index k = 0; k < n; ++k) trace.cov(k, k) = variances[k];

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(trace.cov);
  trace.min_eigenvalue = es.eigenvalues().minCoeff();
  trace.max_abs_row_sum = trace.cov.rowwise().sum().cwiseAbs().maxCoeff();
  trace.max_offdiagonal = trace.cov(0, 1);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) trace.max_offdiagonal = std::max(trace.max_offdiagonal, trace.cov(i, j));
  return trace;
}

/// Closed-form joint-mix covariance for n = 3: the off-diagonals are forced
/// by the constant-sum constraint, so the matrix is unique given the
/// variances.  `psd` is false when the variances support no joint mix.
struct JmCov3 {
  Eigen::Matrix3d cov;
  bool psd = false;
  double min_eigenvalue = 0.0;
};

inline JmCov3 jm_cov_n3(const Eigen::Vector3d& variances) {
  JmCov3 out;
  const double s1 = variances[0], s2 = variances[1], s3 = variances[2];
  out.cov << s1, 0.5 * (s3 - s1 - s2), 0.5 * (s2 - s1 - s3),
      0.5 * (s3 - s1 - s2), s2, 0.5 * (s1 - s2 - s3),
      0.5 * (s2 - s1 - s3), 0.5 * (s1 - s2 - s3), s3;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(out.cov);
  out.min_eigenvalue = es.eigenvalues().minCoeff();
  out.psd = out.min_eigenvalue >= -1e-9;
  return out;
}

/// Correlation matrix with unit diagonal and off-diagonal -1/(n-1).
inline Eigen::MatrixXd equicorrelation(Eigen::Index n) {
  if (n < 2) throw Error(ErrorCode::DimMismatch, "equicorrelation needs n >= 2");
  Eigen::MatrixXd p = Eigen::MatrixXd::Constant(n, n, -1.0 / static_cast<double>(n - 1));
  p.diagonal().setOnes();
  return p;
}

/// A PSD covariance belongs to a joint mix iff the all-ones quadratic form
/// vanishes.
inline bool cov_is_jm(const Eigen::MatrixXd& sigma, double tol = 1e-9) {
  const Eigen::Index n = sigma.rows();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  return ones.dot(sigma * ones) <= tol;
}

/// For a Gaussian model the notions NA, NSD, NOD, NLOD, NUOD, and NCD all
/// collapse to the sign pattern of the covariance.
struct GaussianVerdict {
  bool negatively_dependent = false;  // simultaneously NA/NSD/NOD/NLOD/NUOD/NCD
  Eigen::Index witness_i = -1, witness_j = -1;
  double witness_value = 0.0;
};

inline GaussianVerdict gaussian_negdep_verdict(const CovModel& model) {
  if (model.family.tag != Family::Tag::Gaussian)
    throw Error(ErrorCode::WrongFamily, "verdict shortcut requires the gaussian family");
  GaussianVerdict v;
  v.negatively_dependent = true;
  for (Eigen::Index i = 0; i < model.cov.rows(); ++i)
    for (Eigen::Index j = i + 1; j < model.cov.cols(); ++j)
      if (model.cov(i, j) > 0.0) {
        v.negatively_dependent = false;
        v.witness_i = i;
        v.witness_j = j;
        v.witness_value = model.cov(i, j);
        return v;
      }
  return v;
}

}  // namespace negdep
