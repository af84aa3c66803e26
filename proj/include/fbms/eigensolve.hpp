#pragma once

// Generalized symmetric eigensolvers for pencils (A, B) with B > 0:
//  - dense solver below a size threshold,
//  - shift-invert Lanczos with full B-reorthogonalization above it, using a
//    shift certified to sit below the whole spectrum (Cholesky succeeds on
//    A - sigma B), so the transformed operator is positive definite and the
//    smallest eigenvalues map to the dominant ones.
// An LDLT inertia count provides an independent check on eigenvalue counts.

#include "fbms/geometry.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <numeric>
#include <random>

namespace fbms {

struct EigenOptions {
  int dense_threshold = 3000;  // use the dense path when DOF count is below this
  double tol = 1e-9;           // relative residual target per eigenpair
  int max_basis = 360;         // Lanczos basis cap
  double kernel_tol = -1;      // < 0: auto, 1e-6 * spectral scale of the result
  bool want_vectors = true;
  std::uint64_t seed = 0x5eedULL;  // start vector; fixed for determinism
};

struct SpectralResult {
  Eigen::VectorXd values;    // ascending
  Eigen::MatrixXd vectors;   // B-orthonormal columns matching values
  Eigen::VectorXd residuals; // ||A x - lambda B x|| / (scale * ||B x||)
  double kernel_tol = 0;
  int negatives = 0, zeros = 0, positives = 0;
  bool converged = false;
  int iterations = 0;
  double shift_used = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

// Deterministic start vector; distribution classes are implementation
// defined, so draw uniform doubles straight from the engine.
inline Eigen::VectorXd deterministic_vector(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i)
    v[i] = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
  return v;
}

inline void classify_spectrum(SpectralResult& r, double requested_kernel_tol) {
  double scale = r.values.size() ? r.values.cwiseAbs().maxCoeff() : 0.0;
  r.kernel_tol = requested_kernel_tol >= 0 ? requested_kernel_tol : 1e-6 * scale;
  r.negatives = r.zeros = r.positives = 0;
  for (int i = 0; i < r.values.size(); ++i) {
    if (r.values[i] < -r.kernel_tol)
      ++r.negatives;
    else if (r.values[i] <= r.kernel_tol)
      ++r.zeros;
    else
      ++r.positives;
  }
}

inline void compute_residuals(SpectralResult& r, const SpMat& A, const SpMat& B) {
  const int k = static_cast<int>(r.values.size());
  r.residuals.resize(k);
  double scale = std::max(r.values.size() ? r.values.cwiseAbs().maxCoeff() : 0.0, 1e-300);
  for (int i = 0; i < k; ++i) {
    Eigen::VectorXd x = r.vectors.col(i);
    Eigen::VectorXd bx = B * x;
    r.residuals[i] = (A * x - r.values[i] * bx).norm() / (scale * bx.norm());
  }
}

}  // namespace detail

// Number of eigenvalues of (A, B) strictly below sigma, by Sylvester inertia
// of A - sigma B. Dense pivoted LDLT; intended for cross-checks at modest n.
inline int eigenvalue_count_below(const SpMat& A, const SpMat& B, double sigma) {
  Eigen::MatrixXd C = Eigen::MatrixXd(A) - sigma * Eigen::MatrixXd(B);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(C);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("eigenvalue_count_below: LDLT failed");
  int count = 0;
  Eigen::VectorXd d = ldlt.vectorD();
  for (int i = 0; i < d.size(); ++i)
    if (d[i] < 0) ++count;
  return count;
}

inline SpectralResult smallest_eigenpairs(const SpMat& A_in, const SpMat& B, int count,
                                          const EigenOptions& opts = {}) {
  const int n = static_cast<int>(A_in.rows());
  if (n == 0 || A_in.cols() != n || B.rows() != n || B.cols() != n)
    throw std::runtime_error("smallest_eigenpairs: dimension mismatch");
  if (count < 1) throw std::runtime_error("smallest_eigenpairs: count must be positive");
  count = std::min(count, n);
  SpMat A = SpMat(0.5 * (A_in + SpMat(A_in.transpose())));  // enforce exact symmetry

  SpectralResult result;

  if (n <= opts.dense_threshold) {
    Eigen::MatrixXd Ad(A), Bd(B);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Ad, Bd,
                                                                 Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("smallest_eigenpairs: dense solver failed (is B positive definite?)");
    result.values = es.eigenvalues().head(count);
    result.vectors = es.eigenvectors().leftCols(count);
    result.converged = true;
    detail::compute_residuals(result, A, B);
    detail::classify_spectrum(result, opts.kernel_tol);
    return result;
  }

  // --- sparse path ---------------------------------------------------------
  // Certify a shift below the spectrum: grow delta until A + delta B admits a
  // Cholesky factorization.
  double scale = 0;
  for (int i = 0; i < n; ++i) {
    double bd = B.coeff(i, i);
    if (bd <= 0) throw std::runtime_error("smallest_eigenpairs: mass diagonal not positive");
    scale = std::max(scale, std::abs(A.coeff(i, i)) / bd);
  }
  scale = std::max(scale, 1e-300);
  double delta = 1e-4 * scale;
  Eigen::SimplicialLLT<SpMat> llt;
  SpMat shifted;
  bool certified = false;
  for (int attempt = 0; attempt < 64 && !certified; ++attempt) {
    shifted = A + delta * B;
    llt.compute(shifted);
    if (llt.info() == Eigen::Success)
      certified = true;
    else
      delta *= 8.0;
  }
  if (!certified) throw std::runtime_error("smallest_eigenpairs: could not certify a shift");
  const double sigma = -delta;
  result.shift_used = sigma;

  // Lanczos on OP = (A - sigma B)^{-1} B, self-adjoint in the B inner product.
  const int m_max = std::min(n, std::max(opts.max_basis, 4 * count + 40));
  Eigen::MatrixXd V(n, m_max);          // B-orthonormal basis
  Eigen::MatrixXd BV(n, m_max);         // cached B * v_j
  Eigen::VectorXd alpha(m_max), beta(m_max);
  Eigen::VectorXd v = detail::deterministic_vector(n, opts.seed);
  {
    double nb = std::sqrt(v.dot(B * v));
    v /= nb;
  }
  V.col(0) = v;
  BV.col(0) = B * v;

  int m = 0;
  bool converged = false;
  Eigen::VectorXd ritz_values;
  Eigen::MatrixXd ritz_vectors;
  std::uint64_t restart_seed = opts.seed;

  while (m < m_max && !converged) {
    Eigen::VectorXd w = llt.solve(BV.col(m));
    alpha[m] = w.dot(BV.col(m));
    w -= alpha[m] * V.col(m);
    if (m > 0) w -= beta[m - 1] * V.col(m - 1);
    for (int pass = 0; pass < 2; ++pass)  // full reorthogonalization, twice
      w -= V.leftCols(m + 1) * (BV.leftCols(m + 1).transpose() * w);
    Eigen::VectorXd bw = B * w;
    double nb = std::sqrt(std::max(w.dot(bw), 0.0));
    if (m + 1 < m_max) {
      if (nb < 1e-13) {
        // Invariant subspace exhausted: continue with a fresh direction.
        Eigen::VectorXd f = detail::deterministic_vector(n, ++restart_seed);
        for (int pass = 0; pass < 2; ++pass)
          f -= V.leftCols(m + 1) * (BV.leftCols(m + 1).transpose() * f);
        double nf = std::sqrt(f.dot(B * f));
        if (nf < 1e-14) break;  // space is exhausted for real
        w = f / nf;
        bw = B * w;
        nb = 0.0;  // genuine beta is zero
      } else {
        w /= nb;
        bw /= nb;
      }
      beta[m] = nb;
      V.col(m + 1) = w;
      BV.col(m + 1) = bw;
    }
    ++m;

    const bool at_cap = (m == m_max);
    if (m >= std::max(2 * count, 8) && (m % 8 == 0 || at_cap)) {
      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
      for (int i = 0; i < m; ++i) {
        T(i, i) = alpha[i];
        if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tes(T);
      // theta descending tail = largest OP eigenvalues = smallest lambda.
      const int k = std::min(count, m);
      Eigen::VectorXd lam(k);
      Eigen::MatrixXd Y(m, k);
      for (int i = 0; i < k; ++i) {
        double theta = tes.eigenvalues()[m - 1 - i];
        lam[i] = sigma + 1.0 / theta;
        Y.col(i) = tes.eigenvectors().col(m - 1 - i);
      }
      ritz_vectors = V.leftCols(m) * Y;
      ritz_values = lam;
      // True residuals against the pencil.
      double sc = std::max(lam.cwiseAbs().maxCoeff(), delta);
      bool all_ok = (m >= count);
      for (int i = 0; i < k && all_ok; ++i) {
        Eigen::VectorXd x = ritz_vectors.col(i);
        Eigen::VectorXd bx = B * x;
        double res = (A * x - lam[i] * bx).norm() / (sc * bx.norm());
        if (res > opts.tol) all_ok = false;
      }
      converged = all_ok && k == count;
      if (converged || at_cap) break;
    }
  }

  // Sort ascending (Ritz tail is already ascending in lambda, but sort defensively).
  {
    std::vector<int> order(ritz_values.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return ritz_values[a] < ritz_values[b]; });
    Eigen::VectorXd vv(ritz_values.size());
    Eigen::MatrixXd vx(n, ritz_values.size());
    for (int i = 0; i < vv.size(); ++i) {
      vv[i] = ritz_values[order[i]];
      vx.col(i) = ritz_vectors.col(order[i]);
    }
    result.values = vv;
    result.vectors = vx;
  }
  result.converged = converged;
  result.iterations = m;
  detail::compute_residuals(result, A, B);
  detail::classify_spectrum(result, opts.kernel_tol);
  return result;
}

}  // namespace fbms
