#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "wqh/errors.hpp"

#ifndef LAPACK_COMPLEX_CPP
#define LAPACK_COMPLEX_CPP
#endif
#include <lapacke.h>

namespace wqh {

using Cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

/// Normalized trace (1/n)·Σ x_ii.
inline Cplx ntr(const Mat& x) {
  if (x.rows() != x.cols()) throw DimensionMismatch("ntr: matrix not square");
  return x.trace() / static_cast<double>(x.rows());
}

/// ⟨x,y⟩ := ntr(x* y). Conjugate-linear in the first argument.
inline Cplx trace_ip(const Mat& x, const Mat& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols() || x.rows() != x.cols())
    throw DimensionMismatch("trace_ip: shapes differ or not square");
  return x.conjugate().cwiseProduct(y).sum() / static_cast<double>(x.rows());
}

/// Norm induced by trace_ip (Frobenius scaled by 1/√n).
inline double ntr_norm(const Mat& x) {
  return x.norm() / std::sqrt(static_cast<double>(x.rows()));
}

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Largest singular value, via the top eigenvalue of x*x.
inline double op_norm(const Mat& x) {
  if (x.size() == 0) return 0.0;
  if (x.rows() == 1 && x.cols() == 1) return std::abs(x(0, 0));
  Eigen::SelfAdjointEigenSolver<Mat> es(Mat(x.adjoint() * x), Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues()(es.eigenvalues().size() - 1);
  return std::sqrt(std::max(top, 0.0));
}

/// Relative deviation from Hermitianity in Frobenius norm.
inline double hermiticity_residual(const Mat& x) {
  const double nx = x.norm();
  if (nx == 0.0) return 0.0;
  return (x - x.adjoint()).norm() / nx;
}

/// All eigenvalues of a Hermitian matrix, ascending. Destroys `x`.
inline RVec hermitian_eigenvalues_inplace(Mat& x) {
  const auto n = static_cast<lapack_int>(x.rows());
  RVec w(n);
  lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'L', n,
                                   reinterpret_cast<lapack_complex_double*>(x.data()), n,
                                   w.data());
  if (info != 0) throw Error("zheevd failed with info=" + std::to_string(info));
  return w;
}

inline RVec hermitian_eigenvalues(const Mat& x) {
  Mat tmp = x;
  return hermitian_eigenvalues_inplace(tmp);
}

/// Smallest eigenvalue of a matrix that is Hermitian within `herm_tol` (relative).
inline double min_hermitian_eig(const Mat& x, double herm_tol = 1e-10) {
  if (x.rows() != x.cols()) throw DimensionMismatch("min_hermitian_eig: not square");
  const double hres = hermiticity_residual(x);
  if (hres > herm_tol)
    throw NotHermitian("min_hermitian_eig: hermiticity residual " + std::to_string(hres));
  Mat sym = 0.5 * (x + x.adjoint());
  return hermitian_eigenvalues_inplace(sym)(0);
}

inline bool all_finite(const Mat& x) { return x.allFinite(); }

/// ‖x − y‖ relative to max(‖x‖,‖y‖,1e-300), operator norm.
inline double rel_op_residual(const Mat& x, const Mat& y) {
  const double scale = std::max({op_norm(x), op_norm(y), 1e-300});
  return op_norm(Mat(x - y)) / scale;
}

/// Same in the ntr-induced norm (cheap; used for larger matrices).
inline double rel_fro_residual(const Mat& x, const Mat& y) {
  const double scale = std::max({x.norm(), y.norm(), 1e-300});
  return (x - y).norm() / scale;
}

}  // namespace wqh
