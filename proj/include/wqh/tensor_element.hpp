#pragma once

#include <utility>

#include "wqh/subalgebra.hpp"

namespace wqh {

/// An element of C ⊗ C over the orthonormal basis {b_α ⊗ b_β} of a structural
/// subalgebra C, stored as its coefficient matrix. The concrete representation
/// is the Kronecker rep over C's reduced (free-slot) faithful copy M_r, so that
/// positivity and products are those of C ⊗ C.
class TensorElement {
 public:
  TensorElement(SubAlgebraPtr base, Mat coeffs) : base_(std::move(base)), coeffs_(std::move(coeffs)) {
    if (coeffs_.rows() != base_->dim() || coeffs_.cols() != base_->dim())
      throw DimensionMismatch("TensorElement: coefficient shape");
  }

  static TensorElement pure(SubAlgebraPtr base, const Mat& x, const Mat& y) {
    CVec xc = base->expand(x), yc = base->expand(y);
    return TensorElement(base, Mat(xc * yc.transpose()));
  }

  const SubAlgebra& base() const { return *base_; }
  SubAlgebraPtr base_ptr() const { return base_; }
  const Mat& coeffs() const { return coeffs_; }
  int dim() const { return base_->dim(); }

  /// Norm induced by ⟨a⊗b, c⊗d⟩ = ⟨a,c⟩⟨b,d⟩ (Frobenius on coefficients).
  double norm() const { return coeffs_.norm(); }

  /// Tensor flip Π.
  TensorElement flip() const { return {base_, Mat(coeffs_.transpose())}; }

  /// (*⊗*) applied entrywise to the legs.
  TensorElement star() const {
    const int r = base_->red_dim();
    const int d = base_->dim();
    Mat out(d, d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) out(transp(a, r), transp(b, r)) = std::conj(coeffs_(a, b));
    return {base_, std::move(out)};
  }

  /// Faithful Kronecker representation in M_{r²}, r the reduced dimension of C.
  Mat concrete_reduced() const {
    const int r = base_->red_dim();
    Mat z = Mat::Zero(r * r, r * r);
    for (int p1 = 0; p1 < r; ++p1)
      for (int q1 = 0; q1 < r; ++q1)
        for (int p2 = 0; p2 < r; ++p2)
          for (int q2 = 0; q2 < r; ++q2)
            z(p1 * r + p2, q1 * r + q2) = static_cast<double>(r) * coeffs_(p1 * r + q1, p2 * r + q2);
    return z;
  }

  static TensorElement from_concrete_reduced(SubAlgebraPtr base, const Mat& z) {
    const int r = base->red_dim();
    const int d = base->dim();
    Mat c(d, d);
    for (int p1 = 0; p1 < r; ++p1)
      for (int q1 = 0; q1 < r; ++q1)
        for (int p2 = 0; p2 < r; ++p2)
          for (int q2 = 0; q2 < r; ++q2)
            c(p1 * r + q1, p2 * r + q2) = z(p1 * r + p2, q1 * r + q2) / static_cast<double>(r);
    return {std::move(base), std::move(c)};
  }

  TensorElement operator*(const TensorElement& other) const {
    return from_concrete_reduced(base_, Mat(concrete_reduced() * other.concrete_reduced()));
  }

  TensorElement operator+(const TensorElement& other) const {
    return {base_, Mat(coeffs_ + other.coeffs_)};
  }
  TensorElement operator-(const TensorElement& other) const {
    return {base_, Mat(coeffs_ - other.coeffs_)};
  }

  /// (φ⊗id): contract a linear functional (φ(x) = Σ f_γ x_γ) against the left leg.
  CVec contract_left(const CVec& f) const { return coeffs_.transpose() * f; }
  /// (id⊗φ).
  CVec contract_right(const CVec& f) const { return coeffs_ * f; }

  /// Apply a coefficient-matrix linear map to the left / right leg.
  TensorElement map_left(const Mat& L) const { return {base_, Mat(L * coeffs_)}; }
  TensorElement map_right(const Mat& L) const { return {base_, Mat(coeffs_ * L.transpose())}; }

 private:
  static int transp(int idx, int r) {
    const int p = idx / r, q = idx % r;
    return q * r + p;
  }

  SubAlgebraPtr base_;
  Mat coeffs_;
};

}  // namespace wqh
