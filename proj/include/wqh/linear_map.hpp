#pragma once

#include <functional>
#include <utility>

#include "wqh/subalgebra.hpp"

namespace wqh {

/// A linear map between subalgebras (or from one into its tensor square, or into ℂ),
/// stored as a coefficient matrix over orthonormal bases. Columns are the images of
/// the domain basis elements.
class LinearMapOnAlgebra {
 public:
  enum class Codomain { algebra, tensor_square, scalar };

  LinearMapOnAlgebra(SubAlgebraPtr domain, SubAlgebraPtr codomain, Mat coeffs,
                     Codomain kind = Codomain::algebra)
      : domain_(std::move(domain)), codomain_(std::move(codomain)), kind_(kind),
        coeffs_(std::move(coeffs)) {
    const Eigen::Index expect_rows = kind_ == Codomain::scalar ? 1
                                     : kind_ == Codomain::tensor_square
                                         ? static_cast<Eigen::Index>(codomain_->dim()) * codomain_->dim()
                                         : codomain_->dim();
    if (coeffs_.rows() != expect_rows || coeffs_.cols() != domain_->dim())
      throw DimensionMismatch("LinearMapOnAlgebra: coefficient shape mismatch");
  }

  /// Materialize from an ambient-matrix function (algebra codomain).
  static LinearMapOnAlgebra from_function(SubAlgebraPtr domain, SubAlgebraPtr codomain,
                                          const std::function<Mat(const Mat&)>& f) {
    Mat coeffs(codomain->dim(), domain->dim());
    for (int j = 0; j < domain->dim(); ++j) coeffs.col(j) = codomain->expand(f(domain->basis(j)));
    return LinearMapOnAlgebra(std::move(domain), std::move(codomain), std::move(coeffs));
  }

  const SubAlgebra& domain() const { return *domain_; }
  const SubAlgebra& codomain() const { return *codomain_; }
  Codomain kind() const { return kind_; }
  const Mat& coeffs() const { return coeffs_; }

  CVec apply_vec(const CVec& c) const { return coeffs_ * c; }

  Mat apply(const Mat& x) const {
    if (kind_ != Codomain::algebra)
      throw Error("LinearMapOnAlgebra::apply: codomain is not an algebra");
    return codomain_->synthesize(coeffs_ * domain_->expand(x));
  }

  Cplx apply_scalar(const Mat& x) const {
    if (kind_ != Codomain::scalar)
      throw Error("LinearMapOnAlgebra::apply_scalar: codomain is not scalar");
    return (coeffs_ * domain_->expand(x))(0);
  }

 private:
  SubAlgebraPtr domain_;
  SubAlgebraPtr codomain_;  // tensor-square base when kind_ == tensor_square; null for scalar
  Codomain kind_;
  Mat coeffs_;
};

}  // namespace wqh
