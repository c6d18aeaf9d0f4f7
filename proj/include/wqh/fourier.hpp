#pragma once

#include <utility>

#include "wqh/linear_map.hpp"
#include "wqh/tower.hpp"

namespace wqh {

/// Fourier calculus on relative commutants of a tower view:
///
///   F_n : B′∩A_n → A′∩A_{n+1},   F_n(x)  = τ^{−(n+2)/2} E^{B′∩A_{n+1}}_{A′∩A_{n+1}}(x v_{n+1}),
///   F_n⁻¹(w) = τ^{−(n+2)/2} E_{n+1}(w v_{n+1}*),      v_{n+1} = e_{n+1}⋯e_1,
///
/// with the expectation given by the quasi-basis formula τ Σᵢ λᵢ z λᵢ*. Both maps
/// are materialized once as coefficient matrices; mutual inversion is verified at
/// construction.
class FourierCalculus {
 public:
  FourierCalculus(TowerView view, int n, double domain_tol = 1e-8)
      : view_(std::move(view)), n_(n), domain_tol_(domain_tol) {
    if (n < 0 || n + 1 > view_.levels())
      throw InsufficientLevels("FourierCalculus: transform index needs level n+1");
    dom_ = view_.rel_commutant(-1, n);
    cod_ = view_.rel_commutant(0, n + 1);

    v_ = view_.jones(n + 1);
    for (int j = n; j >= 1; --j) v_ = v_ * view_.jones(j);
    if (op_norm(v_) > 1.0 + 1e-12)
      throw InvariantViolation("fourier_v_contraction", op_norm(v_) - 1.0);

    const double tau = view_.tau();
    const double pref = std::pow(tau, -0.5 * (n + 2));
    const auto& lam = view_.quasi_basis();

    fwd_ = Mat(cod_->dim(), dom_->dim());
    for (int j = 0; j < dom_->dim(); ++j) {
      Mat xv = dom_->basis(j) * v_;
      Mat acc = Mat::Zero(view_.ambient_dim(), view_.ambient_dim());
      for (const auto& l : lam) acc += l * xv * l.adjoint();
      fwd_.col(j) = cod_->expand(Mat(pref * tau * acc));
    }
    inv_ = Mat(dom_->dim(), cod_->dim());
    Mat v_adj = v_.adjoint();
    for (int j = 0; j < cod_->dim(); ++j) {
      inv_.col(j) = dom_->expand(Mat(pref * view_.expectation(n + 1, Mat(cod_->basis(j) * v_adj))));
    }

    const double res = (inv_ * fwd_ - Mat::Identity(dom_->dim(), dom_->dim())).norm() /
                       std::sqrt(static_cast<double>(dom_->dim()));
    if (res > 1e-10) throw InvariantViolation("fourier_mutual_inverse", res);
  }

  const TowerView& view() const { return view_; }
  int index() const { return n_; }
  const SubAlgebra& domain() const { return *dom_; }
  const SubAlgebra& codomain() const { return *cod_; }
  SubAlgebraPtr domain_ptr() const { return dom_; }
  SubAlgebraPtr codomain_ptr() const { return cod_; }
  const Mat& v() const { return v_; }
  const Mat& coeffs_fwd() const { return fwd_; }
  const Mat& coeffs_inv() const { return inv_; }

  LinearMapOnAlgebra as_map() const { return {dom_, cod_, fwd_}; }
  LinearMapOnAlgebra as_inverse_map() const { return {cod_, dom_, inv_}; }

  Mat fourier(const Mat& x) const {
    require_member(*dom_, x, "fourier: x not in B′∩A_n");
    return cod_->synthesize(fwd_ * dom_->expand(x));
  }

  Mat fourier_inv(const Mat& w) const {
    require_member(*cod_, w, "fourier_inv: w not in A′∩A_{n+1}");
    return dom_->synthesize(inv_ * cod_->expand(w));
  }

  /// x ⋆ y = F⁻¹(F(y)·F(x)), in coefficient space.
  CVec convolve_vec(const CVec& xc, const CVec& yc) const {
    return inv_ * cod_->product_vec(fwd_ * yc, fwd_ * xc);
  }

  Mat convolve(const Mat& x, const Mat& y) const {
    require_member(*dom_, x, "convolve: x not in B′∩A_n");
    require_member(*dom_, y, "convolve: y not in B′∩A_n");
    return dom_->synthesize(convolve_vec(dom_->expand(x), dom_->expand(y)));
  }

  /// ρ_n⁺(x) = (F⁻¹(F(x)*))*.
  CVec rotation_vec(const CVec& xc) const {
    return dom_->star_vec(inv_ * cod_->star_vec(fwd_ * xc));
  }

  Mat rotation(const Mat& x) const {
    require_member(*dom_, x, "rotation: x not in B′∩A_n");
    return dom_->synthesize(rotation_vec(dom_->expand(x)));
  }

 private:
  void require_member(const SubAlgebra& S, const Mat& x, const char* what) const {
    const double res = S.membership_residual(x);
    if (res > domain_tol_) throw NotInDomain(what, res);
  }

  TowerView view_;
  int n_;
  double domain_tol_;
  SubAlgebraPtr dom_, cod_;
  Mat v_;
  Mat fwd_, inv_;
};

/// r₁⁺ by its closed form  r₁⁺(x) = τ⁻¹ Σᵢ E₁(e₁λᵢx) e₁λᵢ*  on B′∩A₁ of the view.
inline Mat reflection_r1(const TowerView& view, const Mat& x, double domain_tol = 1e-8) {
  auto C = view.rel_commutant(-1, 1);
  const double res = C->membership_residual(x);
  if (res > domain_tol) throw NotInDomain("reflection_r1: x not in B′∩A₁", res);
  const Mat& e1 = view.jones(1);
  Mat acc = Mat::Zero(view.ambient_dim(), view.ambient_dim());
  for (const auto& l : view.quasi_basis())
    acc += view.expectation(1, Mat(e1 * l * x)) * e1 * l.adjoint();
  return acc / view.tau();
}

enum class S0Route { explicit_formula, composed };

/// S₀⁺ : B′∩A₁ → A₁′∩A₃. Explicit route: τ⁻² Σᵢ λᵢ e₁e₂ x e₃e₂e₁ λᵢ*.
/// Composed route: r₃⁺∘r₁⁺ with r₃⁺ = (ρ₃⁺)², which needs four levels.
inline Mat shift_s0(const TowerView& view, const Mat& x, S0Route route = S0Route::explicit_formula,
                    double domain_tol = 1e-8) {
  auto C = view.rel_commutant(-1, 1);
  const double res = C->membership_residual(x);
  if (res > domain_tol) throw NotInDomain("shift_s0: x not in B′∩A₁", res);

  if (route == S0Route::explicit_formula) {
    if (view.levels() < 3) throw InsufficientLevels("shift_s0: explicit route needs level 3");
    const Mat left = view.jones(1) * view.jones(2);
    const Mat right = view.jones(3) * view.jones(2) * view.jones(1);
    Mat acc = Mat::Zero(view.ambient_dim(), view.ambient_dim());
    for (const auto& l : view.quasi_basis()) acc += l * left * x * right * l.adjoint();
    return acc / (view.tau() * view.tau());
  }

  if (view.levels() < 4) throw InsufficientLevels("shift_s0: composed route needs level 4");
  FourierCalculus f1(view, 1, domain_tol), f3(view, 3, domain_tol);
  Mat r1 = f1.rotation(x);
  return f3.rotation(f3.rotation(r1));
}

}  // namespace wqh
