#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "wqh/fourier.hpp"
#include "wqh/tensor_element.hpp"

namespace wqh {

struct HypergroupOptions {
  double domain_tol = 1e-8;
  bool verify = true;      // construction-time checks of the auxiliary expectation
  int verify_samples = 3;
};

struct CpCertificate {
  double min_eig;   // smallest eigenvalue of the basis block matrix [Δ(b_α* b_β)]
  double norm;      // largest |eigenvalue| of that matrix
  int block_dim;    // side length of the block matrix
};

/// The weak-quantum-hypergroup structure carried by C = B′∩A₁ of a tower view:
///
///   ⟨Δ(x), y⊗z⟩ = τ^{1/2} ⟨x, y⋆z⟩,     ε(x) = τ⁻¹⟨e₁, x⟩,     x# = r₁⁺(x*),
///
/// with the counital maps ε^t(x) = τ⁻¹E₁(xe₁) and ε^s(x) = τ⁻¹r₁⁺(E₁(e₁x)),
/// Δ(1) = Σᵢ r₁⁺(γᵢ*)⊗γᵢ over a quasi-basis {γᵢ} of E₀|_{B′∩A}, and e₁ as the
/// Haar integral. Since the inner product is conjugate-linear in its first slot,
/// the coproduct materializes over an orthonormal basis as
/// Δ(x) = τ^{1/2} Σ_{α,β} ⟨b_α⋆b_β, x⟩ b_α⊗b_β.
class HypergroupStructure {
 public:
  explicit HypergroupStructure(TowerView view, HypergroupOptions opts = {})
      : view_(std::move(view)), opts_(opts), F1_(view_, 1, opts.domain_tol) {
    C_ = F1_.domain_ptr();
    const int d = C_->dim();
    const double rt = std::sqrt(view_.tau());

    delta_ = Mat(d * d, d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        CVec t = F1_.convolve_vec(CVec::Unit(d, a), CVec::Unit(d, b));
        delta_.row(a * d + b) = rt * t.conjugate().transpose();
      }

    const Mat& e1 = view_.jones(1);
    eps_ = CVec(d);
    for (int g = 0; g < d; ++g) eps_(g) = ntr(Mat(e1 * C_->basis(g))) / view_.tau();

    r1_ = Mat(d, d);
    for (int g = 0; g < d; ++g) r1_.col(g) = C_->expand(reflection_r1(view_, C_->basis(g)));

    eps_t_ = Mat(d, d);
    eps_s_ = Mat(d, d);
    for (int g = 0; g < d; ++g) {
      eps_t_.col(g) = C_->expand(view_.expectation(1, Mat(C_->basis(g) * e1))) / view_.tau();
      eps_s_.col(g) =
          r1_ * C_->expand(view_.expectation(1, Mat(e1 * C_->basis(g)))) / view_.tau();
    }

    delta_one_.emplace(delta(Mat::Identity(view_.ambient_dim(), view_.ambient_dim())));
    gammas_ = quasi_basis_of_state(view_, -1, 0).family;

    if (view_.levels() >= 3) {
      P34_ = view_.rel_commutant(1, 3);
      span13_ = view_.rel_commutant(-1, 3);
      s0_images_.reserve(static_cast<size_t>(d));
      for (int g = 0; g < d; ++g) s0_images_.push_back(shift_s0(view_, C_->basis(g)));
      if (opts.verify) verify_product_span_expectation();
    }
  }

  const TowerView& view() const { return view_; }
  const SubAlgebra& algebra() const { return *C_; }
  SubAlgebraPtr algebra_ptr() const { return C_; }
  const FourierCalculus& fourier1() const { return F1_; }
  const Mat& haar() const { return view_.jones(1); }
  const TensorElement& delta_one() const { return *delta_one_; }
  const Mat& delta_coeffs() const { return delta_; }
  const CVec& eps_coeffs() const { return eps_; }
  const Mat& r1_coeffs() const { return r1_; }
  const Mat& eps_t_coeffs() const { return eps_t_; }
  const Mat& eps_s_coeffs() const { return eps_s_; }
  const std::vector<Mat>& gamma_basis() const { return gammas_; }

  LinearMapOnAlgebra delta_as_map() const {
    return {C_, C_, delta_, LinearMapOnAlgebra::Codomain::tensor_square};
  }
  LinearMapOnAlgebra eps_as_map() const {
    return {C_, nullptr, Mat(eps_.transpose()), LinearMapOnAlgebra::Codomain::scalar};
  }

  // --- the structure maps -------------------------------------------------

  TensorElement delta_from_vec(const CVec& xc) const {
    const int d = C_->dim();
    CVec flat = delta_ * xc;
    Mat c(d, d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) c(a, b) = flat(a * d + b);
    return {C_, std::move(c)};
  }

  TensorElement delta(const Mat& x) const {
    require_member(x, "delta: x not in B′∩A₁");
    return delta_from_vec(C_->expand(x));
  }

  /// Direct route: Δ(z) = τ⁻² T⁻¹(E(e₂ z e₃ e₂)), with E the trace-preserving
  /// expectation onto (B′∩A₁)(A₁′∩A₃) and T(x⊗y) = x·S₀⁺(y).
  TensorElement delta_direct(const Mat& z) const {
    require_member(z, "delta_direct: z not in B′∩A₁");
    if (view_.levels() < 3) throw InsufficientLevels("delta_direct: needs level 3");
    Mat g = view_.jones(2) * z * view_.jones(3) * view_.jones(2);
    g = span13_->project(g);  // E onto the product span (equal to B′∩A₃ here)
    TensorElement out = t_map_inv(g);
    const double t2 = view_.tau() * view_.tau();
    return {C_, Mat(out.coeffs() / t2)};
  }

  Cplx counit(const Mat& x) const {
    require_member(x, "counit: x not in B′∩A₁");
    return (eps_.transpose() * C_->expand(x))(0);  // Σ ε(b_γ)·x_γ, no conjugation
  }

  CVec sharp_vec(const CVec& xc) const { return r1_ * C_->star_vec(xc); }

  Mat sharp(const Mat& x) const {
    require_member(x, "sharp: x not in B′∩A₁");
    return C_->synthesize(sharp_vec(C_->expand(x)));
  }

  Mat r1(const Mat& x) const {
    require_member(x, "r1: x not in B′∩A₁");
    return C_->synthesize(r1_ * C_->expand(x));
  }

  Mat eps_t(const Mat& x) const {
    require_member(x, "eps_t: x not in B′∩A₁");
    return C_->synthesize(eps_t_ * C_->expand(x));
  }

  Mat eps_s(const Mat& x) const {
    require_member(x, "eps_s: x not in B′∩A₁");
    return C_->synthesize(eps_s_ * C_->expand(x));
  }

  /// ε^t via the Sweedler expansion of Δ(1): ε(1_{(1)}x)·1_{(2)}.
  Mat eps_t_definitional(const Mat& x) const {
    // ε(b_α·x) = τ⁻¹ tr(e₁ b_α x) = τ⁻¹ tr(b_α·(x e₁))
    CVec u = trace_vec(Mat(x * view_.jones(1))) / view_.tau();
    return C_->synthesize(delta_one_->contract_left(u));
  }

  /// ε^s via the Sweedler expansion of Δ(1): 1_{(1)}·ε(x1_{(2)}).
  Mat eps_s_definitional(const Mat& x) const {
    // ε(x·b_β) = τ⁻¹ tr(b_β·(e₁ x))
    CVec u = trace_vec(Mat(view_.jones(1) * x)) / view_.tau();
    return C_->synthesize(delta_one_->contract_right(u));
  }

  /// T(Σ c_{αβ} b_α⊗b_β) = Σ c_{αβ} b_α·S₀⁺(b_β) ∈ (B′∩A₁)(A₁′∩A₃).
  Mat t_map(const TensorElement& t) const {
    if (view_.levels() < 3) throw InsufficientLevels("t_map: needs level 3");
    const int d = C_->dim();
    const int r = C_->red_dim();
    Mat acc = Mat::Zero(r * r, r * r);
    for (int a = 0; a < d; ++a) {
      Mat w = Mat::Zero(r, r);
      bool nonzero = false;
      for (int b = 0; b < d; ++b) {
        const Cplx c = t.coeffs()(a, b);
        if (c == Cplx(0, 0)) continue;
        w += c * s0_reduced(b);
        nonzero = true;
      }
      if (!nonzero) continue;
      const int p = a / r, q = a % r;
      acc.block(p * r, q * r, r, r) += std::sqrt(static_cast<double>(r)) * w;
    }
    return span13_->unreduce(acc);
  }

  /// T⁻¹ against the orthonormal product basis {b_α S₀⁺(b_β)}.
  TensorElement t_map_inv(const Mat& g) const {
    if (view_.levels() < 3) throw InsufficientLevels("t_map_inv: needs level 3");
    const int d = C_->dim();
    const int r = C_->red_dim();
    Mat gr = span13_->reduce(g);
    Mat c(d, d);
    const double rt = std::sqrt(static_cast<double>(r));
    for (int a = 0; a < d; ++a) {
      const int p = a / r, q = a % r;
      Mat block = gr.block(p * r, q * r, r, r);
      for (int b = 0; b < d; ++b)
        c(a, b) = rt * s0_reduced(b).conjugate().cwiseProduct(block).sum() /
                  static_cast<double>(r * r);
    }
    return {C_, std::move(c)};
  }

  const Mat& s0_image(int b) const { return s0_images_[static_cast<size_t>(b)]; }

  // --- axiom residuals ------------------------------------------------------

  /// Coassociativity (Frobenius on triple coefficients) and both counit laws.
  struct CoalgebraResiduals {
    double coassoc, counit_left, counit_right;
  };
  CoalgebraResiduals coalgebra_residuals(const Mat& x) const {
    const int d = C_->dim();
    TensorElement dx = delta(x);
    // (Δ⊗id)Δ(x) and (id⊗Δ)Δ(x) as dim×dim² coefficient tensors
    Mat left(d * d, d), right(d, d * d);
    left = delta_ * dx.coeffs();              // rows (αβ), cols γ: Δ on the left leg
    right = dx.coeffs() * delta_.transpose(); // rows α, cols (βγ): Δ on the right leg
    double num = 0.0, den = 0.0;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int g = 0; g < d; ++g) {
          const Cplx l = left(a * d + b, g);
          const Cplx r = right(a, b * d + g);
          num += std::norm(l - r);
          den += std::norm(l);
        }
    CoalgebraResiduals out{};
    out.coassoc = std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
    Mat el = C_->synthesize(dx.contract_left(eps_));
    Mat er = C_->synthesize(dx.contract_right(eps_));
    const double nx = std::max(op_norm(x), 1e-300);
    out.counit_left = op_norm(Mat(el - x)) / nx;
    out.counit_right = op_norm(Mat(er - x)) / nx;
    return out;
  }

  /// ‖Δ_dual(x) − Δ_direct(x)‖ / ‖Δ_dual(x)‖ (tensor Frobenius).
  double route_equivalence_residual(const Mat& x) const {
    TensorElement a = delta(x);
    TensorElement b = delta_direct(x);
    return (a.coeffs() - b.coeffs()).norm() / std::max(a.norm(), 1e-300);
  }

  /// ‖Δ(x#) − Π((#⊗#)Δ(x))‖ (tensor Frobenius, relative).
  double flip_sharp_residual(const Mat& x) const {
    TensorElement lhs = delta(sharp(x));
    // (#⊗#) on a tensor: legs get x ↦ r₁⁺(x*); on coefficients that is
    // SH·conj-star(c)·SHᵀ with SH the sharp matrix on basis vectors.
    TensorElement st = delta(x).star();
    TensorElement both = st.map_left(r1_).map_right(r1_);
    TensorElement rhs = both.flip();
    return (lhs.coeffs() - rhs.coeffs()).norm() / std::max(lhs.norm(), 1e-300);
  }

  struct SharpResiduals {
    double antilinear, involutive, multiplicative, star_commute;
  };
  SharpResiduals sharp_residuals(const Mat& x, const Mat& y) const {
    SharpResiduals out{};
    const double nx = std::max(op_norm(x), 1e-300);
    Mat sx = sharp(x);
    out.antilinear = op_norm(Mat(sharp(Mat(Cplx(0, 1) * x)) + Cplx(0, 1) * sx)) / nx;
    out.involutive = op_norm(Mat(sharp(sx) - x)) / nx;
    out.multiplicative =
        op_norm(Mat(sharp(Mat(x * y)) - sx * sharp(y))) / (nx * std::max(op_norm(y), 1e-300));
    out.star_commute = op_norm(Mat(sharp(Mat(x.adjoint())) - sx.adjoint())) / nx;
    return out;
  }

  /// |ε(xyz) − Σ ε(xy_{(1)})ε(y_{(2)}z)| and the leg-flipped variant.
  struct WeakCounitResiduals {
    double order12, order21;
  };
  WeakCounitResiduals weak_counit_residuals(const Mat& x, const Mat& y, const Mat& z) const {
    const Cplx direct = ntr(Mat(view_.jones(1) * x * y * z)) / view_.tau();
    CVec u = trace_vec(Mat(view_.jones(1) * x)) / view_.tau();  // u_α = ε(x b_α)
    CVec v = trace_vec(Mat(z * view_.jones(1))) / view_.tau();  // v_β = ε(b_β z)
    Mat dy = delta(y).coeffs();
    const Cplx w1 = (u.transpose() * dy * v)(0);          // ε(x y_(1)) ε(y_(2) z)
    const Cplx w2 = (v.transpose() * dy * u)(0);          // ε(x y_(2)) ε(y_(1) z)
    const double scale = std::max(std::abs(direct), 1.0);
    return {std::abs(direct - w1) / scale, std::abs(direct - w2) / scale};
  }

  /// (id⊗Δ)Δ(1) against both factorizations (Δ(1)⊗1)(1⊗Δ(1)) and (1⊗Δ(1))(Δ(1)⊗1).
  struct WeakUnitResiduals {
    double expand_vs_left, expand_vs_right;
  };
  WeakUnitResiduals weak_unit_residuals() const {
    const int d = C_->dim();
    const int r = C_->red_dim();
    const Mat& u = delta_one_->coeffs();

    // (id⊗Δ)Δ(1) coefficients: rows α, cols (βγ)
    Mat expand3 = u * delta_.transpose();

    // triple concrete products
    Mat c2 = delta_one_->concrete_reduced();
    Mat left3 = kron_triple_left(c2, r) * kron_triple_right(c2, r);
    Mat right3 = kron_triple_right(c2, r) * kron_triple_left(c2, r);

    double nl = 0, nr = 0, den = 0;
    const double r32 = std::pow(static_cast<double>(r), 1.5);
    for (int a = 0; a < d; ++a) {
      const int p1 = a / r, q1 = a % r;
      for (int b = 0; b < d; ++b) {
        const int p2 = b / r, q2 = b % r;
        for (int g = 0; g < d; ++g) {
          const int p3 = g / r, q3 = g % r;
          const Cplx ref = expand3(a, b * d + g);
          const Eigen::Index row = (p1 * r + p2) * r + p3, col = (q1 * r + q2) * r + q3;
          nl += std::norm(ref - left3(row, col) / r32);
          nr += std::norm(ref - right3(row, col) / r32);
          den += std::norm(ref);
        }
      }
    }
    const double scale = std::max(std::sqrt(den), 1e-300);
    return {std::sqrt(nl) / scale, std::sqrt(nr) / scale};
  }

  /// tr as a left/right invariant normalized measure.
  struct MeasureResiduals {
    double left_invariance, right_invariance, left_normalized, right_normalized;
  };
  MeasureResiduals measure_residuals(const Mat& x) const {
    TensorElement dx = delta(x);
    CVec tr = trace_functional();
    Mat lhsL = C_->synthesize(dx.contract_right(tr));           // x_(1)·tr(x_(2))
    Mat rhsL = C_->synthesize(eps_t_ * dx.contract_right(tr));  // ε^t(x_(1))·tr(x_(2))
    Mat lhsR = C_->synthesize(dx.contract_left(tr));            // tr(x_(1))·x_(2)
    Mat rhsR = C_->synthesize(eps_s_ * dx.contract_left(tr));   // tr(x_(1))·ε^s(x_(2))
    const double nx = std::max(op_norm(x), 1e-300);
    const Mat id = Mat::Identity(view_.ambient_dim(), view_.ambient_dim());
    Mat nl = C_->synthesize(delta_one_->contract_right(tr));
    Mat nr = C_->synthesize(delta_one_->contract_left(tr));
    return {op_norm(Mat(lhsL - rhsL)) / nx, op_norm(Mat(lhsR - rhsR)) / nx,
            op_norm(Mat(nl - id)), op_norm(Mat(nr - id))};
  }

  /// ⟨y, x_{(1)}tr(x_{(2)})⟩ = tr(x·E₁(y*)).
  double measure_pairing_residual(const Mat& x, const Mat& y) const {
    TensorElement dx = delta(x);
    Mat smeared = C_->synthesize(dx.contract_right(trace_functional()));
    const Cplx lhs = trace_ip(y, smeared);
    const Cplx rhs = ntr(Mat(x * view_.expectation(1, Mat(y.adjoint()))));
    return std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1.0});
  }

  /// e₁ as a Haar integral: a·e₁ = ε^t(a)·e₁, e₁·a = e₁·ε^s(a), ε^t(e₁) = ε^s(e₁) = 1.
  struct HaarResiduals {
    double left_integral, right_integral, eps_t_of_haar, eps_s_of_haar;
  };
  HaarResiduals haar_residuals(const Mat& a) const {
    const Mat& e1 = view_.jones(1);
    const Mat id = Mat::Identity(view_.ambient_dim(), view_.ambient_dim());
    const double na = std::max(op_norm(a), 1e-300);
    return {op_norm(Mat(a * e1 - eps_t(a) * e1)) / na,
            op_norm(Mat(e1 * a - e1 * eps_s(a))) / na,
            op_norm(Mat(eps_t(e1) - id)),
            op_norm(Mat(eps_s(e1) - id))};
  }

  /// Convolution identities tying e₁, E₁ and r₁⁺ together:
  ///   ⟨z, (xe₁)⋆y⟩ = τ^{-1/2}·tr(E₁(xe₁)·y·z*),
  ///   ⟨x, y⋆1⟩ = τ^{-1/2}·tr(y·E₁(x*)),
  ///   e₁·r₁⁺(v) = e₁·v for v ∈ B′∩A.
  struct ConvIdentityResiduals {
    double projection_form, unit_form, reflection_form;
  };
  ConvIdentityResiduals conv_identity_residuals(const Mat& x, const Mat& y, const Mat& z,
                                                const Mat& v) const {
    const Mat& e1 = view_.jones(1);
    const double rt = std::sqrt(view_.tau());
    const Mat id = Mat::Identity(view_.ambient_dim(), view_.ambient_dim());
    ConvIdentityResiduals out{};

    Cplx lhs1 = trace_ip(z, F1_.convolve(Mat(x * e1), y));
    Cplx rhs1 = ntr(Mat(view_.expectation(1, Mat(x * e1)) * y * z.adjoint())) / rt;
    out.projection_form = std::abs(lhs1 - rhs1) / std::max({std::abs(rhs1), 1.0});

    Cplx lhs2 = trace_ip(x, F1_.convolve(y, id));
    Cplx rhs2 = ntr(Mat(y * view_.expectation(1, Mat(x.adjoint())))) / rt;
    out.unit_form = std::abs(lhs2 - rhs2) / std::max({std::abs(rhs2), 1.0});

    out.reflection_form =
        op_norm(Mat(e1 * reflection_r1(view_, v) - e1 * v)) / std::max(op_norm(v), 1e-300);
    return out;
  }

  /// ‖Δ(x*) − (*⊗*)Δ(x)‖ / ‖Δ(x)‖.
  double star_preservation_residual(const Mat& x) const {
    TensorElement a = delta(Mat(x.adjoint()));
    TensorElement b = delta(x).star();
    return (a.coeffs() - b.coeffs()).norm() / std::max(a.norm(), 1e-300);
  }

  /// Positivity of the basis block matrix [Δ(b_α* b_β)] in the reduced Kronecker
  /// representation; complete positivity of Δ is equivalent to M ⪰ 0.
  CpCertificate cp_certificate() const {
    const int d = C_->dim();
    const int r = C_->red_dim();
    const int blk = r * r;
    const Eigen::Index n = static_cast<Eigen::Index>(d) * blk;
    Mat M = Mat::Zero(n, n);
    const double rt = std::sqrt(static_cast<double>(r));
    for (int a = 0; a < d; ++a) {
      const int pa = a / r, qa = a % r;
      for (int b = 0; b < d; ++b) {
        const int pb = b / r, qb = b % r;
        if (pa != pb) continue;  // b_α*·b_β = √r·δ_{P_α P_β}·b_(Q_α,Q_β)
        CVec flat = rt * delta_.col(qa * r + qb);
        for (int p1 = 0; p1 < r; ++p1)
          for (int q1 = 0; q1 < r; ++q1)
            for (int p2 = 0; p2 < r; ++p2)
              for (int q2 = 0; q2 < r; ++q2)
                M(a * blk + p1 * r + p2, b * blk + q1 * r + q2) =
                    static_cast<double>(r) * flat((p1 * r + q1) * d + (p2 * r + q2));
      }
    }
    const double hres = hermiticity_residual(M);
    if (hres > 1e-9) throw NotHermitian("cp_certificate: block matrix not Hermitian");
    M = 0.5 * (M + M.adjoint());
    RVec w = hermitian_eigenvalues_inplace(M);
    return {w(0), std::max(std::abs(w(0)), std::abs(w(w.size() - 1))),
            static_cast<int>(n)};
  }

  /// Min eigenvalue of the concrete representation of Δ(x*x) (spot positivity).
  double delta_positivity_spot(const Mat& x) const {
    TensorElement t = delta(Mat(x.adjoint() * x));
    Mat z = t.concrete_reduced();
    return min_hermitian_eig(Mat(0.5 * (z + z.adjoint())), 1e-7);
  }

  /// ε(x_{(1)}y)·x_{(2)} = x·ε^t(y).
  double eps_t_product_residual(const Mat& x, const Mat& y) const {
    TensorElement dx = delta(x);
    CVec u = trace_vec(Mat(y * view_.jones(1))) / view_.tau();  // u_α = ε(b_α·y)
    Mat lhs = C_->synthesize(dx.contract_left(u));
    Mat rhs = x * eps_t(y);
    return op_norm(Mat(lhs - rhs)) /
           std::max({op_norm(x) * std::max(op_norm(y), 1e-300), 1e-300});
  }

  /// Δ(xv) = Δ(x)(v⊗1) for v ∈ B′∩A.
  double delta_module_residual(const Mat& x, const Mat& v) const {
    TensorElement lhs = delta(Mat(x * v));
    const Mat id = Mat::Identity(view_.ambient_dim(), view_.ambient_dim());
    TensorElement rhs = delta(x) * TensorElement::pure(C_, v, id);
    return (lhs.coeffs() - rhs.coeffs()).norm() / std::max(lhs.norm(), 1e-300);
  }

  /// Δ(1) = Σᵢ r₁⁺(γᵢ*) ⊗ γᵢ.
  double delta_one_gamma_residual() const {
    const int d = C_->dim();
    Mat acc = Mat::Zero(d, d);
    for (const auto& g : gammas_) {
      CVec l = C_->expand(reflection_r1(view_, Mat(g.adjoint())));
      CVec rvec = C_->expand(g);
      acc += l * rvec.transpose();
    }
    return (acc - delta_one_->coeffs()).norm() / std::max(delta_one_->norm(), 1e-300);
  }

  /// ε(x*) = conj(ε(x)).
  double counit_star_residual(const Mat& x) const {
    const Cplx a = counit(Mat(x.adjoint()));
    const Cplx b = std::conj(counit(x));
    return std::abs(a - b) / std::max({std::abs(a), 1.0});
  }

  /// tr(b_γ·M) over the basis, as a coefficient vector (bilinear, no conjugation).
  CVec trace_vec(const Mat& M) const { return C_->trace_pairing_vec(M); }

  /// The functional x ↦ tr(x) over the basis.
  CVec trace_functional() const {
    CVec t(C_->dim());
    for (int g = 0; g < C_->dim(); ++g) t(g) = ntr(C_->basis(g));
    return t;
  }

 private:
  void require_member(const Mat& x, const char* what) const {
    const double res = C_->membership_residual(x);
    if (res > opts_.domain_tol) throw NotInDomain(what, res);
  }

  const Mat& s0_reduced(int b) const {
    if (s0_reduced_.empty()) {
      s0_reduced_.reserve(s0_images_.size());
      for (const auto& s : s0_images_) s0_reduced_.push_back(P34_->reduce(s));
    }
    return s0_reduced_[static_cast<size_t>(b)];
  }

  static Mat kron_triple_left(const Mat& c2, int r) {
    // (t ⊗ 1) in the triple Kronecker representation
    return kron(c2, Mat::Identity(r, r));
  }
  static Mat kron_triple_right(const Mat& c2, int r) {
    return kron(Mat::Identity(r, r), c2);
  }

  void verify_product_span_expectation() const {
    // the expectation behind the direct route: trace preservation and
    // bimodularity over elements x·S₀⁺(y), plus span equality when small
    CheckRng rng(0x70726f64u);
    auto B13 = span13_;
    for (int s = 0; s < opts_.verify_samples; ++s) {
      Mat g = random_element(*B13, rng);
      if (std::abs(ntr(Mat(B13->project(g))) - ntr(g)) > 1e-10)
        throw InvariantViolation("product_span_expectation_trace", std::abs(ntr(g)));
      Mat u = C_->basis(s % C_->dim()) * s0_images_[static_cast<size_t>((s + 1) % C_->dim())];
      Mat lhs = B13->project(Mat(u * g * u.adjoint()));
      Mat rhs = u * B13->project(g) * u.adjoint();
      const double res = op_norm(Mat(lhs - rhs)) / std::max(op_norm(g), 1e-300);
      if (res > 1e-9) throw InvariantViolation("product_span_expectation_bimodular", res);
    }
    if (C_->dim() <= 16) {
      auto prod = product_span(*C_, *P34_);
      if (prod->dim() != span13_->dim())
        throw InvariantViolation("product_span_dimension",
                                 std::abs(prod->dim() - span13_->dim()));
      for (int i = 0; i < prod->dim(); ++i)
        if (span13_->membership_residual(prod->basis(i)) > 1e-9)
          throw InvariantViolation("product_span_equality", i);
    }
  }

  TowerView view_;
  HypergroupOptions opts_;
  FourierCalculus F1_;
  SubAlgebraPtr C_;
  SubAlgebraPtr P34_;     // A₁′∩A₃ (levels ≥ 3)
  SubAlgebraPtr span13_;  // (B′∩A₁)(A₁′∩A₃) = B′∩A₃ in the model
  Mat delta_;             // (dim²)×dim, row-major pair index
  CVec eps_;
  Mat r1_, eps_t_, eps_s_;
  std::optional<TensorElement> delta_one_;
  std::vector<Mat> gammas_;
  std::vector<Mat> s0_images_;
  mutable std::vector<Mat> s0_reduced_;
};

}  // namespace wqh
