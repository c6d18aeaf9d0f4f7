#include <catch2/catch_amalgamated.hpp>

#include "wqh/hypergroup.hpp"
#include "wqh/rng.hpp"

using namespace wqh;

namespace {

struct Fixture {
  TowerPtr t;
  TowerView v;
  HypergroupStructure hs;
  Mat id;
  explicit Fixture(int k, int m, int levels = 3)
      : t(Tower::build(k, m, levels)), v(t), hs(v),
        id(Mat::Identity(t->ambient_dim(), t->ambient_dim())) {}
};

}  // namespace

TEST_CASE("tensor elements") {
  Fixture fx(1, 2);
  auto C = fx.hs.algebra_ptr();
  CheckRng rng(83);
  Mat x = random_element(*C, rng), y = random_element(*C, rng);

  SECTION("concrete representation matches the Kronecker product") {
    TensorElement t = TensorElement::pure(C, x, y);
    Mat direct = kron(C->reduce(x), C->reduce(y));
    CHECK((t.concrete_reduced() - direct).norm() < 1e-12 * std::max(direct.norm(), 1e-300));
    TensorElement back = TensorElement::from_concrete_reduced(C, direct);
    CHECK((back.coeffs() - t.coeffs()).norm() < 1e-12);
  }
  SECTION("tensor inner product matches the trace form of the concrete rep") {
    Mat a = random_element(*C, rng), b = random_element(*C, rng);
    TensorElement s = TensorElement::pure(C, x, y), u = TensorElement::pure(C, a, b);
    Cplx ip_coeff = (s.coeffs().conjugate().cwiseProduct(u.coeffs())).sum();
    Cplx ip_concrete = trace_ip(s.concrete_reduced(), u.concrete_reduced());
    CHECK(std::abs(ip_coeff - ip_concrete) < 1e-12);
    Cplx factored = trace_ip(x, a) * trace_ip(y, b);
    CHECK(std::abs(ip_coeff - factored) < 1e-12);
  }
  SECTION("products, flips, stars") {
    TensorElement s = TensorElement::pure(C, x, y);
    TensorElement prod = s * s;
    Mat expect = kron(Mat(C->reduce(x) * C->reduce(x)), Mat(C->reduce(y) * C->reduce(y)));
    CHECK((prod.concrete_reduced() - expect).norm() < 1e-11);
    CHECK((s.flip().coeffs() - s.coeffs().transpose()).norm() == 0.0);
    TensorElement st = s.star();
    Mat exp_star = kron(Mat(C->reduce(x).adjoint()), Mat(C->reduce(y).adjoint()));
    CHECK((st.concrete_reduced() - exp_star).norm() < 1e-12);
  }
}

TEST_CASE("counit") {
  Fixture fx(1, 2);
  CheckRng rng(87);
  CHECK(std::abs(fx.hs.counit(fx.id) - Cplx(1, 0)) < 1e-12);
  CHECK(std::abs(fx.hs.counit(fx.t->jones(1)) - Cplx(1, 0)) < 1e-12);
  for (int s = 0; s < 10; ++s) {
    Mat x = random_element(fx.hs.algebra(), rng);
    CHECK(fx.hs.counit_star_residual(x) < 1e-11);
  }
}

TEST_CASE("coalgebra laws") {
  for (auto [k, m] : {std::pair{1, 2}, std::pair{2, 2}}) {
    Fixture fx(k, m);
    CheckRng rng(91 + k);
    for (int s = 0; s < 10; ++s) {
      Mat x = random_element(fx.hs.algebra(), rng);
      auto res = fx.hs.coalgebra_residuals(x);
      CHECK(res.coassoc < 1e-9);
      CHECK(res.counit_left < 1e-9);
      CHECK(res.counit_right < 1e-9);
    }
  }
}

TEST_CASE("coproduct closed forms") {
  Fixture fx(1, 2);
  CheckRng rng(97);

  SECTION("delta(1) equals the gamma expansion") {
    CHECK(fx.hs.delta_one_gamma_residual() < 1e-10);
    // independent evaluation: Σᵢ r₁⁺(γᵢ*)⊗γᵢ from raw pieces
    auto C = fx.hs.algebra_ptr();
    const int d = C->dim();
    Mat acc = Mat::Zero(d, d);
    for (const auto& g : fx.hs.gamma_basis()) {
      CVec l = C->expand(reflection_r1(fx.v, Mat(g.adjoint())));
      CVec r = C->expand(g);
      acc += l * r.transpose();
    }
    CHECK((acc - fx.hs.delta_one().coeffs()).norm() < 1e-10);
  }
  SECTION("module property over B′∩A") {
    auto Bp = fx.v.rel_commutant(-1, 0);
    for (int s = 0; s < 10; ++s) {
      Mat x = random_element(fx.hs.algebra(), rng);
      Mat vv = random_element(*Bp, rng);
      CHECK(fx.hs.delta_module_residual(x, vv) < 1e-9);
    }
  }
  SECTION("route equivalence") {
    for (int s = 0; s < 10; ++s) {
      Mat x = random_element(fx.hs.algebra(), rng);
      CHECK(fx.hs.route_equivalence_residual(x) < 1e-9);
    }
  }
}

TEST_CASE("route equivalence at (2,2)") {
  Fixture fx(2, 2);
  CheckRng rng(101);
  for (int s = 0; s < 5; ++s) {
    Mat x = random_element(fx.hs.algebra(), rng);
    CHECK(fx.hs.route_equivalence_residual(x) < 1e-9);
  }
}

TEST_CASE("sharp") {
  Fixture fx(1, 2);
  CheckRng rng(103);
  CHECK(op_norm(Mat(fx.hs.sharp(fx.t->jones(1)) - fx.t->jones(1))) < 1e-11);
  for (int s = 0; s < 10; ++s) {
    Mat x = random_element(fx.hs.algebra(), rng);
    Mat y = random_element(fx.hs.algebra(), rng);
    auto res = fx.hs.sharp_residuals(x, y);
    CHECK(res.antilinear < 1e-10);
    CHECK(res.involutive < 1e-10);
    CHECK(res.multiplicative < 1e-9);
    CHECK(res.star_commute < 1e-10);
  }
}

TEST_CASE("flip of sharp through the coproduct") {
  Fixture fx(1, 2);
  CheckRng rng(107);
  CHECK(fx.hs.flip_sharp_residual(fx.id) < 1e-10);
  CHECK(fx.hs.flip_sharp_residual(fx.t->jones(1)) < 1e-10);
  auto C = fx.hs.algebra_ptr();
  const int d = C->dim();
  for (int s = 0; s < 20; ++s) {
    Mat x = random_element(*C, rng);
    CHECK(fx.hs.flip_sharp_residual(x) < 1e-9);
  }
  // independent Sweedler evaluation on a few samples:
  // Δ(x#) should equal Σ conj(c_{αβ})·(b_β#)⊗(b_α#) where c = coeffs of Δ(x)
  std::vector<CVec> sharp_basis;
  for (int g = 0; g < d; ++g) sharp_basis.push_back(C->expand(fx.hs.sharp(C->basis(g))));
  for (int s = 0; s < 3; ++s) {
    Mat x = random_element(*C, rng);
    TensorElement dx = fx.hs.delta(x);
    Mat rhs = Mat::Zero(d, d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        rhs += std::conj(dx.coeffs()(a, b)) *
               (sharp_basis[static_cast<size_t>(b)] * sharp_basis[static_cast<size_t>(a)].transpose());
    TensorElement lhs = fx.hs.delta(fx.hs.sharp(x));
    CHECK((lhs.coeffs() - rhs).norm() < 1e-9 * std::max(rhs.norm(), 1e-300));
  }
}

TEST_CASE("counital maps") {
  Fixture fx(1, 2);
  CheckRng rng(109);
  const Mat& e1 = fx.t->jones(1);

  SECTION("values at the unit and at e1") {
    CHECK(op_norm(Mat(fx.hs.eps_t(fx.id) - fx.id)) < 1e-11);
    CHECK(op_norm(Mat(fx.hs.eps_t(e1) - fx.id)) < 1e-11);
    CHECK(op_norm(Mat(fx.hs.eps_s(fx.id) - fx.id)) < 1e-11);
    CHECK(op_norm(Mat(fx.hs.eps_s(e1) - fx.id)) < 1e-11);
  }
  SECTION("closed forms match the Sweedler definitions") {
    for (int s = 0; s < 10; ++s) {
      Mat x = random_element(fx.hs.algebra(), rng);
      CHECK(op_norm(Mat(fx.hs.eps_t(x) - fx.hs.eps_t_definitional(x))) < 1e-10);
      CHECK(op_norm(Mat(fx.hs.eps_s(x) - fx.hs.eps_s_definitional(x))) < 1e-10);
      Mat direct = fx.v.expectation(1, Mat(x * e1)) / fx.v.tau();
      CHECK(op_norm(Mat(fx.hs.eps_t(x) - direct)) < 1e-12);
    }
  }
  SECTION("the eps_t product identity") {
    for (int s = 0; s < 10; ++s) {
      Mat x = random_element(fx.hs.algebra(), rng);
      Mat y = random_element(fx.hs.algebra(), rng);
      CHECK(fx.hs.eps_t_product_residual(x, y) < 1e-9);
    }
  }
}

TEST_CASE("weak multiplicativity of the counit") {
  Fixture fx(1, 2);
  CheckRng rng(113);
  SECTION("degenerate slots") {
    Mat y = random_element(fx.hs.algebra(), rng);
    auto r1 = fx.hs.weak_counit_residuals(fx.id, y, fx.id);
    CHECK(r1.order12 < 1e-10);
    CHECK(r1.order21 < 1e-10);
    Mat x = random_element(fx.hs.algebra(), rng), z = random_element(fx.hs.algebra(), rng);
    auto r2 = fx.hs.weak_counit_residuals(x, fx.id, z);
    CHECK(r2.order12 < 1e-10);
    CHECK(r2.order21 < 1e-10);
  }
  SECTION("random triples") {
    for (int s = 0; s < 20; ++s) {
      Mat x = random_element(fx.hs.algebra(), rng);
      Mat y = random_element(fx.hs.algebra(), rng);
      Mat z = random_element(fx.hs.algebra(), rng);
      auto r = fx.hs.weak_counit_residuals(x, y, z);
      CHECK(r.order12 < 1e-9);
      CHECK(r.order21 < 1e-9);
    }
  }
}

TEST_CASE("weak comultiplicativity of the unit") {
  SECTION("m = 1 degenerate case") {
    Fixture fx(2, 1, 2);
    CHECK((fx.hs.delta_one().coeffs() - Mat::Ones(1, 1)).norm() < 1e-12);
  }
  SECTION("(1,2) model with the gamma-expansion oracle") {
    Fixture fx(1, 2);
    auto r = fx.hs.weak_unit_residuals();
    CHECK(r.expand_vs_left < 1e-9);
    CHECK(r.expand_vs_right < 1e-9);

    // oracle: Σ_{i,j} r₁⁺(γᵢ*) ⊗ r₁⁺(γⱼ*)γᵢ ⊗ γⱼ as a triple coefficient tensor
    auto C = fx.hs.algebra_ptr();
    const int d = C->dim();
    Mat expand3 = fx.hs.delta_one().coeffs() * fx.hs.delta_coeffs().transpose();
    Mat oracle = Mat::Zero(d, d * d);
    for (const auto& gi : fx.hs.gamma_basis())
      for (const auto& gj : fx.hs.gamma_basis()) {
        CVec a = C->expand(reflection_r1(fx.v, Mat(gi.adjoint())));
        CVec b = C->expand(Mat(reflection_r1(fx.v, Mat(gj.adjoint())) * gi));
        CVec c = C->expand(gj);
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j)
            for (int g = 0; g < d; ++g) oracle(i, j * d + g) += a(i) * b(j) * c(g);
      }
    CHECK((expand3 - oracle).norm() < 1e-9 * std::max(oracle.norm(), 1e-300));
  }
}

TEST_CASE("invariant measures and Haar integral") {
  Fixture fx(1, 2);
  CheckRng rng(127);
  const Mat& e1 = fx.t->jones(1);

  SECTION("measure residuals at distinguished and random points") {
    for (const Mat& x : {fx.id, e1}) {
      auto r = fx.hs.measure_residuals(x);
      CHECK(r.left_invariance < 1e-9);
      CHECK(r.right_invariance < 1e-9);
      CHECK(r.left_normalized < 1e-9);
      CHECK(r.right_normalized < 1e-9);
    }
    for (int s = 0; s < 10; ++s) {
      Mat x = random_element(fx.hs.algebra(), rng);
      auto r = fx.hs.measure_residuals(x);
      CHECK(r.left_invariance < 1e-9);
      CHECK(r.right_invariance < 1e-9);
    }
  }
  SECTION("the smeared-pairing form") {
    for (int s = 0; s < 10; ++s) {
      Mat x = random_element(fx.hs.algebra(), rng);
      Mat y = random_element(fx.hs.algebra(), rng);
      CHECK(fx.hs.measure_pairing_residual(x, y) < 1e-10);
    }
  }
  SECTION("e1 is a Haar integral") {
    auto r0 = fx.hs.haar_residuals(fx.id);
    CHECK(r0.left_integral < 1e-10);
    CHECK(r0.right_integral < 1e-10);
    auto r1 = fx.hs.haar_residuals(e1);
    CHECK(r1.left_integral < 1e-10);
    CHECK(r1.eps_t_of_haar < 1e-10);
    CHECK(r1.eps_s_of_haar < 1e-10);
    for (int s = 0; s < 20; ++s) {
      Mat a = random_element(fx.hs.algebra(), rng);
      auto r = fx.hs.haar_residuals(a);
      CHECK(r.left_integral < 1e-9);
      CHECK(r.right_integral < 1e-9);
    }
  }
}

TEST_CASE("T map") {
  Fixture fx(1, 2);
  CheckRng rng(131);
  auto C = fx.hs.algebra_ptr();

  SECTION("unital") {
    TensorElement one = TensorElement::pure(C, fx.id, fx.id);
    CHECK(op_norm(Mat(fx.hs.t_map(one) - fx.id)) < 1e-11);
  }
  SECTION("isometry, multiplicativity, inversion") {
    for (int s = 0; s < 20; ++s) {
      Mat c(C->dim(), C->dim());
      for (int i = 0; i < C->dim(); ++i)
        for (int j = 0; j < C->dim(); ++j) c(i, j) = rng.cgaussian();
      TensorElement xi(C, c);
      Mat t = fx.hs.t_map(xi);
      CHECK(std::abs(ntr_norm(t) - xi.norm()) < 1e-10 * xi.norm());
      TensorElement back = fx.hs.t_map_inv(t);
      CHECK((back.coeffs() - xi.coeffs()).norm() < 1e-10 * xi.norm());
      if (s < 5) {
        Mat c2(C->dim(), C->dim());
        for (int i = 0; i < C->dim(); ++i)
          for (int j = 0; j < C->dim(); ++j) c2(i, j) = rng.cgaussian();
        TensorElement eta(C, c2);
        CHECK(op_norm(Mat(fx.hs.t_map(xi * eta) - fx.hs.t_map(xi) * fx.hs.t_map(eta))) <
              1e-9 * xi.norm() * eta.norm());
      }
    }
  }
}

TEST_CASE("convolution identities with projections") {
  Fixture fx(1, 2);
  CheckRng rng(137);
  const Mat& e1 = fx.t->jones(1);
  const double rt = std::sqrt(fx.t->tau());

  SECTION("x = 1 reduces to the counit step") {
    for (int s = 0; s < 5; ++s) {
      Mat y = random_element(fx.hs.algebra(), rng);
      Mat z = random_element(fx.hs.algebra(), rng);
      Cplx lhs = trace_ip(z, fx.hs.fourier1().convolve(e1, y));
      Cplx rhs = rt * trace_ip(z, y);
      CHECK(std::abs(lhs - rhs) < 1e-10);
    }
  }
  SECTION("full residual battery") {
    auto Bp = fx.v.rel_commutant(-1, 0);
    for (int s = 0; s < 20; ++s) {
      Mat x = random_element(fx.hs.algebra(), rng);
      Mat y = random_element(fx.hs.algebra(), rng);
      Mat z = random_element(fx.hs.algebra(), rng);
      Mat vv = random_element(*Bp, rng);
      auto r = fx.hs.conv_identity_residuals(x, y, z, vv);
      CHECK(r.projection_form < 1e-9);
      CHECK(r.unit_form < 1e-9);
      CHECK(r.reflection_form < 1e-9);
    }
  }
}

TEST_CASE("complete positivity certificate") {
  CheckRng rng(139);
  for (auto [k, m] : {std::pair{1, 2}, std::pair{2, 2}}) {
    Fixture fx(k, m);
    auto cert = fx.hs.cp_certificate();
    CHECK(cert.block_dim == 256);
    CHECK(cert.min_eig >= -1e-9 * cert.norm);
    for (int s = 0; s < 10; ++s) {
      Mat x = random_element(fx.hs.algebra(), rng);
      CHECK(fx.hs.star_preservation_residual(x) < 1e-10);
      if (s < 3) CHECK(fx.hs.delta_positivity_spot(x) >= -1e-9);
    }
  }
}

TEST_CASE("degenerate irreducible case at m = 1") {
  Fixture fx(3, 1, 2);
  CheckRng rng(149);
  CHECK((fx.hs.delta_one().coeffs() - Mat::Ones(1, 1)).norm() < 1e-12);
  Mat x = random_element(fx.hs.algebra(), rng);
  Mat y = random_element(fx.hs.algebra(), rng);
  Cplx lhs = fx.hs.counit(Mat(x * y));
  Cplx rhs = fx.hs.counit(x) * fx.hs.counit(y);
  CHECK(std::abs(lhs - rhs) < 1e-12);
}

TEST_CASE("dual structure on the shifted view") {
  auto t = Tower::build(1, 2, 3);
  TowerView v(t);
  HypergroupStructure dual(v.shifted(1));
  CheckRng rng(151);
  CHECK(std::abs(dual.counit(Mat::Identity(t->ambient_dim(), t->ambient_dim())) - Cplx(1, 0)) <
        1e-12);
  for (int s = 0; s < 5; ++s) {
    Mat w = random_element(dual.algebra(), rng);
    auto res = dual.coalgebra_residuals(w);
    CHECK(res.coassoc < 1e-9);
    CHECK(res.counit_left < 1e-9);
    auto hr = dual.haar_residuals(w);
    CHECK(hr.left_integral < 1e-9);
    CHECK(hr.right_integral < 1e-9);
  }
}
