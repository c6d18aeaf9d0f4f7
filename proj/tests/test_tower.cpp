#include <catch2/catch_amalgamated.hpp>

#include "wqh/rng.hpp"
#include "wqh/tower.hpp"

using namespace wqh;

TEST_CASE("trivial inclusion (1,1,2)") {
  auto t = Tower::build(1, 1, 2);
  CHECK(t->ambient_dim() == 1);
  CHECK(t->tau() == Catch::Approx(1.0));
  for (int n = 1; n <= 2; ++n) CHECK(std::abs(t->jones(n)(0, 0) - Cplx(1, 0)) < 1e-15);
  TowerView v(t);
  CHECK(v.rel_commutant(-1, 1)->dim() == 1);
}

TEST_CASE("model constants at (1,2,3)") {
  auto t = Tower::build(1, 2, 3);
  CHECK(t->tau() == Catch::Approx(0.25));
  TowerView v(t);
  CHECK(v.rel_commutant(-1, 1)->dim() == 16);
  CHECK(std::abs(ntr(t->jones(1)) - Cplx(t->tau(), 0)) < 1e-13);
}

TEST_CASE("tr(e1) = tau across models") {
  for (auto [k, m] : {std::pair{1, 2}, std::pair{2, 2}, std::pair{1, 3}}) {
    auto t = Tower::build(k, m, 3);
    CHECK(std::abs(ntr(t->jones(1)) - Cplx(t->tau(), 0)) < 1e-13);
  }
}

TEST_CASE("quasi-basis") {
  SECTION("m = 1 gives the identity alone") {
    auto t = Tower::build(2, 1, 2);
    TowerView v(t);
    REQUIRE(v.quasi_basis().size() == 1);
    CHECK(op_norm(Mat(v.quasi_basis()[0] - Mat::Identity(2, 2))) < 1e-14);
  }
  SECTION("m = 2 gives four elements with index 4") {
    auto t = Tower::build(1, 2, 2);
    TowerView v(t);
    REQUIRE(v.quasi_basis().size() == 4);
    Mat sum = Mat::Zero(t->ambient_dim(), t->ambient_dim());
    for (const auto& l : v.quasi_basis()) sum += l * l.adjoint();
    CHECK(op_norm(Mat(sum - 4.0 * Mat::Identity(t->ambient_dim(), t->ambient_dim()))) < 1e-12);
  }
  SECTION("quasi-basis identity on random elements") {
    auto t = Tower::build(2, 2, 2);
    TowerView v(t);
    CheckRng rng(17);
    auto A = v.level(0);
    for (int s = 0; s < 10; ++s) {
      Mat a = random_element(*A, rng);
      Mat rec = Mat::Zero(t->ambient_dim(), t->ambient_dim());
      for (const auto& l : v.quasi_basis()) rec += l * v.expectation(0, Mat(l.adjoint() * a));
      CHECK(op_norm(Mat(rec - a)) < 1e-10);
    }
  }
}

TEST_CASE("quasi_basis_of_state") {
  SECTION("m = 1: the identity") {
    auto t = Tower::build(2, 1, 2);
    TowerView v(t);
    auto qb = quasi_basis_of_state(v, -1, 0);
    REQUIRE(qb.family.size() == 1);
    CHECK(qb.index_scalar == Catch::Approx(1.0));
  }
  SECTION("B′∩A under E0 and A′∩A1 under E1") {
    auto t = Tower::build(1, 2, 3);
    TowerView v(t);
    auto qb = quasi_basis_of_state(v, -1, 0);
    REQUIRE(qb.family.size() == 4);
    // quasi-basis identity with ω = ntr on random x ∈ B′∩A
    auto S = v.rel_commutant(-1, 0);
    CheckRng rng(23);
    for (int s = 0; s < 5; ++s) {
      Mat x = random_element(*S, rng);
      Mat rec = Mat::Zero(t->ambient_dim(), t->ambient_dim());
      for (const auto& mu : qb.family) rec += mu * ntr(Mat(mu.adjoint() * x));
      CHECK(op_norm(Mat(rec - x)) < 1e-11);
    }
    auto qb2 = quasi_basis_of_state(v, 0, 1);
    CHECK(qb2.index_scalar == Catch::Approx(4.0));
  }
  SECTION("multi-slot commutant is rejected") {
    auto t = Tower::build(1, 2, 3);
    TowerView v(t);
    CHECK_THROWS_AS(quasi_basis_of_state(v, -1, 1), NotScalarRange);
  }
}

TEST_CASE("markov trace") {
  auto t = Tower::build(1, 2, 3);
  TowerView v(t);
  CheckRng rng(31);
  CHECK(std::abs(v.markov_trace(2, Mat::Identity(t->ambient_dim(), t->ambient_dim())) -
                 Cplx(1, 0)) < 1e-14);
  for (int n = 1; n <= 3; ++n) {
    auto S = v.rel_commutant(-1, n - 1);
    Mat x = random_element(*S, rng);
    // tr_n(x e_n) = τ·tr_{n−1}(x)
    Cplx lhs = v.markov_trace(n, Mat(x * v.jones(n)));
    Cplx rhs = v.tau() * v.markov_trace(n - 1, x);
    CHECK(std::abs(lhs - rhs) < 1e-12);
    // tr_n restricted to B′∩A_{n−1} equals tr_{n−1}
    CHECK(std::abs(v.markov_trace(n, x) - v.markov_trace(n - 1, x)) < 1e-12);
  }
  CHECK_THROWS_AS(v.markov_trace(1, Mat(v.jones(3))), NotInLevel);
}

TEST_CASE("push down") {
  auto t = Tower::build(2, 2, 2);
  TowerView v(t);
  const int N = t->ambient_dim();
  SECTION("e1 pushes down to the identity") {
    CHECK(op_norm(Mat(v.push_down(v.jones(1)) - Mat::Identity(N, N))) < 1e-12);
  }
  SECTION("elements of A are fixed") {
    CheckRng rng(37);
    Mat a = random_element(*v.level(0), rng);
    CHECK(op_norm(Mat(v.push_down(a) - a)) < 1e-11);
  }
  SECTION("defining identity x1·e1 = x0·e1 on random x1") {
    CheckRng rng(41);
    for (int s = 0; s < 10; ++s) {
      Mat x1 = random_element(*v.level(1), rng);
      Mat x0 = v.push_down(x1);
      CHECK(op_norm(Mat(x1 * v.jones(1) - x0 * v.jones(1))) < 1e-10 * op_norm(x1));
    }
  }
}

TEST_CASE("shifted view") {
  auto t = Tower::build(1, 2, 3);
  TowerView v(t);
  SECTION("offset 0 is the base") {
    TowerView v0 = v.shifted(0);
    CHECK(op_norm(Mat(v0.jones(1) - v.jones(1))) == 0.0);
    CHECK(v0.levels() == 3);
  }
  SECTION("offset 1 re-indexes the tower") {
    TowerView v1 = v.shifted(1);
    CHECK(v1.levels() == 2);
    CHECK(op_norm(Mat(v1.jones(1) - v.jones(2))) == 0.0);
    // the Fourier domain of the view at n = 1 is A′∩A₂, of dimension m⁴
    CHECK(v1.rel_commutant(-1, 1)->dim() == 16);
    // view τ equals base τ: quasi-basis sum for the shifted minimal expectation
    Mat sum = Mat::Zero(t->ambient_dim(), t->ambient_dim());
    for (const auto& l : v1.quasi_basis()) sum += l * l.adjoint();
    const double c = std::real(ntr(sum));
    CHECK(1.0 / c == Catch::Approx(v.tau()));
  }
  SECTION("insufficient levels are rejected") {
    CHECK_THROWS_AS(v.shifted(2), InsufficientLevels);
  }
}

TEST_CASE("relative commutants against the brute-force oracle") {
  auto t = Tower::build(1, 2, 3);
  TowerView v(t);
  const int N = t->ambient_dim();

  auto check_against_bruteforce = [&](int lower, int upper) {
    auto structural = v.rel_commutant(lower, upper);
    auto lower_alg = v.level(lower);
    auto upper_alg = v.level(upper);
    auto comm = commutant(*lower_alg);
    auto upper_gen = orthonormalize(N, upper_alg->basis());
    auto brute = intersect(*comm, *upper_gen);
    REQUIRE(brute->dim() == structural->dim());
    for (const auto& b : brute->basis()) CHECK(structural->membership_residual(b) < 1e-9);
  };

  SECTION("(B, A): 1⊗M_m of dimension m²") {
    CHECK(v.rel_commutant(-1, 0)->dim() == 4);
    check_against_bruteforce(-1, 0);
  }
  SECTION("(A, A1): dimension m²") {
    CHECK(v.rel_commutant(0, 1)->dim() == 4);
    check_against_bruteforce(0, 1);
  }
  SECTION("(A1, A3): dimension m⁴") {
    CHECK(v.rel_commutant(1, 3)->dim() == 16);
    check_against_bruteforce(1, 3);
  }
  SECTION("invalid level pairs") {
    CHECK_THROWS_AS(v.rel_commutant(2, 2), InvalidLevels);
    CHECK_THROWS_AS(v.rel_commutant(-1, 4), InvalidLevels);
  }
}

TEST_CASE("trace commutation on B′∩A") {
  auto t = Tower::build(2, 2, 2);
  TowerView v(t);
  CheckRng rng(43);
  for (int s = 0; s < 10; ++s) {
    Mat x = random_element(*v.rel_commutant(-1, 0), rng);
    Mat a = random_element(*v.level(0), rng);
    CHECK(op_norm(Mat(v.expectation(0, Mat(x * a)) - v.expectation(0, Mat(a * x)))) <
          1e-10 * op_norm(x) * op_norm(a));
  }
}

TEST_CASE("depth-2 span identity in the model") {
  auto t = Tower::build(1, 2, 3);
  TowerView v(t);
  auto Bp = v.rel_commutant(-1, 0);
  auto C = v.rel_commutant(-1, 1);
  std::vector<Mat> prods;
  for (const auto& a : Bp->basis())
    for (const auto& b : Bp->basis()) prods.push_back(a * v.jones(1) * b);
  auto span = detail::onb_of_span(t->ambient_dim(), prods);
  REQUIRE(static_cast<int>(span.size()) == C->dim());
  for (const auto& s : span) CHECK(C->membership_residual(s) < 1e-10);
}

TEST_CASE("build rejections") {
  CHECK_THROWS_AS(Tower::build(1, 2, 5), InvalidLevels);
  CHECK_THROWS_AS(Tower::build(0, 2, 3), InvalidLevels);
  TowerOptions opts;
  opts.size_cap = 10;
  CHECK_THROWS_AS(Tower::build(1, 2, 3, opts), SizeCapExceeded);
}

TEST_CASE("canonicalize embeddings") {
  SECTION("identity embedding") {
    EmbeddingSpec spec;
    spec.k = 3;
    spec.n = 3;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        Mat u = Mat::Zero(3, 3);
        u(i, j) = 1.0;
        spec.images.push_back(u);
      }
    auto res = canonicalize_embedding(spec);
    CHECK(res.m == 1);
    CHECK(res.residual < 1e-12);
    CHECK(op_norm(Mat(res.u - Mat::Identity(3, 3))) < 1e-12);
  }
  SECTION("b ↦ b⊗1 is already canonical") {
    EmbeddingSpec spec;
    spec.k = 2;
    spec.n = 4;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        Mat u = Mat::Zero(2, 2);
        u(i, j) = 1.0;
        spec.images.push_back(kron(u, Mat::Identity(2, 2)));
      }
    auto res = canonicalize_embedding(spec);
    CHECK(res.m == 2);
    CHECK(res.residual < 1e-12);
  }
  SECTION("a unitarily twisted embedding is recovered") {
    const int k = 2, m = 3, n = 6;
    CheckRng rng(47);
    // random unitary from a gaussian matrix via QR
    Mat g(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g(i, j) = rng.cgaussian();
    Eigen::HouseholderQR<Mat> qr(g);
    Mat w = qr.householderQ();
    EmbeddingSpec spec;
    spec.k = k;
    spec.n = n;
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        Mat u = Mat::Zero(k, k);
        u(i, j) = 1.0;
        spec.images.push_back(w * kron(u, Mat::Identity(m, m)) * w.adjoint());
      }
    auto res = canonicalize_embedding(spec);
    REQUIRE(res.m == m);
    CHECK(res.residual < 1e-10);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        Mat unit = Mat::Zero(k, k);
        unit(i, j) = 1.0;
        Mat lhs = res.u.adjoint() * spec.images[static_cast<size_t>(i) * k + j] * res.u;
        CHECK(op_norm(Mat(lhs - kron(unit, Mat::Identity(m, m)))) < 1e-10);
      }
  }
  SECTION("bad inputs") {
    EmbeddingSpec spec;
    spec.k = 2;
    spec.n = 3;
    for (int i = 0; i < 4; ++i) spec.images.push_back(Mat::Identity(3, 3));
    CHECK_THROWS_AS(canonicalize_embedding(spec), NotAnEmbedding);

    EmbeddingSpec odd;
    odd.k = 2;
    odd.n = 3;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        Mat u = Mat::Zero(2, 2);
        u(i, j) = 1.0;
        Mat im = Mat::Zero(3, 3);
        im.topLeftCorner(2, 2) = u;
        if (i == j && i == 1) im(2, 2) = 1.0;  // pad so diagonals sum to I
        odd.images.push_back(im);
      }
    CHECK_THROWS_AS(canonicalize_embedding(odd), Error);
  }
}
