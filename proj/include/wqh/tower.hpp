#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "wqh/linalg.hpp"
#include "wqh/rng.hpp"
#include "wqh/subalgebra.hpp"

namespace wqh {

struct TowerOptions {
  int size_cap = 1024;     // largest allowed ambient dimension
  bool verify = true;      // run construction-time invariant checks
  double tol_proj = 1e-12;
  double tol_tower = 1e-10;
  double tol_markov = 1e-12;
  int samples = 5;         // random samples per construction check
};

/// The canonical tensor model of a finite-index simple unital inclusion and its
/// tower of basic constructions:
///
///   B = M_k ⊗ 1  ⊂  A_n = M_k ⊗ M_m^{⊗(n+1)},   n = 0..levels,
///
/// all embedded in the ambient M_{k·m^{levels+1}}. E_n is the normalized partial
/// trace over the last M_m factor of A_n; e_n places the rank-one projection onto
/// the maximally entangled vector of M_m⊗M_m at slots (n, n+1); τ is the reciprocal
/// of the (scalar, minimal) Watatani index, computed from the quasi-basis.
class Tower : public std::enable_shared_from_this<Tower> {
 public:
  static std::shared_ptr<const Tower> build(int k, int m, int levels, TowerOptions opts = {});

  int k() const { return k_; }
  int m() const { return m_; }
  int levels() const { return levels_; }
  int ambient_dim() const { return ambient_; }
  double tau() const { return tau_; }

  /// Jones projection e_n, n in 1..levels.
  const Mat& jones(int n) const {
    if (n < 1 || n > levels_) throw InvalidLevels("jones: n out of range");
    return e_[static_cast<size_t>(n - 1)];
  }

  /// E_n : A_n → A_{n−1}, the normalized partial trace over m-slot n+1, re-embedded.
  Mat expectation(int n, const Mat& x) const {
    if (n < 0 || n > levels_) throw InvalidLevels("expectation: n out of range");
    return partial_trace_slot(x, n + 1);
  }

  /// Quasi-basis of the expectation implemented at m-slot j: {√m·(unit at slot j)}.
  const std::vector<Mat>& slot_units(int j) const {
    if (j < 1 || j > levels_ + 1) throw InvalidLevels("slot_units: slot out of range");
    return slot_units_[static_cast<size_t>(j - 1)];
  }

  /// Structural subalgebra on the contiguous slot range [lo, hi] (slot 0 = M_k).
  SubAlgebraPtr slot_algebra(int lo, int hi) const {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto key = std::make_pair(lo, hi);
    auto it = slot_cache_.find(key);
    if (it != slot_cache_.end()) return it->second;
    SlotStructure s{k_, m_, levels_, lo, hi};
    auto alg = SubAlgebra::structural(s);
    slot_cache_.emplace(key, alg);
    return alg;
  }

  /// Normalized partial trace over one slot, re-embedded with identity there.
  Mat partial_trace_slot(const Mat& x, int slot) const {
    const int pre = pre_dim(slot), d = slot_dim(slot), post = post_dim(slot);
    Mat y = Mat::Zero(ambient_, ambient_);
    for (int a = 0; a < pre; ++a)
      for (int ap = 0; ap < pre; ++ap)
        for (int t = 0; t < post; ++t)
          for (int tp = 0; tp < post; ++tp) {
            Cplx acc(0, 0);
            for (int u = 0; u < d; ++u) acc += x((a * d + u) * post + t, (ap * d + u) * post + tp);
            acc /= static_cast<double>(d);
            for (int s = 0; s < d; ++s) y((a * d + s) * post + t, (ap * d + s) * post + tp) = acc;
          }
    return y;
  }

  int slot_dim(int slot) const { return slot == 0 ? k_ : m_; }
  int pre_dim(int slot) const {
    int p = 1;
    for (int s = 0; s < slot; ++s) p *= slot_dim(s);
    return p;
  }
  int post_dim(int slot) const {
    int p = 1;
    for (int s = slot + 1; s <= levels_ + 1; ++s) p *= slot_dim(s);
    return p;
  }

 private:
  Tower() = default;
  void verify_invariants(const TowerOptions& opts) const;

  int k_ = 1, m_ = 1, levels_ = 0, ambient_ = 1;
  double tau_ = 1.0;
  std::vector<Mat> e_;                         // e_[n-1] = e_n
  std::vector<std::vector<Mat>> slot_units_;   // per m-slot quasi-basis families
  mutable std::map<std::pair<int, int>, SubAlgebraPtr> slot_cache_;
  mutable std::mutex cache_mutex_;
};

using TowerPtr = std::shared_ptr<const Tower>;

/// A reindexing of the same tower: level n of the view is level n+offset of the
/// base, so the view describes the inclusion A_{offset−1} ⊂ A_offset with shifted
/// Jones projections, expectations and commutants, sharing the ambient matrices.
class TowerView {
 public:
  explicit TowerView(TowerPtr base, int offset = 0) : base_(std::move(base)), offset_(offset) {
    if (offset_ < 0) throw InvalidLevels("TowerView: negative offset");
    if (base_->levels() - offset_ < 2)
      throw InsufficientLevels("TowerView: fewer than two levels remain after shift");
  }

  const Tower& base() const { return *base_; }
  TowerPtr base_ptr() const { return base_; }
  int offset() const { return offset_; }
  int levels() const { return base_->levels() - offset_; }
  int ambient_dim() const { return base_->ambient_dim(); }
  double tau() const { return base_->tau(); }

  TowerView shifted(int extra) const { return TowerView(base_, offset_ + extra); }

  const Mat& jones(int n) const { return base_->jones(n + offset_); }
  Mat expectation(int n, const Mat& x) const { return base_->expectation(n + offset_, x); }
  const std::vector<Mat>& quasi_basis() const { return base_->slot_units(offset_ + 1); }

  /// A_n of the view as a structural subalgebra (slots 0..offset+n+1).
  SubAlgebraPtr level(int n) const {
    if (n < -1 || n > levels()) throw InvalidLevels("level: out of range");
    return base_->slot_algebra(0, offset_ + n + 1);
  }

  /// Relative commutant A_lower′ ∩ A_upper of the view (structural backend).
  SubAlgebraPtr rel_commutant(int lower, int upper) const {
    if (lower < -1 || upper <= lower || upper > levels())
      throw InvalidLevels("rel_commutant: invalid level pair");
    return base_->slot_algebra(offset_ + lower + 2, offset_ + upper + 1);
  }

  /// tr_n = E_0∘…∘E_n; equals the normalized ambient trace (checked at build).
  Cplx markov_trace(int n, const Mat& x, double domain_tol = 1e-8) const {
    if (n < 0 || n > levels()) throw NotInLevel("markov_trace: level out of range");
    const double res = level(n)->membership_residual(x);
    if (res > domain_tol) throw NotInLevel("markov_trace: x is not in A_" + std::to_string(n));
    Mat y = x;
    for (int j = n; j >= 0; --j) y = expectation(j, y);
    return ntr(y);
  }

  /// x₀ with x₁e₁ = x₀e₁, namely x₀ = τ⁻¹E₁(x₁e₁).
  Mat push_down(const Mat& x1, double domain_tol = 1e-8) const {
    const double res = level(1)->membership_residual(x1);
    if (res > domain_tol) throw NotInLevel("push_down: x₁ is not in A₁");
    return (1.0 / tau()) * expectation(1, Mat(x1 * jones(1)));
  }

 private:
  TowerPtr base_;
  int offset_ = 0;
};

namespace detail {

/// Rank-one projection onto the maximally entangled unit vector of M_m ⊗ M_m.
inline Mat entangled_projection(int m) {
  Mat f = Mat::Zero(m * m, m * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) f(i * m + i, j * m + j) = 1.0 / static_cast<double>(m);
  return f;
}

}  // namespace detail

inline std::shared_ptr<const Tower> Tower::build(int k, int m, int levels, TowerOptions opts) {
  if (k < 1 || m < 1) throw InvalidLevels("build: k and m must be ≥ 1");
  if (levels < 2 || levels > 4) throw InvalidLevels("build: levels must be in {2,3,4}");
  long long amb = k;
  for (int s = 0; s <= levels; ++s) amb *= m;
  if (amb > opts.size_cap)
    throw SizeCapExceeded("build: ambient dimension " + std::to_string(amb) + " exceeds cap " +
                          std::to_string(opts.size_cap));

  auto t = std::shared_ptr<Tower>(new Tower());
  t->k_ = k;
  t->m_ = m;
  t->levels_ = levels;
  t->ambient_ = static_cast<int>(amb);

  const Mat f = detail::entangled_projection(m);
  for (int n = 1; n <= levels; ++n) {
    SlotStructure s{k, m, levels, n, n + 1};
    auto pair_alg = SubAlgebra::structural(s);
    t->e_.push_back(pair_alg->unreduce(f));
  }

  for (int j = 1; j <= levels + 1; ++j) {
    SlotStructure s{k, m, levels, j, j};
    auto slot = SubAlgebra::structural(s);
    std::vector<Mat> units;
    units.reserve(static_cast<size_t>(m) * m);
    const double scale = std::sqrt(static_cast<double>(m));
    Mat u = Mat::Zero(m, m);
    for (int p = 0; p < m; ++p)
      for (int q = 0; q < m; ++q) {
        u(p, q) = scale;
        units.push_back(slot->unreduce(u));
        u(p, q) = 0.0;
      }
    t->slot_units_.push_back(std::move(units));
  }

  // Watatani index from the quasi-basis: Σλλ* must be a scalar matrix c·I, τ = 1/c.
  Mat index_sum = Mat::Zero(t->ambient_, t->ambient_);
  for (const auto& lam : t->slot_units_[0]) index_sum += lam * lam.adjoint();
  const double c = std::real(ntr(index_sum));
  const double scalar_res = op_norm(Mat(index_sum - c * Mat::Identity(t->ambient_, t->ambient_)));
  if (opts.verify && scalar_res > opts.tol_tower * std::abs(c))
    throw InvariantViolation("index_scalar", scalar_res);
  t->tau_ = 1.0 / c;

  if (opts.verify) t->verify_invariants(opts);
  return t;
}

inline void Tower::verify_invariants(const TowerOptions& opts) const {
  const Mat id = Mat::Identity(ambient_, ambient_);
  auto check = [](const char* name, double res, double tol) {
    if (!(res <= tol)) throw InvariantViolation(name, res);
  };

  for (int n = 1; n <= levels_; ++n) {
    const Mat& e = jones(n);
    check("e_projection", op_norm(Mat(e * e - e)), opts.tol_proj);
    check("e_selfadjoint", op_norm(Mat(e - e.adjoint())), opts.tol_proj);
  }
  for (int n = 1; n < levels_; ++n) {
    const Mat &e = jones(n), &ep = jones(n + 1);
    check("tower_relation", op_norm(Mat(e * ep * e - tau_ * e)), opts.tol_tower);
    check("tower_relation", op_norm(Mat(ep * e * ep - tau_ * ep)), opts.tol_tower);
  }

  TowerView v(std::const_pointer_cast<const Tower>(shared_from_this()));
  CheckRng rng(0x746f776572u);  // fixed seed: construction checks are deterministic
  auto A = v.level(0);
  const auto& lam = slot_units(1);
  for (int s = 0; s < opts.samples; ++s) {
    Mat a = random_element(*A, rng);
    // e₁ a e₁ = E₀(a) e₁
    check("e1_implements_E0",
          op_norm(Mat(jones(1) * a * jones(1) - expectation(0, a) * jones(1))), opts.tol_tower);
    // quasi-basis identity Σ λᵢ E₀(λᵢ* a) = a
    Mat rec = Mat::Zero(ambient_, ambient_);
    for (const auto& l : lam) rec += l * expectation(0, Mat(l.adjoint() * a));
    check("quasi_basis_identity", op_norm(Mat(rec - a)), opts.tol_tower);
  }
  // the general Jones relation e_n x e_n = E_{n−1}(x) e_n for x ∈ A_{n−1}
  for (int n = 2; n <= levels_; ++n) {
    Mat x = random_element(*v.level(n - 1), rng);
    check("en_implements_E",
          op_norm(Mat(jones(n) * x * jones(n) - expectation(n - 1, x) * jones(n))),
          opts.tol_tower);
  }
  // tr_n coincides with the normalized ambient trace
  for (int n = 0; n <= levels_; ++n) {
    Mat x = random_element(*v.level(n), rng);
    Mat y = x;
    for (int j = n; j >= 0; --j) y = expectation(j, y);
    check("markov_trace_matches_ntr", std::abs(ntr(y) - ntr(x)), opts.tol_markov);
    // and on the relative commutant the composition is the scalar tr_n(x)·1
    Mat z = random_element(*v.rel_commutant(-1, n), rng);
    Mat w = z;
    for (int j = n; j >= 0; --j) w = expectation(j, w);
    check("markov_trace_scalar_on_commutant",
          op_norm(Mat(w - ntr(z) * Mat::Identity(ambient_, ambient_))), opts.tol_tower);
  }
}

/// Claimed unital *-embedding M_k → M_n, given by the images of the matrix units
/// in row-major order e_11, e_12, …, e_kk.
struct EmbeddingSpec {
  int k = 1;
  int n = 1;
  std::vector<Mat> images;
};

struct CanonicalizationResult {
  int m = 1;
  Mat u;            // unitary with u*·ι(b)·u = b ⊗ 1_m
  double residual;  // max intertwining/unitarity residual
};

/// Reduce an arbitrary unital *-embedding to the tensor model by a unitary.
inline CanonicalizationResult canonicalize_embedding(const EmbeddingSpec& spec,
                                                     double tol = 1e-8) {
  const int k = spec.k, n = spec.n;
  if (k < 1 || n < 1 || static_cast<int>(spec.images.size()) != k * k)
    throw NotAnEmbedding("canonicalize: expected k² images");
  for (const auto& im : spec.images)
    if (im.rows() != n || im.cols() != n) throw NotAnEmbedding("canonicalize: image size");
  auto img = [&](int i, int j) -> const Mat& { return spec.images[static_cast<size_t>(i) * k + j]; };

  // matrix-unit relations, adjoints, and the unit
  Mat diag_sum = Mat::Zero(n, n);
  for (int i = 0; i < k; ++i) diag_sum += img(i, i);
  if (op_norm(Mat(diag_sum - Mat::Identity(n, n))) > tol)
    throw NotAnEmbedding("canonicalize: diagonal units do not sum to the identity");
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      if (op_norm(Mat(img(i, j).adjoint() - img(j, i))) > tol)
        throw NotAnEmbedding("canonicalize: adjoint relation fails");
      for (int p = 0; p < k; ++p)
        for (int q = 0; q < k; ++q) {
          Mat prod = img(i, j) * img(p, q);
          Mat expect = (j == p) ? img(i, q) : Mat::Zero(n, n);
          if (op_norm(Mat(prod - expect)) > tol)
            throw NotAnEmbedding("canonicalize: unit multiplication fails");
        }
    }

  if (n % k != 0) throw NonDivisibleDimension("canonicalize: k does not divide n");
  const int m = n / k;

  // range of p := ι(e_11) has dimension m; its orthonormal basis seeds the unitary
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (img(0, 0) + img(0, 0).adjoint()));
  int rank = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (es.eigenvalues()(i) > 0.5) ++rank;
  if (rank != m) throw RankMismatch("canonicalize: rank of ι(e_11) is " + std::to_string(rank) +
                                    ", expected " + std::to_string(m));
  Mat v(n, m);
  int col = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (es.eigenvalues()(i) > 0.5) v.col(col++) = es.eigenvectors().col(i);

  Mat u(n, n);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < m; ++j) u.col(i * m + j) = img(i, 0) * v.col(j);

  double residual = op_norm(Mat(u.adjoint() * u - Mat::Identity(n, n)));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      Mat unit = Mat::Zero(k, k);
      unit(i, j) = 1.0;
      Mat model = kron(unit, Mat::Identity(m, m));
      residual = std::max(residual, op_norm(Mat(u.adjoint() * img(i, j) * u - model)));
    }
  return CanonicalizationResult{m, std::move(u), residual};
}

/// Quasi-basis {μ_j} for the restricted expectation E_upper|_S, S = A_lower′∩A_upper,
/// when that restriction is the faithful state ntr·1 (adjacent commutants). Also
/// returns the scalar Watatani index Σμμ* = c·1.
struct StateQuasiBasis {
  std::vector<Mat> family;
  double index_scalar;
};

inline StateQuasiBasis quasi_basis_of_state(const TowerView& view, int lower, int upper,
                                            double tol = 1e-9) {
  auto S = view.rel_commutant(lower, upper);
  const int r = S->red_dim();
  // verify the restricted expectation lands in the scalars
  CheckRng rng(0x71627374u);
  for (int s = 0; s < 3; ++s) {
    Mat x = random_element(*S, rng);
    Mat ex = view.expectation(upper, x);
    const double res =
        op_norm(Mat(ex - ntr(x) * Mat::Identity(view.ambient_dim(), view.ambient_dim())));
    if (res > tol)
      throw NotScalarRange("quasi_basis_of_state: restricted expectation is not scalar");
  }
  StateQuasiBasis out;
  const double scale = std::sqrt(static_cast<double>(r));
  Mat unit = Mat::Zero(r, r);
  Mat index_sum = Mat::Zero(view.ambient_dim(), view.ambient_dim());
  for (int p = 0; p < r; ++p)
    for (int q = 0; q < r; ++q) {
      unit(p, q) = scale;
      Mat mu = S->unreduce(unit);
      index_sum += mu * mu.adjoint();
      out.family.push_back(std::move(mu));
      unit(p, q) = 0.0;
    }
  const double c = std::real(ntr(index_sum));
  const double res =
      op_norm(Mat(index_sum - c * Mat::Identity(view.ambient_dim(), view.ambient_dim())));
  if (res > tol * std::abs(c))
    throw NotScalarIndex("quasi_basis_of_state: index is not a scalar matrix");
  out.index_scalar = c;
  return out;
}

}  // namespace wqh
