#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

#include "wqh/linalg.hpp"

namespace wqh {

/// Position of a tensor-factor subalgebra inside the ambient M_k ⊗ M_m^{⊗(levels+1)}.
/// Slot 0 is the M_k factor, slots 1..levels+1 are the M_m factors. The subalgebra
/// is the full matrix algebra on the contiguous slot range [lo, hi] tensored with
/// the identity elsewhere; hi < lo denotes the scalars ℂ·I.
struct SlotStructure {
  int k = 1;
  int m = 1;
  int levels = 0;
  int lo = 1;
  int hi = 0;

  int slot_dim(int s) const { return s == 0 ? k : m; }
  int n_slots() const { return levels + 2; }  // slot 0 plus levels+1 m-slots

  int ambient_dim() const {
    int n = k;
    for (int s = 1; s <= levels + 1; ++s) n *= m;
    return n;
  }
  /// Dimension of the reduced (free-slot) matrix algebra.
  int red_dim() const {
    int r = 1;
    for (int s = std::max(lo, 0); s <= hi; ++s) r *= slot_dim(s);
    return r;
  }
  /// Product of slot dims strictly before lo / strictly after hi.
  int pre_dim() const {
    int p = 1;
    for (int s = 0; s < lo; ++s) p *= slot_dim(s);
    return p;
  }
  int post_dim() const {
    int p = 1;
    for (int s = hi + 1; s <= levels + 1; ++s) p *= slot_dim(s);
    return p;
  }
};

class SubAlgebra;
using SubAlgebraPtr = std::shared_ptr<const SubAlgebra>;

/// A unital *-closed subalgebra of an ambient full matrix algebra, carried by a
/// trace-orthonormal basis (⟨x,y⟩ = ntr(x*y)). Structural instances (tensor-factor
/// position known) additionally support O(n²) expand/synthesize via partial traces
/// and materialize their basis lazily.
class SubAlgebra : public std::enable_shared_from_this<SubAlgebra> {
 public:
  SubAlgebra(int ambient_dim, std::vector<Mat> basis, bool contains_unit)
      : ambient_dim_(ambient_dim),
        dim_(static_cast<int>(basis.size())),
        contains_unit_(contains_unit),
        basis_(std::move(basis)),
        basis_ready_(true) {}

  static SubAlgebraPtr structural(const SlotStructure& s) {
    auto out = std::shared_ptr<SubAlgebra>(new SubAlgebra());
    out->ambient_dim_ = s.ambient_dim();
    out->slots_ = s;
    out->dim_ = s.red_dim() * s.red_dim();
    out->contains_unit_ = true;
    out->basis_ready_ = false;
    return out;
  }

  int dim() const { return dim_; }
  int ambient_dim() const { return ambient_dim_; }
  bool contains_unit() const { return contains_unit_; }
  bool is_structural() const { return slots_.has_value(); }
  const SlotStructure& slots() const { return *slots_; }
  int red_dim() const { return slots_ ? slots_->red_dim() : 0; }

  const std::vector<Mat>& basis() const {
    materialize();
    return basis_;
  }
  const Mat& basis(int i) const {
    materialize();
    return basis_[static_cast<size_t>(i)];
  }

  /// Compress to the free-slot factor: normalized partial trace over the fixed slots.
  /// Exact on members; equal to the orthogonal compression otherwise.
  Mat reduce(const Mat& x) const {
    const SlotStructure& s = *slots_;
    const int pre = s.pre_dim(), r = s.red_dim(), post = s.post_dim();
    Mat y = Mat::Zero(r, r);
    for (int a = 0; a < pre; ++a)
      for (int p = 0; p < r; ++p)
        for (int q = 0; q < r; ++q) {
          Cplx acc(0, 0);
          const int row0 = (a * r + p) * post, col0 = (a * r + q) * post;
          for (int t = 0; t < post; ++t) acc += x(row0 + t, col0 + t);
          y(p, q) += acc;
        }
    return y / static_cast<double>(pre * post);
  }

  /// Inverse of reduce on members: identity ⊗ y ⊗ identity at the free slots.
  Mat unreduce(const Mat& y) const {
    const SlotStructure& s = *slots_;
    const int pre = s.pre_dim(), r = s.red_dim(), post = s.post_dim();
    Mat x = Mat::Zero(ambient_dim_, ambient_dim_);
    for (int a = 0; a < pre; ++a)
      for (int p = 0; p < r; ++p)
        for (int q = 0; q < r; ++q) {
          const Cplx v = y(p, q);
          if (v == Cplx(0, 0)) continue;
          const int row0 = (a * r + p) * post, col0 = (a * r + q) * post;
          for (int t = 0; t < post; ++t) x(row0 + t, col0 + t) = v;
        }
    return x;
  }

  /// Coefficients of the orthogonal projection of x over the basis.
  CVec expand(const Mat& x) const {
    if (x.rows() != ambient_dim_) throw DimensionMismatch("expand: ambient dim mismatch");
    if (slots_) {
      const int r = slots_->red_dim();
      const double scale = std::sqrt(static_cast<double>(r));
      Mat red = reduce(x);
      CVec c(dim_);
      for (int p = 0; p < r; ++p)
        for (int q = 0; q < r; ++q) c(p * r + q) = red(p, q) / scale;
      return c;
    }
    CVec c(dim_);
    for (int i = 0; i < dim_; ++i) c(i) = trace_ip(basis_[static_cast<size_t>(i)], x);
    return c;
  }

  Mat synthesize(const CVec& c) const {
    if (c.size() != dim_) throw DimensionMismatch("synthesize: coefficient count mismatch");
    if (slots_) {
      const int r = slots_->red_dim();
      const double scale = std::sqrt(static_cast<double>(r));
      Mat red(r, r);
      for (int p = 0; p < r; ++p)
        for (int q = 0; q < r; ++q) red(p, q) = scale * c(p * r + q);
      return unreduce(red);
    }
    Mat x = Mat::Zero(ambient_dim_, ambient_dim_);
    for (int i = 0; i < dim_; ++i) x += c(i) * basis_[static_cast<size_t>(i)];
    return x;
  }

  Mat project(const Mat& x) const { return synthesize(expand(x)); }

  /// ‖x − P(x)‖_F / ‖x‖_F; zero input has residual 0.
  double membership_residual(const Mat& x) const {
    const double nx = x.norm();
    if (nx == 0.0) return 0.0;
    return (x - project(x)).norm() / nx;
  }

  /// t_γ = ntr(b_γ·K) over the basis: the bilinear trace pairing, no conjugation.
  CVec trace_pairing_vec(const Mat& K) const {
    if (slots_) {
      const int r = slots_->red_dim();
      Mat red = reduce(K);
      CVec t(dim_);
      const double rt = std::sqrt(static_cast<double>(r));
      for (int p = 0; p < r; ++p)
        for (int q = 0; q < r; ++q) t(p * r + q) = red(q, p) / rt;
      return t;
    }
    materialize();
    CVec t(dim_);
    for (int i = 0; i < dim_; ++i) t(i) = ntr(Mat(basis_[static_cast<size_t>(i)] * K));
    return t;
  }

  /// Coefficients of x* given coefficients of x.
  CVec star_vec(const CVec& c) const {
    if (slots_) {
      const int r = slots_->red_dim();
      CVec out(dim_);
      for (int p = 0; p < r; ++p)
        for (int q = 0; q < r; ++q) out(p * r + q) = std::conj(c(q * r + p));
      return out;
    }
    return expand(synthesize(c).adjoint());
  }

  /// Coefficients of the product of two elements given by coefficients.
  CVec product_vec(const CVec& a, const CVec& b) const {
    if (slots_) {
      const int r = slots_->red_dim();
      const double scale = std::sqrt(static_cast<double>(r));
      // coefficients are flattened row-major, so the column-major maps are the
      // transposed coefficient matrices: (C_a·C_b)ᵀ = BᵀAᵀ = B_map·A_map
      Eigen::Map<const Mat> A(a.data(), r, r), B(b.data(), r, r);
      CVec out(dim_);
      Eigen::Map<Mat>(out.data(), r, r) = scale * (B * A);
      return out;
    }
    return expand(Mat(synthesize(a) * synthesize(b)));
  }

  /// Max deviation of the basis Gram matrix from the identity.
  double gram_residual() const {
    materialize();
    double worst = 0.0;
    for (int i = 0; i < dim_; ++i)
      for (int j = i; j < dim_; ++j) {
        const Cplx g = trace_ip(basis_[static_cast<size_t>(i)], basis_[static_cast<size_t>(j)]);
        worst = std::max(worst, std::abs(g - (i == j ? Cplx(1, 0) : Cplx(0, 0))));
      }
    return worst;
  }

  /// Max deviation (in ntr-norm) of pairwise products and adjoints of basis
  /// elements from their projections back onto the span. Absolute scale: the
  /// basis elements are ntr-unit, so products of near-zero norm do not blow up.
  double closure_residual() const {
    materialize();
    double worst = 0.0;
    auto defect = [&](const Mat& x) { return ntr_norm(Mat(x - project(x))); };
    for (int i = 0; i < dim_; ++i) {
      worst = std::max(worst, defect(basis_[static_cast<size_t>(i)].adjoint()));
      for (int j = 0; j < dim_; ++j)
        worst = std::max(
            worst, defect(basis_[static_cast<size_t>(i)] * basis_[static_cast<size_t>(j)]));
    }
    return worst;
  }

 private:
  SubAlgebra() = default;

  void materialize() const {
    if (basis_ready_) return;
    std::lock_guard<std::mutex> lock(mat_mutex_);
    if (basis_ready_) return;
    const SlotStructure& s = *slots_;
    const int r = s.red_dim();
    const double scale = std::sqrt(static_cast<double>(r));
    std::vector<Mat> b;
    b.reserve(static_cast<size_t>(dim_));
    Mat unit = Mat::Zero(r, r);
    for (int p = 0; p < r; ++p)
      for (int q = 0; q < r; ++q) {
        unit(p, q) = scale;
        b.push_back(unreduce(unit));
        unit(p, q) = 0.0;
      }
    basis_ = std::move(b);
    basis_ready_ = true;
  }

  int ambient_dim_ = 0;
  int dim_ = 0;
  bool contains_unit_ = false;
  std::optional<SlotStructure> slots_;
  mutable std::vector<Mat> basis_;
  mutable bool basis_ready_ = false;
  mutable std::mutex mat_mutex_;
};

namespace detail {

/// Orthonormal basis (under trace_ip) of the span of `mats`, via rank-revealing SVD.
/// Cutoff is relative to the largest singular value. JacobiSVD: these reference
/// backends run at small sizes and need dependable singular subspaces.
inline std::vector<Mat> onb_of_span(int n, const std::vector<Mat>& mats, double cutoff = 1e-10) {
  if (mats.empty()) return {};
  Mat stacked(static_cast<Eigen::Index>(n) * n, static_cast<Eigen::Index>(mats.size()));
  for (size_t c = 0; c < mats.size(); ++c)
    stacked.col(static_cast<Eigen::Index>(c)) = Eigen::Map<const CVec>(mats[c].data(), n * n);
  Eigen::JacobiSVD<Mat> svd(stacked, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  const double thresh = cutoff * sv(0);
  std::vector<Mat> out;
  const double scale = std::sqrt(static_cast<double>(n));  // Frobenius-unit → ntr-unit
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) <= thresh) break;
    CVec col = svd.matrixU().col(i) * scale;
    out.push_back(Eigen::Map<const Mat>(col.data(), n, n));
  }
  return out;
}

}  // namespace detail

/// Orthonormal basis of the unital multiplicative *-closure of `gens` in M_n.
inline SubAlgebraPtr orthonormalize(int ambient_dim, const std::vector<Mat>& gens,
                                    double cutoff = 1e-10) {
  const int n = ambient_dim;
  for (const auto& g : gens)
    if (g.rows() != n || g.cols() != n) throw DimensionMismatch("orthonormalize: generator size");

  std::vector<Mat> cands = gens;
  cands.push_back(Mat::Identity(n, n));
  std::vector<Mat> span = detail::onb_of_span(n, cands, cutoff);
  for (int iter = 0;; ++iter) {
    if (static_cast<long>(span.size()) > static_cast<long>(n) * n)
      throw ClosureDiverged("orthonormalize: closure exceeded ambient dimension squared");
    std::vector<Mat> next = span;
    for (const auto& a : span) {
      next.push_back(a.adjoint());
      for (const auto& b : span) next.push_back(a * b);
    }
    std::vector<Mat> span2 = detail::onb_of_span(n, next, cutoff);
    if (span2.size() == span.size()) {
      span = std::move(span2);
      break;
    }
    if (iter > 2 * n * n) throw ClosureDiverged("orthonormalize: closure did not stabilize");
    span = std::move(span2);
  }
  return std::make_shared<const SubAlgebra>(n, std::move(span), true);
}

/// Commutant S′ in the ambient full matrix algebra, by solving the stacked
/// commutator system (reference backend; meant for small ambient dimensions).
inline SubAlgebraPtr commutant(const SubAlgebra& S, double cutoff = 1e-10) {
  const int n = S.ambient_dim();
  const auto& basis = S.basis();
  const Eigen::Index n2 = static_cast<Eigen::Index>(n) * n;
  Mat K(n2 * static_cast<Eigen::Index>(basis.size()), n2);
  const Mat id = Mat::Identity(n, n);
  for (size_t i = 0; i < basis.size(); ++i) {
    // vec(bx − xb) = (I⊗b − bᵀ⊗I)·vec(x), column-major vec
    K.middleRows(static_cast<Eigen::Index>(i) * n2, n2) =
        kron(id, basis[i]) - kron(basis[i].transpose(), id);
  }
  Eigen::JacobiSVD<Mat> svd(K, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // absolute floor: the basis is ntr-orthonormal, so genuine constraints carry
  // singular values of order one even when the whole system nearly vanishes
  const double thresh = cutoff * std::max(sv(0), 1.0);
  std::vector<Mat> out;
  const double scale = std::sqrt(static_cast<double>(n));
  for (Eigen::Index i = 0; i < n2; ++i) {
    const double s = i < sv.size() ? sv(i) : 0.0;
    if (s > thresh) continue;
    CVec col = svd.matrixV().col(i) * scale;
    out.push_back(Eigen::Map<const Mat>(col.data(), n, n));
  }
  return std::make_shared<const SubAlgebra>(n, std::move(out), true);
}

/// Intersection of two spans (null space of the stacked complement projectors),
/// verified *- and product-closed.
inline SubAlgebraPtr intersect(const SubAlgebra& S, const SubAlgebra& T, double cutoff = 1e-10,
                               double closure_tol = 1e-8) {
  if (S.ambient_dim() != T.ambient_dim())
    throw DimensionMismatch("intersect: ambient dimensions differ");
  const int n = S.ambient_dim();
  const Eigen::Index n2 = static_cast<Eigen::Index>(n) * n;
  const double fscale = std::sqrt(static_cast<double>(n));

  auto proj_complement = [&](const SubAlgebra& A) {
    Mat U(n2, A.dim());
    for (int i = 0; i < A.dim(); ++i)
      U.col(i) = Eigen::Map<const CVec>(A.basis(i).data(), n2) / fscale;
    return Mat(Mat::Identity(n2, n2) - U * U.adjoint());
  };

  Mat K(2 * n2, n2);
  K.topRows(n2) = proj_complement(S);
  K.bottomRows(n2) = proj_complement(T);
  Eigen::JacobiSVD<Mat> svd(K, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double thresh = cutoff * std::max(sv(0), 1.0);
  std::vector<Mat> out;
  for (Eigen::Index i = 0; i < n2; ++i) {
    const double s = i < sv.size() ? sv(i) : 0.0;
    if (s > thresh) continue;
    CVec col = svd.matrixV().col(i) * fscale;
    out.push_back(Eigen::Map<const Mat>(col.data(), n, n));
  }
  auto result = std::make_shared<const SubAlgebra>(n, std::move(out), true);
  const double closure = result->closure_residual();
  if (closure > closure_tol)
    throw NotAnAlgebra("intersect: result not closed under product/adjoint, residual " +
                       std::to_string(closure));
  return result;
}

/// ⟨·,·⟩-orthogonal projection onto S; the trace-preserving conditional expectation.
inline Mat cond_expectation(const SubAlgebra& S, const Mat& x) {
  if (x.rows() != S.ambient_dim() || x.cols() != S.ambient_dim())
    throw DimensionMismatch("cond_expectation: dimension mismatch");
  return S.project(x);
}

/// The algebra generated by pointwise products of two commuting unital subalgebras.
inline SubAlgebraPtr product_span(const SubAlgebra& S, const SubAlgebra& T,
                                  double commute_tol = 1e-10, double cutoff = 1e-10) {
  if (S.ambient_dim() != T.ambient_dim())
    throw DimensionMismatch("product_span: ambient dimensions differ");
  const int n = S.ambient_dim();
  for (int i = 0; i < S.dim(); ++i)
    for (int j = 0; j < T.dim(); ++j) {
      const Mat& s = S.basis(i);
      const Mat& t = T.basis(j);
      const double res = (s * t - t * s).norm() / std::max(s.norm() * t.norm(), 1e-300);
      if (res > commute_tol)
        throw NonCommutingFactors("product_span: factors do not commute, residual " +
                                  std::to_string(res));
    }
  std::vector<Mat> prods;
  prods.reserve(static_cast<size_t>(S.dim()) * static_cast<size_t>(T.dim()));
  for (int i = 0; i < S.dim(); ++i)
    for (int j = 0; j < T.dim(); ++j) prods.push_back(S.basis(i) * T.basis(j));
  auto result =
      std::make_shared<const SubAlgebra>(n, detail::onb_of_span(n, prods, cutoff), true);
  return result;
}

}  // namespace wqh
