#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "wqh/subalgebra.hpp"

namespace wqh {

/// Deterministic complex-gaussian stream, split from a master seed and a label so
/// that independent checks draw independent, order-insensitive streams.
class CheckRng {
 public:
  explicit CheckRng(std::uint64_t seed) : gen_(seed) {}

  CheckRng(std::uint64_t master_seed, std::string_view label) : gen_(mix(master_seed, label)) {}

  double gaussian() {
    // Box–Muller on explicit uniforms; keeps the stream independent of
    // library-specific distribution internals.
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 1e-300);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

  Cplx cgaussian() { return Cplx(gaussian(), gaussian()); }

  CVec cgaussian_vec(int n) {
    CVec v(n);
    for (int i = 0; i < n; ++i) v(i) = cgaussian();
    return v;
  }

 private:
  static std::uint64_t mix(std::uint64_t seed, std::string_view label) {
    // FNV-1a over the label, folded into the seed
    std::uint64_t h = 1469598103934665603ull ^ seed;
    for (char c : label) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
    return h;
  }

  double uniform() {
    return (static_cast<double>(gen_() >> 11)) * (1.0 / 9007199254740992.0);
  }

  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Random element of S with unit trace_ip norm: gaussian coefficients over the
/// orthonormal basis, normalized.
inline Mat random_element(const SubAlgebra& S, CheckRng& rng) {
  CVec c = rng.cgaussian_vec(S.dim());
  c /= c.norm();
  return S.synthesize(c);
}

/// Random self-adjoint element of S, unit norm.
inline Mat random_selfadjoint(const SubAlgebra& S, CheckRng& rng) {
  Mat x = random_element(S, rng);
  Mat h = 0.5 * (x + x.adjoint());
  const double n = ntr_norm(h);
  return n > 0 ? Mat(h / n) : h;
}

}  // namespace wqh
