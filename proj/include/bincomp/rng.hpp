#pragma once

#include "bincomp/common.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <random>

namespace bincomp {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Mixes a master seed with a stream index (trial number, restart number, ...)
/// into an independent substream seed.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) {
  return detail::splitmix64(detail::splitmix64(seed) ^ detail::splitmix64(stream + 0x632be59bd9b4e019ULL));
}

/// Seeded random generator with hand-rolled distributions so that streams are
/// bit-reproducible across standard libraries (std:: distributions are not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(detail::splitmix64(seed)) {}

  static Rng substream(std::uint64_t seed, std::uint64_t stream) {
    return Rng(substream_seed(seed, stream));
  }

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal via the polar (Marsaglia) method; pairs are cached.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  /// Unbiased uniform integer in [0, n) via masked rejection.
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    std::uint64_t mask = ~0ULL >> std::countl_zero(n - 1);
    std::uint64_t x;
    do {
      x = gen_() & mask;
    } while (x >= n);
    return x;
  }

  /// Uniform sample from the probability simplex (exponential spacings).
  Vector simplex(Index r) {
    Vector v(r);
    double sum = 0.0;
    for (Index i = 0; i < r; ++i) {
      v[i] = -std::log(1.0 - uniform());
      sum += v[i];
    }
    return v / sum;
  }

  /// Uniform random permutation of {0, ..., n-1} (Fisher-Yates).
  IndexList permutation(Index n) {
    IndexList p(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
    for (Index i = n - 1; i > 0; --i) {
      auto j = static_cast<Index>(below(static_cast<std::uint64_t>(i) + 1));
      std::swap(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(j)]);
    }
    return p;
  }

  /// k distinct indices drawn from {0, ..., n-1}, in draw order.
  IndexList sample_without_replacement(Index n, Index k) {
    IndexList pool(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
    IndexList out;
    out.reserve(static_cast<std::size_t>(k));
    for (Index i = 0; i < k; ++i) {
      auto j = static_cast<Index>(below(static_cast<std::uint64_t>(n - i)));
      out.push_back(pool[static_cast<std::size_t>(j)]);
      std::swap(pool[static_cast<std::size_t>(j)], pool[static_cast<std::size_t>(n - 1 - i)]);
    }
    return out;
  }

  /// Matrix with i.i.d. Bernoulli(p) entries, column-major fill order.
  Matrix bernoulli_matrix(Index m, Index n, double p) {
    Matrix M(m, n);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < m; ++i) M(i, j) = bernoulli(p) ? 1.0 : 0.0;
    return M;
  }

  /// Matrix with i.i.d. standard Gaussian entries, column-major fill order.
  Matrix gaussian_matrix(Index m, Index n) {
    Matrix M(m, n);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < m; ++i) M(i, j) = gaussian();
    return M;
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace bincomp
