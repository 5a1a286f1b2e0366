#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

#include "rollcall/errors.hpp"

namespace rollcall {

// All randomness flows through mt19937_64 (sequence pinned by the standard)
// and hand-rolled transforms, so runs are byte-identical across toolchains.
// std::*_distribution sequences are implementation-defined and never used.

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Independent stream per (seed, tag...) without coordinating counters.
inline uint64_t derive_seed(uint64_t base, std::initializer_list<uint64_t> tags) {
  uint64_t s = splitmix64(base);
  for (uint64_t t : tags) s = splitmix64(s ^ t);
  return s;
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t raw() { return eng_(); }

  // [0, 1), 53-bit resolution
  double uniform() { return double(eng_() >> 11) * 0x1.0p-53; }

  double uniform_pos() {
    double u;
    do {
      u = uniform();
    } while (u <= 0.0);
    return u;
  }

  // Box-Muller cosine branch; two engine draws per call (u1=0 rejected)
  double normal() {
    double u1 = uniform_pos();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    return r * std::cos(2.0 * M_PI * u2);
  }

  // rate parameterization: density (rate/2) exp(-rate |z|)
  double laplace(double rate) {
    double u = uniform_pos() - 0.5;
    double s = u < 0 ? -1.0 : 1.0;
    return -s * std::log1p(-2.0 * std::fabs(u)) / rate;
  }

  // Marsaglia-Tsang; shape boost for shape < 1
  double gamma(double shape) {
    if (!(shape > 0)) throw InvalidArgument("gamma shape must be positive");
    if (shape < 1.0) {
      double g = gamma(shape + 1.0);
      return g * std::pow(uniform_pos(), 1.0 / shape);
    }
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0) continue;
      v = v * v * v;
      double u = uniform_pos();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
  }

  std::vector<double> dirichlet(double alpha, int k) {
    std::vector<double> g(k);
    double sum = 0;
    for (int i = 0; i < k; ++i) {
      g[i] = gamma(alpha);
      sum += g[i];
    }
    for (double& v : g) v /= sum;
    return g;
  }

  // unbiased integer in [0, n)
  uint64_t below(uint64_t n) {
    if (n == 0) throw InvalidArgument("below(0)");
    uint64_t lim = UINT64_MAX - UINT64_MAX % n;
    uint64_t r;
    do {
      r = eng_();
    } while (r >= lim);
    return r % n;
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  std::vector<size_t> permutation(size_t n) {
    std::vector<size_t> p(n);
    for (size_t i = 0; i < n; ++i) p[i] = i;
    shuffle(p);
    return p;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace rollcall
