#pragma once

#include <cmath>
#include <cstdint>

#include "decisens/core.hpp"

namespace decisens {

// splitmix64 step; also used as the stream-mixing hash.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic random stream addressed by (seed, stream id). Streams with
// distinct ids are independent for practical purposes and may be created in
// any order, which is what makes per-draw / per-individual substreams
// reproducible regardless of evaluation order.
class Substream {
 public:
  Substream(std::uint64_t seed, std::uint64_t stream_id) {
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64(s);
    s = seed ^ (0x9e3779b97f4a7c15ULL + stream_id * 0xd1b54a32d192ed03ULL);
    std::uint64_t b = splitmix64(s);
    state_ = a ^ (b + 0x2545f4914f6cdd1dULL);
  }

  std::uint64_t next_u64() { return splitmix64(state_); }

  // Uniform on (0, 1), never returns an exact endpoint.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via polar rejection.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

  // log of a Gamma(shape, 1) variate.  Marsaglia-Tsang for shape >= 1; the
  // shape < 1 boost is applied in log space so tiny shapes (Dirichlet rows
  // with alpha/m << 1) do not underflow to zero.
  double log_gamma_variate(double shape) {
    if (shape <= 0.0) throw input_error("gamma shape must be positive");
    if (shape < 1.0) {
      const double lg = log_gamma_variate(shape + 1.0);
      return lg + std::log(uniform()) / shape;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return std::log(d * v);
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
        return std::log(d * v);
    }
  }

  double gamma_variate(double shape) { return std::exp(log_gamma_variate(shape)); }

 private:
  std::uint64_t state_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace decisens
