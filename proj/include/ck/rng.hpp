#pragma once

#include <cmath>
#include <cstdint>

// Counter-friendly random number utilities.
//
// Simulation draws come from one SplitMix64 stream per individual, keyed by
// (seed, id).  That makes every record a pure function of (config, seed, id):
// generation order, chunking, and thread count cannot change the data, and a
// single record can be regenerated in isolation.  Normal and truncated-normal
// variates are produced by inverting the CDF on a single uniform, so each
// latent consumes exactly one draw from the stream.

namespace ck {

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Derives a stream state from a base seed and a stream index (record id,
// bootstrap replicate index, ...).  The golden-ratio multiplier keeps nearby
// ids far apart in state space before finalization.
inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t index) {
  return mix64(seed ^ (0x9E3779B97F4A7C15ULL * (index + 1)));
}

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }

  // Uniform on the open interval (0, 1); never returns an endpoint, so it is
  // safe to feed straight into a quantile function.
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Index uniform on {0, 1, ..., bound - 1}.
  std::uint64_t next_below(std::uint64_t bound) {
    auto draw = static_cast<std::uint64_t>(next_uniform() * static_cast<double>(bound));
    return draw >= bound ? bound - 1 : draw;
  }

 private:
  std::uint64_t state_;
};

// Standard normal quantile function (Wichura's PPND16 rational
// approximation), accurate to about 1e-15 over (0, 1).
inline double normal_quantile(double p) {
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double x;
  if (r <= 5.0) {
    r -= 1.6;
    x = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
            3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
          4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
          2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    x = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
          5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -x : x;
}

inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.70710678118654752440);
}

// Maps a uniform draw to N(mean, sd) truncated to [lo, hi] by inverting the
// conditional CDF.  Uses exactly one uniform, keeping stream layout fixed.
inline double truncated_normal(double u, double mean, double sd, double lo,
                               double hi) {
  const double a = normal_cdf((lo - mean) / sd);
  const double b = normal_cdf((hi - mean) / sd);
  const double p = a + u * (b - a);
  double x = mean + sd * normal_quantile(p);
  if (x < lo) x = lo;
  if (x > hi) x = hi;
  return x;
}

inline double expit(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace ck
