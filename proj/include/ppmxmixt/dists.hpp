#pragma once

#include <cmath>
#include <limits>

namespace ppmxmixt::dists {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double log_2pi = 1.8378770664093454836;
inline constexpr double sqrt_2_over_pi = 0.79788456080286535588;

inline double log_norm_pdf(double x, double mu, double sd) {
  const double z = (x - mu) / sd;
  return -0.5 * z * z - 0.5 * log_2pi - std::log(sd);
}

inline double norm_cdf(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }

// survival function P(Z >= z); erfc keeps the upper tail accurate
inline double norm_sf(double z) { return 0.5 * std::erfc(z * M_SQRT1_2); }

// log Phi(z); erfc covers everything down to where it underflows, the
// asymptotic expansion takes over below that
inline double log_norm_cdf(double z) {
  if (z > -36.0) return std::log(norm_cdf(z));
  const double z2 = z * z;
  // Phi(z) ~ phi(z)/(-z) * (1 - 1/z^2 + 3/z^4 - 15/z^6 + 105/z^8)
  const double series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) -
                        15.0 / (z2 * z2 * z2) + 105.0 / (z2 * z2 * z2 * z2);
  return -0.5 * z2 - 0.5 * log_2pi - std::log(-z) + std::log(series);
}

// Wichura's PPND16 rational approximations; |error| ~ 1e-16 over (0,1)
inline double norm_quantile(double p) {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        q * (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                   6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                 1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
               1.3314166789178437745e2) * r + 3.3871328727963666080);
    const double den =
        (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
              3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
            5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
          4.2313330701600911252e1) * r + 1.0);
    return num / den;
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258) * r +
            3.64784832476320460504) * r + 5.76949722146069140550) * r +
          4.63033784615654529590) * r + 1.42343711074968357734);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940) * r +
          2.05319162663775882187) * r + 1.0);
    val = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580) * r +
          5.46378491116411436990) * r + 6.65790464350110377720);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
    val = num / den;
  }
  return (q < 0.0) ? -val : val;
}

// Y = loc + psi*|Z0| + sigma*Z1 with Z0, Z1 iid N(0,1):
//   density 2/omega phi((y-loc)/omega) Phi(slant*(y-loc)/omega),
//   omega^2 = sigma^2 + psi^2, slant = psi/sigma.
inline double skew_normal_logpdf(double y, double loc, double psi,
                                 double sigma2) {
  const double omega2 = sigma2 + psi * psi;
  const double omega = std::sqrt(omega2);
  const double z = (y - loc) / omega;
  const double slant = psi / std::sqrt(sigma2);
  return std::log(2.0) - std::log(omega) - 0.5 * z * z - 0.5 * log_2pi +
         log_norm_cdf(slant * z);
}

inline double skew_normal_mean(double loc, double psi) {
  return loc + psi * sqrt_2_over_pi;
}

inline double skew_normal_var(double psi, double sigma2) {
  return sigma2 + psi * psi * (1.0 - 2.0 / pi);
}

// mean of N(mu, sd^2) truncated to [lo, inf)
inline double trunc_normal_lower_mean(double mu, double sd, double lo) {
  const double a = (lo - mu) / sd;
  const double lambda =
      std::exp(log_norm_pdf(a, 0.0, 1.0) - std::log(norm_sf(a)));
  return mu + sd * lambda;
}

inline double trunc_normal_lower_var(double mu, double sd, double lo) {
  const double a = (lo - mu) / sd;
  const double lambda =
      std::exp(log_norm_pdf(a, 0.0, 1.0) - std::log(norm_sf(a)));
  return sd * sd * (1.0 + a * lambda - lambda * lambda);
}

}  // namespace ppmxmixt::dists
