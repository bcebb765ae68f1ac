#pragma once

namespace gwasdl {

/// Complementary error function via W. J. Cody's rational Chebyshev
/// approximations (three ranges: |x| <= 0.5, <= 4, > 4), relative accuracy
/// near double precision across the whole line.
double erfc_cody(double x);

/// Upper tail of the standard normal, 0.5 * erfc(z / sqrt 2).
double normal_sf(double z);
double normal_cdf(double z);

/// Two-sided Wald p-value for a z statistic.
double two_sided_p(double z);

/// Inverse standard normal CDF (Acklam's rational approximation refined by
/// one Halley step against erfc_cody). p must lie in (0, 1).
double normal_quantile(double p);

}  // namespace gwasdl
