#pragma once

namespace mixq {

double normal_pdf(double z);
double normal_cdf(double z);

// Inverse standard-normal CDF. Acklam's rational approximation refined with
// one Halley step against normal_cdf; accurate to ~1e-15 over (0, 1).
double inverse_normal_cdf(double p);

} // namespace mixq
