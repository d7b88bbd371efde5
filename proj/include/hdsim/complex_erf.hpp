#pragma once

#include <complex>

namespace hdsim {

// Faddeeva function w(z) = e^{-z^2} erfc(-iz), accurate to ~1e-13 on the
// upper half plane (rational approximation with 36 expansion terms);
// values for Im z < 0 follow from w(-z) = 2 e^{-z^2} - w(z)... handled by
// the erf/erfc wrappers below, which are valid on all of C.
std::complex<double> faddeeva_w(std::complex<double> z);

// Complementary error function and error function for complex argument.
std::complex<double> erfc_complex(std::complex<double> z);
std::complex<double> erf_complex(std::complex<double> z);

}  // namespace hdsim
