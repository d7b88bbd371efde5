#pragma once

#include <complex>
#include <vector>

namespace hdsim {

// Thin RAII wrapper over FFTW complex-to-complex 2-D transforms.
// Plans are created per call with FFTW_ESTIMATE (deterministic results,
// no wisdom state); data is row-major n0 x n1.
void fft2(std::vector<std::complex<double>>& data, int n0, int n1,
          bool inverse);

}  // namespace hdsim
