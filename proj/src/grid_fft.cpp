#include "hdsim/grid_fft.hpp"

#include <mutex>
#include <stdexcept>

#include <fftw3.h>

namespace hdsim {

namespace {
// FFTW's planner is not thread-safe; execution of a built plan is.
std::mutex planner_mutex;
}  // namespace

void fft2(std::vector<std::complex<double>>& data, int n0, int n1,
          bool inverse) {
  if (n0 < 1 || n1 < 1 ||
      data.size() != static_cast<size_t>(n0) * static_cast<size_t>(n1))
    throw std::invalid_argument("fft2: shape does not match data size");
  auto* raw = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex);
    plan = fftw_plan_dft_2d(n0, n1, raw, raw,
                            inverse ? FFTW_BACKWARD : FFTW_FORWARD,
                            FFTW_ESTIMATE);
  }
  if (plan == nullptr) throw std::runtime_error("fft2: planning failed");
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(planner_mutex);
    fftw_destroy_plan(plan);
  }
}

}  // namespace hdsim
