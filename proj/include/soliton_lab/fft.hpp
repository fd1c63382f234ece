#pragma once

#include <fftw3.h>

#include <map>
#include <mutex>

#include "soliton_lab/common.hpp"

namespace soliton_lab {
namespace detail {

// Cached FFTW plans, one per (size, direction). Plans are created with
// FFTW_ESTIMATE (deterministic plan choice) and FFTW_UNALIGNED so they can
// execute on std::vector storage. Plan creation is serialized; execution of
// an existing plan on caller-owned arrays is thread-safe.
class FftCache {
 public:
  static FftCache& instance() {
    static FftCache c;
    return c;
  }

  void transform(CField& data, int sign) {
    fftw_plan p = plan(data.size(), sign);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(data.data()),
                     reinterpret_cast<fftw_complex*>(data.data()));
  }

 private:
  fftw_plan plan(std::size_t n, int sign) {
    std::scoped_lock lock(mutex_);
    auto key = std::make_pair(n, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    CField scratch(n);
    fftw_plan p = fftw_plan_dft_1d(
        static_cast<int>(n), reinterpret_cast<fftw_complex*>(scratch.data()),
        reinterpret_cast<fftw_complex*>(scratch.data()), sign,
        FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, p);
    return p;
  }

  std::mutex mutex_;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

}  // namespace detail

// In-place forward transform, unnormalized: X_k = sum_j x_j e^{-2pi i jk/n}.
inline void fft_forward(CField& data) { detail::FftCache::instance().transform(data, FFTW_FORWARD); }

// In-place inverse transform, normalized by 1/n.
inline void fft_inverse(CField& data) {
  detail::FftCache::instance().transform(data, FFTW_BACKWARD);
  const Real s = 1.0 / static_cast<Real>(data.size());
  for (auto& z : data) z *= s;
}

}  // namespace soliton_lab
