#include "dlr/dft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace dlr {
namespace {

// FFTW's planner is not thread-safe; execution with the new-array interface
// is. Plans are created once per (length, direction) and never destroyed.
class PlanCache {
 public:
  fftw_plan get(int n, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    auto* in = fftw_alloc_complex(static_cast<std::size_t>(n));
    auto* out = fftw_alloc_complex(static_cast<std::size_t>(n));
    fftw_plan plan = fftw_plan_dft_1d(n, in, out, sign,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<int, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

std::vector<Complex> transform(std::span<const Complex> x, int sign) {
  std::vector<Complex> in(x.begin(), x.end());
  std::vector<Complex> out(x.size());
  if (x.empty()) return out;
  fftw_plan plan = cache().get(static_cast<int>(x.size()), sign);
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

}  // namespace

std::vector<Complex> fft(std::span<const Complex> x) {
  return transform(x, FFTW_FORWARD);
}

std::vector<Complex> ifft(std::span<const Complex> x) {
  return transform(x, FFTW_BACKWARD);
}

}  // namespace dlr
