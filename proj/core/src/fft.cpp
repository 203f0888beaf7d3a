#include "hsl/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace hsl {
namespace {

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(int n, FftSign sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto key = std::make_pair(n, static_cast<int>(sign));
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    // FFTW_ESTIMATE leaves the scratch array untouched; it only fixes the layout.
    std::vector<cplx> scratch(static_cast<std::size_t>(n) * n * n);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft_3d(n, n, n, buf, buf, static_cast<int>(sign),
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
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

}  // namespace

void fft3d(std::vector<cplx>& data, int n, FftSign sign) {
  if (data.size() != static_cast<std::size_t>(n) * n * n)
    throw DomainError("fft3d: array size does not match n^3");
  fftw_plan plan = cache().get(n, sign);
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, buf, buf);
}

}  // namespace hsl
