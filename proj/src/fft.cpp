#include "mrrecon/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>
#include <vector>

namespace mrrecon::fft {
namespace {

class PlanCache {
public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(std::size_t rows, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(rows, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<cplx> scratch(rows * rows);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    const int n = static_cast<int>(rows);
    fftw_plan plan = fftw_plan_dft_2d(n, n, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan == nullptr) throw std::runtime_error("FFTW failed to create a plan");
    plans_.emplace(key, plan);
    return plan;
  }

private:
  std::mutex mutex_;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

void run(std::span<cplx> data, std::size_t rows, int sign) {
  if (data.size() != rows * rows) throw std::invalid_argument("fft: buffer is not rows x rows");
  auto plan = cache().get(rows, sign);
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, buf, buf);
}

}  // namespace

void forward_2d(std::span<cplx> data, std::size_t rows) { run(data, rows, FFTW_FORWARD); }
void backward_2d(std::span<cplx> data, std::size_t rows) { run(data, rows, FFTW_BACKWARD); }

}  // namespace mrrecon::fft
