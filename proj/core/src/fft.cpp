#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace dk::detail {
namespace {

// FFTW planning is not thread-safe, execution on fresh arrays is.  Plans are
// created once per (dim, n, sign) with FFTW_ESTIMATE so that the chosen
// algorithm, and therefore every rounding, is the same in every process.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(const GridSpec& grid, int sign) {
    const auto key = std::make_tuple(grid.dim(), grid.n(), sign);
    std::lock_guard lock(mutex_);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    std::vector<int> dims(grid.dim(), grid.n());
    auto* in = fftw_alloc_complex(grid.size());
    auto* out = fftw_alloc_complex(grid.size());
    fftw_plan plan = fftw_plan_dft(grid.dim(), dims.data(), in, out,
                                   sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

}  // namespace

void fft(const GridSpec& grid, int sign, std::span<const Complex> in, std::span<Complex> out) {
  fftw_plan plan = cache().get(grid, sign);
  // fftw_execute_dft never writes to its input for out-of-place plans.
  auto* src = reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in.data()));
  auto* dst = reinterpret_cast<fftw_complex*>(out.data());
  fftw_execute_dft(plan, src, dst);
}

}  // namespace dk::detail
