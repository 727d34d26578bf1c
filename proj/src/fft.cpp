#include "ward/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace ward::fft {

namespace {

struct PlanCache {
  std::mutex mu;
  std::map<std::tuple<int, int, int>, fftw_plan> plans;
  ~PlanCache() {
    for (auto& [k, p] : plans) fftw_destroy_plan(p);
  }
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

fftw_plan get_plan(int len, int howmany, int sign) {
  auto& c = cache();
  std::lock_guard<std::mutex> lock(c.mu);
  auto key = std::make_tuple(len, howmany, sign);
  auto it = c.plans.find(key);
  if (it != c.plans.end()) return it->second;
  // FFTW_ESTIMATE keeps plan choice (and hence output bits) deterministic.
  auto* buf = fftw_alloc_complex(size_t(len) * howmany);
  int n[1] = {len};
  fftw_plan p = fftw_plan_many_dft(1, n, howmany, buf, nullptr, 1, len, buf, nullptr, 1, len,
                                   sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(buf);
  c.plans.emplace(key, p);
  return p;
}

}  // namespace

void rows(cplx* data, int len, int howmany, int sign) {
  if (len <= 0 || howmany <= 0) return;
  fftw_plan p = get_plan(len, howmany, sign);
  auto* d = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(p, d, d);
}

}  // namespace ward::fft
