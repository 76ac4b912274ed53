#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <utility>

namespace psi::detail {
namespace {

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n) : data(fftw_alloc_complex(n)) {}
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* data;
};

// Planning is not thread-safe in FFTW; execution with new-array execute is.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(int n, int sign) {
    std::lock_guard lock(mutex_);
    auto [it, inserted] = plans_.try_emplace({n, sign}, nullptr);
    if (inserted) {
      FftwBuffer in(static_cast<std::size_t>(n)), out(static_cast<std::size_t>(n));
      it->second = fftw_plan_dft_1d(n, in.data, out.data, sign, FFTW_ESTIMATE);
    }
    return it->second;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<int, int>, fftw_plan> plans_;
};

PlanCache& plans() {
  static PlanCache cache;
  return cache;
}

std::vector<std::complex<double>> transform(std::span<const std::complex<double>> input, int sign) {
  const auto n = input.size();
  if (n == 0) return {};
  FftwBuffer in(n), out(n);
  for (std::size_t i = 0; i < n; ++i) {
    in.data[i][0] = input[i].real();
    in.data[i][1] = input[i].imag();
  }
  fftw_execute_dft(plans().get(static_cast<int>(n), sign), in.data, out.data);
  std::vector<std::complex<double>> result(n);
  for (std::size_t i = 0; i < n; ++i) result[i] = {out.data[i][0], out.data[i][1]};
  return result;
}

}  // namespace

std::vector<std::complex<double>> fft(std::span<const std::complex<double>> input) {
  return transform(input, FFTW_FORWARD);
}

std::vector<std::complex<double>> ifft(std::span<const std::complex<double>> input) {
  auto out = transform(input, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(out.size());
  for (auto& v : out) v *= scale;
  return out;
}

}  // namespace psi::detail
