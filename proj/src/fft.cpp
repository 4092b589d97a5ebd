#include "ckm/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace ckm {

namespace {

// The FFTW planner is not thread-safe; plans are cached per (length, count,
// direction) and executed with the new-array interface (FFTW_UNALIGNED makes
// that valid for any buffer).
std::mutex g_plan_mutex;

fftw_plan get_plan(int n, int howmany, int sign) {
  static std::map<std::tuple<int, int, int>, fftw_plan> cache;
  const auto key = std::make_tuple(n, howmany, sign);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::vector<fftw_complex> in(static_cast<std::size_t>(n) * howmany);
  std::vector<fftw_complex> out(static_cast<std::size_t>(n) * howmany);
  fftw_plan plan = fftw_plan_many_dft(1, &n, howmany, in.data(), nullptr, 1, n, out.data(),
                                      nullptr, 1, n, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  cache.emplace(key, plan);
  return plan;
}

MatrixXc run(const MatrixXc& x, int sign) {
  const int n = static_cast<int>(x.rows());
  const int howmany = static_cast<int>(x.cols());
  MatrixXc out(n, howmany);
  if (n == 0 || howmany == 0) return out;
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    plan = get_plan(n, howmany, sign);
  }
  fftw_execute_dft(plan,
                   reinterpret_cast<fftw_complex*>(const_cast<cplx*>(x.data())),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

}  // namespace

MatrixXc dft_cols(const MatrixXc& x) { return run(x, FFTW_FORWARD); }

MatrixXc idft_cols(const MatrixXc& x) { return run(x, FFTW_BACKWARD); }

}  // namespace ckm
