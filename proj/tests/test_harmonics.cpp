#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "ckm/harmonics.hpp"
#include "ckm/rng.hpp"

using namespace ckm;

namespace {

// Independent oracle: peak of the zero-padded periodogram (naive DFT).
double periodogram_peak(const VectorXc& v, int grid) {
  double best_val = -1.0, best_w = 0.0;
  for (int g = 0; g < grid; ++g) {
    const double w = -0.5 + static_cast<double>(g) / grid;
    cplx acc(0, 0);
    for (Index n = 0; n < v.size(); ++n) {
      const double ph = 2.0 * std::numbers::pi * w * static_cast<double>(n);
      acc += v(n) * cplx(std::cos(ph), std::sin(ph));
    }
    if (std::norm(acc) > best_val) {
      best_val = std::norm(acc);
      best_w = w;
    }
  }
  return best_w;
}

}  // namespace

TEST_CASE("steering has unit-modulus entries and the frozen n=4 quarter-cycle values") {
  VectorXc v = steering(4, 0.25);
  CHECK(std::abs(v(0) - cplx(1, 0)) < 1e-15);
  CHECK(std::abs(v(1) - cplx(0, -1)) < 1e-12);
  CHECK(std::abs(v(2) - cplx(-1, 0)) < 1e-12);
  CHECK(std::abs(v(3) - cplx(0, 1)) < 1e-12);
  CHECK(steering(6, 0.0).isApprox(VectorXc::Ones(6)));
  for (Index i = 0; i < 4; ++i) CHECK(std::abs(v(i)) == doctest::Approx(1.0));
}

TEST_CASE("wrap_frequency canonicalizes to [-0.5, 0.5)") {
  CHECK(wrap_frequency(0.75) == doctest::Approx(-0.25));
  CHECK(wrap_frequency(-0.75) == doctest::Approx(0.25));
  CHECK(wrap_frequency(0.2) == doctest::Approx(0.2));
  CHECK(wrap_frequency(0.5) == doctest::Approx(-0.5));
  CHECK(wrap_frequency(3.1) == doctest::Approx(0.1).epsilon(1e-9));
}

TEST_CASE("music_freq on a noiseless tone is within one grid step everywhere in band") {
  for (double w0 = -0.4; w0 <= 0.401; w0 += 0.05) {
    VectorXc v = steering(16, w0);
    const double est = music_freq(v);
    CHECK(std::abs(est - w0) < 1.0 / 4096);
  }
}

TEST_CASE("music_freq matches the periodogram oracle on random tones") {
  Rng rng(17);
  for (int trial = 0; trial < 8; ++trial) {
    const double w0 = rng.uniform(-0.45, 0.45);
    VectorXc v = steering(24, w0);
    // mild noise so the oracle and MUSIC see the same dominant tone
    for (Index n = 0; n < v.size(); ++n) v(n) += 0.05 * rng.cnormal();
    const double est = music_freq(v);
    const double ref = periodogram_peak(v, 4096);
    CHECK(std::abs(wrap_frequency(est - ref)) < 3.0 / 4096);
  }
}

TEST_CASE("music_freq is invariant to complex scaling") {
  VectorXc v = steering(12, 0.17);
  const double a = music_freq(v);
  const double b = music_freq(VectorXc(cplx(3.0, -4.0) * v));
  CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("music_freq supports the minimal 3-element aperture") {
  VectorXc v = steering(3, 0.2);
  CHECK(std::abs(music_freq(v) - 0.2) < 1e-3);
}

TEST_CASE("music_freq rejects degenerate input") {
  CHECK_THROWS_AS(music_freq(VectorXc::Zero(8)), std::invalid_argument);
  CHECK_THROWS_AS(music_freq(steering(2, 0.1)), std::invalid_argument);
}

TEST_CASE("music_freq error under noise stays small at moderate SNR") {
  Rng rng(18);
  const double w0 = 0.23;
  for (int trial = 0; trial < 5; ++trial) {
    VectorXc v = steering(32, w0);
    for (Index n = 0; n < v.size(); ++n) v(n) += 0.1 * rng.cnormal();  // ~20 dB
    CHECK(std::abs(music_freq(v) - w0) < 0.01);
  }
}

TEST_CASE("dpss_band sizing, orthonormality, and error cases") {
  FreqBand band{0.10, 0.35, 16};  // width 0.25 -> ceil(4)+1 = 5 columns
  MatrixXc g = dpss_band(band);
  CHECK(g.cols() == 5);
  CHECK(g.rows() == 16);
  MatrixXc gram = g.adjoint() * g;
  CHECK((gram - MatrixXc::Identity(5, 5)).norm() < 1e-10);

  CHECK(dpss_band(band, 3).cols() == 3);                     // explicit override
  CHECK(dpss_band(FreqBand{-0.5, 0.5, 8}).cols() == 8);      // full band capped at n
  CHECK_THROWS_AS(dpss_band(FreqBand{0.2, 0.2, 16}), std::invalid_argument);
  CHECK_THROWS_AS(dpss_band(FreqBand{0.3, 0.1, 16}), std::invalid_argument);
  CHECK_THROWS_AS(dpss_band(FreqBand{-0.8, 0.8, 16}), std::invalid_argument);
}

TEST_CASE("slepian concentrations lie in [0,1], are non-increasing, with the 2NW cliff") {
  const Index n = 64;
  const double width = 0.2;  // W = 0.1, 2NW = 12.8
  Eigen::MatrixXd base = dpss_base(n, width / 2, n);
  std::vector<double> lam = dpss_concentrations(base, width / 2);
  for (std::size_t i = 0; i < lam.size(); ++i) {
    CHECK(lam[i] > -1e-10);
    CHECK(lam[i] < 1.0 + 1e-10);
    if (i > 0) CHECK(lam[i] <= lam[i - 1] + 1e-10);
  }
  // First floor(n*width) = 12 eigenvalues are above one half.
  for (std::size_t i = 0; i < 12; ++i) CHECK(lam[i] > 0.5);
  // And the tail is tiny well past the cliff.
  CHECK(lam[20] < 1e-6);
}

TEST_CASE("dpss_band captures in-band steering vectors (low leakage)") {
  const Index n = 64;
  FreqBand band{-0.1, 0.1, n};
  MatrixXc g = dpss_band(band);
  Rng rng(19);
  double worst = 0.0, mean = 0.0;
  const int trials = 40;
  for (int t = 0; t < trials; ++t) {
    const double w = rng.uniform(band.lo, band.hi);
    VectorXc s = steering(n, w);
    const double resid = (s - g * (g.adjoint() * s)).squaredNorm() / s.squaredNorm();
    worst = std::max(worst, resid);
    mean += resid / trials;
  }
  CHECK(mean < 0.05);   // contract-level bound
  CHECK(worst < 0.05);  // comfortably concentrated in practice
}

TEST_CASE("dpss_band modulation shifts the concentrated band") {
  const Index n = 48;
  FreqBand band{0.2, 0.4, n};
  MatrixXc g = dpss_band(band);
  VectorXc in_band = steering(n, 0.3);
  VectorXc out_band = steering(n, -0.2);
  const double cap_in = (g.adjoint() * in_band).squaredNorm() / in_band.squaredNorm();
  const double cap_out = (g.adjoint() * out_band).squaredNorm() / out_band.squaredNorm();
  CHECK(cap_in > 0.99);
  CHECK(cap_out < 0.01);
}

TEST_CASE("shifted_orthobasis is exactly orthonormal and complete when full") {
  const Index n = 8;
  std::vector<int> all(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
  MatrixXc b = shifted_orthobasis(n, 0.137, all);
  CHECK((b.adjoint() * b - MatrixXc::Identity(n, n)).norm() < 1e-12);
  // Parseval: the full shifted basis captures the whole Frobenius energy.
  Rng rng(20);
  MatrixXc m(n, 5);
  for (Index j = 0; j < 5; ++j)
    for (Index i = 0; i < n; ++i) m(i, j) = rng.cnormal();
  double total = 0.0;
  for (Index c = 0; c < n; ++c) total += projection_power(b.col(c), m);
  CHECK(total == doctest::Approx(m.squaredNorm()).epsilon(1e-12));
}

TEST_CASE("shifted_orthobasis rejects duplicate indices mod n") {
  CHECK_THROWS_AS(shifted_orthobasis(8, 0.0, std::vector<int>{1, 9}), std::invalid_argument);
  CHECK_NOTHROW(shifted_orthobasis(8, 0.0, std::vector<int>{-1, 1}));
}

TEST_CASE("projection_power of a matched steering vector equals the full energy") {
  const Index n = 16;
  const double w0 = 0.21;
  MatrixXc basis = shifted_orthobasis(n, w0, std::vector<int>{0});
  MatrixXc unf = steering(n, w0);
  // |<(1/sqrt(n)) gamma, gamma>|^2 = n = ||gamma||^2: all power in one column.
  CHECK(projection_power(basis.col(0), unf) == doctest::Approx(double(n)).epsilon(1e-12));
  CHECK_THROWS_AS(projection_power(basis.col(0), MatrixXc::Ones(n + 1, 2)),
                  std::invalid_argument);
}
