#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ckm/cp.hpp"
#include "ckm/harmonics.hpp"
#include "ckm/rng.hpp"

using namespace ckm;

namespace {

VectorXc random_unit(Index n, std::uint64_t seed) {
  Rng rng(seed);
  VectorXc v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.cnormal();
  return v / v.norm();
}

double alignment(const VectorXc& a, const VectorXc& b) {
  return std::abs(a.dot(b)) / (a.norm() * b.norm());
}

}  // namespace

TEST_CASE("best_rank1 recovers an exact rank-1 tensor, weight = product of norms") {
  Rng rng(7);
  VectorXc u(6), v(5), w(9);
  for (Index i = 0; i < 6; ++i) u(i) = rng.cnormal();
  for (Index i = 0; i < 5; ++i) v(i) = rng.cnormal();
  for (Index i = 0; i < 9; ++i) w(i) = rng.cnormal();
  Tensor3C t = scale(outer3(u, v, w), cplx(2, 0));

  CpFactors f = best_rank1(t);
  CHECK(std::abs(f.weights(0)) ==
        doctest::Approx(2.0 * u.norm() * v.norm() * w.norm()).epsilon(1e-8));
  CHECK(alignment(f.A.col(0), u) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(alignment(f.B.col(0), v) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(alignment(f.C.col(0), w) == doctest::Approx(1.0).epsilon(1e-8));
  // Residual identity for a unit-norm rank-1 fit: ||T - g abc||^2 = ||T||^2 - |g|^2.
  Tensor3C rec = cp_reconstruct(f, t.dims);
  const double res_sq = frobenius_sq(subtract(t, rec));
  CHECK(res_sq == doctest::Approx(frobenius_sq(t) - std::norm(f.weights(0))).epsilon(1e-6));
  CHECK(res_sq < 1e-12 * frobenius_sq(t));
}

TEST_CASE("best_rank1 dominant component survives interference and noise") {
  // Strong steering-structured component plus a weak one plus noise.
  Tensor3C strong = outer3(steering(8, 0.11), steering(4, -0.2), steering(16, 0.31));
  Tensor3C weak = outer3(steering(8, -0.35), steering(4, 0.4), steering(16, -0.05));
  Tensor3C t = add(scale(strong, cplx(1, 0)), scale(weak, cplx(0.15, 0)));
  Rng rng(77);
  for (auto& x : t.data) x += 0.02 * rng.cnormal();

  CpFactors f = best_rank1(t);
  CHECK(alignment(f.A.col(0), steering(8, 0.11)) > 0.99);
  CHECK(alignment(f.B.col(0), steering(4, -0.2)) > 0.99);
  CHECK(alignment(f.C.col(0), steering(16, 0.31)) > 0.99);
  CHECK(frobenius(subtract(t, cp_reconstruct(f, t.dims))) <= frobenius(t) * (1 + 1e-12));
}

TEST_CASE("best_rank1 factor columns are unit norm and zero input throws") {
  Tensor3C z(3, 3, 3);
  CHECK_THROWS_AS(best_rank1(z), std::invalid_argument);
  Rng rng(8);
  Tensor3C t(4, 5, 6);
  for (auto& v : t.data) v = rng.cnormal();
  CpFactors f = best_rank1(t);
  CHECK(f.A.col(0).norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.B.col(0).norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.C.col(0).norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cp_decompose fits an exact rank-3 tensor to numerical precision") {
  // Well-separated steering factors keep the problem well conditioned.
  const double freqs_a[3] = {-0.3, 0.05, 0.4};
  const double freqs_b[3] = {0.25, -0.1, -0.45};
  const double freqs_c[3] = {0.12, 0.33, -0.27};
  Tensor3C t(10, 7, 12);
  for (int r = 0; r < 3; ++r) {
    Tensor3C comp =
        outer3(steering(10, freqs_a[r]), steering(7, freqs_b[r]), steering(12, freqs_c[r]));
    t = add(t, scale(comp, cplx(1.0 + r, 0.3 * r)));
  }
  // Unit energy keeps the energy-scaled ridge at its nominal 1e-10 level.
  t = scale(t, cplx(1.0 / frobenius(t), 0));
  CpFactors f = cp_decompose(t, 3);
  Tensor3C rec = cp_reconstruct(f, t.dims);
  CHECK(frobenius(subtract(t, rec)) < 1e-6 * frobenius(t));
  for (Index r = 0; r < 3; ++r) {
    CHECK(f.A.col(r).norm() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(f.weights(r).real() >= 0.0);      // canonical nonnegative weights
    CHECK(std::abs(f.weights(r).imag()) < 1e-10 * std::abs(f.weights(r)));
  }
}

TEST_CASE("cp_decompose ALS residual is monotonically non-increasing per sweep") {
  Rng rng(9);
  Tensor3C t(8, 5, 11);
  for (auto& v : t.data) v = rng.cnormal();
  CpOptions opts;
  opts.record_residuals = true;
  std::vector<double> trace;
  cp_decompose(t, 4, opts, &trace);
  REQUIRE(trace.size() >= 2);
  for (std::size_t i = 1; i < trace.size(); ++i)
    CHECK(trace[i] <= trace[i - 1] * (1.0 + 1e-9) + 1e-12);
}

TEST_CASE("cp_decompose fit improves (weakly) with rank") {
  Rng rng(10);
  Tensor3C t(6, 6, 6);
  for (auto& v : t.data) v = rng.cnormal();
  double prev = frobenius(t);
  for (Index r = 1; r <= 4; ++r) {
    CpFactors f = cp_decompose(t, r);
    const double res = frobenius(subtract(t, cp_reconstruct(f, t.dims)));
    CHECK(res <= prev * (1.0 + 1e-6));
    prev = res;
  }
}

TEST_CASE("cp_decompose rejects invalid rank and zero tensors") {
  Tensor3C z(3, 3, 3);
  CHECK_THROWS_AS(cp_decompose(z, 2), std::invalid_argument);
  Rng rng(11);
  Tensor3C t(2, 3, 4);
  for (auto& v : t.data) v = rng.cnormal();
  CHECK_THROWS_AS(cp_decompose(t, 0), std::invalid_argument);
  // min over modes of the product of the other two dims = min(12, 8, 6) = 6.
  CHECK_THROWS_AS(cp_decompose(t, 7), std::invalid_argument);
  CHECK_NOTHROW(cp_decompose(t, 6));
}

TEST_CASE("cp_decompose handles rank above the mode-2 dimension via ridge") {
  // n2 = 2 but rank 4: the mode-2 Gram is singular; the regularized solve
  // must still converge and fit well.
  Rng rng(12);
  Tensor3C t(8, 2, 16);
  for (int r = 0; r < 4; ++r) {
    Tensor3C comp = outer3(random_unit(8, 100 + r), random_unit(2, 200 + r),
                           random_unit(16, 300 + r));
    t = add(t, comp);
  }
  CpFactors f = cp_decompose(t, 4);
  // Highly coherent mode-2 factors: only asking for a usable (not exact) fit.
  CHECK(frobenius(subtract(t, cp_reconstruct(f, t.dims))) < 2e-2 * frobenius(t));
}

TEST_CASE("cp_decompose is deterministic for a fixed seed") {
  Rng rng(13);
  Tensor3C t(5, 4, 7);
  for (auto& v : t.data) v = rng.cnormal();
  CpFactors f1 = cp_decompose(t, 3);
  CpFactors f2 = cp_decompose(t, 3);
  CHECK((f1.A - f2.A).norm() == 0.0);
  CHECK((f1.C - f2.C).norm() == 0.0);
  CHECK((f1.weights - f2.weights).norm() == 0.0);
}
