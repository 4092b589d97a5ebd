#include "ckm/harmonics.hpp"

#include <lapacke.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ckm {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double wrap_frequency(double omega) {
  double w = omega - std::floor(omega + 0.5);
  if (w >= 0.5) w -= 1.0;  // guard the floor edge case
  return w;
}

VectorXc steering(Index n, double omega) {
  if (n < 1) throw std::invalid_argument("steering: n must be >= 1");
  VectorXc v(n);
  for (Index k = 0; k < n; ++k) {
    const double ph = -kTwoPi * omega * static_cast<double>(k);
    v(k) = cplx(std::cos(ph), std::sin(ph));
  }
  return v;
}

double music_freq(const VectorXc& v, int grid_res) {
  const Index n = v.size();
  if (n < 3) throw std::invalid_argument("music_freq: need at least 3 elements");
  if (grid_res < 8) throw std::invalid_argument("music_freq: grid too small");
  if (v.norm() == 0.0) throw std::invalid_argument("music_freq: zero vector");

  // Forward-backward spatially smoothed single-snapshot covariance.
  const Index sub = (2 * n + 2) / 3;  // ceil(2n/3)
  const Index snaps = n - sub + 1;
  MatrixXc r = MatrixXc::Zero(sub, sub);
  for (Index m = 0; m < snaps; ++m) {
    VectorXc x = v.segment(m, sub);
    r.noalias() += x * x.adjoint();
    VectorXc y = x.reverse().conjugate();
    r.noalias() += y * y.adjoint();
  }
  r /= static_cast<double>(2 * snaps);

  Eigen::SelfAdjointEigenSolver<MatrixXc> es(r);
  const VectorXc sig = es.eigenvectors().col(sub - 1);  // signal subspace (dim 1)

  // Null-spectrum D(w) = ||P_noise steering||^2 = sub - |sig^H steering(w)|^2;
  // the MUSIC peak is its minimum.
  auto null_spec = [&](double w) {
    cplx acc(0, 0);
    for (Index k = 0; k < sub; ++k) {
      const double ph = -kTwoPi * w * static_cast<double>(k);
      acc += std::conj(sig(k)) * cplx(std::cos(ph), std::sin(ph));
    }
    return static_cast<double>(sub) - std::norm(acc);
  };

  const double step = 1.0 / grid_res;
  int best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  std::vector<double> d(static_cast<std::size_t>(grid_res));
  for (int g = 0; g < grid_res; ++g) {
    const double w = -0.5 + g * step;
    d[static_cast<std::size_t>(g)] = null_spec(w);
    if (d[static_cast<std::size_t>(g)] < best_val) {
      best_val = d[static_cast<std::size_t>(g)];
      best = g;
    }
  }
  // Parabolic refinement on the (cyclic) grid.
  const double dm = d[static_cast<std::size_t>((best - 1 + grid_res) % grid_res)];
  const double dp = d[static_cast<std::size_t>((best + 1) % grid_res)];
  const double denom = dm - 2.0 * best_val + dp;
  double offset = 0.0;
  if (std::abs(denom) > 1e-300) offset = 0.5 * (dm - dp) / denom;
  if (!(offset > -1.0 && offset < 1.0)) offset = 0.0;
  return wrap_frequency(-0.5 + (best + offset) * step);
}

Eigen::MatrixXd dpss_base(Index n, double half_bandwidth, Index m) {
  if (n < 1 || m < 1 || m > n) throw std::invalid_argument("dpss_base: bad sizes");
  if (!(half_bandwidth > 0.0) || half_bandwidth > 0.5)
    throw std::invalid_argument("dpss_base: half_bandwidth must be in (0, 0.5]");

  if (n == 1) return Eigen::MatrixXd::Ones(1, 1);

  // Slepian's commuting symmetric tridiagonal operator; its eigenvectors are
  // the DPSS, ordered by eigenvalue consistently with spectral concentration.
  std::vector<double> diag(static_cast<std::size_t>(n));
  std::vector<double> off(static_cast<std::size_t>(n - 1));
  const double ct = std::cos(kTwoPi * half_bandwidth);
  for (Index i = 0; i < n; ++i) {
    const double h = 0.5 * static_cast<double>(n - 1 - 2 * i);
    diag[static_cast<std::size_t>(i)] = h * h * ct;
  }
  for (Index i = 0; i + 1 < n; ++i)
    off[static_cast<std::size_t>(i)] =
        0.5 * static_cast<double>((i + 1)) * static_cast<double>(n - 1 - i);

  const lapack_int ln = static_cast<lapack_int>(n);
  const lapack_int lm = static_cast<lapack_int>(m);
  std::vector<double> w(static_cast<std::size_t>(n));
  std::vector<double> z(static_cast<std::size_t>(n * m));
  std::vector<lapack_int> isuppz(static_cast<std::size_t>(2 * m));
  lapack_int found = 0;
  const lapack_int info = LAPACKE_dstevr(
      LAPACK_COL_MAJOR, 'V', 'I', ln, diag.data(), off.data(), 0.0, 0.0,
      ln - lm + 1, ln, 0.0, &found, w.data(), z.data(), ln, isuppz.data());
  if (info != 0 || found != lm) throw std::runtime_error("dpss_base: tridiagonal eigensolve failed");

  Eigen::MatrixXd out(n, m);
  for (Index c = 0; c < m; ++c) {
    // stevr returns ascending eigenvalues; reverse for most-concentrated-first.
    Eigen::Map<const Eigen::VectorXd> col(z.data() + (m - 1 - c) * n, n);
    out.col(c) = col;
    // Deterministic sign: first significantly nonzero entry positive.
    const double peak = out.col(c).cwiseAbs().maxCoeff();
    for (Index i = 0; i < n; ++i) {
      if (std::abs(out(i, c)) > 1e-8 * peak) {
        if (out(i, c) < 0) out.col(c) = -out.col(c);
        break;
      }
    }
  }
  return out;
}

std::vector<double> dpss_concentrations(const Eigen::MatrixXd& base, double half_bandwidth) {
  const Index n = base.rows();
  Eigen::MatrixXd s(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      s(i, j) = (i == j) ? 2.0 * half_bandwidth
                         : std::sin(kTwoPi * half_bandwidth * static_cast<double>(i - j)) /
                               (std::numbers::pi * static_cast<double>(i - j));
  std::vector<double> lam;
  lam.reserve(static_cast<std::size_t>(base.cols()));
  for (Index c = 0; c < base.cols(); ++c) {
    const double denom = base.col(c).squaredNorm();
    lam.push_back(base.col(c).dot(s * base.col(c)) / denom);
  }
  return lam;
}

MatrixXc dpss_band(const FreqBand& band, Index ncols_override) {
  const Index n = band.length;
  if (n < 1) throw std::invalid_argument("dpss_band: aperture length must be >= 1");
  const double width = band.hi - band.lo;
  if (!(width > 0.0)) throw std::invalid_argument("dpss_band: degenerate band");
  if (width > 1.0 + 1e-12) throw std::invalid_argument("dpss_band: band wider than one cycle");

  Index m = ncols_override > 0
                ? ncols_override
                : static_cast<Index>(std::ceil(static_cast<double>(n) * width - 1e-9)) + 1;
  if (m > n) m = n;
  if (m < 1) m = 1;

  const double w_half = std::min(0.5, std::max(0.5 * width, 1e-12));
  Eigen::MatrixXd base = dpss_base(n, w_half, m);

  const double center = 0.5 * (band.lo + band.hi);
  MatrixXc out(n, m);
  for (Index i = 0; i < n; ++i) {
    const double ph = -kTwoPi * center * static_cast<double>(i);
    const cplx rot(std::cos(ph), std::sin(ph));
    for (Index c = 0; c < m; ++c) out(i, c) = rot * base(i, c);
  }
  return out;
}

MatrixXc shifted_orthobasis(Index n, double omega0, const std::vector<int>& indices) {
  if (n < 1) throw std::invalid_argument("shifted_orthobasis: n must be >= 1");
  if (indices.empty()) throw std::invalid_argument("shifted_orthobasis: empty index set");
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (int i : indices) {
    const int r = ((i % static_cast<int>(n)) + static_cast<int>(n)) % static_cast<int>(n);
    if (seen[static_cast<std::size_t>(r)])
      throw std::invalid_argument("shifted_orthobasis: duplicate index mod n");
    seen[static_cast<std::size_t>(r)] = true;
  }
  MatrixXc out(n, static_cast<Index>(indices.size()));
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t c = 0; c < indices.size(); ++c) {
    const double w = omega0 + static_cast<double>(indices[c]) / static_cast<double>(n);
    out.col(static_cast<Index>(c)) = scale * steering(n, w);
  }
  return out;
}

double projection_power(const VectorXc& col, const MatrixXc& unfolded) {
  if (col.size() != unfolded.rows())
    throw std::invalid_argument("projection_power: dimension mismatch");
  return (col.adjoint() * unfolded).squaredNorm();
}

}  // namespace ckm
