#include "ckm/estimators.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <complex>
#include <iostream>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "ckm/fft.hpp"
#include "ckm/harmonics.hpp"

namespace ckm {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Pseudo-inverse of X^T. For the row-orthogonal pilots this equals
// (n_tx/p) X^*, but solve generally so odd pilot matrices still work.
MatrixXc pinv_xt(const MatrixXc& x) {
  const MatrixXc xt = x.transpose();
  return xt.completeOrthogonalDecomposition().pseudoInverse();
}

// One Slepian band with the degenerate / over-wide cases handled: zero-width
// axes get a single column, bands wider than a cycle are clamped (warned once
// per process; refinement sweeps would otherwise flood stderr).
MatrixXc band_basis(double lo, double hi, Index n, Index ncols_override = 0) {
  if (hi < lo) std::swap(lo, hi);
  if (hi - lo > 1.0) {
    static std::atomic<bool> warned{false};
    if (!warned.exchange(true))
      std::cerr << "range_to_subspaces: band width " << (hi - lo) << " > 1 cycle, clamping\n";
    const double mid = 0.5 * (lo + hi);
    lo = mid - 0.5;
    hi = mid + 0.5;
  }
  if (hi - lo < 1e-13) {
    const double mid = 0.5 * (lo + hi);
    lo = mid - 5e-14;
    hi = mid + 5e-14;
  }
  return dpss_band({lo, hi, n}, ncols_override);
}

double core_power(const Tensor3C& z, const SubspaceTriple& sub) {
  Tensor3C c = mode_n_product(z, sub.g_aoa.adjoint(), 1);
  c = mode_n_product(c, sub.g_aod.adjoint(), 2);
  c = mode_n_product(c, sub.g_delay.adjoint(), 3);
  return frobenius_sq(c);
}

// Delay-domain FFT interpolation shared by LS and OMP: pilot-grid taps,
// window centered on the circular mean of tap power, re-expanded on the
// n_p * p_f grid and truncated to n_sc subcarriers.
Tensor3C interp_delay_fft(const Tensor3C& hbar, int p_f, Index n_sc) {
  const Index n_p = hbar.dims[2];
  const Index m = n_p * static_cast<Index>(p_f);
  if (m < n_sc) throw std::invalid_argument("interp_delay_fft: pilot grid too short for n_sc");
  MatrixXc u = unfold(hbar, 3);  // n_p x (n_rx*n_tx), columns are delay fibers
  MatrixXc taps = idft_cols(u) / static_cast<double>(n_p);

  // Circular centroid of aggregate tap power picks the alias branch.
  double cx = 0.0, sy = 0.0;
  for (Index q = 0; q < n_p; ++q) {
    const double pw = taps.row(q).squaredNorm();
    cx += pw * std::cos(2.0 * kPi * static_cast<double>(q) / static_cast<double>(n_p));
    sy += pw * std::sin(2.0 * kPi * static_cast<double>(q) / static_cast<double>(n_p));
  }
  Index center = 0;
  if (cx != 0.0 || sy != 0.0) {
    const double frac = std::atan2(sy, cx) / (2.0 * kPi);  // in [-0.5, 0.5]
    center = static_cast<Index>(std::lround(frac * static_cast<double>(n_p)));
  }

  MatrixXc full = MatrixXc::Zero(m, u.cols());
  const Index half = n_p / 2;
  for (Index q = 0; q < n_p; ++q) {
    const Index delta = ((q - center + half) % n_p + n_p) % n_p - half;
    const Index slot = ((center + delta) % m + m) % m;
    full.row(slot) = taps.row(q);
  }
  MatrixXc freq = dft_cols(full).topRows(n_sc);
  return fold(freq, 3, {hbar.dims[0], hbar.dims[1], n_sc});
}

void check_obs_shapes(const Tensor3C& y, const MatrixXc& x) {
  if (y.dims[1] != x.cols())
    throw std::invalid_argument("estimator: observation mode 2 must match pilot symbol count");
}

}  // namespace

SubspaceTriple range_to_subspaces(const ParamRange& r, const SceneContext& ctx, Index n_pilot_sc,
                                  int p_f, double delay_ref) {
  if (r.aoa_min > r.aoa_max || r.aod_min > r.aod_max || r.delay_min > r.delay_max)
    throw std::invalid_argument("range_to_subspaces: inverted range");
  if (p_f < 1) throw std::invalid_argument("range_to_subspaces: p_f must be >= 1");
  const double s_rx = ctx.rx.spacing / ctx.rx.wavelength;
  const double s_tx = ctx.tx.spacing / ctx.tx.wavelength;
  SubspaceTriple sub;
  sub.g_aoa = band_basis(s_rx * std::sin(r.aoa_min), s_rx * std::sin(r.aoa_max), ctx.rx.n_elems);
  sub.g_aod = band_basis(s_tx * std::sin(r.aod_min), s_tx * std::sin(r.aod_max), ctx.tx.n_elems);
  const double scale = static_cast<double>(p_f) * ctx.ofdm.delta_f;
  sub.g_delay = band_basis(scale * (r.delay_min - delay_ref), scale * (r.delay_max - delay_ref),
                           n_pilot_sc);
  return sub;
}

Tensor3C estimate_core(const Tensor3C& y, const SubspaceTriple& sub, const MatrixXc& x) {
  check_obs_shapes(y, x);
  if (y.dims[0] != sub.g_aoa.rows() || x.rows() != sub.g_aod.rows() ||
      y.dims[2] != sub.g_delay.rows())
    throw std::invalid_argument("estimate_core: subspace/observation shape mismatch");
  Tensor3C z = mode_n_product(y, pinv_xt(x), 2);
  z = mode_n_product(z, sub.g_aoa.adjoint(), 1);
  z = mode_n_product(z, sub.g_aod.adjoint(), 2);
  return mode_n_product(z, sub.g_delay.adjoint(), 3);
}

ParamRange refine_range(const Tensor3C& y, const ParamRange& r0, const MatrixXc& x,
                        const SceneContext& ctx, int p_f, double delay_ref,
                        const EstimationConfig& cfg) {
  check_obs_shapes(y, x);
  if (cfg.refine_steps < 0 || cfg.refine_step_size <= 0.0)
    throw std::invalid_argument("refine_range: bad search parameters");
  const Index n_p = y.dims[2];
  const Tensor3C z = mode_n_product(y, pinv_xt(x), 2);

  // Candidate subspaces keep the column counts of the initial range. Captured
  // power is monotone in subspace dimension, so letting the dimension float
  // would just widen every boundary; at fixed dimension the power rewards
  // band placement, which is what the search is for.
  const SubspaceTriple sub0 = range_to_subspaces(r0, ctx, n_p, p_f, delay_ref);
  const std::array<Index, 3> ncols = {sub0.g_aoa.cols(), sub0.g_aod.cols(), sub0.g_delay.cols()};
  const double s_rx = ctx.rx.spacing / ctx.rx.wavelength;
  const double s_tx = ctx.tx.spacing / ctx.tx.wavelength;
  const double s_del = static_cast<double>(p_f) * ctx.ofdm.delta_f;
  auto power_fixed = [&](const ParamRange& r) {
    SubspaceTriple sub;
    sub.g_aoa =
        band_basis(s_rx * std::sin(r.aoa_min), s_rx * std::sin(r.aoa_max), ctx.rx.n_elems,
                   ncols[0]);
    sub.g_aod =
        band_basis(s_tx * std::sin(r.aod_min), s_tx * std::sin(r.aod_max), ctx.tx.n_elems,
                   ncols[1]);
    sub.g_delay = band_basis(s_del * (r.delay_min - delay_ref), s_del * (r.delay_max - delay_ref),
                             n_p, ncols[2]);
    return core_power(z, sub);
  };

  const double width[3] = {r0.aoa_max - r0.aoa_min, r0.aod_max - r0.aod_min,
                           r0.delay_max - r0.delay_min};
  ParamRange cur = r0;
  // Boundary order: aoa lo/hi, aod lo/hi, delay lo/hi. One greedy pass.
  double* bounds[6] = {&cur.aoa_min, &cur.aoa_max, &cur.aod_min,
                       &cur.aod_max, &cur.delay_min, &cur.delay_max};
  for (int b = 0; b < 6; ++b) {
    const int axis = b / 2;
    if (width[axis] <= 0.0) continue;
    const double step = cfg.refine_step_size * width[axis];
    const double base = *bounds[b];
    double best_val = base;
    double best_pow = power_fixed(cur);
    for (int k = -cfg.refine_steps; k <= cfg.refine_steps; ++k) {
      if (k == 0) continue;
      *bounds[b] = base + static_cast<double>(k) * step;
      const bool lo_side = (b % 2) == 0;
      const double lo = lo_side ? *bounds[b] : *bounds[b - 1];
      const double hi = lo_side ? *bounds[b + 1] : *bounds[b];
      if (lo > hi) continue;
      if (axis == 2 && cur.delay_min <= 0.0) continue;  // keep delays physical
      const double p = power_fixed(cur);
      if (p > best_pow) {
        best_pow = p;
        best_val = *bounds[b];
      }
    }
    *bounds[b] = best_val;
  }
  // The contract compares core power at the natural subspaces of input and
  // output; guard the corner where the widths changed enough to alter the
  // natural column counts.
  if (core_power(z, range_to_subspaces(cur, ctx, n_p, p_f, delay_ref)) <
      core_power(z, sub0))
    return r0;
  return cur;
}

Tensor3C reconstruct_cluster(const Tensor3C& core, const SubspaceTriple& sub) {
  if (core.dims[0] != sub.g_aoa.cols() || core.dims[1] != sub.g_aod.cols() ||
      core.dims[2] != sub.g_delay.cols())
    throw std::invalid_argument("reconstruct_cluster: core/subspace shape mismatch");
  Tensor3C h = mode_n_product(core, sub.g_aoa, 1);
  h = mode_n_product(h, sub.g_aod, 2);
  return mode_n_product(h, sub.g_delay, 3);
}

Tensor3C cancel_cluster(const Tensor3C& y, const Tensor3C& h_k, const MatrixXc& x) {
  check_obs_shapes(y, x);
  if (h_k.dims[0] != y.dims[0] || h_k.dims[1] != x.rows() || h_k.dims[2] != y.dims[2])
    throw std::invalid_argument("cancel_cluster: shape mismatch");
  return subtract(y, mode_n_product(h_k, x.transpose(), 2));
}

Tensor3C interpolate_cluster(const Tensor3C& h_k, const MatrixXc& g_delay_pilot,
                             const ParamRange& r, const OfdmConfig& ofdm, int p_f,
                             double delay_ref, double rcond) {
  const Index n_p = h_k.dims[2];
  if (n_p != g_delay_pilot.rows())
    throw std::invalid_argument("interpolate_cluster: pilot basis length mismatch");
  if ((n_p - 1) * static_cast<Index>(p_f) >= ofdm.n_sc)
    throw std::invalid_argument("interpolate_cluster: pilot comb exceeds the full grid");
  if (rcond < 0.0 || rcond >= 1.0)
    throw std::invalid_argument("interpolate_cluster: rcond must be in [0, 1)");
  const MatrixXc g_full = band_basis(ofdm.delta_f * (r.delay_min - delay_ref),
                                     ofdm.delta_f * (r.delay_max - delay_ref), ofdm.n_sc,
                                     g_delay_pilot.cols());
  // Fit the full-grid band coefficients to the pilot-comb samples: the
  // extension is exact for any fiber that is the comb restriction of an
  // in-band signal. Index-pairing the pilot-grid basis against the full-grid
  // one instead assumes each pilot column is the decimated full column, which
  // fails for the last (edge) columns and costs several dB. Band directions
  // the comb barely sees (sigma below rcond * sigma_max) are dropped rather
  // than extended: once the comb spacing aliases the band, their 1/sigma gain
  // turns pilot noise into a divergent full-grid estimate.
  MatrixXc comb(n_p, g_full.cols());
  for (Index k = 0; k < n_p; ++k) comb.row(k) = g_full.row(k * static_cast<Index>(p_f));
  Eigen::CompleteOrthogonalDecomposition<MatrixXc> cod(comb.rows(), comb.cols());
  cod.setThreshold(rcond);
  cod.compute(comb);
  const MatrixXc extend = g_full * cod.pseudoInverse();
  return mode_n_product(h_k, extend, 3);
}

Tensor3C estimate_clusterckm(const Tensor3C& y, const std::vector<ParamRange>& ranges,
                             const MatrixXc& x, const SceneContext& ctx, int p_f,
                             double delay_ref, const EstimationConfig& cfg) {
  if (ranges.empty()) throw std::invalid_argument("estimate_clusterckm: no parameter ranges");
  check_obs_shapes(y, x);
  const Index n_p = y.dims[2];

  // Strongest clusters first: order by core power at the unrefined ranges.
  std::vector<double> pow0(ranges.size());
  {
    const Tensor3C z = mode_n_product(y, pinv_xt(x), 2);
    for (std::size_t i = 0; i < ranges.size(); ++i)
      pow0[i] = core_power(z, range_to_subspaces(ranges[i], ctx, n_p, p_f, delay_ref));
  }
  std::vector<std::size_t> order(ranges.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return pow0[a] > pow0[b]; });

  Tensor3C out(y.dims[0], x.rows(), ctx.ofdm.n_sc);
  Tensor3C y_cur = y;
  for (std::size_t i : order) {
    const ParamRange r = refine_range(y_cur, ranges[i], x, ctx, p_f, delay_ref, cfg);
    const SubspaceTriple sub = range_to_subspaces(r, ctx, n_p, p_f, delay_ref);
    const Tensor3C core = estimate_core(y_cur, sub, x);
    const Tensor3C h_k = reconstruct_cluster(core, sub);
    y_cur = cancel_cluster(y_cur, h_k, x);
    out = add(out, interpolate_cluster(h_k, sub.g_delay, r, ctx.ofdm, p_f, delay_ref,
                                       cfg.interp_rcond));
  }
  return out;
}

Tensor3C estimate_ls(const Tensor3C& y, const MatrixXc& x, int p_f, Index n_sc) {
  check_obs_shapes(y, x);
  const Tensor3C hbar = mode_n_product(y, pinv_xt(x), 2);
  return interp_delay_fft(hbar, p_f, n_sc);
}

Tensor3C estimate_omp(const Tensor3C& y, const MatrixXc& x, int p_f, Index n_sc,
                      const SceneContext& ctx, const EstimationConfig& cfg) {
  check_obs_shapes(y, x);
  (void)ctx;
  if (cfg.omp_max_atoms < 1 || cfg.omp_resid_tol < 0.0)
    throw std::invalid_argument("estimate_omp: bad pursuit parameters");
  const Tensor3C z = mode_n_product(y, pinv_xt(x), 2);
  const std::array<Index, 3> dims = z.dims;
  std::array<Index, 3> grid;
  for (int m = 0; m < 3; ++m) {
    grid[m] = cfg.omp_grid[m] > 0 ? cfg.omp_grid[m] : 2 * dims[m];
    if (grid[m] < dims[m]) throw std::invalid_argument("estimate_omp: grid smaller than mode dim");
  }

  // Unit-norm steering dictionaries for the two spatial modes; delay-mode
  // atoms are produced on demand (the dense matrix would be n_p x 2 n_p and
  // its correlations are a zero-padded DFT anyway).
  std::array<MatrixXc, 2> dict;
  for (int m = 0; m < 2; ++m) {
    dict[m].resize(dims[m], grid[m]);
    for (Index g = 0; g < grid[m]; ++g)
      dict[m].col(g) =
          steering(dims[m], static_cast<double>(g) / static_cast<double>(grid[m])) /
          std::sqrt(static_cast<double>(dims[m]));
  }
  auto delay_atom = [&](Index g) -> VectorXc {
    return steering(dims[2], static_cast<double>(g) / static_cast<double>(grid[2])) /
           std::sqrt(static_cast<double>(dims[2]));
  };
  // Correlations with every delay atom at once: conj-steering rows form a
  // zero-padded inverse-direction DFT.
  auto delay_correlate = [&](const Tensor3C& t) -> Tensor3C {
    MatrixXc u = MatrixXc::Zero(grid[2], t.dims[0] * t.dims[1]);
    u.topRows(dims[2]) = unfold(t, 3);
    const MatrixXc c = idft_cols(u) / std::sqrt(static_cast<double>(dims[2]));
    return fold(c, 3, {t.dims[0], t.dims[1], grid[2]});
  };
  // Closed-form atom inner product per mode (normalized Dirichlet kernel).
  auto mode_gram = [&](int m, Index a, Index b) -> cplx {
    if (a == b) return cplx(1.0, 0.0);
    const Index n = dims[m];
    const double d = (static_cast<double>(b) - static_cast<double>(a)) /
                     static_cast<double>(grid[m]);
    // <s(wa), s(wb)>/n = e^{-j pi (n-1) d} sin(pi n d) / (n sin(pi d))
    const double s = std::sin(kPi * d);
    if (std::abs(s) < 1e-300) return cplx(1.0, 0.0);
    const double mag = std::sin(kPi * static_cast<double>(n) * d) / (static_cast<double>(n) * s);
    return std::polar(mag, -kPi * static_cast<double>(n - 1) * d);
  };

  const double stop = cfg.omp_resid_tol * frobenius(y);
  Tensor3C resid = z;
  std::vector<std::array<Index, 3>> atoms;
  std::vector<cplx> rhs;  // <atom, z> per selected atom
  VectorXc weights;

  for (int it = 0; it < cfg.omp_max_atoms; ++it) {
    if (frobenius(resid) < stop) break;
    // Correlations with every atom, computed separably.
    Tensor3C corr = mode_n_product(resid, dict[0].adjoint(), 1);
    corr = mode_n_product(corr, dict[1].adjoint(), 2);
    corr = delay_correlate(corr);
    for (const auto& a : atoms)  // keep selections pairwise distinct
      corr(a[0], a[1], a[2]) = cplx(0, 0);
    Index flat = 0;
    const double peak = corr.vec().cwiseAbs().maxCoeff(&flat);
    if (peak <= 0.0) break;
    const std::array<Index, 3> sel = {flat % grid[0], (flat / grid[0]) % grid[1],
                                      flat / (grid[0] * grid[1])};
    atoms.push_back(sel);
    {  // <atom, z> for the joint re-fit
      Tensor3C t = mode_n_product(z, dict[0].col(sel[0]).adjoint(), 1);
      t = mode_n_product(t, dict[1].col(sel[1]).adjoint(), 2);
      t = mode_n_product(t, delay_atom(sel[2]).adjoint(), 3);
      rhs.push_back(t(0, 0, 0));
    }

    const Index s = static_cast<Index>(atoms.size());
    MatrixXc gram(s, s);
    for (Index a = 0; a < s; ++a)
      for (Index b = 0; b < s; ++b)
        gram(a, b) = mode_gram(0, atoms[a][0], atoms[b][0]) *
                     mode_gram(1, atoms[a][1], atoms[b][1]) *
                     mode_gram(2, atoms[a][2], atoms[b][2]);
    Eigen::Map<const VectorXc> rv(rhs.data(), s);
    weights = (gram + 1e-12 * MatrixXc::Identity(s, s)).ldlt().solve(rv);

    resid = z;
    for (Index a = 0; a < s; ++a)
      resid = subtract(resid, scale(outer3(dict[0].col(atoms[a][0]), dict[1].col(atoms[a][1]),
                                           delay_atom(atoms[a][2])),
                                    weights(a)));
  }

  const Tensor3C hbar = subtract(z, resid);
  return interp_delay_fft(hbar, p_f, n_sc);
}

double rmse_db(const Tensor3C& h_hat, const Tensor3C& h_true) {
  if (h_hat.dims != h_true.dims) throw std::invalid_argument("rmse_db: dimension mismatch");
  const double denom = frobenius_sq(h_true);
  if (denom <= 0.0) throw std::invalid_argument("rmse_db: zero reference channel");
  const double ratio = frobenius_sq(subtract(h_hat, h_true)) / denom;
  if (ratio < 1e-30) return -300.0;
  return std::max(-300.0, 10.0 * std::log10(ratio));
}

}  // namespace ckm
