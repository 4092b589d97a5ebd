#include "ckm/scene.hpp"

#include <Eigen/QR>
#include <cmath>
#include <stdexcept>

#include "ckm/cp.hpp"
#include "ckm/harmonics.hpp"
#include "ckm/rng.hpp"

namespace ckm {

Environment sample_environment(const std::vector<Vec2>& centers, Index n_scatterers,
                               double stddev, std::uint64_t seed) {
  if (n_scatterers < 1) throw std::invalid_argument("sample_environment: need >= 1 scatterer");
  if (stddev <= 0.0) throw std::invalid_argument("sample_environment: stddev must be > 0");
  Environment env;
  env.clusters.reserve(centers.size());
  Rng rng(seed);
  for (const Vec2& c : centers) {
    ScattererCluster cl;
    cl.positions.reserve(n_scatterers);
    cl.gains.reserve(n_scatterers);
    for (Index i = 0; i < n_scatterers; ++i) {
      cl.positions.push_back({c.x + stddev * rng.normal(), c.y + stddev * rng.normal()});
      cl.gains.push_back(rng.cnormal());
    }
    env.clusters.push_back(std::move(cl));
  }
  return env;
}

PathParams path_params(Vec2 p_tx, Vec2 p_rx, Vec2 p_scat, const ArrayConfig& tx,
                       const ArrayConfig& rx) {
  const double d_tx = distance(p_scat, p_tx);
  const double d_rx = distance(p_scat, p_rx);
  if (d_tx <= 0.0 || d_rx <= 0.0)
    throw std::invalid_argument("path_params: scatterer coincides with an endpoint");
  const Vec2 u_rx = normalized(p_scat - p_rx);
  const Vec2 u_tx = normalized(p_scat - p_tx);
  PathParams pp;
  pp.aoa = std::atan2(dot(u_rx, rx.axis), dot(u_rx, broadside(rx)));
  pp.aod = std::atan2(dot(u_tx, tx.axis), dot(u_tx, broadside(tx)));
  pp.delay = (d_tx + d_rx) / kSpeedOfLight;
  pp.gain = cplx(1.0 / (d_tx + d_rx), 0.0);
  return pp;
}

std::array<double, 3> path_frequencies(const PathParams& pp, const ArrayConfig& tx,
                                       const ArrayConfig& rx, const OfdmConfig& ofdm,
                                       double delay_ref) {
  return {rx.spacing / rx.wavelength * std::sin(pp.aoa),
          tx.spacing / tx.wavelength * std::sin(pp.aod),
          ofdm.delta_f * (pp.delay - delay_ref)};
}

Tensor3C assemble_channel(const Environment& env, Vec2 p_tx, Vec2 p_rx,
                          const ArrayConfig& tx, const ArrayConfig& rx,
                          const OfdmConfig& ofdm, double delay_ref) {
  Index n_paths = 0;
  for (const ScattererCluster& cl : env.clusters) {
    if (cl.positions.size() != cl.gains.size())
      throw std::invalid_argument("assemble_channel: positions/gains length mismatch");
    n_paths += static_cast<Index>(cl.positions.size());
  }
  Tensor3C h({rx.n_elems, tx.n_elems, ofdm.n_sc});
  if (n_paths == 0) return h;

  MatrixXc a(rx.n_elems, n_paths);   // AoA steering, gain-weighted
  MatrixXc b(tx.n_elems, n_paths);   // AoD steering
  MatrixXc c(ofdm.n_sc, n_paths);    // delay steering
  Index col = 0;
  for (const ScattererCluster& cl : env.clusters) {
    for (std::size_t i = 0; i < cl.positions.size(); ++i, ++col) {
      const PathParams pp = path_params(p_tx, p_rx, cl.positions[i], tx, rx);
      const auto f = path_frequencies(pp, tx, rx, ofdm, delay_ref);
      a.col(col) = (cl.gains[i] * pp.gain) * steering(rx.n_elems, f[0]);
      b.col(col) = steering(tx.n_elems, f[1]);
      c.col(col) = steering(ofdm.n_sc, f[2]);
    }
  }
  Eigen::Map<MatrixXc>(h.data.data(), rx.n_elems * tx.n_elems, ofdm.n_sc) =
      khatri_rao(b, a) * c.transpose();
  return h;
}

MatrixXc pilot_matrix(Index n_tx, Index p, std::uint64_t seed) {
  if (p < n_tx) throw std::invalid_argument("pilot_matrix: p must be >= n_tx");
  Rng rng(seed);
  MatrixXc g(p, n_tx);
  for (Index j = 0; j < n_tx; ++j)
    for (Index i = 0; i < p; ++i) g(i, j) = rng.cnormal();
  Eigen::HouseholderQR<MatrixXc> qr(g);
  MatrixXc q = qr.householderQ() * MatrixXc::Identity(p, n_tx);
  return std::sqrt(double(p) / double(n_tx)) * q.adjoint();
}

std::vector<Index> pilot_subcarriers(Index n_sc, Index p_f) {
  if (p_f < 1) throw std::invalid_argument("pilot_subcarriers: p_f must be >= 1");
  std::vector<Index> out;
  for (Index i = 0; i < n_sc; i += p_f) out.push_back(i);
  return out;
}

TransmitOut transmit(const Tensor3C& h, const PilotConfig& pilots, double noise_var,
                     std::uint64_t seed) {
  if (pilots.X.rows() != h.dims[1] || pilots.X.cols() != pilots.p)
    throw std::invalid_argument("transmit: pilot matrix shape mismatch");
  if (noise_var < 0.0) throw std::invalid_argument("transmit: negative noise variance");
  const std::vector<Index> sc = pilot_subcarriers(h.dims[2], pilots.p_f);
  const Index n_p = static_cast<Index>(sc.size());

  TransmitOut out;
  out.hbar = Tensor3C({h.dims[0], h.dims[1], n_p});
  const Index slab = h.dims[0] * h.dims[1];
  for (Index k = 0; k < n_p; ++k)
    std::copy_n(h.data.data() + slab * sc[k], slab, out.hbar.data.data() + slab * k);

  MatrixXc xt = pilots.X.transpose();
  out.y = mode_n_product(out.hbar, xt, 2);
  if (noise_var > 0.0) {
    Rng rng(seed);
    const double s = std::sqrt(noise_var);
    for (cplx& v : out.y.data) v += s * rng.cnormal();
  }
  return out;
}

Tensor3C perturb_channel(const Tensor3C& h, double error_db, std::uint64_t seed) {
  const double target = frobenius_sq(h) * std::pow(10.0, -error_db / 10.0);
  const double s = std::sqrt(target / double(h.data.size()));
  Tensor3C out = h;
  Rng rng(seed);
  for (cplx& v : out.data) v += s * rng.cnormal();
  return out;
}

double snr_to_noise_var(const Tensor3C& h, double snr_db) {
  const double e = frobenius_sq(h);
  if (e <= 0.0) throw std::invalid_argument("snr_to_noise_var: zero channel");
  const double n_elems = double(h.data.size());
  return e / (n_elems * std::pow(10.0, snr_db / 10.0));
}

}  // namespace ckm
