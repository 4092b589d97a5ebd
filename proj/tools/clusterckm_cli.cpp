// Command-line front end: channel simulation, map construction, single-link
// estimation, and the two benchmark sweeps.

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <set>
#include <string>
#include <vector>

#include "ckm/bench.hpp"
#include "ckm/io.hpp"
#include "ckm/rng.hpp"

using namespace ckm;

namespace {

Vec2 to_vec2(const std::vector<double>& v) { return {v[0], v[1]}; }

void apply_json_builder(BuilderConfig& b, const nlohmann::json& j) {
  static const std::set<std::string> known = {"power_thresh", "stop_frac",  "max_clusters",
                                              "energy_frac",  "max_rank",   "k_min",
                                              "k_max",        "outlier_sigma",
                                              "cp_restarts",  "cp_sweeps",  "cp_tol"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw std::runtime_error("unknown builder config key: " + k);
  if (j.contains("cp_restarts")) b.cp.random_restarts = j.at("cp_restarts").get<int>();
  if (j.contains("cp_sweeps")) b.cp.max_sweeps = j.at("cp_sweeps").get<int>();
  if (j.contains("cp_tol")) b.cp.tol = j.at("cp_tol").get<double>();
  if (j.contains("power_thresh")) b.power_thresh = j.at("power_thresh").get<double>();
  if (j.contains("stop_frac")) b.stop_frac = j.at("stop_frac").get<double>();
  if (j.contains("max_clusters")) b.max_clusters = j.at("max_clusters").get<int>();
  if (j.contains("energy_frac")) b.energy_frac = j.at("energy_frac").get<double>();
  if (j.contains("max_rank")) b.max_rank = j.at("max_rank").get<long>();
  if (j.contains("k_min")) b.k_min = j.at("k_min").get<int>();
  if (j.contains("k_max")) b.k_max = j.at("k_max").get<int>();
  if (j.contains("outlier_sigma")) b.outlier_sigma = j.at("outlier_sigma").get<double>();
}

void apply_json_est(EstimationConfig& e, const nlohmann::json& j) {
  static const std::set<std::string> known = {"refine_steps",  "refine_step_size", "interp_rcond",
                                              "omp_grid",      "omp_max_atoms",    "omp_resid_tol"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw std::runtime_error("unknown est config key: " + k);
  if (j.contains("refine_steps")) e.refine_steps = j.at("refine_steps").get<int>();
  if (j.contains("refine_step_size")) e.refine_step_size = j.at("refine_step_size").get<double>();
  if (j.contains("interp_rcond")) e.interp_rcond = j.at("interp_rcond").get<double>();
  if (j.contains("omp_grid")) {
    const auto g = j.at("omp_grid").get<std::vector<long>>();
    if (g.size() != 3) throw std::runtime_error("omp_grid needs 3 entries");
    e.omp_grid = {g[0], g[1], g[2]};
  }
  if (j.contains("omp_max_atoms")) e.omp_max_atoms = j.at("omp_max_atoms").get<int>();
  if (j.contains("omp_resid_tol")) e.omp_resid_tol = j.at("omp_resid_tol").get<double>();
}

Vec2 json_vec2(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw std::runtime_error("expected [x, y]");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

// Config-file values win over flags.
void apply_json(ExperimentConfig& cfg, const nlohmann::json& j, bool& pf_given) {
  static const std::set<std::string> known = {
      "seed",       "trials",     "n_obs",      "hist_error_db", "snr_db",      "p_f",
      "schemes",    "centers",    "paths_per_cluster",           "scatter_std", "n_tx",
      "n_rx",       "spacing",    "wavelength", "array_axis",    "bandwidth",   "n_sc",
      "n_sc_map",   "tx_target",  "rx_target",  "rx_obs",        "obs_box",     "guard_m",
      "n_pilot_sym", "query_margin", "resample_env", "db_mean",  "out_dir",     "n_threads",
      "builder",    "est"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw std::runtime_error("unknown config key: " + k);

  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("trials")) cfg.trials = j.at("trials").get<int>();
  if (j.contains("n_obs")) cfg.n_obs = j.at("n_obs").get<int>();
  if (j.contains("hist_error_db")) cfg.hist_error_db = j.at("hist_error_db").get<double>();
  if (j.contains("snr_db")) cfg.snr_db = j.at("snr_db").get<std::vector<double>>();
  if (j.contains("p_f")) {
    cfg.p_f = j.at("p_f").get<std::vector<int>>();
    pf_given = true;
  }
  if (j.contains("schemes")) {
    cfg.schemes.clear();
    for (const auto& s : j.at("schemes")) cfg.schemes.push_back(scheme_from_name(s));
  }
  if (j.contains("centers")) {
    cfg.env.centers.clear();
    for (const auto& c : j.at("centers")) cfg.env.centers.push_back(json_vec2(c));
  }
  if (j.contains("paths_per_cluster"))
    cfg.env.paths_per_cluster = j.at("paths_per_cluster").get<long>();
  if (j.contains("scatter_std")) cfg.env.scatter_std = j.at("scatter_std").get<double>();
  if (j.contains("n_tx")) cfg.n_tx = j.at("n_tx").get<long>();
  if (j.contains("n_rx")) cfg.n_rx = j.at("n_rx").get<long>();
  if (j.contains("spacing")) cfg.spacing = j.at("spacing").get<double>();
  if (j.contains("wavelength")) cfg.wavelength = j.at("wavelength").get<double>();
  if (j.contains("array_axis")) cfg.array_axis = json_vec2(j.at("array_axis"));
  if (j.contains("bandwidth")) cfg.bandwidth = j.at("bandwidth").get<double>();
  if (j.contains("n_sc")) cfg.n_sc = j.at("n_sc").get<long>();
  if (j.contains("n_sc_map")) cfg.n_sc_map = j.at("n_sc_map").get<long>();
  if (j.contains("tx_target")) cfg.tx_target = json_vec2(j.at("tx_target"));
  if (j.contains("rx_target")) cfg.rx_target = json_vec2(j.at("rx_target"));
  if (j.contains("rx_obs")) cfg.rx_obs = json_vec2(j.at("rx_obs"));
  if (j.contains("obs_box")) {
    const auto b = j.at("obs_box").get<std::vector<double>>();
    if (b.size() != 4) throw std::runtime_error("obs_box needs [x0, y0, x1, y1]");
    cfg.obs_lo = {b[0], b[1]};
    cfg.obs_hi = {b[2], b[3]};
  }
  if (j.contains("guard_m")) cfg.guard_m = j.at("guard_m").get<double>();
  if (j.contains("n_pilot_sym")) cfg.n_pilot_sym = j.at("n_pilot_sym").get<long>();
  if (j.contains("query_margin")) cfg.query_margin = j.at("query_margin").get<double>();
  if (j.contains("resample_env")) cfg.resample_env = j.at("resample_env").get<bool>();
  if (j.contains("db_mean")) cfg.db_mean = j.at("db_mean").get<bool>();
  if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
  if (j.contains("n_threads")) cfg.n_threads = j.at("n_threads").get<int>();
  if (j.contains("builder")) apply_json_builder(cfg.builder, j.at("builder"));
  if (j.contains("est")) apply_json_est(cfg.est, j.at("est"));
}

int cmd_simulate(const ExperimentConfig& cfg, const std::string& out, const std::string& grid) {
  const Environment env = trial_environment(cfg, seed_mix(cfg.seed, 0));
  const SceneContext ctx = grid == "map" ? map_context(cfg) : comm_context(cfg);
  const double dref = link_delay_ref(cfg, cfg.tx_target, cfg.rx_target);
  const Tensor3C h = assemble_channel(env, cfg.tx_target, cfg.rx_target, tx_array(cfg),
                                      rx_array(cfg), ctx.ofdm, dref);
  save_tensor(out, h);
  std::cout << "wrote " << out << "  dims " << h.dims[0] << "x" << h.dims[1] << "x" << h.dims[2]
            << "  |H|_F " << frobenius(h) << "\n";
  return 0;
}

int cmd_build_ckm(const ExperimentConfig& cfg, const std::string& out, bool coarse, int trial) {
  const std::uint64_t trial_seed = seed_mix(cfg.seed, static_cast<std::uint64_t>(trial));
  const Environment env = trial_environment(cfg, trial_seed);
  const std::vector<HistoricalSample> samples = trial_samples(cfg, env, trial_seed);
  const ClusterCkm ckm = trial_map(cfg, samples, trial_seed, coarse);
  MetaList meta = {{"seed", std::to_string(cfg.seed)},
                   {"coarse", coarse ? "1" : "0"},
                   {"n_obs", std::to_string(cfg.n_obs)},
                   {"hist_error_db", dtos(cfg.hist_error_db)},
                   {"stop_frac", dtos(cfg.builder.stop_frac)},
                   {"power_thresh", dtos(cfg.builder.power_thresh)}};
  save_ckm(out, ckm, meta);
  std::size_t n_es = 0;
  for (const auto& g : ckm.es_clusters) n_es += g.size();
  std::cout << "wrote " << out << "  clusters " << ckm.es_clusters.size() << "  es points "
            << n_es << "\n";
  return 0;
}

int cmd_estimate(const ExperimentConfig& cfg, const std::string& ckm_path,
                 const std::string& scheme_str, int trial) {
  const Scheme scheme = scheme_from_name(scheme_str);
  const std::uint64_t trial_seed = seed_mix(cfg.seed, static_cast<std::uint64_t>(trial));
  const Environment env = trial_environment(cfg, trial_seed);
  const SceneContext ctx = comm_context(cfg);
  const double dref = link_delay_ref(cfg, cfg.tx_target, cfg.rx_target);
  const Tensor3C h_true = assemble_channel(env, cfg.tx_target, cfg.rx_target, tx_array(cfg),
                                           rx_array(cfg), ctx.ofdm, dref);
  const int p_f = cfg.p_f.front();
  const double snr = cfg.snr_db.front();
  const MatrixXc x = pilot_matrix(cfg.n_tx, cfg.n_pilot_sym, seed_mix(trial_seed, 4));
  const double noise_var = std::isinf(snr) ? 0.0 : snr_to_noise_var(h_true, snr);
  const TransmitOut tx_out =
      transmit(h_true, {x, cfg.n_pilot_sym, p_f}, noise_var, seed_mix(trial_seed, 1000));

  Tensor3C est;
  if (scheme == Scheme::LS) {
    est = estimate_ls(tx_out.y, x, p_f, cfg.n_sc);
  } else if (scheme == Scheme::OMP) {
    est = estimate_omp(tx_out.y, x, p_f, cfg.n_sc, ctx, cfg.est);
  } else {
    if (ckm_path.empty()) throw std::runtime_error("map schemes need --ckm <file>");
    const ClusterCkm ckm = load_ckm(ckm_path);
    const std::vector<ParamRange> ranges =
        query(ckm, cfg.tx_target, cfg.rx_target, ctx, cfg.query_margin);
    est = estimate_clusterckm(tx_out.y, ranges, x, ctx, p_f, dref, cfg.est);
  }
  std::cout << scheme_str << "  p_f " << p_f << "  snr_db " << snr << "  rmse_db "
            << rmse_db(est, h_true) << "\n";
  return 0;
}

int cmd_bench(const ExperimentConfig& cfg, bool table) {
  std::filesystem::create_directories(cfg.out_dir);
  if (table) {
    const ExperimentResult r = table_environments(cfg);
    emit_table_csv(r, std::cout);
    emit_table_csv(r, cfg.out_dir + "/table_env.csv");
    emit_trials_csv(r, cfg.out_dir + "/table_env_trials.csv");
    emit_manifest(r, cfg, cfg.out_dir + "/table_env_manifest.json");
    std::cout << "wrote " << cfg.out_dir << "/table_env.csv\n";
  } else {
    const ExperimentResult r = sweep_pf(cfg);
    emit_csv(r, std::cout);
    emit_csv(r, cfg.out_dir + "/sweep_pf.csv");
    emit_plotdata(r, cfg.out_dir + "/sweep_pf_plot.txt");
    emit_trials_csv(r, cfg.out_dir + "/sweep_pf_trials.csv");
    emit_manifest(r, cfg, cfg.out_dir + "/sweep_pf_manifest.json");
    std::cout << "wrote " << cfg.out_dir << "/sweep_pf.csv\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  ExperimentConfig cfg;
  if (const char* dir = std::getenv("CLUSTERCKM_OUTPUT_DIR")) cfg.out_dir = dir;

  CLI::App app{"clustered multipath map construction and channel estimation"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config", config_path, "JSON config file; its values override flags");

  app.add_option("--seed", cfg.seed, "master seed");
  app.add_option("--trials", cfg.trials, "Monte-Carlo trials");
  app.add_option("--n-obs", cfg.n_obs, "historical captures per trial");
  app.add_option("--hist-error-db", cfg.hist_error_db, "historical capture error (dB)");
  auto* opt_snr = app.add_option("--snr", cfg.snr_db, "SNR list (dB, inf = noiseless")
                      ->delimiter(',');
  auto* opt_pf = app.add_option("--p-f", cfg.p_f, "pilot period list")->delimiter(',');
  std::vector<std::string> scheme_names;
  app.add_option("--schemes", scheme_names, "subset of ClusterCKM,CoarseCKM,LS,OMP")
      ->delimiter(',');
  std::vector<double> centers_flat;
  app.add_option("--centers", centers_flat, "cluster centers x1 y1 x2 y2 ...");
  app.add_option("--paths-per-cluster", cfg.env.paths_per_cluster);
  app.add_option("--scatter-std", cfg.env.scatter_std, "scatterer std around centers (m)");
  app.add_option("--n-tx", cfg.n_tx);
  app.add_option("--n-rx", cfg.n_rx);
  app.add_option("--spacing", cfg.spacing, "element spacing (m)");
  app.add_option("--wavelength", cfg.wavelength, "carrier wavelength (m)");
  std::vector<double> axis, tx_target, rx_target, rx_obs, obs_box;
  app.add_option("--array-axis", axis, "ULA axis x y")->expected(2);
  app.add_option("--bandwidth", cfg.bandwidth, "total bandwidth (Hz)");
  app.add_option("--n-sc", cfg.n_sc, "communication subcarriers");
  app.add_option("--n-sc-map", cfg.n_sc_map, "map-construction subcarriers");
  app.add_option("--tx-target", tx_target, "target Tx x y")->expected(2);
  app.add_option("--rx-target", rx_target, "target Rx x y")->expected(2);
  app.add_option("--rx-obs", rx_obs, "historical Rx x y")->expected(2);
  app.add_option("--obs-box", obs_box, "historical Tx box x0 y0 x1 y1")->expected(4);
  app.add_option("--guard", cfg.guard_m, "timing-advance guard (m)");
  app.add_option("--pilot-syms", cfg.n_pilot_sym, "pilot symbols per burst");
  app.add_option("--margin", cfg.query_margin, "map query margin");
  bool fixed_env = false;
  app.add_flag("--fixed-env", fixed_env, "one scatterer draw for all trials");
  app.add_flag("--db-mean", cfg.db_mean, "average trial RMSEs in dB");
  app.add_option("--out-dir", cfg.out_dir, "output directory (or CLUSTERCKM_OUTPUT_DIR)");
  app.add_option("--threads", cfg.n_threads, "worker threads for trials");
  app.add_option("--stop-frac", cfg.builder.stop_frac, "division stop fraction");
  app.add_option("--power-thresh", cfg.builder.power_thresh, "subspace keep threshold");
  app.add_option("--max-clusters", cfg.builder.max_clusters);
  app.add_option("--energy-frac", cfg.builder.energy_frac, "equivalent-path rank criterion");
  app.add_option("--max-rank", cfg.builder.max_rank);
  app.add_option("--k-min", cfg.builder.k_min);
  app.add_option("--k-max", cfg.builder.k_max);
  app.add_option("--outlier-sigma", cfg.builder.outlier_sigma);
  app.add_option("--cp-restarts", cfg.builder.cp.random_restarts, "extra random CP starts");
  app.add_option("--cp-sweeps", cfg.builder.cp.max_sweeps, "CP ALS sweep cap");
  app.add_option("--cp-tol", cfg.builder.cp.tol, "CP convergence tolerance");
  app.add_option("--refine-steps", cfg.est.refine_steps, "range refinement steps per bound");
  app.add_option("--refine-step", cfg.est.refine_step_size, "refinement step (axis fraction)");
  app.add_option("--interp-rcond", cfg.est.interp_rcond, "comb-fit truncation threshold");
  app.add_option("--omp-atoms", cfg.est.omp_max_atoms);
  app.add_option("--omp-tol", cfg.est.omp_resid_tol);

  CLI::App* sim = app.add_subcommand("simulate", "sample an environment, dump a channel tensor");
  sim->fallthrough();
  std::string sim_out = "channel.txt";
  std::string sim_grid = "comm";
  sim->add_option("--out", sim_out, "output tensor file");
  sim->add_option("--grid", sim_grid, "subcarrier grid")->check(CLI::IsMember({"map", "comm"}));

  CLI::App* build = app.add_subcommand("build-ckm", "historical captures -> map file");
  build->fallthrough();
  std::string build_out = "map.ckm";
  bool build_coarse = false;
  int trial = 0;
  build->add_option("--out", build_out, "output map file");
  build->add_flag("--coarse", build_coarse, "whole-tensor variant (no channel division)");
  build->add_option("--trial", trial, "trial index seeding the environment draw");

  CLI::App* est = app.add_subcommand(
      "estimate", "map file + link -> RMSE (first --p-f / --snr entries)");
  est->fallthrough();
  std::string est_ckm;
  std::string est_scheme = "ClusterCKM";
  est->add_option("--ckm", est_ckm, "map file (for ClusterCKM/CoarseCKM)");
  est->add_option("--scheme", est_scheme, "ClusterCKM|CoarseCKM|LS|OMP");
  est->add_option("--trial", trial, "trial index seeding the environment draw");

  CLI::App* bench_cmd = app.add_subcommand("bench", "experiment sweeps");
  bench_cmd->require_subcommand(1);
  bench_cmd->fallthrough();
  CLI::App* sweep = bench_cmd->add_subcommand("sweep-pf", "RMSE vs pilot period");
  sweep->fallthrough();
  CLI::App* table = bench_cmd->add_subcommand("table-env", "four reference environments");
  table->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (fixed_env) cfg.resample_env = false;
    if (!axis.empty()) cfg.array_axis = to_vec2(axis);
    if (!tx_target.empty()) cfg.tx_target = to_vec2(tx_target);
    if (!rx_target.empty()) cfg.rx_target = to_vec2(rx_target);
    if (!rx_obs.empty()) cfg.rx_obs = to_vec2(rx_obs);
    if (!obs_box.empty()) {
      cfg.obs_lo = {obs_box[0], obs_box[1]};
      cfg.obs_hi = {obs_box[2], obs_box[3]};
    }
    if (!centers_flat.empty()) {
      if (centers_flat.size() % 2 != 0)
        throw std::runtime_error("--centers needs an even number of values");
      cfg.env.centers.clear();
      for (std::size_t i = 0; i + 1 < centers_flat.size(); i += 2)
        cfg.env.centers.push_back({centers_flat[i], centers_flat[i + 1]});
    }
    if (!scheme_names.empty()) {
      cfg.schemes.clear();
      for (const std::string& s : scheme_names) cfg.schemes.push_back(scheme_from_name(s));
    }

    bool pf_given = opt_pf->count() > 0;
    (void)opt_snr;
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw std::runtime_error("cannot open config: " + config_path);
      nlohmann::json j;
      f >> j;
      apply_json(cfg, j, pf_given);
    }
    // The sweep defaults to the full reference pilot-period grid.
    if (sweep->parsed() && !pf_given) cfg.p_f = {1, 8, 16, 24, 32, 48, 60};

    validate(cfg);
    if (sim->parsed()) return cmd_simulate(cfg, sim_out, sim_grid);
    if (build->parsed()) return cmd_build_ckm(cfg, build_out, build_coarse, trial);
    if (est->parsed()) return cmd_estimate(cfg, est_ckm, est_scheme, trial);
    if (bench_cmd->parsed()) return cmd_bench(cfg, table->parsed());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
