#include "ckm/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "ckm/io.hpp"
#include "ckm/rng.hpp"

namespace ckm {
namespace {

// %.6g, the pinned CSV float format.
std::string g6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string iso_utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);  // binary keeps LF line endings everywhere
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  return f;
}

bool wants(const ExperimentConfig& cfg, Scheme s) {
  return std::find(cfg.schemes.begin(), cfg.schemes.end(), s) != cfg.schemes.end();
}

// Per-trial seed streams. Values are arbitrary but frozen: changing them
// changes every published number.
enum StreamTag : std::uint64_t {
  kEnvStream = 1,
  kObsPosStream = 2,
  kPilotStream = 4,
  kObsNoiseStream = 100,   // + obs index
  kBuilderStream = 900,    // +1 for the coarse builder
  kTxNoiseStream = 1000,   // + p_f value: draws don't move when the grid does
};

struct TrialMaps {
  std::vector<ParamRange> ranges;
  std::vector<ParamRange> coarse_ranges;
  std::string error;  // non-empty: map construction failed, schemes report it
};

TrialMaps build_trial_maps(const ExperimentConfig& cfg, const Environment& env,
                           std::uint64_t trial_seed) {
  TrialMaps out;
  if (!wants(cfg, Scheme::ClusterCKM) && !wants(cfg, Scheme::CoarseCKM)) return out;

  try {
    const std::vector<HistoricalSample> samples = trial_samples(cfg, env, trial_seed);
    const SceneContext comm_ctx = comm_context(cfg);
    if (wants(cfg, Scheme::ClusterCKM)) {
      const ClusterCkm ckm = trial_map(cfg, samples, trial_seed, false);
      out.ranges = query(ckm, cfg.tx_target, cfg.rx_target, comm_ctx, cfg.query_margin);
    }
    if (wants(cfg, Scheme::CoarseCKM)) {
      const ClusterCkm coarse = trial_map(cfg, samples, trial_seed, true);
      out.coarse_ranges = query(coarse, cfg.tx_target, cfg.rx_target, comm_ctx, cfg.query_margin);
    }
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

std::vector<TrialRecord> run_trial_impl(const ExperimentConfig& cfg, std::uint64_t trial_seed,
                                        int trial_index) {
  const Environment env = trial_environment(cfg, trial_seed);
  const TrialMaps maps = build_trial_maps(cfg, env, trial_seed);

  const SceneContext comm_ctx = comm_context(cfg);
  const double dref = link_delay_ref(cfg, cfg.tx_target, cfg.rx_target);
  const Tensor3C h_true = assemble_channel(env, cfg.tx_target, cfg.rx_target, tx_array(cfg),
                                           rx_array(cfg), comm_ctx.ofdm, dref);
  const MatrixXc x = pilot_matrix(cfg.n_tx, cfg.n_pilot_sym, seed_mix(trial_seed, kPilotStream));

  std::vector<TrialRecord> out;
  out.reserve(cfg.p_f.size() * cfg.snr_db.size() * cfg.schemes.size());
  for (std::size_t pi = 0; pi < cfg.p_f.size(); ++pi) {
    const int p_f = cfg.p_f[pi];
    const PilotConfig pilots{x, cfg.n_pilot_sym, p_f};
    for (const double snr : cfg.snr_db) {
      const double noise_var = std::isinf(snr) ? 0.0 : snr_to_noise_var(h_true, snr);
      // Keyed by the pilot-period value, shared across SNR levels: the same
      // unit draws scaled per level (common random numbers across the grid).
      const TransmitOut tx_out =
          transmit(h_true, pilots, noise_var,
                   seed_mix(trial_seed, kTxNoiseStream + static_cast<std::uint64_t>(p_f)));
      for (const Scheme s : cfg.schemes) {
        TrialRecord rec;
        rec.scheme = s;
        rec.p_f = p_f;
        rec.snr_db = snr;
        rec.trial = trial_index;
        try {
          Tensor3C est;
          switch (s) {
            case Scheme::ClusterCKM:
              if (!maps.error.empty()) throw std::runtime_error(maps.error);
              est = estimate_clusterckm(tx_out.y, maps.ranges, x, comm_ctx, p_f, dref, cfg.est);
              break;
            case Scheme::CoarseCKM:
              if (!maps.error.empty()) throw std::runtime_error(maps.error);
              est = estimate_clusterckm(tx_out.y, maps.coarse_ranges, x, comm_ctx, p_f, dref,
                                        cfg.est);
              break;
            case Scheme::LS:
              est = estimate_ls(tx_out.y, x, p_f, cfg.n_sc);
              break;
            case Scheme::OMP:
              est = estimate_omp(tx_out.y, x, p_f, cfg.n_sc, comm_ctx, cfg.est);
              break;
          }
          rec.rmse_db = rmse_db(est, h_true);
          rec.ok = true;
        } catch (const std::exception& e) {
          rec.error = e.what();
        }
        out.push_back(std::move(rec));
      }
    }
  }
  return out;
}

// Aggregate one (scheme, p_f, snr) cell over the successful trials.
ResultRow aggregate_cell(const ExperimentConfig& cfg, Scheme s, int p_f, double snr,
                         const std::vector<std::vector<TrialRecord>>& slots) {
  ResultRow row;
  row.scheme = scheme_name(s);
  row.p_f = p_f;
  row.snr_db = snr;
  row.seed = cfg.seed;
  std::vector<double> vals;
  vals.reserve(slots.size());
  for (const auto& records : slots)
    for (const TrialRecord& r : records)
      if (r.ok && r.scheme == s && r.p_f == p_f && r.snr_db == snr) vals.push_back(r.rmse_db);
  row.trials = static_cast<int>(vals.size());
  if (vals.empty()) {
    row.rmse_db_mean = std::nan("");
    row.rmse_db_std = std::nan("");
    return row;
  }
  if (cfg.db_mean) {
    double acc = 0.0;
    for (double v : vals) acc += v;
    row.rmse_db_mean = acc / static_cast<double>(vals.size());
  } else {
    double acc = 0.0;
    for (double v : vals) acc += std::pow(10.0, v / 10.0);
    row.rmse_db_mean = 10.0 * std::log10(acc / static_cast<double>(vals.size()));
  }
  double mean_db = 0.0;
  for (double v : vals) mean_db += v;
  mean_db /= static_cast<double>(vals.size());
  double ss = 0.0;
  for (double v : vals) ss += (v - mean_db) * (v - mean_db);
  row.rmse_db_std =
      vals.size() > 1 ? std::sqrt(ss / static_cast<double>(vals.size() - 1)) : 0.0;
  return row;
}

void hash_bytes(std::uint64_t& h, const std::string& s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
}

std::string series_label(const ResultRow& row) {
  std::string name = row.scheme;
  if (!row.environment.empty()) name += " env=" + row.environment;
  name += " snr_db=" + g6(row.snr_db);
  return name;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::ClusterCKM: return "ClusterCKM";
    case Scheme::CoarseCKM: return "CoarseCKM";
    case Scheme::LS: return "LS";
    case Scheme::OMP: return "OMP";
  }
  return "?";
}

Scheme scheme_from_name(const std::string& name) {
  for (const Scheme s : {Scheme::ClusterCKM, Scheme::CoarseCKM, Scheme::LS, Scheme::OMP})
    if (name == scheme_name(s)) return s;
  throw std::invalid_argument("unknown scheme: '" + name + "'");
}

ArrayConfig tx_array(const ExperimentConfig& cfg) {
  return {cfg.n_tx, cfg.spacing, cfg.wavelength, {}, cfg.array_axis};
}

ArrayConfig rx_array(const ExperimentConfig& cfg) {
  return {cfg.n_rx, cfg.spacing, cfg.wavelength, {}, cfg.array_axis};
}

SceneContext map_context(const ExperimentConfig& cfg) {
  return {tx_array(cfg), rx_array(cfg),
          {cfg.n_sc_map, cfg.bandwidth / static_cast<double>(cfg.n_sc_map)}};
}

SceneContext comm_context(const ExperimentConfig& cfg) {
  return {tx_array(cfg), rx_array(cfg), {cfg.n_sc, cfg.bandwidth / static_cast<double>(cfg.n_sc)}};
}

double link_delay_ref(const ExperimentConfig& cfg, Vec2 p_tx, Vec2 p_rx) {
  return (distance(p_tx, p_rx) + cfg.guard_m) / kSpeedOfLight;
}

ClusterCkm trial_map(const ExperimentConfig& cfg, const std::vector<HistoricalSample>& samples,
                     std::uint64_t trial_seed, bool coarse) {
  BuilderConfig bcfg = cfg.builder;
  bcfg.coarse = coarse;
  bcfg.seed = seed_mix(trial_seed, kBuilderStream + (coarse ? 1 : 0));
  return build_ckm(samples, map_context(cfg), bcfg);
}

Environment trial_environment(const ExperimentConfig& cfg, std::uint64_t trial_seed) {
  const std::uint64_t env_seed =
      cfg.resample_env ? seed_mix(trial_seed, kEnvStream) : seed_mix(cfg.seed, kEnvStream);
  return sample_environment(cfg.env.centers, cfg.env.paths_per_cluster, cfg.env.scatter_std,
                            env_seed);
}

std::vector<HistoricalSample> trial_samples(const ExperimentConfig& cfg, const Environment& env,
                                            std::uint64_t trial_seed) {
  const SceneContext map_ctx = map_context(cfg);
  std::vector<HistoricalSample> samples;
  samples.reserve(static_cast<std::size_t>(cfg.n_obs));
  Rng pos_rng(seed_mix(trial_seed, kObsPosStream));
  for (int i = 0; i < cfg.n_obs; ++i) {
    const Vec2 p_tx{pos_rng.uniform(cfg.obs_lo.x, cfg.obs_hi.x),
                    pos_rng.uniform(cfg.obs_lo.y, cfg.obs_hi.y)};
    const double dref = link_delay_ref(cfg, p_tx, cfg.rx_obs);
    const Tensor3C h = assemble_channel(env, p_tx, cfg.rx_obs, tx_array(cfg), rx_array(cfg),
                                        map_ctx.ofdm, dref);
    samples.push_back(
        {perturb_channel(h, cfg.hist_error_db, seed_mix(trial_seed, kObsNoiseStream + i)), p_tx,
         cfg.rx_obs, dref});
  }
  return samples;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.trials < 1) throw std::invalid_argument("config: trials must be >= 1");
  if (cfg.schemes.empty()) throw std::invalid_argument("config: schemes must be non-empty");
  if (cfg.env.centers.empty()) throw std::invalid_argument("config: no cluster centers");
  if (cfg.env.paths_per_cluster < 1) throw std::invalid_argument("config: paths_per_cluster");
  if (cfg.p_f.empty() || cfg.snr_db.empty())
    throw std::invalid_argument("config: p_f and snr_db must be non-empty");
  for (int p : cfg.p_f)
    if (p < 1) throw std::invalid_argument("config: p_f values must be >= 1");
  if (cfg.n_tx < 1 || cfg.n_rx < 1 || cfg.n_sc < 1 || cfg.n_sc_map < 1)
    throw std::invalid_argument("config: array/grid sizes must be >= 1");
  if (cfg.n_pilot_sym < cfg.n_tx)
    throw std::invalid_argument("config: n_pilot_sym must be >= n_tx");
  if (cfg.n_obs < 1) throw std::invalid_argument("config: n_obs must be >= 1");
  if (!(cfg.bandwidth > 0.0) || !(cfg.wavelength > 0.0) || !(cfg.spacing > 0.0))
    throw std::invalid_argument("config: bandwidth/wavelength/spacing must be positive");
  if (!(cfg.guard_m >= 0.0)) throw std::invalid_argument("config: guard_m must be >= 0");
}

std::vector<TrialRecord> run_trial(const ExperimentConfig& cfg, std::uint64_t trial_seed,
                                   int trial_index) {
  validate(cfg);
  try {
    return run_trial_impl(cfg, trial_seed, trial_index);
  } catch (const std::exception& e) {
    // Whole-trial failure (environment or link assembly): every cell reports it.
    std::vector<TrialRecord> out;
    for (const int p_f : cfg.p_f)
      for (const double snr : cfg.snr_db)
        for (const Scheme s : cfg.schemes) {
          TrialRecord rec;
          rec.scheme = s;
          rec.p_f = p_f;
          rec.snr_db = snr;
          rec.trial = trial_index;
          rec.error = e.what();
          out.push_back(std::move(rec));
        }
    return out;
  }
}

ExperimentResult sweep_pf(const ExperimentConfig& cfg) {
  validate(cfg);
  std::vector<std::vector<TrialRecord>> slots(static_cast<std::size_t>(cfg.trials));
  auto work = [&](int t) {
    slots[static_cast<std::size_t>(t)] =
        run_trial(cfg, seed_mix(cfg.seed, static_cast<std::uint64_t>(t)), t);
  };
  if (cfg.n_threads <= 1) {
    for (int t = 0; t < cfg.trials; ++t) work(t);
  } else {
    std::atomic<int> next{0};
    auto drain = [&] {
      for (int t = next.fetch_add(1); t < cfg.trials; t = next.fetch_add(1)) work(t);
    };
    std::vector<std::thread> pool;
    const int n = std::min(cfg.n_threads, cfg.trials);
    pool.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) pool.emplace_back(drain);
    for (auto& th : pool) th.join();
  }

  ExperimentResult r;
  r.seed = cfg.seed;
  r.config_hash = config_hash(cfg);
  r.timestamp = iso_utc_now();
  for (const Scheme s : cfg.schemes)
    for (const int p_f : cfg.p_f)
      for (const double snr : cfg.snr_db) r.rows.push_back(aggregate_cell(cfg, s, p_f, snr, slots));
  for (const auto& slot : slots) r.records.insert(r.records.end(), slot.begin(), slot.end());
  return r;
}

ExperimentResult table_environments(const ExperimentConfig& base) {
  validate(base);
  struct EnvCase {
    const char* name;
    EnvironmentSpec env;
    int p_f;
  };
  // Sparse keeps the multi-cluster geometry with one path per cluster; the
  // dense environments use sigma = 10 m (small) / 20 m (large).
  const std::vector<EnvCase> cases = {
      {"sparse", {base.env.centers, 1, 10.0}, 20},
      {"one_large", {{{0.0, -200.0}}, base.env.paths_per_cluster, 20.0}, 20},
      {"four_small", {base.env.centers, base.env.paths_per_cluster, 10.0}, 20},
      {"four_large", {base.env.centers, base.env.paths_per_cluster, 20.0}, 15},
  };
  ExperimentResult r;
  r.seed = base.seed;
  r.config_hash = config_hash(base);
  r.timestamp = iso_utc_now();
  for (const EnvCase& c : cases) {
    ExperimentConfig cfg = base;
    cfg.env = c.env;
    cfg.p_f = {c.p_f};
    cfg.snr_db = {20.0, 0.0};
    const ExperimentResult sub = sweep_pf(cfg);
    for (ResultRow row : sub.rows) {
      row.environment = c.name;
      r.rows.push_back(std::move(row));
    }
    r.records.insert(r.records.end(), sub.records.begin(), sub.records.end());
  }
  return r;
}

void emit_csv(const ExperimentResult& r, std::ostream& os) {
  os << "scheme,p_f,snr_db,rmse_db_mean,rmse_db_std,trials,seed\n";
  for (const ResultRow& row : r.rows)
    os << row.scheme << ',' << row.p_f << ',' << g6(row.snr_db) << ',' << g6(row.rmse_db_mean)
       << ',' << g6(row.rmse_db_std) << ',' << row.trials << ',' << row.seed << '\n';
}

void emit_csv(const ExperimentResult& r, const std::string& path) {
  auto f = open_out(path);
  emit_csv(r, f);
}

void emit_table_csv(const ExperimentResult& r, std::ostream& os) {
  os << "environment,scheme,p_f,snr_db,rmse_db_mean,rmse_db_std,trials,seed\n";
  for (const ResultRow& row : r.rows)
    os << row.environment << ',' << row.scheme << ',' << row.p_f << ',' << g6(row.snr_db) << ','
       << g6(row.rmse_db_mean) << ',' << g6(row.rmse_db_std) << ',' << row.trials << ','
       << row.seed << '\n';
}

void emit_table_csv(const ExperimentResult& r, const std::string& path) {
  auto f = open_out(path);
  emit_table_csv(r, f);
}

void emit_plotdata(const ExperimentResult& r, std::ostream& os) {
  os << "# mean RMSE (dB) vs pilot period\n";
  std::vector<std::string> order;
  for (const ResultRow& row : r.rows) {
    const std::string label = series_label(row);
    if (std::find(order.begin(), order.end(), label) == order.end()) order.push_back(label);
  }
  for (const std::string& label : order) {
    os << "\n# series " << label << "\n";
    for (const ResultRow& row : r.rows)
      if (series_label(row) == label) os << row.p_f << ' ' << g6(row.rmse_db_mean) << '\n';
  }
}

void emit_plotdata(const ExperimentResult& r, const std::string& path) {
  auto f = open_out(path);
  emit_plotdata(r, f);
}

void emit_trials_csv(const ExperimentResult& r, std::ostream& os) {
  os << "scheme,p_f,snr_db,trial,rmse_db,ok,error\n";
  for (const TrialRecord& t : r.records)
    os << scheme_name(t.scheme) << ',' << t.p_f << ',' << g6(t.snr_db) << ',' << t.trial << ','
       << (t.ok ? g6(t.rmse_db) : std::string("nan")) << ',' << (t.ok ? 1 : 0) << ',' << t.error
       << '\n';
}

void emit_trials_csv(const ExperimentResult& r, const std::string& path) {
  auto f = open_out(path);
  emit_trials_csv(r, f);
}

void emit_manifest(const ExperimentResult& r, const ExperimentConfig& cfg, std::ostream& os) {
  nlohmann::json j;
  char hex[24];
  std::snprintf(hex, sizeof(hex), "0x%016llx", static_cast<unsigned long long>(r.config_hash));
  j["kind"] = "clusterckm-bench";
  j["config_hash"] = hex;
  j["seed"] = r.seed;
  j["timestamp"] = r.timestamp;
  j["trials"] = cfg.trials;
  std::vector<std::string> names;
  for (const Scheme s : cfg.schemes) names.emplace_back(scheme_name(s));
  j["schemes"] = names;
  j["p_f"] = cfg.p_f;
  j["snr_db"] = cfg.snr_db;
  j["n_obs"] = cfg.n_obs;
  j["hist_error_db"] = cfg.hist_error_db;
  j["resample_env"] = cfg.resample_env;
  j["db_mean"] = cfg.db_mean;
  j["rows"] = r.rows.size();
  std::vector<std::string> envs;
  for (const ResultRow& row : r.rows)
    if (!row.environment.empty() &&
        std::find(envs.begin(), envs.end(), row.environment) == envs.end())
      envs.push_back(row.environment);
  if (!envs.empty()) j["environments"] = envs;
  os << j.dump(2) << "\n";
}

void emit_manifest(const ExperimentResult& r, const ExperimentConfig& cfg,
                   const std::string& path) {
  auto f = open_out(path);
  emit_manifest(r, cfg, f);
}

std::vector<ResultRow> parse_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty csv");
  const std::vector<std::string> header = split_csv_line(line);
  const bool with_env = !header.empty() && header[0] == "environment";
  const std::size_t base = with_env ? 1 : 0;
  if (header.size() != base + 7 || header[base] != "scheme")
    throw std::runtime_error("unrecognized csv header: '" + line + "'");
  std::vector<ResultRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != base + 7) throw std::runtime_error("bad csv row: '" + line + "'");
    ResultRow row;
    if (with_env) row.environment = f[0];
    row.scheme = f[base + 0];
    row.p_f = static_cast<int>(stod_strict(f[base + 1]));
    row.snr_db = stod_strict(f[base + 2]);
    row.rmse_db_mean = stod_strict(f[base + 3]);
    row.rmse_db_std = stod_strict(f[base + 4]);
    row.trials = static_cast<int>(stod_strict(f[base + 5]));
    row.seed = std::stoull(f[base + 6]);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  std::ostringstream s;
  s << "centers=";
  for (const Vec2& c : cfg.env.centers) s << dtos(c.x) << "," << dtos(c.y) << ";";
  s << "|paths=" << cfg.env.paths_per_cluster << "|std=" << dtos(cfg.env.scatter_std)
    << "|n_tx=" << cfg.n_tx << "|n_rx=" << cfg.n_rx << "|spacing=" << dtos(cfg.spacing)
    << "|wavelength=" << dtos(cfg.wavelength) << "|axis=" << dtos(cfg.array_axis.x) << ","
    << dtos(cfg.array_axis.y) << "|bw=" << dtos(cfg.bandwidth) << "|n_sc_map=" << cfg.n_sc_map
    << "|n_sc=" << cfg.n_sc << "|n_obs=" << cfg.n_obs << "|hist=" << dtos(cfg.hist_error_db)
    << "|snr=";
  for (double v : cfg.snr_db) s << dtos(v) << ",";
  s << "|pf=";
  for (int v : cfg.p_f) s << v << ",";
  s << "|trials=" << cfg.trials << "|schemes=";
  for (const Scheme sch : cfg.schemes) s << scheme_name(sch) << ",";
  s << "|seed=" << cfg.seed << "|resample=" << cfg.resample_env << "|db_mean=" << cfg.db_mean
    << "|obs=" << dtos(cfg.obs_lo.x) << "," << dtos(cfg.obs_lo.y) << "," << dtos(cfg.obs_hi.x)
    << "," << dtos(cfg.obs_hi.y) << "|rx_obs=" << dtos(cfg.rx_obs.x) << "," << dtos(cfg.rx_obs.y)
    << "|tx_tgt=" << dtos(cfg.tx_target.x) << "," << dtos(cfg.tx_target.y)
    << "|rx_tgt=" << dtos(cfg.rx_target.x) << "," << dtos(cfg.rx_target.y)
    << "|guard=" << dtos(cfg.guard_m) << "|p=" << cfg.n_pilot_sym
    << "|margin=" << dtos(cfg.query_margin);
  const BuilderConfig& b = cfg.builder;
  s << "|b.thresh=" << dtos(b.power_thresh) << "|b.stop=" << dtos(b.stop_frac)
    << "|b.maxc=" << b.max_clusters << "|b.efrac=" << dtos(b.energy_frac)
    << "|b.maxr=" << b.max_rank << "|b.kmin=" << b.k_min << "|b.kmax=" << b.k_max
    << "|b.outl=" << dtos(b.outlier_sigma) << "|b.coarse=" << b.coarse << "|b.seed=" << b.seed
    << "|cp.sweeps=" << b.cp.max_sweeps << "|cp.tol=" << dtos(b.cp.tol)
    << "|cp.restarts=" << b.cp.random_restarts << "|cp.ridge=" << dtos(b.cp.ridge_rel)
    << "|cp.seed=" << b.cp.seed;
  const EstimationConfig& e = cfg.est;
  s << "|e.steps=" << e.refine_steps << "|e.step=" << dtos(e.refine_step_size) << "|e.grid="
    << e.omp_grid[0] << "," << e.omp_grid[1] << "," << e.omp_grid[2]
    << "|e.atoms=" << e.omp_max_atoms << "|e.tol=" << dtos(e.omp_resid_tol);
  std::uint64_t h = 14695981039346656037ULL;
  hash_bytes(h, s.str());
  return h;
}

}  // namespace ckm
