#include "cfjed/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <thread>
#include <vector>

#include "cfjed/channel.hpp"
#include "cfjed/constellation.hpp"
#include "cfjed/frames.hpp"
#include "cfjed/init.hpp"
#include "cfjed/jed.hpp"
#include "cfjed/permute.hpp"

namespace cfjed {

namespace {

struct TrialResult {
  bool ok = false;
  std::string error;
  // Per-UE metrics in original UE order.
  Eigen::VectorXd rmsse, ber, mse;
  Eigen::VectorXd rmsse_l1, ber_l1, mse_l1;
  Eigen::VectorXd rmsse_simo, ber_simo;
  Eigen::MatrixXi tx, rx_jed, rx_l1;  // U x D symbol indices
  int iterations = 0;
  Trace trace;
};

// Scatter permuted-order per-UE values back to original UE indices.
Eigen::VectorXd unscramble(const Eigen::VectorXd& v, const std::vector<int>& ue) {
  Eigen::VectorXd out(v.size());
  for (Eigen::Index j = 0; j < v.size(); ++j) out(ue[j]) = v(j);
  return out;
}

Eigen::MatrixXi unscramble_rows(const Eigen::MatrixXi& m, const std::vector<int>& ue) {
  Eigen::MatrixXi out(m.rows(), m.cols());
  for (Eigen::Index j = 0; j < m.rows(); ++j) out.row(ue[j]) = m.row(j);
  return out;
}

FrameMatrix build_frame(const SystemConfig& c) {
  if (c.U == c.N_cells * c.T) {
    try {
      return build_mub(c.T, c.N_cells);
    } catch (const std::invalid_argument&) {
      // Unsupported T for the orthogonal-block construction; fall through.
    }
  }
  Rng rng = make_rng(c.seed, 0xf8a3e);
  return build_etf(c.T, c.U, rng);
}

TrialResult run_trial(const SystemConfig& c, const FrameMatrix& frame,
                      const Eigen::MatrixXcd& S_T, const Constellation& constel,
                      int trial) {
  TrialResult r;
  try {
    Rng rng_ch = make_rng(c.seed, 16ull * trial + 1);
    Rng rng_data = make_rng(c.seed, 16ull * trial + 2);
    Rng rng_noise = make_rng(c.seed, 16ull * trial + 3);

    const ChannelRealization ch = make_channel(c, rng_ch);

    PermutationPair pair = PermutationPair::identity(c.B, c.U);
    if (c.perm == PermMode::Csi) {
      const Eigen::MatrixXd A = ch.H.cwiseAbs2();
      pair = csi_permute(A, c.N_cells, 0.1 * A.mean());
    } else if (c.perm == PermMode::Phy) {
      pair = location_cluster(ch.geometry.ap_positions, ch.geometry.ue_positions,
                              c.N_cells, 1.0);
    }
    const Eigen::MatrixXcd H = apply_pair(ch.H, pair);

    const Eigen::MatrixXi tx = draw_symbols(constel, c.U, c.D(), rng_data);
    const Eigen::MatrixXcd S_D = symbols_to_values(constel, tx);
    Eigen::MatrixXcd S(c.U, c.K);
    S.leftCols(c.T) = S_T;
    S.rightCols(c.D()) = S_D;
    const Eigen::MatrixXcd Y = transmit(H, S, 1.0, rng_noise);
    const Eigen::MatrixXcd Y_T = Y.leftCols(c.T);
    const Eigen::MatrixXcd Y_D = Y.rightCols(c.D());

    Eigen::MatrixXcd H0;
    Eigen::MatrixXcd SD0;
    const bool block_init = c.init == InitMode::BlockJs && frame.kind == FrameKind::MUB &&
                            c.U == c.N_cells * c.T;
    if (block_init) {
      const InitPair ip = assemble_init(Y, S_T, c.N_cells, c.T);
      H0 = ip.H;
      SD0 = ip.S_D;
    } else if (c.init == InitMode::L1) {
      SolverOptions lopts;
      lopts.tol = c.tol;
      lopts.max_iter = c.max_iter;
      H0 = l1_chest(Y_T, S_T, c.mu1, lopts);
      SD0 = lmmse_data_init(H0, Y_D);
    } else {
      // Minimum-norm LS over the pilot span; S_T has orthogonal columns with
      // S_T^H S_T = U I, so the pseudoinverse is S_T / U.
      H0 = Y_T * S_T.adjoint() / double(c.U);
      SD0 = lmmse_data_init(H0, Y_D);
    }

    JedProblem problem{Y, S_T, constel, c.mu, c.gamma};
    SolverOptions opts;
    opts.tol = c.tol;
    opts.max_iter = c.max_iter;
    JedResult jed = run_jed(problem, H0, SD0, opts);
    r.iterations = jed.trace.iterations;
    r.trace = std::move(jed.trace);

    SolverOptions lopts;
    lopts.tol = c.tol;
    lopts.max_iter = c.max_iter;
    const Eigen::MatrixXcd H_l1 = l1_chest(Y_T, S_T, c.mu1, lopts);
    const Eigen::MatrixXcd SD_l1 =
        lmmse_detect(H_l1, Y_D, mad_noise_var(H_l1.reshaped()));
    const Eigen::MatrixXcd SD_simo = simo_bound(H, Y_D, S_D);

    const QuantizedData q_jed = quantize(jed.S_D, constel);
    const QuantizedData q_l1 = quantize(SD_l1, constel);
    const QuantizedData q_simo = quantize(SD_simo, constel);
    const Eigen::MatrixXi tx_bits = symbols_to_bits(constel, tx);

    const auto& ue = pair.ue;
    r.rmsse = unscramble(rmsse_per_ue(jed.S_D, S_D), ue);
    r.ber = unscramble(ber_per_ue(q_jed.bits, tx_bits), ue);
    r.mse = unscramble(mse_per_ue(jed.H, H), ue);
    r.rmsse_l1 = unscramble(rmsse_per_ue(SD_l1, S_D), ue);
    r.ber_l1 = unscramble(ber_per_ue(q_l1.bits, tx_bits), ue);
    r.mse_l1 = unscramble(mse_per_ue(H_l1, H), ue);
    r.rmsse_simo = unscramble(rmsse_per_ue(SD_simo, S_D), ue);
    r.ber_simo = unscramble(ber_per_ue(q_simo.bits, tx_bits), ue);
    r.tx = unscramble_rows(tx, ue);
    r.rx_jed = unscramble_rows(q_jed.symbols, ue);
    r.rx_l1 = unscramble_rows(q_l1.symbols, ue);
    r.ok = true;
  } catch (const std::exception& e) {
    r.ok = false;
    r.error = e.what();
  }
  return r;
}

Eigen::VectorXd concat(const std::vector<const Eigen::VectorXd*>& parts) {
  Eigen::Index n = 0;
  for (const auto* p : parts) n += p->size();
  Eigen::VectorXd out(n);
  Eigen::Index at = 0;
  for (const auto* p : parts) {
    out.segment(at, p->size()) = *p;
    at += p->size();
  }
  return out;
}

}  // namespace

MetricsReport run_scenario(const SystemConfig& config, const std::string& out_dir,
                           const std::string& scenario_name) {
  config.validate();
  const FrameMatrix frame = build_frame(config);
  if (!check_ambiguity(frame.F))
    throw std::runtime_error("pilot frame fails the ambiguity guard (coherence >= nu)");
  const Eigen::MatrixXcd S_T = make_pilots(frame);
  const Constellation constel = make_constellation(config.modulation);

  std::vector<TrialResult> results(config.trials);
  unsigned n_workers = config.workers > 0
                           ? static_cast<unsigned>(config.workers)
                           : std::max(1u, std::thread::hardware_concurrency());
  n_workers = std::min<unsigned>(n_workers, std::max(1, config.trials));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int t = next.fetch_add(1); t < config.trials; t = next.fetch_add(1))
      results[t] = run_trial(config, frame, S_T, constel, t);
  };
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  MetricsReport report;
  report.scenario = scenario_name;
  report.trials = config.trials;

  std::vector<const Eigen::VectorXd*> rmsse, ber, mse, rmsse_l1, ber_l1, mse_l1,
      rmsse_simo, ber_simo;
  std::vector<const Eigen::MatrixXi*> tx, rx_jed, rx_l1;
  Eigen::VectorXd iters(config.trials);
  int ok_count = 0;
  for (const auto& r : results) {
    if (!r.ok) {
      ++report.failed_trials;
      std::fprintf(stderr, "trial failed: %s\n", r.error.c_str());
      continue;
    }
    rmsse.push_back(&r.rmsse);
    ber.push_back(&r.ber);
    mse.push_back(&r.mse);
    rmsse_l1.push_back(&r.rmsse_l1);
    ber_l1.push_back(&r.ber_l1);
    mse_l1.push_back(&r.mse_l1);
    rmsse_simo.push_back(&r.rmsse_simo);
    ber_simo.push_back(&r.ber_simo);
    tx.push_back(&r.tx);
    rx_jed.push_back(&r.rx_jed);
    rx_l1.push_back(&r.rx_l1);
    iters(ok_count++) = r.iterations;
  }
  if (ok_count == 0) throw std::runtime_error("all trials failed");

  report.rmsse = concat(rmsse);
  report.ber = concat(ber);
  report.mse = concat(mse);
  report.rmsse_l1 = concat(rmsse_l1);
  report.ber_l1 = concat(ber_l1);
  report.mse_l1 = concat(mse_l1);
  report.rmsse_simo = concat(rmsse_simo);
  report.ber_simo = concat(ber_simo);
  report.median_iterations = vector_median(iters.head(ok_count));

  // Pool payload symbols across trials per UE index for the MI estimate.
  Eigen::MatrixXi tx_all(config.U, std::ptrdiff_t(ok_count) * config.D());
  Eigen::MatrixXi rx_all = tx_all, rx_l1_all = tx_all;
  for (int t = 0; t < ok_count; ++t) {
    tx_all.middleCols(std::ptrdiff_t(t) * config.D(), config.D()) = *tx[t];
    rx_all.middleCols(std::ptrdiff_t(t) * config.D(), config.D()) = *rx_jed[t];
    rx_l1_all.middleCols(std::ptrdiff_t(t) * config.D(), config.D()) = *rx_l1[t];
  }
  report.mi = mi_per_ue(tx_all, rx_all, config.K, config.T);
  report.mi_l1 = mi_per_ue(tx_all, rx_l1_all, config.K, config.T);

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    report.write_json(out_dir + "/metrics.json");
    report.write_cdfs(out_dir);
    for (int t = 0; t < config.trials; ++t)
      if (results[t].ok)
        results[t].trace.to_csv(out_dir + "/trace_" + std::to_string(t) + ".csv");
  }
  return report;
}

double percentile(Eigen::VectorXd v, double p) {
  if (v.size() == 0) throw std::invalid_argument("percentile of empty vector");
  if (p < 0 || p > 1) throw std::invalid_argument("percentile needs p in [0,1]");
  std::sort(v.data(), v.data() + v.size());
  const auto rank = std::min<Eigen::Index>(
      v.size() - 1, static_cast<Eigen::Index>(std::ceil(p * v.size())) - (p > 0));
  return v(std::max<Eigen::Index>(0, rank));
}

std::vector<SweepRow> sweep_overhead(const SystemConfig& base,
                                     const std::vector<int>& T_list,
                                     const std::string& out_dir) {
  const int n_q = make_constellation(base.modulation).bits_per_symbol;
  std::vector<SweepRow> rows;
  for (int T : T_list) {
    SweepRow row;
    row.T = T;
    row.overhead = double(T) / base.K;
    row.mi_ceiling = n_q * double(base.K - T) / base.K;
    if (T >= base.K) {
      // All-pilot transmission carries no payload.
      rows.push_back(row);
      continue;
    }
    SystemConfig c = base;
    c.T = T;
    if (c.perm != PermMode::None && c.U % T == 0 && c.U / T <= T + 1) {
      c.N_cells = c.U / T;
    } else {
      c.perm = PermMode::None;
      c.N_cells = 1;
    }
    const MetricsReport rep = run_scenario(c, "", "sweep_T" + std::to_string(T));
    row.mi_jed_p10 = percentile(rep.mi, 0.10);
    row.mi_lmmse_p10 = percentile(rep.mi_l1, 0.10);
    rows.push_back(row);
  }
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream out(out_dir + "/sweep.csv");
    if (!out) throw std::runtime_error("cannot open sweep.csv");
    out << "T,overhead,mi_jed_p10,mi_lmmse_p10,mi_ceiling\n";
    for (const auto& r : rows)
      out << r.T << "," << r.overhead << "," << r.mi_jed_p10 << ","
          << r.mi_lmmse_p10 << "," << r.mi_ceiling << "\n";
  }
  return rows;
}

}  // namespace cfjed
