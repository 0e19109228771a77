#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace cfjed {

enum class Modulation { BPSK, QPSK, QAM16 };
enum class PermMode { None, Csi, Phy };
enum class InitMode { BlockJs, Ls, L1 };

Modulation modulation_from_string(const std::string& s);
std::string to_string(Modulation m);
PermMode perm_from_string(const std::string& s);
std::string to_string(PermMode p);
InitMode init_from_string(const std::string& s);
std::string to_string(InitMode i);

// Scenario description. Loaded from a flat key=value file or a named preset.
struct SystemConfig {
  int B = 64;                // APs
  int U = 128;               // UEs
  int K = 128;               // time slots per coherence block
  int T = 64;                // pilot slots
  Modulation modulation = Modulation::BPSK;
  int N_cells = 2;           // virtual cells (MUB blocks)
  double area_m = 1000.0;    // square side in meters
  double P_db = 12.0;        // power-control dynamic range
  double sigma_sh_db = 8.0;  // shadow-fading std dev
  std::uint64_t seed = 0;
  int trials = 50;

  PermMode perm = PermMode::Csi;
  InitMode init = InitMode::BlockJs;
  double mu = 2.0;      // JED sparsity weight
  double gamma = 0.0;   // JED corner-pushing weight
  double mu1 = 2.0;     // l1 baseline sparsity weight
  double tol = 1e-6;    // FBS gradient-ratio tolerance
  int max_iter = 5000;
  int workers = 0;  // 0 = hardware concurrency

  int D() const { return K - T; }
  void validate() const;
};

SystemConfig load_config(const std::string& path);
SystemConfig parse_config(const std::map<std::string, std::string>& kv);
SystemConfig preset(const std::string& name);
bool has_preset(const std::string& name);
std::string preset_names();

}  // namespace cfjed
