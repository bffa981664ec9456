#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpps {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bus with per-unit quantities. `id` is the dense internal index,
/// `original_id` the bus number from the case file.
struct BusRecord {
  int id = -1;
  int original_id = -1;
  double v_min = 0.0, v_max = 0.0;  // voltage magnitude bounds, p.u.
  double p_demand = 0.0, q_demand = 0.0;
  double g_shunt = 0.0, b_shunt = 0.0;
};

struct GeneratorRecord {
  int bus = -1;  // internal bus index
  double p_min = 0.0, p_max = 0.0;
  double q_min = 0.0, q_max = 0.0;
  double c1 = 0.0;  // $/MW on physical (MW) output
  double c2 = 0.0;  // $/MW^2, must be >= 0
  double c0 = 0.0;  // constant offset, $/h
};

/// 2x2 complex admittance block of a branch.
struct AdmittanceBlock {
  std::complex<double> ff, ft, tf, tt;
};

struct BranchRecord {
  int from_bus = -1, to_bus = -1;  // internal bus indices
  double r = 0.0, x = 0.0;
  double b_charge = 0.0;
  double tau = 1.0;
  double theta_shift = 0.0;  // radians
  double s_max = 0.0;        // p.u.; 0 means unlimited
  double angle_min = 0.0, angle_max = 0.0;  // radians
  AdmittanceBlock admittance;

  double g_ff() const { return admittance.ff.real(); }
  double b_ff() const { return admittance.ff.imag(); }
  double g_ft() const { return admittance.ft.real(); }
  double b_ft() const { return admittance.ft.imag(); }
  double g_tf() const { return admittance.tf.real(); }
  double b_tf() const { return admittance.tf.imag(); }
  double g_tt() const { return admittance.tt.real(); }
  double b_tt() const { return admittance.tt.imag(); }
};

struct NetworkData {
  double base_mva = 100.0;
  std::vector<BusRecord> buses;
  std::vector<GeneratorRecord> generators;
  std::vector<BranchRecord> branches;

  // adjacency, indexed by internal bus id
  std::vector<std::vector<int>> neighbors;       // A_i
  std::vector<std::vector<int>> lines_from;      // L^F_i
  std::vector<std::vector<int>> lines_to;        // L^T_i
  std::vector<std::vector<int>> gens_at;         // generators at bus

  int bus_index(int original_id) const;
  const BusRecord& bus_by_original(int original_id) const;
};

/// Evaluates the branch admittance block from r, x, b_charge, tau, theta_shift.
/// Throws ValidationError when the series impedance is zero.
AdmittanceBlock admittance_block(const BranchRecord& branch);

/// Parses a Matpower .m case from text. All quantities are converted to
/// per-unit on baseMVA; bus ids are re-indexed to dense 0-based indices.
NetworkData parse_matpower(const std::string& text);

/// Convenience: read a file and parse it.
NetworkData load_case(const std::string& path);

/// Canonical structured dump (JSON). Round-trips bit-for-bit.
std::string network_to_json(const NetworkData& net);
NetworkData network_from_json(const std::string& json_text);

}  // namespace dpps
