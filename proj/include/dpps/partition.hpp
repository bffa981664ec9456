#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "dpps/network.hpp"

namespace dpps {

/// The eight boundary quantities a cut line contributes, in enumeration order.
enum class Quantity : int { PF = 0, QF, PT, QT, WRR, WII, WRI_FT, WRI_TF };

const char* quantity_name(Quantity q);

/// One element of the global consensus index set: a cut line's quantity and
/// the zones that share it.
struct ConsensusIndex {
  int line = -1;
  Quantity quantity = Quantity::PF;
  std::vector<int> zones;  // F(i), sorted
};

struct ZonePartition {
  int num_zones = 0;
  std::vector<std::vector<int>> zones;           // N_z, disjoint cover (internal bus ids)
  std::vector<int> zone_of;                      // per internal bus id
  std::vector<std::vector<int>> line_sets;       // L_z: lines incident to N_z
  std::vector<std::vector<int>> extended_nodes;  // V_z: N_z plus adjacent buses
  std::vector<std::vector<int>> cuts;            // C_z: lines shared with other zones
  std::vector<ConsensusIndex> consensus;         // global ordered set
  std::vector<std::vector<int>> zone_view;       // C(z): global consensus ids per zone
  std::vector<int> dual_offsets;                 // zone base offsets into the stacked dual
  // per consensus index, the positions of its copies in the stacked dual vector
  std::vector<std::vector<int>> consensus_positions;
  std::vector<std::string> warnings;

  int consensus_size() const { return static_cast<int>(consensus.size()); }
  int dual_size() const;
  /// Stacked-dual position of global consensus index `ci` in zone `z`.
  int dual_position(int z, int ci) const;
};

/// Builds all index machinery from a bus->zone assignment (internal bus ids).
/// Throws ValidationError on incomplete assignments or empty zones.
ZonePartition build_partition(const NetworkData& net, const std::vector<int>& assignment);

/// Maps original bus ids (as listed in the case file) to a dense assignment.
std::vector<int> assignment_from_original_ids(const NetworkData& net,
                                              const std::vector<std::vector<int>>& zone_bus_lists);

/// BFS-grown contiguous zones of near-equal size; deterministic per seed.
std::vector<int> greedy_partition(const NetworkData& net, int k, std::uint64_t seed);

/// Orthogonal projection onto Lambda = { lambda : sum_{z in F(i)} lambda_zi = 0 }.
Eigen::VectorXd project_lambda(const ZonePartition& part, const Eigen::VectorXd& lam);

/// Largest |sum_{z in F(i)} lambda_zi| over consensus indices (feasibility check).
double lambda_residual(const ZonePartition& part, const Eigen::VectorXd& lam);

}  // namespace dpps
