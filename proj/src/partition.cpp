#include "dpps/partition.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <set>

namespace dpps {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

const char* quantity_name(Quantity q) {
  switch (q) {
    case Quantity::PF: return "pf";
    case Quantity::QF: return "qf";
    case Quantity::PT: return "pt";
    case Quantity::QT: return "qt";
    case Quantity::WRR: return "wrr";
    case Quantity::WII: return "wii";
    case Quantity::WRI_FT: return "wri_ft";
    case Quantity::WRI_TF: return "wri_tf";
  }
  return "?";
}

int ZonePartition::dual_size() const {
  int total = 0;
  for (const auto& v : zone_view) total += static_cast<int>(v.size());
  return total;
}

int ZonePartition::dual_position(int z, int ci) const {
  const auto& view = zone_view[static_cast<size_t>(z)];
  auto it = std::lower_bound(view.begin(), view.end(), ci);
  if (it == view.end() || *it != ci)
    throw ValidationError("consensus index not shared by zone");
  return dual_offsets[static_cast<size_t>(z)] + static_cast<int>(it - view.begin());
}

ZonePartition build_partition(const NetworkData& net, const std::vector<int>& assignment) {
  const int n = static_cast<int>(net.buses.size());
  if (static_cast<int>(assignment.size()) != n)
    throw ValidationError("assignment must cover all buses");
  int num_zones = 0;
  for (int z : assignment) {
    if (z < 0) throw ValidationError("negative zone id in assignment");
    num_zones = std::max(num_zones, z + 1);
  }

  ZonePartition part;
  part.num_zones = num_zones;
  part.zone_of = assignment;
  part.zones.assign(static_cast<size_t>(num_zones), {});
  for (int i = 0; i < n; ++i) part.zones[static_cast<size_t>(assignment[static_cast<size_t>(i)])].push_back(i);
  for (int z = 0; z < num_zones; ++z)
    if (part.zones[static_cast<size_t>(z)].empty())
      throw ValidationError("zone " + std::to_string(z) + " is empty");

  part.line_sets.assign(static_cast<size_t>(num_zones), {});
  part.cuts.assign(static_cast<size_t>(num_zones), {});
  part.extended_nodes.assign(static_cast<size_t>(num_zones), {});
  for (size_t l = 0; l < net.branches.size(); ++l) {
    const auto& br = net.branches[l];
    const int zf = assignment[static_cast<size_t>(br.from_bus)];
    const int zt = assignment[static_cast<size_t>(br.to_bus)];
    part.line_sets[static_cast<size_t>(zf)].push_back(static_cast<int>(l));
    if (zt != zf) {
      part.line_sets[static_cast<size_t>(zt)].push_back(static_cast<int>(l));
      part.cuts[static_cast<size_t>(zf)].push_back(static_cast<int>(l));
      part.cuts[static_cast<size_t>(zt)].push_back(static_cast<int>(l));
    }
  }
  for (int z = 0; z < num_zones; ++z) {
    auto& ls = part.line_sets[static_cast<size_t>(z)];
    std::sort(ls.begin(), ls.end());
    ls.erase(std::unique(ls.begin(), ls.end()), ls.end());
    auto& cs = part.cuts[static_cast<size_t>(z)];
    std::sort(cs.begin(), cs.end());
    std::set<int> ext(part.zones[static_cast<size_t>(z)].begin(), part.zones[static_cast<size_t>(z)].end());
    for (int bus : part.zones[static_cast<size_t>(z)])
      for (int nb : net.neighbors[static_cast<size_t>(bus)]) ext.insert(nb);
    part.extended_nodes[static_cast<size_t>(z)].assign(ext.begin(), ext.end());
  }

  // connectivity warning per zone (allowed, but worth surfacing)
  for (int z = 0; z < num_zones; ++z) {
    const auto& zs = part.zones[static_cast<size_t>(z)];
    std::set<int> seen;
    std::deque<int> queue{zs.front()};
    seen.insert(zs.front());
    while (!queue.empty()) {
      int b = queue.front();
      queue.pop_front();
      for (int nb : net.neighbors[static_cast<size_t>(b)])
        if (assignment[static_cast<size_t>(nb)] == z && !seen.count(nb)) {
          seen.insert(nb);
          queue.push_back(nb);
        }
    }
    if (seen.size() != zs.size())
      part.warnings.push_back("zone " + std::to_string(z) + " is disconnected");
  }

  // global consensus set: cut lines sorted by line id, fixed 8-tuple order
  std::vector<int> all_cuts;
  for (size_t l = 0; l < net.branches.size(); ++l) {
    const auto& br = net.branches[l];
    if (assignment[static_cast<size_t>(br.from_bus)] != assignment[static_cast<size_t>(br.to_bus)])
      all_cuts.push_back(static_cast<int>(l));
  }
  part.zone_view.assign(static_cast<size_t>(num_zones), {});
  for (int l : all_cuts) {
    const auto& br = net.branches[static_cast<size_t>(l)];
    std::vector<int> zs{assignment[static_cast<size_t>(br.from_bus)],
                        assignment[static_cast<size_t>(br.to_bus)]};
    std::sort(zs.begin(), zs.end());
    for (int qi = 0; qi < 8; ++qi) {
      const int ci = static_cast<int>(part.consensus.size());
      part.consensus.push_back({l, static_cast<Quantity>(qi), zs});
      for (int z : zs) part.zone_view[static_cast<size_t>(z)].push_back(ci);
    }
  }
  part.dual_offsets.assign(static_cast<size_t>(num_zones), 0);
  int off = 0;
  for (int z = 0; z < num_zones; ++z) {
    part.dual_offsets[static_cast<size_t>(z)] = off;
    off += static_cast<int>(part.zone_view[static_cast<size_t>(z)].size());
  }
  part.consensus_positions.assign(part.consensus.size(), {});
  for (size_t ci = 0; ci < part.consensus.size(); ++ci)
    for (int z : part.consensus[ci].zones)
      part.consensus_positions[ci].push_back(part.dual_position(z, static_cast<int>(ci)));
  return part;
}

std::vector<int> assignment_from_original_ids(const NetworkData& net,
                                              const std::vector<std::vector<int>>& zone_bus_lists) {
  std::vector<int> assignment(net.buses.size(), -1);
  for (size_t z = 0; z < zone_bus_lists.size(); ++z)
    for (int orig : zone_bus_lists[z]) {
      const int b = net.bus_index(orig);
      if (assignment[static_cast<size_t>(b)] != -1)
        throw ValidationError("bus " + std::to_string(orig) + " assigned to two zones");
      assignment[static_cast<size_t>(b)] = static_cast<int>(z);
    }
  for (size_t b = 0; b < assignment.size(); ++b)
    if (assignment[b] == -1)
      throw ValidationError("bus " + std::to_string(net.buses[b].original_id) +
                            " missing from zone assignment");
  return assignment;
}

std::vector<int> greedy_partition(const NetworkData& net, int k, std::uint64_t seed) {
  const int n = static_cast<int>(net.buses.size());
  if (k < 1 || k > n) throw ValidationError("zone count must be in [1, #buses]");
  std::vector<int> assignment(static_cast<size_t>(n), -1);
  if (k == 1) {
    std::fill(assignment.begin(), assignment.end(), 0);
    return assignment;
  }

  std::uint64_t state = seed * 0x2545f4914f6cdd1dULL + 0x853c49e6748fea9bULL;
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  for (int i = n - 1; i > 0; --i)
    std::swap(order[static_cast<size_t>(i)],
              order[splitmix64(state) % static_cast<std::uint64_t>(i + 1)]);

  std::vector<std::deque<int>> frontier(static_cast<size_t>(k));
  std::vector<int> size(static_cast<size_t>(k), 0);
  for (int z = 0; z < k; ++z) {
    const int b = order[static_cast<size_t>(z)];
    assignment[static_cast<size_t>(b)] = z;
    size[static_cast<size_t>(z)] = 1;
    frontier[static_cast<size_t>(z)].push_back(b);
  }

  int assigned = k;
  while (assigned < n) {
    // smallest zone with a live frontier grows next (ties by zone id)
    int best = -1;
    for (int z = 0; z < k; ++z)
      if (!frontier[static_cast<size_t>(z)].empty() &&
          (best == -1 || size[static_cast<size_t>(z)] < size[static_cast<size_t>(best)]))
        best = z;
    if (best == -1) {
      // disconnected remainder: hand the next unassigned bus to the smallest zone
      int z = static_cast<int>(std::min_element(size.begin(), size.end()) - size.begin());
      for (int b = 0; b < n; ++b)
        if (assignment[static_cast<size_t>(b)] == -1) {
          assignment[static_cast<size_t>(b)] = z;
          ++size[static_cast<size_t>(z)];
          frontier[static_cast<size_t>(z)].push_back(b);
          ++assigned;
          break;
        }
      continue;
    }
    auto& q = frontier[static_cast<size_t>(best)];
    bool grown = false;
    while (!q.empty() && !grown) {
      const int b = q.front();
      int next = -1;
      for (int nb : net.neighbors[static_cast<size_t>(b)])
        if (assignment[static_cast<size_t>(nb)] == -1) {
          next = nb;
          break;
        }
      if (next == -1) {
        q.pop_front();
        continue;
      }
      assignment[static_cast<size_t>(next)] = best;
      ++size[static_cast<size_t>(best)];
      q.push_back(next);
      ++assigned;
      grown = true;
    }
  }
  return assignment;
}

Eigen::VectorXd project_lambda(const ZonePartition& part, const Eigen::VectorXd& lam) {
  Eigen::VectorXd out = lam;
  for (const auto& positions : part.consensus_positions) {
    double mean = 0.0;
    for (int p : positions) mean += lam[p];
    mean /= static_cast<double>(positions.size());
    for (int p : positions) out[p] -= mean;
  }
  return out;
}

double lambda_residual(const ZonePartition& part, const Eigen::VectorXd& lam) {
  double worst = 0.0;
  for (const auto& positions : part.consensus_positions) {
    double sum = 0.0;
    for (int p : positions) sum += lam[p];
    worst = std::max(worst, std::abs(sum));
  }
  return worst;
}

}  // namespace dpps
