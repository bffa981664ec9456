#include "dpps/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

namespace dpps {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

struct Table {
  std::vector<std::vector<double>> rows;
  std::vector<int> line_numbers;
};

// Extracts the numeric matrix literals `mpc.<name> = [ ... ];`.
// Only these blocks and scalar assignments are understood.
class CaseText {
 public:
  explicit CaseText(const std::string& text) : text_(text) {}

  bool find_scalar(const std::string& name, double& out) const {
    auto pos = text_.find("mpc." + name);
    while (pos != std::string::npos) {
      auto eq = text_.find('=', pos);
      if (eq == std::string::npos) return false;
      std::istringstream is(text_.substr(eq + 1, 64));
      double v;
      if (is >> v) {
        out = v;
        return true;
      }
      pos = text_.find("mpc." + name, pos + 1);
    }
    return false;
  }

  bool find_table(const std::string& name, Table& out) const {
    const std::string key = "mpc." + name;
    size_t pos = 0;
    while ((pos = text_.find(key, pos)) != std::string::npos) {
      size_t after = pos + key.size();
      // must be followed by '=' then '[' (ignoring whitespace)
      size_t p = text_.find_first_not_of(" \t", after);
      if (p == std::string::npos || text_[p] != '=') {
        pos = after;
        continue;
      }
      p = text_.find_first_not_of(" \t\r\n", p + 1);
      if (p == std::string::npos || text_[p] != '[') {
        pos = after;
        continue;
      }
      size_t end = text_.find("];", p);
      if (end == std::string::npos)
        throw ParseError("unterminated table mpc." + name + " near line " +
                         std::to_string(line_of(pos)));
      parse_rows(text_.substr(p + 1, end - p - 1), line_of(p), name, out);
      return true;
    }
    return false;
  }

 private:
  int line_of(size_t pos) const {
    return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + pos, '\n'));
  }

  static void parse_rows(const std::string& body, int first_line, const std::string& name,
                         Table& out) {
    std::istringstream is(body);
    std::string line;
    int lineno = first_line;
    while (std::getline(is, line)) {
      ++lineno;
      auto cut = line.find('%');
      if (cut != std::string::npos) line.erase(cut);
      for (char& ch : line)
        if (ch == ';' || ch == ',' || ch == '\t') ch = ' ';
      std::istringstream ls(line);
      std::vector<double> row;
      std::string tok;
      while (ls >> tok) {
        try {
          size_t used = 0;
          double v = std::stod(tok, &used);
          if (used != tok.size()) throw std::invalid_argument(tok);
          row.push_back(v);
        } catch (const std::exception&) {
          throw ParseError("malformed value '" + tok + "' in mpc." + name + " at line " +
                           std::to_string(lineno));
        }
      }
      if (!row.empty()) {
        out.rows.push_back(std::move(row));
        out.line_numbers.push_back(lineno);
      }
    }
  }

  const std::string& text_;
};

double col(const std::vector<double>& row, size_t idx, const std::string& table, int lineno) {
  if (idx >= row.size())
    throw ParseError("row in mpc." + table + " at line " + std::to_string(lineno) + " has only " +
                     std::to_string(row.size()) + " columns, need >= " + std::to_string(idx + 1));
  return row[idx];
}

}  // namespace

int NetworkData::bus_index(int original_id) const {
  for (const auto& b : buses)
    if (b.original_id == original_id) return b.id;
  throw ValidationError("unknown bus id " + std::to_string(original_id));
}

const BusRecord& NetworkData::bus_by_original(int original_id) const {
  return buses[static_cast<size_t>(bus_index(original_id))];
}

AdmittanceBlock admittance_block(const BranchRecord& branch) {
  if (branch.r == 0.0 && branch.x == 0.0)
    throw ValidationError("branch " + std::to_string(branch.from_bus) + "-" +
                          std::to_string(branch.to_bus) + " has zero series impedance");
  const std::complex<double> z(branch.r, branch.x);
  const std::complex<double> ys = 1.0 / z;
  const std::complex<double> half_charge(0.0, branch.b_charge / 2.0);
  const std::complex<double> rot = std::polar(1.0, branch.theta_shift);
  AdmittanceBlock y;
  y.ff = (ys + half_charge) / (branch.tau * branch.tau);
  y.ft = -ys / (branch.tau * std::conj(rot));
  y.tf = -ys / (branch.tau * rot);
  y.tt = ys + half_charge;
  return y;
}

NetworkData parse_matpower(const std::string& text) {
  CaseText ct(text);
  NetworkData net;
  if (!ct.find_scalar("baseMVA", net.base_mva))
    throw ParseError("missing mpc.baseMVA");
  if (net.base_mva <= 0) throw ValidationError("baseMVA must be positive");

  Table bus, gen, branch, gencost;
  if (!ct.find_table("bus", bus)) throw ParseError("missing mpc.bus table");
  if (!ct.find_table("gen", gen)) throw ParseError("missing mpc.gen table");
  if (!ct.find_table("branch", branch)) throw ParseError("missing mpc.branch table");
  const bool have_cost = ct.find_table("gencost", gencost);
  if (have_cost && gencost.rows.size() < gen.rows.size())
    throw ParseError("mpc.gencost has fewer rows than mpc.gen");

  const double base = net.base_mva;
  std::unordered_map<int, int> index_of;
  for (size_t i = 0; i < bus.rows.size(); ++i) {
    const auto& row = bus.rows[i];
    const int ln = bus.line_numbers[i];
    BusRecord b;
    b.id = static_cast<int>(i);
    b.original_id = static_cast<int>(col(row, 0, "bus", ln));
    b.p_demand = col(row, 2, "bus", ln) / base;
    b.q_demand = col(row, 3, "bus", ln) / base;
    b.g_shunt = col(row, 4, "bus", ln) / base;
    b.b_shunt = col(row, 5, "bus", ln) / base;
    b.v_max = col(row, 11, "bus", ln);
    b.v_min = col(row, 12, "bus", ln);
    if (!(b.v_min > 0.0) || b.v_min > b.v_max)
      throw ValidationError("bus " + std::to_string(b.original_id) +
                            ": need 0 < v_min <= v_max");
    if (!std::isfinite(b.p_demand) || !std::isfinite(b.q_demand))
      throw ValidationError("bus " + std::to_string(b.original_id) + ": demand not finite");
    if (index_of.count(b.original_id))
      throw ValidationError("duplicate bus id " + std::to_string(b.original_id));
    index_of[b.original_id] = b.id;
    net.buses.push_back(b);
  }

  for (size_t i = 0; i < gen.rows.size(); ++i) {
    const auto& row = gen.rows[i];
    const int ln = gen.line_numbers[i];
    if (col(row, 7, "gen", ln) <= 0) continue;  // out of service
    GeneratorRecord g;
    const int bus_id = static_cast<int>(col(row, 0, "gen", ln));
    auto it = index_of.find(bus_id);
    if (it == index_of.end())
      throw ValidationError("generator at line " + std::to_string(ln) +
                            " references unknown bus " + std::to_string(bus_id));
    g.bus = it->second;
    g.q_max = col(row, 3, "gen", ln) / base;
    g.q_min = col(row, 4, "gen", ln) / base;
    g.p_max = col(row, 8, "gen", ln) / base;
    g.p_min = col(row, 9, "gen", ln) / base;
    if (g.p_min > g.p_max || g.q_min > g.q_max)
      throw ValidationError("generator at bus " + std::to_string(bus_id) +
                            ": inverted capacity bounds");
    if (have_cost) {
      const auto& cr = gencost.rows[i];
      const int cln = gencost.line_numbers[i];
      const int model = static_cast<int>(col(cr, 0, "gencost", cln));
      if (model != 2)
        throw ValidationError("gencost at line " + std::to_string(cln) +
                              ": only polynomial model (2) is supported");
      const int ncost = static_cast<int>(col(cr, 3, "gencost", cln));
      if (ncost == 3) {
        g.c2 = col(cr, 4, "gencost", cln);
        g.c1 = col(cr, 5, "gencost", cln);
        g.c0 = col(cr, 6, "gencost", cln);
      } else if (ncost == 2) {
        g.c1 = col(cr, 4, "gencost", cln);
        g.c0 = col(cr, 5, "gencost", cln);
      } else {
        throw ValidationError("gencost at line " + std::to_string(cln) +
                              ": unsupported polynomial degree");
      }
      if (g.c2 < 0)
        throw ValidationError("gencost at line " + std::to_string(cln) + ": c2 must be >= 0");
    } else {
      g.c1 = 1.0;
      g.c2 = 0.0;
    }
    net.generators.push_back(g);
  }

  for (size_t i = 0; i < branch.rows.size(); ++i) {
    const auto& row = branch.rows[i];
    const int ln = branch.line_numbers[i];
    if (col(row, 10, "branch", ln) <= 0) continue;  // out of service
    BranchRecord br;
    const int f = static_cast<int>(col(row, 0, "branch", ln));
    const int t = static_cast<int>(col(row, 1, "branch", ln));
    auto fi = index_of.find(f), ti = index_of.find(t);
    if (fi == index_of.end() || ti == index_of.end())
      throw ValidationError("branch at line " + std::to_string(ln) + " references unknown bus " +
                            std::to_string(fi == index_of.end() ? f : t));
    br.from_bus = fi->second;
    br.to_bus = ti->second;
    br.r = col(row, 2, "branch", ln);
    br.x = col(row, 3, "branch", ln);
    br.b_charge = col(row, 4, "branch", ln);
    br.s_max = col(row, 5, "branch", ln) / base;
    const double ratio = col(row, 8, "branch", ln);
    br.tau = ratio == 0.0 ? 1.0 : ratio;
    br.theta_shift = col(row, 9, "branch", ln) * kDegToRad;
    double ang_lo = -30.0, ang_hi = 30.0;  // Matpower default when absent
    if (row.size() >= 13) {
      ang_lo = col(row, 11, "branch", ln);
      ang_hi = col(row, 12, "branch", ln);
    }
    br.angle_min = ang_lo * kDegToRad;
    br.angle_max = ang_hi * kDegToRad;
    if (br.tau <= 0)
      throw ValidationError("branch at line " + std::to_string(ln) + ": tap ratio must be > 0");
    if (br.angle_min > br.angle_max)
      throw ValidationError("branch at line " + std::to_string(ln) + ": inverted angle bounds");
    br.admittance = admittance_block(br);
    net.branches.push_back(br);
  }

  const size_t n = net.buses.size();
  net.neighbors.assign(n, {});
  net.lines_from.assign(n, {});
  net.lines_to.assign(n, {});
  net.gens_at.assign(n, {});
  for (size_t l = 0; l < net.branches.size(); ++l) {
    const auto& br = net.branches[l];
    net.lines_from[br.from_bus].push_back(static_cast<int>(l));
    net.lines_to[br.to_bus].push_back(static_cast<int>(l));
    net.neighbors[br.from_bus].push_back(br.to_bus);
    net.neighbors[br.to_bus].push_back(br.from_bus);
  }
  for (auto& adj : net.neighbors) {
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }
  for (size_t gi = 0; gi < net.generators.size(); ++gi)
    net.gens_at[net.generators[gi].bus].push_back(static_cast<int>(gi));
  return net;
}

NetworkData load_case(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open case file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_matpower(ss.str());
}

std::string network_to_json(const NetworkData& net) {
  nlohmann::json j;
  j["base_mva"] = net.base_mva;
  for (const auto& b : net.buses)
    j["buses"].push_back({{"id", b.id},
                          {"original_id", b.original_id},
                          {"v_min", b.v_min},
                          {"v_max", b.v_max},
                          {"p_demand", b.p_demand},
                          {"q_demand", b.q_demand},
                          {"g_shunt", b.g_shunt},
                          {"b_shunt", b.b_shunt}});
  for (const auto& g : net.generators)
    j["generators"].push_back({{"bus", g.bus},
                               {"p_min", g.p_min},
                               {"p_max", g.p_max},
                               {"q_min", g.q_min},
                               {"q_max", g.q_max},
                               {"c0", g.c0},
                               {"c1", g.c1},
                               {"c2", g.c2}});
  for (const auto& br : net.branches)
    j["branches"].push_back({{"from_bus", br.from_bus},
                             {"to_bus", br.to_bus},
                             {"r", br.r},
                             {"x", br.x},
                             {"b_charge", br.b_charge},
                             {"tau", br.tau},
                             {"theta_shift", br.theta_shift},
                             {"s_max", br.s_max},
                             {"angle_min", br.angle_min},
                             {"angle_max", br.angle_max}});
  if (net.buses.empty()) j["buses"] = nlohmann::json::array();
  if (net.generators.empty()) j["generators"] = nlohmann::json::array();
  if (net.branches.empty()) j["branches"] = nlohmann::json::array();
  return j.dump(2);
}

NetworkData network_from_json(const std::string& json_text) {
  const auto j = nlohmann::json::parse(json_text);
  NetworkData net;
  net.base_mva = j.at("base_mva").get<double>();
  for (const auto& e : j.at("buses")) {
    BusRecord b;
    b.id = e.at("id").get<int>();
    b.original_id = e.at("original_id").get<int>();
    b.v_min = e.at("v_min").get<double>();
    b.v_max = e.at("v_max").get<double>();
    b.p_demand = e.at("p_demand").get<double>();
    b.q_demand = e.at("q_demand").get<double>();
    b.g_shunt = e.at("g_shunt").get<double>();
    b.b_shunt = e.at("b_shunt").get<double>();
    net.buses.push_back(b);
  }
  for (const auto& e : j.at("generators")) {
    GeneratorRecord g;
    g.bus = e.at("bus").get<int>();
    g.p_min = e.at("p_min").get<double>();
    g.p_max = e.at("p_max").get<double>();
    g.q_min = e.at("q_min").get<double>();
    g.q_max = e.at("q_max").get<double>();
    g.c0 = e.at("c0").get<double>();
    g.c1 = e.at("c1").get<double>();
    g.c2 = e.at("c2").get<double>();
    net.generators.push_back(g);
  }
  for (const auto& e : j.at("branches")) {
    BranchRecord br;
    br.from_bus = e.at("from_bus").get<int>();
    br.to_bus = e.at("to_bus").get<int>();
    br.r = e.at("r").get<double>();
    br.x = e.at("x").get<double>();
    br.b_charge = e.at("b_charge").get<double>();
    br.tau = e.at("tau").get<double>();
    br.theta_shift = e.at("theta_shift").get<double>();
    br.s_max = e.at("s_max").get<double>();
    br.angle_min = e.at("angle_min").get<double>();
    br.angle_max = e.at("angle_max").get<double>();
    br.admittance = admittance_block(br);
    net.branches.push_back(br);
  }
  const size_t n = net.buses.size();
  net.neighbors.assign(n, {});
  net.lines_from.assign(n, {});
  net.lines_to.assign(n, {});
  net.gens_at.assign(n, {});
  for (size_t l = 0; l < net.branches.size(); ++l) {
    const auto& br = net.branches[l];
    net.lines_from[br.from_bus].push_back(static_cast<int>(l));
    net.lines_to[br.to_bus].push_back(static_cast<int>(l));
    net.neighbors[br.from_bus].push_back(br.to_bus);
    net.neighbors[br.to_bus].push_back(br.from_bus);
  }
  for (auto& adj : net.neighbors) {
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }
  for (size_t gi = 0; gi < net.generators.size(); ++gi)
    net.gens_at[net.generators[gi].bus].push_back(static_cast<int>(gi));
  return net;
}

}  // namespace dpps
