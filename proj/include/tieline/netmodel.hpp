#pragma once

// Per-area DC dispatch models and the tie-line coupling polytope.
//
// Area i is written as  A_x x + A_xi xi + A_y y <= b  with
//   x  = (g, w, d, theta)  over the n internal buses, in p.u.,
//   xi = (W_max, D_min, D_max) over the same buses, in p.u.,
//   y  = boundary-bus angles of every area, slack removed, in radians.
// Rows, in order: internal balance pairs, boundary balance pairs, g upper and
// lower limits, w upper and lower limits, d upper and lower limits, and
// branch flow pairs. Dispatch cost is c0 + c_x'x + c_xi'xi in $/h.

#include <Eigen/Dense>

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <queue>
#include <string>
#include <vector>

#include "tieline/casefile.hpp"
#include "tieline/error.hpp"
#include "tieline/lp.hpp"

namespace tieline {

struct AreaModel {
  int id = 0;
  int n = 0;     // internal buses
  int nbar = 0;  // boundary buses
  int m = 0;     // rows
  std::vector<int> internal_ids;
  std::vector<int> boundary_ids;
  Mat A_x, A_xi, A_y;
  Vec b;
  double c0 = 0.0;
  Vec c_x, c_xi;
  Vec xi_lo, xi_hi;

  int nx() const { return static_cast<int>(A_x.cols()); }    // 4n for assembled areas
  int nxi() const { return static_cast<int>(A_xi.cols()); }  // 3n for assembled areas
  int ydim() const { return static_cast<int>(A_y.cols()); }
};

// Y = { y : G y <= h }.
struct CouplingPolytope {
  int dim = 0;
  Mat G;
  Vec h;
  std::vector<BusRef> coords;  // boundary bus behind each coordinate of y

  bool contains(const Vec& y, double tol) const {
    for (Eigen::Index r = 0; r < G.rows(); ++r) {
      const double scale = std::max(1.0, G.row(r).lpNorm<Eigen::Infinity>());
      if (G.row(r).dot(y) - h(r) > tol * scale) return false;
    }
    return true;
  }
};

struct NetworkModel {
  double base_mva = 100.0;
  std::vector<AreaModel> areas;
  CouplingPolytope coupling;
};

namespace detail {

struct Edge {
  int to;
  double weight;
};

inline std::vector<double> shortest_paths(const std::vector<std::vector<Edge>>& adj, int source) {
  std::vector<double> dist(adj.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[source] = 0.0;
  pq.push({0.0, source});
  while (!pq.empty()) {
    const auto [du, u] = pq.top();
    pq.pop();
    if (du > dist[u]) continue;
    for (const Edge& e : adj[u]) {
      if (du + e.weight < dist[e.to]) {
        dist[e.to] = du + e.weight;
        pq.push({dist[e.to], e.to});
      }
    }
  }
  return dist;
}

}  // namespace detail

inline NetworkModel assemble(const CaseSpec& c) {
  validate(c);
  NetworkModel net;
  net.base_mva = c.base_mva;
  const double base = c.base_mva;

  // Global bus numbering and y coordinates.
  std::map<BusRef, int> global;
  std::vector<BusRef> all_buses;
  std::map<BusRef, int> ycol;
  for (const auto& a : c.areas) {
    for (const auto& bus : a.buses) {
      const BusRef ref{a.id, bus.id};
      global[ref] = static_cast<int>(all_buses.size());
      all_buses.push_back(ref);
      if (bus.kind == BusKind::boundary && !(ref == c.slack)) {
        ycol[ref] = static_cast<int>(net.coupling.coords.size());
        net.coupling.coords.push_back(ref);
      }
    }
  }
  const int ydim = static_cast<int>(net.coupling.coords.size());
  net.coupling.dim = ydim;

  // Angle-difference bound of each line is capacity * reactance in p.u.
  std::vector<std::vector<detail::Edge>> adj(all_buses.size());
  for (const auto& a : c.areas)
    for (const auto& br : a.branches) {
      const int u = global.at({a.id, br.from}), v = global.at({a.id, br.to});
      const double w = br.capacity / base * br.reactance;
      adj[u].push_back({v, w});
      adj[v].push_back({u, w});
    }
  for (const auto& t : c.tielines) {
    const int u = global.at(t.from), v = global.at(t.to);
    const double w = t.capacity / base * t.reactance;
    adj[u].push_back({v, w});
    adj[v].push_back({u, w});
  }

  for (const auto& a : c.areas) {
    AreaModel am;
    am.id = a.id;
    std::map<int, int> local;  // internal bus id -> index
    for (const auto& bus : a.buses) {
      if (bus.kind == BusKind::internal) {
        local[bus.id] = am.n++;
        am.internal_ids.push_back(bus.id);
      } else {
        ++am.nbar;
        am.boundary_ids.push_back(bus.id);
      }
    }
    {
      // Every internal bus needs a path to a boundary bus inside its area.
      std::vector<std::vector<detail::Edge>> area_adj(a.buses.size());
      std::map<int, int> pos;
      for (std::size_t k = 0; k < a.buses.size(); ++k) pos[a.buses[k].id] = static_cast<int>(k);
      for (const auto& br : a.branches) {
        area_adj[pos[br.from]].push_back({pos[br.to], 0.0});
        area_adj[pos[br.to]].push_back({pos[br.from], 0.0});
      }
      std::vector<char> seen(a.buses.size(), 0);
      std::vector<int> stack;
      for (std::size_t k = 0; k < a.buses.size(); ++k)
        if (a.buses[k].kind == BusKind::boundary) {
          seen[k] = 1;
          stack.push_back(static_cast<int>(k));
        }
      while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (const auto& e : area_adj[u])
          if (!seen[e.to]) {
            seen[e.to] = 1;
            stack.push_back(e.to);
          }
      }
      for (std::size_t k = 0; k < a.buses.size(); ++k)
        if (!seen[k])
          throw InputError("disconnected_network", "area " + std::to_string(a.id) + " bus " +
                                                       std::to_string(a.buses[k].id) +
                                                       " has no path to a boundary bus");
    }

    const int n = am.n;
    const int nb = static_cast<int>(a.branches.size());
    am.m = 2 * (n + am.nbar) + 6 * n + 2 * nb;
    am.A_x = Mat::Zero(am.m, 4 * n);
    am.A_xi = Mat::Zero(am.m, 3 * n);
    am.A_y = Mat::Zero(am.m, ydim);
    am.b = Vec::Zero(am.m);
    const int G = 0, W = n, D = 2 * n, TH = 3 * n;

    // Coefficient of a bus angle in a row: internal angles live in x,
    // boundary angles in y (the slack angle is zero and drops out).
    auto add_angle = [&](Eigen::Index row, int area_id, int bus_id, double coef) {
      const AreaSpec* owner = c.find_area(area_id);
      const BusSpec* bus = owner->find_bus(bus_id);
      if (bus->kind == BusKind::internal) {
        am.A_x(row, TH + local.at(bus_id)) += coef;
      } else if (auto it = ycol.find({area_id, bus_id}); it != ycol.end()) {
        am.A_y(row, it->second) += coef;
      }
    };
    // Writes flow_out(bus) into row r: sum over incident lines of
    // (theta_bus - theta_other) / x.
    auto add_flow_out = [&](Eigen::Index r, int bus_id) {
      for (const auto& br : a.branches) {
        if (br.from != bus_id && br.to != bus_id) continue;
        const int other = br.from == bus_id ? br.to : br.from;
        add_angle(r, a.id, bus_id, 1.0 / br.reactance);
        add_angle(r, a.id, other, -1.0 / br.reactance);
      }
      for (const auto& t : c.tielines) {
        BusRef self{a.id, bus_id}, other;
        if (t.from == self) other = t.to;
        else if (t.to == self) other = t.from;
        else continue;
        add_angle(r, a.id, bus_id, 1.0 / t.reactance);
        add_angle(r, other.area, other.bus, -1.0 / t.reactance);
      }
    };

    Eigen::Index row = 0;
    for (int k = 0; k < n; ++k) {
      // flow_out - g - w + d = 0
      add_flow_out(row, am.internal_ids[k]);
      am.A_x(row, G + k) = -1.0;
      am.A_x(row, W + k) = -1.0;
      am.A_x(row, D + k) = 1.0;
      am.A_x.row(row + 1) = -am.A_x.row(row);
      am.A_y.row(row + 1) = -am.A_y.row(row);
      row += 2;
    }
    for (int bus_id : am.boundary_ids) {
      add_flow_out(row, bus_id);
      am.A_x.row(row + 1) = -am.A_x.row(row);
      am.A_y.row(row + 1) = -am.A_y.row(row);
      row += 2;
    }
    am.xi_lo = Vec::Zero(3 * n);
    am.xi_hi = Vec::Zero(3 * n);
    am.c_x = Vec::Zero(4 * n);
    am.c_xi = Vec::Zero(3 * n);
    for (int k = 0; k < n; ++k) {
      const BusSpec& bus = *a.find_bus(am.internal_ids[k]);
      am.A_x(row, G + k) = 1.0;
      am.b(row++) = bus.gen.hi / base;
      am.A_x(row, G + k) = -1.0;
      am.b(row++) = -bus.gen.lo / base;
      am.xi_lo(k) = bus.wind.lo / base;
      am.xi_hi(k) = bus.wind.hi / base;
      am.xi_lo(n + k) = bus.demand_min.lo / base;
      am.xi_hi(n + k) = bus.demand_min.hi / base;
      am.xi_lo(2 * n + k) = bus.demand_max.lo / base;
      am.xi_hi(2 * n + k) = bus.demand_max.hi / base;
      am.c_x(G + k) = base * bus.price_gen;
      am.c_x(W + k) = -base * bus.price_wind;
      am.c_x(D + k) = -base * bus.price_demand;
      am.c_xi(k) = base * bus.price_wind;
      am.c_xi(2 * n + k) = base * bus.price_demand;
    }
    for (int k = 0; k < n; ++k) {
      am.A_x(row, W + k) = 1.0;  // w - W_max <= 0
      am.A_xi(row++, k) = -1.0;
      am.A_x(row++, W + k) = -1.0;  // -w <= 0
    }
    for (int k = 0; k < n; ++k) {
      am.A_x(row, D + k) = 1.0;  // d - D_max <= 0
      am.A_xi(row++, 2 * n + k) = -1.0;
      am.A_x(row, D + k) = -1.0;  // -d + D_min <= 0
      am.A_xi(row++, n + k) = 1.0;
    }
    for (const auto& br : a.branches) {
      add_angle(row, a.id, br.from, 1.0 / br.reactance);
      add_angle(row, a.id, br.to, -1.0 / br.reactance);
      am.b(row) = br.capacity / base;
      am.A_x.row(row + 1) = -am.A_x.row(row);
      am.A_y.row(row + 1) = -am.A_y.row(row);
      am.b(row + 1) = am.b(row);
      row += 2;
    }
    net.areas.push_back(std::move(am));
  }

  // Coupling polytope.
  std::vector<Vec> rows;
  std::vector<double> rhs;
  auto push_pair = [&](const Vec& g, double bound) {
    if (g.lpNorm<Eigen::Infinity>() == 0.0) return;
    rows.push_back(g);
    rhs.push_back(bound);
    rows.push_back(-g);
    rhs.push_back(bound);
  };
  auto unit = [&](const BusRef& r) {
    Vec e = Vec::Zero(ydim);
    if (auto it = ycol.find(r); it != ycol.end()) e(it->second) = 1.0;
    return e;
  };
  for (const auto& t : c.tielines) push_pair((unit(t.from) - unit(t.to)) / t.reactance, t.capacity / base);
  for (const auto& a : c.areas) {
    for (const auto& br : a.branches) {
      const BusSpec& f = *a.find_bus(br.from);
      const BusSpec& t = *a.find_bus(br.to);
      if (f.kind == BusKind::boundary && t.kind == BusKind::boundary)
        push_pair((unit({a.id, br.from}) - unit({a.id, br.to})) / br.reactance, br.capacity / base);
    }
  }
  // Boundary buses of one area cannot differ in angle by more than the
  // weighted capacity of the best path between them inside the area.
  for (const auto& a : c.areas) {
    std::vector<std::vector<detail::Edge>> area_adj(all_buses.size());
    for (const auto& br : a.branches) {
      const int u = global.at({a.id, br.from}), v = global.at({a.id, br.to});
      const double w = br.capacity / base * br.reactance;
      area_adj[u].push_back({v, w});
      area_adj[v].push_back({u, w});
    }
    for (std::size_t i = 0; i < a.buses.size(); ++i) {
      if (a.buses[i].kind != BusKind::boundary) continue;
      const auto dist = detail::shortest_paths(area_adj, global.at({a.id, a.buses[i].id}));
      for (std::size_t j = i + 1; j < a.buses.size(); ++j) {
        if (a.buses[j].kind != BusKind::boundary) continue;
        const double dij = dist[global.at({a.id, a.buses[j].id})];
        if (std::isfinite(dij)) push_pair(unit({a.id, a.buses[i].id}) - unit({a.id, a.buses[j].id}), dij);
      }
    }
  }
  const auto dist = detail::shortest_paths(adj, global.at(c.slack));
  for (int k = 0; k < ydim; ++k) {
    const double dk = dist[global.at(net.coupling.coords[k])];
    if (!std::isfinite(dk))
      throw InputError("disconnected_network", "area " + std::to_string(net.coupling.coords[k].area) + " bus " +
                                                   std::to_string(net.coupling.coords[k].bus) +
                                                   " has no path to the slack bus");
    Vec e = Vec::Zero(ydim);
    e(k) = 1.0;
    rows.push_back(e);
    rhs.push_back(dk);
    rows.push_back(-e);
    rhs.push_back(dk);
  }
  net.coupling.G = Mat(static_cast<Eigen::Index>(rows.size()), ydim);
  net.coupling.h = Vec(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    net.coupling.G.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
    net.coupling.h(static_cast<Eigen::Index>(r)) = rhs[r];
  }
  return net;
}

inline double dispatch_cost(const AreaModel& area, const Vec& x, const Vec& xi) {
  if (x.size() != area.nx() || xi.size() != area.nxi())
    throw InputError("dimension_mismatch", "dispatch_cost: x or xi has the wrong length");
  return area.c0 + area.c_x.dot(x) + area.c_xi.dot(xi);
}

// min c_x'x  s.t.  A_x x <= b - A_xi xi - A_y y
inline LpProblem area_lp(const AreaModel& area, const Vec& y, const Vec& xi) {
  LpProblem p;
  p.c = area.c_x;
  p.A = area.A_x;
  p.b = area.b - area.A_xi * xi - area.A_y * y;
  return p;
}

struct AreaSolution {
  LpSolution lp;
  Vec x;
  double cost = 0.0;  // J_i*(y, xi)
};

inline AreaSolution solve_parametric_point(const AreaModel& area, const Vec& y, const Vec& xi,
                                           const LpOptions& opt = {}) {
  if (y.size() != area.ydim() || xi.size() != area.nxi())
    throw InputError("dimension_mismatch", "solve_parametric_point: y or xi has the wrong length");
  AreaSolution out;
  out.lp = solve(area_lp(area, y, xi), opt);
  if (out.lp.status == LpStatus::infeasible)
    throw SolverError("so_infeasible", "area " + std::to_string(area.id) + " has no feasible dispatch at this y");
  if (!out.lp.optimal())
    throw SolverError("so_unbounded", "area " + std::to_string(area.id) + " dispatch LP is unbounded");
  out.x = out.lp.z;
  out.cost = dispatch_cost(area, out.x, xi);
  return out;
}

// The box vertex at which the feasible dispatch set is smallest: least wind,
// highest demand floor, lowest demand ceiling. Feasibility there implies
// feasibility on the whole box.
inline Vec tightest_xi(const AreaModel& area) {
  Vec xi = area.xi_lo;
  xi.segment(area.n, area.n) = area.xi_hi.segment(area.n, area.n);
  return xi;
}

}  // namespace tieline
