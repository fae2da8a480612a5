#pragma once

// Random multi-area cases for cross-checking, and the check that every area
// can dispatch at every point of the coupling polytope.

#include <algorithm>
#include <string>
#include <vector>

#include "tieline/casefile.hpp"
#include "tieline/error.hpp"
#include "tieline/netmodel.hpp"
#include "tieline/polytope.hpp"
#include "tieline/rng.hpp"

namespace tieline {

// True when each area LP is feasible at every vertex of Y under the box
// vertex with the smallest feasible set. The area feasible set in y is a
// polytope, so the vertices of Y decide it for all of Y.
inline bool feasible_on_coupling(const NetworkModel& net, std::string* why = nullptr) {
  const Polytope Y = remove_redundant(normalized({net.coupling.G, net.coupling.h}));
  const auto verts = enumerate_vertices(Y);
  if (verts.empty()) {
    if (why) *why = "coupling polytope has no vertices";
    return false;
  }
  for (const auto& area : net.areas) {
    const Vec xi = tightest_xi(area);
    for (const Vec& v : verts) {
      if (solve(area_lp(area, v, xi)).status != LpStatus::optimal) {
        if (why) *why = "area " + std::to_string(area.id) + " infeasible at a vertex of Y";
        return false;
      }
    }
  }
  return true;
}

struct GeneratorOptions {
  int min_areas = 2;
  int max_areas = 3;
  int min_internal = 2;
  int max_internal = 5;
  int min_boundary = 1;
  int max_boundary = 2;
  int max_ties = 4;
  int max_uncertain = 0;  // total uncertain coordinates across areas
  int max_ydim = 5;
  int max_attempts = 2000;
  double max_spill_price = 0.0;  // wind spill prices are drawn from [0, this]
};

// Draws cases until one satisfies feasible_on_coupling.
inline int rejected_attempts = 0;

inline CaseSpec random_case(Rng& rng, const GeneratorOptions& g = {}) {
  for (int attempt = 0; attempt < g.max_attempts; ++attempt) {
    CaseSpec c;
    const int n_areas = rng.integer(g.min_areas, g.max_areas);
    int next_bus = 1;
    std::vector<std::vector<int>> boundary(n_areas);
    struct Slot {
      int area, bus, kind;  // kind 0 wind, 1 demand ceiling
    };
    std::vector<Slot> slots;
    for (int a = 0; a < n_areas; ++a) {
      AreaSpec area;
      area.id = a + 1;
      const int nb = rng.integer(g.min_boundary, g.max_boundary);
      const int ni = std::max(nb, rng.integer(g.min_internal, g.max_internal));
      std::vector<int> order;
      for (int k = 0; k < nb; ++k) {
        BusSpec b{.id = next_bus++, .kind = BusKind::boundary};
        boundary[a].push_back(b.id);
        order.push_back(b.id);
        area.buses.push_back(b);
      }
      for (int k = 0; k < ni; ++k) {
        BusSpec b;
        b.id = next_bus++;
        b.kind = BusKind::internal;
        b.gen = {0.0, std::round(rng.uniform(60, 200))};
        const double wind = std::round(rng.uniform(0, 25));
        b.wind = {wind, wind};
        const double dem = std::round(rng.uniform(40, 120));
        b.demand_max = {dem, dem};
        b.price_gen = std::round(rng.uniform(10, 60));
        b.price_demand = std::round(rng.uniform(80, 120));
        if (g.max_spill_price > 0.0) b.price_wind = std::round(rng.uniform(0, g.max_spill_price));
        order.push_back(b.id);
        area.buses.push_back(b);
        slots.push_back({area.id, b.id, 0});
        slots.push_back({area.id, b.id, 1});
      }
      // Each boundary bus hangs off its own internal port bus through a short
      // line, two boundary buses share a direct line, and the internal buses
      // form a random tree plus a chord or two.
      auto branch = [&](int u, int v, double x_lo, double x_hi, double cap_lo, double cap_hi) {
        area.branches.push_back(
            {u, v, std::round(rng.uniform(x_lo, x_hi) * 100) / 100, std::round(rng.uniform(cap_lo, cap_hi))});
      };
      const int first_internal = nb;
      for (int k = 0; k < nb; ++k) branch(order[k], order[first_internal + k], 0.01, 0.03, 250, 350);
      if (nb == 2) branch(order[0], order[1], 0.05, 0.15, 30, 60);
      for (int k = first_internal + 1; k < static_cast<int>(order.size()); ++k)
        branch(order[k], order[rng.integer(first_internal, k - 1)], 0.1, 0.3, 150, 300);
      const int chords = rng.integer(0, 2);
      for (int k = 0; k < chords && ni >= 3; ++k) {
        const int u = rng.integer(first_internal, static_cast<int>(order.size()) - 1);
        const int v = rng.integer(first_internal, static_cast<int>(order.size()) - 1);
        if (u != v) branch(order[u], order[v], 0.1, 0.3, 150, 300);
      }
      c.areas.push_back(std::move(area));
    }
    auto tie = [&](int a, int b) {
      const int u = boundary[a][static_cast<std::size_t>(rng.integer(0, static_cast<int>(boundary[a].size()) - 1))];
      const int v = boundary[b][static_cast<std::size_t>(rng.integer(0, static_cast<int>(boundary[b].size()) - 1))];
      c.tielines.push_back({{a + 1, u}, {b + 1, v}, std::round(rng.uniform(0.15, 0.35) * 100) / 100,
                            std::round(rng.uniform(20, 60))});
    };
    for (int a = 1; a < n_areas; ++a) tie(a, rng.integer(0, a - 1));
    const int extra = rng.integer(0, std::max(0, g.max_ties - (n_areas - 1)));
    for (int k = 0; k < extra; ++k) {
      const int a = rng.integer(0, n_areas - 1);
      int b = rng.integer(0, n_areas - 2);
      if (b >= a) ++b;
      tie(std::min(a, b), std::max(a, b));
    }
    c.slack = {1, boundary[0][0]};

    const int n_unc = rng.integer(0, std::min(g.max_uncertain, static_cast<int>(slots.size())));
    for (int k = 0; k < n_unc; ++k) {
      const auto j = static_cast<std::size_t>(rng.integer(k, static_cast<int>(slots.size()) - 1));
      std::swap(slots[static_cast<std::size_t>(k)], slots[j]);
      const Slot s = slots[static_cast<std::size_t>(k)];
      BusSpec& b = *std::find_if(c.areas[static_cast<std::size_t>(s.area - 1)].buses.begin(),
                                 c.areas[static_cast<std::size_t>(s.area - 1)].buses.end(),
                                 [&](const BusSpec& bus) { return bus.id == s.bus; });
      if (s.kind == 0) {
        b.wind = {15, 25};
      } else {
        const double nominal = b.demand_max.lo;
        b.demand_max = {std::round(0.98 * nominal * 100) / 100, std::round(1.02 * nominal * 100) / 100};
      }
    }
    c.options.seed = static_cast<std::uint64_t>(rng.integer(0, 1 << 30));
    ++rejected_attempts;
    try {
      const NetworkModel net = assemble(c);
      if (net.coupling.dim > g.max_ydim) continue;
      if (!feasible_on_coupling(net)) continue;
    } catch (const InputError&) {
      continue;
    }
    --rejected_attempts;
    return c;
  }
  throw SolverError("generator_exhausted", "no feasible random case within the attempt budget");
}

}  // namespace tieline
