"""Writes the shipped cases into cases/.

Conventions: tie-lines 100 MW at 0.25 p.u.; available wind 15-25 MW where
present; demand ceilings vary between 98% and 102% of nominal, floors are 0;
wind spill is free and unserved demand costs $100/MWh. Buses
next to a boundary bus carry 250 MW of generation and 150 MW of demand so
that each tie can be balanced locally, which keeps every area feasible on
all of the coupling polytope.
"""
import json
import os

OUT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "cases")

def bus(i, gen=None, wind=None, dem=None, pg=0, pd=100, unc=True):
    if gen is None: return {"id": i, "kind": "boundary"}
    b = {"id": i, "kind": "internal", "gen": [0, gen],
         "wind": [15, 25] if wind else 0,
         "demand_min": 0,
         "demand_max": ([round(dem*0.98, 6), round(dem*1.02, 6)] if unc else dem) if dem else 0,
         "price_gen": pg, "price_wind": 0, "price_demand": pd}
    return b
def br(f, t, x, cap):
    return {"from": f, "to": t, "reactance": x, "capacity": cap}
def tie(a1, b1, a2, b2): return {"from": {"area": a1, "bus": b1}, "to": {"area": a2, "bus": b2}, "reactance": 0.25, "capacity": 100}
opts = {"epsilon": 1e-5, "tol_opt": 1e-8, "tol_feas": 1e-8, "tol_v": 1e-7, "big_m": "auto", "big_m_fallback": 1e5,
        "max_outer_iters": 20, "max_iters": 500, "lex_tiebreak": "lexicographic", "seed": 1}

tiny2 = {"base_mva": 100, "areas": [
  {"id": 1, "buses": [bus(1, 150, True, 60, 20), bus(2, 80, False, 90, 45), bus(3)],
   "branches": [br(1, 2, 0.1, 150), br(2, 3, 0.05, 200), br(1, 3, 0.1, 150)]},
  {"id": 2, "buses": [bus(4, 120, False, 100, 35), bus(5, 60, True, 50, 60), bus(6)],
   "branches": [br(4, 5, 0.1, 150), br(4, 6, 0.05, 200), br(5, 6, 0.1, 150)]}],
  "tielines": [tie(1, 3, 2, 6)], "slack": {"area": 1, "bus": 3}, "options": opts}

# Two areas of 8 buses, two boundary buses each, two tie-lines.
a1 = {"id": 1, "buses": [bus(1, 200, True, 70, 18), bus(2, 120, False, 80, 25), bus(3, 90, True, 60, 40),
                         bus(4, 250, False, 150, 55, unc=False), bus(5, 150, False, 50, 30, unc=False), bus(6, 250, False, 150, 48, unc=False),
                         bus(7), bus(8)],
      "branches": [br(1, 2, 0.12, 200), br(2, 3, 0.15, 180), br(3, 4, 0.1, 150), br(4, 5, 0.2, 150),
                   br(5, 6, 0.12, 160), br(1, 6, 0.18, 170), br(2, 5, 0.25, 120),
                   br(4, 7, 0.02, 300), br(6, 8, 0.02, 300), br(7, 8, 0.1, 30)]}
a2 = {"id": 2, "buses": [bus(9, 250, False, 150, 50), bus(10, 180, True, 70, 32), bus(11, 70, False, 80, 65),
                         bus(12, 250, True, 150, 38, unc=False), bus(13, 60, False, 90, 70, unc=False), bus(14, 90, False, 50, 44, unc=False),
                         bus(15), bus(16)],
      "branches": [br(9, 10, 0.1, 200), br(10, 11, 0.14, 180), br(11, 12, 0.12, 150), br(12, 13, 0.2, 160),
                   br(13, 14, 0.15, 150), br(9, 14, 0.22, 170), br(10, 13, 0.3, 120),
                   br(9, 15, 0.02, 300), br(12, 16, 0.02, 300), br(15, 16, 0.1, 30)]}
small2 = {"base_mva": 100, "areas": [a1, a2], "tielines": [tie(1, 7, 2, 15), tie(1, 8, 2, 16)],
          "slack": {"area": 1, "bus": 7}, "options": opts}

# Ring of three areas; each area has two boundary buses, one per neighbour.
def ring_area(aid, base, gens, prices, winds, dems):
    i = base
    buses = [bus(i + k, gens[k], winds[k], dems[k], prices[k], unc=k < 2) for k in range(4)] + [bus(i + 4), bus(i + 5)]
    branches = [br(i, i + 1, 0.1, 180), br(i + 1, i + 2, 0.15, 160), br(i + 2, i + 3, 0.12, 160),
                br(i, i + 3, 0.2, 150), br(i + 1, i + 4, 0.02, 300), br(i + 3, i + 5, 0.02, 300),
                br(i + 4, i + 5, 0.1, 30)]
    return {"id": aid, "buses": buses, "branches": branches}
t1 = ring_area(1, 1, [160, 250, 70, 250], [18, 35, 52, 27], [True, False, False, False], [60, 150, 80, 150])
t2 = ring_area(2, 7, [120, 250, 150, 250], [42, 30, 22, 58], [False, True, False, False], [90, 150, 50, 150])
t3 = ring_area(3, 13, [100, 250, 70, 250], [33, 26, 61, 45], [False, False, True, False], [80, 150, 70, 150])
tri3 = {"base_mva": 100, "areas": [t1, t2, t3],
        "tielines": [tie(1, 6, 2, 11), tie(2, 12, 3, 17), tie(3, 18, 1, 5)],
        "slack": {"area": 1, "bus": 5}, "options": opts}
for name, c in [("tiny2", tiny2), ("small2", small2), ("tri3", tri3)]:
    with open(os.path.join(OUT, f"{name}.json"), "w") as f:
        json.dump(c, f, indent=2); f.write("\n")
