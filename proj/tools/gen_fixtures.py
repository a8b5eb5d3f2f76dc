#!/usr/bin/env python3
"""Writes the bundled study fixtures under data/fixtures/.

Output is deterministic: every synthetic series comes from closed-form
shapes or a seeded random.Random, and numbers are written with repr().
"""

import argparse
import json
import math
import random
from pathlib import Path

HOURS = 8760


def write_csv(path, header, rows):
    with open(path, "w", newline="\n") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(fmt(v) for v in row) + "\n")


def fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        r = repr(v)
        return r[:-2] if r.endswith(".0") else r
    return str(v)


def daily(h, lo, hi):
    """Sinusoid over the day: lo at 00:00 and 12:00, hi at 06:00."""
    return lo + (hi - lo) * 0.5 * (1.0 + math.sin(2.0 * math.pi * (h % 24) / 24.0 * 2.0 - math.pi / 2.0))


class Fixture:
    def __init__(self, name, description):
        self.name = name
        self.description = description
        self.buses = []
        self.lines = []
        self.gens = []
        self.demand = [0.0] * HOURS
        self.shares = {}
        self.res = None  # {gen_id: [factor] * HOURS}
        self.config = {}

    def bus(self, bid, kv=110.0, region="North"):
        self.buses.append((bid, "Bus " + bid, float(kv), region))

    def line(self, lid, f, t, x, summer, winter=None, in_service=True):
        self.lines.append((lid, f, t, float(x), float(summer), float(summer if winter is None else winter), in_service))

    def gen(self, gid, bus, kind="thermal", pmax=200.0, pmin=0.0, srmc=30.0):
        self.gens.append((gid, bus, kind, float(pmax), float(pmin), float(srmc), kind == "thermal"))

    def write(self, root):
        d = root / self.name
        d.mkdir(parents=True, exist_ok=True)
        write_csv(d / "buses.csv", ["id", "name", "voltage_kv", "region"], self.buses)
        write_csv(d / "lines.csv",
                  ["id", "from_bus", "to_bus", "reactance_pu", "rating_summer_mw", "rating_winter_mw", "in_service"],
                  self.lines)
        write_csv(d / "generators.csv", ["id", "bus", "kind", "p_max_mw", "p_min_mw", "srmc", "synchronous"], self.gens)
        write_csv(d / "demand.csv", ["hour", "demand_mw"], [(h, round(v, 6)) for h, v in enumerate(self.demand)])
        write_csv(d / "bus_shares.csv", ["bus", "share"], sorted(self.shares.items(), key=lambda kv: kv[0]))
        cfg = {
            "scenario": self.name,
            "network": {"buses": "buses.csv", "lines": "lines.csv", "generators": "generators.csv"},
            "demand": "demand.csv",
            "bus_shares": "bus_shares.csv",
        }
        if self.res is not None:
            ids = sorted(self.res)
            rows = [[h] + [round(self.res[g][h], 6) for g in ids] for h in range(HOURS)]
            write_csv(d / "res_availability.csv", ["hour"] + ids, rows)
            cfg["res_availability"] = "res_availability.csv"
        cfg.update(self.config)
        with open(d / "study.json", "w") as f:
            json.dump(cfg, f, indent=2)
            f.write("\n")
        with open(d / "README.txt", "w") as f:
            f.write(self.description.strip() + "\n")


def triangle(name="triangle", rating_13=150.0, description=None):
    fx = Fixture(name, description or """
Three buses, all reactances 1.0 pu, 90 MW carried from bus 1 to bus 3 in
every hour. Intact flows: 1-3 60 MW, 1-2 and 2-3 30 MW. Line 1-2 is rated
85 MW with no derate, so losing 1-3 loads it to 90/85 = 105.9%. After that
outage 1-2 is a bridge, so no series device can help it.
""")
    fx.bus("1", region="North")
    fx.bus("2", region="North")
    fx.bus("3", region="South")
    fx.line("L1-3", "1", "3", 1.0, rating_13)
    fx.line("L1-2", "1", "2", 1.0, 85.0)
    fx.line("L2-3", "2", "3", 1.0, 150.0)
    fx.gen("G1", "1", pmax=200.0, srmc=30.0)
    fx.demand = [90.0] * HOURS
    fx.shares = {"1": 0.0, "2": 0.0, "3": 1.0}
    fx.config = {"slack_bus": "3", "rating_derate": 0.0}
    return fx


def figure4():
    fx = Fixture("figure4", """
Two parallel paths (via bus 2 and via bus 4) beside the direct line 1-3.
Demand at bus 3 swings 80..100 MW daily. Under any single path outage
line 1-3 carries 2/3 of the demand and exceeds its 63 MW effective rating
above 94.5 MW; a reactance increase of about 17.5% on 1-3 clears every
case without overloading the remaining path.
""")
    for b in "1234":
        fx.bus(b)
    fx.line("L1-3", "1", "3", 0.1, 70.0)
    fx.line("L1-2", "1", "2", 0.1, 80.0)
    fx.line("L2-3", "2", "3", 0.1, 80.0)
    fx.line("L1-4", "1", "4", 0.1, 80.0)
    fx.line("L4-3", "4", "3", 0.1, 80.0)
    fx.gen("G1", "1", pmax=200.0, srmc=30.0)
    fx.demand = [daily(h, 80.0, 100.0) for h in range(HOURS)]
    fx.shares = {"1": 0.0, "2": 0.0, "3": 1.0, "4": 0.0}
    return fx


def figure5():
    fx = Fixture("figure5", """
Double circuit 1-2 (L1-2 rated 63 MW effective, L1-2b 90 MW) with a
parallel path 1-3-2 and a radial spur 3-4. Losing L1-2b overloads L1-2.
Pushing flow off L1-2 loads L1-3, which also feeds bus 4, past its
43.2 MW effective rating, so the device creates a new overload at peak.
""")
    for b in "1234":
        fx.bus(b, region="East" if b in "34" else "West")
    fx.line("L1-2", "1", "2", 0.1, 70.0)
    fx.line("L1-2b", "1", "2", 0.1, 100.0)
    fx.line("L1-3", "1", "3", 0.1, 48.0)
    fx.line("L3-2", "3", "2", 0.1, 60.0)
    fx.line("L3-4", "3", "4", 0.1, 10.5)
    fx.gen("G1", "1", pmax=200.0, srmc=30.0)
    fx.demand = [daily(h, 98.1, 109.0) for h in range(HOURS)]
    fx.shares = {"1": 0.0, "2": 100.0 / 109.0, "3": 0.0, "4": 9.0 / 109.0}
    return fx


def figure6():
    fx = Fixture("figure6", """
Triangle with line 1-2 rated 90 MW effective. Losing 1-3 leaves 1-2 as the
only route out of bus 1, carrying the whole 90..100 MW demand; with no
parallel path no reactance change can relieve it.
""")
    for b in "123":
        fx.bus(b)
    fx.line("L1-2", "1", "2", 0.1, 100.0)
    fx.line("L1-3", "1", "3", 0.1, 200.0)
    fx.line("L2-3", "2", "3", 0.1, 200.0)
    fx.gen("G1", "1", pmax=200.0, srmc=30.0)
    fx.demand = [daily(h, 90.0, 100.0) for h in range(HOURS)]
    fx.shares = {"1": 0.0, "2": 0.4, "3": 0.6}
    return fx


def radial2():
    fx = Fixture("radial2", """
Two buses and one line with ample rating: no overloads anywhere.
""")
    fx.bus("A")
    fx.bus("B")
    fx.line("LAB", "A", "B", 0.2, 200.0)
    fx.gen("GA", "A", pmax=100.0, srmc=10.0)
    fx.demand = [daily(h, 30.0, 60.0) for h in range(HOURS)]
    fx.shares = {"A": 0.0, "B": 1.0}
    return fx


def capacity_short():
    fx = triangle("capacity_short", description="""
The triangle with demand swinging 80..110 MW against 100 MW of generation:
the daily peak hours cannot be served.
""")
    fx.gens = []
    fx.gen("G1", "1", pmax=100.0, srmc=30.0)
    fx.demand = [daily(h, 80.0, 110.0) for h in range(HOURS)]
    return fx


def mesh6():
    fx = Fixture("mesh6", """
Six-bus meshed textbook network with three generators (one wind) and
loads at buses 4, 5 and 6.
""")
    for b in "123456":
        fx.bus(b, region="North" if b in "123" else "South")
    branches = [("1", "2", 0.2), ("1", "4", 0.2), ("1", "5", 0.3), ("2", "3", 0.25), ("2", "4", 0.1),
                ("2", "5", 0.3), ("2", "6", 0.2), ("3", "5", 0.26), ("3", "6", 0.1), ("4", "5", 0.4),
                ("5", "6", 0.3)]
    ratings = [40, 60, 40, 20, 60, 20, 30, 20, 60, 20, 20]
    for (f, t, x), r in zip(branches, ratings):
        fx.line(f"L{f}-{t}", f, t, x, r * 0.95, r * 1.05)
    fx.gen("G1", "1", pmax=200.0, pmin=20.0, srmc=20.0)
    fx.gen("G2", "2", pmax=150.0, pmin=10.0, srmc=25.0)
    fx.gen("W3", "3", kind="wind", pmax=120.0)
    rng = random.Random(6)
    fx.demand = [210.0 * (0.75 + 0.2 * math.sin(2 * math.pi * ((h % 24) - 8) / 24) ** 2 + 0.05 * rng.random())
                 for h in range(HOURS)]
    fx.shares = {"1": 0.0, "2": 0.0, "3": 0.0, "4": 1 / 3, "5": 1 / 3, "6": 1 / 3}
    fx.res = {"W3": [min(1.0, max(0.0, 0.4 + 0.3 * math.sin(2 * math.pi * h / 170.0) + 0.2 * (rng.random() - 0.5)))
                     for h in range(HOURS)]}
    fx.config = {"snsp_cap": 0.5}
    return fx


# Ratings start from the usual rateA data and are raised where the synthetic
# year's peak intact flow would exceed 65% of the nominal rating.
CASE30_BRANCHES = [
    ("1", "2", 0.0575, 220), ("1", "3", 0.1652, 130), ("2", "4", 0.1737, 70), ("3", "4", 0.0379, 130),
    ("2", "5", 0.1983, 130), ("2", "6", 0.1763, 95), ("4", "6", 0.0414, 110), ("5", "7", 0.1160, 70),
    ("6", "7", 0.0820, 130), ("6", "8", 0.0420, 50), ("6", "9", 0.2080, 65), ("6", "10", 0.5560, 32),
    ("9", "11", 0.2080, 65), ("9", "10", 0.1100, 65), ("4", "12", 0.2560, 65), ("12", "13", 0.1400, 65),
    ("12", "14", 0.2559, 32), ("12", "15", 0.1304, 32), ("12", "16", 0.1987, 32), ("14", "15", 0.1997, 16),
    ("16", "17", 0.1923, 16), ("15", "18", 0.2185, 20), ("18", "19", 0.1292, 16), ("19", "20", 0.0680, 32),
    ("10", "20", 0.2090, 32), ("10", "17", 0.0845, 32), ("10", "21", 0.0749, 32), ("10", "22", 0.1499, 32),
    ("21", "22", 0.0236, 45), ("15", "23", 0.2020, 16), ("22", "24", 0.1790, 16), ("23", "24", 0.2700, 16),
    ("24", "25", 0.3292, 30), ("25", "26", 0.3800, 16), ("25", "27", 0.2087, 35), ("28", "27", 0.3960, 65),
    ("27", "29", 0.4153, 16), ("27", "30", 0.6027, 16), ("29", "30", 0.4533, 16), ("8", "28", 0.2000, 32),
    ("6", "28", 0.0599, 32),
]

CASE30_LOAD = {2: 21.7, 3: 2.4, 4: 7.6, 5: 94.2, 7: 22.8, 8: 30.0, 10: 5.8, 12: 11.2, 14: 6.2, 15: 8.2,
               16: 3.5, 17: 9.0, 18: 3.2, 19: 9.5, 20: 2.2, 21: 17.5, 23: 3.2, 24: 8.7, 26: 3.5, 29: 2.4,
               30: 10.6}


def case30():
    fx = Fixture("case30", """
IEEE 30-bus topology (41 branches, reactances after the common MATPOWER
data, ratings raised where the synthetic year needs it) with a synthetic year: daily and seasonal demand
shape around the 283.4 MW base load, two wind farms and one solar park.
Buses 1-8 and 28 are 220 kV, the rest 110 kV. Contains three bridges.
""")
    regions = {}
    for b in (1, 2, 3, 4, 5, 6, 7, 8, 28):
        regions[b] = "North"
    for b in (9, 10, 11, 17, 20, 21, 22):
        regions[b] = "Central"
    for b in (12, 13, 14, 15, 16, 18, 19, 23):
        regions[b] = "South"
    for b in (24, 25, 26, 27, 29, 30):
        regions[b] = "West"
    for b in range(1, 31):
        fx.bus(str(b), kv=220.0 if b <= 8 or b == 28 else 110.0, region=regions[b])
    for i, (f, t, x, rate) in enumerate(CASE30_BRANCHES):
        fx.line(f"B{i + 1:02d}", f, t, x, rate * 0.9, float(rate))
    fx.gen("G1", "1", pmax=200.0, pmin=40.0, srmc=20.0)
    fx.gen("G2", "2", pmax=80.0, pmin=10.0, srmc=25.0)
    fx.gen("G5", "5", pmax=50.0, pmin=5.0, srmc=40.0)
    fx.gen("G8", "8", pmax=35.0, pmin=5.0, srmc=35.0)
    fx.gen("G11", "11", pmax=30.0, pmin=5.0, srmc=30.0)
    fx.gen("G13", "13", pmax=40.0, pmin=5.0, srmc=32.0)
    fx.gen("W22", "22", kind="wind", pmax=40.0)
    fx.gen("W27", "27", kind="wind", pmax=60.0)
    fx.gen("S15", "15", kind="solar", pmax=30.0)
    total = sum(CASE30_LOAD.values())
    fx.shares = {str(b): CASE30_LOAD.get(b, 0.0) / total for b in range(1, 31)}
    rng = random.Random(30)
    demand, w22, w27, s15 = [], [], [], []
    for h in range(HOURS):
        day = h // 24
        seasonal = 0.1 * math.cos(2 * math.pi * day / 365.0)
        shape = 0.78 + 0.2 * math.sin(math.pi * max(0, (h % 24) - 6) / 16.0) + seasonal + 0.03 * rng.random()
        demand.append(total * shape)
        wind = 0.45 + 0.3 * math.sin(2 * math.pi * h / 190.0) + 0.25 * (rng.random() - 0.5)
        w22.append(min(1.0, max(0.0, wind)))
        w27.append(min(1.0, max(0.0, wind * 0.9 + 0.1 * rng.random())))
        sun = max(0.0, math.sin(math.pi * ((h % 24) - 6) / 12.0)) * (0.75 - seasonal * 2.0)
        s15.append(min(1.0, max(0.0, sun)))
    fx.demand = demand
    fx.res = {"W22": w22, "W27": w27, "S15": s15}
    fx.config = {"voltage_levels_kv": [110, 220]}
    return fx


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data" / "fixtures")
    args = ap.parse_args()
    fixtures = [triangle(), triangle("triangle_r50", rating_13=50.0, description="""
The triangle with line 1-3 rated 50 MW: its intact 60 MW flow is an
overload that a 40% reactance increase cannot clear (52.9 MW) but a 100%
increase can (45 MW).
"""), figure4(), figure5(), figure6(), radial2(), capacity_short(), mesh6(), case30()]
    for fx in fixtures:
        fx.write(args.out)
        print(f"wrote {args.out / fx.name}")


if __name__ == "__main__":
    main()
