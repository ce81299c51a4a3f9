"""Stored initial conditions for the four benchmark scenarios.

The source experiments used unpublished random initial positions, so each
preset stores explicit coordinates generated once with the documented
seeded recipe, scaled to hit the regime-membership target within 1%, and
rounded to 12 decimals.  N = 10 agents on the line throughout.

- ``bh10``: black hole.  a(s) = 1/s^2, M = 0.16, entropy control.
  Base: gaps drawn uniform[0.8, 1.2] from PCG64 seed 1001, scaled so
  V(0) = 0.85 * V* with V* = 1/(2 N^2 M^2); the entropy descends over a
  dozen recorded steps before the run collapses to the clustering set,
  well inside the extinction-time bound.
- ``sz10``: safety region.  Same kernel and budget.  Base: seed 1002,
  scaled so N^2 sqrt(-2 W_g(0)) = M / 1.1 (10% inside the safety
  membership test); the entropy control keeps W_g non-decreasing.
- ``ba10``: basin of attraction.  a(s) = 1/sqrt(s), M = 1.  Gaps drawn
  uniform[1.05, 1.8] from seed 1003, so the initial min distance exceeds
  the basin radius 1; the min distance crosses 1 in finite time anyway.
- ``cp10``: collapse prevention.  Same kernel and budget; danger radius
  delta = (M/(2N))^2.  One pair at distance delta/2 plus eight agents at
  gaps uniform[160, 200] from seed 42 starting at 100, wide enough that
  the danger set stays that single pair over the 50-time-unit horizon
  (the sample-and-hold control resolves one danger pair per step at
  dt = 0.01; see README on resolution near the clustering set).
"""

from __future__ import annotations

BH10_POSITIONS = [
    0.0,
    0.225602949711,
    0.39966283412,
    0.588574332111,
    0.835359021716,
    1.014643047324,
    1.204711720541,
    1.4318263555,
    1.613041515301,
    1.798888795615,
]

SZ10_POSITIONS = [
    1396.21221668,
    2184.63370052,
    3933.95171431,
    4168.008366723,
    4443.765845029,
    4544.944113354,
    4699.068622091,
    6475.011423378,
    8723.816933964,
    9805.962077936,
]

BA10_POSITIONS = [
    0.0,
    1.526979077276,
    3.068302531568,
    4.384717114703,
    5.693352874761,
    6.984732347537,
    8.385606180552,
    9.57661700712,
    11.300347571396,
    12.491164440007,
]

CP10_POSITIONS = [
    0.0,
    0.00125,
    290.958241942239,
    468.513379532321,
    662.857296328776,
    850.75201749115,
    1014.519111406656,
    1213.544005472127,
    1403.989593551741,
    1595.432165762819,
]

#: Full scenario definitions, consumed by bench.preset_scenario().
PRESETS = {
    "bh10": {
        "positions": BH10_POSITIONS,
        "kernel": {"family": "power", "p": -2.0},
        "generator": {"family": "inverse"},
        "control": {"policy": "entropy_max", "M": 0.16},
        "integrator": {"dt": 0.01, "t_final": 40.0},
    },
    "sz10": {
        "positions": SZ10_POSITIONS,
        "kernel": {"family": "power", "p": -2.0},
        "generator": {"family": "inverse"},
        "control": {"policy": "entropy_max", "M": 0.16},
        "integrator": {"dt": 0.01, "t_final": 50.0},
    },
    "ba10": {
        "positions": BA10_POSITIONS,
        "kernel": {"family": "power", "p": -0.5},
        "generator": {"family": "inverse"},
        "control": {"policy": "entropy_max", "M": 1.0},
        "integrator": {"dt": 0.01, "t_final": 50.0},
    },
    "cp10": {
        "positions": CP10_POSITIONS,
        "kernel": {"family": "power", "p": -0.5},
        "generator": {"family": "shifted_inverse", "delta": 0.0025000000000000005},
        "control": {"policy": "partial_entropy_max", "M": 1.0, "delta": 0.0025000000000000005},
        "integrator": {"dt": 0.01, "t_final": 50.0},
    },
}
