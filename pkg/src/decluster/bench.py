"""Scenario-driven experiment harness.

A scenario is a strict JSON document (unknown keys rejected) that pins
everything needed to reproduce a run: seed, mode, kernel, generator,
control, integrator settings, and the initial condition.  ``run`` writes
three artifacts into the output directory:

- ``series.csv``  - columns t, V, W_g, min_dist, active_index, n_effective
- ``positions.csv`` - per-original-agent trajectories (for the figure
  tooling), one block of d columns per agent, plus the controlled agent
- ``summary.json`` - regime report, clustering time, final functionals,
  event log

Outputs are byte-deterministic for a fixed scenario: the PRNG is numpy's
PCG64 seeded from the scenario seed, floats are serialized as their
shortest round-trip decimals, and files are written atomically.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import presets as _presets
from .controls import ControlPolicy
from .core import (
    Configuration,
    ConfigError,
    EntropyGenerator,
    InteractionKernel,
    SchemaError,
    constant_kernel,
    inverse_generator,
    power_kernel,
    shifted_inverse_generator,
    shifted_kernel,
    step_kernel,
)
from .dynamics import IntegratorSettings, MergeEvent, Trajectory, simulate
from .kinetic import (
    KineticTrajectory,
    ParticleEnsemble,
    kinetic_control_uV,
    kinetic_control_uW,
    simulate_kinetic,
)
from .regimes import basin_radius, classify_kernel, classify_state

_KERNEL_KEYS = {"power": {"p"}, "constant": {"c"}, "shifted": set(), "step": {"r"}}
_GENERATOR_KEYS = {"inverse": set(), "shifted_inverse": {"delta"}}
_POLICIES = {"zero", "variance_max", "entropy_max", "partial_entropy_max", "random_feasible"}
_INTEGRATOR_KEYS = {"dt", "t_final", "merge_tol", "rhs_cap", "max_halvings", "record_every"}

SERIES_COLUMNS = ["t", "V", "W_g", "min_dist", "active_index", "n_effective"]


def _require_keys(d: dict, required: set, optional: set, where: str) -> None:
    keys = set(d)
    unknown = keys - required - optional
    if unknown:
        raise SchemaError(f"unknown keys {sorted(unknown)} in {where}")
    missing = required - keys
    if missing:
        raise SchemaError(f"missing keys {sorted(missing)} in {where}")


@dataclass(frozen=True)
class Scenario:
    """Validated, normalized scenario; ``to_dict`` round-trips exactly."""

    seed: int
    mode: str
    n: int
    d: int
    kernel: dict
    generator: dict
    control: dict
    integrator: dict
    initial: dict
    outputs: str = "out"

    def __post_init__(self):
        if not isinstance(self.seed, int) or not (0 <= self.seed < 2**64):
            raise SchemaError("seed must be an integer in [0, 2^64)")
        if self.mode not in ("micro", "kinetic"):
            raise SchemaError(f"mode must be micro or kinetic, got {self.mode!r}")
        if not (isinstance(self.n, int) and self.n >= 2):
            raise SchemaError("n must be an integer >= 2")
        if not (isinstance(self.d, int) and self.d >= 1):
            raise SchemaError("d must be an integer >= 1")

        fam = self.kernel.get("family")
        if fam not in _KERNEL_KEYS:
            raise SchemaError(f"unknown kernel family {fam!r}")
        _require_keys(self.kernel, {"family"} | _KERNEL_KEYS[fam], set(), "kernel")

        gfam = self.generator.get("family")
        if gfam not in _GENERATOR_KEYS:
            raise SchemaError(f"unknown generator family {gfam!r}")
        _require_keys(self.generator, {"family"} | _GENERATOR_KEYS[gfam], set(), "generator")

        pol = self.control.get("policy")
        if pol not in _POLICIES:
            raise SchemaError(f"unknown policy {pol!r}")
        optional = {"M", "delta", "c", "seed"}
        _require_keys(self.control, {"policy"}, optional, "control")
        if pol != "zero" and "M" not in self.control:
            raise SchemaError(f"policy {pol!r} requires M")
        if pol == "partial_entropy_max" and "delta" not in self.control:
            raise SchemaError("partial_entropy_max requires delta")
        if self.mode == "kinetic" and pol in ("variance_max", "entropy_max") and "c" not in self.control:
            raise SchemaError("kinetic score controls require the volume budget c")

        _require_keys(self.integrator, set(), _INTEGRATOR_KEYS, "integrator")

        kind = self.initial.get("kind")
        if kind == "explicit":
            _require_keys(self.initial, {"kind", "positions"}, set(), "initial")
            pos = self.initial["positions"]
            if len(pos) != self.n or any(len(row) != self.d for row in pos):
                raise SchemaError("explicit positions must be an n x d array")
        elif kind == "uniform_box":
            _require_keys(self.initial, {"kind", "lo", "hi"}, set(), "initial")
            if not self.initial["lo"] < self.initial["hi"]:
                raise SchemaError("uniform_box requires lo < hi")
        elif kind == "preset":
            _require_keys(self.initial, {"kind", "name"}, set(), "initial")
            if self.initial["name"] not in _presets.PRESETS:
                raise SchemaError(f"unknown preset {self.initial['name']!r}")
        else:
            raise SchemaError(f"unknown initial kind {kind!r}")
        if not isinstance(self.outputs, str):
            raise SchemaError("outputs must be a path string")

    # -- construction -----------------------------------------------------

    @staticmethod
    def from_dict(data: dict) -> "Scenario":
        if not isinstance(data, dict):
            raise SchemaError("scenario must be a JSON object")
        required = {"seed", "mode", "n", "d", "kernel", "generator", "control", "integrator", "initial"}
        _require_keys(data, required, {"outputs"}, "scenario")
        init = dict(data["initial"])
        if init.get("kind") == "explicit":
            pos = init.get("positions")
            if isinstance(pos, list) and pos and not isinstance(pos[0], list):
                init["positions"] = [[float(x)] for x in pos]
            else:
                init["positions"] = [[float(x) for x in row] for row in pos]
        return Scenario(
            seed=data["seed"],
            mode=data["mode"],
            n=data["n"],
            d=data["d"],
            kernel=dict(data["kernel"]),
            generator=dict(data["generator"]),
            control=dict(data["control"]),
            integrator=dict(data["integrator"]),
            initial=init,
            outputs=data.get("outputs", "out"),
        )

    @staticmethod
    def from_json(text: str) -> "Scenario":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON: {exc}") from exc
        return Scenario.from_dict(data)

    @staticmethod
    def load(path: str) -> "Scenario":
        with open(path, "r", encoding="utf-8") as fh:
            return Scenario.from_json(fh.read())

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "mode": self.mode,
            "n": self.n,
            "d": self.d,
            "kernel": dict(self.kernel),
            "generator": dict(self.generator),
            "control": dict(self.control),
            "integrator": dict(self.integrator),
            "initial": dict(self.initial),
            "outputs": self.outputs,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def replace(self, **updates) -> "Scenario":
        data = self.to_dict()
        data.update(updates)
        return Scenario.from_dict(data)

    # -- builders ----------------------------------------------------------

    def build_kernel(self) -> InteractionKernel:
        fam = self.kernel["family"]
        if fam == "power":
            return power_kernel(self.kernel["p"])
        if fam == "constant":
            return constant_kernel(self.kernel["c"])
        if fam == "shifted":
            return shifted_kernel()
        return step_kernel(self.kernel["r"])

    def build_generator(self) -> EntropyGenerator:
        if self.generator["family"] == "inverse":
            return inverse_generator()
        return shifted_inverse_generator(self.generator["delta"])

    def build_policy(self) -> ControlPolicy:
        pol = self.control["policy"]
        M = float(self.control.get("M", 0.0))
        if pol == "zero":
            return ControlPolicy(tag="zero")
        if pol == "variance_max":
            return ControlPolicy(tag="variance_max", M=M)
        if pol == "entropy_max":
            return ControlPolicy(tag="entropy_max", M=M, g=self.build_generator())
        if pol == "partial_entropy_max":
            delta = float(self.control["delta"])
            return ControlPolicy(
                tag="partial_entropy_max",
                M=M,
                g=shifted_inverse_generator(delta),
                delta=delta,
            )
        return ControlPolicy(
            tag="random_feasible", M=M, seed=int(self.control.get("seed", self.seed))
        )

    def build_settings(self) -> IntegratorSettings:
        return IntegratorSettings(**self.integrator)

    def build_positions(self) -> np.ndarray:
        kind = self.initial["kind"]
        if kind == "explicit":
            return np.asarray(self.initial["positions"], dtype=float)
        if kind == "preset":
            pos = np.asarray(_presets.PRESETS[self.initial["name"]]["positions"], dtype=float)
            pos = pos.reshape(-1, 1)
            if pos.shape != (self.n, self.d):
                raise ConfigError(
                    f"preset {self.initial['name']} is {pos.shape[0]} agents in 1-d; "
                    f"scenario declares n={self.n}, d={self.d}"
                )
            return pos
        rng = np.random.default_rng(self.seed)
        lo, hi = float(self.initial["lo"]), float(self.initial["hi"])
        return lo + (hi - lo) * rng.random((self.n, self.d))


def preset_scenario(name: str, outputs: str = "out") -> Scenario:
    """Full scenario for one of the stored benchmark presets."""
    if name not in _presets.PRESETS:
        raise SchemaError(f"unknown preset {name!r}")
    spec = _presets.PRESETS[name]
    positions = [[float(x)] for x in spec["positions"]]
    return Scenario.from_dict(
        {
            "seed": 0,
            "mode": "micro",
            "n": len(positions),
            "d": 1,
            "kernel": dict(spec["kernel"]),
            "generator": dict(spec["generator"]),
            "control": dict(spec["control"]),
            "integrator": dict(spec["integrator"]),
            "initial": {"kind": "explicit", "positions": positions},
            "outputs": outputs,
        }
    )


# ---------------------------------------------------------------------------
# Running
# ---------------------------------------------------------------------------


def _fmt(x) -> str:
    return repr(float(x))


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _series_csv(traj) -> str:
    lines = [",".join(SERIES_COLUMNS)]
    for k in range(len(traj.times)):
        n_eff = (
            traj.configurations[k].n_effective
            if isinstance(traj, Trajectory)
            else traj.ensembles[k].size
        )
        lines.append(
            ",".join(
                [
                    _fmt(traj.times[k]),
                    _fmt(traj.variance[k]),
                    _fmt(traj.entropy[k]),
                    _fmt(traj.min_dist[k]),
                    str(int(traj.active_index[k])),
                    str(int(n_eff)),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def _group_history(n: int, traj) -> list[list[list[int]]]:
    """Original-agent membership of each current agent, per record."""
    groups = [[i] for i in range(n)]
    merges = list(traj.merge_events)
    applied = 0
    history = []
    counts = (
        [c.n_effective for c in traj.configurations]
        if isinstance(traj, Trajectory)
        else [e.size for e in traj.ensembles]
    )
    for n_eff in counts:
        while len(groups) > n_eff and applied < len(merges):
            i, j = merges[applied].indices
            groups[i] = sorted(groups[i] + groups[j])
            del groups[j]
            applied += 1
        history.append([list(g) for g in groups])
    return history


def _positions_csv(scenario: Scenario, traj) -> str:
    n, d = scenario.n, scenario.d
    header = ["t"]
    for o in range(n):
        if d == 1:
            header.append(f"x{o}")
        else:
            header.extend(f"x{o}_{k}" for k in range(d))
    header.append("active_agent")
    lines = [",".join(header)]
    history = _group_history(n, traj)
    snaps = traj.configurations if isinstance(traj, Trajectory) else traj.ensembles
    for k in range(len(traj.times)):
        groups = history[k]
        owner = {}
        for cur, members in enumerate(groups):
            for o in members:
                owner[o] = cur
        pos = snaps[k].positions
        row = [_fmt(traj.times[k])]
        for o in range(n):
            row.extend(_fmt(v) for v in pos[owner[o]])
        act = int(traj.active_index[k])
        row.append(str(min(groups[act]) if act >= 0 else -1))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _event_dicts(events) -> list[dict]:
    out = []
    for e in events:
        entry = {"time": float(e.time), "kind": e.kind}
        if isinstance(e, MergeEvent):
            entry["indices"] = list(e.indices)
        out.append(entry)
    return out


def run(scenario: Scenario, out_dir: Optional[str] = None) -> tuple[dict, dict]:
    """Execute the scenario; returns ({artifact: path}, summary dict)."""
    out_dir = out_dir or scenario.outputs
    kernel = scenario.build_kernel()
    generator = scenario.build_generator()
    settings = scenario.build_settings()
    positions = scenario.build_positions()
    M = float(scenario.control.get("M", 0.0))

    if scenario.mode == "micro":
        c0 = Configuration(positions)
        policy = scenario.build_policy()
        traj = simulate(c0, kernel, policy, settings, entropy_generator=generator)
        regime = classify_state(c0, kernel, generator, M).to_dict() if M > 0 else {
            "kernel_cell": list(classify_kernel(kernel)),
            "label": "uncontrolled",
        }
    else:
        e0 = ParticleEnsemble(positions)
        pol = scenario.control["policy"]
        if pol == "zero":
            control = None
        elif pol == "variance_max":
            c_budget = float(scenario.control["c"])
            control = lambda e: kinetic_control_uV(e, M, c_budget)
        elif pol == "entropy_max":
            c_budget = float(scenario.control["c"])
            control = lambda e: kinetic_control_uW(e, generator, M, c_budget)
        else:
            raise ConfigError(f"policy {pol!r} is not available in kinetic mode")
        traj = simulate_kinetic(e0, kernel, control, settings, entropy_generator=generator)
        regime = {"kernel_cell": list(classify_kernel(kernel)), "label": "kinetic"}

    summary = {
        "regime": regime,
        "clustering_time": traj.clustering_time,
        "final_V": float(traj.variance[-1]),
        "final_Wg": float(traj.entropy[-1]),
        "min_dist_min": float(np.min(traj.min_dist)),
        "events": _event_dicts(traj.events),
    }

    paths = {
        "series": os.path.join(out_dir, "series.csv"),
        "positions": os.path.join(out_dir, "positions.csv"),
        "summary": os.path.join(out_dir, "summary.json"),
    }
    _atomic_write(paths["series"], _series_csv(traj))
    _atomic_write(paths["positions"], _positions_csv(scenario, traj))
    _atomic_write(paths["summary"], json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return paths, summary


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

SWEEP_AXES = ("M", "seed", "V0-scale")
GRID_COLUMNS = ["axis", "value", "outcome", "clustering_time", "final_V", "final_Wg", "min_dist_min"]


def _derive(scenario: Scenario, axis: str, value: float) -> Scenario:
    if axis == "M":
        control = dict(scenario.control)
        control["M"] = float(value)
        return scenario.replace(control=control)
    if axis == "seed":
        return scenario.replace(seed=int(value))
    # V0-scale: multiply the variance by `value` by scaling positions about
    # the barycenter with sqrt(value); stored explicitly so the derived
    # scenario is itself reproducible.
    pos = scenario.build_positions()
    center = pos.mean(axis=0)
    scaled = center + math.sqrt(float(value)) * (pos - center)
    return scenario.replace(
        initial={"kind": "explicit", "positions": [[float(x) for x in row] for row in scaled]}
    )


def _outcome(scenario: Scenario, summary: dict) -> str:
    if summary["clustering_time"] is not None:
        return "Consensus"
    radius = basin_radius(scenario.build_kernel(), float(scenario.control.get("M", 0.0) or 0.0))
    if radius is not None and summary["min_dist_min"] <= radius:
        return "BasinEntered"
    return "Declustered"


def sweep(
    scenario: Scenario, axis: str, values, out_dir: Optional[str] = None
) -> list[dict]:
    """One run per value along the axis; writes grid.csv and returns the rows."""
    if axis not in SWEEP_AXES:
        raise SchemaError(f"sweep axis must be one of {SWEEP_AXES}, got {axis!r}")
    out_dir = out_dir or scenario.outputs
    rows = []
    for idx, value in enumerate(values):
        derived = _derive(scenario, axis, value)
        sub_dir = os.path.join(out_dir, f"{axis}_{idx:03d}")
        _, summary = run(derived, sub_dir)
        rows.append(
            {
                "axis": axis,
                "value": float(value),
                "outcome": _outcome(derived, summary),
                "clustering_time": summary["clustering_time"],
                "final_V": summary["final_V"],
                "final_Wg": summary["final_Wg"],
                "min_dist_min": summary["min_dist_min"],
            }
        )
    lines = [",".join(GRID_COLUMNS)]
    for r in rows:
        lines.append(
            ",".join(
                [
                    r["axis"],
                    _fmt(r["value"]),
                    r["outcome"],
                    "" if r["clustering_time"] is None else _fmt(r["clustering_time"]),
                    _fmt(r["final_V"]),
                    _fmt(r["final_Wg"]),
                    _fmt(r["min_dist_min"]),
                ]
            )
        )
    _atomic_write(os.path.join(out_dir, "grid.csv"), "\n".join(lines) + "\n")
    return rows
