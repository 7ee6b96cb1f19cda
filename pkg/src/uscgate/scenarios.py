"""Scenario presets that regenerate each figure's data as CSV files."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .dynamics import DEFAULT_STEP, evolve_interaction_picture
from .errors import CutoffError, UsageError
from .numerics import reduced_density
from .observables import SphereGrid, ghz_fidelity, ghz_target, husimi_q, negativity, purity, spin_coherent_states
from .operators import SystemLayout, fock_cutoff_rule, initial_state, spin_operators
from .propagator import FactoredPropagator

SQRT2 = math.sqrt(2)
LEAKAGE_TOL = 1e-8
UNIT = "(dimensionless)"

_FIG5_THETAS = [0.0, math.pi / 12, 5 * math.pi / 36, math.pi / 4]


def _fig5_sets() -> list[dict]:
    sets = []
    for panel, n, g in (("a", 3, 1 / SQRT2), ("b", 5, 1 / SQRT2), ("d", 5, 1 / (6 * SQRT2))):
        sets += [{"panel": panel, "n1": n, "n2": n, "theta": th, "g": g} for th in _FIG5_THETAS]
    sets += [{"panel": "c", "n1": n, "n2": n, "theta": math.pi / 4, "g": 1 / SQRT2} for n in (1, 2, 3, 5)]
    return sets


PRESETS: dict[str, dict[str, Any]] = {
    "fig2": {"n_values": [2], "g": 0.5, "tau_stop_pi": 6.0, "tau_step_pi": 0.02},
    "fig3": {"n_values": [10, 11], "g": 0.5, "tau_stop_pi": 8.0, "tau_step_pi": 0.02},
    "fig4": {"n_values": [20, 21], "g_values": None},
    "fig5": {"sets": _fig5_sets(), "tau_stop_pi": 8.0, "tau_step_pi": 0.02},
    "fig6": {"n_values": [10, 11], "g": 0.5, "epsilon_values": [0.01, 0.05], "tau_stop_pi": 8.0, "tau_step_pi": 0.05},
    "fig7": {"n_values": [10, 11], "g": 0.5, "epsilon_values": [0.01, 0.05], "tau_stop_pi": 8.0, "tau_step_pi": 0.05},
}


@dataclass
class SimulationConfig:
    """Resolved parameters of one scenario run. Times are given in units of pi."""

    scenario: str
    n_values: list[int] = field(default_factory=list)
    g: float = 0.5
    g_values: list[float] | None = None
    alpha: complex = SQRT2
    epsilon_values: list[float] = field(default_factory=list)
    n_max: int | str = "auto"
    tau_stop_pi: float = 6.0
    tau_step_pi: float = 0.02
    q_grid: tuple[int, int] = (64, 128)
    step: float = DEFAULT_STEP
    sets: list[dict] = field(default_factory=list)

    @classmethod
    def from_mapping(cls, scenario: str, values: dict | None = None) -> SimulationConfig:
        """Preset for ``scenario`` overridden by ``values`` (e.g. a parsed JSON file)."""
        if scenario not in PRESETS:
            raise UsageError(f"unknown scenario {scenario!r}; choose from {sorted(PRESETS)}")
        merged = dict(PRESETS[scenario])
        values = dict(values or {})
        values.pop("scenario", None)
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(values) - names)
        if unknown:
            raise UsageError(f"unknown config keys {unknown}")
        merged.update({k: v for k, v in values.items() if v is not None})
        cfg = cls(scenario=scenario, **merged)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        self.alpha = _parse_complex(self.alpha)
        self.q_grid = tuple(int(x) for x in self.q_grid)
        if len(self.q_grid) != 2 or min(self.q_grid) < 1:
            raise UsageError("q_grid needs two positive integers")
        if self.n_max != "auto" and (not isinstance(self.n_max, int) or self.n_max < 1):
            raise UsageError("n_max must be 'auto' or a positive integer")
        if self.tau_step_pi <= 0 or self.tau_stop_pi <= 0:
            raise UsageError("tau_stop_pi and tau_step_pi must be positive")
        count = self.tau_stop_pi / self.tau_step_pi
        if abs(count - round(count)) > 1e-9:
            raise UsageError("tau_stop_pi must be an integer multiple of tau_step_pi")
        if self.step <= 0:
            raise UsageError("integrator step must be positive")
        if any(int(n) != n or n < 1 for n in self.n_values):
            raise UsageError("qubit counts must be positive integers")

    @property
    def tau_grid(self) -> np.ndarray:
        count = round(self.tau_stop_pi / self.tau_step_pi)
        return math.pi * self.tau_step_pi * np.arange(count + 1)

    def resolve_n_max(self, alpha: complex, g: float, total_spin: float) -> int:
        """Auto rule, or the explicit value after checking it against the rule."""
        rule = fock_cutoff_rule(alpha, g, total_spin)
        if self.n_max == "auto":
            return rule
        if self.n_max < rule:
            raise CutoffError(f"n_max={self.n_max} is below the cutoff rule ({rule})", suggested_n_max=rule)
        return int(self.n_max)

    def to_json(self) -> dict:
        d = dataclasses.asdict(self)
        d["alpha"] = [self.alpha.real, self.alpha.imag]
        d["q_grid"] = list(self.q_grid)
        return d


def _parse_complex(value) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise UsageError("complex values are given as [re, im]")
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, dict):
        return complex(float(value.get("re", 0.0)), float(value.get("im", 0.0)))
    try:
        return complex(value)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"cannot read complex value {value!r}") from exc


@dataclass
class Panel:
    """One output table (a figure sub-panel)."""

    name: str
    columns: list[str]
    data: np.ndarray
    meta: dict = field(default_factory=dict)


def _leak_guard(states: np.ndarray, layout: SystemLayout, label: str) -> float:
    nb = layout.n_max + 1
    top = np.abs(np.asarray(states).reshape(len(states), -1, nb)[:, :, -1]) ** 2
    leak = float(np.max(np.sum(top, axis=1)))
    if leak > LEAKAGE_TOL:
        raise CutoffError(
            f"{label}: top Fock level population {leak:.2e} above {LEAKAGE_TOL:.0e}",
            suggested_n_max=2 * layout.n_max,
        )
    return leak


def _spin_states(prop: FactoredPropagator, psi0: np.ndarray, taus: np.ndarray) -> np.ndarray:
    return np.array([prop.apply(t, psi0) for t in taus])


def _spin_rho(states, layout: SystemLayout, keep=None):
    keep = list(range(len(layout.ensembles))) if keep is None else keep
    return [reduced_density(s, layout.indexing, keep) for s in states]


def _fidelity_columns(n: int) -> list[int]:
    # even N alternates between two cats; odd N has one target for every n_odd
    return [1, 3] if n % 2 == 0 else [1]


def _fidelity_names(n_odds: list[int]) -> list[str]:
    if len(n_odds) == 1:
        return [f"fidelity {UNIT}"]
    return [f"fidelity_n_odd_{k} {UNIT}" for k in n_odds]


def _single_layout(cfg: SimulationConfig, n: int) -> SystemLayout:
    n_max = cfg.resolve_n_max(cfg.alpha, cfg.g, n / 2)
    return SystemLayout.single(n, cfg.g, cfg.alpha, n_max)


def scenario_fig2(cfg: SimulationConfig) -> list[Panel]:
    taus = cfg.tau_grid
    panels = []
    for n in cfg.n_values:
        layout = _single_layout(cfg, n)
        states = _spin_states(FactoredPropagator(layout), initial_state(layout), taus)
        leak = _leak_guard(states, layout, f"fig2 N={n}")
        pur = [purity(r) for r in _spin_rho(states, layout)]
        name = "fig2" if len(cfg.n_values) == 1 else f"fig2_N{n}"
        panels.append(Panel(name, [f"tau {UNIT}", f"purity {UNIT}"], np.column_stack([taus, pur]),
                            {"N": n, "g": cfg.g, "n_max": layout.n_max, "max_leakage": leak}))
    return panels


def scenario_fig3(cfg: SimulationConfig) -> list[Panel]:
    taus = cfg.tau_grid
    panels = []
    for label, n in zip("abcdefgh", cfg.n_values):
        layout = _single_layout(cfg, n)
        states = _spin_states(FactoredPropagator(layout), initial_state(layout), taus)
        leak = _leak_guard(states, layout, f"fig3 N={n}")
        rhos = _spin_rho(states, layout)
        n_odds = _fidelity_columns(n)
        cols = [[ghz_fidelity(r, ghz_target(n, k)) for r in rhos] for k in n_odds]
        panels.append(Panel(f"fig3{label}_N{n}", [f"tau {UNIT}"] + _fidelity_names(n_odds),
                            np.column_stack([taus] + cols),
                            {"N": n, "g": cfg.g, "n_max": layout.n_max, "max_leakage": leak}))
    return panels


def twisted_plus_y(n: int, g: float, tau_d: float = 2 * math.pi) -> np.ndarray:
    """``+y`` coherent spin state after the disentangled gate ``exp(i g^2 tau_d Jx^2)``."""
    j = n / 2
    w, v = np.linalg.eigh(spin_operators(j)[0])
    start = spin_coherent_states(j, math.pi / 2, math.pi / 2)
    return v @ (np.exp(1j * g * g * tau_d * w**2) * (v.conj().T @ start))


def scenario_fig4(cfg: SimulationConfig) -> list[Panel]:
    if not cfg.g_values:
        raise UsageError("fig4 needs g_values (the intermediate couplings are a free choice)")
    grid = SphereGrid(*cfg.q_grid)
    th, ph = np.meshgrid(grid.theta, grid.phi, indexing="ij")
    panels = []
    for n in cfg.n_values:
        for g in cfg.g_values:
            q = husimi_q(twisted_plus_y(n, g), n / 2, grid)
            panels.append(Panel(
                f"fig4_N{n}_g{g:.6g}",
                [f"theta {UNIT}", f"phi {UNIT}", f"Q {UNIT}"],
                np.column_stack([th.ravel(), ph.ravel(), q.ravel()]),
                {"N": n, "g": g, "tau": 2 * math.pi, "norm": float(np.sum(q * grid.weights))},
            ))
    return panels


def scenario_fig5(cfg: SimulationConfig) -> list[Panel]:
    taus = cfg.tau_grid
    by_panel: dict[str, list[dict]] = {}
    for s in cfg.sets:
        missing = {"n1", "n2", "theta", "g"} - set(s)
        if missing:
            raise UsageError(f"fig5 set {s} lacks {sorted(missing)}")
        by_panel.setdefault(str(s.get("panel", "a")), []).append(s)
    panels = []
    for label in sorted(by_panel):
        cols, names, meta = [taus], [f"tau {UNIT}"], []
        for s in by_panel[label]:
            n1, n2, theta, g = int(s["n1"]), int(s["n2"]), float(s["theta"]), float(s["g"])
            n_max = cfg.resolve_n_max(cfg.alpha, g, (n1 + n2) / 2)
            layout = SystemLayout.two_ensembles(n1, n2, g, theta, cfg.alpha, n_max)
            states = _spin_states(FactoredPropagator(layout), initial_state(layout), taus)
            leak = _leak_guard(states, layout, f"fig5 {s}")
            rhos = _spin_rho(states, layout)
            cols.append([negativity(r, layout.spin_dims) for r in rhos])
            names.append(f"negativity[N1={n1};N2={n2};theta/pi={theta / math.pi:.6g}] {UNIT}")
            meta.append({"N1": n1, "N2": n2, "theta": theta, "g": g, "n_max": n_max, "max_leakage": leak})
        panels.append(Panel(f"fig5{label}", names, np.column_stack(cols), {"curves": meta}))
    return panels


def _free_evolution(cfg: SimulationConfig, n: int, eps: float):
    layout = _single_layout(cfg, n)
    traj = evolve_interaction_picture(initial_state(layout), cfg.tau_grid, layout, eps, step=cfg.step)
    lab = traj.lab_states()
    leak = _leak_guard(lab, layout, f"N={n} eps={eps}")
    meta = {"N": n, "g": cfg.g, "epsilon": eps, "n_max": layout.n_max, "step": cfg.step,
            "max_leakage": leak, "norm_drift": traj.norm_drift}
    return layout, traj, lab, meta


def scenario_fig6(cfg: SimulationConfig) -> list[Panel]:
    panels = []
    for eps in cfg.epsilon_values:
        for n in cfg.n_values:
            layout, traj, lab, meta = _free_evolution(cfg, n, eps)
            rotated = [purity(r) for r in _spin_rho(traj.states, layout)]
            lab_p = [purity(r) for r in _spin_rho(lab, layout)]
            panels.append(Panel(f"fig6_N{n}_eps{eps:g}",
                                [f"tau {UNIT}", f"purity_rotated {UNIT}", f"purity_lab {UNIT}"],
                                np.column_stack([traj.tau, rotated, lab_p]), meta))
    return panels


def scenario_fig7(cfg: SimulationConfig) -> list[Panel]:
    panels = []
    for eps in cfg.epsilon_values:
        for n in cfg.n_values:
            layout, traj, lab, meta = _free_evolution(cfg, n, eps)
            rhos = _spin_rho(lab, layout)
            n_odds = _fidelity_columns(n)
            cols = [[ghz_fidelity(r, ghz_target(n, k)) for r in rhos] for k in n_odds]
            panels.append(Panel(f"fig7_N{n}_eps{eps:g}", [f"tau {UNIT}"] + _fidelity_names(n_odds),
                                np.column_stack([traj.tau] + cols), meta))
    return panels


SCENARIOS: dict[str, Callable[[SimulationConfig], list[Panel]]] = {
    "fig2": scenario_fig2,
    "fig3": scenario_fig3,
    "fig4": scenario_fig4,
    "fig5": scenario_fig5,
    "fig6": scenario_fig6,
    "fig7": scenario_fig7,
}


def format_csv(panel: Panel, cfg: SimulationConfig) -> str:
    """CSV text: ``#`` comment lines with the parameters, a header row, 12 significant digits."""
    buf = io.StringIO()
    buf.write(f"# scenario: {cfg.scenario}\n")
    buf.write(f"# panel: {panel.name}\n")
    mode = "auto" if cfg.n_max == "auto" else "explicit"
    curves = panel.meta.get("curves", [panel.meta])
    n_maxes = [c["n_max"] for c in curves if "n_max" in c]
    if n_maxes:
        buf.write(f"# n_max ({mode}): {' '.join(str(n) for n in n_maxes)}\n")
    buf.write(f"# parameters: {json.dumps(panel.meta, sort_keys=True)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(panel.columns)
    for row in panel.data:
        writer.writerow([f"{float(x):.12g}" for x in row])
    return buf.getvalue()


def run_scenario(cfg: SimulationConfig, out_dir: str | Path) -> list[Path]:
    """Compute every panel of ``cfg.scenario`` and write CSVs plus ``manifest.json``."""
    panels = SCENARIOS[cfg.scenario](cfg)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for p in panels:
        path = out / f"{p.name}.csv"
        path.write_text(format_csv(p, cfg))
        written.append(path)
    manifest = {
        "scenario": cfg.scenario,
        "config": cfg.to_json(),
        "files": [{"file": path.name, "parameters": p.meta} for path, p in zip(written, panels)],
    }
    man = out / "manifest.json"
    man.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return written + [man]
