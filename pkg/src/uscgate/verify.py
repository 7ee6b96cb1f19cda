"""Oracle checks run by ``uscgate verify``.

Operator comparisons are restricted to the interior Fock subspace (levels
whose displaced support stays below the cutoff), where truncation is
invisible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .operators import SystemLayout, full_qubit_oracle, hamiltonian_h0, qubit_collective_operators, spin_operators
from .propagator import FactoredPropagator, coefficients, coefficients_via_ode, displacement_check, interior_columns

ORACLE_N_MAX = 60
G_VALUES = (0.1, 0.5, 1 / math.sqrt(2))


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    threshold: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual)) and self.residual < self.threshold

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{self.name},{self.residual:.3e},{self.threshold:.1e},{status}"


def oracle_residual(n: int, g: float, taus, n_max: int = ORACLE_N_MAX, method: str = "displacement") -> float:
    """Largest interior-column operator-norm gap between the factored and dense propagators."""
    layout = SystemLayout.single(n, g, 0.0, n_max)
    prop = FactoredPropagator(layout)
    cols = interior_columns(layout, prop.interior_levels())
    w, v = np.linalg.eigh(hamiltonian_h0(layout))
    vc = v.conj().T[:, cols]
    worst = 0.0
    for tau in taus:
        dense = v @ (np.exp(-1j * tau * w)[:, None] * vc)
        fact = prop.matrix(tau, method=method)[:, cols]
        worst = max(worst, float(np.linalg.norm(fact - dense, 2)))
    return worst


def ordering_residual(n: int, g: float, tau: float, n_max: int = ORACLE_N_MAX) -> float:
    """Gap between normal and anti-normal literal products on interior rows and columns."""
    layout = SystemLayout.single(n, g, 0.0, n_max)
    prop = FactoredPropagator(layout)
    idx = interior_columns(layout, prop.interior_levels())
    normal = prop.matrix(tau, "normal", method="series")[np.ix_(idx, idx)]
    anti = prop.matrix(tau, "antinormal")[np.ix_(idx, idx)]
    return float(np.linalg.norm(normal - anti, 2))


def ode_residual(ordering: str, taus, gs) -> float:
    worst = 0.0
    for g in gs:
        num = coefficients_via_ode(np.asarray(taus), g, ordering)
        for tau, c in zip(taus, num):
            ref = coefficients(tau, g, ordering)
            worst = max(worst, float(np.max(np.abs(c.as_array() - ref.as_array()))))
    return worst


def dicke_residual(n: int) -> float:
    """``max_alpha |V^dag (sum_n S^alpha_n) V - J^alpha|`` for the Dicke isometry."""
    v = full_qubit_oracle(n)
    full = qubit_collective_operators(n)
    dicke = spin_operators(n / 2)
    return max(float(np.max(np.abs(v.conj().T @ f @ v - d))) for f, d in zip(full, dicke))


def random_pairs(count: int, seed: int = 7) -> list[tuple[float, float]]:
    rng = np.random.default_rng(seed)
    return [(float(t), float(g)) for t, g in zip(rng.uniform(0, 6 * math.pi, count), rng.uniform(0.05, 1 / math.sqrt(2), count))]


def run_checks(quick: bool = False) -> list[CheckResult]:
    ns = (1, 2, 3) if quick else (1, 2, 3, 4)
    taus = np.linspace(0, 6 * math.pi, 7 if quick else 25)
    out = []
    for n in ns:
        res = max(oracle_residual(n, g, taus) for g in G_VALUES)
        out.append(CheckResult(f"oracle_N{n}", res, 1e-7))
    res = max(oracle_residual(n, g, taus[:5], method="series") for n in (1, 2) for g in G_VALUES)
    out.append(CheckResult("oracle_series", res, 1e-7))
    pairs = random_pairs(4 if quick else 10)
    for n in (1, 2, 3):
        out.append(CheckResult(f"ordering_N{n}", max(ordering_residual(n, g, t) for t, g in pairs), 1e-7))
    for tau in (1.3, 2 * math.pi):
        r_a, r_ad = displacement_check(tau, SystemLayout.single(2, 0.5, 0.0, ORACLE_N_MAX))
        out.append(CheckResult(f"displacement_tau{tau:.4g}", max(r_a, r_ad), 1e-7))
    ode_taus = np.linspace(0, 6 * math.pi, 20)
    ode_gs = np.linspace(0, 1, 10 if not quick else 4)
    for ordering in ("normal", "antinormal"):
        out.append(CheckResult(f"ode_{ordering}", ode_residual(ordering, ode_taus, ode_gs), 1e-8))
    for n in (1, 2, 3):
        out.append(CheckResult(f"dicke_N{n}", dicke_residual(n), 1e-12))
    return out


def report(results: list[CheckResult]) -> str:
    lines = ["check,residual,threshold,status"] + [r.line() for r in results]
    return "\n".join(lines) + "\n"


__all__ = ["CheckResult", "run_checks", "report", "oracle_residual", "ordering_residual"]
