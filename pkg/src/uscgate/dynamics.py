"""Free qubit evolution treated in the interaction picture of ``H0``.

The rotated-frame state ``psi'(tau) = U(tau)^dag psi(tau)`` obeys
``i d psi'/d tau = H'(tau) psi'`` with ``H'(tau) = eps U^dag Jz U``. It is
integrated with fixed-step classical RK4; ``U`` is the factored propagator,
re-evaluated at every stage time.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import StepSizeError, UsageError
from .numerics import reduced_density
from .observables import GhzTarget, ghz_fidelity, purity
from .operators import SystemLayout, total_jz
from .propagator import FactoredPropagator

log = logging.getLogger(__name__)

DEFAULT_STEP = 0.005
DRIFT_LOG = 1e-8
DRIFT_FAIL = 1e-6


def interaction_hamiltonian(tau: float, layout: SystemLayout, epsilon: float) -> np.ndarray:
    """Dense ``eps U(tau)^dag (sum_k Jz_k) U(tau)``."""
    prop = FactoredPropagator(layout)
    u = prop.matrix(tau)
    return epsilon * (u.conj().T @ total_jz(layout) @ u)


class _RotatedFrame:
    """Evaluates ``H' psi`` through the factored propagator without dense matrices."""

    def __init__(self, layout: SystemLayout, epsilon: float):
        self.layout = layout
        self.epsilon = epsilon
        self.prop = FactoredPropagator(layout)
        self.jz = total_jz(layout, embed=False)
        self.shape = (layout.spin_dim, layout.boson_dim)

    def apply_h(self, tau: float, psi: np.ndarray) -> np.ndarray:
        lab = self.prop.apply(tau, psi).reshape(self.shape)
        lab = (self.jz @ lab).ravel()
        return self.epsilon * self.prop.apply(tau, lab, adjoint=True)

    def rhs(self, tau: float, psi: np.ndarray) -> np.ndarray:
        return -1j * self.apply_h(tau, psi)

    def rk4_step(self, tau: float, psi: np.ndarray, h: float) -> np.ndarray:
        k1 = self.rhs(tau, psi)
        k2 = self.rhs(tau + h / 2, psi + h / 2 * k1)
        k3 = self.rhs(tau + h / 2, psi + h / 2 * k2)
        k4 = self.rhs(tau + h, psi + h * k3)
        return psi + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


@dataclass
class Trajectory:
    """Rotated-frame states on a time grid."""

    tau: np.ndarray
    states: np.ndarray
    layout: SystemLayout
    epsilon: float
    step: float
    norm_drift: float = 0.0
    _prop: FactoredPropagator | None = field(default=None, repr=False)

    @property
    def propagator(self) -> FactoredPropagator:
        if self._prop is None:
            self._prop = FactoredPropagator(self.layout)
        return self._prop

    def lab_states(self) -> np.ndarray:
        return np.array([self.propagator.apply(t, s) for t, s in zip(self.tau, self.states)])

    def _states(self, frame: str) -> np.ndarray:
        if frame == "rotated":
            return self.states
        if frame == "lab":
            return self.lab_states()
        raise UsageError(f"unknown frame {frame!r}")

    def spin_density(self, frame: str = "rotated") -> list[np.ndarray]:
        idx = self.layout.indexing
        spins = list(range(len(self.layout.ensembles)))
        return [reduced_density(s, idx, spins) for s in self._states(frame)]

    def purity(self, frame: str = "rotated") -> np.ndarray:
        return np.array([purity(r) for r in self.spin_density(frame)])

    def fidelity(self, target: GhzTarget | np.ndarray, frame: str = "lab") -> np.ndarray:
        return np.array([ghz_fidelity(r, target) for r in self.spin_density(frame)])


def evolve_interaction_picture(
    psi0: np.ndarray,
    tau_grid,
    layout: SystemLayout,
    epsilon: float,
    step: float = DEFAULT_STEP,
) -> Trajectory:
    """RK4 integration of the rotated-frame Schrodinger equation.

    ``tau_grid`` lists output times (starting at 0, strictly increasing); each
    interval is split into equal steps no longer than ``step``. The state is
    never renormalized; a norm drift above 1e-6 raises :class:`StepSizeError`.
    """
    tau_grid = np.asarray(tau_grid, dtype=float)
    if tau_grid.ndim != 1 or tau_grid.size == 0 or tau_grid[0] != 0:
        raise UsageError("tau grid must be a 1-D array starting at 0")
    if np.any(np.diff(tau_grid) <= 0):
        raise UsageError("tau grid must be strictly increasing")
    if step <= 0:
        raise UsageError("integrator step must be positive")
    psi = np.asarray(psi0, dtype=complex).copy()
    if psi.shape != (layout.dim,):
        raise UsageError("initial state does not match the layout dimension")
    frame = _RotatedFrame(layout, epsilon)
    norm0 = np.linalg.norm(psi)
    out = [psi.copy()]
    drift = 0.0
    for t0, t1 in zip(tau_grid[:-1], tau_grid[1:]):
        n = max(1, math.ceil((t1 - t0) / step - 1e-9))
        h = (t1 - t0) / n
        if epsilon != 0:
            for i in range(n):
                psi = frame.rk4_step(t0 + i * h, psi, h)
        drift = max(drift, abs(float(np.linalg.norm(psi)) - norm0), key=lambda d: (not np.isfinite(d), d))
        if not np.isfinite(drift) or drift > DRIFT_FAIL:
            raise StepSizeError(
                f"norm drift {drift:.2e} at tau={t1:.4g}; retry with step {step / 2:g}",
                suggested_step=step / 2,
            )
        out.append(psi.copy())
    if drift > DRIFT_LOG:
        log.warning("RK4 norm drift %.2e (step %g)", drift, step)
    else:
        log.debug("RK4 norm drift %.2e (step %g)", drift, step)
    return Trajectory(tau=tau_grid, states=np.array(out), layout=layout, epsilon=epsilon,
                      step=step, norm_drift=drift, _prop=frame.prop)


def lab_frame_state(psi_prime: np.ndarray, tau: float, layout: SystemLayout) -> np.ndarray:
    """``U(tau) psi'``: the lab-frame state for a rotated-frame state."""
    return FactoredPropagator(layout).apply(tau, psi_prime)
