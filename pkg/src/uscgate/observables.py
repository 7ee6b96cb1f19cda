"""Purity, entropy, GHZ fidelity, spin Husimi Q function and negativity."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import gammaln, xlogy

from .errors import UsageError
from .numerics import as_indexing, partial_transpose, trace_norm
from .operators import dicke_all_down, dicke_all_up, spin_operators


def purity(rho: np.ndarray) -> float:
    """``tr(rho^2)``."""
    # tr(rho rho) = sum_ij rho_ij rho_ji; for Hermitian rho this is sum |rho_ij|^2
    return float(np.real(np.sum(rho * rho.T)))


def binary_entropy(p: float) -> float:
    return float(-sum(x * math.log2(x) for x in (p, 1 - p) if x > 0))


def entropy_closed_form(s: float) -> float:
    """Single-qubit entanglement entropy (bits) after a two-qubit twisting of strength ``s``."""
    return binary_entropy((1 - math.cos(s)) / 2)


@dataclass(frozen=True)
class GhzTarget:
    """GHZ-type target in Dicke coordinates for ``N`` qubits at ``tau = 2 pi n_odd``."""

    n: int
    n_odd: int
    state: np.ndarray

    @property
    def parity(self) -> str:
        return "even" if self.n % 2 == 0 else "odd"


def _rotation_x(j: float, angle: float) -> np.ndarray:
    """``exp(i angle Jx)``."""
    jx = spin_operators(j)[0]
    w, v = np.linalg.eigh(jx)
    return (v * np.exp(1j * angle * w)) @ v.conj().T


def ghz_target(n: int, n_odd: int = 1) -> GhzTarget:
    """Cat state prepared from ``|1>^N`` by the maximally entangling gate.

    Even ``N``: ``(+-i |0..0> + |1..1>)/sqrt(2)`` with sign
    ``(-1)^((N + n_odd + 1)/2)``. Odd ``N``: the fixed cat
    ``((-1)^((N-3)/2) i |0..0> + |1..1>)/sqrt(2)`` rotated by ``exp(i pi Jx / 2)``.
    """
    if n < 2:
        raise UsageError("GHZ target needs N >= 2")
    if n_odd < 1 or n_odd % 2 == 0:
        raise UsageError("n_odd must be a positive odd integer")
    up, down = dicke_all_up(n), dicke_all_down(n)
    if n % 2 == 0:
        sign = (-1) ** ((n + n_odd + 1) // 2)
        state = (sign * 1j * up + down) / math.sqrt(2)
    else:
        sign = (-1) ** ((n - 3) // 2)
        state = _rotation_x(n / 2, math.pi / 2) @ ((sign * 1j * up + down) / math.sqrt(2))
    return GhzTarget(n=n, n_odd=n_odd, state=state)


def ghz_fidelity(rho_a: np.ndarray, target: GhzTarget | np.ndarray) -> float:
    """``<target| rho_A |target>``; a state vector is accepted in place of ``rho_A``."""
    t = target.state if isinstance(target, GhzTarget) else np.asarray(target)
    if rho_a.ndim == 1:
        if rho_a.shape != t.shape:
            raise UsageError("state and target dimensions differ")
        return float(abs(np.vdot(t, rho_a)) ** 2)
    if rho_a.shape != (t.size, t.size):
        raise UsageError("density matrix and target dimensions differ")
    return float(np.real(np.vdot(t, rho_a @ t)))


def state_fidelity(psi: np.ndarray, phi: np.ndarray) -> float:
    """Phase-insensitive overlap ``|<psi|phi>|^2``."""
    return float(abs(np.vdot(psi, phi)) ** 2)


@dataclass(frozen=True)
class SphereGrid:
    """Midpoint grid on the sphere with exact cell-area weights.

    Polar nodes sit at cell centres ``(i + 1/2) pi / n_theta``; the weight of a
    cell is ``dphi (cos(theta - dtheta/2) - cos(theta + dtheta/2))``, which is
    ``sin(theta) dtheta dphi`` to leading order and sums to ``4 pi`` exactly.
    """

    n_theta: int = 64
    n_phi: int = 128

    def __post_init__(self):
        if self.n_theta < 1 or self.n_phi < 1:
            raise UsageError("grid sizes must be positive")

    @cached_property
    def theta(self) -> np.ndarray:
        return (np.arange(self.n_theta) + 0.5) * math.pi / self.n_theta

    @cached_property
    def phi(self) -> np.ndarray:
        return np.arange(self.n_phi) * 2 * math.pi / self.n_phi

    @cached_property
    def weights(self) -> np.ndarray:
        dth = math.pi / self.n_theta
        dph = 2 * math.pi / self.n_phi
        band = np.cos(self.theta - dth / 2) - np.cos(self.theta + dth / 2)
        return np.repeat((band * dph)[:, None], self.n_phi, axis=1)


def spin_coherent_states(j: float, theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Amplitudes of ``exp(-i phi Jz) exp(-i theta Jy)|j, j>`` on ``m = -j..j``.

    Broadcasts over ``theta`` and ``phi``; the basis index is the last axis.
    """
    two_j = round(2 * j)
    m = np.arange(two_j + 1) - j
    k = np.arange(two_j + 1)  # j + m
    log_binom = 0.5 * (gammaln(two_j + 1) - gammaln(k + 1) - gammaln(two_j - k + 1))
    th = np.asarray(theta)[..., None]
    ph = np.asarray(phi)[..., None]
    c, s = np.cos(th / 2), np.sin(th / 2)
    # xlogy keeps 0 * log(0) = 0 at the poles
    mag = np.exp(log_binom + xlogy(k, np.abs(c)) + xlogy(two_j - k, np.abs(s)))
    sign = np.sign(c) ** k * np.sign(s) ** (two_j - k)
    return mag * sign * np.exp(-1j * m * ph)


def husimi_q(rho: np.ndarray, j: float, grid: SphereGrid) -> np.ndarray:
    """``Q(theta, phi) = (2j+1)/(4 pi) <theta,phi| rho |theta,phi>`` on ``grid``.

    ``rho`` may also be a state vector. Returns an array of shape
    ``(n_theta, n_phi)``.
    """
    d = round(2 * j) + 1
    rho = np.asarray(rho)
    if rho.ndim == 1:
        rho = np.outer(rho, rho.conj())
    if rho.shape != (d, d):
        raise UsageError(f"Husimi Q needs a single spin-{j} density matrix of size {d}")
    th, ph = np.meshgrid(grid.theta, grid.phi, indexing="ij")
    cs = spin_coherent_states(j, th, ph)
    val = np.einsum("...i,ij,...j->...", cs.conj(), rho, cs).real
    return d / (4 * math.pi) * val


def negativity(rho_q: np.ndarray, idx, which: int = 1) -> float:
    """``(||rho^T_which||_1 - 1) / 2`` for a multi-ensemble spin density matrix."""
    idx = as_indexing(idx)
    if len(idx) < 2:
        raise UsageError("negativity needs at least two ensembles")
    return (trace_norm(partial_transpose(rho_q, idx, which)) - 1) / 2
