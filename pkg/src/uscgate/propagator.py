"""Exact factored propagator of ``H0 = a^dag a + g X (a^dag + a)``.

The evolution operator ``exp(-i tau H0)`` is written as the ordered product

    U = exp(i s X^2) exp(i p X a^dag) exp(i q a^dag a) exp(i r X a)

with closed-form coefficient functions. In the eigenbasis of ``X`` every
factor is a small boson-space matrix per eigenvalue, and the two displacement
factors are exactly lower/upper triangular series on the truncated Fock space.

Because the lowering factor never leaves the truncated space, the truncated
normal-ordered product equals ``P U_exact P`` (the compression of the exact
propagator), so it is exact on every state whose evolved support stays below
the cutoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Literal

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import eigh_tridiagonal

from .errors import AccuracyError, CutoffError, UsageError
from .operators import (
    SystemLayout,
    boson_operators,
    coherent_state,
    coupling_operator,
    fock_cutoff_rule,
    spin_operators,
)

Ordering = Literal["normal", "antinormal"]
Method = Literal["displacement", "series"]
LEAKAGE_TOL = 1e-8
TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class CoefficientSet:
    """Disentangling coefficients at one ``(tau, g)``.

    Lower-case ``s, p, q, r`` multiply ``i`` in the exponents; the upper-case
    aliases are the exponents themselves (``P = i p`` and so on).
    """

    s: complex
    p: complex
    q: complex
    r: complex
    ordering: Ordering = "normal"

    @property
    def P(self) -> complex:
        return 1j * self.p

    @property
    def Q(self) -> complex:
        return 1j * self.q

    @property
    def R(self) -> complex:
        return 1j * self.r

    @property
    def S(self) -> complex:
        return 1j * self.s

    def as_array(self) -> np.ndarray:
        return np.array([self.s, self.p, self.q, self.r], dtype=complex)

    @classmethod
    def from_exponents(cls, P, Q, R, S, ordering: Ordering) -> CoefficientSet:
        return cls(s=-1j * S, p=-1j * P, q=-1j * Q, r=-1j * R, ordering=ordering)


def _check_ordering(ordering: str) -> None:
    if ordering not in ("normal", "antinormal"):
        raise UsageError(f"unknown ordering {ordering!r}")


def coefficients(tau: float, g: float, ordering: Ordering = "normal") -> CoefficientSet:
    """Closed-form coefficient functions."""
    _check_ordering(ordering)
    if ordering == "normal":
        w = 1 - np.exp(-1j * tau)
        p = 1j * g * w
        return CoefficientSet(s=g * g * (tau + 1j * w), p=p, q=-tau, r=p, ordering="normal")
    w = 1 - np.exp(1j * tau)
    P = g * w
    S = 1j * g * g * (tau - 1j * w)
    return CoefficientSet.from_exponents(P, -1j * tau, P, S, "antinormal")


def _normal_rhs(g):
    # P' - P Q' = -ig, Q' = -i, R' e^{-Q} = -ig, S' - P R' e^{-Q} = 0
    def rhs(_t, y):
        P, Q, R, S = y
        dQ = -1j
        dP = -1j * g + P * dQ
        dR = -1j * g * np.exp(Q)
        dS = P * dR * np.exp(-Q)
        return [dP, dQ, dR, dS]

    return rhs


def _antinormal_rhs(g):
    # R' + R Q' = -ig, Q' = -i, P' e^{Q} = -ig, S' + P' R e^{Q} = 0
    def rhs(_t, y):
        P, Q, R, S = y
        dQ = -1j
        dR = -1j * g - R * dQ
        dP = -1j * g * np.exp(-Q)
        dS = -dP * R * np.exp(Q)
        return [dP, dQ, dR, dS]

    return rhs


def coefficients_via_ode(
    tau, g: float, ordering: Ordering = "normal", rtol: float = 1e-12, atol: float = 1e-14
) -> CoefficientSet | list[CoefficientSet]:
    """Integrate the coefficient ODE system from zero initial conditions.

    ``tau`` may be a scalar or an increasing array of non-negative times; an
    array returns one :class:`CoefficientSet` per entry.
    """
    _check_ordering(ordering)
    taus = np.atleast_1d(np.asarray(tau, dtype=float))
    if np.any(taus < 0):
        raise UsageError("tau must be non-negative")
    if np.any(np.diff(taus) < 0):
        raise UsageError("tau values must be increasing")
    t_end = float(taus[-1])
    if t_end == 0:
        out = [CoefficientSet(0j, 0j, 0j, 0j, ordering) for _ in taus]
    else:
        rhs = _normal_rhs(g) if ordering == "normal" else _antinormal_rhs(g)
        sol = solve_ivp(
            rhs, (0.0, t_end), np.zeros(4, dtype=complex), method="DOP853",
            t_eval=taus, rtol=rtol, atol=atol,
        )
        if not sol.success:
            raise AccuracyError(f"coefficient integration failed: {sol.message}")
        out = [CoefficientSet.from_exponents(*sol.y[:, k], ordering) for k in range(len(taus))]
    return out[0] if np.ndim(tau) == 0 else out


def _unit_coefficients_ld(tau: float) -> tuple:
    """Anti-normal exponents ``(P, Q, R, S)`` at unit coupling in extended precision."""
    t = np.longdouble(tau)
    w = 1 - np.exp(np.clongdouble(1j) * t)
    return w, -np.clongdouble(1j) * t, w, np.clongdouble(1j) * (t - np.clongdouble(1j) * w)


def _factorial_weights(nb: int, dtype=np.longdouble) -> np.ndarray:
    """Lower-triangular ``sqrt(n'!/n!) / (n'-n)!`` built by recursion along diagonals."""
    w = np.zeros((nb, nb), dtype=dtype)
    n = np.arange(nb, dtype=dtype)
    diag = np.ones(nb, dtype=dtype)
    w[np.arange(nb), np.arange(nb)] = 1
    for k in range(1, nb):
        diag = diag[:-1] * np.sqrt(n[:-k] + k) / k
        w[np.arange(k, nb), np.arange(nb - k)] = diag
    return w


class FactoredPropagator:
    """Block representation of the factored propagator for one layout.

    Work happens in the eigenbasis of the coupling operator
    ``K = sum_k g_k Jx_k = g X``; with coefficients evaluated at unit coupling,
    ``s X^2 -> s1 K^2`` and ``p X -> p1 K``, so ``g = 0`` needs no special case.
    The eigenbasis is the product of single-ensemble ``Jx`` eigenbases, so the
    eigenvalues ``sum_k g_k m_k`` are exact.

    Two evaluations of the normal-ordered product are offered. ``"series"``
    multiplies the triangular factor series literally; its terms grow like
    ``exp(|p1 lambda|^2)`` and cancel, so high Fock levels lose all precision
    once ``|p1 lambda|`` reaches a few units. ``"displacement"`` (the default)
    commutes ``exp(i q n)`` to the left, which turns the two triangular factors
    into ``exp(|beta|^2/2) P D(beta) P`` with ``beta = -lambda (e^{i tau} - 1)``;
    ``P D(beta) P`` is taken from the generator's spectral decomposition on an
    enlarged Fock space, a compression of a unitary and hence of norm <= 1.
    """

    def __init__(self, layout: SystemLayout):
        self.layout = layout
        self.n_max = layout.n_max
        self.nb = self.n_max + 1
        vecs = np.ones((1, 1), dtype=complex)
        lam = np.zeros(1, dtype=np.longdouble)
        for e in layout.ensembles:
            _, v = np.linalg.eigh(spin_operators(e.j)[0])
            m = np.arange(e.dim, dtype=np.longdouble) - np.longdouble(e.j)
            vecs = np.kron(vecs, v)
            lam = (lam[:, None] + np.longdouble(e.g) * m[None, :]).ravel()
        self.eigenvalues_ld = lam
        self.eigenvalues = lam.astype(float)
        self.eigenvectors = vecs
        self._n = np.arange(self.nb)
        k = self._n[:, None] - self._n[None, :]
        self._kidx = np.clip(k, 0, None)
        self._cache: dict[tuple, object] = {}

    @cached_property
    def _w_ld(self) -> np.ndarray:
        return _factorial_weights(self.nb)

    @cached_property
    def _w(self) -> np.ndarray:
        return self._w_ld.astype(float)

    @cached_property
    def _generator_spectrum(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenpairs of ``i (a^dag - a)`` on an enlarged space, rows cut to ``nb``."""
        x = math.sqrt(self.nb) + self.max_displacement
        ne = max(self.nb + 10, math.ceil(x * x + 6 * x + 10))
        # diag(i^n) maps i(a^dag - a) to the real tridiagonal with off-diagonal sqrt(n)
        w, v = eigh_tridiagonal(np.zeros(ne), np.sqrt(np.arange(1.0, ne)))
        phase = 1j ** (np.arange(self.nb) % 4)
        return w, phase[:, None] * v[: self.nb]

    def creation_series(self, c: np.ndarray, extended: bool = False) -> np.ndarray:
        """``exp(c a^dag)`` on the truncated space for each entry of ``c``.

        Entry ``[n', n]`` is ``c^(n'-n) sqrt(n'!/n!) / (n'-n)!`` for ``n' >= n``.
        The annihilation series ``exp(c a)`` is the transpose.
        """
        dtype = np.clongdouble if extended else complex
        c = np.atleast_1d(np.asarray(c, dtype=dtype))
        powers = np.ones((c.size, self.nb), dtype=dtype)
        if self.nb > 1:
            powers[:, 1:] = np.cumprod(np.repeat(c[:, None], self.nb - 1, axis=1), axis=1)
        w = self._w_ld if extended else self._w
        return w[None] * powers[:, self._kidx]

    def _memo(self, key, build):
        hit = self._cache.get(key)
        if hit is None:
            if len(self._cache) > 8:
                self._cache.clear()
            hit = self._cache[key] = build()
        return hit

    def _displacement_parts(self, tau: float):
        """Per-eigenvalue ``(left, r, right)`` with ``U_m = diag(left_m) D(r_m) diag(right_m)``."""

        def build():
            c = coefficients(tau, 1.0, "normal")
            lam = self.eigenvalues
            # exp(i p lam a^dag) exp(i q n) = exp(i q n) exp(beta a^dag), beta = i p e^{-iq} lam
            beta = 1j * c.p * np.exp(-1j * c.q) * lam
            r, theta = np.abs(beta), np.angle(beta)
            # exp(i s lam^2) exp(|beta|^2/2) has unit modulus for the exact coefficients
            glob = np.exp(1j * c.s * lam**2 + r**2 / 2)
            left = glob[:, None] * np.exp(1j * (theta[:, None] + c.q) * self._n[None, :])
            right = np.exp(-1j * theta[:, None] * self._n[None, :])
            return left, r, right

        return self._memo((float(tau), "parts"), build)

    def blocks(self, tau: float, ordering: Ordering = "normal", method: Method = "displacement") -> np.ndarray:
        """Boson-space propagator for each eigenvalue of ``K``; shape ``(D, nb, nb)``.

        The anti-normal product is always the literal series; it cancels large
        terms, so it is evaluated in extended precision.
        """
        _check_ordering(ordering)
        if method not in ("displacement", "series"):
            raise UsageError(f"unknown method {method!r}")
        if ordering == "antinormal":
            return self._memo((float(tau), "antinormal"), lambda: self._antinormal_blocks(tau))
        if method == "series":
            return self._memo((float(tau), "series"), lambda: self._series_blocks(tau))
        return self._memo((float(tau), "displacement"), lambda: self._displacement_blocks(tau))

    def _series_blocks(self, tau: float) -> np.ndarray:
        c = coefficients(tau, 1.0, "normal")
        lam = self.eigenvalues
        t = self.creation_series(1j * c.p * lam)
        mid = np.exp(1j * c.q * self._n)
        b = np.matmul(t * mid[None, None, :], t.transpose(0, 2, 1))
        return b * np.exp(1j * c.s * lam**2)[:, None, None]

    def _antinormal_blocks(self, tau: float) -> np.ndarray:
        P, Q, R, S = _unit_coefficients_ld(tau)
        lam = self.eigenvalues_ld
        t_up = self.creation_series(P * lam, extended=True)
        t_down = self.creation_series(R * lam, extended=True)
        mid = np.exp(Q * self._n.astype(np.longdouble))
        b = np.einsum("mji,j,mjk->mik", t_down, mid, t_up)
        return (b * np.exp(S * lam**2)[:, None, None]).astype(complex)

    def _displacement_blocks(self, tau: float) -> np.ndarray:
        left, r, right = self._displacement_parts(tau)
        w, vt = self._generator_spectrum
        ph = np.exp(-1j * r[:, None] * w[None, :])
        d = np.einsum("ik,mk,jk->mij", vt, ph, vt.conj())
        return left[:, :, None] * d * right[:, None, :]

    def matrix(self, tau: float, ordering: Ordering = "normal", method: Method = "displacement") -> np.ndarray:
        """Full propagator on the layout's space (spin factors, then boson)."""
        b = self.blocks(tau, ordering, method)
        v = self.eigenvectors
        u = np.einsum("am,mij,bm->aibj", v, b, v.conj())
        d = self.layout.dim
        return u.reshape(d, d)

    def apply(self, tau: float, psi: np.ndarray, adjoint: bool = False) -> np.ndarray:
        """``U(tau) psi`` (or ``U(tau)^dag psi``) by matrix-vector products only."""
        left, r, right = self._displacement_parts(tau)
        w, vt = self._generator_spectrum
        v = self.eigenvectors
        x = v.conj().T @ psi.reshape(self.layout.spin_dim, self.nb)
        sign = 1 if adjoint else -1
        if adjoint:
            left, right = right.conj(), left.conj()
        z = (x * right) @ vt.conj()
        z *= np.exp(sign * 1j * r[:, None] * w[None, :])
        y = (z @ vt.T) * left
        return (v @ y).ravel()

    def leakage(self, tau: float, psi: np.ndarray | None = None) -> float:
        """Population in the top Fock level after evolving ``psi``.

        Without ``psi`` the worst case over spin eigenstates times the layout's
        coherent state is returned.
        """
        if psi is None:
            coh = coherent_state(self.layout)
            out = np.einsum("mij,j->mi", self.blocks(tau), coh)
            return float(np.max(np.abs(out[:, -1]) ** 2))
        out = self.apply(tau, psi).reshape(self.layout.spin_dim, self.nb)
        return float(np.sum(np.abs(out[:, -1]) ** 2))

    def check_leakage(self, tau: float, psi: np.ndarray | None = None, tol: float = LEAKAGE_TOL) -> None:
        leak = self.leakage(tau, psi)
        if leak > tol:
            layout = self.layout
            raise CutoffError(
                f"top Fock level population {leak:.2e} exceeds {tol:.0e} at tau={tau:.4g}",
                suggested_n_max=max(
                    2 * self.n_max, fock_cutoff_rule(layout.boson.alpha, layout.g, layout.total_spin)
                ),
            )

    @cached_property
    def max_displacement(self) -> float:
        """Largest ``|p1 lambda|`` over all times, i.e. ``2 max|lambda|``."""
        return 2 * float(np.max(np.abs(self.eigenvalues))) if self.eigenvalues.size else 0.0

    def interior_levels(self, margin: int = 5) -> int:
        """Number of low Fock levels whose displaced support stays inside the cutoff."""
        return interior_levels(self.n_max, self.max_displacement, margin)


def interior_levels(n_max: int, displacement: float, margin: int = 5) -> int:
    """Largest count of low Fock levels ``0..L-1`` safe from truncation.

    Level ``n`` displaced by ``d`` is supported up to about
    ``(sqrt(n) + d)^2 + 6 (sqrt(n) + d) + 10``; at least ``margin`` levels are
    always excluded at the top.
    """
    best = 1
    for n in range(n_max + 1):
        x = math.sqrt(n) + displacement
        if x * x + 6 * x + 10 <= n_max and n <= n_max - margin:
            best = n + 1
    return best


def factored_unitary(
    tau: float,
    layout: SystemLayout,
    ordering: Ordering = "normal",
    check_cutoff: bool = True,
    method: Method = "displacement",
) -> np.ndarray:
    """Full matrix of the factored propagator.

    ``method`` selects how the normal-ordered product is evaluated (see
    :class:`FactoredPropagator`). With ``check_cutoff`` the layout's coherent state is evolved under every
    spin eigenvalue and a :class:`CutoffError` is raised if the top Fock level
    is populated above 1e-8.
    """
    prop = FactoredPropagator(layout)
    if check_cutoff:
        prop.check_leakage(tau)
    return prop.matrix(tau, ordering, method)


def evolve(tau: float, layout: SystemLayout, psi0: np.ndarray) -> np.ndarray:
    """``U(tau) psi0`` through the factored propagator."""
    return FactoredPropagator(layout).apply(tau, psi0)


def _disentangling_index(tau_d: float) -> int:
    n = round(tau_d / TWO_PI)
    if n < 1 or abs(tau_d - n * TWO_PI) > 1e-9 * max(1.0, abs(tau_d)):
        raise UsageError(f"tau_d={tau_d} is not a positive multiple of 2*pi")
    return n


def disentangled_gate(tau_d: float, layout: SystemLayout) -> tuple[np.ndarray, np.ndarray]:
    """Spin-only gate ``exp(i s X^2)`` and boson phase ``exp(i q a^dag a)`` at ``tau_d = 2 n pi``."""
    _disentangling_index(tau_d)
    lam, v = np.linalg.eigh(coupling_operator(layout))
    # at tau_d the unit-coupling twisting coefficient is exactly tau_d
    qubit_gate = (v * np.exp(1j * tau_d * lam**2)) @ v.conj().T
    boson_phase = np.diag(np.exp(-1j * tau_d * np.arange(layout.n_max + 1)))
    return qubit_gate, boson_phase


def twisting_gate(s: float, layout: SystemLayout) -> np.ndarray:
    """``exp(i s X^2)`` on the spin space for a given twisting strength ``s``."""
    lam, v = np.linalg.eigh(coupling_operator(layout))
    g = layout.g
    mu = lam / g if g else lam
    return (v * np.exp(1j * s * mu**2)) @ v.conj().T


def displacement_check(
    tau: float, layout: SystemLayout, interior: int | None = None
) -> tuple[float, float]:
    """Residuals of the Heisenberg-picture displacement of ``a`` and ``a^dag``.

    Compares ``U^-1 a U`` with ``a e^{-i tau} - g X (1 - e^{-i tau})`` and
    ``U^-1 a^dag U`` with ``a^dag e^{i tau} - g X (1 - e^{i tau})``, restricted
    to the low Fock levels ``0..interior-1`` (columns) where truncation is
    invisible. ``U^-1`` is taken as ``U^dag``.
    """
    prop = FactoredPropagator(layout)
    if interior is None:
        interior = prop.interior_levels()
    interior = min(interior, layout.n_max + 1 - 5)
    if interior < 1:
        raise UsageError("cutoff too small for an interior subspace")
    u = prop.matrix(tau)
    a, ad = boson_operators(layout.n_max)
    spin_eye = np.eye(layout.spin_dim)
    big_a = np.kron(spin_eye, a)
    big_ad = np.kron(spin_eye, ad)
    gx = np.kron(coupling_operator(layout), np.eye(layout.n_max + 1))
    e = np.exp(-1j * tau)
    want_a = big_a * e - gx * (1 - e)
    want_ad = big_ad * np.conj(e) - gx * (1 - np.conj(e))
    cols = interior_columns(layout, interior)
    got_a = u.conj().T @ (big_a @ u[:, cols])
    got_ad = u.conj().T @ (big_ad @ u[:, cols])
    r_a = np.linalg.norm(got_a - want_a[:, cols], 2)
    r_ad = np.linalg.norm(got_ad - want_ad[:, cols], 2)
    return float(r_a), float(r_ad)


def interior_columns(layout: SystemLayout, interior: int) -> np.ndarray:
    """Flat indices of basis states whose Fock number is below ``interior``."""
    nb = layout.n_max + 1
    return np.array([m * nb + n for m in range(layout.spin_dim) for n in range(interior)])


@dataclass(frozen=True)
class GateDesign:
    """Coupling and timing that give twisting strength ``s = pi beta`` at ``tau = 2 pi n``."""

    beta: float
    n: int
    g: float
    G: float | None = None

    @property
    def tau_d(self) -> float:
        return TWO_PI * self.n

    def entangling_times(self, count: int = 3) -> list[float]:
        """Instants ``2 pi n n_odd`` (``n_odd = 1, 3, 5, ...``) of maximal entanglement for ``beta = 1/2``."""
        return [TWO_PI * self.n * (2 * k + 1) for k in range(count)]

    @property
    def omega(self) -> float | None:
        """Boson frequency implied by ``G`` (``omega = G / g``)."""
        if self.G is None or self.g == 0:
            return None
        return self.G / self.g

    @property
    def t_gate(self) -> float | None:
        if self.G is None:
            return None
        return math.pi * math.sqrt(2 * self.n * self.beta) / self.G


def gate_design(beta: float, n: int = 1, G: float | None = None) -> GateDesign:
    if not 0 <= beta <= 0.5:
        raise UsageError("beta must lie in [0, 1/2]")
    if int(n) != n or n < 1:
        raise UsageError("revolution index n must be a positive integer")
    if G is not None and G <= 0:
        raise UsageError("dimensional coupling G must be positive")
    return GateDesign(beta=beta, n=int(n), g=math.sqrt(beta / (2 * n)), G=G)
