"""Collective spin and boson operators, system layouts, Hamiltonians and initial states.

Spin spaces use the Dicke basis ``|j, m>`` ordered ``m = -j ... +j``. For a
qubit, ``|0>`` has ``S^z = +1/2`` and ``|1>`` has ``S^z = -1/2``, so the
all-down state ``|1...1>`` is index 0 and ``|0...0>`` is the last index.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.special import gammaln, pdtrc

from .errors import CutoffError, UsageError
from .numerics import SubsystemIndexing, kron_all

COHERENT_TAIL_TOL = 1e-10


def _half_integer(j: float) -> float:
    two_j = round(2 * j)
    if abs(2 * j - two_j) > 1e-12 or two_j < 1:
        raise UsageError(f"spin j={j} must be a positive half-integer")
    return two_j / 2


def spin_operators(j: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(Jx, Jy, Jz)`` for spin ``j``."""
    j = _half_integer(j)
    m = np.arange(-j, j + 1)
    # J+ |j,m> = sqrt(j(j+1) - m(m+1)) |j,m+1>
    jp = np.diag(np.sqrt(j * (j + 1) - m[:-1] * (m[:-1] + 1)), -1).astype(complex)
    jm = jp.conj().T
    jx = 0.5 * (jp + jm)
    jy = -0.5j * (jp - jm)
    jz = np.diag(m).astype(complex)
    return jx, jy, jz


def boson_operators(n_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Truncated annihilation/creation operators on Fock levels ``0..n_max``."""
    if n_max < 1:
        raise UsageError("n_max must be >= 1")
    a = np.diag(np.sqrt(np.arange(1, n_max + 1)), 1).astype(complex)
    return a, a.conj().T


def fock_cutoff_rule(alpha: complex, g: float, total_spin: float) -> int:
    """Default Fock cutoff covering the coherent state plus its spin-conditioned shift."""
    x = abs(alpha) + 2 * abs(g) * total_spin
    return int(math.ceil(x * x + 5 * x + 10))


@dataclass(frozen=True)
class EnsembleSpec:
    """``qubits`` spin-1/2 particles coupled with dimensionless strength ``g``."""

    qubits: int
    g: float

    def __post_init__(self):
        if int(self.qubits) != self.qubits or self.qubits < 1:
            raise UsageError(f"ensemble needs a positive qubit count, got {self.qubits}")

    @property
    def j(self) -> float:
        return self.qubits / 2

    @property
    def dim(self) -> int:
        return self.qubits + 1


@dataclass(frozen=True)
class BosonSpec:
    """Coherent-state amplitude and Fock cutoff (``None`` selects the default rule)."""

    alpha: complex = 0.0
    n_max: int | None = None

    def __post_init__(self):
        if self.n_max is not None and self.n_max < 1:
            raise UsageError("n_max must be >= 1")


@dataclass(frozen=True)
class SystemLayout:
    """One or more spin ensembles sharing a single bosonic mode (boson factor last)."""

    ensembles: tuple[EnsembleSpec, ...]
    boson: BosonSpec = field(default_factory=BosonSpec)

    def __post_init__(self):
        ens = tuple(self.ensembles)
        if not ens:
            raise UsageError("layout needs at least one ensemble")
        object.__setattr__(self, "ensembles", ens)
        if len(ens) == 2 and abs(ens[0].g) < abs(ens[1].g) - 1e-15:
            raise UsageError("the first ensemble must carry the larger |g| (theta in [-pi/4, pi/4])")

    @classmethod
    def single(cls, n: int, g: float, alpha: complex = 0.0, n_max: int | None = None) -> SystemLayout:
        return cls((EnsembleSpec(n, g),), BosonSpec(alpha, n_max))

    @classmethod
    def two_ensembles(
        cls, n1: int, n2: int, g: float, theta: float, alpha: complex = 0.0, n_max: int | None = None
    ) -> SystemLayout:
        """Two ensembles with total coupling ``g`` split by the mixing angle ``theta``."""
        if not -math.pi / 4 - 1e-12 <= theta <= math.pi / 4 + 1e-12:
            raise UsageError("theta must lie in [-pi/4, pi/4]")
        return cls(
            (EnsembleSpec(n1, g * math.cos(theta)), EnsembleSpec(n2, g * math.sin(theta))),
            BosonSpec(alpha, n_max),
        )

    @property
    def g(self) -> float:
        return math.sqrt(sum(e.g**2 for e in self.ensembles))

    @property
    def weights(self) -> np.ndarray:
        """``g_k / g`` for each ensemble."""
        g = self.g
        if g == 0:
            raise UsageError("all ensemble couplings are zero; effective Jx is undefined")
        return np.array([e.g / g for e in self.ensembles])

    @property
    def theta(self) -> float:
        if len(self.ensembles) != 2:
            raise UsageError("mixing angle is defined for two ensembles only")
        return math.atan2(self.ensembles[1].g, self.ensembles[0].g)

    @property
    def total_spin(self) -> float:
        return sum(e.j for e in self.ensembles)

    @property
    def n_max(self) -> int:
        if self.boson.n_max is not None:
            return self.boson.n_max
        return fock_cutoff_rule(self.boson.alpha, self.g, self.total_spin)

    @property
    def spin_dims(self) -> tuple[int, ...]:
        return tuple(e.dim for e in self.ensembles)

    @property
    def spin_dim(self) -> int:
        return int(np.prod(self.spin_dims))

    @property
    def boson_dim(self) -> int:
        return self.n_max + 1

    @property
    def indexing(self) -> SubsystemIndexing:
        return SubsystemIndexing(self.spin_dims + (self.boson_dim,))

    @property
    def dim(self) -> int:
        return self.spin_dim * self.boson_dim

    def with_n_max(self, n_max: int | None) -> SystemLayout:
        return SystemLayout(self.ensembles, BosonSpec(self.boson.alpha, n_max))

    def with_alpha(self, alpha: complex) -> SystemLayout:
        return SystemLayout(self.ensembles, BosonSpec(alpha, self.boson.n_max))

    @cached_property
    def _spin_ops(self) -> tuple[tuple[np.ndarray, np.ndarray, np.ndarray], ...]:
        return tuple(spin_operators(e.j) for e in self.ensembles)

    def embed_spin(self, op: np.ndarray, k: int) -> np.ndarray:
        """Embed an operator on ensemble ``k`` into the joint spin space."""
        mats = [np.eye(d) for d in self.spin_dims]
        mats[k] = op
        return kron_all(mats)

    def spin_sum(self, axis: str, coefficients=None) -> np.ndarray:
        """``sum_k c_k J^axis_k`` on the joint spin space (no boson factor)."""
        col = "xyz".index(axis)
        if coefficients is None:
            coefficients = np.ones(len(self.ensembles))
        out = np.zeros((self.spin_dim, self.spin_dim), dtype=complex)
        for k, c in enumerate(coefficients):
            out += c * self.embed_spin(self._spin_ops[k][col], k)
        return out


def with_boson_identity(op: np.ndarray, layout: SystemLayout) -> np.ndarray:
    return np.kron(op, np.eye(layout.boson_dim))


def with_spin_identity(op: np.ndarray, layout: SystemLayout) -> np.ndarray:
    return np.kron(np.eye(layout.spin_dim), op)


def coherent_amplitudes(alpha: complex, n_max: int) -> np.ndarray:
    """Normalized coherent-state amplitudes ``exp(-|a|^2/2) a^n / sqrt(n!)``."""
    n = np.arange(n_max + 1)
    mu = abs(alpha) ** 2
    tail = float(pdtrc(n_max, mu)) if mu > 0 else 0.0
    if tail > COHERENT_TAIL_TOL:
        need = n_max
        while pdtrc(need, mu) > COHERENT_TAIL_TOL:
            need += 1
        raise CutoffError(f"coherent tail beyond n_max={n_max} is {tail:.2e}", suggested_n_max=need)
    if alpha == 0:
        psi = np.zeros(n_max + 1, dtype=complex)
        psi[0] = 1.0
        return psi
    log_mag = -mu / 2 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    psi = np.exp(log_mag) * np.exp(1j * n * np.angle(alpha))
    return psi / np.linalg.norm(psi)


def coherent_state(boson: BosonSpec | SystemLayout) -> np.ndarray:
    if isinstance(boson, SystemLayout):
        return coherent_amplitudes(boson.boson.alpha, boson.n_max)
    if boson.n_max is None:
        raise UsageError("BosonSpec without n_max; resolve it through a SystemLayout")
    return coherent_amplitudes(boson.alpha, boson.n_max)


def dicke_all_down(n: int) -> np.ndarray:
    """``|j=N/2, m=-N/2>``, the Dicke image of ``|1>^N``."""
    if n < 1:
        raise UsageError("N must be >= 1")
    psi = np.zeros(n + 1, dtype=complex)
    psi[0] = 1.0
    return psi


def dicke_all_up(n: int) -> np.ndarray:
    """``|j=N/2, m=+N/2>``, the Dicke image of ``|0>^N``."""
    psi = np.zeros(n + 1, dtype=complex)
    psi[-1] = 1.0
    return psi


def spins_all_down(layout: SystemLayout) -> np.ndarray:
    return kron_all(dicke_all_down(e.qubits)[:, None] for e in layout.ensembles).ravel()


def initial_state(layout: SystemLayout, spin_state: np.ndarray | None = None) -> np.ndarray:
    """Product of a spin state (default all down) with the layout's coherent state."""
    if spin_state is None:
        spin_state = spins_all_down(layout)
    if spin_state.shape != (layout.spin_dim,):
        raise UsageError("spin state dimension does not match layout")
    return np.kron(spin_state, coherent_state(layout))


def effective_jx(layout: SystemLayout, embed: bool = True) -> np.ndarray:
    """``sum_k (g_k/g) Jx_k``; on the full space unless ``embed`` is False."""
    x = layout.spin_sum("x", layout.weights)
    return with_boson_identity(x, layout) if embed else x


def coupling_operator(layout: SystemLayout) -> np.ndarray:
    """``sum_k g_k Jx_k`` on the spin space; zero when every g_k vanishes."""
    return layout.spin_sum("x", [e.g for e in layout.ensembles])


def hamiltonian_h0(layout: SystemLayout) -> np.ndarray:
    """``a^dag a + sum_k g_k Jx_k (a^dag + a)`` on the full space."""
    a, ad = boson_operators(layout.n_max)
    h = with_spin_identity(ad @ a, layout) + np.kron(coupling_operator(layout), a + ad)
    return 0.5 * (h + h.conj().T)


def total_jz(layout: SystemLayout, embed: bool = True) -> np.ndarray:
    z = layout.spin_sum("z")
    return with_boson_identity(z, layout) if embed else z


def hamiltonian_full(layout: SystemLayout, epsilon: float) -> np.ndarray:
    """``H0 + epsilon sum_k Jz_k``."""
    h = hamiltonian_h0(layout)
    if epsilon == 0:
        return h
    return h + epsilon * total_jz(layout)


def full_qubit_oracle(n: int) -> np.ndarray:
    """Isometry from the Dicke basis (``m = -j..j``) into the ``2^N`` qubit basis.

    Qubit basis index 0 is ``|0>`` (``S^z = +1/2``). Column ``m`` is the
    normalized symmetric sum of basis states with ``j + m`` qubits in ``|0>``.
    """
    if n not in (1, 2, 3):
        raise UsageError("full-representation oracle supports N <= 3 only")
    v = np.zeros((2**n, n + 1), dtype=complex)
    for bits in itertools.product((0, 1), repeat=n):
        zeros = bits.count(0)
        v[int("".join(map(str, bits)), 2), zeros] = 1.0
    return v / np.linalg.norm(v, axis=0)


def qubit_collective_operators(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``sum_n S^alpha_n`` on ``2^N`` qubits in the ``(|0>, |1>)`` basis."""
    paulis = (
        np.array([[0, 1], [1, 0]], dtype=complex) / 2,
        np.array([[0, -1j], [1j, 0]], dtype=complex) / 2,
        np.array([[1, 0], [0, -1]], dtype=complex) / 2,
    )
    out = []
    for op in paulis:
        total = np.zeros((2**n, 2**n), dtype=complex)
        for k in range(n):
            mats = [np.eye(2)] * n
            mats[k] = op
            total += kron_all(mats)
        out.append(total)
    return tuple(out)
