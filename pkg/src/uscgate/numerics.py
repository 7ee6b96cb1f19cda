"""Dense complex linear algebra used throughout the package.

Matrices and states are plain ``numpy`` arrays (row-major). Tensor factors are
always ordered ``(ensemble 1, ensemble 2, ..., boson)``, matching ``np.kron``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from .errors import AccuracyError, ContractViolation, DimensionError, UsageError

MAX_DIMENSION = 20000
HERMITIAN_TOL = 1e-10
EXPM_MAX_NORM = 50.0
ENTROPY_EIG_CUTOFF = 1e-14
NEGATIVE_EIG_TOL = 1e-8


@dataclass(frozen=True)
class SubsystemIndexing:
    """Ordered factor dimensions of a tensor-product space."""

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise UsageError(f"invalid factor dimensions {self.dims!r}")
        object.__setattr__(self, "dims", dims)

    @property
    def total(self) -> int:
        return int(np.prod(self.dims))

    def __len__(self) -> int:
        return len(self.dims)

    def to_multi(self, index: int) -> tuple[int, ...]:
        return tuple(int(i) for i in np.unravel_index(index, self.dims))

    def to_flat(self, multi: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(multi), self.dims))


def as_indexing(idx: SubsystemIndexing | Sequence[int]) -> SubsystemIndexing:
    return idx if isinstance(idx, SubsystemIndexing) else SubsystemIndexing(tuple(idx))


def kron(a: np.ndarray, b: np.ndarray, max_dim: int = MAX_DIMENSION) -> np.ndarray:
    """Kronecker product with a guard on the resulting dimension."""
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    rows, cols = a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]
    if max(rows, cols) > max_dim:
        raise DimensionError(f"kron result {rows}x{cols} exceeds cap {max_dim}")
    return np.kron(a, b)


def kron_all(mats: Iterable[np.ndarray], max_dim: int = MAX_DIMENSION) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = kron(out, m, max_dim)
    return out


def hermiticity_residual(h: np.ndarray) -> float:
    return float(np.max(np.abs(h - h.conj().T))) if h.size else 0.0


def expm_phase(h: np.ndarray, t: float) -> np.ndarray:
    """``exp(-i t H)`` for Hermitian ``H`` via eigendecomposition."""
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ContractViolation("expm_phase needs a square matrix")
    res = hermiticity_residual(h)
    if res > HERMITIAN_TOL:
        raise ContractViolation(f"matrix is not Hermitian (residual {res:.2e})")
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    return (v * np.exp(-1j * t * w)) @ v.conj().T


def expm_general(a: np.ndarray, max_norm: float = EXPM_MAX_NORM) -> np.ndarray:
    """Matrix exponential of an arbitrary square matrix.

    Scaling-and-squaring with a Pade core (``scipy.linalg.expm``). Inputs with
    2-norm above ``max_norm`` are refused rather than silently losing accuracy.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ContractViolation("expm_general needs a square matrix")
    if a.size and np.linalg.norm(a, 2) > max_norm:
        raise AccuracyError(f"norm {np.linalg.norm(a, 2):.3g} above supported range {max_norm}")
    return scipy.linalg.expm(a)


def _check_keep(keep: Iterable[int], n: int) -> list[int]:
    keep = sorted({int(k) for k in keep})
    if not keep:
        raise UsageError("keep set is empty")
    if keep[0] < 0 or keep[-1] >= n:
        raise UsageError(f"factor index out of range for {n} factors: {keep}")
    return keep


def partial_trace(rho: np.ndarray, idx, keep: Iterable[int]) -> np.ndarray:
    """Reduced density matrix on the factors listed in ``keep``."""
    idx = as_indexing(idx)
    keep = _check_keep(keep, len(idx))
    if rho.shape != (idx.total, idx.total):
        raise UsageError(f"rho shape {rho.shape} does not match dims {idx.dims}")
    n = len(idx)
    traced = [k for k in range(n) if k not in keep]
    t = rho.reshape(idx.dims + idx.dims)
    # trace highest axes first so lower axis numbers stay valid
    for k in sorted(traced, reverse=True):
        t = np.trace(t, axis1=k, axis2=k + t.ndim // 2)
    d = int(np.prod([idx.dims[k] for k in keep]))
    return t.reshape(d, d)


def reduced_density(psi: np.ndarray, idx, keep: Iterable[int]) -> np.ndarray:
    """Reduced density matrix of the pure state ``psi`` without forming ``|psi><psi|``."""
    idx = as_indexing(idx)
    keep = _check_keep(keep, len(idx))
    if psi.shape != (idx.total,):
        raise UsageError(f"state of length {psi.shape} does not match dims {idx.dims}")
    rest = [k for k in range(len(idx)) if k not in keep]
    t = psi.reshape(idx.dims).transpose(keep + rest)
    d = int(np.prod([idx.dims[k] for k in keep]))
    m = t.reshape(d, -1)
    return m @ m.conj().T


def schmidt_coefficients(psi: np.ndarray, idx, keep: Iterable[int]) -> np.ndarray:
    """Schmidt coefficients (descending) of ``psi`` across ``keep`` | rest."""
    idx = as_indexing(idx)
    keep = _check_keep(keep, len(idx))
    rest = [k for k in range(len(idx)) if k not in keep]
    t = psi.reshape(idx.dims).transpose(keep + rest)
    d = int(np.prod([idx.dims[k] for k in keep]))
    return np.linalg.svd(t.reshape(d, -1), compute_uv=False)


def partial_transpose(rho: np.ndarray, idx, which: int) -> np.ndarray:
    """Transpose the indices of factor ``which`` only."""
    idx = as_indexing(idx)
    n = len(idx)
    if not 0 <= which < n:
        raise UsageError(f"factor {which} out of range for {n} factors")
    if rho.shape != (idx.total, idx.total):
        raise UsageError(f"rho shape {rho.shape} does not match dims {idx.dims}")
    axes = list(range(2 * n))
    axes[which], axes[n + which] = axes[n + which], axes[which]
    return rho.reshape(idx.dims + idx.dims).transpose(axes).reshape(rho.shape)


def trace_norm(a: np.ndarray) -> float:
    """Sum of singular values."""
    a = np.asarray(a)
    if hermiticity_residual(a) < 1e-12:
        return float(np.sum(np.abs(np.linalg.eigvalsh(a))))
    return float(np.sum(np.linalg.svd(a, compute_uv=False)))


def von_neumann_entropy(rho: np.ndarray) -> float:
    """Entropy in bits; eigenvalues below 1e-14 contribute nothing."""
    rho = np.asarray(rho)
    if hermiticity_residual(rho) > HERMITIAN_TOL:
        raise ContractViolation("density matrix is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > HERMITIAN_TOL:
        raise ContractViolation(f"density matrix trace {tr} != 1")
    lam = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    if lam.min() < -NEGATIVE_EIG_TOL:
        raise ContractViolation(f"negative eigenvalue {lam.min():.3e}")
    lam = lam[lam > ENTROPY_EIG_CUTOFF]
    return float(-np.sum(lam * np.log2(lam)))


def operator_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a, 2)) if a.size else 0.0
