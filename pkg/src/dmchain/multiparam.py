"""Joint-estimation layer: QFI matrix, Uhlmann compatibility, sloppiness.

All three symmetric logarithmic derivatives come from one shared
eigendecomposition of the state; the matrix elements are the symmetrized
and antisymmetrized traces against the state.  For this family the state
and its derivatives are real symmetric, so the Uhlmann matrix vanishes
identically and any nonzero entry is pure roundoff.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .chain import PARAM_TAGS, ChainParams, chain_point
from .fisher import sld
from .quadrature import DEFAULT_QUAD, QuadratureConfig

__all__ = [
    "QfiMatrix",
    "UhlmannMatrix",
    "SloppinessReport",
    "SingularInformation",
    "CONDITION_FLOOR",
    "qfi_matrix",
    "uhlmann_matrix",
    "qfim_det",
    "matrix_crb",
]

# Below this eigenvalue ratio the information matrix is treated as
# singular and no covariance bound is produced.
CONDITION_FLOOR = 1e-10

_SYM_TOL = 1e-10
_PSD_TOL = 1e-9


class SingularInformation(RuntimeError):
    """Information matrix too ill-conditioned to invert meaningfully."""


@dataclass(frozen=True)
class QfiMatrix:
    """3x3 quantum Fisher information matrix over (J, gamma, D)."""

    matrix: np.ndarray
    tags: Tuple[str, ...] = PARAM_TAGS

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (3, 3):
            raise ValueError("expected a 3x3 matrix")
        scale = max(np.abs(m).max(), 1.0)
        if np.abs(m - m.T).max() > _SYM_TOL * scale:
            raise ValueError("information matrix is not symmetric")
        if np.linalg.eigvalsh(0.5 * (m + m.T)).min() < -_PSD_TOL * scale:
            raise ValueError("information matrix has a negative direction")
        object.__setattr__(self, "matrix", 0.5 * (m + m.T))

    def entry(self, mu: str, nu: str) -> float:
        return float(self.matrix[self.tags.index(mu), self.tags.index(nu)])


@dataclass(frozen=True)
class UhlmannMatrix:
    """Antisymmetric SLD-commutator expectations, stored signed."""

    matrix: np.ndarray
    tags: Tuple[str, ...] = PARAM_TAGS

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (3, 3):
            raise ValueError("expected a 3x3 matrix")
        # enforce exact antisymmetry; the diagonal is zero by definition
        object.__setattr__(self, "matrix", 0.5 * (m - m.T))

    def magnitudes(self) -> np.ndarray:
        return np.abs(self.matrix)


@dataclass(frozen=True)
class SloppinessReport:
    """Determinant and spectrum of the QFI matrix at one point."""

    det: float
    eigenvalues: np.ndarray  # sorted descending
    condition_ratio: float   # smallest / largest

    def __post_init__(self) -> None:
        ev = np.sort(np.asarray(self.eigenvalues, dtype=float))[::-1]
        object.__setattr__(self, "eigenvalues", ev)


def _sld_set(params: ChainParams, quad: QuadratureConfig, tol: float):
    point = chain_point(params, PARAM_TAGS, quad)
    rho = point.state.matrix()
    slds = [sld(rho, point.dstate[t].matrix(), tol=tol) for t in PARAM_TAGS]
    return rho, slds


def qfi_matrix(
    params: ChainParams,
    quad: QuadratureConfig = DEFAULT_QUAD,
    tol: float = 1e-12,
) -> QfiMatrix:
    """H_{mu nu} = Tr[rho (L_mu L_nu + L_nu L_mu) / 2]."""
    rho, slds = _sld_set(params, quad, tol)
    h = np.empty((3, 3))
    for i in range(3):
        for j in range(i, 3):
            anti = slds[i] @ slds[j] + slds[j] @ slds[i]
            h[i, j] = h[j, i] = 0.5 * np.trace(rho @ anti).real
    return QfiMatrix(matrix=h)


def uhlmann_matrix(
    params: ChainParams,
    quad: QuadratureConfig = DEFAULT_QUAD,
    tol: float = 1e-12,
) -> UhlmannMatrix:
    """U_{mu nu} = Tr[rho (L_mu L_nu - L_nu L_mu) / 2]."""
    rho, slds = _sld_set(params, quad, tol)
    u = np.zeros((3, 3))
    for i in range(3):
        for j in range(i + 1, 3):
            comm = slds[i] @ slds[j] - slds[j] @ slds[i]
            u[i, j] = 0.5 * np.trace(rho @ comm).real
            u[j, i] = -u[i, j]
    return UhlmannMatrix(matrix=u)


def qfim_det(
    params: ChainParams,
    quad: QuadratureConfig = DEFAULT_QUAD,
) -> SloppinessReport:
    qfim = qfi_matrix(params, quad)
    ev = np.linalg.eigvalsh(qfim.matrix)
    top = float(ev.max())
    ratio = float(ev.min() / top) if top > 0.0 else 0.0
    return SloppinessReport(
        det=float(np.prod(ev)),
        eigenvalues=ev[::-1].copy(),
        condition_ratio=ratio,
    )


def matrix_crb(qfim: QfiMatrix, shots: int = 1) -> np.ndarray:
    """Covariance lower bound H^{-1} / shots.

    Refuses near-singular matrices: inverting a sloppy QFIM returns
    noise, and the interesting statement is the singularity itself.
    """
    if shots < 1:
        raise ValueError("shots must be positive")
    ev = np.linalg.eigvalsh(qfim.matrix)
    top = float(ev.max())
    if top <= 0.0 or ev.min() / top < CONDITION_FLOOR:
        raise SingularInformation(
            "QFI matrix condition ratio below %.0e; no covariance bound"
            % CONDITION_FLOOR
        )
    cov = np.linalg.inv(qfim.matrix) / shots
    return 0.5 * (cov + cov.T)
