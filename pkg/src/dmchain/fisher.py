"""Classical and quantum Fisher information of the two-spin probe.

The X structure of the reduced state splits it into two 2x2 blocks that are
most compact in a four-vector (Bloch-like) parametrization with Minkowski
signature (+,-,-,-).  The quantum Fisher information is the sum of the two
block contributions; an independent eigendecomposition route over the full
4x4 matrix is kept for cross-validation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from .chain import (
    ChainParams,
    ChainPoint,
    Correlators,
    TwoSpinXState,
    chain_point,
)
from .quadrature import DEFAULT_QUAD, QuadratureConfig

__all__ = [
    "BlochBlocks",
    "FisherPoint",
    "DivergentInformationWarning",
    "BlockDegenerateWarning",
    "UndefinedSaturationWarning",
    "bloch_blocks",
    "bloch_blocks_derivative",
    "magnetization_fi",
    "qfi_xstate",
    "sld",
    "qfi_eigen",
    "fisher_point",
    "saturation",
]

# Outcomes with probability below P_TOL and derivative below DP_TOL are
# treated as absent from the support and contribute no information.
P_TOL = 1e-12
DP_TOL = 1e-8
BLOCK_TOL = 1e-14
_MINK = np.array([1.0, -1.0, -1.0, -1.0])


class DivergentInformationWarning(RuntimeWarning):
    """An outcome probability vanishes while its derivative does not."""


class BlockDegenerateWarning(RuntimeWarning):
    """A block carries no weight but its derivative does."""


class UndefinedSaturationWarning(RuntimeWarning):
    """Both informations vanish and the ratio has no stable limit."""


@dataclass(frozen=True)
class BlochBlocks:
    """Four-vector parametrization of the two X-state blocks.

    omega describes the outer block (aligned pair sector), omega_tilde the
    inner one; the time-like component is the block weight.
    """

    omega: np.ndarray
    omega_tilde: np.ndarray

    def block_matrices(self) -> Tuple[np.ndarray, np.ndarray]:
        w, wt = self.omega, self.omega_tilde
        outer = 0.5 * np.array([[w[0] + w[3], w[1] - 1j * w[2]],
                                [w[1] + 1j * w[2], w[0] - w[3]]])
        inner = 0.5 * np.array([[wt[0] + wt[3], wt[1] - 1j * wt[2]],
                                [wt[1] + 1j * wt[2], wt[0] - wt[3]]])
        return outer, inner

    def reconstruct(self) -> np.ndarray:
        """Rebuild the 4x4 X matrix (real part; the family is real)."""
        outer, inner = self.block_matrices()
        m = np.zeros((4, 4))
        m[np.ix_([0, 3], [0, 3])] = outer.real
        m[np.ix_([1, 2], [1, 2])] = inner.real
        return m


def bloch_blocks(state: TwoSpinXState, corr: Correlators) -> BlochBlocks:
    omega = np.array([
        0.5 * (1.0 + corr.gzz),
        0.5 * (corr.gxx - corr.gyy),
        0.0,
        corr.mz,
    ])
    omega_tilde = np.array([
        0.5 * (1.0 - corr.gzz),
        0.5 * (corr.gxx + corr.gyy),
        0.0,
        0.0,
    ])
    # The state elements are an exact reshuffling of the same correlators;
    # a mismatch means the caller paired unrelated objects.
    if abs(0.5 * (omega[0] + omega[3]) - state.a_plus) > 1e-9 or abs(
        0.5 * omega_tilde[0] - state.c
    ) > 1e-9:
        raise ValueError("state and correlators describe different points")
    return BlochBlocks(omega=omega, omega_tilde=omega_tilde)


def bloch_blocks_derivative(dcorr: Correlators) -> BlochBlocks:
    """Same mapping applied to correlator derivatives (no weight checks)."""
    domega = np.array([
        0.5 * dcorr.gzz,
        0.5 * (dcorr.gxx - dcorr.gyy),
        0.0,
        dcorr.mz,
    ])
    domega_tilde = np.array([
        -0.5 * dcorr.gzz,
        0.5 * (dcorr.gxx + dcorr.gyy),
        0.0,
        0.0,
    ])
    return BlochBlocks(omega=domega, omega_tilde=domega_tilde)


def _block_qfi(w: np.ndarray, dw: np.ndarray) -> float:
    """Information carried by one subnormalized 2x2 block.

    Mixed blocks use the Minkowski form
        (1/w0) [ (g(w, dw))^2 / g(w, w) - g(dw, dw) ] + (dw0)^2 / w0 ;
    a block with vanishing Minkowski norm is pure and gets the analytic
    limit, and a weightless block contributes nothing.
    """
    w0 = w[0]
    if w0 <= BLOCK_TOL:
        if float(np.max(np.abs(dw))) > DP_TOL:
            warnings.warn(
                "weightless block with nonvanishing derivative; "
                "its divergent contribution is dropped",
                BlockDegenerateWarning,
                stacklevel=3,
            )
        return 0.0
    vec = w[1:]
    dvec = dw[1:]
    norm = float(w0 * w0 - vec @ vec)
    if norm <= BLOCK_TOL:
        radial = float(vec @ dvec) / w0
        return float(dw[0] ** 2 / w0 + (dvec @ dvec - radial * radial) / w0)
    g_w_dw = float(w0 * dw[0] - vec @ dvec)
    g_dw_dw = float(dw[0] ** 2 - dvec @ dvec)
    return float((g_w_dw ** 2 / norm - g_dw_dw) / w0 + dw[0] ** 2 / w0)


def _classical_fi(probs: np.ndarray, dprobs: np.ndarray) -> float:
    p = np.clip(probs, 0.0, None)
    fi = 0.0
    for pi, dpi in zip(p, dprobs):
        if pi >= P_TOL:
            fi += dpi * dpi / pi
        elif abs(dpi) >= DP_TOL:
            warnings.warn(
                f"outcome probability {pi:.3e} vanished with derivative {dpi:.3e}; "
                "classical information diverges",
                DivergentInformationWarning,
                stacklevel=3,
            )
            return math.inf
        # else: outcome absent from the support, no contribution
    return float(fi)


def magnetization_fi(
    params: ChainParams,
    wrt: str,
    quad: QuadratureConfig = DEFAULT_QUAD,
    point: Optional[ChainPoint] = None,
) -> float:
    """Fisher information of the two-spin magnetization measurement."""
    if point is None:
        point = chain_point(params, (wrt,), quad)
    return _classical_fi(point.state.probabilities(), point.dstate[wrt].probabilities())


def qfi_xstate(
    params: ChainParams,
    wrt: str,
    quad: QuadratureConfig = DEFAULT_QUAD,
    point: Optional[ChainPoint] = None,
) -> float:
    """Quantum Fisher information via the two-block Minkowski form."""
    if point is None:
        point = chain_point(params, (wrt,), quad)
    blocks = bloch_blocks(point.state, point.corr)
    dblocks = bloch_blocks_derivative(point.dcorr[wrt])
    return _block_qfi(blocks.omega, dblocks.omega) + _block_qfi(
        blocks.omega_tilde, dblocks.omega_tilde
    )


def sld(rho: np.ndarray, drho: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Symmetric logarithmic derivative solving drho = (L rho + rho L)/2.

    Built in the eigenbasis of rho; matrix elements whose eigenvalue sum
    falls below tol are outside the support and are set to zero.
    """
    w, v = np.linalg.eigh(rho)
    w = np.clip(w, 0.0, None)
    num = 2.0 * (v.T.conj() @ drho @ v)
    denom = w[:, None] + w[None, :]
    mask = denom > tol
    core = np.zeros_like(num)
    core[mask] = num[mask] / denom[mask]
    return v @ core @ v.T.conj()


def qfi_eigen(rho: np.ndarray, drho: np.ndarray, tol: float = 1e-12) -> float:
    """Quantum Fisher information from the eigendecomposition of rho."""
    w, v = np.linalg.eigh(rho)
    w = np.clip(w, 0.0, None)
    m = v.T.conj() @ drho @ v
    denom = w[:, None] + w[None, :]
    mask = denom > tol
    return float((2.0 * np.abs(m[mask]) ** 2 / denom[mask]).sum())


@dataclass(frozen=True)
class FisherPoint:
    """Classical and quantum information at one coupling point."""

    params: ChainParams
    wrt: str
    F: float
    H: float
    H1: float
    H2: float
    S: float


def fisher_point(
    params: ChainParams,
    wrt: str,
    quad: QuadratureConfig = DEFAULT_QUAD,
    point: Optional[ChainPoint] = None,
) -> FisherPoint:
    """F, H with its block split, and their ratio, from one quadrature pass."""
    if point is None:
        point = chain_point(params, (wrt,), quad)
    blocks = bloch_blocks(point.state, point.corr)
    dblocks = bloch_blocks_derivative(point.dcorr[wrt])
    h1 = _block_qfi(blocks.omega, dblocks.omega)
    h2 = _block_qfi(blocks.omega_tilde, dblocks.omega_tilde)
    h = h1 + h2
    f = _classical_fi(point.state.probabilities(), point.dstate[wrt].probabilities())
    s = f / h if h > P_TOL else math.nan
    return FisherPoint(params=params, wrt=wrt, F=f, H=h, H1=h1, H2=h2, S=s)


def saturation(
    params: ChainParams,
    wrt: str,
    quad: QuadratureConfig = DEFAULT_QUAD,
    point: Optional[ChainPoint] = None,
) -> float:
    """Ratio F/H, with a symmetric-perturbation limit where H vanishes.

    When H <= 1e-12 the ratio is evaluated at the parameter shifted by
    +/-1e-4 along wrt; if the two values agree to 1e-3 their mean is
    returned, otherwise the ratio is undefined (NaN, with a warning).
    """
    fp = fisher_point(params, wrt, quad, point)
    if fp.H > P_TOL:
        return fp.F / fp.H
    step = 1e-4
    ratios = []
    for sgn in (1.0, -1.0):
        shifted = params.replace(**{wrt: getattr(params, wrt) + sgn * step})
        side = fisher_point(shifted, wrt, quad)
        ratios.append(side.F / side.H if side.H > P_TOL else math.nan)
    if all(math.isfinite(r) for r in ratios) and abs(ratios[0] - ratios[1]) <= 1e-3:
        return 0.5 * (ratios[0] + ratios[1])
    warnings.warn(
        f"saturation undefined at {params!r} wrt {wrt}: F and H vanish and the "
        f"perturbed ratios {ratios} do not agree",
        UndefinedSaturationWarning,
        stacklevel=2,
    )
    return math.nan
