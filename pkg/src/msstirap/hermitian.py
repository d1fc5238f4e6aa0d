"""Small dense Hermitian linear algebra.

Eigendecomposition with a fixed gauge, overlap-based frame tracking, the
parallel-transport derivative of an eigenframe, and exact unitary steps.
Everything here works on plain ``numpy`` arrays with hbar = 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITICITY_TOL = 1e-10
AMBIGUITY_TOL = 1e-6
MAX_DIM = 16


class NonHermitianError(ValueError):
    pass


class DegeneracyError(RuntimeError):
    """Raised when an eigenframe cannot be tracked or differentiated."""


@dataclass(frozen=True)
class EigenFrame:
    """Eigenvalues and column eigenvectors of a Hermitian matrix.

    ``aux`` optionally carries the auxiliary radical (r or s) of the
    analytic five-state spectra.
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray
    aux: float | None = None

    def __post_init__(self):
        for arr in (self.eigenvalues, self.vectors):
            arr.flags.writeable = False

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)


def check_hermitian(H: np.ndarray, tol: float = HERMITICITY_TOL) -> np.ndarray:
    H = np.asarray(H, dtype=np.complex128)
    if H.ndim < 2 or H.shape[-1] != H.shape[-2]:
        raise NonHermitianError(f"expected square matrix, got shape {H.shape}")
    if H.shape[-1] > MAX_DIM:
        raise ValueError(f"dimension {H.shape[-1]} exceeds supported maximum {MAX_DIM}")
    asym = np.max(np.abs(H - np.conj(np.swapaxes(H, -1, -2)))) if H.size else 0.0
    if asym > tol:
        raise NonHermitianError(f"matrix is not Hermitian (asymmetry {asym:.3e} > {tol:g})")
    return H


def fix_gauge(vectors: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real positive.

    Works on a single matrix or a stack. Near-ties are broken toward the
    lowest row index so the choice is stable under roundoff.
    """
    V = np.array(vectors, dtype=np.complex128)
    mags = np.abs(V)
    big = mags >= (mags.max(axis=-2, keepdims=True) - 1e-12)
    pivot = np.argmax(big, axis=-2)
    ref = np.take_along_axis(V, pivot[..., None, :], axis=-2)
    phase = np.conj(ref) / np.abs(ref)
    return V * phase


def eig_hermitian(H: np.ndarray) -> EigenFrame:
    """Deterministic eigendecomposition of a Hermitian matrix.

    Eigenvalues ascend; each eigenvector has its largest component real and
    positive.
    """
    H = check_hermitian(H)
    if H.ndim != 2:
        raise ValueError("eig_hermitian takes a single matrix; use eigh_stack for batches")
    lam, V = np.linalg.eigh(H)
    return EigenFrame(lam, fix_gauge(V))


def eigh_stack(H: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batched version of :func:`eig_hermitian` returning raw arrays."""
    H = check_hermitian(H)
    lam, V = np.linalg.eigh(H)
    return lam, fix_gauge(V)


def gauge_align(prev: EigenFrame, curr: EigenFrame) -> EigenFrame:
    """Match ``curr`` to ``prev`` column by column.

    Columns are paired by maximal overlap modulus and each matched column is
    rephased so that ``<prev_k|curr_k>`` is real and positive.
    """
    O = prev.vectors.conj().T @ curr.vectors
    mag = np.abs(O)
    n = prev.dim
    order = np.empty(n, dtype=int)
    for k in range(n):
        row = np.sort(mag[k])[::-1]
        if n > 1 and row[0] - row[1] < AMBIGUITY_TOL:
            raise DegeneracyError(
                f"ambiguous frame matching for column {k}: overlaps {row[0]:.9f} and {row[1]:.9f}"
            )
        order[k] = int(np.argmax(mag[k]))
    if len(set(order.tolist())) != n:
        raise DegeneracyError("frame matching is not a permutation")
    V = curr.vectors[:, order]
    ov = O[np.arange(n), order]
    V = V * (np.conj(ov) / np.abs(ov))
    return EigenFrame(curr.eigenvalues[order].copy(), V, curr.aux)


def eigvec_derivative(
    eigenvalues: np.ndarray,
    vectors: np.ndarray,
    dH: np.ndarray,
    columns=None,
    min_gap: float = 1e-9,
) -> np.ndarray:
    """Parallel-transport derivative of eigenvectors (sum over states).

    dphi_n = sum_{k != n} phi_k <phi_k|dH|phi_n> / (lambda_n - lambda_k)

    Accepts stacks (leading batch axes). ``columns`` restricts the result to
    selected eigenvectors; only gaps involving those columns must exceed
    ``min_gap``.
    """
    lam = np.asarray(eigenvalues)
    V = np.asarray(vectors)
    n = lam.shape[-1]
    cols = np.arange(n) if columns is None else np.atleast_1d(columns)
    G = np.conj(np.swapaxes(V, -1, -2)) @ dH @ V[..., :, cols]
    gap = lam[..., cols][..., None, :] - lam[..., :, None]
    own = np.arange(n)[:, None] == cols[None, :]
    if np.any(np.abs(np.where(own, 1.0, gap)) < min_gap):
        raise DegeneracyError("eigenvalue gap below threshold; derivative undefined")
    coef = np.where(own, 0.0, G / np.where(own, 1.0, gap))
    return V @ coef


def finite_difference_frame_derivative(frame_at, x: float, h: float) -> tuple[EigenFrame, np.ndarray]:
    """Central-difference derivative of an eigenframe along a path.

    ``frame_at(x)`` returns an :class:`EigenFrame`; the neighbours at
    ``x +/- h`` are gauge-aligned to the frame at ``x`` before differencing.
    """
    mid = frame_at(x)
    lo = gauge_align(mid, frame_at(x - h))
    hi = gauge_align(mid, frame_at(x + h))
    return mid, (hi.vectors - lo.vectors) / (2.0 * h)


def expm_hermitian(K: np.ndarray) -> np.ndarray:
    """exp(-i K) for Hermitian K (single or stacked)."""
    lam, V = np.linalg.eigh(K)
    return (V * np.exp(-1j * lam)[..., None, :]) @ np.conj(np.swapaxes(V, -1, -2))


def unitary_step(H_mid: np.ndarray, dt: float, c: np.ndarray) -> np.ndarray:
    """Advance ``c`` by exp(-i H_mid dt)."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    H_mid = check_hermitian(H_mid)
    return expm_hermitian(H_mid * dt) @ np.asarray(c, dtype=np.complex128)


def magnus4_generator(H1: np.ndarray, H2: np.ndarray, h: float) -> np.ndarray:
    """Hermitian K with exp(-iK) the fourth-order Magnus step.

    ``H1`` and ``H2`` are evaluated at the two Gauss-Legendre nodes of a step
    of signed length ``h``, ordered along the direction of propagation.
    """
    comm = H2 @ H1 - H1 @ H2
    return 0.5 * h * (H1 + H2) - 1j * (np.sqrt(3.0) / 12.0) * h * h * comm


GAUSS_OFFSETS = (0.5 - np.sqrt(3.0) / 6.0, 0.5 + np.sqrt(3.0) / 6.0)
