"""Time-dependent Schroedinger propagation for chain STIRAP with shortcuts."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .hermitian import (
    GAUSS_OFFSETS,
    DegeneracyError,
    eig_hermitian,
    eigh_stack,
    expm_hermitian,
    finite_difference_frame_derivative,
    gauge_align,
    magnus4_generator,
)
from .schemes import GaussianDrive, LevelScheme, build_hamiltonian, evaluate_drive, mixing_state, unit_hamiltonian
from .shortcuts import ShortcutScheme, assemble_total, shortcut_fields, unit_frame

NORM_TOL = 1e-9
# Diagnostics that need the instantaneous eigenframe are skipped below this
# rms Rabi frequency (1/T).
FIELD_OFF_RMS = 1e-6
# Populations only need theta, which is defined for any non-zero field.
PROJECTION_MIN_RMS = 1e-12


class IntegratorError(RuntimeError):
    pass


@dataclass(frozen=True)
class PropagationConfig:
    t_start: float = -5.0
    t_end: float = 5.0
    steps: int = 4096
    check_convergence: bool = False
    initial: int = 0
    method: str = "magnus4"

    def __post_init__(self):
        if not self.t_start < self.t_end:
            raise ValueError(f"t_start ({self.t_start}) must precede t_end ({self.t_end})")
        if int(self.steps) != self.steps or self.steps < 2:
            raise ValueError(f"steps must be an integer >= 2, got {self.steps}")
        if self.method not in ("magnus4", "midpoint"):
            raise ValueError(f"unknown integrator {self.method!r}")
        if self.initial < 0:
            raise ValueError("initial state index must be non-negative")

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, int(self.steps) + 1)


@dataclass
class TrajectoryResult:
    times: np.ndarray
    amplitudes: np.ndarray
    target: int
    beta: float = 1.0
    adiabatic: np.ndarray | None = None
    adiabatic_valid: np.ndarray | None = None
    dark_index: int | None = None
    convergence_delta: float | None = None

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @property
    def efficiency(self) -> float:
        return transfer_efficiency(self, self.target)

    @property
    def dark_population(self) -> np.ndarray | None:
        if self.adiabatic is None:
            return None
        return self.adiabatic[:, self.dark_index]

    def to_csv(self, path) -> None:
        n = self.amplitudes.shape[1]
        header = ["t/T"]
        header += [f"Re_c{k + 1}" for k in range(n)] + [f"Im_c{k + 1}" for k in range(n)]
        header += [f"P{k + 1}" for k in range(n)] + ["P_dark"]
        dark = self.dark_population
        if dark is None:
            dark = np.full(len(self.times), np.nan)
        cols = [self.times, *self.amplitudes.real.T, *self.amplitudes.imag.T, *self.populations.T, dark]
        write_table(path, header, np.column_stack(cols))


def write_table(path, header, rows) -> None:
    """CSV with a header row and 12 significant digits."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in np.atleast_2d(rows):
            w.writerow([format(float(x), ".12g") for x in row])


def total_hamiltonian(s: LevelScheme, d: GaussianDrive, sc: ShortcutScheme, t) -> np.ndarray:
    """Bare chain (Stokes scaled by beta) plus the assembled shortcut at ``t``.

    Shortcut amplitudes follow the unperturbed pump/Stokes pair.
    """
    P, S, dP, dS = evaluate_drive(d, t)
    bare = build_hamiltonian(s, P, sc.beta * S)
    if sc.kind == "none":
        return bare
    ms = mixing_state(P, S, dP, dS, t=t)
    return assemble_total(s, bare, shortcut_fields(s, sc, ms), sc)


def step_operators(s, d, sc, grid: np.ndarray, method: str = "magnus4") -> np.ndarray:
    """One exact unitary per interval of ``grid`` (which may run backwards)."""
    grid = np.asarray(grid, dtype=float)
    h = np.diff(grid)
    t0 = grid[:-1]
    if method == "midpoint":
        K = total_hamiltonian(s, d, sc, t0 + 0.5 * h) * h[:, None, None]
    else:
        H1 = total_hamiltonian(s, d, sc, t0 + GAUSS_OFFSETS[0] * h)
        H2 = total_hamiltonian(s, d, sc, t0 + GAUSS_OFFSETS[1] * h)
        K = magnus4_generator(H1, H2, h[:, None, None])
    return expm_hermitian(K)


def _run(U: np.ndarray, c0: np.ndarray) -> np.ndarray:
    out = np.empty((len(U) + 1, len(c0)), dtype=np.complex128)
    out[0] = c = c0
    for k, u in enumerate(U, start=1):
        out[k] = c = u @ c
    return out


def propagate(
    s: LevelScheme,
    d: GaussianDrive,
    sc: ShortcutScheme | None = None,
    cfg: PropagationConfig | None = None,
) -> TrajectoryResult:
    """Integrate i dc/dt = H(t) c from the initial chain state.

    Uses the fourth-order Magnus step (two Gauss nodes) by default, or the
    exponential midpoint rule; either way every step is exactly unitary.
    """
    sc = sc or ShortcutScheme()
    cfg = cfg or PropagationConfig()
    if cfg.initial >= s.dim:
        raise ValueError(f"initial state {cfg.initial} outside a {s.dim}-state chain")
    grid = cfg.grid
    c0 = np.zeros(s.dim, dtype=np.complex128)
    c0[cfg.initial] = 1.0
    amps = _run(step_operators(s, d, sc, grid, cfg.method), c0)
    drift = np.max(np.abs(np.linalg.norm(amps, axis=1) - 1.0))
    if drift > NORM_TOL:
        raise IntegratorError(f"norm drift {drift:.3e} exceeds {NORM_TOL:g}")
    tr = TrajectoryResult(grid, amps, s.target, beta=sc.beta, dark_index=s.dark_index)
    if d.peak > 0:
        tr.adiabatic, tr.adiabatic_valid = adiabatic_projection(tr, s, d)
    if cfg.check_convergence:
        fine = PropagationConfig(cfg.t_start, cfg.t_end, 2 * int(cfg.steps), False, cfg.initial, cfg.method)
        c_fine = _run(step_operators(s, d, sc, fine.grid, cfg.method), c0)[-1]
        tr.convergence_delta = float(abs(abs(c_fine[s.target]) ** 2 - tr.efficiency))
    return tr


def propagate_backward(s, d, sc, cfg: PropagationConfig, c_end) -> np.ndarray:
    """Integrate from t_end back to t_start starting at ``c_end``."""
    grid = cfg.grid[::-1]
    return _run(step_operators(s, d, sc, grid, cfg.method), np.asarray(c_end, dtype=np.complex128))[-1]


def transfer_efficiency(tr: TrajectoryResult, target: int) -> float:
    return float(min(1.0, abs(tr.amplitudes[-1, target]) ** 2))


def adiabatic_projection(tr: TrajectoryResult, s: LevelScheme, d: GaussianDrive, min_rms: float = PROJECTION_MIN_RMS):
    """Populations of the bare-Hamiltonian adiabatic states along ``tr``.

    Returns ``(pops, valid)``; rows where the field is off are NaN and
    ``valid`` is False there. Columns follow ascending eigenvalue, which is
    continuous because the chain spectrum scales with the rms field and has no
    crossings.
    """
    P, S, _, _ = evaluate_drive(d, tr.times)
    S = tr.beta * S
    valid = np.sqrt(P * P + S * S) > min_rms
    pops = np.full(tr.amplitudes.shape, np.nan)
    if np.any(valid):
        H, _ = unit_hamiltonian(s, np.arctan2(P[valid], S[valid]))
        _, W = eigh_stack(H)
        proj = np.einsum("tji,tj->ti", W.conj(), tr.amplitudes[valid])
        pops[valid] = np.abs(proj) ** 2
    return pops, valid


def adiabatic_frame_hamiltonian(
    s: LevelScheme,
    d: GaussianDrive,
    sc: ShortcutScheme,
    t,
    derivative: str = "perturbative",
    min_rms: float = FIELD_OFF_RMS,
    fd_step: float = 1e-6,
) -> np.ndarray:
    """W^dagger (H + H_s) W - i W^dagger dW/dt in the bare adiabatic basis.

    ``derivative`` selects how dW/dt is obtained: the sum-over-states
    (parallel transport) formula, or central differences of gauge-aligned
    eigenframes of H(t) with step ``fd_step`` (scalar ``t`` only).
    """
    t = np.asarray(t, dtype=float)
    P, S, dP, dS = evaluate_drive(d, t)
    bare_ms = mixing_state(P, sc.beta * S, dP, sc.beta * dS)
    if np.any(np.asarray(bare_ms.rms) < min_rms):
        raise DegeneracyError(f"field too weak for an eigenframe (rms < {min_rms:g})")
    Htot = total_hamiltonian(s, d, sc, t)
    if derivative == "perturbative":
        _, W, dW = unit_frame(s, np.atleast_1d(bare_ms.theta))
        W_dot = dW * np.atleast_1d(bare_ms.theta_dot)[:, None, None]
        if t.ndim == 0:
            W, W_dot = W[0], W_dot[0]
    elif derivative == "finite_difference":
        if t.ndim != 0:
            raise ValueError("finite-difference frames take a scalar time")

        def frame_at(x):
            Px, Sx, _, _ = evaluate_drive(d, x)
            return eig_hermitian(build_hamiltonian(s, Px, sc.beta * Sx))

        mid, W_dot = finite_difference_frame_derivative(frame_at, float(t), fd_step)
        W = mid.vectors
    else:
        raise ValueError(f"unknown derivative method {derivative!r}")
    Wh = np.conj(np.swapaxes(W, -1, -2))
    return Wh @ Htot @ W - 1j * Wh @ W_dot


def nac_finite_difference(s: LevelScheme, d: GaussianDrive, times, h: float = 1e-6) -> np.ndarray:
    """-i <phi_k|d phi_0/dt> along a time path from gauge-aligned eigenframes.

    Frames at consecutive samples are chained through :func:`gauge_align` so
    that each eigenvector keeps one continuous sign along the whole path.
    Returns an array of shape (len(times), N).
    """
    def frame_at(x):
        Px, Sx, _, _ = evaluate_drive(d, x)
        return eig_hermitian(build_hamiltonian(s, Px, Sx))

    k0 = s.dark_index
    out = []
    prev = None
    for t in np.asarray(times, dtype=float):
        mid = frame_at(t)
        if prev is not None:
            mid = gauge_align(prev, mid)
        lo = gauge_align(mid, frame_at(t - h))
        hi = gauge_align(mid, frame_at(t + h))
        dphi0 = (hi.vectors[:, k0] - lo.vectors[:, k0]) / (2 * h)
        out.append(-1j * mid.vectors.conj().T @ dphi0)
        prev = mid
    return np.array(out)
