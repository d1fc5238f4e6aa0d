"""Shortcut (counterdiabatic) fields for chain STIRAP.

Closed forms for the three-state Q field and for the type I/II/III shortcuts
of the five-state systems, plus two numeric constructions used to check them
and to extend them to arbitrary chains:

* the full prescription H_s = i dW/dt W^dagger, and
* the reduced linear system H_s^dagger |phi_0> = -i W dW^dagger/dt |phi_0>
  solved for real amplitudes on a chosen set of i-phased links.

Every shortcut coupling enters the Hamiltonian as 0.5 * exp(i phi) * Omega on
the upper triangle with phi = pi/2 unless perturbed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hermitian import eigh_stack, eigvec_derivative
from .schemes import LevelScheme, MixingState, UnsupportedSchemeError, unit_hamiltonian

KINDS = ("none", "I", "II", "III", "numeric")

# Beyond this the consistent reduced solve loses ~1e-8 relative accuracy.
COND_LIMIT = 1e8
RESIDUAL_LIMIT = 1e-8

HALF_PI = 0.5 * np.pi


class ShortcutMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class ShortcutFields:
    """Named shortcut amplitudes (1/T) and the link each one drives."""

    kind: str
    amplitudes: dict = field(default_factory=dict)
    positions: dict = field(default_factory=dict)
    residual: np.ndarray | float | None = None
    condition: np.ndarray | float | None = None

    @property
    def names(self) -> list[str]:
        return list(self.amplitudes)

    def __getitem__(self, name):
        return self.amplitudes[name]


@dataclass(frozen=True)
class ShortcutScheme:
    """Which shortcut is active and how it is perturbed.

    ``phase`` rotates the coupling on ``phase_link``; ``scale`` multiplies
    the coupling on ``scale_link``; ``beta`` multiplies the Stokes field of
    the bare Hamiltonian. ``mask`` lists the unknowns of the numeric reduced
    solve: each entry is a tuple of links sharing one amplitude.
    """

    kind: str = "none"
    mask: tuple | None = None
    phase: float = HALF_PI
    phase_link: tuple = (2, 4)
    scale: float = 1.0
    scale_link: tuple = (0, 2)
    beta: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown shortcut kind {self.kind!r}; choose from {KINDS}")
        if self.mask is not None:
            object.__setattr__(self, "mask", normalize_mask(self.mask))
            if self.kind != "numeric":
                raise ValueError("a mask is only meaningful for the numeric shortcut")
        object.__setattr__(self, "phase_link", tuple(sorted(self.phase_link)))
        object.__setattr__(self, "scale_link", tuple(sorted(self.scale_link)))


def normalize_mask(mask) -> tuple:
    out = []
    for group in mask:
        group = tuple(group)
        if len(group) == 2 and all(isinstance(x, (int, np.integer)) for x in group):
            group = (group,)
        links = []
        for p, q in group:
            p, q = int(p), int(q)
            if p == q:
                raise ValueError(f"mask link {(p, q)} is on the diagonal")
            links.append((min(p, q), max(p, q)))
        out.append(tuple(links))
    return tuple(out)


def type_ii_mask(s: LevelScheme) -> tuple:
    """Independent couplings between neighbouring dark-state (even) sites."""
    return tuple((((k, k + 2),)) for k in range(0, s.dim - 2, 2))


def type_iii_mask(s: LevelScheme) -> tuple:
    if s.dim != 5:
        raise UnsupportedSchemeError("type III mask is defined for five-state chains")
    return (((0, 2), (2, 4)), ((0, 4),))


# --------------------------------------------------------- closed forms


def _ratio(ms: MixingState):
    return np.asarray(ms.theta, dtype=float), np.asarray(ms.theta_dot, dtype=float)


def shortcut_three_state(ms: MixingState) -> ShortcutFields:
    _, thd = _ratio(ms)
    return ShortcutFields("Q", {"Omega_Q": 2.0 * thd}, {"Omega_Q": (0, 2)})


def _m_fields(kind, names, values) -> ShortcutFields:
    pos = {"Omega_-2,0": (0, 2), "Omega_0,2": (2, 4), "Omega_-2,2": (0, 4), "Omega^-1,1": (1, 3)}
    return ShortcutFields(kind, dict(zip(names, values)), {n: pos[n] for n in names})


def shortcut_type_I(s: LevelScheme, ms: MixingState) -> ShortcutFields:
    """Four-field full prescription for the M-systems.

    For J_g=2 <-> J_e=2 the excited-level field is returned as
    6/(5 - 4 cos 4theta) * theta_dot: with the Clebsch-Gordan signs used in
    :func:`msstirap.schemes.m22` this is the sign that cancels every
    nonadiabatic coupling. The opposite sign, 6/(4 cos 4theta - 5), goes
    with the other phase convention for m_e=+1.
    """
    th, thd = _ratio(ms)
    c2, c4, c6 = np.cos(2 * th), np.cos(4 * th), np.cos(6 * th)
    s2 = np.sin(2 * th)
    if s.tag == "m21":
        den = (3 - c4) * (13 + 12 * c4)
        vals = (
            np.sqrt(6) * (34 + 29 * c2 + 26 * c4 + 11 * c6) / den,
            np.sqrt(6) * (34 - 29 * c2 + 26 * c4 - 11 * c6) / den,
            -4 * (1 + 9 * c4) * s2 / den,
            10 / (13 + 12 * c4),
        )
    elif s.tag == "m22":
        den = (4 * c4 - 5) * (c4 + 5)
        vals = (
            np.sqrt(6) * (10 + 9 * c2 - 14 * c4 - c6) / den,
            np.sqrt(6) * (10 - 9 * c2 - 14 * c4 + c6) / den,
            12 * (5 - 3 * c4) * s2 / den,
            6 / (5 - 4 * c4),
        )
    else:
        raise UnsupportedSchemeError(f"type I shortcut not tabulated for {s.tag!r}")
    names = ("Omega_-2,0", "Omega_0,2", "Omega_-2,2", "Omega^-1,1")
    return _m_fields("I", names, [v * thd for v in vals])


def shortcut_type_II(s: LevelScheme, ms: MixingState) -> ShortcutFields:
    th, thd = _ratio(ms)
    c2, c4 = np.cos(2 * th), np.cos(4 * th)
    if s.tag == "m21":
        k = 4 * np.sqrt(2 / 3) / (3 - c4)
        a, b = k * (2 + c2), k * (2 - c2)
    elif s.tag == "m22":
        k = -4 * np.sqrt(6) / (5 + c4)
        a, b = k * (2 - c2), k * (2 + c2)
    elif s.tag == "sp22":
        c1 = np.cos(th)
        den = 3 - c1**4
        a, b = 4 * np.sqrt(3) / den, 2 * np.sqrt(2) * (3 - c1**2) / den
    elif s.tag == "sp3212":
        c1 = np.cos(th)
        den = 3 + c1**4
        a, b = -4 * np.sqrt(6) / den, -2 * np.sqrt(2) * (3 + c1**2) / den
    else:
        raise UnsupportedSchemeError(f"type II shortcut not tabulated for {s.tag!r}")
    na, nb = s.link_name(0, 2), s.link_name(2, 4)
    return ShortcutFields("II", {na: a * thd, nb: b * thd}, {na: (0, 2), nb: (2, 4)})


def shortcut_type_III(s: LevelScheme, ms: MixingState) -> ShortcutFields:
    th, thd = _ratio(ms)
    c4, s2 = np.cos(4 * th), np.sin(2 * th)
    if s.tag == "m21":
        den = 3 - c4
        a, e = 4 * np.sqrt(6) / den, 8 * s2 / den
    elif s.tag == "m22":
        den = 5 + c4
        a, e = -4 * np.sqrt(6) / den, -8 * s2 / den
    else:
        raise UnsupportedSchemeError(f"type III shortcut not tabulated for {s.tag!r}")
    names = ("Omega_-2,0", "Omega_0,2", "Omega_-2,2")
    return _m_fields("III", names, (a * thd, a * thd, e * thd))


# -------------------------------------------------------- numeric oracles


def numeric_full_shortcut(W: np.ndarray, W_dot: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """H_s = i dW/dt W^dagger (returned Hermitian-symmetrised)."""
    W = np.asarray(W, dtype=np.complex128)
    Wh = np.conj(np.swapaxes(W, -1, -2))
    n = W.shape[-1]
    if np.max(np.abs(Wh @ W - np.eye(n))) > tol:
        raise ValueError("eigenframe is not unitary")
    Hs = 1j * np.asarray(W_dot) @ Wh
    return 0.5 * (Hs + np.conj(np.swapaxes(Hs, -1, -2)))


def link_amplitudes(Hs: np.ndarray, links) -> dict:
    """Read real amplitudes off i-phased links: H_s[p, q] = (i/2) Omega."""
    return {(p, q): np.real(-2j * Hs[..., p, q]) for p, q in links}


def _mask_columns(mask, phi0: np.ndarray) -> np.ndarray:
    """Columns M_g phi0 for each unknown g (M_g Hermitian, so M_g^dagger = M_g)."""
    n = phi0.shape[-1]
    cols = []
    for group in mask:
        M = np.zeros((n, n), dtype=np.complex128)
        for p, q in group:
            M[p, q] += 0.5j
            M[q, p] -= 0.5j
        cols.append(phi0 @ M.T)
    return np.stack(cols, axis=-1)


def _solve_real(A: np.ndarray, b: np.ndarray):
    """Least squares for real unknowns in a complex system; batched."""
    Ar = np.concatenate([A.real, A.imag], axis=-2)
    br = np.concatenate([b.real, b.imag], axis=-1)
    U, sv, Vt = np.linalg.svd(Ar, full_matrices=False)
    keep = sv > sv[..., :1] * 1e-15
    proj = np.einsum("...ji,...j->...i", U, br)
    coef = np.where(keep, proj / np.where(keep, sv, 1.0), 0.0)
    x = np.einsum("...ji,...j->...i", Vt, coef)
    resid = np.linalg.norm(np.einsum("...ij,...j->...i", Ar, x) - br, axis=-1)
    with np.errstate(divide="ignore"):
        cond = sv[..., 0] / sv[..., -1]
    return x, resid, cond


def numeric_reduced_shortcut(mask, phi0, W, W_dot) -> ShortcutFields:
    """Solve H_s^dagger|phi0> = -i W dW^dagger/dt |phi0> on the masked links.

    Returns the amplitudes with the residual and condition number attached;
    a residual above ``RESIDUAL_LIMIT`` means the ansatz cannot cancel the
    dark-state couplings.
    """
    mask = normalize_mask(mask)
    phi0 = np.asarray(phi0, dtype=np.complex128)
    W = np.asarray(W, dtype=np.complex128)
    rhs = -1j * W @ np.conj(np.asarray(W_dot)).T @ phi0
    x, resid, cond = _solve_real(_mask_columns(mask, phi0), rhs)
    return _fields_from_solution("numeric", mask, x, float(resid), float(cond))


def _fields_from_solution(kind, mask, x, resid, cond, scheme: LevelScheme | None = None):
    amps, pos = {}, {}
    for g, group in enumerate(mask):
        for p, q in group:
            name = scheme.link_name(p, q) if scheme is not None else f"Omega_{p + 1},{q + 1}"
            amps[name] = x[..., g]
            pos[name] = (p, q)
    return ShortcutFields(kind, amps, pos, resid, cond)


def unit_frame(s: LevelScheme, theta):
    """Eigenframe at unit rms field and its theta-derivative (stacked).

    Eigenvectors depend on time only through theta, so dW/dt is this
    derivative times theta_dot regardless of the field strength.
    """
    H, dH = unit_hamiltonian(s, theta)
    lam, W = eigh_stack(H)
    dW = eigvec_derivative(lam, W, dH)
    return lam, W, dW


def _reduced_unit(s: LevelScheme, theta: np.ndarray, mask):
    H, dH = unit_hamiltonian(s, theta)
    lam, W = eigh_stack(H)
    k = s.dark_index
    dphi = eigvec_derivative(lam, W, dH, columns=[k])[..., 0]
    phi0 = W[..., k]
    # -i W dW^dagger phi0 = i dphi0 because W dW^dagger = -dW W^dagger
    return _solve_real(_mask_columns(mask, phi0), 1j * dphi)


def reduced_shortcut_along(s: LevelScheme, ms: MixingState, mask=None, kind: str = "numeric") -> ShortcutFields:
    """Numeric reduced shortcut at every sample of a mixing-angle history.

    Ill-conditioned samples (e.g. type III at theta = pi/4, where the system
    loses rank) are replaced by four-point interpolation in theta of the
    amplitude per unit theta_dot from well-conditioned neighbours.
    """
    mask = normalize_mask(mask if mask is not None else type_ii_mask(s))
    theta, thd = _ratio(ms)
    scalar = theta.ndim == 0
    theta = np.atleast_1d(theta)
    x, resid, cond = _reduced_unit(s, theta, mask)
    bad = ~(cond < COND_LIMIT)
    for i in np.flatnonzero(bad):
        x[i] = _continue(s, theta[i], mask)
    if np.any(resid[~bad] > RESIDUAL_LIMIT):
        worst = float(np.max(resid[~bad]))
        raise ShortcutMismatchError(f"mask cannot cancel dark-state couplings (residual {worst:.2e})")
    x = x * np.atleast_1d(thd)[..., None]
    if scalar:
        x, resid, cond = x[0], float(resid[0]), float(cond[0])
    return _fields_from_solution(kind, mask, x, resid, cond, s)


def _continue(s, theta0, mask):
    delta = 1e-3
    w = np.array([-1.0, 4.0, 4.0, -1.0]) / 6.0
    for _ in range(6):
        pts = theta0 + delta * np.array([-2.0, -1.0, 1.0, 2.0])
        x, _, cond = _reduced_unit(s, pts, mask)
        if np.all(cond < COND_LIMIT):
            return w @ x
        delta *= 4.0
    raise ShortcutMismatchError(f"no well-conditioned neighbourhood around theta={theta0}")


def full_shortcut_along(s: LevelScheme, ms: MixingState) -> np.ndarray:
    """Full prescription i dW/dt W^dagger along a mixing-angle history."""
    theta, thd = _ratio(ms)
    _, W, dW = unit_frame(s, theta)
    return numeric_full_shortcut(W, dW * thd[..., None, None])


# ------------------------------------------------------------ dispatch


def shortcut_fields(s: LevelScheme, sc: ShortcutScheme, ms: MixingState) -> ShortcutFields:
    if sc.kind == "none":
        return ShortcutFields("none")
    if sc.kind in ("I", "II") and s.tag == "three":
        return shortcut_three_state(ms)
    if sc.kind == "I":
        return shortcut_type_I(s, ms)
    if sc.kind == "II":
        return shortcut_type_II(s, ms)
    if sc.kind == "III":
        return shortcut_type_III(s, ms)
    return reduced_shortcut_along(s, ms, sc.mask)


_COMPATIBLE = {
    "none": {"none"},
    "I": {"I", "Q"},
    "II": {"II", "Q"},
    "III": {"III"},
    "numeric": {"numeric"},
}


def _phase_factor(angle: float) -> complex:
    return 1j if angle == HALF_PI else np.exp(1j * angle)


def assemble_total(s: LevelScheme, bare: np.ndarray, f: ShortcutFields, scheme: ShortcutScheme) -> np.ndarray:
    """Bare Hamiltonian plus shortcut couplings.

    Each link (p < q) gets 0.5 * exp(i angle) * scale * Omega at [p, q] and the
    conjugate at [q, p]; angle is pi/2 except on ``scheme.phase_link``.
    """
    if f.kind not in _COMPATIBLE[scheme.kind]:
        raise ShortcutMismatchError(f"fields of kind {f.kind!r} do not belong to shortcut {scheme.kind!r}")
    links = set(f.positions.values())
    if scheme.phase != HALF_PI and scheme.phase_link not in links:
        raise ShortcutMismatchError(f"phase link {scheme.phase_link} carries no shortcut field")
    if scheme.scale != 1.0 and scheme.scale_link not in links:
        raise ShortcutMismatchError(f"scale link {scheme.scale_link} carries no shortcut field")
    H = np.array(bare, dtype=np.complex128)
    for name, amp in f.amplitudes.items():
        p, q = f.positions[name]
        if max(p, q) >= s.dim:
            raise ShortcutMismatchError(f"field {name} outside a {s.dim}-state chain")
        angle = scheme.phase if (p, q) == scheme.phase_link else HALF_PI
        scale = scheme.scale if (p, q) == scheme.scale_link else 1.0
        v = 0.5 * scale * _phase_factor(angle) * np.asarray(amp)
        H[..., p, q] += v
        H[..., q, p] += np.conj(v)
    return H
