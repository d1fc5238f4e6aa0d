"""Chain systems, Gaussian pump/Stokes pairs and closed-form ground truth.

Time is measured in units of the pulse width T and frequencies in 1/T.
States are indexed along the chain starting from zero; for the M-systems the
order is m_g=-2, m_e=-1, m_g=0, m_e=+1, m_g=+2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SQRT_PI = np.sqrt(np.pi)


class UnsupportedSchemeError(ValueError):
    pass


class UndefinedAngleError(ValueError):
    """Both fields vanish, so the mixing angle is undefined."""


class SingularPointError(ValueError):
    pass


@dataclass(frozen=True)
class LevelScheme:
    """A resonant chain with signed Clebsch-Gordan factors.

    ``parity[k]`` says whether link k (between states k and k+1) is driven
    by the pump ("P") or the Stokes ("S") field.
    """

    tag: str
    cg: tuple[float, ...]
    parity: tuple[str, ...]
    labels: tuple[str, ...] = ()
    link_names: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        n = len(self.cg) + 1
        if n % 2 == 0 or n < 3:
            raise ValueError(f"chain must have an odd number (>=3) of states, got {n}")
        if len(self.parity) != len(self.cg):
            raise ValueError("parity must list one field per link")
        if any(p not in ("P", "S") for p in self.parity):
            raise ValueError(f"parity entries must be 'P' or 'S', got {self.parity}")
        if self.labels and len(self.labels) != n:
            raise ValueError("labels must name every state")

    @property
    def dim(self) -> int:
        return len(self.cg) + 1

    @property
    def initial(self) -> int:
        return 0

    @property
    def target(self) -> int:
        return self.dim - 1

    @property
    def dark_index(self) -> int:
        # spectrum of a bipartite chain is symmetric; zero sits in the middle
        return self.dim // 2

    def link_name(self, p: int, q: int) -> str:
        p, q = min(p, q), max(p, q)
        return self.link_names.get((p, q), f"Omega_{p + 1},{q + 1}")


def _alternating(n_links: int) -> tuple[str, ...]:
    return tuple("P" if k % 2 == 0 else "S" for k in range(n_links))


_M_NAMES = {
    (0, 2): "Omega_-2,0",
    (2, 4): "Omega_0,2",
    (0, 4): "Omega_-2,2",
    (1, 3): "Omega^-1,1",
}


def three_state() -> LevelScheme:
    return LevelScheme("three", (1.0, 1.0), ("P", "S"), ("1", "2", "3"), {(0, 2): "Omega_Q"})


def m21() -> LevelScheme:
    """J_g=2 <-> J_e=1 M-system driven by sigma+ (pump) and sigma- (Stokes)."""
    cg = (np.sqrt(3 / 5), np.sqrt(1 / 10), np.sqrt(1 / 10), np.sqrt(3 / 5))
    return LevelScheme("m21", cg, _alternating(4), ("g-2", "e-1", "g0", "e+1", "g+2"), dict(_M_NAMES))


def m22() -> LevelScheme:
    """J_g=2 <-> J_e=2 M-system with signed (Condon-Shortley) coefficients."""
    cg = (-np.sqrt(1 / 3), np.sqrt(1 / 2), -np.sqrt(1 / 2), np.sqrt(1 / 3))
    return LevelScheme("m22", cg, _alternating(4), ("g-2", "e-1", "g0", "e+1", "g+2"), dict(_M_NAMES))


def sigma_pi_22() -> LevelScheme:
    """J_g=2 <-> J_e=2 chain from m_g=0 under sigma+ (pump) and pi (Stokes)."""
    cg = (np.sqrt(1 / 2), np.sqrt(1 / 6), np.sqrt(1 / 3), np.sqrt(2 / 3))
    names = {(0, 2): "Omega_0,1", (2, 4): "Omega_1,2"}
    return LevelScheme("sp22", cg, _alternating(4), ("g0", "e1", "g1", "e2", "g2"), names)


def sigma_pi_3212() -> LevelScheme:
    """J_g=3/2 <-> J_e=1/2 chain from m_g=-3/2 under sigma+ and pi."""
    cg = (np.sqrt(1 / 2), -np.sqrt(1 / 3), np.sqrt(1 / 6), -np.sqrt(1 / 3))
    names = {(0, 2): "Omega_-3/2,-1/2", (2, 4): "Omega_-1/2,1/2"}
    return LevelScheme("sp3212", cg, _alternating(4), ("g-3/2", "e-1/2", "g-1/2", "e1/2", "g1/2"), names)


def generic_chain(cg, parity=None, tag: str = "chain") -> LevelScheme:
    cg = tuple(float(x) for x in cg)
    return LevelScheme(tag, cg, tuple(parity) if parity is not None else _alternating(len(cg)))


SCHEMES = {
    "three": three_state,
    "m21": m21,
    "m22": m22,
    "sp22": sigma_pi_22,
    "sp3212": sigma_pi_3212,
}


def get_scheme(tag: str) -> LevelScheme:
    try:
        return SCHEMES[tag]()
    except KeyError:
        raise UnsupportedSchemeError(f"unknown scheme {tag!r}; choose from {sorted(SCHEMES)}") from None


# ---------------------------------------------------------------- drives


@dataclass(frozen=True)
class GaussianDrive:
    """Gaussian pump/Stokes pair; Stokes centred at -delay/2, pump at +delay/2."""

    peak: float
    delay: float = 1.0
    width: float = 1.0

    def __post_init__(self):
        if not self.peak >= 0:
            raise ValueError(f"peak Rabi frequency must be non-negative, got {self.peak}")
        if not self.width > 0:
            raise ValueError(f"pulse width must be positive, got {self.width}")

    @classmethod
    def from_area(cls, area: float, delay: float = 1.0, width: float = 1.0) -> "GaussianDrive":
        """Peak chosen so that each pulse has temporal area ``area``."""
        return cls(area / (SQRT_PI * width), delay, width)

    @property
    def area(self) -> float:
        return self.peak * SQRT_PI * self.width


def evaluate_drive(d: GaussianDrive, t):
    """Return (Omega_P, Omega_S, dOmega_P/dt, dOmega_S/dt) at ``t``."""
    t = np.asarray(t, dtype=float)
    T2 = d.width * d.width
    up = t - 0.5 * d.delay
    us = t + 0.5 * d.delay
    P = d.peak * np.exp(-up * up / T2)
    S = d.peak * np.exp(-us * us / T2)
    return P, S, -2.0 * up / T2 * P, -2.0 * us / T2 * S


@dataclass(frozen=True)
class MixingState:
    theta: np.ndarray | float
    theta_dot: np.ndarray | float
    rms: np.ndarray | float
    t: np.ndarray | float | None = None


def mixing_state(P, S, dP, dS, t=None) -> MixingState:
    P, S, dP, dS = (np.asarray(x, dtype=float) for x in (P, S, dP, dS))
    L2 = P * P + S * S
    if np.any(L2 == 0):
        raise UndefinedAngleError("mixing angle undefined where both fields vanish")
    theta = np.arctan2(P, S)
    theta_dot = (dP * S - P * dS) / L2
    out = (theta, theta_dot, np.sqrt(L2))
    if theta.ndim == 0:
        out = tuple(float(x) for x in out)
    return MixingState(*out, t=t)


def drive_mixing(d: GaussianDrive, t) -> MixingState:
    return mixing_state(*evaluate_drive(d, t), t=t)


# ------------------------------------------------------------ hamiltonians


def build_hamiltonian(s: LevelScheme, P, S) -> np.ndarray:
    """Resonant chain Hamiltonian (hbar = 1) for scalar or array fields.

    Link k carries 0.5 * cg[k] * (Omega_P or Omega_S). Array inputs give a
    stack with the time axis first.
    """
    P = np.asarray(P, dtype=float)
    S = np.asarray(S, dtype=float)
    shape = np.broadcast(P, S).shape
    n = s.dim
    H = np.zeros(shape + (n, n), dtype=np.complex128)
    for k, (xi, which) in enumerate(zip(s.cg, s.parity)):
        v = 0.5 * xi * (P if which == "P" else S)
        H[..., k, k + 1] = v
        H[..., k + 1, k] = v
    return H


def unit_hamiltonian(s: LevelScheme, theta):
    """Hamiltonian at unit rms Rabi frequency and its theta derivative."""
    theta = np.asarray(theta, dtype=float)
    return (
        build_hamiltonian(s, np.sin(theta), np.cos(theta)),
        build_hamiltonian(s, np.cos(theta), -np.sin(theta)),
    )


def analytic_spectrum(s: LevelScheme, theta: float, rms: float):
    """Closed-form eigenvalues of the M-systems, ascending, plus r or s."""
    c4 = np.cos(4 * theta)
    if s.tag == "m21":
        aux = np.sqrt(13 + 12 * c4)
        lo, hi = np.sqrt(7 - aux), np.sqrt(7 + aux)
        den = 4 * np.sqrt(5)
    elif s.tag == "m22":
        aux = np.sqrt(5 - 4 * c4)
        lo, hi = np.sqrt(5 - aux), np.sqrt(5 + aux)
        den = 4 * np.sqrt(3)
    else:
        raise UnsupportedSchemeError(f"no closed-form spectrum for {s.tag!r}")
    lam = rms / den * np.array([-hi, -lo, 0.0, lo, hi])
    return lam, float(aux)


def dark_state(s: LevelScheme, theta: float) -> np.ndarray:
    """Closed-form dark states (three-state and both M-systems)."""
    c, sn = np.cos(theta), np.sin(theta)
    if s.tag == "three":
        return np.array([c, 0.0, -sn])
    if s.tag == "m21":
        v = np.array([np.sqrt(2) * c * c, 0.0, -np.sqrt(3) * np.sin(2 * theta), 0.0, np.sqrt(2) * sn * sn])
        return v / np.sqrt(3 - np.cos(4 * theta))
    if s.tag == "m22":
        v = np.array([np.sqrt(6) * c * c, 0.0, np.sin(2 * theta), 0.0, np.sqrt(6) * sn * sn])
        return v / np.sqrt(5 + np.cos(4 * theta))
    raise UnsupportedSchemeError(f"no closed-form dark state for {s.tag!r}; use chain_dark_state")


def chain_dark_state(s: LevelScheme, theta) -> np.ndarray:
    """Kernel of the chain Hamiltonian on the even (ground) sites.

    Solves h_{2j} g_j + h_{2j+1} g_{j+1} = 0 for every excited site j by the
    product form g_j = (-1)^j prod_{i<j} h_{2i} prod_{i>=j} h_{2i+1}, which
    stays finite when either field vanishes. Works for any odd chain and
    vectorises over ``theta``.
    """
    theta = np.asarray(theta, dtype=float)
    P, S = np.sin(theta), np.cos(theta)
    h = [xi * (P if which == "P" else S) for xi, which in zip(s.cg, s.parity)]
    m = s.dim // 2
    v = np.zeros(theta.shape + (s.dim,))
    for j in range(m + 1):
        g = (-1.0) ** j * np.ones_like(theta)
        for i in range(j):
            g = g * h[2 * i]
        for i in range(j, m):
            g = g * h[2 * i + 1]
        v[..., 2 * j] = g
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def analytic_nac(s: LevelScheme, theta: float, theta_dot: float, eps: float = 1e-12) -> dict[str, complex]:
    """Closed-form nonadiabatic couplings -i<phi_xy|d phi_0/dt> of the M-systems.

    Keys are "--", "+-", "++", "-+". Raises :class:`SingularPointError` where a
    radicand in a denominator is not safely positive (theta = 0 or pi/2 for
    one of the pairs, where the expression is 0/0).
    """
    c = np.cos(theta)
    c2, c4 = np.cos(2 * theta), np.cos(4 * theta)
    if s.tag == "m21":
        r = np.sqrt(13 + 12 * c4)
        num_a, rad_a = 1 + 4 * c2 + r, (3 - c4) * (7 - r) * (r * r + 5 * r * c2)
        num_b, rad_b = 1 + 4 * c2 - r, (3 - c4) * (7 + r) * (r * r - 5 * r * c2)
    elif s.tag == "m22":
        q = np.sqrt(5 - 4 * c4)
        num_a, rad_a = 3 - 4 * c2 + q, (5 + c4) * (5 - q) * (q * q - q * c2)
        num_b, rad_b = 3 - 4 * c2 - q, (5 + c4) * (5 + q) * (q * q + q * c2)
    else:
        raise UnsupportedSchemeError(f"no closed-form couplings for {s.tag!r}")
    if rad_a < eps or rad_b < eps:
        raise SingularPointError(f"coupling formula singular at theta={theta!r}")
    a = -1j * np.sqrt(6) * num_a * c / np.sqrt(rad_a) * theta_dot
    b = -1j * np.sqrt(6) * num_b * c / np.sqrt(rad_b) * theta_dot
    return {"--": a, "+-": a, "++": b, "-+": b}


NAC_ORDER = ("-+", "--", "0", "+-", "++")
"""Labels of the M-system adiabatic states in ascending eigenvalue order."""
