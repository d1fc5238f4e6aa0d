"""Self-checks: oracle equivalences, closed-form ground truth and invariants.

Each ``check_*`` function takes its tolerance as an argument and returns a
list of :class:`Check` records. ``run_all`` gathers them for the ``verify``
command.
"""

from __future__ import annotations

import filecmp
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .experiments import reference_drive
from .hermitian import eig_hermitian
from .propagator import (
    FIELD_OFF_RMS,
    PropagationConfig,
    adiabatic_frame_hamiltonian,
    nac_finite_difference,
    propagate,
    propagate_backward,
)
from .schemes import (
    GaussianDrive,
    MixingState,
    analytic_nac,
    analytic_spectrum,
    build_hamiltonian,
    dark_state,
    drive_mixing,
    get_scheme,
    NAC_ORDER,
)
from .shortcuts import (
    ShortcutScheme,
    full_shortcut_along,
    link_amplitudes,
    reduced_shortcut_along,
    shortcut_type_I,
    shortcut_type_II,
    shortcut_type_III,
    type_ii_mask,
    type_iii_mask,
)

THETA_SAMPLES = np.linspace(0.01, np.pi / 2 - 0.01, 1000)


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    tol: float
    detail: str = ""

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag}  {self.name}: {self.detail or f'{self.value:.3e} (tol {self.tol:g})'}"


def _unit_mixing(theta) -> MixingState:
    theta = np.asarray(theta, dtype=float)
    return MixingState(theta, np.ones_like(theta), np.ones_like(theta))


def _max_rel(num, ref, scale) -> float:
    return float(np.max(np.abs(np.asarray(num) - np.asarray(ref)) / scale))


# ------------------------------------------------------------ transfer


def check_fig4(band=(0.77, 0.83), tol=1e-6, max_seconds=1.0) -> list[Check]:
    s, d = get_scheme("m21"), reference_drive()
    t0 = time.perf_counter()
    p_none = propagate(s, d, ShortcutScheme("none")).efficiency
    t1 = time.perf_counter()
    p_ii = propagate(s, d, ShortcutScheme("II")).efficiency
    t2 = time.perf_counter()
    slow = max(t1 - t0, t2 - t1)
    return [
        Check("fig4 no shortcut", band[0] <= p_none <= band[1], p_none, band[1],
              f"P = {p_none:.6f} in [{band[0]}, {band[1]}]"),
        Check("fig4 type II", p_ii >= 1 - tol, 1 - p_ii, tol, f"1 - P = {1 - p_ii:.2e} (tol {tol:g})"),
        Check("fig4 runtime", slow < max_seconds, slow, max_seconds, f"{slow:.3f} s per trajectory"),
    ]


def check_three_state_exact(areas=(np.pi, 2 * np.pi, 5 * np.pi), tol=1e-8) -> list[Check]:
    s = get_scheme("three")
    out = []
    for a in areas:
        p = propagate(s, GaussianDrive.from_area(a), ShortcutScheme("I")).efficiency
        out.append(Check(f"three-state shortcut A={a / np.pi:g}pi", p >= 1 - tol, 1 - p, tol,
                         f"1 - P3 = {1 - p:.2e} (tol {tol:g})"))
    return out


def check_area_independence(kinds=("II", "III"), areas=(2, 5, 10, 20), tol=1e-6) -> list[Check]:
    out = []
    for tag in ("m21", "m22"):
        for kind in kinds:
            worst = max(
                1 - propagate(get_scheme(tag), GaussianDrive.from_area(a * np.pi), ShortcutScheme(kind)).efficiency
                for a in areas
            )
            out.append(Check(f"{tag} type {kind} over areas {areas}pi", worst < tol, worst, tol))
    return out


# --------------------------------------------------------- cancellation


def _offdiag_ratio(tag: str, kind: str, n: int, dark_only: bool) -> float:
    s, d = get_scheme(tag), reference_drive()
    t = np.linspace(-5.0, 5.0, n)
    ms = drive_mixing(d, t)
    t = t[ms.rms >= FIELD_OFF_RMS]
    rms = drive_mixing(d, t).rms
    Ha = adiabatic_frame_hamiltonian(s, d, ShortcutScheme(kind), t)
    off = Ha - np.einsum("tii->ti", Ha)[..., None] * np.eye(s.dim)
    if dark_only:
        k = s.dark_index
        off = np.concatenate([off[:, k, :], off[:, :, k]], axis=1)
    return float(np.max(np.abs(off).reshape(len(t), -1).max(axis=1) / rms))


def check_type1_cancellation(n=2000, tol=1e-8) -> list[Check]:
    out = []
    for tag in ("m21", "m22"):
        r = _offdiag_ratio(tag, "I", n, dark_only=False)
        out.append(Check(f"{tag} type I full cancellation", r < tol, r, tol,
                         f"max |offdiag| / Lambda = {r:.2e} (tol {tol:g})"))
    return out


def check_dark_row_cancellation(n=2000, tol=1e-8) -> list[Check]:
    out = []
    for tag in ("m21", "m22"):
        for kind in ("II", "III", "numeric"):
            r = _offdiag_ratio(tag, kind, n, dark_only=True)
            out.append(Check(f"{tag} {kind if kind == 'numeric' else 'type ' + kind} dark-row cancellation", r < tol, r, tol,
                             f"max |dark row| / Lambda = {r:.2e} (tol {tol:g})"))
    return out


# ----------------------------------------------------------- oracles


def check_oracle_equivalence(theta=THETA_SAMPLES, tol=1e-8) -> list[Check]:
    """Numeric shortcuts against the closed forms, relative to the largest field."""
    ms = _unit_mixing(theta)
    out = []
    for tag in ("m21", "m22"):
        s = get_scheme(tag)
        an = shortcut_type_I(s, ms)
        num = link_amplitudes(full_shortcut_along(s, ms), an.positions.values())
        scale = np.max(np.abs(np.array(list(an.amplitudes.values()))), axis=0)
        for name, pos in an.positions.items():
            err = _max_rel(num[pos], an[name], scale)
            out.append(Check(f"{tag} full prescription vs type I {name}", err < tol, err, tol))
        for kind, analytic, mask in (
            ("II", shortcut_type_II, type_ii_mask(s)),
            ("III", shortcut_type_III, type_iii_mask(s)),
        ):
            an = analytic(s, ms)
            num = reduced_shortcut_along(s, ms, mask)
            scale = np.max(np.abs(np.array(list(an.amplitudes.values()))), axis=0)
            for name in an.names:
                err = _max_rel(num[name], an[name], scale)
                out.append(Check(f"{tag} reduced solve vs type {kind} {name}", err < tol, err, tol))
    return out


def check_spectrum_and_dark(theta=THETA_SAMPLES, tol=1e-12) -> list[Check]:
    out = []
    rms_values = np.geomspace(1e-2, 1e2, len(theta))
    for tag in ("m21", "m22"):
        s = get_scheme(tag)
        ev_err = dark_err = 0.0
        for th, lam in zip(theta, rms_values):
            H = build_hamiltonian(s, lam * np.sin(th), lam * np.cos(th))
            ref, _ = analytic_spectrum(s, th, lam)
            ev = eig_hermitian(H).eigenvalues
            ev_err = max(ev_err, np.max(np.abs(ev - ref)) / np.max(np.abs(ref)))
            dark_err = max(dark_err, np.linalg.norm(H @ dark_state(s, th)) / lam)
        out.append(Check(f"{tag} spectrum", ev_err < tol, ev_err, tol))
        out.append(Check(f"{tag} dark state H.phi0", dark_err < tol, dark_err, tol))
    s = get_scheme("three")
    err = max(np.linalg.norm(build_hamiltonian(s, np.sin(th), np.cos(th)) @ dark_state(s, th)) for th in theta)
    out.append(Check("three-state dark state H.phi0", err < tol, err, tol))
    return out


def nac_comparison(tag: str, times=None, min_rms: float = 1e-3):
    """Analytic and gauge-aligned finite-difference couplings along the path.

    Each eigenvector's overall sign is a gauge choice, so one constant sign
    per adiabatic state is fixed where that coupling is largest and then held
    along the whole path. Errors are relative to the norm of the coupling
    vector at each time.
    """
    s, d = get_scheme(tag), reference_drive()
    t = np.linspace(-5.0, 5.0, 401) if times is None else np.asarray(times)
    ms = drive_mixing(d, t)
    t = t[ms.rms > min_rms]
    ms = drive_mixing(d, t)
    num = nac_finite_difference(s, d, t)
    an = np.zeros_like(num)
    for i, (th, thd) in enumerate(zip(ms.theta, ms.theta_dot)):
        chi = analytic_nac(s, th, thd)
        an[i] = [chi.get(lbl, 0.0) for lbl in NAC_ORDER]
    signs = np.ones(s.dim)
    for k in range(s.dim):
        if k == s.dark_index:
            continue
        i = int(np.argmax(np.abs(an[:, k])))
        signs[k] = np.sign((an[i, k] * np.conj(num[i, k])).real)
    num = num * signs
    scale = np.linalg.norm(an, axis=1)
    return t, an, num, float(np.max(np.abs(num - an).max(axis=1) / scale))


def check_nac(tol=1e-5) -> list[Check]:
    out = []
    for tag in ("m21", "m22"):
        _, _, _, err = nac_comparison(tag)
        out.append(Check(f"{tag} nonadiabatic couplings vs finite differences", err < tol, err, tol))
    return out


# ---------------------------------------------------------- sigma-pi


def sigma_pi_report(theta=THETA_SAMPLES, agree_tol=1e-8) -> list[str]:
    """Compare the numeric type-II fields with the closed forms for both chains."""
    ms = _unit_mixing(theta)
    lines = []
    for tag in ("sp22", "sp3212"):
        s = get_scheme(tag)
        num = reduced_shortcut_along(s, ms, type_ii_mask(s))
        an = shortcut_type_II(s, ms)
        for name in an.names:
            err = float(np.max(np.abs(num[name] - an[name]) / np.abs(an[name])))
            verdict = "agrees" if err < agree_tol else "DIFFERS"
            lines.append(f"{tag} {name}: closed form {verdict} with numeric solve (max rel dev {err:.2e})")
    return lines


def check_sigma_pi(tol=1e-6) -> list[Check]:
    out = []
    for tag in ("sp22", "sp3212"):
        p = propagate(get_scheme(tag), reference_drive(), ShortcutScheme("numeric")).efficiency
        out.append(Check(f"{tag} numeric reduced shortcut transfer", p >= 1 - tol, 1 - p, tol,
                         f"1 - P = {1 - p:.2e} (tol {tol:g})"))
    return out


# --------------------------------------------------------- properties


DEFAULT_RUNS = (("m21", "none"), ("m21", "II"), ("m22", "III"), ("m22", "I"), ("sp22", "numeric"))


def check_norm(tol=1e-10) -> list[Check]:
    worst = 0.0
    for tag, kind in DEFAULT_RUNS:
        tr = propagate(get_scheme(tag), reference_drive(), ShortcutScheme(kind))
        worst = max(worst, float(np.max(np.abs(np.linalg.norm(tr.amplitudes, axis=1) - 1))))
    return [Check("norm conservation", worst < tol, worst, tol)]


def check_step_convergence(tol=1e-8) -> list[Check]:
    worst = 0.0
    for tag, kind in DEFAULT_RUNS:
        tr = propagate(get_scheme(tag), reference_drive(), ShortcutScheme(kind), PropagationConfig(check_convergence=True))
        worst = max(worst, tr.convergence_delta)
    return [Check("step-doubling convergence at 4096 steps", worst < tol, worst, tol)]


def check_time_reversal(tol=1e-8) -> list[Check]:
    s, d, sc, cfg = get_scheme("m21"), reference_drive(), ShortcutScheme("II"), PropagationConfig()
    tr = propagate(s, d, sc, cfg)
    back = propagate_backward(s, d, sc, cfg, tr.amplitudes[-1])
    err = float(np.linalg.norm(back - tr.amplitudes[0]))
    return [Check("time reversal recovers initial state", err < tol, err, tol)]


def check_determinism() -> list[Check]:
    s, d, sc = get_scheme("m21"), reference_drive(), ShortcutScheme("II")
    with tempfile.TemporaryDirectory() as tmp:
        a, b = Path(tmp, "a.csv"), Path(tmp, "b.csv")
        propagate(s, d, sc).to_csv(a)
        propagate(s, d, sc).to_csv(b)
        same = filecmp.cmp(a, b, shallow=False)
    return [Check("byte-identical trajectory CSV on repeat", same, 0.0 if same else 1.0, 0.0,
                  "identical" if same else "files differ")]


def check_mirror_symmetry(tol=1e-12) -> list[Check]:
    d = reference_drive()
    t = np.linspace(-5.0, 5.0, 1001)
    fwd, rev = drive_mixing(d, t), drive_mixing(d, -t)
    out = []
    for tag in ("m21", "m22"):
        s = get_scheme(tag)
        a = shortcut_type_II(s, fwd)
        b = shortcut_type_II(s, rev)
        err = float(np.max(np.abs(a["Omega_0,2"] - b["Omega_-2,0"])))
        out.append(Check(f"{tag} type II mirror symmetry", err < tol, err, tol))
    return out


def check_properties() -> list[Check]:
    return (
        check_norm()
        + check_step_convergence()
        + check_determinism()
        + check_mirror_symmetry()
        + check_time_reversal()
    )


def run_all() -> tuple[list[Check], list[str]]:
    checks = (
        check_fig4()
        + check_three_state_exact()
        + check_type1_cancellation()
        + check_dark_row_cancellation()
        + check_oracle_equivalence()
        + check_spectrum_and_dark()
        + check_nac()
        + check_sigma_pi()
        + check_properties()
    )
    return checks, sigma_pi_report()
