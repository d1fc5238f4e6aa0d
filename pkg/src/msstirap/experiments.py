"""Parameter scans and figure data for shortcut-assisted chain STIRAP."""

from __future__ import annotations

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .propagator import PropagationConfig, propagate, write_table
from .schemes import GaussianDrive, LevelScheme, drive_mixing, evaluate_drive, get_scheme
from .shortcuts import ShortcutScheme, shortcut_fields

PARAMETERS = ("phase", "xi", "beta", "area")

REFERENCE_AREA = 10 * np.pi
REFERENCE_DELAY = 1.0


class ScanError(RuntimeError):
    pass


def reference_drive() -> GaussianDrive:
    """Gaussian pair with peak 10 sqrt(pi)/T and delay T."""
    return GaussianDrive.from_area(REFERENCE_AREA, REFERENCE_DELAY)


def default_grid(parameter: str) -> np.ndarray:
    if parameter == "phase":
        return np.linspace(0.0, np.pi, 81)
    if parameter in ("xi", "beta"):
        return np.linspace(0.0, 2.0, 81)
    if parameter == "area":
        return np.pi * np.linspace(1.0, 20.0, 39)
    raise ValueError(f"unknown scan parameter {parameter!r}")


@dataclass(frozen=True)
class ScanSpec:
    parameter: str
    grid: tuple
    scheme: str = "m21"
    drive: GaussianDrive = field(default_factory=reference_drive)
    shortcut: ShortcutScheme = field(default_factory=lambda: ShortcutScheme("II"))
    config: PropagationConfig = field(default_factory=PropagationConfig)

    def __post_init__(self):
        if self.parameter not in PARAMETERS:
            raise ValueError(f"unknown scan parameter {self.parameter!r}; choose from {PARAMETERS}")
        grid = tuple(float(x) for x in self.grid)
        if not grid:
            raise ValueError("scan grid is empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("scan grid must be strictly increasing")
        object.__setattr__(self, "grid", grid)


@dataclass(frozen=True)
class ScanResult:
    parameter: str
    grid: np.ndarray
    efficiency: np.ndarray

    @property
    def argmax(self) -> float:
        return float(self.grid[int(np.argmax(self.efficiency))])

    def to_csv(self, path) -> None:
        unit = {"phase": "rad", "xi": "1", "beta": "1", "area": "rad"}[self.parameter]
        write_table(path, [f"{self.parameter} [{unit}]", "efficiency"], np.column_stack([self.grid, self.efficiency]))


def _point(spec: ScanSpec, value: float):
    drive, sc = spec.drive, spec.shortcut
    if spec.parameter == "phase":
        sc = dataclasses.replace(sc, phase=value)
    elif spec.parameter == "xi":
        sc = dataclasses.replace(sc, scale=value)
    elif spec.parameter == "beta":
        sc = dataclasses.replace(sc, beta=value)
    else:
        drive = GaussianDrive.from_area(value, drive.delay, drive.width)
    return drive, sc


def _run_point(args) -> float:
    spec, value = args
    drive, sc = _point(spec, value)
    try:
        return propagate(get_scheme(spec.scheme), drive, sc, spec.config).efficiency
    except Exception as exc:
        raise ScanError(f"{spec.parameter}={value!r}: {exc}") from exc


def scan(spec: ScanSpec, workers: int | None = 1) -> ScanResult:
    """Final transfer efficiency at every grid value.

    Points are independent; with ``workers`` > 1 (or None for all cores) they
    run in a process pool, and results are gathered in grid order.
    """
    jobs = [(spec, v) for v in spec.grid]
    if workers == 1:
        eff = [_run_point(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            eff = list(pool.map(_run_point, jobs))
    return ScanResult(spec.parameter, np.array(spec.grid), np.clip(eff, 0.0, 1.0))


def emit_pulse_shapes(s: LevelScheme, d: GaussianDrive, kind: str = "II", times=None):
    """Pump, Stokes and shortcut amplitudes versus time.

    Returns ``(header, rows)``. For ``kind="none"`` the type-II (or Q) columns
    are present but identically zero.
    """
    t = np.linspace(-5.0, 5.0, 1001) if times is None else np.asarray(times, dtype=float)
    P, S, _, _ = evaluate_drive(d, t)
    ms = drive_mixing(d, t)
    sc = ShortcutScheme(kind)
    if kind == "none":
        fields = shortcut_fields(s, ShortcutScheme("II"), ms)
        cols = [np.zeros_like(t) for _ in fields.names]
    else:
        fields = shortcut_fields(s, sc, ms)
        cols = [np.broadcast_to(fields[n], t.shape) for n in fields.names]
    header = ["t/T", "Omega_P [1/T]", "Omega_S [1/T]"] + [f"{n} [1/T]" for n in fields.names]
    return header, np.column_stack([t, P, S, *cols])


def time_evolution(scheme: str = "m21", kinds=("none", "II"), cfg: PropagationConfig | None = None):
    """Target-state population versus time for several shortcut choices."""
    s = get_scheme(scheme)
    runs = [propagate(s, reference_drive(), ShortcutScheme(k), cfg) for k in kinds]
    header = ["t/T"] + [f"P_target[{k}]" for k in kinds]
    return header, np.column_stack([runs[0].times] + [r.populations[:, s.target] for r in runs])


FIGURES = {
    3: "type-I pulse shapes",
    4: "time evolution with and without type-II shortcuts",
    5: "type-III pulse shapes",
    6: "phase scan of the type-II Omega_0,2 field",
    7: "amplitude scan of the type-II Omega_-2,0 field",
    8: "Stokes amplitude scan",
}

_SCAN_FIGS = {6: "phase", 7: "xi", 8: "beta"}


def reproduce_figure(fig: int, outdir, workers: int | None = 1) -> list[Path]:
    """Write the data tables behind one of the figures; returns the paths."""
    if fig not in FIGURES:
        raise ValueError(f"unknown figure {fig!r}; choose from {sorted(FIGURES)}")
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    if fig in (3, 5):
        kind = "I" if fig == 3 else "III"
        for tag in ("m21", "m22"):
            path = outdir / f"fig{fig}_{tag}.csv"
            write_table(path, *emit_pulse_shapes(get_scheme(tag), reference_drive(), kind))
            written.append(path)
    elif fig == 4:
        path = outdir / "fig4_m21.csv"
        write_table(path, *time_evolution("m21"))
        written.append(path)
        for tag in ("m21", "m22"):
            path = outdir / f"fig4_pulses_{tag}.csv"
            write_table(path, *emit_pulse_shapes(get_scheme(tag), reference_drive(), "II"))
            written.append(path)
    else:
        param = _SCAN_FIGS[fig]
        for tag in ("m21", "m22"):
            res = scan(ScanSpec(param, tuple(default_grid(param)), scheme=tag), workers=workers)
            path = outdir / f"fig{fig}_{tag}.csv"
            res.to_csv(path)
            written.append(path)
    return written
