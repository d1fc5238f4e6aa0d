"""Command-line front end.

    msstirap simulate --scheme m21 --area 10pi --tau 1 --shortcut type2
    msstirap scan --param phase --workers 4
    msstirap pulses --scheme m22 --shortcut type3 --output pulses.csv
    msstirap verify
    msstirap reproduce --fig 6 --output figures/

Settings come from built-in defaults, then an INI file (``--config``, section
``[run]``), then flags. ``--dump-config PATH`` writes the resolved settings
and exits; loading that file reproduces the same run.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import json
import math
import os
import re
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .experiments import FIGURES, PARAMETERS, ScanSpec, default_grid, emit_pulse_shapes, reproduce_figure, scan
from .propagator import PropagationConfig, propagate, write_table
from .schemes import SCHEMES, GaussianDrive, UnsupportedSchemeError, drive_mixing, get_scheme
from .shortcuts import ShortcutMismatchError, ShortcutScheme, shortcut_fields

COMMANDS = ("simulate", "scan", "pulses", "verify", "reproduce")
SHORTCUT_TAGS = {"none": "none", "type1": "I", "type2": "II", "type3": "III", "numeric": "numeric"}
DEFAULT_OUTPUT = {
    "simulate": "trajectory.csv",
    "scan": "scan.csv",
    "pulses": "pulses.csv",
    "reproduce": "figures",
}


class PreconditionError(ValueError):
    pass


_AREA_RE = re.compile(r"^\s*([+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)?\s*\*?\s*(pi)?\s*$")


def parse_area(text) -> float:
    """'10pi', '2.5*pi', 'pi' or a plain number of radians."""
    if isinstance(text, (int, float)):
        return float(text)
    m = _AREA_RE.match(str(text))
    if not m or (m.group(1) is None and m.group(2) is None):
        raise PreconditionError(f"cannot parse pulse area {text!r}; use e.g. 10pi or 31.4")
    value = float(m.group(1)) if m.group(1) is not None else 1.0
    return value * math.pi if m.group(2) else value


@dataclass
class RunConfig:
    command: str = "simulate"
    scheme: str = "m21"
    area: str = "10pi"
    tau: float = 1.0
    shortcut: str = "type2"
    phase: float = math.pi / 2
    xi: float = 1.0
    beta: float = 1.0
    steps: int = 4096
    t_start: float = -5.0
    t_end: float = 5.0
    output: str = ""
    parameter: str = "phase"
    grid: str = ""
    workers: int = 1
    fig: int = 4

    FLOATS = ("tau", "phase", "xi", "beta", "t_start", "t_end")
    INTS = ("steps", "workers", "fig")

    def validate(self) -> None:
        """Check every precondition before anything is computed."""
        if self.command not in COMMANDS:
            raise PreconditionError(f"unknown command {self.command!r}; choose from {COMMANDS}")
        if self.scheme not in SCHEMES:
            raise PreconditionError(f"unknown scheme {self.scheme!r}; choose from {sorted(SCHEMES)}")
        if self.shortcut not in SHORTCUT_TAGS:
            raise PreconditionError(f"unknown shortcut {self.shortcut!r}; choose from {sorted(SHORTCUT_TAGS)}")
        area = parse_area(self.area)
        if not (math.isfinite(area) and area > 0):
            raise PreconditionError(f"pulse area must be positive and finite, got {self.area!r}")
        for name in self.FLOATS:
            if not math.isfinite(getattr(self, name)):
                raise PreconditionError(f"{name} must be finite, got {getattr(self, name)!r}")
        if self.beta < 0:
            raise PreconditionError(f"beta must be non-negative, got {self.beta}")
        if self.steps < 2:
            raise PreconditionError(f"steps must be at least 2, got {self.steps}")
        if not self.t_start < self.t_end:
            raise PreconditionError(f"t_start ({self.t_start}) must be less than t_end ({self.t_end})")
        if self.workers < 1:
            raise PreconditionError(f"workers must be at least 1, got {self.workers}")
        if self.parameter not in PARAMETERS:
            raise PreconditionError(f"unknown scan parameter {self.parameter!r}; choose from {PARAMETERS}")
        if self.command == "scan":
            self.scan_grid()
        if self.command == "reproduce" and self.fig not in FIGURES:
            raise PreconditionError(f"unknown figure {self.fig}; choose from {sorted(FIGURES)}")
        if self.command in ("simulate", "pulses") or (self.command == "scan" and self.shortcut != "none"):
            self._check_shortcut_available()
        if self.command in DEFAULT_OUTPUT:
            _check_writable(Path(self.output_path), directory=self.command == "reproduce")

    def _check_shortcut_available(self) -> None:
        try:
            shortcut_fields(get_scheme(self.scheme), self.shortcut_scheme(), drive_mixing(self.drive(), 0.0))
        except (UnsupportedSchemeError, ShortcutMismatchError) as exc:
            raise PreconditionError(f"shortcut {self.shortcut!r} unavailable for scheme {self.scheme!r}: {exc}")

    @property
    def output_path(self) -> str:
        return self.output or DEFAULT_OUTPUT.get(self.command, "")

    def drive(self) -> GaussianDrive:
        return GaussianDrive.from_area(parse_area(self.area), self.tau)

    def shortcut_scheme(self) -> ShortcutScheme:
        link = (0, 2) if self.scheme == "three" else (2, 4)
        return ShortcutScheme(
            SHORTCUT_TAGS[self.shortcut], phase=self.phase, phase_link=link, scale=self.xi, beta=self.beta
        )

    def propagation(self) -> PropagationConfig:
        return PropagationConfig(self.t_start, self.t_end, self.steps)

    def scan_grid(self) -> tuple:
        if not self.grid:
            return tuple(default_grid(self.parameter))
        parts = self.grid.split(":")
        if len(parts) != 3:
            raise PreconditionError(f"grid must be start:stop:count, got {self.grid!r}")
        try:
            lo, hi, n = parse_area(parts[0]), parse_area(parts[1]), int(parts[2])
        except ValueError:
            raise PreconditionError(f"grid must be start:stop:count, got {self.grid!r}") from None
        if n < 1 or (n > 1 and not hi > lo):
            raise PreconditionError(f"grid needs count >= 1 and stop > start, got {self.grid!r}")
        return tuple(np.linspace(lo, hi, n))

    # -------------------------------------------------------- file I/O

    def dump(self, path) -> None:
        cp = configparser.ConfigParser(interpolation=None)
        cp["run"] = {f.name: repr(v) if isinstance(v, float) else str(v) for f, v in self._items()}
        with open(path, "w") as fh:
            cp.write(fh)

    def _items(self):
        return [(f, getattr(self, f.name)) for f in dataclasses.fields(self)]

    def update(self, values: dict) -> None:
        names = {f.name for f in dataclasses.fields(self)}
        for key, raw in values.items():
            key = key.replace("-", "_")
            if key not in names:
                raise PreconditionError(f"unknown config key {key!r}")
            try:
                if key in self.FLOATS:
                    value = float(raw)
                elif key in self.INTS:
                    value = int(raw)
                else:
                    value = str(raw)
            except ValueError:
                raise PreconditionError(f"{key} expects a number, got {raw!r}") from None
            setattr(self, key, value)

    @classmethod
    def load(cls, path) -> "RunConfig":
        cp = configparser.ConfigParser(interpolation=None)
        if not cp.read(path):
            raise PreconditionError(f"cannot read config file {path}")
        if "run" not in cp:
            raise PreconditionError(f"config file {path} has no [run] section")
        cfg = cls()
        cfg.update(dict(cp["run"]))
        return cfg


def _check_writable(path: Path, directory: bool = False) -> None:
    if directory:
        if path.exists() and not path.is_dir():
            raise PreconditionError(f"output path {path} exists and is not a directory")
        target = path if path.exists() else path.parent
    else:
        if path.is_dir():
            raise PreconditionError(f"output path {path} is a directory")
        target = path.parent
    if not target.is_dir():
        raise PreconditionError(f"output directory {target} does not exist")
    if not os.access(target, os.W_OK):
        raise PreconditionError(f"output path {path} is not writable")


# --------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI file with a [run] section")
    common.add_argument("--dump-config", metavar="PATH", help="write resolved settings and exit")
    common.add_argument("--scheme", help=f"one of {', '.join(SCHEMES)}")
    common.add_argument("--area", help="area of each pulse, e.g. 10pi")
    common.add_argument("--tau", type=float, help="pump delay relative to Stokes, in T")
    common.add_argument("--shortcut", help=f"one of {', '.join(SHORTCUT_TAGS)}")
    common.add_argument("--phase", type=float, help="phase of the Omega_0,2 shortcut (rad)")
    common.add_argument("--xi", type=float, help="scale of the Omega_-2,0 shortcut")
    common.add_argument("--beta", type=float, help="scale of the Stokes field")
    common.add_argument("--steps", type=int)
    common.add_argument("--t-start", type=float)
    common.add_argument("--t-end", type=float)
    common.add_argument("--output", "-o")
    common.add_argument("--workers", type=int)
    common.add_argument("--summary", metavar="JSON", help="also write a JSON summary")
    common.add_argument("--seedless", action="store_true", help="accepted for clarity; nothing is random")

    p = argparse.ArgumentParser(prog="msstirap", description="Shortcut-assisted multistate STIRAP")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="one trajectory CSV")
    sc = sub.add_parser("scan", parents=[common], help="efficiency versus one parameter")
    sc.add_argument("--param", dest="parameter", help=f"one of {', '.join(PARAMETERS)}")
    sc.add_argument("--grid", help="start:stop:count (area values accept 'pi')")
    sub.add_parser("pulses", parents=[common], help="pump, Stokes and shortcut shapes")
    sub.add_parser("verify", parents=[common], help="run the self-check suite")
    rp = sub.add_parser("reproduce", parents=[common], help="data tables for one figure")
    rp.add_argument("--fig", type=int, required=True, help=f"one of {sorted(FIGURES)}")
    return p


_NOT_SETTINGS = {"config", "dump_config", "summary", "seedless"}


def resolve(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    flags = {k: v for k, v in vars(args).items() if v is not None and k not in _NOT_SETTINGS}
    cfg.update(flags)
    return cfg


# ------------------------------------------------------------- commands


def _simulate(cfg: RunConfig) -> dict:
    tr = propagate(get_scheme(cfg.scheme), cfg.drive(), cfg.shortcut_scheme(), cfg.propagation())
    tr.to_csv(cfg.output_path)
    print(f"final efficiency: {tr.efficiency:.6f}")
    print(f"trajectory written to {cfg.output_path}")
    return {"efficiency": tr.efficiency, "output": cfg.output_path}


def _scan(cfg: RunConfig) -> dict:
    spec = ScanSpec(
        cfg.parameter,
        cfg.scan_grid(),
        scheme=cfg.scheme,
        drive=cfg.drive(),
        shortcut=cfg.shortcut_scheme(),
        config=cfg.propagation(),
    )
    res = scan(spec, workers=cfg.workers)
    res.to_csv(cfg.output_path)
    print(f"{cfg.parameter} scan: max efficiency {res.efficiency.max():.6f} at {res.argmax:.6g}")
    print(f"min efficiency {res.efficiency.min():.6f}; written to {cfg.output_path}")
    return {
        "parameter": cfg.parameter,
        "argmax": res.argmax,
        "max_efficiency": float(res.efficiency.max()),
        "min_efficiency": float(res.efficiency.min()),
        "output": cfg.output_path,
    }


def _pulses(cfg: RunConfig) -> dict:
    kind = SHORTCUT_TAGS[cfg.shortcut]
    times = np.linspace(cfg.t_start, cfg.t_end, 1001)
    header, rows = emit_pulse_shapes(get_scheme(cfg.scheme), cfg.drive(), kind, times)
    write_table(cfg.output_path, header, rows)
    print(f"{len(header) - 1} pulse columns written to {cfg.output_path}")
    return {"columns": header, "output": cfg.output_path}


def _verify(cfg: RunConfig) -> dict:
    from .verify import run_all

    checks, report = run_all()
    for c in checks:
        print(c.line())
    print("sigma-pi comparison:")
    for line in report:
        print(f"  {line}")
    passed = sum(c.passed for c in checks)
    print(f"{passed}/{len(checks)} checks passed")
    return {"passed": passed, "total": len(checks), "failed": [c.name for c in checks if not c.passed]}


def _reproduce(cfg: RunConfig) -> dict:
    paths = reproduce_figure(cfg.fig, cfg.output_path, workers=cfg.workers)
    for path in paths:
        print(f"wrote {path}")
    return {"figure": cfg.fig, "files": [str(p) for p in paths]}


HANDLERS = {"simulate": _simulate, "scan": _scan, "pulses": _pulses, "verify": _verify, "reproduce": _reproduce}


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve(args)
        cfg.validate()
        if args.summary:
            _check_writable(Path(args.summary))
        if args.dump_config:
            _check_writable(Path(args.dump_config))
            cfg.dump(args.dump_config)
            print(f"config written to {args.dump_config}")
            return 0
    except PreconditionError as exc:
        print(f"msstirap: error: {exc}", file=sys.stderr)
        return 2
    summary = HANDLERS[cfg.command](cfg)
    if args.summary:
        with open(args.summary, "w") as fh:
            json.dump({"command": cfg.command, **summary}, fh, indent=2)
    if cfg.command == "verify" and summary["failed"]:
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
