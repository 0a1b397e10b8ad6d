"""Command-line interface.

Subcommands: validate, bands, surface, gaps, count, extrema, verify,
builtin-list. Models come from --builtin NAME or --model FILE (JSON);
--set NAME=VALUE overrides spring stiffnesses (by label) and node masses
(by id). CSV is the canonical output format; --format json mirrors the
same content with explicit field names. Exit codes: 0 success, 1
validation/physics failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from dataclasses import dataclass, field

import numpy as np

from . import dispersion, oracle
from .dispersion import BandTable, PathSpec
from .errors import LatticeBandError, ModelError
from .model import (
    BUILTIN_NAMES,
    LatticeModel,
    builtin,
    load_model,
    override_constants,
    validate,
)

_SCALAR_RE = re.compile(r"([+-])?(\d+(?:\.\d*)?)?\*?pi(?:/(\d+(?:\.\d*)?))?")


def parse_scalar(text: str) -> float:
    """Parse a wavevector component: a float, or pi forms like '-pi', '2pi', 'pi/2'."""
    t = text.strip().lower().replace(" ", "")
    try:
        return float(t)
    except ValueError:
        pass
    m = _SCALAR_RE.fullmatch(t)
    if m is None:
        raise LatticeBandError(f"cannot parse {text!r} as a number")
    sign = -1.0 if m.group(1) == "-" else 1.0
    coef = float(m.group(2)) if m.group(2) else 1.0
    div = float(m.group(3)) if m.group(3) else 1.0
    return sign * coef * math.pi / div


def parse_path(text: str, dimension: int, samples: int) -> PathSpec:
    """Build a PathSpec from a preset name, 'a:b' shorthand, or JSON vertices.

    Colon-separated vertices with comma-separated components cover the
    common cases ('0:pi', '0,0:pi,0'); JSON lists give full control.
    """
    if text in dispersion.PATH_PRESETS:
        vertices = dispersion.PATH_PRESETS[text]
    elif text.lstrip().startswith("["):
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise LatticeBandError(f"bad JSON path: {exc}") from exc
        vertices = tuple(
            tuple(float(c) for c in v) if isinstance(v, (list, tuple)) else (float(v),)
            for v in raw
        )
    else:
        vertices = tuple(
            tuple(parse_scalar(c) for c in vertex.split(","))
            for vertex in text.split(":")
        )
    if any(len(v) != dimension for v in vertices):
        raise LatticeBandError(
            f"path {text!r} has vertices of the wrong dimension for a {dimension}-D model"
        )
    return PathSpec(vertices=vertices, samples_per_segment=samples)


@dataclass
class RunConfig:
    command: str
    builtin_name: str | None = None
    model_path: str | None = None
    overrides: dict[str, float] = field(default_factory=dict)
    path_text: str | None = None
    samples: int = 101
    grid: int = 64
    omega: float | None = None
    cells: tuple[int, ...] | None = None
    band: int | None = None  # 1-based, as in the omega_j output columns
    fmt: str = "csv"
    output: str | None = None


def _fmt_num(x) -> str:
    return format(float(x), ".12g")


def emit_band_csv(table: BandTable, sink) -> None:
    """Canonical band CSV: s,mu_1..mu_d,omega_1..omega_n, 12 significant digits."""
    d = table.mus.shape[1]
    n = table.omegas.shape[1]
    header = ["s"] + [f"mu_{i + 1}" for i in range(d)] + [f"omega_{j + 1}" for j in range(n)]
    sink.write(",".join(header) + "\n")
    for i in range(table.s.shape[0]):
        row = [table.s[i], *table.mus[i], *table.omegas[i]]
        sink.write(",".join(_fmt_num(v) for v in row) + "\n")


def _emit_grid_csv(mus: np.ndarray, omegas: np.ndarray, sink) -> None:
    d = mus.shape[1]
    n = omegas.shape[1]
    header = [f"mu_{i + 1}" for i in range(d)] + [f"omega_{j + 1}" for j in range(n)]
    sink.write(",".join(header) + "\n")
    for i in range(mus.shape[0]):
        sink.write(",".join(_fmt_num(v) for v in (*mus[i], *omegas[i])) + "\n")


def _emit_json(payload: dict, sink) -> None:
    json.dump(payload, sink, indent=2)
    sink.write("\n")


def _json_wrap(config: RunConfig, model_name: str | None, result, tolerances=None) -> dict:
    return {
        "command": config.command,
        "model": model_name,
        "result": result,
        "tolerances": tolerances or {},
    }


def _load(config: RunConfig) -> LatticeModel:
    if config.builtin_name is not None:
        model = builtin(config.builtin_name)
    else:
        model = load_model(config.model_path)
    if config.overrides:
        model = override_constants(model, config.overrides)
    return model


def _default_path(config: RunConfig, model: LatticeModel, samples: int) -> PathSpec:
    if config.path_text is not None:
        return parse_path(config.path_text, model.dimension, samples)
    if model.dimension == 1:
        return parse_path("0:pi", 1, samples)
    raise LatticeBandError(
        f"--path is required for a {model.dimension}-D model "
        "(e.g. the preset 'paper-2d-path')"
    )


def run(config: RunConfig) -> int:
    """Execute one command; returns the process exit status."""
    if config.command == "builtin-list":
        rows = []
        for name in BUILTIN_NAMES:
            m = builtin(name)
            rows.append({"name": name, "dimension": m.dimension,
                         "nodes": m.n, "springs": len(m.springs)})
        with _sink(config.output) as sink:
            if config.fmt == "json":
                _emit_json(_json_wrap(config, None, rows), sink)
            else:
                sink.write("name,dimension,nodes,springs\n")
                for r in rows:
                    sink.write(f"{r['name']},{r['dimension']},{r['nodes']},{r['springs']}\n")
        return 0

    model = _load(config)

    if config.command == "validate":
        diags = validate(model)
        errors = [d for d in diags if d.severity == "error"]
        with _sink(config.output) as sink:
            if config.fmt == "json":
                result = {
                    "errors": [{"code": d.code, "message": d.message} for d in errors],
                    "warnings": [{"code": d.code, "message": d.message}
                                 for d in diags if d.severity == "warning"],
                }
                _emit_json(_json_wrap(config, model.name, result), sink)
            else:
                sink.write("severity,code,message\n")
                for d in diags:
                    sink.write(f"{d.severity},{d.code},{json.dumps(d.message)}\n")
        return 1 if errors else 0

    if config.command == "bands":
        spec = _default_path(config, model, config.samples)
        table = dispersion.band_structure(model, spec)
        with _sink(config.output) as sink:
            if config.fmt == "json":
                result = {
                    "s": [float(v) for v in table.s],
                    "mu": table.mus.tolist(),
                    "omega": table.omegas.tolist(),
                }
                _emit_json(_json_wrap(config, model.name, result), sink)
            else:
                emit_band_csv(table, sink)
        return 0

    if config.command == "surface":
        mus = dispersion.grid_wavevectors(model.dimension, config.grid)
        omegas = dispersion.omega_table(model, mus)
        with _sink(config.output) as sink:
            if config.fmt == "json":
                result = {"resolution": config.grid, "mu": mus.tolist(),
                          "omega": omegas.tolist()}
                _emit_json(_json_wrap(config, model.name, result), sink)
            else:
                _emit_grid_csv(mus, omegas, sink)
        return 0

    if config.command == "gaps":
        report = dispersion.band_gaps(model, config.grid)
        rows = [{"band": g.band + 1, "omega_low": g.omega_low,
                 "omega_high": g.omega_high, "width": g.width} for g in report.gaps]
        with _sink(config.output) as sink:
            if config.fmt == "json":
                result = {"resolution": config.grid, "gaps": rows}
                _emit_json(_json_wrap(config, model.name, result), sink)
            else:
                sink.write("band,omega_low,omega_high,width\n")
                for r in rows:
                    sink.write(f"{r['band']},{_fmt_num(r['omega_low'])},"
                               f"{_fmt_num(r['omega_high'])},{_fmt_num(r['width'])}\n")
        return 0

    if config.command == "count":
        spec = _default_path(config, model, config.samples)
        count = dispersion.count_wavevectors(model, config.omega, spec)
        with _sink(config.output) as sink:
            if config.fmt == "json":
                result = {"omega": config.omega, "count": count,
                          "samples": config.samples}
                _emit_json(_json_wrap(config, model.name, result), sink)
            else:
                sink.write("omega,count\n")
                sink.write(f"{_fmt_num(config.omega)},{count}\n")
        return 0

    if config.command == "extrema":
        report = dispersion.band_extrema(model, config.band - 1, config.grid)
        row = {
            "band": config.band,
            "resolution": config.grid,
            "argmax_mu": [float(v) for v in report.argmax_mu],
            "max_omega": report.max_omega,
            "argmin_mu": [float(v) for v in report.argmin_mu],
            "min_omega": report.min_omega,
            "max_on_boundary": report.max_on_boundary,
        }
        with _sink(config.output) as sink:
            if config.fmt == "json":
                _emit_json(_json_wrap(config, model.name, row), sink)
            else:
                d = model.dimension
                header = (["band"] + [f"argmax_mu_{i+1}" for i in range(d)] + ["max_omega"]
                          + [f"argmin_mu_{i+1}" for i in range(d)]
                          + ["min_omega", "max_on_boundary"])
                sink.write(",".join(header) + "\n")
                values = ([str(config.band)] + [_fmt_num(v) for v in report.argmax_mu]
                          + [_fmt_num(report.max_omega)]
                          + [_fmt_num(v) for v in report.argmin_mu]
                          + [_fmt_num(report.min_omega), str(report.max_on_boundary).lower()])
                sink.write(",".join(values) + "\n")
        return 0

    if config.command == "verify":
        result = oracle.oracle_check(model, config.cells)
        row = {
            "cells": list(result.cells),
            "size": result.size,
            "deviation": result.deviation,
            "omega_max": result.omega_max,
            "passed": result.passed,
        }
        with _sink(config.output) as sink:
            if config.fmt == "json":
                _emit_json(_json_wrap(config, model.name, row,
                                      tolerances={"deviation": result.tolerance}), sink)
            else:
                sink.write("cells,size,deviation,tolerance,omega_max,passed\n")
                sink.write(
                    "x".join(str(c) for c in result.cells)
                    + f",{result.size},{_fmt_num(result.deviation)},"
                    f"{_fmt_num(result.tolerance)},{_fmt_num(result.omega_max)},"
                    f"{str(result.passed).lower()}\n"
                )
        return 0 if result.passed else 1

    raise LatticeBandError(f"unknown command {config.command!r}")


class _sink:
    """Context manager writing to a file path or stdout."""

    def __init__(self, output: str | None):
        self.output = output
        self.fh = None

    def __enter__(self):
        if self.output is None or self.output == "-":
            return sys.stdout
        self.fh = open(self.output, "w", encoding="utf-8", newline="")
        return self.fh

    def __exit__(self, *exc):
        if self.fh is not None:
            self.fh.close()
        return False


def _add_model_args(sub: argparse.ArgumentParser) -> None:
    grp = sub.add_mutually_exclusive_group(required=True)
    grp.add_argument("--builtin", choices=BUILTIN_NAMES, help="use a built-in model")
    grp.add_argument("--model", help="path to a model JSON file")
    sub.add_argument("--set", action="append", default=[], metavar="NAME=VALUE",
                     help="override a spring stiffness (by label) or node mass (by id); "
                          "repeatable")


def _add_output_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--format", choices=("csv", "json"), default="csv")
    sub.add_argument("--output", default=None, help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latticeband",
        description="Dispersion relations of periodic mass-spring lattices "
                    "with beyond-nearest-neighbor coupling.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a model and report diagnostics")
    _add_model_args(p)
    _add_output_args(p)

    p = sub.add_parser("bands", help="band structure along a wavevector path")
    _add_model_args(p)
    p.add_argument("--path", help="'a:b', preset name, or JSON vertex list "
                                  "(default '0:pi' for 1-D models)")
    p.add_argument("--samples", type=int, default=101, help="samples per segment")
    _add_output_args(p)

    p = sub.add_parser("surface", help="bands over the full [-pi,pi]^d grid")
    _add_model_args(p)
    p.add_argument("--grid", type=int, default=64, help="grid points per dimension")
    _add_output_args(p)

    p = sub.add_parser("gaps", help="band gaps over the sampled zone")
    _add_model_args(p)
    p.add_argument("--grid", type=int, default=64, help="grid points per dimension")
    _add_output_args(p)

    p = sub.add_parser("count", help="count band crossings of a target frequency")
    _add_model_args(p)
    p.add_argument("--omega", type=float, required=True, help="target angular frequency")
    p.add_argument("--path", help="single-segment path (default '0:pi' for 1-D)")
    p.add_argument("--samples", type=int, default=2001)
    _add_output_args(p)

    p = sub.add_parser("extrema", help="locate a band's extrema over the zone")
    _add_model_args(p)
    p.add_argument("--band", type=int, required=True,
                   help="band number, 1-based as in the omega_j columns")
    p.add_argument("--grid", type=int, default=64)
    _add_output_args(p)

    p = sub.add_parser("verify", help="supercell oracle check of the Bloch assembly")
    _add_model_args(p)
    p.add_argument("--cells", required=True,
                   help="comma-separated cell counts, e.g. 9 or 5,5")
    _add_output_args(p)

    p = sub.add_parser("builtin-list", help="list built-in models")
    _add_output_args(p)
    return parser


def _config_from_args(parser: argparse.ArgumentParser, args: argparse.Namespace) -> RunConfig:
    overrides: dict[str, float] = {}
    for item in getattr(args, "set", []):
        name, sep, value = item.partition("=")
        if not sep or not name:
            parser.error(f"--set expects NAME=VALUE, got {item!r}")
        try:
            overrides[name.strip()] = float(value)
        except ValueError:
            parser.error(f"--set {name}: {value!r} is not a number")

    cells = None
    if getattr(args, "cells", None) is not None:
        try:
            cells = tuple(int(c) for c in args.cells.split(","))
        except ValueError:
            parser.error(f"--cells expects integers like 5,5, got {args.cells!r}")
        if any(c < 1 for c in cells):
            parser.error("--cells entries must be >= 1")

    if getattr(args, "samples", 2) < 2:
        parser.error("--samples must be >= 2")
    if getattr(args, "band", 1) < 1:
        parser.error("--band is 1-based and must be >= 1")
    if getattr(args, "omega", 1.0) is not None and getattr(args, "omega", 1.0) <= 0:
        parser.error("--omega must be positive")

    return RunConfig(
        command=args.command,
        builtin_name=getattr(args, "builtin", None),
        model_path=getattr(args, "model", None),
        overrides=overrides,
        path_text=getattr(args, "path", None),
        samples=getattr(args, "samples", 101),
        grid=getattr(args, "grid", 64),
        omega=getattr(args, "omega", None),
        cells=cells,
        band=getattr(args, "band", None),
        fmt=getattr(args, "format", "csv"),
        output=getattr(args, "output", None),
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = _config_from_args(parser, args)
    try:
        return run(config)
    except ModelError as exc:
        for d in exc.diagnostics:
            print(str(d), file=sys.stderr)
        return 1
    except (LatticeBandError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
