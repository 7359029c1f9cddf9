"""Command-line front end: ``honeycomb-edge <command> -a A11 A12 ...``.

Every command writes one file (or stdout when ``--out`` is not given) that
starts with a metadata header.  Floats are printed with 17 significant
digits so identical runs give byte-identical output.
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .bulk import essential_slice, gap_closing_quasimomenta, measured_wedge_slope, wedge_slope
from .dispersive import k_grid, low_delta_loci, refine_zero, scan, winding
from .errors import HoneycombError, InvalidEdge, NumericalError
from .flatband import (Formula, build_state, classical_zigzag_state, flat_band_interval,
                       is_exceptional, state_residual, verdict)
from .lattice import EdgeConfig, canonicalize, classify, neighbor_offsets, raw_offsets

TERMINATIONS = ["balanced", "unbalanced", "unbalanced-a", "unbalanced-b"]


def fmt(x) -> str:
    return format(float(x), ".17g")


def _json(obj) -> str:
    """JSON text with floats at 17 significant digits; NaN/inf become null."""
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _complex(z) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def metadata(cfg: EdgeConfig, command: str, **grid) -> dict:
    return {
        "tool": "honeycomb-edge",
        "version": __version__,
        "command": command,
        "edge": [cfg.a11, cfg.a12],
        "gauge": [cfg.a21, cfg.a22],
        "n_a_min": cfg.n_a_min,
        "n_b_min": cfg.n_b_min,
        "grid": grid,
    }


def _csv_header(meta: dict) -> str:
    return "".join(f"# {k}={_json(v)}\n" for k, v in meta.items())


def _emit(data: bytes | str, out: str | None, name: str) -> None:
    if isinstance(data, str):
        data = data.encode("ascii")
    if out is None:
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
        return
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    (path / name).write_bytes(data)


def _stem(cfg: EdgeConfig, command: str) -> str:
    return f"{command}_{cfg.a11}_{cfg.a12}"


def _fail(err: Exception, code: int):
    sys.stderr.write(_json({"error": type(err).__name__, "message": str(err)}) + "\n")
    sys.exit(code)


def _run(fn, *args, **kwargs):
    try:
        fn(*args, **kwargs)
    except InvalidEdge as err:
        _fail(err, 2)
    except NumericalError as err:
        _fail(err, 3)
    except HoneycombError as err:  # pragma: no cover - every error has a family
        _fail(err, 3)
    except ValueError as err:
        _fail(err, 2)


def edge_options(f):
    f = click.option("--out", type=click.Path(file_okay=False), default=None,
                     help="Output directory (default: stdout).")(f)
    f = click.option("--termination", type=click.Choice(TERMINATIONS), default="balanced",
                     show_default=True)(f)
    f = click.option("-a", "edge", nargs=2, type=int, required=True, metavar="A11 A12",
                     help="Edge direction a11*v1 + a12*v2.")(f)
    return f


@click.group()
@click.version_option(__version__)
def main():
    """Edge states of the honeycomb lattice along rational edges."""


# classify

@main.command("classify")
@edge_options
def classify_cmd(edge, termination, out):
    """Edge type, offsets, flat-band interval and gap closings (JSON)."""
    _run(_classify, edge, termination, out)


def _classify(edge, termination, out):
    cfg = canonicalize(*edge, termination)
    cls = classify(cfg)
    off = raw_offsets(cfg)
    sub, interval = flat_band_interval(cfg)
    report = {
        "meta": metadata(cfg, "classify"),
        "s1": cfg.s1,
        "s2": cfg.s2,
        "kind": cls.kind.value,
        "balance": cls.balance.value,
        "offsets": {"m": list(off.m), "n": list(off.n)},
        "db_minus_da": cls.db_minus_da,
        "flat_band": {"sublattice": None if sub is None else sub.value,
                      "interval": interval.value},
        "gap_closing_k": sorted({g.k for g in gap_closing_quasimomenta(cfg)}),
        "wedge_slope": wedge_slope(cfg),
    }
    _emit(_json(report) + "\n", out, _stem(cfg, "classify") + ".json")


# spectrum

@main.command("spectrum")
@edge_options
@click.option("--nk", type=click.IntRange(min=2), default=1000, show_default=True)
@click.option("--format", "fmt_", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
def spectrum_cmd(edge, termination, out, nk, fmt_):
    """Essential-spectrum band edges on a k grid over [0, 2pi]."""
    _run(_spectrum, edge, termination, out, nk, fmt_)


def _spectrum(edge, termination, out, nk, fmt_):
    cfg = canonicalize(*edge, termination)
    off = raw_offsets(cfg)
    ks = k_grid(nk)
    slices = [essential_slice(off, k) for k in ks]
    meta = metadata(cfg, "spectrum", nk=nk)
    name = _stem(cfg, "spectrum")
    if fmt_ == "json":
        body = {"meta": meta, "k": ks, "band_min": [s.band_min for s in slices],
                "band_max": [s.band_max for s in slices]}
        _emit(_json(body) + "\n", out, name + ".json")
        return
    lines = [_csv_header(meta), "k,band_min,band_max\n"]
    lines += [f"{fmt(s.k)},{fmt(s.band_min)},{fmt(s.band_max)}\n" for s in slices]
    _emit("".join(lines), out, name + ".csv")


# flatband

@main.command("flatband")
@edge_options
@click.option("--k", "k", type=float, required=True, help="Parallel quasimomentum.")
@click.option("--formula", type=click.Choice([f.value for f in Formula]), default="convolution",
              show_default=True)
@click.option("--format", "fmt_", type=click.Choice(["json", "csv"]), default="json", show_default=True)
def flatband_cmd(edge, termination, out, k, formula, fmt_):
    """Zero-energy edge state at one k: amplitudes, norm, residual."""
    _run(_flatband, edge, termination, out, k, formula, fmt_)


def _flatband(edge, termination, out, k, formula, fmt_):
    cfg = canonicalize(*edge, termination)
    v = verdict(None, cfg, k)
    meta = metadata(cfg, "flatband", k=k)
    name = _stem(cfg, "flatband")
    if not v.exists and not is_exceptional(k, cfg.s2):
        body = {"meta": meta, "exists": False, "interval": v.interval.value}
        _emit(_json(body) + "\n", out, name + ".json")
        return
    if cfg.is_classical_zigzag:
        state = classical_zigzag_state(cfg, k)
    else:
        state = build_state(cfg, None, k, formula)
    res = state_residual(cfg, state)
    if fmt_ == "csv":
        lines = [_csv_header({**meta, "sublattice": state.sublattice.value, "norm": state.norm,
                              "residual": res, "formula": state.formula.value}),
                 "n,re,im\n"]
        lines += [f"{state.base_index + i},{fmt(a.real)},{fmt(a.imag)}\n"
                  for i, a in enumerate(state.amplitudes)]
        _emit("".join(lines), out, name + ".csv")
        return
    body = {
        "meta": meta,
        "exists": True,
        "sublattice": state.sublattice.value,
        "interval": v.interval.value,
        "base_index": state.base_index,
        "norm": state.norm,
        "residual": res,
        "formula": state.formula.value,
        "slow_decay": state.slow_decay,
        "roots": [_complex(z) for z in state.roots],
        "amplitudes": [_complex(a) for a in state.amplitudes],
    }
    _emit(_json(body) + "\n", out, name + ".json")


# scan

@main.command("scan")
@edge_options
@click.option("--nk", type=click.IntRange(min=2), default=1000, show_default=True)
@click.option("--ne", type=click.IntRange(min=2), default=1000, show_default=True)
@click.option("--elim", type=click.FloatRange(min=0, min_open=True), default=0.4, show_default=True)
@click.option("--format", "fmt_", type=click.Choice(["csv", "json", "pgm"]), default="csv",
              show_default=True)
def scan_cmd(edge, termination, out, nk, ne, elim, fmt_):
    """log|Delta| on the (k, E) grid; NaN inside the essential spectrum."""
    _run(_scan, edge, termination, out, nk, ne, elim, fmt_)


def pgm_bytes(grid, comment: str = "") -> bytes:
    """8-bit P5 image, columns = k, rows = E from top (+Elim) to bottom.

    Finite values are min-max scaled to 0..254 (small |Delta| dark); masked
    cells are white.
    """
    v = grid.log_abs_delta.T[::-1]
    finite = np.isfinite(v)
    img = np.full(v.shape, 255, dtype=np.uint8)
    if finite.any():
        lo, hi = v[finite].min(), v[finite].max()
        span = hi - lo if hi > lo else 1.0
        img[finite] = np.round((v[finite] - lo) / span * 254).astype(np.uint8)
    h, w = img.shape
    head = "P5\n"
    for line in comment.splitlines():
        head += f"# {line}\n"
    head += f"{w} {h}\n255\n"
    return head.encode("ascii") + img.tobytes()


def _scan(edge, termination, out, nk, ne, elim, fmt_):
    cfg = canonicalize(*edge, termination)
    off = neighbor_offsets(cfg)
    grid = scan(cfg, off, nk, ne, elim)
    meta = metadata(cfg, "scan", nk=nk, ne=ne, elim=elim)
    meta["failures"] = grid.failures
    name = _stem(cfg, "scan")
    if fmt_ == "pgm":
        _emit(pgm_bytes(grid, _csv_header(meta).replace("# ", "")), out, name + ".pgm")
        return
    if fmt_ == "json":
        loci = [{"cells": len(l.cells), "k_range": l.k_range, "e_range": l.e_range}
                for l in low_delta_loci(grid)]
        body = {"meta": meta, "k": grid.k_values, "E": grid.e_values,
                "log_abs_delta": grid.log_abs_delta, "loci": loci}
        _emit(_json(body) + "\n", out, name + ".json")
        return
    lines = [_csv_header(meta), "k\\E," + ",".join(fmt(e) for e in grid.e_values) + "\n"]
    for k, row in zip(grid.k_values, grid.log_abs_delta):
        lines.append(fmt(k) + "," + ",".join(fmt(x) for x in row) + "\n")
    _emit("".join(lines), out, name + ".csv")


# winding

@main.command("winding")
@edge_options
@click.option("--k0", type=float, required=True)
@click.option("--e0", type=float, required=True)
@click.option("--re", "radius", type=click.FloatRange(min=0, min_open=True), default=0.01,
              show_default=True)
@click.option("--nc", type=click.IntRange(min=16), default=50, show_default=True)
@click.option("--refine/--no-refine", default=False, help="Also locate the enclosed zero.")
def winding_cmd(edge, termination, out, k0, e0, radius, nc, refine):
    """Winding number of Delta(k0, .) around a circle in the E plane (JSON)."""
    _run(_winding, edge, termination, out, k0, e0, radius, nc, refine)


def _winding(edge, termination, out, k0, e0, radius, nc, refine):
    cfg = canonicalize(*edge, termination)
    off = neighbor_offsets(cfg)
    wr = winding(cfg, off, k0, e0, radius, nc)
    body = {"meta": metadata(cfg, "winding"), "k0": wr.k0, "E0": wr.e0.real, "rE": wr.radius,
            "Nc": wr.samples, "W": wr.winding, "minAbsDelta": wr.min_abs_delta}
    if refine:
        body["E_refined"] = refine_zero(cfg, off, k0, e0, radius)
    _emit(_json(body) + "\n", out, _stem(cfg, "winding") + ".json")


# wedge

@main.command("wedge")
@edge_options
def wedge_cmd(edge, termination, out):
    """Predicted and measured opening slope of the bands at each gap closing."""
    _run(_wedge, edge, termination, out)


def _wedge(edge, termination, out):
    cfg = canonicalize(*edge, termination)
    off = raw_offsets(cfg)
    pred = wedge_slope(cfg)
    rows = []
    for k_hat in sorted({g.k for g in gap_closing_quasimomenta(cfg)}):
        meas = measured_wedge_slope(off, k_hat)
        rows.append({"k": k_hat, "measured": meas, "relative_error": abs(meas - pred) / pred})
    body = {"meta": metadata(cfg, "wedge"), "predicted": pred, "crossings": rows}
    _emit(_json(body) + "\n", out, _stem(cfg, "wedge") + ".json")


if __name__ == "__main__":  # pragma: no cover
    main()
