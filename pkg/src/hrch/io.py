"""CSV tables and static SVG plots for trajectories and sweeps.

Floats are written in shortest round-trip scientific notation, so
``float(cell)`` restores the stored double exactly.  Files use UTF-8 and
LF line endings, and the same inputs always give byte-identical files.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .diagnostics import DiagnosticsRecord, compute_records, vch_dissipation_residuals, vch_energy
from .errors import IoError
from .experiments import SweepResult
from .solver import Trajectory
from .spectral import synth
from .vch import VchTrajectory

MAX_SNAPSHOTS = 10


@dataclass
class Table:
    columns: list
    rows: list
    comments: list = field(default_factory=list)


def format_number(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return np.format_float_scientific(x, unique=True, trim="0")


# -- tables ------------------------------------------------------------------


def _vch_table(traj: VchTrajectory) -> Table:
    basis = traj.basis
    grid = synth(basis, traj.phi)
    m = traj.phi[:, 0] / math.sqrt(basis.L)
    E = vch_energy(traj)
    res = np.concatenate([[0.0], vch_dissipation_residuals(traj)]) if len(traj) > 1 else np.zeros(1)
    gmu = np.sqrt(np.sum(basis.lam * traj.mu**2, axis=1))
    cols = ["t", "mean_drift", "energy", "dissipation_residual", "phi_min", "phi_max", "grad_mu_norm"]
    rows = [[float(t), float(abs(m[i] - m[0])), float(E[i]), float(res[i]),
             float(grid[i].min()), float(grid[i].max()), float(gmu[i])]
            for i, t in enumerate(traj.times)]
    return Table(cols, rows)


def _sweep_table(result: SweepResult) -> Table:
    cols = result.columns
    rows = [[row[c] for c in cols] for row in result.rows]
    comments = []
    if result.primary is not None and result.primary in result.fits:
        fit = result.fits[result.primary]
        comments.append(f"fitted p={format_number(fit.exponent)}, K={format_number(fit.constant)}, "
                        f"column={result.primary}, residual={format_number(fit.residual)}")
    return Table(cols, rows, comments)


def as_table(result) -> Table:
    if isinstance(result, Table):
        return result
    if isinstance(result, Trajectory):
        records = result.diagnostics or compute_records(result)
        return Table(DiagnosticsRecord.field_names(), [r.as_row() for r in records])
    if isinstance(result, VchTrajectory):
        return _vch_table(result)
    if isinstance(result, SweepResult):
        return _sweep_table(result)
    raise TypeError(f"cannot tabulate {type(result).__name__}")


def emit_csv(result, path) -> Path:
    """Write a trajectory, sweep or Table as CSV; returns the path."""
    table = as_table(result)
    path = Path(path)
    try:
        with path.open("w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(table.columns)
            for row in table.rows:
                w.writerow([format_number(v) for v in row])
            for c in table.comments:
                fh.write(f"# {c}\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    return path


def read_csv(path):
    """Return (header, rows of strings, comment lines without '# ')."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    lines = text.split("\n")
    comments = [ln[2:] for ln in lines if ln.startswith("# ")]
    body = [ln for ln in lines if ln and not ln.startswith("#")]
    reader = list(csv.reader(body))
    return reader[0], reader[1:], comments


# -- SVG -----------------------------------------------------------------------

_W, _H = 640, 400
_PAD_L, _PAD_R, _PAD_T, _PAD_B = 80, 20, 40, 50
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def _f(v):
    return f"{v:.2f}"


def _range(vals):
    vals = np.asarray(vals, dtype=float)
    vals = vals[np.isfinite(vals)]
    if vals.size == 0:
        return -1.0, 1.0
    lo, hi = float(vals.min()), float(vals.max())
    if hi - lo <= 1e-14 * max(1.0, abs(lo), abs(hi)):
        pad = max(1.0, abs(lo)) * 0.5
        return lo - pad, hi + pad
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


class _Panel:
    """One set of axes; collects SVG elements in pixel coordinates."""

    def __init__(self, title, xlabel, ylabel, xs_all, ys_all, logx=False, logy=False, height=_H, top=0):
        self.logx, self.logy = logx, logy
        tx = self._tx(np.asarray(xs_all, dtype=float), logx)
        ty = self._tx(np.asarray(ys_all, dtype=float), logy)
        self.xlo, self.xhi = _range(tx)
        self.ylo, self.yhi = _range(ty)
        self.top, self.height = top, height
        self.parts = []
        x0, x1 = _PAD_L, _W - _PAD_R
        y0, y1 = top + _PAD_T, top + height - _PAD_B
        self.box = (x0, x1, y0, y1)
        self.parts.append(f'<rect x="{x0}" y="{_f(y0)}" width="{x1 - x0}" height="{_f(y1 - y0)}" '
                          f'fill="none" stroke="#000" stroke-width="1"/>')
        self.parts.append(f'<text x="{_W / 2:.2f}" y="{_f(top + 24)}" text-anchor="middle" '
                          f'font-size="16">{escape(title)}</text>')
        self.parts.append(f'<text x="{(x0 + x1) / 2:.2f}" y="{_f(y1 + 40)}" text-anchor="middle" '
                          f'font-size="13">{escape(xlabel)}</text>')
        self.parts.append(f'<text x="16" y="{_f((y0 + y1) / 2)}" text-anchor="middle" font-size="13" '
                          f'transform="rotate(-90 16 {_f((y0 + y1) / 2)})">{escape(ylabel)}</text>')
        self._ticks()

    @staticmethod
    def _tx(v, log):
        if not log:
            return v
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(v > 0, np.log10(np.where(v > 0, v, 1.0)), np.nan)

    def px(self, x):
        x0, x1, _, _ = self.box
        return x0 + (x - self.xlo) / (self.xhi - self.xlo) * (x1 - x0)

    def py(self, y):
        _, _, y0, y1 = self.box
        return y1 - (y - self.ylo) / (self.yhi - self.ylo) * (y1 - y0)

    def _ticks(self):
        x0, x1, y0, y1 = self.box
        for v in np.linspace(self.xlo, self.xhi, 5):
            label = f"1e{v:.1f}" if self.logx else f"{v:.3g}"
            X = self.px(v)
            self.parts.append(f'<line x1="{_f(X)}" y1="{_f(y1)}" x2="{_f(X)}" y2="{_f(y1 + 5)}" stroke="#000"/>')
            self.parts.append(f'<text x="{_f(X)}" y="{_f(y1 + 18)}" text-anchor="middle" '
                              f'font-size="11">{escape(label)}</text>')
        for v in np.linspace(self.ylo, self.yhi, 5):
            label = f"1e{v:.1f}" if self.logy else f"{v:.3g}"
            Y = self.py(v)
            self.parts.append(f'<line x1="{_f(x0 - 5)}" y1="{_f(Y)}" x2="{_f(x0)}" y2="{_f(Y)}" stroke="#000"/>')
            self.parts.append(f'<text x="{_f(x0 - 8)}" y="{_f(Y + 4)}" text-anchor="end" '
                              f'font-size="11">{escape(label)}</text>')

    def _points(self, xs, ys):
        tx = self._tx(np.asarray(xs, dtype=float), self.logx)
        ty = self._tx(np.asarray(ys, dtype=float), self.logy)
        ok = np.isfinite(tx) & np.isfinite(ty)
        return [(self.px(a), self.py(b)) for a, b in zip(tx[ok], ty[ok])]

    def line(self, xs, ys, color, cls="series", dash=None):
        pts = self._points(xs, ys)
        if not pts:
            return
        d = " ".join(f"{_f(a)},{_f(b)}" for a, b in pts)
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(f'<polyline class="{cls}" points="{d}" fill="none" stroke="{color}" '
                          f'stroke-width="1.5"{extra}/>')

    def markers(self, xs, ys, color):
        for a, b in self._points(xs, ys):
            self.parts.append(f'<circle class="marker" cx="{_f(a)}" cy="{_f(b)}" r="4" fill="{color}"/>')

    def legend(self, labels):
        x0, _, y0, _ = self.box
        for i, (label, color) in enumerate(labels):
            y = y0 + 14 + 14 * i
            self.parts.append(f'<line x1="{_f(x0 + 8)}" y1="{_f(y - 4)}" x2="{_f(x0 + 24)}" y2="{_f(y - 4)}" '
                              f'stroke="{color}" stroke-width="2"/>')
            self.parts.append(f'<text x="{_f(x0 + 28)}" y="{_f(y)}" font-size="11">{escape(label)}</text>')


def _document(panels, height) -> str:
    head = ('<?xml version="1.0" encoding="UTF-8" standalone="no"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_W}" height="{height}" '
            f'viewBox="0 0 {_W} {height}" font-family="sans-serif">\n'
            f'<rect x="0" y="0" width="{_W}" height="{height}" fill="#fff"/>\n')
    body = "\n".join(p for panel in panels for p in panel.parts)
    return head + body + "\n</svg>\n"


def _write(path: Path, text: str) -> Path:
    try:
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    return path


def snapshot_indices(nstates: int) -> list:
    """min(10, nstates) indices evenly spaced over the stored times."""
    count = min(MAX_SNAPSHOTS, nstates)
    if count <= 1:
        return [0]
    return [int(round(v)) for v in np.linspace(0, nstates - 1, count)]


def _snapshot_svg(traj) -> str:
    basis = traj.basis
    x = np.linspace(0.0, basis.L, 201)
    idx = snapshot_indices(len(traj))
    curves = [basis.eval(traj.phi[i], x) for i in idx]
    panel = _Panel("phi(x) snapshots", "x", "phi", x, np.concatenate(curves))
    labels = []
    for j, (i, c) in enumerate(zip(idx, curves)):
        color = _COLORS[j % len(_COLORS)]
        panel.line(x, c, color)
        labels.append((f"t={traj.times[i]:.4g}", color))
    panel.legend(labels)
    return _document([panel], _H)


def _series_svg(t, series) -> str:
    panels = []
    for k, (name, ys) in enumerate(series):
        panel = _Panel(f"{name} vs t", "t", name, t, ys, top=k * _H)
        panel.line(t, ys, _COLORS[k % len(_COLORS)])
        panels.append(panel)
    return _document(panels, _H * len(panels))


def _sweep_svg(result: SweepResult) -> str:
    x = result.values
    col = result.primary or next((c for c in result.columns if c != result.parameter), result.parameter)
    y = result.column(col)
    fit = result.fits.get(col)
    guide_x = guide_y = None
    if fit is not None and not fit.degenerate:
        pos = x[(x > 0) & (y > 0) & np.isfinite(y)]
        if pos.size:
            guide_x = np.array([pos.min(), pos.max()])
            guide_y = fit.constant * guide_x**fit.exponent
    ys_all = y if guide_y is None else np.concatenate([y, guide_y])
    panel = _Panel(f"{col} vs {result.parameter}", result.parameter, col, x, ys_all, logx=True, logy=True)
    panel.markers(x, y, _COLORS[0])
    labels = [(col, _COLORS[0])]
    if guide_x is not None:
        panel.line(guide_x, guide_y, _COLORS[1], cls="guide", dash="6,4")
        labels.append((f"slope p={fit.exponent:.3f}", _COLORS[1]))
    panel.legend(labels)
    return _document([panel], _H)


def emit_svg_plots(result, directory) -> list:
    """Write the plots for ``result`` into ``directory``; returns the paths."""
    d = Path(directory)
    try:
        d.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create {d}: {exc}") from exc
    out = []
    if isinstance(result, Trajectory):
        table = as_table(result)
        cols = {c: np.array([row[i] for row in table.rows]) for i, c in enumerate(table.columns)}
        out.append(_write(d / "phi_snapshots.svg", _snapshot_svg(result)))
        names = ("energy", "mass_residual", "phi_min", "phi_max", "xi_proxy_supnorm", "laplacian_mu_norm")
        out.append(_write(d / "diagnostics.svg", _series_svg(cols["t"], [(n, cols[n]) for n in names])))
    elif isinstance(result, VchTrajectory):
        table = as_table(result)
        cols = {c: np.array([row[i] for row in table.rows]) for i, c in enumerate(table.columns)}
        out.append(_write(d / "phi_snapshots.svg", _snapshot_svg(result)))
        names = ("energy", "dissipation_residual", "phi_min", "phi_max")
        out.append(_write(d / "diagnostics.svg", _series_svg(cols["t"], [(n, cols[n]) for n in names])))
    elif isinstance(result, SweepResult):
        out.append(_write(d / "sweep.svg", _sweep_svg(result)))
    else:
        raise TypeError(f"cannot plot {type(result).__name__}")
    return out
