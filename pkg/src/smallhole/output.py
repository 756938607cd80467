"""CSV / JSON / SVG emission for sweep and study results."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .experiments import SWEEP_COLUMNS, SweepResult, SweepRow


def fmt(value) -> str:
    """17 significant digits for floats (round-trips exactly), plain ints."""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def write_csv(path, columns, rows) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([fmt(r[c]) for c in columns])
    return path


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        rd = csv.DictReader(fh)
        return [{k: (int(v) if k == "newton_iters" or k == "n" else float(v)) for k, v in row.items()}
                for row in rd]


def read_sweep_csv(path) -> list[SweepRow]:
    return [SweepRow(**r) for r in read_csv(path)]


def _clean(obj):
    """JSON-safe copy: numpy scalars unwrapped, non-finite floats become null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n")
    return path


def sweep_report(result: SweepResult, config: dict | None = None) -> dict:
    rep = {
        "rows": len(result.rows),
        "flagged": result.flagged,
        "limit": result.limit,
        "checks": [asdict(c) for c in result.checks],
        "passed": result.passed,
    }
    if config is not None:
        rep["config"] = config
    if result.fit is not None:
        rep["fit"] = result.fit
    return rep


def emit_outputs(result: SweepResult, out_dir, config: dict | None = None, plots: bool = True) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = [asdict(r) for r in result.rows]
    paths = [write_csv(out / "sweep.csv", SWEEP_COLUMNS, rows),
             write_json(out / "report.json", sweep_report(result, config))]
    if plots and rows:
        paths += _sweep_plots(result, out)
    return paths


# SVG ------------------------------------------------------------------------

_W, _H, _PAD = 640, 420, 60
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def _ticks(lo, hi, n=5):
    if hi == lo:
        return [lo]
    return list(np.linspace(lo, hi, n))


def line_plot_svg(series, xlabel: str, ylabel: str, title: str) -> str:
    """Self-contained SVG. ``series`` is a list of (label, xs, ys, style) with style 'points' or 'line'."""
    xs = np.concatenate([np.asarray(s[1], float) for s in series])
    ys = np.concatenate([np.asarray(s[2], float) for s in series])
    ok = np.isfinite(xs) & np.isfinite(ys)
    x0, x1 = float(xs[ok].min()), float(xs[ok].max())
    y0, y1 = float(ys[ok].min()), float(ys[ok].max())
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if y1 == y0:
        y0, y1 = y0 - 1, y1 + 1
    pad_y = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad_y, y1 + pad_y

    def X(v):
        return _PAD + (v - x0) / (x1 - x0) * (_W - 2 * _PAD)

    def Y(v):
        return _H - _PAD - (v - y0) / (y1 - y0) * (_H - 2 * _PAD)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
             f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
             f'<rect width="{_W}" height="{_H}" fill="white"/>',
             f'<text x="{_W / 2:.1f}" y="24" text-anchor="middle" font-size="14">{title}</text>',
             f'<line x1="{_PAD}" y1="{_H - _PAD}" x2="{_W - _PAD}" y2="{_H - _PAD}" stroke="black"/>',
             f'<line x1="{_PAD}" y1="{_PAD}" x2="{_PAD}" y2="{_H - _PAD}" stroke="black"/>']
    for v in _ticks(x0, x1):
        parts.append(f'<text x="{X(v):.1f}" y="{_H - _PAD + 16}" text-anchor="middle">{v:.3g}</text>')
    for v in _ticks(y0, y1):
        parts.append(f'<text x="{_PAD - 6}" y="{Y(v) + 4:.1f}" text-anchor="end">{v:.4g}</text>')
    parts.append(f'<text x="{_W / 2:.1f}" y="{_H - 16}" text-anchor="middle">{xlabel}</text>')
    parts.append(f'<text x="16" y="{_H / 2:.1f}" text-anchor="middle" '
                 f'transform="rotate(-90 16 {_H / 2:.1f})">{ylabel}</text>')
    for k, (label, sx, sy, style) in enumerate(series):
        color = _COLORS[k % len(_COLORS)]
        pts = [(X(a), Y(b)) for a, b in zip(sx, sy) if math.isfinite(a) and math.isfinite(b)]
        if style == "line":
            coords = " ".join(f"{a:.2f},{b:.2f}" for a, b in pts)
            parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-dasharray="5,3"/>')
        else:
            coords = " ".join(f"{a:.2f},{b:.2f}" for a, b in pts)
            parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}"/>')
            parts += [f'<circle cx="{a:.2f}" cy="{b:.2f}" r="3" fill="{color}"/>' for a, b in pts]
        parts.append(f'<text x="{_W - _PAD - 4}" y="{_PAD + 16 * k}" text-anchor="end" fill="{color}">{label}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _sweep_plots(result: SweepResult, out: Path) -> list[Path]:
    eps = np.array([r.eps for r in result.rows])
    L = np.log(eps)
    series = [("energy", L, [r.energy for r in result.rows], "points")]
    if result.fit is not None:
        f = result.fit
        series.append(("E1_hat + E2_hat log eps", L, f["E1_hat"] + f["E2_hat"] * L, "line"))
    p1 = out / "energy_vs_logeps.svg"
    p1.write_text(line_plot_svg(series, "log eps", "energy", "Dirichlet energy against log eps"))
    lg = np.log10(eps)
    series = [("eps delta u(eps, x)", lg, [r.scaled_u_macro for r in result.rows], "points"),
              ("eps delta u(eps, eps t)", lg, [r.scaled_u_micro for r in result.rows], "points")]
    lim = result.limit
    if "scaled_macro_target" in lim:
        series.append(("macro limit", lg, np.full_like(lg, lim["scaled_macro_target"]), "line"))
        series.append(("micro limit", lg, np.full_like(lg, lim["scaled_micro_target"]), "line"))
    p2 = out / "scaled_u_vs_eps.svg"
    p2.write_text(line_plot_svg(series, "log10 eps", "scaled field", "Rescaled fields against eps"))
    return [p1, p2]
