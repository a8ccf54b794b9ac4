"""Tiny SVG emitter for log-log scatter plots with fitted power laws.

Bench outputs need a picture next to the CSV without dragging a plotting
stack into the dependency set, so this builds the SVG by hand: decade grid,
one marker series per solver, one straight line per fitted power law
(straight in log-log space), and a corner legend. Deterministic output —
identical inputs produce identical bytes.
"""
import math

_PALETTE = ("#1f6feb", "#d73a49", "#1a7f37", "#a475f9", "#bf8700", "#57606a")
_W, _H = 640, 480
_ML, _MR, _MT, _MB = 72, 24, 40, 56


def _decades(lo, hi):
    a = math.floor(math.log10(lo))
    b = math.ceil(math.log10(hi))
    if a == b:
        b += 1
    return a, b


class _Axes:
    def __init__(self, xlo, xhi, ylo, yhi):
        self.xa, self.xb = _decades(xlo, xhi)
        self.ya, self.yb = _decades(ylo, yhi)

    def px(self, x):
        t = (math.log10(x) - self.xa) / (self.xb - self.xa)
        return _ML + t * (_W - _ML - _MR)

    def py(self, y):
        t = (math.log10(y) - self.ya) / (self.yb - self.ya)
        return _H - _MB - t * (_H - _MT - _MB)


def _fmt(v):
    return f"{v:.2f}".rstrip("0").rstrip(".")


def loglog_plot(path, series, lines=(), title="", xlabel="", ylabel=""):
    """Write a log-log scatter SVG.

    series: [(label, xs, ys)] with positive data; lines: [(label, slope,
    intercept)] drawn as y = exp(intercept) x^slope across the data range.
    """
    pts = [(x, y) for _, xs, ys in series for x, y in zip(xs, ys)]
    if not pts:
        raise ValueError("nothing to plot")
    if any(x <= 0 or y <= 0 for x, y in pts):
        raise ValueError("log-log plots need positive data")
    xlo, xhi = min(p[0] for p in pts), max(p[0] for p in pts)
    ylo, yhi = min(p[1] for p in pts), max(p[1] for p in pts)
    ax = _Axes(xlo, xhi, ylo, yhi)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" '
           f'height="{_H}" viewBox="0 0 {_W} {_H}" '
           f'font-family="Helvetica,Arial,sans-serif" font-size="12">',
           f'<rect width="{_W}" height="{_H}" fill="#ffffff"/>']
    # grid at decades
    for k in range(ax.xa, ax.xb + 1):
        px = ax.px(10.0 ** k)
        out.append(f'<line x1="{px:.1f}" y1="{_MT}" x2="{px:.1f}" '
                   f'y2="{_H - _MB}" stroke="#dddddd"/>')
        out.append(f'<text x="{px:.1f}" y="{_H - _MB + 16}" '
                   f'text-anchor="middle">1e{k}</text>')
    for k in range(ax.ya, ax.yb + 1):
        py = ax.py(10.0 ** k)
        out.append(f'<line x1="{_ML}" y1="{py:.1f}" x2="{_W - _MR}" '
                   f'y2="{py:.1f}" stroke="#dddddd"/>')
        out.append(f'<text x="{_ML - 6}" y="{py + 4:.1f}" '
                   f'text-anchor="end">1e{k}</text>')
    out.append(f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" '
               f'height="{_H - _MT - _MB}" fill="none" stroke="#444444"/>')
    if title:
        out.append(f'<text x="{_W / 2:.0f}" y="24" text-anchor="middle" '
                   f'font-size="15">{title}</text>')
    if xlabel:
        out.append(f'<text x="{_W / 2:.0f}" y="{_H - 12}" '
                   f'text-anchor="middle">{xlabel}</text>')
    if ylabel:
        out.append(f'<text x="18" y="{_H / 2:.0f}" text-anchor="middle" '
                   f'transform="rotate(-90 18 {_H / 2:.0f})">{ylabel}</text>')

    for i, (label, slope, intercept) in enumerate(lines):
        color = _PALETTE[i % len(_PALETTE)]
        y1 = math.exp(intercept) * xlo ** slope
        y2 = math.exp(intercept) * xhi ** slope
        out.append(f'<line x1="{ax.px(xlo):.1f}" y1="{ax.py(y1):.1f}" '
                   f'x2="{ax.px(xhi):.1f}" y2="{ax.py(y2):.1f}" '
                   f'stroke="{color}" stroke-dasharray="6 3"/>')
    for i, (label, xs, ys) in enumerate(series):
        color = _PALETTE[i % len(_PALETTE)]
        for x, y in zip(xs, ys):
            out.append(f'<circle cx="{ax.px(x):.1f}" cy="{ax.py(y):.1f}" '
                       f'r="4" fill="{color}" fill-opacity="0.85"/>')
    # legend: series markers, then fitted slopes
    ly = _MT + 14
    for i, (label, _, _) in enumerate(series):
        color = _PALETTE[i % len(_PALETTE)]
        out.append(f'<circle cx="{_ML + 12}" cy="{ly - 4}" r="4" '
                   f'fill="{color}"/>')
        out.append(f'<text x="{_ML + 22}" y="{ly}">{label}</text>')
        ly += 16
    for i, (label, slope, _) in enumerate(lines):
        color = _PALETTE[i % len(_PALETTE)]
        out.append(f'<line x1="{_ML + 4}" y1="{ly - 4}" x2="{_ML + 20}" '
                   f'y2="{ly - 4}" stroke="{color}" stroke-dasharray="6 3"/>')
        out.append(f'<text x="{_ML + 22}" y="{ly}">{label} '
                   f'(slope {_fmt(slope)})</text>')
        ly += 16
    out.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")
    return path
