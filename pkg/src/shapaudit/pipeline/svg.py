"""Dependency-free SVG figures: rank heat map, R^2 bars, target histogram."""

from xml.sax.saxutils import escape

import numpy as np

# Fixed four-step discrete scale; rank 1 is the darkest.
RANK_COLORS = ("#08306b", "#4292c6", "#c6dbef", "#f7fbff")
FAMILY_COLORS = {
    "linear": "#1b9e77",
    "tree": "#d95f02",
    "kernel": "#7570b3",
    "neural": "#e7298a",
    "instance": "#66a61e",
}
_FONT = 'font-family="sans-serif"'


def _fmt(v):
    return f"{v:.2f}".rstrip("0").rstrip(".")


def _doc(width, height, body):
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" height="{_fmt(height)}" '
        f'viewBox="0 0 {_fmt(width)} {_fmt(height)}">\n'
        f'<rect width="100%" height="100%" fill="white"/>\n'
    )
    return head + "\n".join(body) + "\n</svg>\n"


def _text(x, y, s, size=11, anchor="start", rotate=None, fill="black"):
    transform = f' transform="rotate({rotate} {_fmt(x)} {_fmt(y)})"' if rotate is not None else ""
    return (
        f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-size="{size}" {_FONT} text-anchor="{anchor}" '
        f'fill="{fill}"{transform}>{escape(str(s))}</text>'
    )


def rank_color(rank, d):
    """Colour for a (possibly fractional) rank among ``d`` features."""
    if d <= 1:
        return RANK_COLORS[0]
    level = (float(rank) - 1.0) * (len(RANK_COLORS) - 1) / (d - 1)
    return RANK_COLORS[int(np.clip(np.floor(level + 0.5), 0, len(RANK_COLORS) - 1))]


def render_rank_heatmap(rm, cell=34):
    """Features as rows, models as columns, each cell coloured and labelled with its rank."""
    M, d = rm.ranks.shape
    left = 12 + 7 * max(len(f) for f in rm.feature_names)
    top = 20 + 6.5 * max(len(m) for m in rm.model_names)
    width = left + M * cell + 20
    height = top + d * cell + 60
    body = []
    for c, name in enumerate(rm.model_names):
        x = left + (c + 0.5) * cell
        body.append(_text(x, top - 6, name, size=10, rotate=-60))
    for r, feat in enumerate(rm.feature_names):
        y0 = top + r * cell
        body.append(_text(left - 6, y0 + cell / 2 + 4, feat, anchor="end"))
        for c in range(M):
            rank = rm.ranks[c, r]
            color = rank_color(rank, d)
            x0 = left + c * cell
            body.append(
                f'<rect class="cell" x="{_fmt(x0)}" y="{_fmt(y0)}" width="{cell}" height="{cell}" '
                f'fill="{color}" stroke="white"/>'
            )
            ink = "white" if color in RANK_COLORS[:2] else "black"
            body.append(_text(x0 + cell / 2, y0 + cell / 2 + 4, _fmt(rank), size=10, anchor="middle", fill=ink))
    ly = top + d * cell + 20
    body.append(_text(left, ly + 11, "rank:", size=10))
    for i in range(d):
        x0 = left + 40 + i * 48
        body.append(
            f'<rect class="legend" x="{_fmt(x0)}" y="{_fmt(ly)}" width="14" height="14" '
            f'fill="{rank_color(i + 1, d)}" stroke="#555"/>'
        )
        body.append(_text(x0 + 18, ly + 11, i + 1, size=10))
    return _doc(width, height, body)


def render_r2_bars(rows):
    """Horizontal bars of mean CV R^2 with +/- one std whiskers.

    ``rows`` is a sequence of ``(model_name, family, mean_r2, std_r2)`` in
    display order.
    """
    rows = list(rows)
    bar_h, gap = 16, 6
    left = 12 + 7 * max(len(r[0]) for r in rows)
    plot_w = 360
    lows = [min(0.0, m - s) for _, _, m, s in rows if np.isfinite(m)]
    lo = min([0.0] + lows)
    lo = max(lo, -1.0)
    hi = 1.0
    sx = lambda v: left + (np.clip(v, lo, hi) - lo) / (hi - lo) * plot_w
    height = 40 + len(rows) * (bar_h + gap) + 30
    body = []
    for tick in np.linspace(lo, hi, 5):
        x = sx(tick)
        body.append(f'<line x1="{_fmt(x)}" y1="20" x2="{_fmt(x)}" y2="{_fmt(height - 30)}" stroke="#ddd"/>')
        body.append(_text(x, height - 14, f"{tick:.2f}", size=9, anchor="middle"))
    for i, (name, family, mean, std) in enumerate(rows):
        y0 = 24 + i * (bar_h + gap)
        body.append(_text(left - 6, y0 + bar_h - 4, name, size=10, anchor="end"))
        if not np.isfinite(mean):
            continue
        x0, x1 = sx(min(0.0, mean)), sx(max(0.0, mean))
        body.append(
            f'<rect class="bar" x="{_fmt(x0)}" y="{y0}" width="{_fmt(x1 - x0)}" height="{bar_h}" '
            f'fill="{FAMILY_COLORS.get(family, "#999")}"/>'
        )
        if np.isfinite(std):
            ym = y0 + bar_h / 2
            body.append(
                f'<line x1="{_fmt(sx(mean - std))}" y1="{_fmt(ym)}" x2="{_fmt(sx(mean + std))}" '
                f'y2="{_fmt(ym)}" stroke="black"/>'
            )
    body.append(_text(left + plot_w / 2, height - 2, "5-fold mean R²", size=10, anchor="middle"))
    lx = left + plot_w + 16
    for i, (fam, color) in enumerate(FAMILY_COLORS.items()):
        body.append(f'<rect x="{lx}" y="{24 + i * 18}" width="12" height="12" fill="{color}"/>')
        body.append(_text(lx + 16, 34 + i * 18, fam, size=10))
    return _doc(lx + 90, height, body)


def render_histogram(values, bins=12, label="target"):
    values = np.asarray(values, dtype=np.float64)
    counts, edges = np.histogram(values, bins=bins)
    left, top, plot_w, plot_h = 50, 20, 400, 220
    peak = max(1, counts.max())
    body = []
    bw = plot_w / len(counts)
    for i, c in enumerate(counts):
        h = c / peak * plot_h
        body.append(
            f'<rect class="bin" x="{_fmt(left + i * bw)}" y="{_fmt(top + plot_h - h)}" '
            f'width="{_fmt(bw - 1)}" height="{_fmt(h)}" fill="#4292c6"/>'
        )
    for i in range(0, len(edges), max(1, len(edges) // 6)):
        body.append(_text(left + i * bw, top + plot_h + 14, f"{edges[i]:.4g}", size=9, anchor="middle"))
    body.append(_text(left - 6, top + 8, str(peak), size=9, anchor="end"))
    body.append(_text(left - 6, top + plot_h, "0", size=9, anchor="end"))
    mean, sd = values.mean(), values.std(ddof=1)
    body.append(_text(left + plot_w / 2, top + plot_h + 34, f"{label} (mean = {mean:.4g}, SD = {sd:.4g})", size=10, anchor="middle"))
    return _doc(left + plot_w + 20, top + plot_h + 44, body)
