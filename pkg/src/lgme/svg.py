"""Minimal SVG line charts for sweep results."""

from xml.sax.saxutils import escape

from .sweeps import SweepResult

WIDTH, HEIGHT = 640, 420
MARGIN = 56
PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
           "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]


def series_for(result: SweepResult):
    """``(x label, {series name: [(x, y), ...]})`` for an experiment."""
    series = {}
    if result.experiment in ("fig1", "compute"):
        for row in result.rows:
            series.setdefault(f"photon counting {row['config']}", []).append((row["lambda"], row["lgme_lower"]))
            if result.experiment == "fig1":
                series.setdefault("optimal Gaussian", []).append((row["lambda"], row["gaussian_closed_form"]))
        return "lambda = tanh r", series
    if result.experiment == "fig2":
        for row in result.rows:
            name = f"{row['kind']} m{row['mode']} (lambda={row['lambda']:g})"
            series.setdefault(name, []).append((row["m"], row["lgme_lower"]))
        return "m", series
    for row in result.rows:
        name = f"{row['kind']}{row['pair']} (lambda={row['lambda']:g})"
        series.setdefault(name, []).append((row["m_i"], row["lgme_lower"]))
    return "m_i", series


def render(result: SweepResult) -> str:
    xlabel, series = series_for(result)
    points = [p for pts in series.values() for p in pts]
    xs = [p[0] for p in points] or [0.0, 1.0]
    ys = [p[1] for p in points] or [0.0, 1.0]
    x0, x1 = min(xs), max(xs)
    y0, y1 = 0.0, max(ys) * 1.05 or 1.0
    if x1 == x0:
        x1 = x0 + 1.0

    def sx(x):
        return MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2 * MARGIN)

    def sy(y):
        return HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2 * MARGIN)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<text x="{WIDTH / 2}" y="{HEIGHT - 16}" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="16" y="{HEIGHT / 2}" transform="rotate(-90 16 {HEIGHT / 2})" text-anchor="middle">LGME</text>',
        f'<text x="{WIDTH / 2}" y="24" text-anchor="middle" font-size="14">{escape(result.experiment)}</text>',
    ]
    for t in range(5):
        xv = x0 + (x1 - x0) * t / 4
        yv = y0 + (y1 - y0) * t / 4
        out.append(f'<text x="{sx(xv):.1f}" y="{HEIGHT - MARGIN + 16}" text-anchor="middle">{xv:.3g}</text>')
        out.append(f'<text x="{MARGIN - 6}" y="{sy(yv) + 4:.1f}" text-anchor="end">{yv:.3g}</text>')
    for idx, (name, pts) in enumerate(series.items()):
        color = PALETTE[idx % len(PALETTE)]
        path = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in sorted(pts))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{path}"/>')
        ly = MARGIN + 14 * idx
        out.append(f'<line x1="{WIDTH - MARGIN - 170}" y1="{ly}" x2="{WIDTH - MARGIN - 150}" y2="{ly}" stroke="{color}"/>')
        out.append(f'<text x="{WIDTH - MARGIN - 146}" y="{ly + 4}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
