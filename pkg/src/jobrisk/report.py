"""Tables, CSV artifacts and static SVG charts.

SVGs are emitted as plain markup on a fixed 800x500 canvas. Every number is
formatted with a fixed precision and elements are written in a fixed order, so
equal inputs give byte-identical files.
"""
import csv
import math
from xml.sax.saxutils import escape

import numpy as np

from .diagnostics import ISCO_MAJOR_GROUPS, IscoAggregate
from .glm import FittedGlm, LdaModel

WIDTH = 800
HEIGHT = 500
MARGIN = {"left": 70, "right": 30, "top": 50, "bottom": 60}
BAR_FILL = "#4c72b0"
THRESHOLD_STROKE = "#c44e52"


def significance_stars(p):
    if p is None or not math.isfinite(p):
        return ""
    if p < 0.01:
        return "***"
    if p < 0.05:
        return "**"
    if p < 0.1:
        return "*"
    return ""


# ---------------------------------------------------------------------------
# coefficient table
# ---------------------------------------------------------------------------

def coefficient_rows(model):
    """(name, estimate, std. error or None, p-value or None) per parameter.

    LDA has no standard errors; its rows carry the discriminant weights.
    """
    if isinstance(model, LdaModel):
        w, b = model.discriminant()
        rows = [("intercept", float(b), None, None)]
        rows += [(n, float(v), None, None) for n, v in zip(model.used_features, w)]
        return rows
    return [
        (n, float(c), float(s), float(p))
        for n, c, s, p in zip(model.feature_names, model.coefficients,
                              model.std_errors, model.p_values)
    ]


def format_coefficient_table(model, digits=3):
    """Two lines per parameter: estimate with stars, then ``(SE)`` below."""
    rows = coefficient_rows(model)
    width = max(len(r[0]) for r in rows)
    lines = []
    for name, est, se, p in rows:
        lines.append(f"{name:<{width}}  {est:>12.{digits}f}{significance_stars(p)}")
        if se is not None:
            lines.append(f"{'':<{width}}  {'(' + format(se, f'.{digits}f') + ')':>12}")
    lines.append("-" * (width + 16))
    if isinstance(model, FittedGlm):
        lines.append(f"{'Observations':<{width}}  {model.n:>12d}")
        lines.append(f"{'AIC':<{width}}  {model.aic:>12.{digits}f}")
        lines.append("*** p<0.01, ** p<0.05, * p<0.1")
    else:
        lines.append(f"{'Observations':<{width}}  {model.n:>12d}")
    return "\n".join(lines) + "\n"


def write_coefficient_csv(model, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("term", "estimate", "std_error", "p_value", "stars"))
        for name, est, se, p in coefficient_rows(model):
            w.writerow((name, repr(est), "" if se is None else repr(se),
                        "" if p is None else repr(p), significance_stars(p)))


# ---------------------------------------------------------------------------
# CSV artifacts
# ---------------------------------------------------------------------------

def write_predictions_csv(prediction, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("id", "isco4", "probability"))
        for i, code, p in zip(prediction.ids, prediction.isco4, prediction.probabilities):
            w.writerow((i, code, repr(float(p))))


def read_predictions_csv(path):
    """Returns (ids, isco codes, probabilities)."""
    ids, codes, probs = [], [], []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            ids.append(row["id"])
            codes.append(row["isco4"])
            probs.append(float(row["probability"]))
    return tuple(ids), tuple(codes), np.array(probs, dtype=np.float64)


def write_distribution_csv(distribution, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("bin_lower", "bin_upper", "count"))
        edges = distribution.bin_edges
        for lo, hi, c in zip(edges[:-1], edges[1:], distribution.counts):
            w.writerow((repr(float(lo)), repr(float(hi)), int(c)))


def read_distribution_csv(path):
    """Returns (bin edges, counts)."""
    lo, hi, counts = [], [], []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            lo.append(float(row["bin_lower"]))
            hi.append(float(row["bin_upper"]))
            counts.append(int(row["count"]))
    return np.array(lo + hi[-1:]), np.array(counts, dtype=np.int64)


def write_isco_csv(aggregate, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("isco", "mean_probability", "n_workers"))
        for code, (mean, count) in aggregate.groups.items():
            w.writerow((code, repr(float(mean)), count))


def read_isco_csv(path):
    groups = {}
    level = None
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            level = len(row["isco"])
            groups[row["isco"]] = (float(row["mean_probability"]), int(row["n_workers"]))
    return IscoAggregate(level=level or 0, groups=groups)


# ---------------------------------------------------------------------------
# SVG
# ---------------------------------------------------------------------------

def _f(x):
    return f"{x:.2f}"


def _svg_open(title):
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
        f'<text x="{WIDTH / 2:.2f}" y="28" font-size="16" text-anchor="middle">{escape(title)}</text>',
    ]


def _nice_max(v):
    if v <= 0:
        return 1.0
    mag = 10 ** math.floor(math.log10(v))
    for step in (1, 2, 2.5, 5, 10):
        if step * mag >= v:
            return step * mag
    return 10 * mag


def histogram_svg(distribution, title):
    """Bar histogram of predicted probabilities on [0, 1] with the threshold line."""
    x0, x1 = MARGIN["left"], WIDTH - MARGIN["right"]
    y0, y1 = HEIGHT - MARGIN["bottom"], MARGIN["top"]
    counts = np.asarray(distribution.counts)
    edges = np.asarray(distribution.bin_edges)
    ymax = _nice_max(float(counts.max()) if counts.size else 0.0)

    def sx(v):
        return x0 + (x1 - x0) * v

    def sy(v):
        return y0 - (y0 - y1) * v / ymax

    out = _svg_open(title)
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="#000000"/>')
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="#000000"/>')
    for i in range(5):
        v = ymax * i / 4
        out.append(f'<text x="{x0 - 8}" y="{_f(sy(v) + 4)}" font-size="11" '
                   f'text-anchor="end">{v:g}</text>')
    for i in range(11):
        v = i / 10
        out.append(f'<text x="{_f(sx(v))}" y="{y0 + 18}" font-size="11" '
                   f'text-anchor="middle">{v:.1f}</text>')
    for lo, hi, c in zip(edges[:-1], edges[1:], counts):
        top = sy(float(c))
        out.append(
            f'<rect x="{_f(sx(lo) + 1)}" y="{_f(top)}" width="{_f(sx(hi) - sx(lo) - 2)}" '
            f'height="{_f(y0 - top)}" fill="{BAR_FILL}"/>'
        )
    tx = sx(distribution.threshold)
    out.append(f'<line x1="{_f(tx)}" y1="{y0}" x2="{_f(tx)}" y2="{y1}" '
               f'stroke="{THRESHOLD_STROKE}" stroke-dasharray="6,4"/>')
    out.append(
        f'<text x="{_f(tx + 6)}" y="{y1 + 14}" font-size="12" fill="{THRESHOLD_STROKE}">'
        f'{distribution.high_risk_share * 100:.1f}% above {distribution.threshold:g}</text>'
    )
    out.append(f'<text x="{_f((x0 + x1) / 2)}" y="{HEIGHT - 18}" font-size="13" '
               'text-anchor="middle">Predicted probability</text>')
    out.append(f'<text x="18" y="{_f((y0 + y1) / 2)}" font-size="13" text-anchor="middle" '
               f'transform="rotate(-90 18 {_f((y0 + y1) / 2)})">Workers</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def isco_bar_svg(aggregate, title):
    """Horizontal bars of mean probability per ISCO group, highest first."""
    items = sorted(aggregate.groups.items(), key=lambda kv: (-kv[1][0], kv[0]))
    label_w = 260 if aggregate.level == 1 else 60
    x0, x1 = label_w + 10, WIDTH - MARGIN["right"] - 40
    y_top, y_bot = MARGIN["top"], HEIGHT - MARGIN["bottom"]
    n = max(len(items), 1)
    slot = (y_bot - y_top) / n
    bar_h = slot * 0.75
    font = min(12.0, max(6.0, slot * 0.7))

    out = _svg_open(title)
    out.append(f'<line x1="{x0}" y1="{y_top}" x2="{x0}" y2="{y_bot}" stroke="#000000"/>')
    out.append(f'<line x1="{x0}" y1="{y_bot}" x2="{x1}" y2="{y_bot}" stroke="#000000"/>')
    for i in range(6):
        v = i / 5
        x = x0 + (x1 - x0) * v
        out.append(f'<text x="{_f(x)}" y="{y_bot + 16}" font-size="11" '
                   f'text-anchor="middle">{v:.1f}</text>')
    for i, (code, (mean, count)) in enumerate(items):
        y = y_top + i * slot + (slot - bar_h) / 2
        label = code
        if aggregate.level == 1 and code in ISCO_MAJOR_GROUPS:
            label = f"{code} {ISCO_MAJOR_GROUPS[code]}"
        out.append(f'<text x="{label_w}" y="{_f(y + bar_h / 2 + font / 3)}" '
                   f'font-size="{font:.1f}" text-anchor="end">{escape(label)}</text>')
        out.append(f'<rect x="{x0}" y="{_f(y)}" width="{_f((x1 - x0) * mean)}" '
                   f'height="{_f(bar_h)}" fill="{BAR_FILL}"/>')
        out.append(f'<text x="{_f(x0 + (x1 - x0) * mean + 4)}" y="{_f(y + bar_h / 2 + font / 3)}" '
                   f'font-size="{font:.1f}">{mean:.2f} (n={count})</text>')
    out.append(f'<text x="{_f((x0 + x1) / 2)}" y="{HEIGHT - 18}" font-size="13" '
               'text-anchor="middle">Mean predicted probability</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_text(text, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
