"""Report emission: metrics tables (CSV and Markdown) and DET curve SVGs.

The SVG is written directly as a polyline plot so the library carries no
plotting dependency; output strings are fully deterministic.
"""

from __future__ import annotations

import csv
from pathlib import Path

from .metrics import DetCurve

METRICS_FIELDS = ("model", "protocol", "split", "dataset", "d_eer", "threshold")


def write_metrics_csv(rows: list[dict], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRICS_FIELDS)
        for row in rows:
            writer.writerow(
                [
                    row["model"],
                    row["protocol"],
                    row["split"],
                    row["dataset"],
                    repr(float(row["d_eer"])),
                    repr(float(row["threshold"])),
                ]
            )


def metrics_markdown(rows: list[dict], intra_sources: tuple[str, ...]) -> str:
    """D-EER % per model over the test split, one column per dataset tag,
    intra-dataset columns first, plus a cross-column average."""
    test_rows = [r for r in rows if r["split"] == "test" and r["dataset"] != "all"]
    datasets: list[str] = []
    for r in test_rows:
        if r["dataset"] not in datasets:
            datasets.append(r["dataset"])
    datasets.sort(key=lambda d: (d not in intra_sources, d))
    models: list[tuple[str, str]] = []
    for r in test_rows:
        key = (r["model"], r["protocol"])
        if key not in models:
            models.append(key)

    def cell(model, protocol, dataset):
        for r in test_rows:
            if (r["model"], r["protocol"], r["dataset"]) == (model, protocol, dataset):
                return f"{100.0 * r['d_eer']:.2f}"
        return "-"

    header = ["Model", "Protocol"]
    header += [f"{'Intra' if d in intra_sources else 'Cross'}: {d}" for d in datasets]
    header.append("Avg")
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    for model, protocol in models:
        cells = [cell(model, protocol, d) for d in datasets]
        values = [float(c) for c in cells if c != "-"]
        avg = f"{sum(values) / len(values):.2f}" if values else "-"
        lines.append("| " + " | ".join([model, protocol] + cells + [avg]) + " |")
    return "\n".join(["# D-EER % (test split)", ""] + lines) + "\n"


def write_metrics_markdown(
    rows: list[dict], intra_sources: tuple[str, ...], path: str | Path
) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(metrics_markdown(rows, intra_sources))


def det_svg(curve: DetCurve, title: str) -> str:
    """A 520x520 plot of BPCER against APCER across thresholds."""
    size, margin = 520, 60
    span = size - 2 * margin

    def sx(a: float) -> float:
        return margin + a * span

    def sy(b: float) -> float:
        return size - margin - b * span

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
        f'<text x="{size / 2:.0f}" y="28" text-anchor="middle" font-family="sans-serif" '
        f'font-size="16">{title}</text>',
    ]
    for frac in (0.0, 0.2, 0.4, 0.6, 0.8, 1.0):
        x, y = sx(frac), sy(frac)
        parts.append(
            f'<line x1="{x:.1f}" y1="{margin}" x2="{x:.1f}" y2="{size - margin}" '
            f'stroke="#dddddd"/>'
        )
        parts.append(
            f'<line x1="{margin}" y1="{y:.1f}" x2="{size - margin}" y2="{y:.1f}" '
            f'stroke="#dddddd"/>'
        )
        parts.append(
            f'<text x="{x:.1f}" y="{size - margin + 20}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{frac:.1f}</text>'
        )
        parts.append(
            f'<text x="{margin - 10}" y="{y + 4:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{frac:.1f}</text>'
        )
    parts.append(
        f'<rect x="{margin}" y="{margin}" width="{span}" height="{span}" fill="none" '
        f'stroke="#333333"/>'
    )
    parts.append(
        f'<text x="{size / 2:.0f}" y="{size - 14}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">APCER</text>'
    )
    parts.append(
        f'<text x="16" y="{size / 2:.0f}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="13" transform="rotate(-90 16 {size / 2:.0f})">BPCER</text>'
    )
    points = " ".join(
        f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(curve.apcer, curve.bpcer)
    )
    parts.append(
        f'<polyline points="{points}" fill="none" stroke="#c0392b" stroke-width="2"/>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_det_svg(curve: DetCurve, title: str, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(det_svg(curve, title))
