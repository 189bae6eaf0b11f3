import csv

import numpy as np

from facefreq.metrics import ScoreSet, det_curve
from facefreq.report import det_svg, metrics_markdown, write_metrics_csv


def row(model, dataset, eer, split="test", protocol="bpcer2.00"):
    return {
        "model": model,
        "protocol": protocol,
        "split": split,
        "dataset": dataset,
        "d_eer": eer,
        "threshold": 0.5,
    }


def test_markdown_intra_cross_layout():
    rows = [
        row("dct", "all", 0.10),
        row("dct", "lab", 0.08),
        row("dct", "web", 0.30),
        row("rgb", "lab", 0.12),
        row("rgb", "web", 0.20),
        row("dct", "lab", 0.5, split="val"),
    ]
    md = metrics_markdown(rows, intra_sources=("lab",))
    lines = md.strip().splitlines()
    header = lines[2]
    assert header == "| Model | Protocol | Intra: lab | Cross: web | Avg |"
    body = {ln.split(" | ")[0].strip("| "): ln for ln in lines[4:]}
    assert "8.00 | 30.00 | 19.00" in body["dct"]
    assert "12.00 | 20.00 | 16.00" in body["rgb"]
    assert "0.5" not in md  # val rows and "all" groups stay out of the table


def test_markdown_missing_cell_dash():
    rows = [row("dct", "lab", 0.08), row("rgb", "web", 0.2)]
    md = metrics_markdown(rows, intra_sources=("lab",))
    dct_line = next(ln for ln in md.splitlines() if ln.startswith("| dct"))
    assert "| - |" in dct_line


def test_metrics_csv_full_precision(tmp_path):
    rows = [row("dct", "all", 1.0 / 3.0)]
    path = tmp_path / "metrics.csv"
    write_metrics_csv(rows, path)
    with path.open() as fh:
        parsed = list(csv.DictReader(fh))
    assert float(parsed[0]["d_eer"]) == 1.0 / 3.0


def test_det_svg_structure():
    ids = tuple(map(str, range(6)))
    labels = np.array([0, 0, 0, 1, 1, 1], np.int8)
    scores = np.array([0.1, 0.4, 0.2, 0.8, 0.6, 0.9])
    curve = det_curve(ScoreSet(ids, labels, scores))
    svg = det_svg(curve, "DET: demo")
    assert svg.startswith("<svg")
    assert svg.rstrip().endswith("</svg>")
    assert "DET: demo" in svg
    assert svg.count("polyline") == 1
    assert "APCER" in svg and "BPCER" in svg
