"""Render figures from simulator result CSVs.

Reads the versioned results CSV (schema "# fdiab-results v1") and produces
one of four figure kinds:

  se_vs_snr   sum spectral efficiency vs average SNR
  se_vs_bits  sum spectral efficiency vs ADC resolution
  ee_vs_bits  energy efficiency vs ADC resolution
  outage      empirical outage probability vs the sweep axis

Full-duplex scenarios are drawn with solid lines, half-duplex with dashed
lines; rows with infinite bit resolution become horizontal reference lines.
Output is deterministic for identical input (PDF metadata timestamps are
stripped), supports PNG and PDF, and an existing output file is only
replaced when --overwrite is passed.

Usage: python -m plots.render --csv results.csv --kind se_vs_snr --out fig.png
"""
from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

SCHEMA = "# fdiab-results v1"
KINDS = ("se_vs_snr", "se_vs_bits", "ee_vs_bits", "outage")

REQUIRED_COLUMNS = {
    "se_vs_snr": ["axis_name", "axis_value", "duplex", "architecture", "bits", "mean_se_sum"],
    "se_vs_bits": ["axis_name", "axis_value", "duplex", "architecture", "bits", "mean_se_sum"],
    "ee_vs_bits": ["axis_name", "axis_value", "duplex", "architecture", "bits", "ee_bits_per_joule"],
    "outage": ["axis_name", "axis_value", "duplex", "architecture", "bits", "outage_p"],
}

AXIS_LABELS = {"snr_db": "average SNR (dB)", "bits": "ADC resolution (bits)"}
Y_COLUMNS = {
    "se_vs_snr": ("mean_se_sum", "sum spectral efficiency (bits/s/Hz)"),
    "se_vs_bits": ("mean_se_sum", "sum spectral efficiency (bits/s/Hz)"),
    "ee_vs_bits": ("ee_bits_per_joule", "energy efficiency (bits/s/Hz per Watt)"),
    "outage": ("outage_p", "outage probability"),
}


class SchemaError(Exception):
    pass


@dataclass
class PlotSpec:
    csv_path: str
    kind: str
    out_path: str
    overwrite: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}; expected one of {', '.join(KINDS)}")


def load_results(path) -> list[dict]:
    """Parse the CSV into a list of row dicts with numeric fields converted;
    validates the schema version line."""
    with open(path, newline="") as fh:
        first = fh.readline().rstrip("\n")
        if first != SCHEMA:
            raise SchemaError(f"unrecognized schema line {first!r}; expected {SCHEMA!r}")
        rows = list(csv.DictReader(fh))
    out = []
    for row in rows:
        parsed = dict(row)
        for key in ("axis_value", "bits", "mean_se_sum", "mean_se_backhaul", "mean_se_access",
                    "stderr", "bound_sum", "ee_bits_per_joule", "outage_p", "eps_rate"):
            if key in parsed and parsed[key] is not None:
                parsed[key] = float(parsed[key])
        out.append(parsed)
    return out


def _require_columns(rows, kind):
    missing = [c for c in REQUIRED_COLUMNS[kind] if not rows or c not in rows[0]]
    if missing:
        raise SchemaError(f"csv is missing required columns for {kind}: {', '.join(missing)}")


def _series_label(duplex, architecture, bits):
    name = f"{duplex.upper()} {architecture}"
    if architecture == "bound":
        return "interference-free bound"
    if math.isinf(bits):
        return f"{name} (infinite resolution)"
    return f"{name} (b={bits:g})"


def _group_rows(rows):
    """Group rows into one series per (duplex, architecture, bits), each a
    sorted list of (axis_value, row)."""
    series: dict = {}
    for row in rows:
        key = (row["duplex"], row["architecture"], row["bits"])
        series.setdefault(key, []).append(row)
    for key in series:
        series[key].sort(key=lambda r: r["axis_value"])
    return series


def build_figure(rows, kind):
    """Pure figure construction (no I/O); returns the matplotlib Figure."""
    _require_columns(rows, kind)
    if not rows:
        raise SchemaError("csv contains no data rows")
    y_col, y_label = Y_COLUMNS[kind]
    axis_name = rows[0]["axis_name"]

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for (duplex, arch, bits), srows in sorted(_group_rows(rows).items()):
        x = [r["axis_value"] for r in srows]
        y = [r[y_col] for r in srows]
        label = _series_label(duplex, arch, bits)
        style = "-" if duplex == "fd" else "--"
        if axis_name == "bits" and (math.isinf(bits) or arch == "bound"):
            # a resolution-independent level: draw as a horizontal reference
            level = sum(y) / len(y)
            ref_label = "infinite resolution" if arch != "bound" else label
            ax.axhline(level, linestyle=style if arch != "bound" else ":",
                       color="gray", linewidth=1.2, label=ref_label)
            continue
        marker = "o" if arch == "hybrid" else ("s" if arch == "all-digital" else "^")
        ax.plot(x, y, style, marker=marker, markersize=4, label=label)
    ax.set_xlabel(AXIS_LABELS.get(axis_name, axis_name))
    ax.set_ylabel(y_label)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def render(spec: PlotSpec) -> str:
    """Render the figure described by spec and write it to spec.out_path."""
    import os

    if os.path.exists(spec.out_path) and not spec.overwrite:
        raise FileExistsError(
            f"{spec.out_path} exists; pass --overwrite to replace it"
        )
    rows = load_results(spec.csv_path)
    fig = build_figure(rows, spec.kind)
    ext = os.path.splitext(spec.out_path)[1].lower()
    if ext not in (".png", ".pdf"):
        raise SchemaError(f"unsupported output format {ext!r}; use .png or .pdf")
    # strip volatile metadata so identical input yields identical bytes
    metadata = {"CreationDate": None} if ext == ".pdf" else {"Software": None}
    fig.savefig(spec.out_path, dpi=150, metadata=metadata)
    plt.close(fig)
    return spec.out_path


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="plots.render", description=__doc__)
    parser.add_argument("--csv", required=True, help="input results CSV")
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--out", required=True, help="output image (.png or .pdf)")
    parser.add_argument("--overwrite", action="store_true", help="replace an existing output file")
    args = parser.parse_args(argv)
    try:
        path = render(PlotSpec(csv_path=args.csv, kind=args.kind, out_path=args.out,
                               overwrite=args.overwrite))
    except (SchemaError, FileExistsError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
