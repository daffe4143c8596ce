#!/usr/bin/env python3
"""Render sweep TSVs into the repository's standard rate plots.

Usage:
    python3 figures/render.py --spec figures/specs/fig2.json --out build/figs \
        [--data figures/data]

Each spec is a JSON file describing one figure: which TSVs to plot, axis
labels and scales, and horizontal reference lines. Rendering is a pure
function of (spec, TSV contents): no clock, network, or environment input
reaches the output, so byte-identical inputs give byte-identical SVGs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

# Fixed hash salt: matplotlib otherwise salts SVG element ids randomly.
matplotlib.rcParams["svg.hashsalt"] = "phasetrack-figures"


class SpecError(ValueError):
    """Invalid figure spec or unreadable data file."""


def load_tsv(path):
    if not os.path.exists(path):
        raise SpecError(f"missing TSV: {path}")
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise SpecError(f"garbled TSV (expected 3 columns): {path}")
            try:
                rows.append([float(v) for v in parts])
            except ValueError as exc:
                raise SpecError(f"garbled TSV (non-numeric row): {path}") from exc
    if not rows:
        raise SpecError(f"empty TSV: {path}")
    return np.asarray(rows)


def load_spec(path):
    if not os.path.exists(path):
        raise SpecError(f"missing spec: {path}")
    with open(path, encoding="utf-8") as fh:
        try:
            spec = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpecError(f"garbled spec: {path}: {exc}") from exc
    if not spec.get("name"):
        raise SpecError(f"{path}: spec needs a 'name'")
    curves = spec.get("curves") or []
    if not curves:
        raise SpecError(f"{path}: spec has no curves")
    labels = [c.get("label") for c in curves]
    if len(set(labels)) != len(labels) or not all(labels):
        raise SpecError(f"{path}: curve labels must be present and unique")
    for c in curves:
        if not c.get("tsv"):
            raise SpecError(f"{path}: curve '{c.get('label')}' has no tsv")
    return spec


def render(spec, data_dir, out_dir):
    """Render one figure; returns the output SVG path."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for curve in spec["curves"]:
        data = load_tsv(os.path.join(data_dir, curve["tsv"]))
        ax.errorbar(
            data[:, 0],
            data[:, 1],
            yerr=2.0 * data[:, 2],
            label=curve["label"],
            color=curve.get("color"),
            linestyle=curve.get("linestyle", "-"),
            marker=curve.get("marker"),
            markersize=4,
            linewidth=1.2,
            elinewidth=0.7,
            capsize=2,
        )
    for ref in spec.get("reference_lines", []):
        ax.axhline(ref["y"], color=ref.get("color", "black"), linestyle="--",
                   linewidth=1.0, label=ref.get("label"))
    ax.set_xlabel(spec.get("x_label", ""))
    ax.set_ylabel(spec.get("y_label", "AIR [bpcu]"))
    if spec.get("x_scale") == "log":
        ax.set_xscale("log")
    if spec.get("xlim"):
        ax.set_xlim(spec["xlim"])
    if spec.get("ylim"):
        ax.set_ylim(spec["ylim"])
    if spec.get("title"):
        ax.set_title(spec["title"])
    ax.grid(True, linewidth=0.3)
    ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    os.makedirs(out_dir, exist_ok=True)
    out_path = os.path.join(out_dir, spec["name"] + ".svg")
    # Date metadata suppressed so reruns are byte-identical.
    fig.savefig(out_path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return out_path


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--spec", required=True, help="figure spec JSON")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument(
        "--data",
        default=None,
        help="directory holding the TSVs (default: <spec dir>/../data)",
    )
    args = parser.parse_args(argv)
    data_dir = args.data
    if data_dir is None:
        data_dir = os.path.join(os.path.dirname(os.path.abspath(args.spec)), os.pardir, "data")
    try:
        spec = load_spec(args.spec)
        out_path = render(spec, data_dir, args.out)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(out_path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
