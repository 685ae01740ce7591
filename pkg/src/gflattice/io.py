"""Deterministic writers and the CSV comparison tool.

All numbers are written with ``'.17g'`` so a float survives the text round
trip exactly.  PGM files are plain (P2), 8-bit, one row per site and one
column per output step, scaled linearly to the file's own maximum.
"""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from .errors import ValidationError


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_table(path: str, axis_name: str, axis, columns: Dict[str, np.ndarray]):
    """CSV with ``axis_name`` first, then one column per entry of ``columns``."""
    axis = np.asarray(axis, dtype=float)
    names = list(columns)
    data = [np.asarray(columns[k], dtype=float) for k in names]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join([axis_name] + names) + "\n")
        for i, x in enumerate(axis):
            fh.write(",".join([_fmt(x)] + [_fmt(col[i]) for col in data]) + "\n")


def write_intensity_csv(path: str, axis_name: str, axis, values: np.ndarray):
    """Rows are output steps; ``values`` is (steps, sites)."""
    values = np.asarray(values, dtype=float)
    cols = {f"site_{j}": values[:, j] for j in range(values.shape[1])}
    write_table(path, axis_name, axis, cols)


def pgm_bytes(values: np.ndarray) -> bytes:
    """P2 image of ``values`` (steps, sites): row = site, column = step."""
    img = np.asarray(values, dtype=float).T
    top = float(img.max()) if img.size else 0.0
    levels = np.zeros(img.shape, dtype=int) if top <= 0 else np.rint(255.0 * np.clip(img, 0.0, None) / top).astype(int)
    lines = ["P2", f"{img.shape[1]} {img.shape[0]}", "255"]
    lines += [" ".join(str(v) for v in row) for row in levels]
    return ("\n".join(lines) + "\n").encode("ascii")


def write_pgm(path: str, values: np.ndarray):
    with open(path, "wb") as fh:
        fh.write(pgm_bytes(values))


def write_svg(path: str, values: np.ndarray, cell: int = 4):
    """Grayscale heatmap, same orientation and scaling as the PGM."""
    img = np.asarray(values, dtype=float).T
    top = float(img.max()) if img.size else 0.0
    rows, cols = img.shape
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{cols * cell}" height="{rows * cell}" '
             f'shape-rendering="crispEdges">']
    for i in range(rows):
        for j in range(cols):
            v = 0 if top <= 0 else int(round(255.0 * max(img[i, j], 0.0) / top))
            parts.append(f'<rect x="{j * cell}" y="{i * cell}" width="{cell}" height="{cell}" '
                         f'fill="rgb({v},{v},{v})"/>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")


def write_matrix(path: str, matrix: np.ndarray):
    """Full complex matrix, row-major, one matrix row per line as ``re,im`` pairs."""
    m = np.asarray(matrix, dtype=complex)
    with open(path, "w", encoding="utf-8") as fh:
        for row in m:
            fh.write(" ".join(f"{_fmt(z.real)},{_fmt(z.imag)}" for z in row) + "\n")


def read_matrix(path: str) -> np.ndarray:
    """Read a real matrix (CSV, whitespace or ``re,im`` pairs; imaginary parts must vanish for real input)."""
    rows: List[List[complex]] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if " " in line and "," in line:
                row = []
                for tok in line.split():
                    re_, im = tok.split(",")
                    row.append(complex(float(re_), float(im)))
            else:
                row = [complex(float(t)) for t in line.replace(",", " ").split()]
            rows.append(row)
    if not rows or len({len(r) for r in rows}) != 1:
        raise ValidationError(f"{path}: not a rectangular matrix")
    out = np.array(rows, dtype=complex)
    return out.real if np.all(out.imag == 0) else out


def write_manifest(path: str, config_text: str, seed: int, version: str, wall_time: float,
                   files: Sequence[str]):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"version = {version}\n")
        fh.write(f"seed = {seed}\n")
        fh.write(f"wall_time_s = {wall_time:.3f}\n")
        fh.write("files = " + ", ".join(files) + "\n")
        fh.write("\n# resolved config\n")
        fh.write(config_text)


def read_csv(path: str):
    """Return (header, rows) with rows as lists of strings."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path}: empty file") from None
        rows = [r for r in reader if r]
    return header, rows


@dataclass
class ColumnDiff:
    name: str
    max_abs: float
    rms: float


@dataclass
class CompareReport:
    columns: List[ColumnDiff]
    tolerance: float

    @property
    def max_abs(self) -> float:
        return max((c.max_abs for c in self.columns), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_abs <= self.tolerance

    def format(self) -> str:
        lines = [f"{'column':<16} {'max_abs':>24} {'rms':>24}"]
        for c in self.columns:
            lines.append(f"{c.name:<16} {c.max_abs:>24.17g} {c.rms:>24.17g}")
        lines.append(f"{'PASS' if self.passed else 'FAIL'} (max_abs {self.max_abs:.3g}, tolerance {self.tolerance:.3g})")
        return "\n".join(lines)


def _number(text: str) -> Optional[float]:
    try:
        return float(text)
    except ValueError:
        return None


def compare(file_a: str, file_b: str, tolerance: float) -> CompareReport:
    """Per-column max-abs and RMS differences of two same-shaped CSVs.

    Non-numeric columns (such as an engine tag) must match exactly and are
    not reported.
    """
    if not tolerance >= 0 or math.isnan(tolerance):
        raise ValidationError("tolerance must be >= 0")
    ha, ra = read_csv(file_a)
    hb, rb = read_csv(file_b)
    if len(ha) != len(hb) or len(ra) != len(rb) or any(len(x) != len(ha) for x in ra + rb):
        raise ValidationError(f"shape mismatch: {len(ra)}x{len(ha)} vs {len(rb)}x{len(hb)}")
    diffs = []
    for j, name in enumerate(ha):
        col_a = [_number(r[j]) for r in ra]
        col_b = [_number(r[j]) for r in rb]
        if any(v is None for v in col_a + col_b):
            if [r[j] for r in ra] != [r[j] for r in rb]:
                raise ValidationError(f"non-numeric column {name!r} differs")
            continue
        d = np.abs(np.array(col_a) - np.array(col_b))
        diffs.append(ColumnDiff(name, float(d.max()) if d.size else 0.0,
                                float(np.sqrt(np.mean(d**2))) if d.size else 0.0))
    return CompareReport(diffs, tolerance)


def remove_quietly(paths: Sequence[str]):
    for p in paths:
        try:
            os.remove(p)
        except FileNotFoundError:
            pass
