"""Lossless JSON/CSV dumps of a constructed scheme.

Rationals are written as ``"p/q"`` strings. Inputs ``x`` and shared-randomness
values ``u`` are 1-based in files, matching the edge-list format.
"""

from __future__ import annotations

import csv
import json
from fractions import Fraction
from pathlib import Path
from typing import Iterable

from .mechanisms import Mechanism
from .schemes import SRScheme

CSV_HEADER = ("x", "z1", "z2")


def frac_str(q) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def parse_frac(s: str) -> Fraction:
    return Fraction(s.strip())


def mechanism_filename(u: int) -> str:
    """File name for the mechanism of 0-based ``u`` (files are numbered from 1)."""
    return f"mechanism_u{u + 1}.csv"


def scheme_descriptor(s: SRScheme) -> dict:
    out = s.describe()
    out.update(
        {
            "c": frac_str(s.c),
            "d": None if s.d is None else frac_str(s.d),
            "c1_exact": frac_str(s.c1),
            "c2_exact": frac_str(s.c2),
            "growth": frac_str(s.constraint.growth),
            "prob_u": [frac_str(p) for p in s.prob_u],
            "pairs": [[i + 1, j + 1] for i, j in s.resolution.pairs],
            "edges": None
            if s.design is None
            else [sorted(x + 1 for x in e) for e in s.design.edges],
            "mechanism_files": [mechanism_filename(u) for u in range(s.u_count)],
        }
    )
    return out


def write_mechanism_csv(Q: Mechanism, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(("x",) + tuple(f"z{j + 1}" for j in range(Q.num_outputs)))
    for x, row in enumerate(Q.rows):
        w.writerow([x + 1] + [frac_str(q) for q in row])


def read_mechanism_csv(fh: Iterable[str]) -> Mechanism:
    reader = csv.reader(fh)
    header = next(reader)
    if header[0] != "x":
        raise ValueError(f"unexpected header {header!r}")
    rows = [[parse_frac(tok) for tok in line[1:]] for line in reader if line]
    return Mechanism(rows, allow_zero_columns=True)


def export_scheme(s: SRScheme, directory) -> list[Path]:
    """Write ``scheme.json`` and one ``mechanism_u<k>.csv`` per ``u``; return the paths."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "scheme.json"]
    paths[0].write_text(json.dumps(scheme_descriptor(s), indent=2) + "\n")
    for u, mech in enumerate(s.per_u_mechanisms):
        p = out / mechanism_filename(u)
        with p.open("w", newline="") as fh:
            write_mechanism_csv(mech, fh)
        paths.append(p)
    return paths
