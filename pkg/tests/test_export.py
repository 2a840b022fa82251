"""Lossless scheme dumps."""

import json
from fractions import Fraction

from onebit_put.export import export_scheme, frac_str, read_mechanism_csv, scheme_descriptor
from onebit_put.mechanisms import PrivacyConstraint
from onebit_put.schemes import build_optimal_sr_scheme


def test_frac_str_always_has_denominator():
    assert frac_str(0) == "0/1"
    assert frac_str(Fraction(-3, 6)) == "-1/2"


def test_export_round_trip(tmp_path):
    s = build_optimal_sr_scheme(PrivacyConstraint.ldp(1.0, 0.1), 5)
    paths = export_scheme(s, tmp_path / "out")
    assert [p.name for p in paths[:3]] == ["scheme.json", "mechanism_u1.csv", "mechanism_u2.csv"]
    assert len(paths) == 1 + s.u_count
    desc = json.loads(paths[0].read_text())
    assert desc["case"] == s.case and desc["C"] == s.u_count and desc["v"] == 5
    assert Fraction(desc["c1_exact"]) == s.c1 and Fraction(desc["c2_exact"]) == s.c2
    assert desc["pairs"][0] == [i + 1 for i in s.resolution.pairs[0]]
    for u, p in enumerate(paths[1:]):
        with p.open() as fh:
            assert read_mechanism_csv(fh) == s.per_u_mechanisms[u]


def test_descriptor_diag_has_no_design():
    s = build_optimal_sr_scheme(PrivacyConstraint.ml(0.5), 3)
    d = scheme_descriptor(s)
    assert d["edges"] is None and d["d"] is None
    assert d["prob_u"] == ["1/3"] * 3
