import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dmmsat.config import coerce, format_kv, parse_kv
from dmmsat.dimacs import (
    emit_dimacs, emit_xcnf, instance_metadata, parse_assignment, parse_dimacs, parse_xcnf,
)
from dmmsat.errors import HeaderMismatch, ParseError
from dmmsat.instance import CnfFormula, generate_balanced_xorsat

from conftest import EXAMPLE_CLAUSES, random_formula


def test_parse_example():
    text = "c tiny\np cnf 3 2\n1 -2 0\n2 3\n-1 0\n"
    f = parse_dimacs(text)
    assert f.int_clauses() == [[1, -2], [2, 3, -1]]  # clause spanning two lines
    assert f.comments == ("tiny",)


def test_parse_percent_terminator():
    f = parse_dimacs("p cnf 2 1\n1 2 0\n%\n0\n")
    assert f.n_clauses == 1


@pytest.mark.parametrize("text,line", [
    ("p cnf 3 1\n1 x 0\n", 2),
    ("1 2 0\n", 1),
    ("p cnf 3 1\n1 2\n", 2),
    ("p cnf 3 2\n1 2 0\n0\n", 3),
    ("p cnf 3 1\n1 -1 0\n", 2),
    ("p dnf 3 1\n1 0\n", 1),
])
def test_parse_errors_carry_line(text, line):
    with pytest.raises(ParseError) as exc:
        parse_dimacs(text)
    assert exc.value.lineno == line
    assert str(exc.value).startswith(f"line {line}:")


def test_parse_header_mismatch():
    with pytest.raises(HeaderMismatch):
        parse_dimacs("p cnf 2 1\n1 3 0\n")
    with pytest.raises(HeaderMismatch):
        parse_dimacs("p cnf 2 2\n1 2 0\n")


def test_emit_example():
    text = emit_dimacs(CnfFormula(3, EXAMPLE_CLAUSES), ["example"])
    assert text.splitlines()[:3] == ["c example", "p cnf 3 7", "1 2 0"]


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(1, 30), m=st.integers(0, 40))
def test_round_trip(seed, n, m):
    f = random_formula(np.random.default_rng(seed), n, m, max_width=5)
    g = parse_dimacs(emit_dimacs(f))
    assert g == f
    assert emit_dimacs(g) == emit_dimacs(f)


def test_xcnf_round_trip():
    xor = generate_balanced_xorsat(40, 1.25, seed=3)
    back = parse_xcnf(emit_xcnf(xor, ["x"]))
    assert np.array_equal(back.triples, xor.triples)
    assert np.array_equal(back.parity, xor.parity)


def test_xcnf_rejects_bad_parity():
    with pytest.raises(ParseError):
        parse_xcnf("p xcnf 3 1\nx 1 2 3 2\n")


def test_metadata_records_exact_density():
    meta = instance_metadata(generate_balanced_xorsat(9, 1.25, seed=0))
    assert meta["m_xor"] == 11 and meta["m_cnf"] == 44
    assert meta["rho_cnf_exact"] == "44/9"


def test_parse_assignment_formats():
    assert parse_assignment("1 0 0\n", 3).tolist() == [True, False, False]
    assert parse_assignment("v 1 -2\nv -3 0\n", 3).tolist() == [True, False, False]


@pytest.mark.parametrize("text", ["1 0 2\n", "v 1 -2 0\n", "1 0\nv 3\n", "v 1 -1 2 3 0\n"])
def test_parse_assignment_rejects(text):
    with pytest.raises(ParseError):
        parse_assignment(text, 3)


# ---------------------------------------------------------------- key=value files

def test_kv_round_trip():
    items = {"a": 1, "b": 0.25, "c": None, "d": (250, 500), "e": True, "f": "dmm"}
    parsed = parse_kv(format_kv(items))
    back = {k: coerce(k, parsed[k], items[k]) for k in items}
    assert back == items


def test_kv_errors():
    with pytest.raises(ParseError):
        parse_kv("a = 1\na = 2\n")
    with pytest.raises(ParseError):
        parse_kv("just words\n")
    with pytest.raises(ValueError):
        coerce("n", "abc", 3)
