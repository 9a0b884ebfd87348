"""Text formats: DIMACS CNF, the ``xcnf`` XOR dialect and the instance sidecar.

The XOR dialect mirrors DIMACS::

    c optional comments
    p xcnf <N> <M>
    x <a> <b> <c> <parity>

with 1-based variables and parity in {0, 1}; each ``x`` line is the equation
``x_a ⊕ x_b ⊕ x_c = parity``.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import HeaderMismatch, ParseError
from .instance import CnfFormula, XorInstance


def _parse_header(parts, lineno, kind):
    if len(parts) != 4 or parts[1] != kind:
        raise ParseError(f"expected 'p {kind} <vars> <clauses>', got {' '.join(parts)!r}", lineno)
    try:
        n, m = int(parts[2]), int(parts[3])
    except ValueError:
        raise ParseError(f"non-integer header counts {parts[2]!r} {parts[3]!r}", lineno) from None
    if n < 0 or m < 0:
        raise ParseError("negative header counts", lineno)
    return n, m


def parse_dimacs(text: str) -> CnfFormula:
    """Parse DIMACS CNF text.

    Clauses may span lines and must end with ``0``. ``c`` lines are kept as
    ``CnfFormula.comments``; a line starting with ``%`` ends the body.

    Raises
    ------
    ParseError
        Malformed header, token, unterminated or empty clause, or a clause
        that repeats a variable.
    HeaderMismatch
        A literal exceeds the declared variable count, or the clause count
        differs from the header.
    """
    comments = []
    header = None
    clauses, clause_lines = [], []
    current, current_line = [], None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line[0] == "c":
            comments.append(line[1:].strip())
            continue
        if line[0] == "%":
            break
        if line[0] == "p":
            if header is not None:
                raise ParseError("duplicate header", lineno)
            n, m = _parse_header(line.split(), lineno, "cnf")
            header = (n, m, lineno)
            continue
        if header is None:
            raise ParseError("clause data before 'p cnf' header", lineno)
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError(f"bad literal {tok!r}", lineno) from None
            if lit == 0:
                if not current:
                    raise ParseError("empty clause", lineno)
                clauses.append(current)
                clause_lines.append(current_line)
                current, current_line = [], None
                continue
            if abs(lit) > header[0]:
                raise HeaderMismatch(f"variable {abs(lit)} exceeds declared count {header[0]}", lineno)
            if current_line is None:
                current_line = lineno
            current.append(lit)
    if header is None:
        raise ParseError("missing 'p cnf' header")
    if current:
        raise ParseError("last clause not terminated by 0", current_line)
    n, m, hline = header
    if len(clauses) != m:
        raise HeaderMismatch(f"header declares {m} clauses, body has {len(clauses)}", hline)
    for c, ln in zip(clauses, clause_lines):
        if len({abs(x) for x in c}) != len(c):
            raise ParseError("clause repeats a variable", ln)
    return CnfFormula(n, clauses, comments)


def emit_dimacs(f: CnfFormula, comments=()) -> str:
    """DIMACS text for ``f``; ``comments`` are written as leading ``c`` lines."""
    out = [f"c {c}" if c else "c" for c in comments]
    out.append(f"p cnf {f.n_vars} {f.n_clauses}")
    lits = f.lits.tolist()
    ptr = f.ptr.tolist()
    for m in range(f.n_clauses):
        out.append(" ".join(map(str, lits[ptr[m]:ptr[m + 1]])) + " 0")
    return "\n".join(out) + "\n"


def parse_xcnf(text: str) -> XorInstance:
    header = None
    triples, parity = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] == "c":
            continue
        parts = line.split()
        if parts[0] == "p":
            if header is not None:
                raise ParseError("duplicate header", lineno)
            header = _parse_header(parts, lineno, "xcnf")
            continue
        if header is None:
            raise ParseError("clause data before 'p xcnf' header", lineno)
        if parts[0] != "x" or len(parts) != 5:
            raise ParseError(f"expected 'x a b c p', got {line!r}", lineno)
        try:
            a, b, c, p = (int(t) for t in parts[1:])
        except ValueError:
            raise ParseError(f"non-integer field in {line!r}", lineno) from None
        if p not in (0, 1):
            raise ParseError(f"parity must be 0 or 1, got {p}", lineno)
        for v in (a, b, c):
            if not 1 <= v <= header[0]:
                raise HeaderMismatch(f"variable {v} outside 1..{header[0]}", lineno)
        if len({a, b, c}) != 3:
            raise ParseError("XOR clause repeats a variable", lineno)
        triples.append((a, b, c))
        parity.append(p)
    if header is None:
        raise ParseError("missing 'p xcnf' header")
    if len(triples) != header[1]:
        raise HeaderMismatch(f"header declares {header[1]} clauses, body has {len(triples)}")
    return XorInstance(header[0], np.asarray(triples, dtype=np.int32).reshape(-1, 3), np.asarray(parity, dtype=np.uint8))


def emit_xcnf(xor: XorInstance, comments=()) -> str:
    out = [f"c {c}" for c in comments]
    out.append(f"p xcnf {xor.n_vars} {xor.n_clauses}")
    for (a, b, c), p in zip(xor.triples.tolist(), xor.parity.tolist()):
        out.append(f"x {a} {b} {c} {p}")
    return "\n".join(out) + "\n"


def instance_metadata(xor: XorInstance) -> dict:
    m_cnf = 4 * xor.n_clauses
    return {
        "n": xor.n_vars,
        "rho_xor": xor.rho_xor,
        "seed": xor.seed,
        "generator_version": xor.generator_version,
        "m_xor": xor.n_clauses,
        "m_cnf": m_cnf,
        "rho_cnf": m_cnf / xor.n_vars,
        "rho_cnf_exact": str(Fraction(m_cnf, xor.n_vars)),
    }


def read_cnf(path) -> CnfFormula:
    return parse_dimacs(Path(path).read_text())


def write_cnf(path, f: CnfFormula, comments=()):
    Path(path).write_text(emit_dimacs(f, comments))


def write_metadata(path, xor: XorInstance):
    Path(path).write_text(json.dumps(instance_metadata(xor), indent=2, sort_keys=True) + "\n")


def parse_assignment(text: str, n_vars: int | None = None):
    """Read an assignment file.

    Accepts either 0/1 tokens (``1 0 0``) or signed literals in ``v`` lines
    (``v 1 -2 -3 0``). Raises :class:`ParseError` with a line number on bad
    tokens.
    """
    bits01, lits = [], {}
    mode = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "cs":
            continue
        toks = line.split()
        if toks[0] == "v":
            if mode == "bits":
                raise ParseError("mixed 0/1 and 'v' line formats", lineno)
            mode = "lits"
            for tok in toks[1:]:
                try:
                    x = int(tok)
                except ValueError:
                    raise ParseError(f"bad literal {tok!r}", lineno) from None
                if x == 0:
                    continue
                if abs(x) in lits:
                    raise ParseError(f"variable {abs(x)} assigned twice", lineno)
                lits[abs(x)] = x > 0
            continue
        if mode == "lits":
            raise ParseError("mixed 0/1 and 'v' line formats", lineno)
        mode = "bits"
        for tok in toks:
            if tok not in ("0", "1"):
                raise ParseError(f"expected 0 or 1, got {tok!r}", lineno)
            bits01.append(tok == "1")
    if mode == "lits":
        n = n_vars if n_vars is not None else max(lits, default=0)
        missing = [i for i in range(1, n + 1) if i not in lits]
        extra = [i for i in lits if i > n]
        if missing or extra:
            raise ParseError(f"'v' lines do not assign exactly variables 1..{n}")
        return np.array([lits[i] for i in range(1, n + 1)], dtype=bool)
    return np.array(bits01, dtype=bool)
