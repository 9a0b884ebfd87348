"""CNF formulas, balanced 3-XORSAT instances and the delta-Max-E3SAT family.

A :class:`CnfFormula` stores its clauses as flat numpy arrays (signed DIMACS
literals plus clause offsets) so that the solvers can hand them straight to
compiled kernels. The per-clause object view (:class:`CnfClause` of
:class:`Literal`) is built lazily for the rare callers that want it.

The hard family is built in two stages::

    xor = generate_balanced_xorsat(1000, 1.25, seed=7)   # 1250 XOR equations
    f = expand_instance(xor)                               # 5000 CNF clauses

Each variable of ``xor`` occurs 3 or 4 times, so every variable of ``f`` sits
in 12 or 16 clauses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import InfeasibleBalance, LengthMismatch, TooLarge
from .rng import STREAM_GENERATOR, make_rng

GENERATOR_VERSION = "balanced-xorsat/1"
MAX_BRUTE_FORCE_VARS = 24
REPAIR_CAP = 10**6


class Literal(NamedTuple):
    var: int
    negated: bool

    @classmethod
    def from_int(cls, lit):
        return cls(abs(int(lit)), int(lit) < 0)

    def to_int(self):
        return -self.var if self.negated else self.var

    def __str__(self):
        return ("¬x" if self.negated else "x") + str(self.var)


class CnfClause(NamedTuple):
    literals: tuple

    def __str__(self):
        return "(" + " ∨ ".join(str(lit) for lit in self.literals) + ")"


def _as_int_clause(clause):
    if isinstance(clause, CnfClause):
        clause = clause.literals
    return [lit.to_int() if isinstance(lit, Literal) else int(lit) for lit in clause]


class CnfFormula:
    """Immutable CNF formula over variables ``1..n_vars``.

    Parameters
    ----------
    n_vars : int
        Number of variables N.
    clauses : iterable
        Each clause is a sequence of signed DIMACS integers, of
        :class:`Literal`, or a :class:`CnfClause`.
    comments : sequence of str, optional
        Free-form metadata (e.g. DIMACS ``c`` lines). Ignored by equality.
    """

    __slots__ = ("n_vars", "lits", "ptr", "comments", "_cache")

    def __init__(self, n_vars: int, clauses: Iterable, comments: Sequence[str] = ()):
        n_vars = int(n_vars)
        if n_vars < 0:
            raise ValueError("n_vars must be non-negative")
        flat, ptr = [], [0]
        for c in clauses:
            ints = _as_int_clause(c)
            flat.extend(ints)
            ptr.append(len(flat))
        self._init_arrays(n_vars, np.asarray(flat, dtype=np.int32), np.asarray(ptr, dtype=np.int64), comments)

    @classmethod
    def from_arrays(cls, n_vars, lits, ptr, comments=()):
        """Build from a flat signed-literal array and clause offsets (validated)."""
        obj = cls.__new__(cls)
        obj._init_arrays(int(n_vars), np.asarray(lits, dtype=np.int32), np.asarray(ptr, dtype=np.int64), comments)
        return obj

    def _init_arrays(self, n_vars, lits, ptr, comments):
        if ptr.ndim != 1 or ptr.size < 1 or ptr[0] != 0 or ptr[-1] != lits.size:
            raise ValueError("clause offsets are inconsistent with the literal array")
        widths = np.diff(ptr)
        if np.any(widths < 1):
            bad = int(np.flatnonzero(widths < 1)[0])
            raise ValueError(f"clause {bad} is empty")
        var = np.abs(lits)
        if lits.size and (var.min() < 1 or var.max() > n_vars):
            bad = int(np.flatnonzero((var < 1) | (var > n_vars))[0])
            raise ValueError(f"literal {int(lits[bad])} outside variables 1..{n_vars}")
        _check_distinct_vars(var, ptr)
        lits.setflags(write=False)
        ptr.setflags(write=False)
        self.n_vars = n_vars
        self.lits = lits
        self.ptr = ptr
        self.comments = tuple(comments)
        self._cache = {}

    @property
    def n_clauses(self) -> int:
        return self.ptr.size - 1

    @property
    def n_literals(self) -> int:
        return int(self.lits.size)

    @property
    def density(self) -> float:
        """Clause density rho = M/N."""
        return self.n_clauses / self.n_vars

    @property
    def widths(self):
        return np.diff(self.ptr)

    @property
    def var_index(self):
        """0-based variable index of every literal, clause-major."""
        if "var_index" not in self._cache:
            a = (np.abs(self.lits) - 1).astype(np.int32)
            a.setflags(write=False)
            self._cache["var_index"] = a
        return self._cache["var_index"]

    @property
    def sign(self):
        """+1 for a positive literal, -1 for a negated one (float64, clause-major)."""
        if "sign" not in self._cache:
            s = np.where(self.lits > 0, 1.0, -1.0)
            s.setflags(write=False)
            self._cache["sign"] = s
        return self._cache["sign"]

    @property
    def clause_of_literal(self):
        if "clause_of" not in self._cache:
            a = np.repeat(np.arange(self.n_clauses, dtype=np.int32), self.widths)
            a.setflags(write=False)
            self._cache["clause_of"] = a
        return self._cache["clause_of"]

    def occurrence_index(self):
        """Variable-to-clause incidence in CSR form.

        Returns ``(occ_ptr, occ_clause, occ_negated)``: occurrences of the
        0-based variable ``i`` are ``occ_clause[occ_ptr[i]:occ_ptr[i+1]]`` in
        increasing clause order.
        """
        if "occ" not in self._cache:
            vi = self.var_index
            order = np.argsort(vi, kind="stable")
            counts = np.bincount(vi, minlength=self.n_vars)
            occ_ptr = np.concatenate(([0], np.cumsum(counts))).astype(np.int64)
            occ_clause = self.clause_of_literal[order]
            occ_neg = self.lits[order] < 0
            for a in (occ_ptr, occ_clause, occ_neg):
                a.setflags(write=False)
            self._cache["occ"] = (occ_ptr, occ_clause, occ_neg)
        return self._cache["occ"]

    def occurrences(self, var: int):
        """List of ``(clause id, negated)`` for the 1-based variable ``var``."""
        occ_ptr, occ_clause, occ_neg = self.occurrence_index()
        lo, hi = occ_ptr[var - 1], occ_ptr[var]
        return [(int(c), bool(n)) for c, n in zip(occ_clause[lo:hi], occ_neg[lo:hi])]

    def occurrence_counts(self):
        """Number of clauses each variable occurs in (length N)."""
        return np.diff(self.occurrence_index()[0])

    def clause(self, m: int) -> CnfClause:
        seg = self.lits[self.ptr[m]:self.ptr[m + 1]]
        return CnfClause(tuple(Literal.from_int(x) for x in seg))

    @property
    def clauses(self):
        if "clauses" not in self._cache:
            self._cache["clauses"] = tuple(self.clause(m) for m in range(self.n_clauses))
        return self._cache["clauses"]

    def int_clauses(self):
        """Clauses as lists of signed DIMACS integers."""
        return [self.lits[self.ptr[m]:self.ptr[m + 1]].tolist() for m in range(self.n_clauses)]

    def __len__(self):
        return self.n_clauses

    def __eq__(self, other):
        if not isinstance(other, CnfFormula):
            return NotImplemented
        return (
            self.n_vars == other.n_vars
            and np.array_equal(self.ptr, other.ptr)
            and np.array_equal(self.lits, other.lits)
        )

    def __hash__(self):
        return hash((self.n_vars, self.ptr.tobytes(), self.lits.tobytes()))

    def __repr__(self):
        return f"CnfFormula(n_vars={self.n_vars}, n_clauses={self.n_clauses})"


def _check_distinct_vars(var, ptr):
    widths = np.diff(ptr)
    if widths.size == 0 or widths.max() < 2:
        return
    if np.all(widths == 3):
        t = var.reshape(-1, 3)
        dup = (t[:, 0] == t[:, 1]) | (t[:, 0] == t[:, 2]) | (t[:, 1] == t[:, 2])
        if dup.any():
            raise ValueError(f"clause {int(np.flatnonzero(dup)[0])} repeats a variable")
        return
    for m in range(widths.size):
        seg = var[ptr[m]:ptr[m + 1]]
        if np.unique(seg).size != seg.size:
            raise ValueError(f"clause {m} repeats a variable")


class XorClause(NamedTuple):
    """Parity equation ``x_a ⊕ x_b ⊕ x_c = parity`` over 1-based variables."""

    vars: tuple
    parity: bool


@dataclass(frozen=True, eq=False)
class XorInstance:
    """Balanced 3-XORSAT system.

    ``triples`` is an ``(M, 3)`` array of 1-based variable indices and
    ``parity`` the right-hand sides (0/1).
    """

    n_vars: int
    triples: np.ndarray
    parity: np.ndarray
    seed: int | None = None
    rho_xor: float | None = None
    generator_version: str = field(default=GENERATOR_VERSION)

    def __post_init__(self):
        t = np.asarray(self.triples, dtype=np.int32).reshape(-1, 3)
        p = np.asarray(self.parity, dtype=np.uint8).reshape(-1)
        if t.shape[0] != p.shape[0]:
            raise ValueError("triples and parity lengths differ")
        if t.size and (t.min() < 1 or t.max() > self.n_vars):
            raise ValueError(f"variable index outside 1..{self.n_vars}")
        if np.any((t[:, 0] == t[:, 1]) | (t[:, 0] == t[:, 2]) | (t[:, 1] == t[:, 2])):
            raise ValueError("XOR clause with repeated variable")
        if np.any(p > 1):
            raise ValueError("parity bits must be 0 or 1")
        t.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "triples", t)
        object.__setattr__(self, "parity", p)

    @property
    def n_clauses(self) -> int:
        return self.triples.shape[0]

    @property
    def clauses(self):
        return [XorClause(tuple(int(v) for v in t), bool(p)) for t, p in zip(self.triples, self.parity)]

    def occurrence_counts(self):
        return np.bincount(self.triples.ravel() - 1, minlength=self.n_vars)

    def violated(self, bits):
        """Boolean mask of equations violated by ``bits`` (length N)."""
        b = _as_bits(bits, self.n_vars).astype(np.uint8)
        return (b[self.triples - 1].sum(axis=1) & 1) != self.parity

    def __eq__(self, other):
        if not isinstance(other, XorInstance):
            return NotImplemented
        return (
            self.n_vars == other.n_vars
            and np.array_equal(self.triples, other.triples)
            and np.array_equal(self.parity, other.parity)
        )

    def __hash__(self):
        return hash((self.n_vars, self.triples.tobytes(), self.parity.tobytes()))


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def occurrence_mix(n: int, rho_xor: float):
    """Return ``(m_xor, n_three, n_four)`` for the balanced family.

    Solves ``a + b = n`` and ``3a + 4b = 3 m_xor`` with ``m_xor`` rounded
    half-up from ``rho_xor * n``.
    """
    m_xor = round_half_up(rho_xor * n)
    slots = 3 * m_xor
    n_four = slots - 3 * n
    n_three = n - n_four
    if n_four < 0 or n_three < 0:
        raise InfeasibleBalance(n, rho_xor, f"{slots} slots cannot be split into 3s and 4s over {n} variables")
    return m_xor, n_three, n_four


def generate_balanced_xorsat(n: int, rho_xor: float = 1.25, seed: int = 0) -> XorInstance:
    """Random 3-XORSAT instance where every variable occurs 3 or 4 times.

    Randomness is drawn in a fixed order from the generator stream of
    ``seed``: which variables get 4 occurrences, the slot shuffle, the
    duplicate repair swaps, then the parity bits.

    Raises
    ------
    InfeasibleBalance
        If ``round(rho_xor * n) * 3`` slots cannot be split into per-variable
        occurrences of 3 or 4, or duplicate repair does not converge.
    """
    if n < 8:
        raise ValueError(f"n must be at least 8, got {n}")
    if not rho_xor > 0:
        raise ValueError(f"rho_xor must be positive, got {rho_xor}")
    if 3 * rho_xor > 4:
        raise InfeasibleBalance(n, rho_xor, "3*rho_xor exceeds 4")
    m_xor, _, n_four = occurrence_mix(n, rho_xor)
    rng = make_rng(seed, STREAM_GENERATOR)

    counts = np.full(n, 3, dtype=np.int64)
    counts[rng.permutation(n)[:n_four]] = 4
    slots = np.repeat(np.arange(1, n + 1, dtype=np.int32), counts)
    rng.shuffle(slots)
    triples = slots.reshape(m_xor, 3)
    _repair_duplicates(triples, rng, n, rho_xor)
    parity = rng.integers(0, 2, size=m_xor, dtype=np.uint8)
    return XorInstance(n, triples, parity, seed=int(seed), rho_xor=float(rho_xor))


def _has_dup(t):
    return t[0] == t[1] or t[0] == t[2] or t[1] == t[2]


def _repair_duplicates(triples, rng, n, rho_xor):
    m = triples.shape[0]
    t = triples
    dup = (t[:, 0] == t[:, 1]) | (t[:, 0] == t[:, 2]) | (t[:, 1] == t[:, 2])
    bad = set(np.flatnonzero(dup).tolist())
    attempts = 0
    while bad:
        c = min(bad)
        row = t[c]
        k = 1 if row[1] == row[0] else 2
        while True:
            attempts += 1
            if attempts > REPAIR_CAP:
                raise InfeasibleBalance(n, rho_xor, f"duplicate repair exceeded {REPAIR_CAP} swaps")
            r = int(rng.integers(0, 3 * m))
            d, j = divmod(r, 3)
            if d == c:
                continue
            a, b = int(t[c, k]), int(t[d, j])
            others_c = [int(t[c, i]) for i in range(3) if i != k]
            others_d = [int(t[d, i]) for i in range(3) if i != j]
            if b in others_c or a in others_d:
                continue
            t[c, k], t[d, j] = b, a
            break
        for x in (c, d):
            if _has_dup(t[x]):
                bad.add(x)
            else:
                bad.discard(x)


def plant_parities(xor: XorInstance, bits) -> XorInstance:
    """Copy of ``xor`` whose parities are satisfied by the assignment ``bits``."""
    b = _as_bits(bits, xor.n_vars).astype(np.uint8)
    parity = b[xor.triples - 1].sum(axis=1) & 1
    return XorInstance(xor.n_vars, xor.triples, parity, seed=xor.seed, rho_xor=xor.rho_xor,
                       generator_version=xor.generator_version)


# Violating rows of x_a ⊕ x_b ⊕ x_c, in lexicographic order; row r is excluded
# by the clause whose literal i is negated exactly when r[i] = 1.
_VIOLATING = {
    1: np.array([[0, 0, 0], [0, 1, 1], [1, 0, 1], [1, 1, 0]], dtype=bool),
    0: np.array([[0, 0, 1], [0, 1, 0], [1, 0, 0], [1, 1, 1]], dtype=bool),
}


def xor_to_cnf(clause: XorClause):
    """The 4 three-literal clauses equivalent to one parity equation."""
    vars_ = [int(v) for v in clause.vars]
    rows = _VIOLATING[int(bool(clause.parity))]
    return [CnfClause(tuple(Literal(v, bool(neg)) for v, neg in zip(vars_, row))) for row in rows]


def expand_instance(xor: XorInstance, comments: Sequence[str] = ()) -> CnfFormula:
    """Replace every XOR equation by its 4 CNF clauses, contiguously and in order."""
    m = xor.n_clauses
    patterns = np.where(xor.parity[:, None, None] == 1, _VIOLATING[1][None], _VIOLATING[0][None])
    v = np.broadcast_to(xor.triples[:, None, :], (m, 4, 3))
    lits = np.where(patterns, -v, v).astype(np.int32).ravel()
    ptr = np.arange(0, 12 * m + 1, 3, dtype=np.int64)
    return CnfFormula.from_arrays(xor.n_vars, lits, ptr, comments)


def delta_instance(n: int, seed: int = 0, rho_xor: float = 1.25) -> CnfFormula:
    """Shortcut for ``expand_instance(generate_balanced_xorsat(n, rho_xor, seed))``."""
    return expand_instance(generate_balanced_xorsat(n, rho_xor, seed))


def random_ksat(n: int, m: int, k: int = 3, seed: int = 0) -> CnfFormula:
    """Uniform random k-SAT: each clause has k distinct variables and random signs.

    A sanity-test helper only.
    """
    if k > n:
        raise ValueError("k cannot exceed n")
    rng = make_rng(seed, STREAM_GENERATOR)
    var = np.empty((m, k), dtype=np.int32)
    for i in range(m):
        var[i] = rng.choice(n, size=k, replace=False) + 1
    neg = rng.integers(0, 2, size=(m, k)).astype(bool)
    lits = np.where(neg, -var, var).ravel()
    return CnfFormula.from_arrays(n, lits, np.arange(0, k * m + 1, k))


def _as_bits(bits, n):
    b = np.asarray(bits)
    if b.ndim != 1 or b.shape[0] != n:
        raise LengthMismatch(f"assignment has length {b.shape[0] if b.ndim else 0}, formula has {n} variables")
    return b.astype(bool)


def clause_satisfied(f: CnfFormula, bits):
    """Boolean mask over clauses: does ``bits`` satisfy clause m?"""
    b = _as_bits(bits, f.n_vars)
    lit_true = b[f.var_index] != (f.lits < 0)
    return np.logical_or.reduceat(lit_true, f.ptr[:-1]) if f.n_clauses else np.zeros(0, bool)


def count_unsat(f: CnfFormula, bits) -> int:
    """Number of clauses with no true literal under ``bits``.

    Raises
    ------
    LengthMismatch
        If ``len(bits) != f.n_vars``.
    """
    return int(f.n_clauses - np.count_nonzero(clause_satisfied(f, bits)))


def brute_force_max_sat(f: CnfFormula, chunk_bits: int = 16):
    """Exact Max-SAT optimum by scanning all ``2**N`` assignments.

    Assignments are visited in lexicographic order of ``(x1, ..., xN)`` with
    x1 most significant, and the first one reaching the minimum is returned.

    Returns
    -------
    (int, ndarray of bool)
        Minimum unsatisfied-clause count and a witness assignment.
    """
    n = f.n_vars
    if n > MAX_BRUTE_FORCE_VARS:
        raise TooLarge(f"brute force limited to {MAX_BRUTE_FORCE_VARS} variables, got {n}")
    total = 1 << n
    step = min(total, 1 << chunk_bits)
    shifts = np.arange(n - 1, -1, -1, dtype=np.uint32)
    best, best_k = None, 0
    clauses = [(f.var_index[f.ptr[m]:f.ptr[m + 1]], f.lits[f.ptr[m]:f.ptr[m + 1]] < 0) for m in range(f.n_clauses)]
    for start in range(0, total, step):
        k = np.arange(start, start + step, dtype=np.uint32)
        bits = ((k[:, None] >> shifts[None, :]) & 1).astype(bool)
        unsat = np.zeros(step, dtype=np.int32)
        for vi, neg in clauses:
            # a clause is falsified when every literal is false, i.e. bit == negated
            unsat += np.all(bits[:, vi] == neg[None, :], axis=1)
        i = int(np.argmin(unsat))
        if best is None or unsat[i] < best:
            best, best_k = int(unsat[i]), start + i
    witness = np.array([(best_k >> int(s)) & 1 for s in shifts], dtype=bool)
    return best, witness
