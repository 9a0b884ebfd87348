"""
Balanced delta-Max-E3SAT instances
==================================

A random 3-XORSAT system in which every variable appears three or four
times, expanded clause by clause into 3-CNF. Each XOR becomes the four
clauses that exclude its violating rows, so the CNF has density 5.
"""

import numpy as np

from dmmsat import brute_force_max_sat, count_unsat, expand_instance, generate_balanced_xorsat, xor_to_cnf
from dmmsat.instance import XorClause, occurrence_mix

# how many XOR clauses, and how many variables occur 3 versus 4 times
for n in (8, 9, 1000):
    m_xor, n3, n4 = occurrence_mix(n, 1.25)
    print(f"N={n:5d}  XOR clauses={m_xor:5d}  three-occurrence={n3:4d}  four-occurrence={n4:4d}")

# one XOR clause and its CNF image
for parity in (False, True):
    clauses = [[l.to_int() for l in c.literals] for c in xor_to_cnf(XorClause((1, 2, 3), parity))]
    print(f"x1 + x2 + x3 = {int(parity)}  ->", clauses)

xor = generate_balanced_xorsat(1000, 1.25, seed=7)
f = expand_instance(xor)
values, counts = np.unique(xor.occurrence_counts(), return_counts=True)
print("occurrence histogram:", dict(zip(values.tolist(), counts.tolist())))
print(f"CNF: {f.n_vars} variables, {f.n_clauses} clauses, density {f.density}")

# XOR violations and CNF violations agree for any assignment
bits = np.random.default_rng(0).integers(0, 2, 1000).astype(bool)
print("violated XORs:", int(xor.violated(bits).sum()), " unsat clauses:", count_unsat(f, bits))

# small instances can be solved exactly
small = expand_instance(generate_balanced_xorsat(16, 1.25, seed=3))
best, witness = brute_force_max_sat(small)
print(f"N=16 optimum: {best} of {small.n_clauses} clauses unsatisfied")
