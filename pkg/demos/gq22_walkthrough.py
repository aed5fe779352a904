"""
Krein matrices of the generalized quadrangle GQ(2,2)
====================================================

Build the duad/syntheme model of GQ(2,2), view it as a coherent
configuration on points and lines, split its adjacency algebra into simple
ideals, and print every matrix of Krein parameters.
"""

import numpy as np

from cckrein import analyze, decompose, krein_all, validate_axioms
from cckrein.generators import gen_gq_w2, gq_to_configuration, triple_label

np.set_printoptions(precision=4, suppress=True)

# Points are the 15 two-subsets of a 6-set, lines the 15 ways of splitting
# it into three pairs.  The configuration has two fibers and ten colors.
cc = gq_to_configuration(gen_gq_w2())
report = validate_axioms(cc)
print("rank", report.rank, "fibers", cc.fiber_sizes, "axioms ok:", report.ok)

# Ideals come out as principal, shared by both fibers, point-only, line-only.
basis = decompose(cc)
for s, ideal in enumerate(basis.ideals):
    print(f"C_{s + 1}: support {[f + 1 for f in ideal.support]}  h = {ideal.multiplicity}")

# A unit of the point-only ideal is a combination of the three point colors.
E = basis.unit(2, 0, 0)
same, collinear, far = E[0, 0], E[cc.color[:15, :15] == 1][0], E[cc.color[:15, :15] == 2][0]
print("point-only unit coefficients:", np.round([same, collinear, far], 6).real)

# Every Krein matrix is Hermitian PSD for a genuine configuration.  Triples
# involving the principal ideal are multiples of the all-ones matrix, so only
# the others are shown.
table = krein_all(basis)
for key in sorted(table.entries):
    if 0 not in key:
        print(triple_label(*key), "\n", table[key].real)

result = analyze(table)
print("all PSD:", all(v.passed for v in result.psd.values()))
for (s, t), line in sorted(result.bounds.items()):
    mark = "tight" if line.tight else "ok"
    print(f"absolute bound ({s + 1},{t + 1}): {line.lhs} <= {line.rhs} {mark}")
