"""
Cross-checking against classical Krein parameters
=================================================

For the pentagon the character projectors are known in closed form, so the
classical Krein parameters follow from expanding their entrywise products.
The generic pipeline should reproduce them.
"""

import itertools

import numpy as np

from cckrein import decompose, krein_all
from cckrein.generators import gen_cyclic_scheme

n = 5
d = np.subtract.outer(np.arange(n), np.arange(n))
E = [np.ones((n, n)) / n] + [2 * np.cos(2 * np.pi * j * d / n) / n for j in (1, 2)]
flat = np.stack([P.ravel() for P in E], axis=1)

table = krein_all(decompose(gen_cyclic_scheme(n)))
units = [I.units[(0, 0)] for I in table.basis.ideals]
match = [next(c for c, P in enumerate(E) if np.allclose(U, P)) for U in units]

worst = 0.0
for s, t in itertools.product(range(3), repeat=2):
    q, *_ = np.linalg.lstsq(flat, n * (E[match[s]] * E[match[t]]).ravel(), rcond=None)
    for u in range(3):
        worst = max(worst, abs(table[(s, t, u)][0, 0] - q[match[u]]))
print("largest deviation from the classical values:", worst)
