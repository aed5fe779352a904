"""
Gauge freedom of matrix units
=============================

Matrix units of an ideal are only fixed up to z_i^* z_j phases.  Changing
them moves the Krein matrices by an entrywise rank-one pattern, which leaves
eigenvalue signs and ranks alone.
"""

import numpy as np

from cckrein import decompose, krein_all, regauge
from cckrein.generators import gen_gq_w2, gq_to_configuration
from cckrein.linalg import eigvalsh

np.set_printoptions(precision=4, suppress=True)

basis = decompose(gq_to_configuration(gen_gq_w2()))
table = krein_all(basis)

z = np.exp(1j * np.array([0.0, 2.1]))
gauged = krein_all(regauge(basis, 1, z, keep_conjugation=False))

for key in [(1, 1, 0), (1, 1, 1), (1, 2, 1)]:
    print(key, "\nbefore\n", table[key], "\nafter\n", gauged[key])
    print("eigenvalues", eigvalsh(table[key]), "->", eigvalsh(gauged[key]))
