import itertools
from fractions import Fraction

import numpy as np
import pytest

from cckrein.config_model import validate_axioms
from cckrein.generators import (
    GQError,
    IncidenceStructure,
    gen_cyclic_scheme,
    gen_gq_dualgrid,
    gen_gq_grid,
    gen_gq_w2,
    gen_hamming_2_2,
    gq_closed_form,
    gq_feasibility,
    gq_feasibility_sweep,
    gq_to_configuration,
    sigma,
    tau,
    tau_squared,
    triple_label,
    validate_gq,
)
from cckrein.config_model import row_degrees


def lines_sizes(inc):
    M = inc.incidence_matrix()
    return set(M.sum(axis=0)), set(M.sum(axis=1))


def test_grid_counts():
    inc = gen_gq_grid(2)
    assert (inc.num_points, inc.num_lines) == (9, 6)
    per_line, per_point = lines_sizes(inc)
    assert per_line == {3} and per_point == {2}


def test_square():
    inc = gen_gq_grid(1)
    assert (inc.num_points, inc.num_lines) == (4, 4)
    assert validate_gq(inc) == (1, 1)


def test_w2_counts():
    inc = gen_gq_w2()
    assert (inc.num_points, inc.num_lines) == (15, 15)
    assert lines_sizes(inc) == ({3}, {3})
    M = inc.incidence_matrix()
    collinear = (M @ M.T > 0).astype(int) - np.eye(15, dtype=int)
    assert set(collinear.sum(axis=1)) == {6}


@pytest.mark.parametrize("make, st", [
    (gen_gq_w2, (2, 2)),
    (lambda: gen_gq_grid(2), (2, 1)),
    (lambda: gen_gq_grid(3), (3, 1)),
    (lambda: gen_gq_dualgrid(2), (1, 2)),
])
def test_validate_gq(make, st):
    assert validate_gq(make()) == st


def test_every_antiflag_has_unique_connection():
    inc = gen_gq_grid(2)
    M = inc.incidence_matrix()
    for p, L in itertools.product(range(inc.num_points), range(inc.num_lines)):
        if M[p, L]:
            continue
        paths = [(q, m) for q in range(inc.num_points) for m in range(inc.num_lines)
                 if M[q, L] and M[q, m] and M[p, m]]
        assert len(paths) == 1


def test_complete_bipartite_rejected():
    flags = frozenset((p, L) for p in range(3) for L in range(3))
    with pytest.raises(GQError):
        validate_gq(IncidenceStructure(3, 3, flags))


def test_triangle_rejected():
    # three points, three lines, a triangle: anti-flags have no connecting path
    flags = frozenset({(0, 0), (1, 0), (1, 1), (2, 1), (2, 2), (0, 2)})
    with pytest.raises(GQError):
        validate_gq(IncidenceStructure(3, 3, flags))


def test_irregular_rejected():
    flags = frozenset({(0, 0), (1, 0), (2, 0), (0, 1), (1, 1)})
    with pytest.raises(GQError):
        validate_gq(IncidenceStructure(3, 2, flags))


@pytest.mark.parametrize("make, sizes", [
    (gen_gq_w2, (15, 15)),
    (lambda: gen_gq_grid(2), (9, 6)),
    (lambda: gen_gq_grid(1), (4, 4)),
    (lambda: gen_gq_dualgrid(2), (6, 9)),
])
def test_gq_configuration(make, sizes):
    cc = gq_to_configuration(make())
    assert cc.rank == 10 and cc.fiber_sizes == sizes
    assert validate_axioms(cc).ok


def test_small_schemes():
    c5 = gen_cyclic_scheme(5)
    assert c5.rank == 3 and validate_axioms(c5).fiber_commutative
    assert gen_cyclic_scheme(3).rank == 2
    h = gen_hamming_2_2()
    assert h.rank == 3 and list(row_degrees(h)) == [1, 2, 1]
    with pytest.raises(ValueError):
        gen_cyclic_scheme(2)


def test_triple_label():
    assert triple_label(2, 2, 2) == "Q_{3,3}^3"
    assert triple_label(0, 1, 3) == "Q_{1,2}^4"


def test_sigma_tau():
    assert sigma(2, 2) == 78
    assert tau(2, 2) == pytest.approx(72)
    assert tau_squared(2, 2) == 72 ** 2
    assert tau(Fraction(1, 2), 1) < 0


def test_closed_form_2_2():
    cf = gq_closed_form(2, 2)
    assert cf.entries[(2, 2, 2)].scalar == Fraction(10, 16)
    assert cf.entries[(3, 3, 3)].scalar == Fraction(10, 16)
    assert np.allclose(cf.matrix(1, 1, 0), 9 * np.ones((2, 2)))
    assert cf.entries[(2, 2, 0)].scalar == 5
    assert np.allclose(cf.matrix(1, 1, 1), np.array([[78, 72], [72, 78]]) / 16)
    assert cf.multiplicities == (1, 9, 5, 5)


def test_closed_form_boundaries():
    assert gq_closed_form(2, 1).entries[(3, 3, 3)].scalar == 0
    assert gq_closed_form(2, 5).entries[(2, 2, 2)].scalar == Fraction(-11, 49)


def test_closed_form_duality():
    a, b = gq_closed_form(2, 3), gq_closed_form(3, 2)
    swap = {0: 0, 1: 1, 2: 3, 3: 2}
    for (s, t, u), e in a.entries.items():
        other = b.matrix(swap[s], swap[t], swap[u])
        if len(e.support) == 2:
            other = other[::-1, ::-1]
        assert np.allclose(e.matrix, other)


def test_closed_form_rejects_small():
    with pytest.raises(ValueError):
        gq_closed_form(0, 2)


def test_feasibility_examples():
    v = gq_feasibility(2, 5)
    assert v.verdict == "infeasible" and v.witness == (2, 2, 2)
    assert v.witness_value == Fraction(-11, 49)
    assert v.message() == "infeasible: Q_{3,3}^3 = -11/49 < 0"
    v = gq_feasibility(2, 4)
    assert v.verdict == "boundary" and v.witness == (2, 2, 2)
    assert gq_feasibility(3, 3).verdict == "feasible"
    assert gq_feasibility(2, 1).witness == (3, 3, 3)


def test_feasibility_sweep_small():
    sweep = gq_feasibility_sweep(range(2, 7), range(2, 7))
    bad = {k for k, v in sweep.items() if v.verdict == "infeasible"}
    assert bad == {(2, 5), (2, 6), (5, 2), (6, 2)}
    assert all(v.other_entries_nonnegative for v in sweep.values())
