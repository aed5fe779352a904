from dataclasses import replace

import numpy as np
import pytest

from cckrein import linalg
from cckrein.decomposition import regauge
from cckrein.generators import gq_closed_form
from cckrein.krein import (
    ClosureError,
    absolute_bound,
    analyze,
    general_krein_check,
    krein_all,
    krein_condition,
    krein_matrix,
    structural_checks,
)

from .conftest import GENERATED, pipeline
from .oracles import (
    classical_krein,
    cyclic_projectors,
    directed_cycle_projectors,
    hamming_2_2_projectors,
    match_ideals,
)

ORACLES = {
    "cyclic-5": lambda: cyclic_projectors(5),
    "cyclic-6": lambda: cyclic_projectors(6),
    "cyclic-3": lambda: cyclic_projectors(3),
    "hamming-2-2": hamming_2_2_projectors,
    "directed-3": lambda: directed_cycle_projectors(3),
    "directed-5": lambda: directed_cycle_projectors(5),
}


def random_psd(rng, k):
    r = rng.integers(0, k + 1)
    X = rng.standard_normal((k, r)) + 1j * rng.standard_normal((k, r))
    return X @ X.conj().T


@pytest.mark.parametrize("name", sorted(ORACLES))
def test_matches_classical_krein_parameters(name):
    _, basis, table = pipeline(name)
    projectors = ORACLES[name]()
    q = classical_krein(projectors)
    m = match_ideals(basis, projectors)
    for (s, t, u), e in table.entries.items():
        assert e.matrix.shape == (1, 1)
        assert abs(e.matrix[0, 0] - q[m[s], m[t], m[u]]) < 1e-9


def test_gq_values(w2):
    table = w2[2]
    assert table[(2, 2, 2)][0, 0] == pytest.approx(0.625, abs=1e-8)
    assert table[(3, 3, 3)][0, 0] == pytest.approx(0.625, abs=1e-8)
    assert np.allclose(table[(1, 1, 0)], 9 * np.ones((2, 2)), atol=1e-8)
    assert table[(2, 2, 0)][0, 0] == pytest.approx(5, abs=1e-8)


@pytest.mark.parametrize("name, st", [("gq-w2", (2, 2)), ("gq-grid-2", (2, 1)),
                                      ("gq-grid-1", (1, 1)), ("gq-dualgrid-2", (1, 2))])
def test_gq_matches_closed_form(name, st):
    table = pipeline(name)[2]
    cf = gq_closed_form(*st)
    assert set(table.entries) == set(cf.entries)
    for key, e in cf.entries.items():
        Q = table[key]
        assert np.allclose(np.diag(Q), np.diag(e.matrix), atol=1e-8)
        assert np.allclose(np.abs(Q), np.abs(e.matrix), atol=1e-8)
        assert np.allclose(np.linalg.eigvalsh(Q), np.linalg.eigvalsh(e.matrix), atol=1e-8)


def test_single_matrix_agrees_with_table(w2):
    _, basis, table = w2
    for key in [(1, 1, 1), (1, 2, 1), (3, 3, 3)]:
        assert np.allclose(krein_matrix(basis, *key).matrix, table[key], atol=1e-14)


def test_disjoint_supports(w2):
    with pytest.raises(ValueError):
        krein_matrix(w2[1], 2, 3, 0)
    assert (2, 3, 0) not in w2[2]


def test_parallel_table_identical(w2):
    basis, table = w2[1], w2[2]
    par = krein_all(basis, jobs=4)
    assert set(par.entries) == set(table.entries)
    for key in table:
        assert np.array_equal(par[key], table[key])


@pytest.mark.parametrize("name", sorted(GENERATED))
def test_structural_identities(name):
    _, basis, table = pipeline(name)
    checks = structural_checks(table, basis)
    for label, (resid, ok) in checks.items():
        assert ok and resid <= 1e-8, label


@pytest.mark.parametrize("name", sorted(GENERATED))
def test_krein_condition_holds(name):
    table = pipeline(name)[2]
    assert all(v.passed for v in krein_condition(table).values())


def test_closure_residuals(w2):
    assert w2[2].max_closure_residual <= 1e-9


def test_grid_boundary(grid2):
    _, basis, table = grid2
    assert abs(table[(3, 3, 3)][0, 0]) < 1e-8
    verdict = krein_condition(table)[(3, 3, 3)]
    assert verdict.passed
    assert (3, 3, 3) in analyze(table).boundary


def test_gq_w2_has_no_boundary(w2):
    report = analyze(w2[2])
    assert report.ok and report.boundary == []


def test_absolute_bound_examples(w2):
    bounds = absolute_bound(w2[2], w2[1].multiplicities)
    b = bounds[(2, 2)]
    assert (b.lhs, b.rhs) == (15, 15) and b.tight
    b = bounds[(1, 1)]
    assert (b.lhs, b.rhs) == (29, 45) and b.passed and not b.tight
    b = bounds[(0, 0)]
    assert (b.lhs, b.rhs) == (1, 1) and b.tight
    assert all(b.passed for b in bounds.values())


@pytest.mark.parametrize("name", sorted(GENERATED))
def test_absolute_bound_all_generators(name):
    _, basis, table = pipeline(name)
    assert all(b.passed for b in absolute_bound(table, basis.multiplicities).values())


def test_general_check_all_ones(w2):
    _, basis, table = w2
    verdicts = krein_condition(table)
    for (s, t, u), e in table.entries.items():
        B = np.ones((basis.ideals[s].degree,) * 2)
        C = np.ones((basis.ideals[t].degree,) * 2)
        Qt, ok = general_krein_check(table, basis, s, t, u, B, C)
        if e.support == basis.ideals[u].support:
            assert np.allclose(Qt, e.matrix)
        assert ok == verdicts[(s, t, u)].passed


def test_general_check_padding(w2):
    _, basis, table = w2
    # F_{2,2,1} = {0} inside F_1 = {0, 1}
    Qt, ok = general_krein_check(table, basis, 2, 2, 1, np.ones((1, 1)), np.ones((1, 1)))
    assert Qt.shape == (2, 2)
    assert Qt[1, 1] == 0 and Qt[0, 1] == 0
    assert Qt[0, 0] == pytest.approx(table[(2, 2, 1)][0, 0])
    assert ok


def test_general_check_zero_weight(w2):
    _, basis, table = w2
    Qt, ok = general_krein_check(table, basis, 1, 1, 1, np.zeros((2, 2)), np.eye(2))
    assert not np.any(Qt) and ok


def test_general_check_rejects_indefinite_weight(w2):
    _, basis, table = w2
    with pytest.raises(ValueError):
        general_krein_check(table, basis, 1, 1, 1, np.array([[1, 2], [2, 1]]), np.eye(2))
    with pytest.raises(ValueError):
        general_krein_check(table, basis, 1, 1, 1, np.eye(3), np.eye(2))


def test_general_check_random_weights(w2):
    _, basis, table = w2
    rng = np.random.default_rng(11)
    for (s, t, u) in table.entries:
        B = random_psd(rng, basis.ideals[s].degree)
        C = random_psd(rng, basis.ideals[t].degree)
        assert general_krein_check(table, basis, s, t, u, B, C)[1]


def test_gauge_covariance(w2):
    _, basis, table = w2
    z = np.exp(1j * np.array([0.4, -1.3]))
    gauged = krein_all(regauge(basis, 1, z, keep_conjugation=False))
    Z = np.outer(np.conj(z), z)
    assert np.allclose(gauged[(1, 1, 0)], Z * Z * table[(1, 1, 0)], atol=1e-10)
    assert np.allclose(gauged[(1, 0, 1)], table[(1, 0, 1)], atol=1e-10)
    assert np.allclose(gauged[(0, 0, 1)], np.conj(Z) * table[(0, 0, 1)], atol=1e-10)


def test_gauge_invariance_of_verdicts(w2):
    _, basis, table = w2
    base_psd = krein_condition(table)
    base_rank = {k: linalg.numeric_rank(Q, atol=1e-8) for k, Q in
                 ((k, table[k]) for k in table)}
    rng = np.random.default_rng(2)
    for _ in range(20):
        z = np.exp(2j * np.pi * rng.random(2))
        keep = bool(rng.integers(2))
        t2 = krein_all(regauge(basis, 1, z, keep_conjugation=keep))
        for k, v in krein_condition(t2).items():
            assert v.passed == base_psd[k].passed
            assert np.sign(round(v.min_eigenvalue, 8)) == np.sign(round(base_psd[k].min_eigenvalue, 8))
            assert linalg.numeric_rank(t2[k], atol=1e-8) == base_rank[k]
        if keep:
            # the principal-target identity relies on conjugate pairing
            checks = structural_checks(t2, t2.basis)
            assert all(ok for _, ok in checks.values())


def test_closure_error_on_broken_basis():
    _, basis, _ = pipeline("cyclic-5")
    rng = np.random.default_rng(0)
    X = rng.standard_normal((5, 2))
    Qr, _ = np.linalg.qr(X)
    P = Qr @ Qr.T
    ideals = list(basis.ideals)
    ideals[1] = replace(ideals[1], units={(0, 0): P.astype(complex)})
    broken = replace(basis, ideals=ideals)
    with pytest.raises(ClosureError):
        krein_all(broken)
    with pytest.raises(ClosureError):
        krein_matrix(broken, 1, 1, 0)


def test_feasibility_report_flags_negative(w2):
    _, basis, table = w2
    entries = dict(table.entries)
    e = entries[(2, 2, 2)]
    entries[(2, 2, 2)] = replace(e, matrix=-e.matrix)
    report = analyze(replace(table, entries=entries))
    assert not report.ok
    assert not report.psd[(2, 2, 2)].passed
