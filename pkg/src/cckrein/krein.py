"""Matrices of Krein parameters, the Krein condition and the absolute bound.

For ideals ``s, t, u`` and fibers ``i, j`` in all three supports, entry
``(i, j)`` of ``Q[s, t, u]`` is the coefficient of ``eps_ij^u`` in
``sqrt(|X_i||X_j|) * eps_ij^s o eps_ij^t`` (``o`` is the entrywise product).
Units of one ideal are orthogonal with squared norm ``h_u``, so each
coefficient is a single trace inner product.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .decomposition import MatrixUnitBasis

PSD_TOL = 1e-8
RANK_TOL = 1e-8
CLOSURE_TOL = 1e-9


class ClosureError(RuntimeError):
    """An entrywise product of units does not expand in the unit basis."""


@dataclass
class KreinEntry:
    support: tuple[int, ...]
    matrix: np.ndarray
    closure_residual: float = 0.0


@dataclass
class KreinTable:
    basis: MatrixUnitBasis
    entries: dict = field(default_factory=dict)     # (s, t, u) -> KreinEntry

    def __getitem__(self, key) -> np.ndarray:
        return self.entries[key].matrix

    def __contains__(self, key) -> bool:
        return key in self.entries

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def max_closure_residual(self) -> float:
        return max((e.closure_residual for e in self.entries.values()), default=0.0)


def common_support(basis: MatrixUnitBasis, *ideals) -> tuple[int, ...]:
    sets = [set(basis.ideals[s].support) for s in ideals]
    return tuple(sorted(set.intersection(*sets)))


def _inner(A, B) -> complex:
    """``tr(B^* A)``."""
    return complex(np.vdot(B, A))


def hadamard_expansion(basis: MatrixUnitBasis, s: int, t: int, i: int, j: int):
    """Coefficients ``{u: q}`` of ``eps_ij^s o eps_ij^t`` and the closure residual.

    The residual is the Frobenius norm of what the expansion misses.
    """
    cc = basis.cc
    N = math.sqrt(cc.fiber_sizes[i] * cc.fiber_sizes[j])
    prod = basis.unit(s, i, j) * basis.unit(t, i, j)
    coeffs = {}
    rest = prod.copy()
    for u, I in enumerate(basis.ideals):
        if i in I.support and j in I.support:
            E = I.units[(i, j)]
            q = N * _inner(prod, E) / I.multiplicity
            coeffs[u] = q
            rest -= q * E / N
    return coeffs, float(np.linalg.norm(rest))


def krein_matrix(basis: MatrixUnitBasis, s: int, t: int, u: int,
                 closure_tol: float = CLOSURE_TOL) -> KreinEntry:
    """``Q[s, t, u]`` over the common support, with its closure residual.

    Raises
    ------
    ValueError
        The three supports do not meet.
    ClosureError
        The entrywise product leaves the unit span by more than ``closure_tol``.
    """
    F = common_support(basis, s, t, u)
    if not F:
        raise ValueError(f"ideals {s}, {t}, {u} have no common fiber")
    Q = np.zeros((len(F), len(F)), dtype=complex)
    worst = 0.0
    for a, i in enumerate(F):
        for b, j in enumerate(F):
            coeffs, resid = hadamard_expansion(basis, s, t, i, j)
            Q[a, b] = coeffs[u]
            worst = max(worst, resid)
    if worst > closure_tol:
        raise ClosureError(
            f"entrywise product of ideals {s}, {t} leaves the unit span "
            f"(residual {worst:.2e})"
        )
    return KreinEntry(F, Q, worst)


def krein_all(basis: MatrixUnitBasis, closure_tol: float = CLOSURE_TOL,
              jobs: int = 1) -> KreinTable:
    """Every ``Q[s, t, u]`` whose supports meet.

    Products of units in different blocks vanish identically and are never
    formed; each same-block product is expanded once and shared by all
    ``u``.
    """
    S = len(basis.ideals)
    pairs = list(itertools.product(range(S), repeat=2))

    def expand(pair):
        s, t = pair
        F = common_support(basis, s, t)
        return pair, {(i, j): hadamard_expansion(basis, s, t, i, j) for i in F for j in F}

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            expansions = dict(pool.map(expand, pairs))
    else:
        expansions = dict(map(expand, pairs))

    table = KreinTable(basis)
    for (s, t), u in itertools.product(pairs, range(S)):
        F = common_support(basis, s, t, u)
        if not F:
            continue
        exp = expansions[(s, t)]
        Q = np.array([[exp[(i, j)][0][u] for j in F] for i in F], dtype=complex)
        resid = max(exp[(i, j)][1] for i in F for j in F)
        if resid > closure_tol:
            raise ClosureError(
                f"entrywise product of ideals {s}, {t} leaves the unit span "
                f"(residual {resid:.2e})"
            )
        table.entries[(s, t, u)] = KreinEntry(F, Q, resid)
    return table


@dataclass(frozen=True)
class PSDVerdict:
    min_eigenvalue: float
    passed: bool


def krein_condition(table: KreinTable, tol: float = PSD_TOL) -> dict:
    """``{(s, t, u): PSDVerdict}``; a genuine configuration passes every triple."""
    out = {}
    for key, e in table.entries.items():
        lam = linalg.min_eigenvalue(e.matrix)
        out[key] = PSDVerdict(lam, lam >= -tol * max(1.0, linalg.spectral_scale(e.matrix)))
    return out


def general_krein_check(table: KreinTable, basis: MatrixUnitBasis, s: int, t: int, u: int,
                        B, C, tol: float = PSD_TOL):
    """The weighted Krein matrix for PSD weights ``B`` (over ``F_s``) and ``C`` (over ``F_t``).

    Only same-block coefficients survive, so the result is ``B' o C' o Q``
    on the common support (``B'``, ``C'`` principal submatrices) and zero on
    the rest of ``F_u``.

    Returns
    -------
    (np.ndarray, bool)
        The ``|F_u| x |F_u|`` matrix and whether it is PSD.
    """
    Fs, Ft, Fu = (basis.ideals[x].support for x in (s, t, u))
    B = np.asarray(B, dtype=complex)
    C = np.asarray(C, dtype=complex)
    if B.shape != (len(Fs),) * 2 or C.shape != (len(Ft),) * 2:
        raise ValueError("B and C must be indexed by the supports of s and t")
    for name, M in (("B", B), ("C", C)):
        if not linalg.psd(M, tol):
            raise ValueError(f"{name} is not positive semidefinite")
    out = np.zeros((len(Fu), len(Fu)), dtype=complex)
    key = (s, t, u)
    if key in table.entries:
        F = table.entries[key].support
        bi = [Fs.index(i) for i in F]
        ci = [Ft.index(i) for i in F]
        ui = [Fu.index(i) for i in F]
        sub = B[np.ix_(bi, bi)] * C[np.ix_(ci, ci)] * table.entries[key].matrix
        out[np.ix_(ui, ui)] = sub
    if not np.any(out):
        return out, True
    return out, linalg.psd(out, tol)


@dataclass(frozen=True)
class BoundLine:
    s: int
    t: int
    lhs: int
    rhs: int
    terms: tuple                  # (u, h_u, rank) for every u with nonempty support

    @property
    def passed(self) -> bool:
        return self.lhs <= self.rhs

    @property
    def tight(self) -> bool:
        return self.lhs == self.rhs


def absolute_bound(table: KreinTable, multiplicities, tol: float = RANK_TOL) -> dict:
    """``{(s, t): BoundLine}`` for ``s <= t``.

    ``sum_u h_u rank(Q[s, t, u])`` must not exceed ``h_s h_t`` (``s != t``) or
    ``h_s (h_s + 1) / 2`` (``s == t``).  Singular values count toward the rank
    above ``tol * max(1, sigma_max)``, so roundoff-level matrices have rank 0.
    """
    h = list(multiplicities)
    S = len(h)
    out = {}
    for s in range(S):
        for t in range(s, S):
            terms = []
            for u in range(S):
                if (s, t, u) in table.entries:
                    terms.append((u, h[u], linalg.numeric_rank(table[(s, t, u)], tol, atol=tol)))
            lhs = sum(hu * r for _, hu, r in terms)
            rhs = h[s] * h[t] if s != t else h[s] * (h[s] + 1) // 2
            out[(s, t)] = BoundLine(s, t, lhs, rhs, tuple(terms))
    return out


def structural_checks(table: KreinTable, basis: MatrixUnitBasis, tol: float = PSD_TOL) -> dict:
    """Max deviations from the identities every table must satisfy.

    * ``principal_left``: ``Q[1, s, t] = delta_st J``
    * ``principal_target``: ``Q[s, t, 1] = delta(partner(s), t) h_t J``
    * ``hermitian``: ``Q = Q^*``
    * ``symmetric``: ``Q[s, t, u] = Q[t, s, u]``
    * ``trace_independence``: ``tr(eps_jj^t)`` equal for all ``j`` in ``F_t``

    Returns ``{name: (residual, passed)}``.
    """
    p = basis.principal_index
    res = dict.fromkeys(
        ("principal_left", "principal_target", "hermitian", "symmetric", "trace_independence"), 0.0
    )
    for (s, t, u), e in table.entries.items():
        Q = e.matrix
        J = np.ones_like(Q)
        if s == p:
            res["principal_left"] = max(res["principal_left"], np.max(np.abs(Q - (t == u) * J)))
        if u == p:
            expect = basis.ideals[t].multiplicity if basis.ideals[s].partner == t else 0
            res["principal_target"] = max(res["principal_target"], np.max(np.abs(Q - expect * J)))
        res["hermitian"] = max(res["hermitian"], np.max(np.abs(Q - Q.conj().T)))
        res["symmetric"] = max(res["symmetric"], np.max(np.abs(Q - table[(t, s, u)])))
    for I in basis.ideals:
        traces = [np.trace(I.units[(j, j)]).real for j in I.support]
        res["trace_independence"] = max(res["trace_independence"], max(traces) - min(traces))
    return {k: (float(v), bool(v <= tol)) for k, v in res.items()}


@dataclass
class FeasibilityReport:
    psd: dict                     # (s, t, u) -> PSDVerdict
    bounds: dict                  # (s, t) -> BoundLine
    structural: dict              # name -> (residual, passed)
    closure_residual: float
    closure_tol: float = CLOSURE_TOL
    principal_index: int = 0

    @property
    def ok(self) -> bool:
        return (
            all(v.passed for v in self.psd.values())
            and all(b.passed for b in self.bounds.values())
            and all(ok for _, ok in self.structural.values())
            and self.closure_residual <= self.closure_tol
        )

    @property
    def boundary(self) -> list:
        """Singular PSD triples not involving the principal ideal.

        Triples with a principal index are multiples of the all-ones matrix by
        construction, so their zero eigenvalues say nothing about feasibility.
        """
        p = self.principal_index
        return [
            k for k, v in self.psd.items()
            if p not in k and v.passed and abs(v.min_eigenvalue) <= 1e-8
        ]


def analyze(table: KreinTable, psd_tol: float = PSD_TOL, rank_tol: float = RANK_TOL,
            closure_tol: float = CLOSURE_TOL) -> FeasibilityReport:
    basis = table.basis
    return FeasibilityReport(
        psd=krein_condition(table, psd_tol),
        bounds=absolute_bound(table, basis.multiplicities, rank_tol),
        structural=structural_checks(table, basis, psd_tol),
        closure_residual=table.max_closure_residual,
        closure_tol=closure_tol,
        principal_index=basis.principal_index,
    )
