"""Simple-ideal decomposition and gauge-fixed matrix units.

For a fiber-commutative configuration every simple ideal meets each fiber
block in at most one dimension.  The construction is therefore:

1. primitive idempotents of each fiber algebra (joint eigenprojectors of the
   diagonal-block colors),
2. link idempotents of different fibers whenever some off-diagonal color
   connects them; each connected component is one simple ideal,
3. inside an ideal, normalize ``e_r A_M e_i`` into the off-diagonal units
   and fix phases so that complex conjugation maps the units of an ideal
   onto those of its conjugate ideal.

Units are stored as dense complex blocks of shape ``|X_i| x |X_j|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import linalg
from .config_model import CoherentConfiguration, FiberCommutativityError, require_fiber_commutative

DEFAULT_SEED = 42
GROUP_TOL = 1e-7
UNIT_TOL = 1e-8
TRACE_TOL = 1e-6


class DecompositionError(RuntimeError):
    """The numeric decomposition could not be completed within tolerance."""


@dataclass(frozen=True)
class FiberIdempotent:
    fiber: int
    projector: np.ndarray
    eigenvalues: tuple          # joint eigenvalue per diagonal-block color, in color order
    colors: tuple

    @property
    def rank(self) -> int:
        return int(round(np.trace(self.projector).real))

    def eigenvalue(self, color: int) -> complex:
        return self.eigenvalues[self.colors.index(color)]


def _random_hermitian_combination(mats, rng):
    H = np.zeros(mats[0].shape, dtype=complex)
    for A in mats:
        c, d = rng.standard_normal(2)
        H += c * (A + A.T) + d * 1j * (A - A.T)
    return H


def _group_eigenvalues(values, tol):
    groups, start = [], 0
    for i in range(1, len(values) + 1):
        if i == len(values) or values[i] - values[i - 1] > tol:
            groups.append(slice(start, i))
            start = i
    return groups


def _split(V, mats, rng, tol, depth=0):
    """Split the columns of ``V`` into joint eigenspaces of ``mats``."""
    restricted = [V.conj().T @ A @ V for A in mats]
    dim = V.shape[1]
    scalar = True
    for M in restricted:
        mu = np.trace(M) / dim
        if np.max(np.abs(M - mu * np.eye(dim))) > tol:
            scalar = False
            break
    if scalar:
        return [V]
    if depth > 8 or dim == 1:
        raise DecompositionError("joint eigenspace refinement did not terminate")
    H = _random_hermitian_combination(restricted, rng)
    H = (H + H.conj().T) / 2
    radius = max(np.max(np.abs(linalg.eigvalsh(H))), 1e-300)
    eig = linalg.hermitian_eig(H / radius)
    out = []
    for g in _group_eigenvalues(eig.values, tol):
        out.extend(_split(V @ eig.vectors[:, g], mats, rng, tol, depth + 1))
    return out


def fiber_primitive_idempotents(cc: CoherentConfiguration, k: int,
                                seed: int = DEFAULT_SEED,
                                tol: float = GROUP_TOL) -> list[FiberIdempotent]:
    """Primitive idempotents of the commutative algebra on fiber ``k``.

    A random Hermitian combination of the diagonal-block colors is
    diagonalized (normalized to unit spectral radius); eigenvalues within
    ``tol`` are grouped, and groups on which some color does not act as a
    scalar are split again.  The all-ones projector comes first.

    Raises
    ------
    FiberCommutativityError
        A color does not leave a computed eigenspace invariant, or the number
        of idempotents differs from the number of fiber colors.
    """
    colors = tuple(cc.colors_in_block(k, k))
    mats = [cc.block_adjacency(I) for I in colors]
    m = cc.fiber_sizes[k]
    rng = np.random.default_rng([seed, k])

    H = _random_hermitian_combination(mats, rng)
    radius = max(np.max(np.abs(linalg.eigvalsh(H))), 1e-300)
    eig = linalg.hermitian_eig(H / radius)

    spaces = []
    for g in _group_eigenvalues(eig.values, tol):
        V = eig.vectors[:, g]
        for A, I in zip(mats, colors):
            M = V.conj().T @ A @ V
            if np.max(np.abs(A @ V - V @ M), initial=0.0) > 1e-6 * max(1.0, m):
                raise FiberCommutativityError(
                    f"fiber {k}: color {I} does not preserve a joint eigenspace",
                    fiber=k, colors=(I,),
                )
        spaces.extend(_split(V, mats, rng, tol))

    if len(spaces) != len(colors):
        raise FiberCommutativityError(
            f"fiber {k}: found {len(spaces)} primitive idempotents for "
            f"{len(colors)} colors", fiber=k,
        )

    out = []
    for V in spaces:
        P = V @ V.conj().T
        lam = tuple(complex(np.trace(V.conj().T @ A @ V) / V.shape[1]) for A in mats)
        out.append(FiberIdempotent(k, P, lam, colors))
    ones = np.full((m, m), 1.0 / m)
    out.sort(key=lambda e: (np.max(np.abs(e.projector - ones)) > 1e-8, _eigen_key(e)))
    return out


def _eigen_key(e: FiberIdempotent):
    return tuple((-round(z.real, 6), -round(z.imag, 6)) for z in e.eigenvalues)


@dataclass
class LinkedIdeal:
    support: tuple[int, ...]
    idempotents: dict             # fiber -> FiberIdempotent


def link_ideals(cc: CoherentConfiguration, idempotents, tol: float = 1e-8) -> list[LinkedIdeal]:
    """Group fiber idempotents into simple ideals.

    ``e`` (fiber ``k``) and ``f`` (fiber ``l``) are linked when
    ``sum_M ||e A_M f||^2`` over the block-``(k, l)`` colors exceeds ``tol``
    relative to ``sum_M ||A_M||^2``.  Connected components are the ideals.
    """
    nodes = [e for per_fiber in idempotents for e in per_fiber]
    parent = list(range(len(nodes)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, e in enumerate(nodes):
        for b in range(a + 1, len(nodes)):
            f = nodes[b]
            if f.fiber == e.fiber:
                continue
            blocks = [cc.block_adjacency(M) for M in cc.colors_in_block(e.fiber, f.fiber)]
            total = sum(float(np.sum(A * A)) for A in blocks)
            weight = sum(
                float(np.sum(np.abs(e.projector @ A @ f.projector) ** 2)) for A in blocks
            )
            if weight > tol * max(total, 1.0):
                parent[find(b)] = find(a)

    components: dict = {}
    for a, e in enumerate(nodes):
        comp = components.setdefault(find(a), {})
        if e.fiber in comp:
            raise DecompositionError(
                f"two idempotents of fiber {e.fiber} fall in one ideal; "
                "the fiber algebra is not commutative or the computation is inaccurate"
            )
        comp[e.fiber] = e
    return [LinkedIdeal(tuple(sorted(c)), c) for c in components.values()]


@dataclass
class Ideal:
    support: tuple[int, ...]
    units: dict                   # (i, j) -> complex block |X_i| x |X_j|
    partner: int
    multiplicity: int

    @property
    def degree(self) -> int:
        return len(self.support)

    @property
    def root(self) -> int:
        return self.support[0]

    def central_idempotent(self, cc: CoherentConfiguration) -> np.ndarray:
        C = np.zeros((cc.n, cc.n), dtype=complex)
        for i in self.support:
            C[cc.fiber_slice(i), cc.fiber_slice(i)] = self.units[(i, i)]
        return C


@dataclass
class MatrixUnitBasis:
    """Matrix units for every simple ideal; ideal 0 is the principal one."""

    cc: CoherentConfiguration
    ideals: list
    principal_index: int = 0
    seed: int = DEFAULT_SEED

    def __len__(self) -> int:
        return len(self.ideals)

    def unit(self, s: int, i: int, j: int) -> np.ndarray:
        return self.ideals[s].units[(i, j)]

    def full_unit(self, s: int, i: int, j: int) -> np.ndarray:
        E = np.zeros((self.cc.n, self.cc.n), dtype=complex)
        E[self.cc.fiber_slice(i), self.cc.fiber_slice(j)] = self.ideals[s].units[(i, j)]
        return E

    @property
    def supports(self) -> list:
        return [I.support for I in self.ideals]

    @property
    def degrees(self) -> list:
        return [I.degree for I in self.ideals]

    @property
    def multiplicities(self) -> list:
        return [I.multiplicity for I in self.ideals]

    @property
    def partners(self) -> list:
        return [I.partner for I in self.ideals]

    def summary(self) -> dict:
        return {
            "seed": self.seed,
            "principal_index": self.principal_index,
            "ideals": [
                {
                    "index": s,
                    "support": list(I.support),
                    "degree": I.degree,
                    "multiplicity": I.multiplicity,
                    "partner": I.partner,
                }
                for s, I in enumerate(self.ideals)
            ],
            "sum_degree_squared": int(sum(d * d for d in self.degrees)),
            "sum_multiplicity_degree": int(sum(h * d for h, d in zip(self.multiplicities, self.degrees))),
        }


def _sort_linked(cc, linked):
    def key(L):
        r = L.support[0]
        e = L.idempotents[r]
        m = cc.fiber_sizes[r]
        principal = np.max(np.abs(e.projector - np.full((m, m), 1.0 / m))) < 1e-8
        return (not principal, -len(L.support), r, e.rank, _eigen_key(e))

    return sorted(linked, key=key)


def _units_from_root(cc, L: LinkedIdeal, tol: float) -> dict:
    r = L.support[0]
    er = L.idempotents[r].projector
    h = np.trace(er).real
    row = {r: er.astype(complex)}
    for i in L.support[1:]:
        ei = L.idempotents[i].projector
        B = None
        for M in cc.colors_in_block(r, i):
            cand = er @ cc.block_adjacency(M) @ ei
            if np.linalg.norm(cand) > tol * max(1.0, math.sqrt(cc.fiber_sizes[r] * cc.fiber_sizes[i])):
                B = cand
                break
        if B is None:
            raise DecompositionError(f"no color links fibers {r} and {i} in a linked ideal")
        BB = B @ B.conj().T
        c = np.trace(BB).real / h
        if np.max(np.abs(BB - c * er)) > tol * max(c, 1.0) * 10:
            raise DecompositionError(
                f"e_r A e_i (fibers {r}, {i}) is not a scaled partial isometry"
            )
        row[i] = B / math.sqrt(c)
    return _fill_units(L.support, row)


def _fill_units(support, row) -> dict:
    """All units from the root row: ``eps_ij = eps_ri^* eps_rj``."""
    r = support[0]
    units = {}
    for i in support:
        for j in support:
            if i == r:
                units[(i, j)] = row[j]
            elif j == r:
                units[(i, j)] = row[i].conj().T
            else:
                units[(i, j)] = row[i].conj().T @ row[j]
    return units


def _find_partners(ideals) -> list:
    partners = []
    for s, I in enumerate(ideals):
        target = I.units[(I.root, I.root)].conj()
        match = [
            t for t, J in enumerate(ideals)
            if J.support == I.support
            and np.max(np.abs(J.units[(J.root, J.root)] - target)) < 1e-6
        ]
        if len(match) != 1:
            raise DecompositionError(f"ideal {s}: cannot identify its conjugate ideal")
        partners.append(match[0])
    return partners


def _half_phase_regauge(I: Ideal, h: int) -> None:
    """Make the units of a self-conjugate ideal real up to roundoff."""
    r = I.root
    row = {r: I.units[(r, r)]}
    for i in I.support[1:]:
        E = I.units[(r, i)]
        zeta = np.sum(np.conj(E) * np.conj(E)) / h
        row[i] = E * np.sqrt(zeta / abs(zeta))
    I.units = _fill_units(I.support, row)


def _pair_conjugates(ideals, tol):
    done = set()
    for s, I in enumerate(ideals):
        if s in done:
            continue
        t = I.partner
        if t == s:
            _half_phase_regauge(I, I.multiplicity)
        else:
            ideals[t].units = {k: np.conj(v) for k, v in I.units.items()}
            done.add(t)
        done.add(s)
        resid = max(
            np.max(np.abs(np.conj(I.units[k]) - ideals[t].units[k])) for k in I.units
        )
        if resid > tol:
            raise DecompositionError(
                f"ideal {s}: conjugation residual {resid:.2e} after re-gauge"
            )


def multiplicities(basis: MatrixUnitBasis, tol: float = TRACE_TOL) -> list[int]:
    """``h_s = tr(eps_ii^s)``, checked to be integral and independent of ``i``."""
    out = []
    for s, I in enumerate(basis.ideals):
        traces = [np.trace(I.units[(i, i)]).real for i in I.support]
        h = int(round(traces[0]))
        if any(abs(tr - h) > tol for tr in traces):
            raise DecompositionError(f"ideal {s}: traces {traces} are not a common integer")
        out.append(h)
    if out and out[basis.principal_index] != 1:
        raise DecompositionError("principal ideal does not have multiplicity 1")
    return out


def build_matrix_units(cc: CoherentConfiguration, linked, seed: int = DEFAULT_SEED,
                       tol: float = UNIT_TOL) -> MatrixUnitBasis:
    """Gauge-fixed matrix units for the linked ideals.

    The root of each ideal is its smallest fiber ``r``.  ``eps_rr`` is the
    fiber idempotent; ``eps_ri`` is ``e_r A_M e_i`` for the first color ``M``
    of block ``(r, i)`` where this is nonzero, scaled to a partial isometry;
    the other units follow from ``eps_ij = eps_ri^* eps_rj``.  Conjugate
    ideals are then made entrywise conjugate, and self-conjugate ideals are
    rotated by half-phases until real.
    """
    linked = _sort_linked(cc, linked)
    ideals = []
    for L in linked:
        units = _units_from_root(cc, L, tol)
        h = int(round(np.trace(units[(L.support[0], L.support[0])]).real))
        ideals.append(Ideal(L.support, units, -1, h))
    for I, t in zip(ideals, _find_partners(ideals)):
        I.partner = t
    _pair_conjugates(ideals, tol)
    basis = MatrixUnitBasis(cc, ideals, 0, seed)
    for I, h in zip(ideals, multiplicities(basis)):
        I.multiplicity = h
    return basis


def decompose(cc: CoherentConfiguration, seed: int = DEFAULT_SEED,
              group_tol: float = GROUP_TOL, unit_tol: float = UNIT_TOL) -> MatrixUnitBasis:
    """Full pipeline: fiber idempotents, linking, and matrix units."""
    require_fiber_commutative(cc)
    idem = [fiber_primitive_idempotents(cc, k, seed, group_tol) for k in range(cc.num_fibers)]
    linked = link_ideals(cc, idem)
    return build_matrix_units(cc, linked, seed, unit_tol)


def regauge(basis: MatrixUnitBasis, s: int, z, keep_conjugation: bool = True) -> MatrixUnitBasis:
    """Multiply the units of ideal ``s`` by ``conj(z_i) z_j``.

    ``z`` is indexed like the support of ``s``.  For a non-self-conjugate
    ideal the partner is replaced by the entrywise conjugate.  A
    self-conjugate ideal admits only real gauges while staying paired with
    itself; with ``keep_conjugation`` the pairing is restored by the
    half-phase rotation, otherwise the raw gauged units are kept.
    """
    z = np.asarray(z, dtype=complex)
    I = basis.ideals[s]
    if z.shape != (I.degree,):
        raise ValueError(f"gauge vector must have length {I.degree}")
    if np.max(np.abs(np.abs(z) - 1.0)) > 1e-12:
        raise ValueError("gauge entries must be unimodular")
    pos = {f: a for a, f in enumerate(I.support)}
    units = {
        (i, j): np.conj(z[pos[i]]) * z[pos[j]] * E for (i, j), E in I.units.items()
    }
    ideals = list(basis.ideals)
    ideals[s] = replace(I, units=units)
    if I.partner != s:
        ideals[I.partner] = replace(
            basis.ideals[I.partner], units={k: np.conj(v) for k, v in units.items()}
        )
    elif keep_conjugation:
        fixed = replace(ideals[s])
        _half_phase_regauge(fixed, I.multiplicity)
        ideals[s] = fixed
    return replace(basis, ideals=ideals)


@dataclass
class UnitReport:
    residuals: dict = field(default_factory=dict)
    tol: float = UNIT_TOL

    @property
    def passed(self) -> dict:
        return {k: v <= self.tol for k, v in self.residuals.items()}

    @property
    def ok(self) -> bool:
        return all(self.passed.values())

    def to_dict(self) -> dict:
        return {"ok": self.ok, "tol": self.tol,
                "residuals": {k: float(v) for k, v in self.residuals.items()}}


def _norm2(M) -> float:
    return float(np.linalg.norm(M, 2)) if M.size else 0.0


def _span_residual(cc, i, j, E) -> float:
    """Distance of a block from the span of the block-(i, j) colors."""
    C = cc.color[cc.fiber_slice(i), cc.fiber_slice(j)]
    proj = np.zeros_like(E)
    for M in cc.colors_in_block(i, j):
        mask = C == M
        proj[mask] = E[mask].mean()
    return _norm2(E - proj)


def verify_units(basis: MatrixUnitBasis, tol: float = UNIT_TOL) -> UnitReport:
    """Maximum residual for each matrix-unit invariant (spectral norms).

    Keys: ``products``, ``adjoint``, ``block``, ``conjugation``, ``identity``,
    ``span``, ``center``, ``accounting``.
    """
    cc = basis.cc
    res = dict.fromkeys(
        ("products", "adjoint", "block", "conjugation", "identity", "span", "center", "accounting"),
        0.0,
    )
    for s, I in enumerate(basis.ideals):
        for (i, j), E in I.units.items():
            if E.shape != (cc.fiber_sizes[i], cc.fiber_sizes[j]):
                res["block"] = max(res["block"], 1.0)
            res["adjoint"] = max(res["adjoint"], _norm2(E.conj().T - I.units[(j, i)]))
            res["span"] = max(res["span"], _span_residual(cc, i, j, E))
            for l in I.support:
                res["products"] = max(
                    res["products"], _norm2(E @ I.units[(j, l)] - I.units[(i, l)])
                )
            partner = basis.ideals[I.partner] if 0 <= I.partner < len(basis.ideals) else None
            if partner is None or partner.support != I.support:
                res["conjugation"] = max(res["conjugation"], 1.0)
            else:
                res["conjugation"] = max(res["conjugation"], _norm2(np.conj(E) - partner.units[(i, j)]))

    for k in range(cc.num_fibers):
        total = np.zeros((cc.fiber_sizes[k],) * 2, dtype=complex)
        for I in basis.ideals:
            if k in I.support:
                total += I.units[(k, k)]
        res["identity"] = max(res["identity"], _norm2(total - np.eye(cc.fiber_sizes[k])))

    adj = [cc.dense_adjacency(I) for I in range(cc.rank)]
    for I in basis.ideals:
        C = I.central_idempotent(cc)
        for A in adj:
            res["center"] = max(res["center"], _norm2(C @ A - A @ C))

    sq = sum(I.degree ** 2 for I in basis.ideals)
    he = sum(I.multiplicity * I.degree for I in basis.ideals)
    res["accounting"] = float(abs(sq - cc.rank) + abs(he - cc.n))
    return UnitReport(res, tol)
