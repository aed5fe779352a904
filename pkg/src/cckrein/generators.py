"""Benchmark configurations and the closed-form Krein matrices of GQ(s, t).

Generalized quadrangles give two-fiber configurations (points, lines) with ten
relations.  Their Krein matrices have closed forms in ``s`` and ``t``; those
closed forms double as an independent oracle for the numeric pipeline and as
a parameter screener for putative quadrangles that need not exist.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .config_model import CoherentConfiguration, from_color_matrix
from . import linalg


class GQError(ValueError):
    """Incidence structure violates a generalized-quadrangle axiom."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class IncidenceStructure:
    num_points: int
    num_lines: int
    flags: frozenset

    def __post_init__(self):
        for p, l in self.flags:
            if not (0 <= p < self.num_points and 0 <= l < self.num_lines):
                raise ValueError(f"flag {(p, l)} out of range")

    def incidence_matrix(self) -> np.ndarray:
        M = np.zeros((self.num_points, self.num_lines), dtype=np.int64)
        for p, l in self.flags:
            M[p, l] = 1
        return M

    def dual(self) -> "IncidenceStructure":
        return IncidenceStructure(
            self.num_lines, self.num_points, frozenset((l, p) for p, l in self.flags)
        )


def gen_gq_grid(s: int) -> IncidenceStructure:
    """GQ(s, 1): cells of an ``(s+1) x (s+1)`` array; lines are rows and columns."""
    if s < 1:
        raise ValueError("s must be at least 1")
    m = s + 1
    flags = set()
    for r, c in itertools.product(range(m), repeat=2):
        p = r * m + c
        flags.add((p, r))
        flags.add((p, m + c))
    return IncidenceStructure(m * m, 2 * m, frozenset(flags))


def gen_gq_dualgrid(t: int) -> IncidenceStructure:
    """GQ(1, t), the dual of the grid GQ(t, 1)."""
    return gen_gq_grid(t).dual()


def gen_gq_w2() -> IncidenceStructure:
    """GQ(2, 2) as duads and synthemes of a 6-set.

    Points are the 15 two-subsets of ``{0..5}``; lines are the 15 partitions
    of ``{0..5}`` into three two-subsets; a duad lies on every syntheme that
    contains it.
    """
    duads = list(itertools.combinations(range(6), 2))
    synthemes = []
    for a, b in duads:
        if a != 0:
            continue
        rest = [x for x in range(6) if x not in (a, b)]
        for c, d in itertools.combinations(rest, 2):
            if c != rest[0]:
                continue
            e, f = [x for x in rest if x not in (c, d)]
            synthemes.append(((a, b), (c, d), (e, f)))
    index = {d: i for i, d in enumerate(duads)}
    flags = frozenset(
        (index[d], j) for j, syn in enumerate(synthemes) for d in syn
    )
    return IncidenceStructure(len(duads), len(synthemes), flags)


def validate_gq(inc: IncidenceStructure) -> tuple[int, int]:
    """Return ``(s, t)`` or raise :class:`GQError` with a witness.

    Constant line size and point degree are checked first, then that two
    points share at most one line (without it, a structure with no anti-flags
    would pass vacuously), then the unique ``(q, m)`` property of every
    anti-flag.
    """
    M = inc.incidence_matrix()
    line_sizes = M.sum(axis=0)
    point_degrees = M.sum(axis=1)
    if inc.num_points == 0 or inc.num_lines == 0:
        raise GQError("empty incidence structure")
    if np.any(line_sizes != line_sizes[0]):
        l = int(np.nonzero(line_sizes != line_sizes[0])[0][0])
        raise GQError("lines have different sizes", {"line": l})
    if np.any(point_degrees != point_degrees[0]):
        p = int(np.nonzero(point_degrees != point_degrees[0])[0][0])
        raise GQError("points have different degrees", {"point": p})
    s, t = int(line_sizes[0]) - 1, int(point_degrees[0]) - 1
    if s < 1 or t < 1:
        raise GQError(f"degenerate parameters s={s}, t={t}")

    common = M @ M.T
    np.fill_diagonal(common, 0)
    if np.any(common > 1):
        p, q = (int(x) for x in np.argwhere(common > 1)[0])
        raise GQError("two points share more than one line", {"points": [p, q]})

    # number of (q, m) with p I m I q I l, q != p: entry (p, l) of (M M^T - D) M
    collinear = M @ M.T
    np.fill_diagonal(collinear, 0)
    paths = collinear @ M
    antiflags = np.argwhere(M == 0)
    if antiflags.size == 0:
        raise GQError("no anti-flags: every point lies on every line")
    for p, l in antiflags:
        if paths[p, l] != 1:
            raise GQError(
                f"anti-flag ({p}, {l}) has {paths[p, l]} connecting flag pairs",
                {"point": int(p), "line": int(l), "count": int(paths[p, l])},
            )
    return s, t


GQ_LABELS = (
    "R_{1,1,1}", "R_{1,1,2}", "R_{1,1,3}",
    "R_{1,2,1}", "R_{1,2,2}",
    "R_{2,1,1}", "R_{2,1,2}",
    "R_{2,2,1}", "R_{2,2,2}", "R_{2,2,3}",
)


def gq_to_configuration(inc: IncidenceStructure) -> CoherentConfiguration:
    """The ten-relation configuration on points (fiber 0) and lines (fiber 1).

    Colors, in order: point identity, collinear, non-collinear; incident and
    non-incident point-line pairs; the same two line-point relations; line
    identity, concurrent, non-concurrent.  Empty relations are dropped and
    the remaining colors renumbered.
    """
    validate_gq(inc)
    M = inc.incidence_matrix()
    P, L = inc.num_points, inc.num_lines
    collinear = (M @ M.T) > 0
    concurrent = (M.T @ M) > 0
    color = np.empty((P + L, P + L), dtype=np.int64)
    pp = np.where(collinear, 1, 2)
    np.fill_diagonal(pp, 0)
    ll = np.where(concurrent, 8, 9)
    np.fill_diagonal(ll, 7)
    color[:P, :P] = pp
    color[:P, P:] = np.where(M == 1, 3, 4)
    color[P:, :P] = np.where(M.T == 1, 5, 6)
    color[P:, P:] = ll
    used = np.unique(color)
    remap = np.full(10, -1)
    remap[used] = np.arange(used.size)
    labels = [GQ_LABELS[i] for i in used]
    return from_color_matrix((P, L), remap[color], labels)


def gen_cyclic_scheme(n: int) -> CoherentConfiguration:
    """Single-fiber scheme of the n-cycle: color = circular distance."""
    if n < 3:
        raise ValueError("n must be at least 3")
    x = np.arange(n)
    d = (x[None, :] - x[:, None]) % n
    return from_color_matrix((n,), np.minimum(d, n - d))


def gen_directed_cycle_scheme(n: int) -> CoherentConfiguration:
    """Group scheme of Z_n: color of ``(x, y)`` is ``y - x mod n`` (not symmetric)."""
    if n < 2:
        raise ValueError("n must be at least 2")
    x = np.arange(n)
    return from_color_matrix((n,), (x[None, :] - x[:, None]) % n)


def gen_hamming_2_2() -> CoherentConfiguration:
    """H(2, 2): words of length 2 over {0, 1}, color = Hamming distance."""
    words = list(itertools.product((0, 1), repeat=2))
    color = [[sum(a != b for a, b in zip(u, v)) for v in words] for u in words]
    return from_color_matrix((4,), color)


def gen_s3_with_point() -> CoherentConfiguration:
    """Group scheme of S_3 plus a one-point fiber; the S_3 fiber is not commutative.

    On the S_3 fiber the color of ``(g, h)`` is the index of ``g^-1 h``; the
    rotations give the directed triangles.  The extra point is joined to the
    S_3 fiber by one color in each direction.
    """
    perms = list(itertools.permutations(range(3)))
    index = {p: i for i, p in enumerate(perms)}

    def inv(p):
        q = [0] * 3
        for i, x in enumerate(p):
            q[x] = i
        return tuple(q)

    def compose(p, q):  # p after q
        return tuple(p[q[i]] for i in range(3))

    color = np.zeros((7, 7), dtype=np.int64)
    for g, h in itertools.product(perms, repeat=2):
        color[index[g], index[h]] = index[compose(inv(g), h)]
    color[:6, 6] = 6
    color[6, :6] = 7
    color[6, 6] = 8
    return from_color_matrix((6, 1), color)


# -- closed forms -----------------------------------------------------------

PRINCIPAL, SHARED, POINT_ONLY, LINE_ONLY = 0, 1, 2, 3
GQ_SUPPORTS = ((0, 1), (0, 1), (0,), (1,))


def triple_label(s: int, t: int, u: int) -> str:
    """1-based display label, e.g. ``Q_{3,3}^3`` for ideals ``(2, 2, 2)``."""
    return f"Q_{{{s + 1},{t + 1}}}^{u + 1}"


def sigma(s, t):
    return (s + 1) * (t * t * (s * t + 2 * s - 1) + s * (s * t - 2 * t - 1))


def tau_squared(s, t):
    """``tau(s,t)^2 = (s+t)^3 (st-1)^2 (s+1)(t+1)``, exact for rational input."""
    return (s + t) ** 3 * (s * t - 1) ** 2 * (s + 1) * (t + 1)


def tau(s, t) -> float:
    return math.copysign(math.sqrt(float(tau_squared(s, t))), float(s * t - 1))


@dataclass
class ClosedFormEntry:
    """One closed-form Krein matrix.

    ``scalar`` is set when the matrix is ``scalar * J`` (1x1 included) and is
    exact; the only other case is the 2x2 matrix of the shared ideal.
    """

    support: tuple[int, ...]
    matrix: np.ndarray
    scalar: Fraction | None = None
    generic_rank: int = 1


@dataclass
class GQClosedForm:
    s: Fraction
    t: Fraction
    fiber_sizes: tuple[Fraction, Fraction]
    multiplicities: tuple[Fraction, Fraction, Fraction, Fraction]
    supports: tuple = GQ_SUPPORTS
    entries: dict = field(default_factory=dict)

    def matrix(self, s: int, t: int, u: int) -> np.ndarray:
        return self.entries[(s, t, u)].matrix


def _scalar_entry(support, c, generic_rank=1) -> ClosedFormEntry:
    k = len(support)
    return ClosedFormEntry(support, float(c) * np.ones((k, k)), Fraction(c), generic_rank)


def gq_closed_form(s, t) -> GQClosedForm:
    """Every Krein matrix of the GQ(s, t) configuration in closed form.

    Ideals are numbered 0..3 (principal, shared, point-only, line-only) and
    fibers 0 (points), 1 (lines).  Triples whose supports do not meet are
    absent, as in the numeric table.
    """
    s, t = Fraction(s), Fraction(t)
    if s < 1 or t < 1:
        raise ValueError("s and t must be at least 1")
    st1 = s * t + 1
    h = (
        Fraction(1),
        s * t * (s + 1) * (t + 1) / (s + t),
        s * s * st1 / (s + t),
        t * t * st1 / (s + t),
    )
    d2 = (s + t) ** 2
    cf = GQClosedForm(s, t, ((s + 1) * st1, (t + 1) * st1), h)

    for a, b, c in itertools.product(range(4), repeat=3):
        support = tuple(sorted(set(GQ_SUPPORTS[a]) & set(GQ_SUPPORTS[b]) & set(GQ_SUPPORTS[c])))
        if not support:
            continue
        if a == PRINCIPAL or b == PRINCIPAL:
            other = b if a == PRINCIPAL else a
            cf.entries[(a, b, c)] = _scalar_entry(support, 1 if other == c else 0,
                                                  int(other == c))
        elif c == PRINCIPAL:
            cf.entries[(a, b, c)] = _scalar_entry(support, h[b] if a == b else 0,
                                                  int(a == b))

    special = {
        (SHARED, SHARED, POINT_ONLY): t * st1 * (s + 1) * (t + 1) / d2,
        (SHARED, SHARED, LINE_ONLY): s * st1 * (s + 1) * (t + 1) / d2,
        (SHARED, POINT_ONLY, SHARED): s * st1 ** 2 / d2,
        (SHARED, POINT_ONLY, POINT_ONLY): t * (t + 1) * (s + 1) ** 2 * (s - 1) / d2,
        (SHARED, LINE_ONLY, SHARED): t * st1 ** 2 / d2,
        (SHARED, LINE_ONLY, LINE_ONLY): s * (s + 1) * (t + 1) ** 2 * (t - 1) / d2,
        (POINT_ONLY, POINT_ONLY, SHARED): s * st1 * (s + 1) * (s - 1) / d2,
        (POINT_ONLY, POINT_ONLY, POINT_ONLY): st1 * (s - 1) * (s * s - t) / d2,
        (LINE_ONLY, LINE_ONLY, SHARED): t * st1 * (t + 1) * (t - 1) / d2,
        (LINE_ONLY, LINE_ONLY, LINE_ONLY): st1 * (t - 1) * (t * t - s) / d2,
    }
    for (a, b, c), value in special.items():
        support = tuple(sorted(set(GQ_SUPPORTS[a]) & set(GQ_SUPPORTS[b]) & set(GQ_SUPPORTS[c])))
        cf.entries[(a, b, c)] = _scalar_entry(support, value)
        cf.entries[(b, a, c)] = _scalar_entry(support, value)

    off = tau(s, t) / float(d2)
    q222 = np.array(
        [[float(sigma(s, t) / d2), off], [off, float(sigma(t, s) / d2)]]
    )
    cf.entries[(SHARED, SHARED, SHARED)] = ClosedFormEntry((0, 1), q222, None, 2)

    missing = [
        k for k in itertools.product(range(4), repeat=3)
        if set(GQ_SUPPORTS[k[0]]) & set(GQ_SUPPORTS[k[1]]) & set(GQ_SUPPORTS[k[2]])
        and k not in cf.entries
    ]
    assert not missing, missing
    return cf


def _shared_shared_rank_and_sign(s, t):
    """Exact rank and PSD-ness of the 2x2 shared-ideal matrix via tau^2."""
    a, d = sigma(s, t), sigma(t, s)
    det = a * d - tau_squared(s, t)
    is_psd = a >= 0 and d >= 0 and det >= 0
    if a == 0 and d == 0 and det == 0:
        rank = 0
    elif det == 0:
        rank = 1
    else:
        rank = 2
    return rank, is_psd


@dataclass
class GQVerdict:
    s: Fraction
    t: Fraction
    verdict: str                      # "feasible" | "boundary" | "infeasible"
    witness: tuple | None = None      # triple of the first offending matrix
    witness_value: Fraction | float | None = None
    min_eigenvalues: dict = field(default_factory=dict)
    boundary_triples: list = field(default_factory=list)
    negative_triples: list = field(default_factory=list)
    other_entries_nonnegative: bool = True

    def message(self) -> str:
        if self.verdict == "infeasible":
            return (f"infeasible: {triple_label(*self.witness)} = "
                    f"{_fmt_value(self.witness_value)} < 0")
        if self.verdict == "boundary":
            return (f"boundary: {triple_label(*self.witness)} is singular "
                    f"(min eigenvalue {_fmt_value(self.witness_value)})")
        return "feasible"


def _fmt_value(v) -> str:
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else str(v.numerator)
    return f"{v:.6g}"


# order in which offending matrices are reported
_WITNESS_ORDER = (
    (POINT_ONLY, POINT_ONLY, POINT_ONLY),
    (LINE_ONLY, LINE_ONLY, LINE_ONLY),
)


def gq_feasibility(s, t, cf: GQClosedForm | None = None) -> GQVerdict:
    """Screen GQ(s, t) parameters with the Krein condition.

    Every closed-form matrix is tested for positive semidefiniteness using
    exact arithmetic (scalars and ``tau^2``).  A matrix whose rank drops below
    its generic rank while staying PSD puts the parameters on the boundary.
    """
    cf = gq_closed_form(s, t) if cf is None else cf
    out = GQVerdict(cf.s, cf.t, "feasible")
    for key in sorted(cf.entries, key=lambda k: (k not in _WITNESS_ORDER, k)):
        e = cf.entries[key]
        out.min_eigenvalues[key] = linalg.min_eigenvalue(e.matrix)
        if e.scalar is not None:
            negative = e.scalar < 0
            degenerate = (e.scalar != 0) < e.generic_rank
            value = e.scalar
        else:
            rank, is_psd = _shared_shared_rank_and_sign(cf.s, cf.t)
            negative = not is_psd
            degenerate = rank < e.generic_rank
            value = out.min_eigenvalues[key]
        if key not in _WITNESS_ORDER and np.any(e.matrix < 0):
            out.other_entries_nonnegative = False
        if negative:
            out.negative_triples.append(key)
            if out.verdict != "infeasible":
                out.verdict, out.witness, out.witness_value = "infeasible", key, value
        elif degenerate:
            out.boundary_triples.append(key)
            if out.verdict == "feasible":
                out.verdict, out.witness, out.witness_value = "boundary", key, value
    return out


def gq_feasibility_sweep(s_range, t_range) -> dict:
    """``{(s, t): GQVerdict}`` over integer ranges (inclusive iterables)."""
    return {(s, t): gq_feasibility(s, t) for s in s_range for t in t_range}
