"""Coherent configurations: parsing, axiom validation, intersection numbers.

A configuration is stored as a fiber partition (points are ordered fiber by
fiber) together with an ``n x n`` integer color matrix.  Colors are numbered
``0 .. rank-1``; the block ``(k, l)`` of a color is inferred from where it
occurs and is never declared separately.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np
from scipy import sparse


class ConfigurationError(ValueError):
    """Malformed configuration document or color matrix."""


class FiberCommutativityError(ValueError):
    """A fiber algebra is not commutative; ``fiber`` and ``colors`` name the witness."""

    def __init__(self, message, fiber=None, colors=None):
        super().__init__(message)
        self.fiber = fiber
        self.colors = colors


@dataclass(frozen=True)
class ColorMeta:
    id: int
    block: tuple[int, int]
    transpose: Optional[int]
    is_identity: bool


@dataclass(frozen=True, eq=False)
class CoherentConfiguration:
    """Fiber sizes plus a color matrix with per-color metadata.

    Use :func:`from_color_matrix` or :func:`parse_configuration` to build one;
    they infer the metadata and enforce the block structure.
    """

    fiber_sizes: tuple[int, ...]
    color: np.ndarray
    colors: tuple[ColorMeta, ...]
    labels: Optional[tuple[str, ...]] = None

    @property
    def n(self) -> int:
        return int(sum(self.fiber_sizes))

    @property
    def rank(self) -> int:
        return len(self.colors)

    @property
    def num_fibers(self) -> int:
        return len(self.fiber_sizes)

    @cached_property
    def fiber_offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.fiber_sizes)]).astype(int)

    def fiber_slice(self, k: int) -> slice:
        return slice(int(self.fiber_offsets[k]), int(self.fiber_offsets[k + 1]))

    @cached_property
    def point_fiber(self) -> np.ndarray:
        return np.repeat(np.arange(self.num_fibers), self.fiber_sizes)

    def colors_in_block(self, k: int, l: int) -> list[int]:
        return [c.id for c in self.colors if c.block == (k, l)]

    def identity_color(self, k: int) -> int:
        for c in self.colors:
            if c.is_identity and c.block == (k, k):
                return c.id
        raise ConfigurationError(f"fiber {k} has no identity color")

    def block_counts(self) -> np.ndarray:
        """``r[k, l]``: number of colors in block ``(k, l)``."""
        f = self.num_fibers
        r = np.zeros((f, f), dtype=int)
        for c in self.colors:
            r[c.block] += 1
        return r

    @cached_property
    def _sparse_adjacency(self) -> dict:
        return {}

    def adjacency(self, I: int) -> sparse.csr_matrix:
        """Sparse 0/1 adjacency matrix of color ``I`` (built on first use)."""
        cache = self._sparse_adjacency
        if I not in cache:
            rows, cols = np.nonzero(self.color == I)
            data = np.ones(rows.size, dtype=np.int64)
            cache[I] = sparse.csr_matrix((data, (rows, cols)), shape=(self.n, self.n))
        return cache[I]

    def dense_adjacency(self, I: int) -> np.ndarray:
        return (self.color == I).astype(float)

    def block_adjacency(self, I: int) -> np.ndarray:
        """The ``|X_k| x |X_l|`` block of color ``I`` as a float array."""
        k, l = self.colors[I].block
        return (self.color[self.fiber_slice(k), self.fiber_slice(l)] == I).astype(float)

    def to_document(self) -> dict:
        doc = {"fibers": list(self.fiber_sizes), "colors": self.color.tolist()}
        if self.labels is not None:
            doc["labels"] = list(self.labels)
        return doc

    def __eq__(self, other):
        if not isinstance(other, CoherentConfiguration):
            return NotImplemented
        return (
            self.fiber_sizes == other.fiber_sizes
            and np.array_equal(self.color, other.color)
            and self.colors == other.colors
            and self.labels == other.labels
        )

    __hash__ = None


def from_color_matrix(fiber_sizes, color, labels=None) -> CoherentConfiguration:
    """Build a configuration and infer block, transpose and identity metadata.

    Raises
    ------
    ConfigurationError
        Non-square matrix, fiber sizes that do not add up, color ids that are
        not ``0 .. rank-1``, or a color straddling two blocks.
    """
    fiber_sizes = tuple(int(m) for m in fiber_sizes)
    if not fiber_sizes or any(m <= 0 for m in fiber_sizes):
        raise ConfigurationError("fiber sizes must be positive integers")
    color = np.array(color)
    if color.ndim != 2 or color.shape[0] != color.shape[1]:
        raise ConfigurationError(f"color matrix must be square, got shape {color.shape}")
    n = sum(fiber_sizes)
    if color.shape[0] != n:
        raise ConfigurationError(
            f"fiber sizes sum to {n} but color matrix has dimension {color.shape[0]}"
        )
    if color.size and not np.issubdtype(color.dtype, np.integer):
        if not np.all(np.equal(np.mod(color, 1), 0)):
            raise ConfigurationError("color identifiers must be integers")
    color = color.astype(np.int64)
    color.setflags(write=False)
    ids = np.unique(color)
    rank = int(ids.size)
    if ids[0] != 0 or ids[-1] != rank - 1:
        raise ConfigurationError("colors must be numbered 0 .. rank-1 without gaps")

    fiber_of = np.repeat(np.arange(len(fiber_sizes)), fiber_sizes)
    blocks = {}
    for I in range(rank):
        rows, cols = np.nonzero(color == I)
        bk = set(zip(fiber_of[rows].tolist(), fiber_of[cols].tolist()))
        if len(bk) != 1:
            raise ConfigurationError(
                f"color {I} appears in several blocks {sorted(bk)}"
            )
        blocks[I] = bk.pop()

    metas = []
    for I in range(rank):
        rows, cols = np.nonzero(color == I)
        tvals = np.unique(color[cols, rows])
        transpose = int(tvals[0]) if tvals.size == 1 else None
        if transpose is not None and np.count_nonzero(color == transpose) != rows.size:
            transpose = None
        k, l = blocks[I]
        is_identity = bool(k == l and np.all(rows == cols) and rows.size == fiber_sizes[k])
        metas.append(ColorMeta(I, blocks[I], transpose, is_identity))

    if labels is not None:
        labels = tuple(str(x) for x in labels)
        if len(labels) != rank:
            raise ConfigurationError(f"{len(labels)} labels for {rank} colors")
    return CoherentConfiguration(fiber_sizes, color, tuple(metas), labels)


def parse_configuration(document) -> CoherentConfiguration:
    """Parse the JSON document ``{"fibers": [...], "colors": [[...]], "labels": [...]}``.

    ``document`` may be a JSON string or an already-decoded mapping.
    """
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"invalid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise ConfigurationError("document must be a JSON object")
    try:
        fibers = document["fibers"]
        colors = document["colors"]
    except KeyError as exc:
        raise ConfigurationError(f"missing key {exc}") from exc
    if not isinstance(fibers, list) or not all(isinstance(m, int) for m in fibers):
        raise ConfigurationError("'fibers' must be a list of integers")
    if not isinstance(colors, list) or not all(isinstance(row, list) for row in colors):
        raise ConfigurationError("'colors' must be a list of rows")
    if any(len(row) != len(colors) for row in colors):
        raise ConfigurationError("color matrix must be square")
    if not all(isinstance(x, int) and not isinstance(x, bool) for row in colors for x in row):
        raise ConfigurationError("color identifiers must be integers")
    if not colors:
        raise ConfigurationError("empty color matrix")
    return from_color_matrix(fibers, colors, document.get("labels"))


def serialize_configuration(cc: CoherentConfiguration) -> str:
    return json.dumps(cc.to_document())


@dataclass
class ValidationReport:
    """Result of :func:`validate_axioms`; failing axioms carry a witness."""

    axioms: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)
    rank: int = 0
    fiber_commutative: bool = False
    fiber_symmetric: bool = False
    sampled: bool = False

    @property
    def ok(self) -> bool:
        return all(self.axioms.values())

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "axioms": {str(k): v for k, v in self.axioms.items()},
            "witnesses": {str(k): v for k, v in self.witnesses.items()},
            "rank": self.rank,
            "fiber_commutative": self.fiber_commutative,
            "fiber_symmetric": self.fiber_symmetric,
            "sampled": self.sampled,
        }


def _check_identity(cc):
    for k in range(cc.num_fibers):
        sl = cc.fiber_slice(k)
        ids = [c.id for c in cc.colors if c.is_identity and c.block == (k, k)]
        if len(ids) != 1:
            x = sl.start
            return {"fiber": k, "point": x, "color": int(cc.color[x, x])}
    return None


def _check_transpose(cc):
    for c in cc.colors:
        if c.transpose is None:
            rows, cols = np.nonzero(cc.color == c.id)
            tvals = cc.color[cols, rows]
            bad = np.nonzero(tvals != tvals[0])[0]
            j = int(bad[0]) if bad.size else 0
            return {"color": c.id, "pair": [int(rows[j]), int(cols[j])]}
    return None


def _check_products(cc, sample=None, rng=None):
    """Triangle counts must be constant on every color class.

    Returns the first witness ``{"colors": [I, J], "pairs": [[x,y],[x2,y2]], ...}``
    or ``None``.  In sampled mode only ``sample`` pairs per color are checked.
    """
    n = cc.n
    masks = [cc.color == I for I in range(cc.rank)]
    probes = None
    if sample is not None:
        rng = np.random.default_rng(0) if rng is None else rng
        probes = []
        for K in range(cc.rank):
            rows, cols = np.nonzero(masks[K])
            take = rng.choice(rows.size, size=min(sample, rows.size), replace=False)
            probes.append((rows[np.sort(take)], cols[np.sort(take)]))
    for I in range(cc.rank):
        AI = masks[I].astype(np.int64)
        for J in range(cc.rank):
            if cc.colors[I].block[1] != cc.colors[J].block[0]:
                continue
            AJ = masks[J].astype(np.int64)
            if probes is None:
                prod = AI @ AJ
            for K in range(cc.rank):
                if probes is None:
                    rows, cols = np.nonzero(masks[K])
                    vals = prod[rows, cols]
                else:
                    rows, cols = probes[K]
                    vals = np.einsum("ij,ji->i", AI[rows], AJ[:, cols])
                bad = np.nonzero(vals != vals[0])[0]
                if bad.size:
                    j = int(bad[0])
                    return {
                        "colors": [I, J],
                        "target": K,
                        "pairs": [[int(rows[0]), int(cols[0])], [int(rows[j]), int(cols[j])]],
                        "counts": [int(vals[0]), int(vals[j])],
                    }
    return None


def validate_axioms(cc: CoherentConfiguration, sample: Optional[int] = None,
                    rng=None) -> ValidationReport:
    """Check the four coherent-configuration axioms.

    Axiom 2 (colors partition ``X x X`` compatibly with the fibers) is
    structural once the configuration has been built; axioms 1, 3 and 4 are
    checked exhaustively.  Pass ``sample`` to only probe that many pairs per
    color for axiom 4, which is meant for ``n`` in the thousands.
    """
    report = ValidationReport(rank=cc.rank, sampled=sample is not None)
    for axiom, witness in (
        (1, _check_identity(cc)),
        (2, None),
        (3, _check_transpose(cc)),
    ):
        report.axioms[axiom] = witness is None
        if witness is not None:
            report.witnesses[axiom] = witness
    w4 = _check_products(cc, sample=sample, rng=rng)
    report.axioms[4] = w4 is None
    if w4 is not None:
        report.witnesses[4] = w4
    if report.ok:
        report.fiber_commutative, report.fiber_symmetric = fiber_flags(cc)
    return report


def intersection_numbers(cc: CoherentConfiguration) -> np.ndarray:
    """Integer tensor ``p[I, J, K]`` with ``A_I A_J = sum_K p[I, J, K] A_K``.

    Counts are read at every pair of color ``K`` and must agree; a mismatch
    means axiom 4 fails.
    """
    tensor = _cached_tensor(cc)
    if tensor is not None:
        return tensor
    rank = cc.rank
    p = np.zeros((rank, rank, rank), dtype=np.int64)
    masks = [cc.color == I for I in range(rank)]
    for I in range(rank):
        AI = masks[I].astype(np.int64)
        for J in range(rank):
            if cc.colors[I].block[1] != cc.colors[J].block[0]:
                continue
            prod = AI @ masks[J].astype(np.int64)
            for K in range(rank):
                vals = prod[masks[K]]
                if np.any(vals != vals[0]):
                    raise ConfigurationError(
                        f"A_{I} A_{J} is not constant on color {K} (axiom 4 fails)"
                    )
                p[I, J, K] = vals[0]
    p.setflags(write=False)
    cc.__dict__["_intersection_tensor"] = p
    return p


def _cached_tensor(cc):
    return cc.__dict__.get("_intersection_tensor")


def row_degrees(cc: CoherentConfiguration) -> np.ndarray:
    """Constant row sum of each color's adjacency matrix."""
    p = intersection_numbers(cc)
    deg = np.zeros(cc.rank, dtype=np.int64)
    for c in cc.colors:
        k = c.block[0]
        E = cc.identity_color(k)
        deg[c.id] = p[c.id, c.transpose, E]
    return deg


def fiber_flags(cc: CoherentConfiguration) -> tuple[bool, bool]:
    """``(fiber_commutative, fiber_symmetric)`` decided on the integer tensor."""
    return _fiber_commutative_witness(cc) is None, all(
        c.transpose == c.id for c in cc.colors if c.block[0] == c.block[1]
    )


def _fiber_commutative_witness(cc):
    p = intersection_numbers(cc)
    for k in range(cc.num_fibers):
        diag = cc.colors_in_block(k, k)
        for a, I in enumerate(diag):
            for J in diag[a + 1:]:
                if not np.array_equal(p[I, J], p[J, I]):
                    return k, (I, J)
    return None


def require_fiber_commutative(cc: CoherentConfiguration) -> None:
    w = _fiber_commutative_witness(cc)
    if w is not None:
        k, (I, J) = w
        raise FiberCommutativityError(
            f"fiber index {k}: colors {I} and {J} do not commute (A_{I} A_{J} != A_{J} A_{I})",
            fiber=k, colors=(I, J),
        )
