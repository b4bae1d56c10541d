"""Bipartite sources and common-randomness extraction diagnostics.

A source is a joint probability table over two finite alphabets. The
functions here decide whether perfect common randomness is extractable from
its support structure, reduce correlated sources to maximally informative
binary quantizations, and turn near-agreeing function pairs into balanced
binary ones with certified masses.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .config import ENUM_BUDGET, PAIR_ENUM_BUDGET, TOL_MI, TOL_POS, TOL_PROB
from .errors import BudgetExceeded, DimensionMismatch, ValidationError
from .measures import mutual_information

__all__ = [
    "BipartiteSource",
    "CrExtractability",
    "BinaryReduction",
    "WitsenhausenSplit",
    "CrFunctionsPair",
    "CrPairStatistics",
    "CodeDistributionDiagnostics",
    "binary_reduction",
    "cr_extractable",
    "witsenhausen_binarize",
    "cr_pair_statistics",
    "code_distribution_diagnostics",
]


@dataclass(frozen=True, eq=False)
class BipartiteSource:
    """A joint distribution p(x, y) over two finite label alphabets."""

    x_alphabet: tuple
    y_alphabet: tuple
    joint: np.ndarray

    def __post_init__(self):
        x_alphabet = tuple(self.x_alphabet)
        y_alphabet = tuple(self.y_alphabet)
        if not x_alphabet or not y_alphabet:
            raise ValidationError("BipartiteSource: empty alphabet")
        if len(set(x_alphabet)) != len(x_alphabet) or len(set(y_alphabet)) != len(
            y_alphabet
        ):
            raise ValidationError("BipartiteSource: duplicate letters")
        joint = np.array(self.joint, dtype=float)
        if joint.shape != (len(x_alphabet), len(y_alphabet)):
            raise DimensionMismatch(
                f"BipartiteSource: table shape {joint.shape} does not match alphabets"
            )
        if np.any(joint < 0):
            raise ValidationError("BipartiteSource: negative probability entry")
        total = float(joint.sum())
        if abs(total - 1.0) > TOL_PROB:
            raise ValidationError(f"BipartiteSource: total mass {total!r} is not 1")
        joint.setflags(write=False)
        object.__setattr__(self, "x_alphabet", x_alphabet)
        object.__setattr__(self, "y_alphabet", y_alphabet)
        object.__setattr__(self, "joint", joint)

    @property
    def marginal_x(self) -> np.ndarray:
        return self.joint.sum(axis=1)

    @property
    def marginal_y(self) -> np.ndarray:
        return self.joint.sum(axis=0)

    def in_relative_interior(self, tol: float = TOL_POS) -> bool:
        """True when every joint entry is strictly positive (above ``tol``)."""
        return bool(np.all(self.joint > tol))

    def joint_power(self, n: int, budget: int = PAIR_ENUM_BUDGET) -> np.ndarray:
        """The i.i.d. block table p^(x)n over lexicographically ranked sequences."""
        if n < 1:
            raise ValidationError("joint_power: n must be >= 1")
        size = (len(self.x_alphabet) * len(self.y_alphabet)) ** n
        if size > budget:
            raise BudgetExceeded(f"joint_power: {size} entries exceed budget {budget}")
        table = self.joint
        for _ in range(n - 1):
            table = np.kron(table, self.joint)
        return table

    def x_sequences(self, n: int) -> list:
        return list(itertools.product(self.x_alphabet, repeat=n))

    def y_sequences(self, n: int) -> list:
        return list(itertools.product(self.y_alphabet, repeat=n))


@dataclass(frozen=True)
class BinaryReduction:
    """A maximizing binary quantization pair and its mutual information."""

    f_table: tuple
    g_table: tuple
    bits: float


def binary_reduction(src: BipartiteSource, tol_mi: float = TOL_MI) -> BinaryReduction:
    """Exhaustively maximize I(f(X); g(Y)) over binary partitions of each side.

    Tables are reported as 0/1 tuples aligned with the alphabets. Candidates
    are enumerated as bitmasks with letter i contributing bit i, and the
    first maximizer in increasing (sender mask, receiver mask) order wins,
    which resolves ties deterministically. Errors on product sources, where
    every pair scores zero.
    """
    joint = src.joint
    n_x, n_y = joint.shape
    if 2**n_x * 2**n_y > ENUM_BUDGET:
        raise BudgetExceeded("binary_reduction: too many partition pairs")
    if mutual_information(joint) <= tol_mi:
        raise ValidationError(
            "binary_reduction: source is a product distribution, no informative "
            "binary pair exists"
        )
    best_val = -1.0
    best = None
    for mask_f in range(2**n_x):
        f_bits = np.array([(mask_f >> i) & 1 for i in range(n_x)], dtype=bool)
        row0 = joint[~f_bits].sum(axis=0)
        row1 = joint[f_bits].sum(axis=0)
        for mask_g in range(2**n_y):
            g_bits = np.array([(mask_g >> i) & 1 for i in range(n_y)], dtype=bool)
            table = np.array(
                [
                    [row0[~g_bits].sum(), row0[g_bits].sum()],
                    [row1[~g_bits].sum(), row1[g_bits].sum()],
                ]
            )
            val = mutual_information(table)
            if val > best_val + 1e-12:
                best_val = val
                best = (mask_f, mask_g)
    mask_f, mask_g = best
    f_table = tuple((mask_f >> i) & 1 for i in range(n_x))
    g_table = tuple((mask_g >> i) & 1 for i in range(n_y))
    return BinaryReduction(f_table, g_table, best_val)


class _UnionFind:
    """Disjoint set union with path compression."""

    def __init__(self, size: int):
        self.parent = list(range(size))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[rj] = ri


@dataclass(frozen=True)
class CrExtractability:
    """Support-connectivity verdict for perfect common-randomness extraction."""

    extractable: bool
    component_count: int
    x_partition: tuple | None
    y_partition: tuple | None


def cr_extractable(src: BipartiteSource) -> CrExtractability:
    """Decide extractability from the support graph of the joint table.

    Letters with zero marginal mass are dropped from the bipartite support
    graph (an edge wherever p(x, y) > 0) and appended to the first block of
    the reported partition. Two or more connected components mean both
    parties can compute a common nonconstant function with certainty; a
    connected support admits no such function.
    """
    joint = src.joint
    n_x, n_y = joint.shape
    keep_x = joint.sum(axis=1) > 0
    keep_y = joint.sum(axis=0) > 0
    dsu = _UnionFind(n_x + n_y)
    for i in range(n_x):
        for j in range(n_y):
            if joint[i, j] > 0:
                dsu.union(i, n_x + j)
    roots = []
    for i in range(n_x):
        if keep_x[i]:
            r = dsu.find(i)
            if r not in roots:
                roots.append(r)
    for j in range(n_y):
        if keep_y[j]:
            r = dsu.find(n_x + j)
            if r not in roots:
                roots.append(r)
    count = len(roots)
    if count < 2:
        return CrExtractability(False, count, None, None)
    x_blocks = [[] for _ in roots]
    y_blocks = [[] for _ in roots]
    for i in range(n_x):
        block = roots.index(dsu.find(i)) if keep_x[i] else 0
        x_blocks[block].append(src.x_alphabet[i])
    for j in range(n_y):
        block = roots.index(dsu.find(n_x + j)) if keep_y[j] else 0
        y_blocks[block].append(src.y_alphabet[j])
    return CrExtractability(
        True,
        count,
        tuple(tuple(b) for b in x_blocks),
        tuple(tuple(b) for b in y_blocks),
    )


@dataclass(frozen=True)
class WitsenhausenSplit:
    """A balanced binary coarsening of a near-agreeing function pair.

    ``m_hat`` letters (in the given order) map to class one; ``theta_table``
    spells the indicator out. Both class-one masses are certified to lie in
    [sigma, sigma + 2 eps], and the coarsened functions agree with
    probability at least ``agreement_lb``.
    """

    m_hat: int
    mass_a: float
    mass_b: float
    agreement_lb: float
    theta_table: tuple


def witsenhausen_binarize(a, b, c, sigma: float, eps: float) -> WitsenhausenSplit:
    """Coarsen a shared value alphabet to a binary one with balanced masses.

    ``a`` and ``b`` are the two parties' value distributions over a common
    alphabet; ``c`` is the vector of joint agreement masses, so c <= min(a, b)
    entrywise and sum(c) >= 1 - eps. Scanning cumulative sums A_m, B_m, the
    split keeps the smallest prefix whose masses both reach ``sigma``; the
    precondition that no single letter carries more than ``eps`` traps both
    prefix masses inside [sigma, sigma + 2 eps].
    """
    a = np.asarray(a, dtype=float).reshape(-1)
    b = np.asarray(b, dtype=float).reshape(-1)
    c = np.asarray(c, dtype=float).reshape(-1)
    if not (a.size == b.size == c.size) or a.size == 0:
        raise DimensionMismatch("witsenhausen_binarize: vectors must share a length")
    if not 0.0 < sigma < 0.5:
        raise ValidationError("witsenhausen_binarize: sigma must lie in (0, 1/2)")
    if eps < 0.0:
        raise ValidationError("witsenhausen_binarize: eps must be nonnegative")
    slack = 1e-12
    for name, vec in (("a", a), ("b", b), ("c", c)):
        if np.any(vec < -slack):
            raise ValidationError(f"witsenhausen_binarize: {name} has negative mass")
    for name, vec in (("a", a), ("b", b)):
        if abs(float(vec.sum()) - 1.0) > TOL_PROB:
            raise ValidationError(f"witsenhausen_binarize: {name} does not sum to 1")
        if float(vec.max()) > eps + slack:
            raise ValidationError(
                f"witsenhausen_binarize: {name} has a letter of mass > eps"
            )
    if np.any(c > a + slack) or np.any(c > b + slack):
        raise ValidationError(
            "witsenhausen_binarize: agreement masses exceed a marginal"
        )
    if float(c.sum()) < 1.0 - eps - slack:
        raise ValidationError(
            f"witsenhausen_binarize: agreement mass {c.sum():.6f} below 1 - eps"
        )
    cum_a = np.cumsum(a)
    cum_b = np.cumsum(b)
    floor = np.minimum(cum_a, cum_b)
    hits = np.nonzero(floor >= sigma - slack)[0]
    if hits.size == 0:
        raise ValidationError("witsenhausen_binarize: no prefix reaches sigma")
    m_hat = int(hits[0]) + 1
    mass_a = float(cum_a[m_hat - 1])
    mass_b = float(cum_b[m_hat - 1])
    hi = sigma + 2.0 * eps + 1e-9
    lo = sigma - 1e-9
    if not (lo <= mass_a <= hi and lo <= mass_b <= hi):
        raise ValidationError(
            f"witsenhausen_binarize: certified interval violated, masses "
            f"({mass_a:.6f}, {mass_b:.6f}) outside [{sigma}, {sigma + 2 * eps}]"
        )
    theta = tuple(1 if k < m_hat else 0 for k in range(a.size))
    return WitsenhausenSplit(m_hat, mass_a, mass_b, 1.0 - eps, theta)


@dataclass(frozen=True, eq=False)
class CrFunctionsPair:
    """Block functions f: X^l -> values and g: Y^l -> values over a shared range."""

    x_alphabet: tuple
    y_alphabet: tuple
    l: int
    value_count: int
    f_table: Mapping
    g_table: Mapping

    def __post_init__(self):
        x_alphabet = tuple(self.x_alphabet)
        y_alphabet = tuple(self.y_alphabet)
        if self.l < 1:
            raise ValidationError("CrFunctionsPair: l must be >= 1")
        if self.value_count < 1:
            raise ValidationError("CrFunctionsPair: value_count must be >= 1")
        if len(x_alphabet) ** self.l > PAIR_ENUM_BUDGET:
            raise BudgetExceeded("CrFunctionsPair: sender domain exceeds budget")
        if len(y_alphabet) ** self.l > PAIR_ENUM_BUDGET:
            raise BudgetExceeded("CrFunctionsPair: receiver domain exceeds budget")
        f_table = dict(self.f_table)
        g_table = dict(self.g_table)
        for name, table, alphabet in (
            ("f_table", f_table, x_alphabet),
            ("g_table", g_table, y_alphabet),
        ):
            domain = list(itertools.product(alphabet, repeat=self.l))
            if set(table) != set(domain):
                raise ValidationError(
                    f"CrFunctionsPair: {name} must cover exactly the length-"
                    f"{self.l} sequences"
                )
            for seq, val in table.items():
                if not 0 <= int(val) < self.value_count:
                    raise ValidationError(
                        f"CrFunctionsPair: {name}[{seq!r}] = {val!r} out of range"
                    )
        object.__setattr__(self, "x_alphabet", x_alphabet)
        object.__setattr__(self, "y_alphabet", y_alphabet)
        object.__setattr__(self, "f_table", f_table)
        object.__setattr__(self, "g_table", g_table)


@dataclass(frozen=True)
class CrPairStatistics:
    """Exact block statistics of a function pair on an i.i.d. source."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    agreement: float


def cr_pair_statistics(
    src: BipartiteSource,
    pair: CrFunctionsPair,
    budget: int = PAIR_ENUM_BUDGET,
) -> CrPairStatistics:
    """Exact value-distribution and agreement masses by block enumeration.

    a(k) and b(k) are the pushforward masses of f and g on the i.i.d. block
    source; c(k) is the joint mass of both parties computing value k. The
    joint enumeration costs (|X| |Y|)^l table entries, guarded by ``budget``.
    """
    if tuple(pair.x_alphabet) != tuple(src.x_alphabet) or tuple(
        pair.y_alphabet
    ) != tuple(src.y_alphabet):
        raise ValidationError("cr_pair_statistics: pair and source alphabets differ")
    table = src.joint_power(pair.l, budget=budget)
    f_ranks = np.array(
        [pair.f_table[seq] for seq in src.x_sequences(pair.l)], dtype=int
    )
    g_ranks = np.array(
        [pair.g_table[seq] for seq in src.y_sequences(pair.l)], dtype=int
    )
    k = pair.value_count
    a = np.array([table[f_ranks == v].sum() for v in range(k)])
    b = np.array([table[:, g_ranks == v].sum() for v in range(k)])
    c = np.array(
        [table[np.ix_(f_ranks == v, g_ranks == v)].sum() for v in range(k)]
    )
    return CrPairStatistics(a, b, c, float(c.sum()))


@dataclass(frozen=True)
class CodeDistributionDiagnostics:
    """Concentration diagnostics of a joint value table."""

    max_joint: float
    max_marginal_a: float
    max_marginal_b: float
    diagonal_mass: float


def code_distribution_diagnostics(gamma_table) -> CodeDistributionDiagnostics:
    """Largest joint and marginal masses plus the diagonal agreement mass.

    ``gamma_table`` is a square joint probability table over a shared value
    alphabet, typically the (f, g) value pair distribution of a
    common-randomness code. Callers compare the maxima against their target
    uniformity threshold and the diagonal mass against their agreement
    target.
    """
    table = np.asarray(gamma_table, dtype=float)
    if table.ndim != 2 or table.shape[0] != table.shape[1]:
        raise ValidationError("code_distribution_diagnostics: table must be square")
    if np.any(table < -TOL_PROB):
        raise ValidationError("code_distribution_diagnostics: negative entry")
    if abs(float(table.sum()) - 1.0) > TOL_PROB:
        raise ValidationError("code_distribution_diagnostics: total mass is not 1")
    return CodeDistributionDiagnostics(
        float(table.max()),
        float(table.sum(axis=1).max()),
        float(table.sum(axis=0).max()),
        float(np.trace(table)),
    )
