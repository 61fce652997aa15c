"""Integer-partition data model and Young-lattice neighborhood structure.

A market state with capitalizations ``n_1 >= ... >= n_k`` (integer money
units) is a partition shape.  Two equivalent descriptions are used:

* :class:`FrequencyVector` -- ranked block sizes;
* :class:`PartitionClass` -- multiplicities ``c_j`` counting blocks of size j.

The down/up neighbor maps implement uniform box deletion and the Chinese
Restaurant insertion rule, aggregated by shape.  Down-move weights are exact
rationals; up-move weights are floats since (alpha, theta) enter.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from .errors import DomainError
from .params import PDParams


@dataclass(frozen=True)
class FrequencyVector:
    """Ranked block sizes n_1 >= ... >= n_k >= 1. Empty means n = 0."""

    blocks: tuple[int, ...] = ()

    def __post_init__(self):
        b = tuple(int(x) for x in self.blocks)
        object.__setattr__(self, "blocks", b)
        if any(x < 1 for x in b):
            raise DomainError(f"block sizes must be positive: {b}")
        if any(b[i] < b[i + 1] for i in range(len(b) - 1)):
            raise DomainError(f"block sizes must be non-increasing: {b}")

    @property
    def n(self) -> int:
        return sum(self.blocks)

    @property
    def k(self) -> int:
        return len(self.blocks)

    def __str__(self):
        return "[" + ",".join(map(str, self.blocks)) + "]"


@dataclass(frozen=True)
class PartitionClass:
    """Multiplicity vector (c_1, ..., c_m); canonical form drops trailing zeros."""

    mult: tuple[int, ...] = ()

    def __post_init__(self):
        m = tuple(int(x) for x in self.mult)
        while m and m[-1] == 0:
            m = m[:-1]
        object.__setattr__(self, "mult", m)
        if any(x < 0 for x in m):
            raise DomainError(f"multiplicities must be non-negative: {m}")

    @property
    def n(self) -> int:
        return sum((j + 1) * c for j, c in enumerate(self.mult))

    @property
    def k(self) -> int:
        return sum(self.mult)

    def __str__(self):
        return "{" + ",".join(map(str, self.mult)) + "}"


def freq_to_class(f: FrequencyVector) -> PartitionClass:
    """Count blocks of each size."""
    if not f.blocks:
        return PartitionClass()
    mult = [0] * f.blocks[0]
    for b in f.blocks:
        mult[b - 1] += 1
    return PartitionClass(tuple(mult))


def class_to_freq(c: PartitionClass) -> FrequencyVector:
    """Expand multiplicities back into ranked block sizes."""
    blocks = []
    for j in range(len(c.mult), 0, -1):
        blocks.extend([j] * c.mult[j - 1])
    return FrequencyVector(tuple(blocks))


def multiplicity(c: PartitionClass) -> int:
    """Number of set partitions in the class: n! / prod(c_j! * (j!)^c_j), exact."""
    num = factorial(c.n)
    den = 1
    for j, cj in enumerate(c.mult, start=1):
        den *= factorial(cj) * factorial(j) ** cj
    return num // den


def _partitions_rev_lex(n: int, largest: int):
    """Yield descending partitions of n in reverse-lexicographic order."""
    if n == 0:
        yield ()
        return
    for first in range(min(n, largest), 0, -1):
        for rest in _partitions_rev_lex(n - first, first):
            yield (first,) + rest


def enumerate_classes(n: int) -> list[PartitionClass]:
    """All partition classes of n, reverse-lexicographic on block sizes.

    n = 0 yields the singleton list with the empty class.
    """
    if n < 0:
        raise DomainError(f"n must be non-negative; got {n}")
    return [
        freq_to_class(FrequencyVector(p)) for p in _partitions_rev_lex(n, n)
    ]


def _remove_box(blocks: tuple[int, ...], i: int) -> FrequencyVector:
    b = list(blocks)
    b[i] -= 1
    if b[i] == 0:
        del b[i]
    b.sort(reverse=True)
    return FrequencyVector(tuple(b))


def _add_box(blocks: tuple[int, ...], i: int | None) -> FrequencyVector:
    b = list(blocks)
    if i is None:
        b.append(1)
    else:
        b[i] += 1
    b.sort(reverse=True)
    return FrequencyVector(tuple(b))


def down_neighbors(
    f: FrequencyVector,
) -> list[tuple[FrequencyVector, Fraction]]:
    """Shapes reachable by uniform deletion of one box, with exact weights.

    Removing a box from any of the ``j * c_j`` boxes sitting in size-j blocks
    produces the same shape, so weights aggregate to ``j * c_j / n``.
    """
    n = f.n
    if n == 0:
        return []
    c = freq_to_class(f)
    out = []
    for j in range(len(c.mult), 0, -1):
        cj = c.mult[j - 1]
        if cj == 0:
            continue
        # shrink one block of size j
        idx = f.blocks.index(j)
        out.append((_remove_box(f.blocks, idx), Fraction(j * cj, n)))
    return out


def up_neighbors(
    f: FrequencyVector, p: PDParams
) -> list[tuple[FrequencyVector, float]]:
    """Shapes reachable by one Chinese Restaurant insertion, with weights.

    Growing any of the c_j blocks of size j has aggregated probability
    ``c_j * (j - alpha) / (n + theta)``; opening a new block has probability
    ``(theta + alpha * k) / (n + theta)``.
    """
    n, k = f.n, f.k
    if n == 0:
        # first unit of money always opens the first block
        return [(FrequencyVector((1,)), 1.0)]
    a, t = p.alpha, p.theta
    denom = n + t
    c = freq_to_class(f)
    out = []
    for j in range(len(c.mult), 0, -1):
        cj = c.mult[j - 1]
        if cj == 0:
            continue
        idx = f.blocks.index(j)
        out.append((_add_box(f.blocks, idx), cj * (j - a) / denom))
    w_new = (t + a * k) / denom
    if w_new > 0:
        out.append((_add_box(f.blocks, None), w_new))
    return out
