"""
Conjugated mappings and their classification, plus the exact searches for
complete mappings, quasicomplete mappings and maximum partial transversals.

Every search is plain backtracking over rows with bitmask domains for the
used columns and symbols. Results come out in lexicographic order of the
permutation's image array (or of the (row, col) sequence for transversals).
"""

from __future__ import annotations

import itertools
import logging
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import FrozenSet, Iterator, List, Optional, Tuple

from quasigroup_prolong.utils.core import (
    LatinSquare,
    OrderMismatchError,
    Permutation,
    QuasigroupError,
)

logger = logging.getLogger(__name__)


class MappingError(QuasigroupError):
    """A mapping, transversal or parameter that does not fit the request"""


class MappingKind(str, Enum):
    COMPLETE = "complete"
    QUASICOMPLETE = "quasicomplete"
    NEITHER = "neither"


@dataclass(frozen=True)
class ConjugateMap:
    """The map x -> x·sigma(x); not necessarily a bijection"""

    order: int
    values: Tuple[int, ...]

    def __call__(self, x: int) -> int:
        return self.values[x - 1]

    def image(self) -> FrozenSet[int]:
        return frozenset(self.values)

    def multiplicities(self) -> Counter:
        return Counter(self.values)

    def is_bijection(self) -> bool:
        return len(self.image()) == self.order

    def as_permutation(self) -> Permutation:
        if not self.is_bijection():
            raise MappingError(f"Conjugate {self} is not a bijection")
        return Permutation(self.values)

    def __str__(self):
        return ",".join(map(str, self.values))


@dataclass(frozen=True)
class MappingClassification:
    sigma: Permutation
    kind: MappingKind
    conjugate: ConjugateMap
    defect: FrozenSet[int]
    special: Optional[int] = None
    special_preimages: Optional[Tuple[int, int]] = None

    @property
    def defect_element(self) -> Optional[int]:
        """The single missed symbol d of a quasicomplete mapping"""
        if self.kind is not MappingKind.QUASICOMPLETE:
            return None
        return next(iter(self.defect))

    def describe(self) -> str:
        text = f"{self.sigma} {self.kind.value} conjugate={self.conjugate}"
        if self.kind is MappingKind.QUASICOMPLETE:
            x1, x2 = self.special_preimages
            text += f" d={self.defect_element} a={self.special} preimages={x1},{x2}"
        elif self.kind is MappingKind.NEITHER:
            text += f" defect={','.join(map(str, sorted(self.defect)))}"
        return text


@dataclass(frozen=True)
class PartialTransversal:
    """Cells (row, col, symbol) in distinct rows, columns and symbols, sorted by row"""

    cells: Tuple[Tuple[int, int, int], ...]

    def __len__(self):
        return len(self.cells)

    @property
    def rows(self) -> Tuple[int, ...]:
        return tuple(cell[0] for cell in self.cells)

    @property
    def cols(self) -> Tuple[int, ...]:
        return tuple(cell[1] for cell in self.cells)

    @property
    def symbols(self) -> Tuple[int, ...]:
        return tuple(cell[2] for cell in self.cells)

    def check(self, square: LatinSquare) -> None:
        n = square.order
        for row, col, symbol in self.cells:
            if not (1 <= row <= n and 1 <= col <= n):
                raise MappingError(f"Cell ({row},{col}) lies outside the order-{n} square")
            if square.cell(row, col) != symbol:
                raise MappingError(
                    f"Cell ({row},{col}) holds {square.cell(row, col)}, transversal claims {symbol}"
                )
        for name, values in (("rows", self.rows), ("columns", self.cols), ("symbols", self.symbols)):
            if len(set(values)) != len(values):
                raise MappingError(f"Transversal repeats {name}: {values}")


def _check_orders(square: LatinSquare, sigma: Permutation) -> None:
    if sigma.order != square.order:
        raise OrderMismatchError(f"Mapping has order {sigma.order}, square has order {square.order}")


def conjugate(square: LatinSquare, sigma: Permutation) -> ConjugateMap:
    _check_orders(square, sigma)
    return ConjugateMap(square.order, tuple(square.cell(x, sigma(x)) for x in range(1, square.order + 1)))


def classify(square: LatinSquare, sigma: Permutation) -> MappingClassification:
    conj = conjugate(square, sigma)
    n = square.order
    counts = conj.multiplicities()
    defect = frozenset(range(1, n + 1)) - frozenset(counts)

    if not defect:
        return MappingClassification(sigma, MappingKind.COMPLETE, conj, defect)

    if len(defect) == 1:
        doubled = [symbol for symbol, count in counts.items() if count == 2]
        # n values over n-1 symbols: exactly one symbol is hit twice
        assert len(doubled) == 1 and max(counts.values()) == 2, f"pigeonhole violated for {conj}"
        special = doubled[0]
        preimages = tuple(x for x in range(1, n + 1) if conj(x) == special)
        return MappingClassification(sigma, MappingKind.QUASICOMPLETE, conj, defect, special, preimages)

    return MappingClassification(sigma, MappingKind.NEITHER, conj, defect)


def _search(table, allow_repeat: bool) -> Iterator[Tuple[Tuple[int, ...], bool]]:
    """Yield (images, repeated) in lexicographic order of images.

    With allow_repeat a single symbol may be produced twice, which is
    exactly the complete and quasicomplete mappings together.
    """
    n = len(table)
    images = [0] * n

    def extend(x, used_cols, used_syms, repeated):
        if x == n:
            yield tuple(images), repeated
            return
        row = table[x]
        for col in range(n):
            col_bit = 1 << col
            if used_cols & col_bit:
                continue
            sym_bit = 1 << row[col]
            if used_syms & sym_bit:
                if repeated or not allow_repeat:
                    continue
                images[x] = col + 1
                yield from extend(x + 1, used_cols | col_bit, used_syms, True)
            else:
                images[x] = col + 1
                yield from extend(x + 1, used_cols | col_bit, used_syms | sym_bit, repeated)

    yield from extend(0, 0, 0, False)


def iter_mappings(square: LatinSquare, kind: Optional[MappingKind] = None) -> Iterator[Tuple[Permutation, MappingKind]]:
    """Lazily enumerate mappings of the requested kind, or both kinds when kind is None"""
    if kind is MappingKind.NEITHER:
        raise MappingError("Only complete and quasicomplete mappings can be enumerated")

    allow_repeat = kind is not MappingKind.COMPLETE
    for images, repeated in _search(square.table, allow_repeat):
        found = MappingKind.QUASICOMPLETE if repeated else MappingKind.COMPLETE
        if kind is None or found is kind:
            yield Permutation(images), found


def _take(square, kind, limit):
    if limit is not None and limit < 0:
        raise MappingError(f"Limit must be non-negative, got {limit}")
    found = [sigma for sigma, _ in itertools.islice(iter_mappings(square, kind), limit)]
    logger.debug("Found %d %s mappings of an order-%d square (limit %s)", len(found), kind.value, square.order, limit)
    return found


def find_complete_mappings(square: LatinSquare, limit: Optional[int] = None) -> List[Permutation]:
    """Complete mappings in lexicographic order; an empty result means the square is not admissible"""
    return _take(square, MappingKind.COMPLETE, limit)


def find_quasicomplete_mappings(square: LatinSquare, limit: Optional[int] = None) -> List[Permutation]:
    return _take(square, MappingKind.QUASICOMPLETE, limit)


def _max_transversal(table) -> List[Tuple[int, int, int]]:
    n = len(table)
    best: List[Tuple[int, int, int]] = []
    current: List[Tuple[int, int, int]] = []

    def visit(x, used_cols, used_syms):
        nonlocal best
        # only strictly longer transversals replace the best one
        if len(current) + (n - x) <= len(best):
            return False
        if x == n:
            best = list(current)
            return len(best) == n
        row = table[x]
        for col in range(n):
            if used_cols >> col & 1:
                continue
            symbol = row[col]
            if used_syms >> symbol & 1:
                continue
            current.append((x, col, symbol))
            if visit(x + 1, used_cols | 1 << col, used_syms | 1 << symbol):
                return True
            current.pop()
        return visit(x + 1, used_cols, used_syms)

    visit(0, 0, 0)
    return best


def max_partial_transversal(square: LatinSquare) -> PartialTransversal:
    """Exact maximum partial transversal, lexicographically least by (row, col) among the longest"""
    cells = _max_transversal(square.table)
    return PartialTransversal(tuple((x + 1, col + 1, symbol + 1) for x, col, symbol in cells))


def transversal_to_mapping(square: LatinSquare, transversal: PartialTransversal) -> Permutation:
    """Read the row -> column assignment of a transversal of length n or n-1 as a permutation.

    A length n-1 transversal is extended by sending the missing row to the
    missing column. The result is quasicomplete whenever the transversal is
    maximum; a non-maximum one may extend to a complete mapping.
    """
    n = square.order
    transversal.check(square)
    if len(transversal) < n - 1:
        raise MappingError(f"Transversal of length {len(transversal)} is shorter than n-1 = {n - 1}")

    images = [0] * n
    for row, col, _ in transversal.cells:
        images[row - 1] = col
    if len(transversal) == n - 1:
        (missing_row,) = set(range(1, n + 1)) - set(transversal.rows)
        (missing_col,) = set(range(1, n + 1)) - set(transversal.cols)
        images[missing_row - 1] = missing_col

    sigma = Permutation(images)
    kind = classify(square, sigma).kind
    if len(transversal) == n and kind is not MappingKind.COMPLETE:
        raise MappingError(f"Full transversal produced a {kind.value} mapping {sigma}")
    if kind is MappingKind.NEITHER:
        raise MappingError(f"Extended transversal produced a mapping {sigma} with defect above one")
    logger.debug("Transversal of length %d read as %s mapping %s", len(transversal), kind.value, sigma)
    return sigma
