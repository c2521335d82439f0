"""
Exhaustive small-order experiments and the end-to-end prolongation pipeline.

The Brualdi scan runs over reduced squares only. Maximum partial
transversal length is an isotopy invariant and every square is isotopic to
a reduced one, so the reduced squares cover every order-n square.
"""

from __future__ import annotations

import logging
import multiprocessing
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Tuple

import numpy as np
from tqdm import tqdm

from quasigroup_prolong.utils.core import (
    LatinSquare,
    Permutation,
    QuasigroupError,
    UnsupportedOrderError,
    apply_isotopy,
    random_square,
)
from quasigroup_prolong.utils.isotopy import MAX_ORDER as ISOTOPY_MAX_ORDER
from quasigroup_prolong.utils.mappings import (
    MappingKind,
    classify,
    max_partial_transversal,
    transversal_to_mapping,
)
from quasigroup_prolong.utils.prolong import Prolongation, prolong_classical, prolong_quasicomplete

logger = logging.getLogger(__name__)

MAX_SCAN_ORDER = 6

# Reduced Latin squares of orders 1..6
REDUCED_SQUARE_COUNTS = {1: 1, 2: 1, 3: 1, 4: 4, 5: 56, 6: 9408}

COMMANDS = ("validate", "mappings", "prolong", "prolong-any", "isotopy", "brualdi", "gen")


class BrualdiCounterexampleError(QuasigroupError):
    """A square whose maximum partial transversal is shorter than n-1"""

    def __init__(self, message, square=None, length=None):
        super().__init__(message)
        self.square = square
        self.length = length


@dataclass
class ScanReport:
    order: int
    squares_scanned: int = 0
    min_max_transversal: Optional[int] = None
    admissible: int = 0
    witnesses: List[Tuple[LatinSquare, int]] = field(default_factory=list)

    def add(self, square: LatinSquare, length: int) -> None:
        self.squares_scanned += 1
        if self.min_max_transversal is None or length < self.min_max_transversal:
            self.min_max_transversal = length
        if length == self.order:
            self.admissible += 1
        if length < self.order - 1:
            self.witnesses.append((square, length))

    def merge(self, other: "ScanReport") -> "ScanReport":
        """Combine two partial reports: min of minima, sums of counts, union of witnesses"""
        minima = [m for m in (self.min_max_transversal, other.min_max_transversal) if m is not None]
        return ScanReport(
            order=self.order,
            squares_scanned=self.squares_scanned + other.squares_scanned,
            min_max_transversal=min(minima) if minima else None,
            admissible=self.admissible + other.admissible,
            witnesses=self.witnesses + other.witnesses,
        )

    def summary(self) -> str:
        lines = [
            f"order: {self.order}",
            f"reduced squares scanned: {self.squares_scanned} (expected {REDUCED_SQUARE_COUNTS.get(self.order)})",
            f"shortest maximum partial transversal: {self.min_max_transversal}",
            f"admissible (full transversal): {self.admissible}",
            f"squares below n-1: {len(self.witnesses)}",
        ]
        for square, length in self.witnesses:
            lines.append(f"counterexample with maximum {length}:")
            lines.append(square.to_text().rstrip())
        return "\n".join(lines)


@dataclass(frozen=True)
class RunConfig:
    """Command line flags merged over the stored configuration"""

    command: str
    inputs: Tuple[str, ...] = ()
    kind: str = "all"
    limit: Optional[int] = None
    method: Optional[str] = None
    sigma: Optional[str] = None
    a: Optional[int] = None
    x1: Optional[int] = None
    order: Optional[int] = None
    threads: int = 1
    progress: bool = False
    output: Optional[str] = None
    isotopy_max_order: int = ISOTOPY_MAX_ORDER

    def check(self) -> None:
        if self.command not in COMMANDS:
            raise QuasigroupError(f"Unknown command {self.command!r}")
        wanted_inputs = {"isotopy": 2, "brualdi": 0, "gen": 0}.get(self.command, 1)
        if len(self.inputs) != wanted_inputs:
            raise QuasigroupError(f"{self.command} takes {wanted_inputs} input file(s), got {len(self.inputs)}")
        for name in ("limit", "order", "threads", "isotopy_max_order"):
            value = getattr(self, name)
            if value is None and name in ("limit", "order"):
                continue
            if not isinstance(value, int) or isinstance(value, bool):
                raise QuasigroupError(f"{name} must be an integer, got {value!r}")
        if self.limit is not None and self.limit < 0:
            raise QuasigroupError(f"--limit must be non-negative, got {self.limit}")
        if self.threads < 1:
            raise QuasigroupError(f"--threads must be at least 1, got {self.threads}")
        if self.command == "brualdi" and self.order is None:
            raise QuasigroupError("brualdi needs --order")
        if self.command == "prolong":
            if self.method is None:
                raise QuasigroupError("prolong needs --method")
            if self.method == "belyavskaya" and self.a is None:
                raise QuasigroupError("the belyavskaya method needs --a")
            if self.method != "belyavskaya" and self.a is not None:
                raise QuasigroupError("--a only applies to the belyavskaya method")
            if self.method != "dd" and self.x1 is not None:
                raise QuasigroupError("--x1 only applies to the dd method")


def _check_scan_order(n: int) -> None:
    if not 1 <= n <= MAX_SCAN_ORDER:
        raise UnsupportedOrderError(f"Exhaustive scans support orders 1..{MAX_SCAN_ORDER}, got {n}")


def _fill(table: List[List[int]], row_limit: Optional[int] = None) -> Iterator[Tuple[Tuple[int, ...], ...]]:
    """Complete the zero cells (of the first row_limit rows) row-major, smallest symbol first"""
    n = len(table)
    full = (1 << n) - 1
    row_used = [0] * n
    col_used = [0] * n
    empty = []
    for i in range(n):
        for j in range(n):
            symbol = table[i][j]
            if symbol:
                row_used[i] |= 1 << (symbol - 1)
                col_used[j] |= 1 << (symbol - 1)
            elif row_limit is None or i < row_limit:
                empty.append((i, j))

    def visit(k):
        if k == len(empty):
            yield tuple(tuple(row) for row in table)
            return
        i, j = empty[k]
        free = full & ~(row_used[i] | col_used[j])
        while free:
            bit = free & -free
            free ^= bit
            table[i][j] = bit.bit_length()
            row_used[i] |= bit
            col_used[j] |= bit
            yield from visit(k + 1)
            row_used[i] ^= bit
            col_used[j] ^= bit
        table[i][j] = 0

    yield from visit(0)


def _scan_units(n: int) -> List[Tuple[Tuple[int, ...], ...]]:
    """Split the reduced squares by their second row, in lexicographic order"""
    start = [[0] * n for _ in range(n)]
    for k in range(n):
        start[0][k] = k + 1
        start[k][0] = k + 1
    # rows 3..n stay open, so each unit is one completion of row 2
    return list(_fill(start, row_limit=2))


def _reduced_from(unit) -> Iterator[Tuple[Tuple[int, ...], ...]]:
    return _fill([list(row) for row in unit])


def enumerate_reduced_squares(n: int) -> Iterator[LatinSquare]:
    """Every square with first row and column 1..n, each once, in lexicographic cell order"""
    _check_scan_order(n)
    for unit in _scan_units(n):
        for rows in _reduced_from(unit):
            yield LatinSquare(rows)


def _scan_unit(unit) -> ScanReport:
    report = ScanReport(len(unit))
    for rows in _reduced_from(unit):
        square = LatinSquare(rows)
        report.add(square, len(max_partial_transversal(square)))
    return report


def brualdi_scan(n: int, threads: int = 1, progress: bool = False) -> ScanReport:
    """Maximum partial transversal of every reduced order-n square; witnesses below n-1 are collected"""
    _check_scan_order(n)
    units = _scan_units(n)
    report = ScanReport(n)
    logger.info("Scanning %d reduced squares of order %d in %d parts", REDUCED_SQUARE_COUNTS[n], n, len(units))

    with tqdm(total=REDUCED_SQUARE_COUNTS[n], desc=f"order {n}", unit="square", disable=not progress) as bar:
        if threads > 1 and len(units) > 1:
            with multiprocessing.Pool(processes=min(threads, len(units))) as pool:
                # imap keeps unit order, so the merged report does not depend on scheduling
                for part in pool.imap(_scan_unit, units, chunksize=1):
                    report = report.merge(part)
                    bar.update(part.squares_scanned)
        else:
            for unit in units:
                part = _scan_unit(unit)
                report = report.merge(part)
                bar.update(part.squares_scanned)

    if report.squares_scanned != REDUCED_SQUARE_COUNTS[n]:
        raise QuasigroupError(
            f"Enumerated {report.squares_scanned} reduced squares of order {n}, expected {REDUCED_SQUARE_COUNTS[n]}"
        )
    logger.info(
        "Order %d: %d squares, shortest maximum transversal %s, %d below n-1",
        n,
        report.squares_scanned,
        report.min_max_transversal,
        len(report.witnesses),
    )
    return report


def prolong_any(square: LatinSquare) -> Prolongation:
    """Prolong through a maximum partial transversal, preferring the classical construction"""
    n = square.order
    transversal = max_partial_transversal(square)
    if len(transversal) < n - 1:
        raise BrualdiCounterexampleError(
            f"Maximum partial transversal has length {len(transversal)} < n-1 = {n - 1}: "
            "this square has neither a complete nor a quasicomplete mapping",
            square=square,
            length=len(transversal),
        )

    sigma = transversal_to_mapping(square, transversal)
    info = classify(square, sigma)
    if info.kind is MappingKind.COMPLETE:
        logger.info("Order %d: complete mapping %s, using the classical construction", n, sigma)
        return prolong_classical(square, sigma)

    x1 = min(info.special_preimages)
    logger.info("Order %d: quasicomplete mapping %s, using the quasicomplete construction with x1=%d", n, sigma, x1)
    return prolong_quasicomplete(square, sigma, x1)


def prolong_chain(square: LatinSquare, steps: int) -> List[Prolongation]:
    """Apply prolong_any repeatedly, growing the order by one per step"""
    chain = []
    current = square
    for _ in range(steps):
        prolongation = prolong_any(current)
        chain.append(prolongation)
        current = prolongation.result
    return chain


def isotope_spot_check(n: int, samples: int, rng: Optional[np.random.Generator] = None) -> List[Tuple[LatinSquare, LatinSquare]]:
    """Pairs (square, random isotope) whose maximum partial transversal lengths differ; expected empty"""
    if rng is None:
        rng = np.random.default_rng()
    mismatches = []
    for _ in range(samples):
        square = random_square(n, rng)
        alpha, beta, gamma = (Permutation(rng.permutation(n) + 1) for _ in range(3))
        isotope = apply_isotopy(square, alpha, beta, gamma)
        if len(max_partial_transversal(square)) != len(max_partial_transversal(isotope)):
            mismatches.append((square, isotope))
    return mismatches
