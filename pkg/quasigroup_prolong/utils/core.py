"""
Latin squares, permutations and the plain text table format.

Every other module works on the types defined here. Symbols are 1-based,
matching the reference tables; the element adjoined by a
prolongation is always n+1.
"""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass
from typing import Iterable, List, NamedTuple, Optional, Sequence, TextIO, Tuple, Union

import numpy as np

logger = logging.getLogger(__name__)

ZERO_BASED_DIRECTIVE = "zero-based"
GROUP_KINDS = ("cyclic", "klein")


class QuasigroupError(ValueError):
    """Base class for every error raised by the package"""


class SquareFormatError(QuasigroupError):
    """A table that cannot be read or is not a Latin square"""

    def __init__(self, message, row=None, col=None):
        super().__init__(message)
        self.row = row
        self.col = col


class OrderMismatchError(QuasigroupError):
    """Operands of different orders were combined"""


class PermutationError(QuasigroupError):
    """Images that do not form a bijection on 1..n"""


class UnsupportedOrderError(QuasigroupError):
    """An order outside the range an exhaustive routine supports"""


class Cell(NamedTuple):
    row: int
    col: int


@dataclass(frozen=True)
class ValidationResult:
    """Verdict of validate(); cell and symbol locate the first violation"""

    valid: bool
    message: str = "valid Latin square"
    cell: Optional[Cell] = None
    symbol: Optional[int] = None

    def __bool__(self):
        return self.valid


@functools.total_ordering
class Permutation:
    """A bijection on 1..n stored as its image array.

    Ordering between permutations of the same order is lexicographic on the
    image array, which is the enumeration order used by the mapping search.
    """

    __slots__ = ("_images",)

    def __init__(self, images: Iterable[int]):
        images = tuple(int(value) for value in images)
        order = len(images)
        if order == 0:
            raise PermutationError("A permutation needs at least one point")
        if sorted(images) != list(range(1, order + 1)):
            raise PermutationError(
                f"{','.join(map(str, images))} is not a bijection on 1..{order}"
            )
        self._images = images

    @classmethod
    def identity(cls, order: int) -> "Permutation":
        return cls(range(1, order + 1))

    @classmethod
    def parse(cls, text: str) -> "Permutation":
        """Read the comma separated image format, e.g. ``4,2,1,5,3``"""
        tokens = [token.strip() for token in text.strip().split(",")]
        try:
            images = [int(token) for token in tokens]
        except ValueError:
            raise PermutationError(f"Malformed permutation {text!r}: expected comma separated integers")
        return cls(images)

    @property
    def order(self) -> int:
        return len(self._images)

    @property
    def images(self) -> Tuple[int, ...]:
        return self._images

    def __call__(self, x: int) -> int:
        return self._images[x - 1]

    def __len__(self):
        return len(self._images)

    def __iter__(self):
        return iter(self._images)

    def __eq__(self, other):
        if not isinstance(other, Permutation):
            return NotImplemented
        return self._images == other._images

    def __lt__(self, other):
        if not isinstance(other, Permutation):
            return NotImplemented
        return self._images < other._images

    def __hash__(self):
        return hash(self._images)

    def __repr__(self):
        return f"Permutation({self})"

    def __str__(self):
        return ",".join(map(str, self._images))

    def inverse(self) -> "Permutation":
        inverse = [0] * self.order
        for x, image in enumerate(self._images, start=1):
            inverse[image - 1] = x
        return Permutation(inverse)

    def compose(self, other: "Permutation") -> "Permutation":
        """Return ``self ∘ other``, the map x -> self(other(x))"""
        if other.order != self.order:
            raise OrderMismatchError(f"Cannot compose permutations of orders {self.order} and {other.order}")
        return Permutation(self._images[image - 1] for image in other._images)

    def is_identity(self) -> bool:
        return all(image == x for x, image in enumerate(self._images, start=1))

    def as_array(self) -> np.ndarray:
        return np.array(self._images, dtype=np.int64)


class LatinSquare:
    """An immutable order-n Latin square over the symbols 1..n.

    cell(i, j) is the product i·j of the quasigroup the square tabulates.
    The constructor validates its input and raises SquareFormatError on the
    first violation.
    """

    __slots__ = ("_cells", "_rows", "_table")

    def __init__(self, cells):
        try:
            array = np.array(cells, dtype=np.int64)
        except (TypeError, ValueError) as e:
            raise SquareFormatError(f"table is not a rectangular array of integers: {e}")
        result = validate(array)
        if not result.valid:
            row, col = result.cell if result.cell else (None, None)
            raise SquareFormatError(result.message, row=row, col=col)
        array.setflags(write=False)
        self._cells = array
        self._rows = tuple(tuple(int(value) for value in row) for row in array)
        # 0-based copy for the search loops, which index plain tuples much faster than numpy
        self._table = tuple(tuple(value - 1 for value in row) for row in self._rows)

    @property
    def order(self) -> int:
        return len(self._rows)

    @property
    def cells(self) -> np.ndarray:
        return self._cells

    @property
    def rows(self) -> Tuple[Tuple[int, ...], ...]:
        return self._rows

    @property
    def table(self) -> Tuple[Tuple[int, ...], ...]:
        """The square with rows, columns and symbols shifted to 0..n-1"""
        return self._table

    def cell(self, row: int, col: int) -> int:
        return self._rows[row - 1][col - 1]

    def diagonal(self) -> Tuple[int, ...]:
        return tuple(self._rows[x][x] for x in range(self.order))

    def is_idempotent(self) -> bool:
        return all(value == x for x, value in enumerate(self.diagonal(), start=1))

    def identity_element(self) -> Optional[int]:
        """Return the two-sided identity if the square is a loop"""
        natural = tuple(range(1, self.order + 1))
        for e in range(1, self.order + 1):
            if self._rows[e - 1] == natural and all(self._rows[x][e - 1] == x + 1 for x in range(self.order)):
                return e
        return None

    def is_loop(self) -> bool:
        return self.identity_element() is not None

    def transpose(self) -> "LatinSquare":
        return LatinSquare(self._cells.T)

    def to_text(self, comments: Sequence[str] = ()) -> str:
        return serialize_square(self, comments)

    def __eq__(self, other):
        if not isinstance(other, LatinSquare):
            return NotImplemented
        return self._rows == other._rows

    def __hash__(self):
        return hash(self._rows)

    def __repr__(self):
        return f"LatinSquare(order={self.order}, rows={[list(row) for row in self._rows]})"

    def __str__(self):
        return self.to_text()


def validate(square) -> ValidationResult:
    """Check the Latin property of an n×n array of symbols.

    Never raises. On failure the result names the first violating cell in
    row-major order: the cell whose symbol already occurred earlier in its
    row or column, or which lies outside 1..n.
    """
    try:
        array = np.asarray(square)
    except ValueError:
        return ValidationResult(False, "table rows have different lengths")
    if array.ndim != 2 or array.shape[0] != array.shape[1] or array.shape[0] == 0:
        return ValidationResult(False, f"table is not a non-empty square (shape {array.shape})")

    n = array.shape[0]
    expected = np.arange(1, n + 1)
    if (np.sort(array, axis=1) == expected).all() and (np.sort(array, axis=0) == expected[:, None]).all():
        return ValidationResult(True)

    seen_in_col: List[dict] = [{} for _ in range(n)]
    for i in range(n):
        seen_in_row = {}
        for j in range(n):
            symbol = int(array[i, j])
            cell = Cell(i + 1, j + 1)
            if not 1 <= symbol <= n:
                return ValidationResult(
                    False, f"row {i + 1}, column {j + 1}: symbol {symbol} outside 1..{n}", cell, symbol
                )
            if symbol in seen_in_row:
                return ValidationResult(
                    False,
                    f"row {i + 1} repeats symbol {symbol} (columns {seen_in_row[symbol]} and {j + 1})",
                    cell,
                    symbol,
                )
            if symbol in seen_in_col[j]:
                return ValidationResult(
                    False,
                    f"column {j + 1} repeats symbol {symbol} (rows {seen_in_col[j][symbol]} and {i + 1})",
                    cell,
                    symbol,
                )
            seen_in_row[symbol] = j + 1
            seen_in_col[j][symbol] = i + 1

    # Sorting disagreed but no cell-level violation: non-integer symbols
    return ValidationResult(False, "table contains non-integer symbols")


def parse_table(source: Union[str, TextIO]) -> List[List[int]]:
    """Read the rows of a table in the text format without checking the Latin property.

    Comment lines start with ``#``. An optional ``zero-based`` directive
    before the header shifts every symbol by +1. The header holds the order
    n, followed by n rows of n whitespace separated integers.
    """
    text = source if isinstance(source, str) else source.read()
    zero_based = False
    order = None
    rows: List[List[int]] = []

    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue

        if order is None:
            if line.lower() == ZERO_BASED_DIRECTIVE:
                zero_based = True
                continue
            try:
                order = int(line)
            except ValueError:
                raise SquareFormatError(f"line {line_number}: malformed header {line!r}, expected the order n")
            if order < 1:
                raise SquareFormatError(f"line {line_number}: order must be positive, got {order}")
            continue

        if len(rows) == order:
            raise SquareFormatError(f"line {line_number}: unexpected content after {order} rows")

        row_index = len(rows) + 1
        tokens = line.split()
        if len(tokens) != order:
            raise SquareFormatError(
                f"row {row_index}: expected {order} symbols, found {len(tokens)}", row=row_index
            )

        low, high = (0, order - 1) if zero_based else (1, order)
        row = []
        for col_index, token in enumerate(tokens, start=1):
            try:
                value = int(token)
            except ValueError:
                raise SquareFormatError(
                    f"row {row_index}, column {col_index}: non-integer token {token!r}",
                    row=row_index,
                    col=col_index,
                )
            if not low <= value <= high:
                raise SquareFormatError(
                    f"row {row_index}, column {col_index}: symbol {value} out of range {low}..{high}",
                    row=row_index,
                    col=col_index,
                )
            row.append(value + 1 if zero_based else value)
        rows.append(row)

    if order is None:
        raise SquareFormatError("missing header line with the order n")
    if len(rows) < order:
        raise SquareFormatError(f"expected {order} rows, found {len(rows)}", row=len(rows) + 1)

    return rows


def parse_square(source: Union[str, TextIO]) -> LatinSquare:
    """Read and validate a square; duplicates raise SquareFormatError naming the row or column"""
    return LatinSquare(parse_table(source))


def serialize_square(square: LatinSquare, comments: Sequence[str] = ()) -> str:
    lines = [f"# {comment}" for comment in comments]
    lines.append(str(square.order))
    lines.extend(" ".join(map(str, row)) for row in square.rows)
    return "\n".join(lines) + "\n"


def apply_isotopy(square: LatinSquare, alpha: Permutation, beta: Permutation, gamma: Permutation) -> LatinSquare:
    """Return M with M(alpha(x), beta(y)) = gamma(L(x, y))"""
    n = square.order
    for name, permutation in (("alpha", alpha), ("beta", beta), ("gamma", gamma)):
        if permutation.order != n:
            raise OrderMismatchError(f"{name} has order {permutation.order}, square has order {n}")

    gamma_map = np.concatenate(([0], gamma.as_array()))
    result = np.empty((n, n), dtype=np.int64)
    result[np.ix_(alpha.as_array() - 1, beta.as_array() - 1)] = gamma_map[square.cells]
    return LatinSquare(result)


def cyclic_table(n: int) -> LatinSquare:
    """Addition mod n, residue k written as symbol k+1"""
    if n < 1:
        raise UnsupportedOrderError(f"Cyclic group order must be positive, got {n}")
    residues = np.arange(n)
    return LatinSquare(np.add.outer(residues, residues) % n + 1)


def klein_table() -> LatinSquare:
    residues = np.arange(4)
    return LatinSquare(np.bitwise_xor.outer(residues, residues) + 1)


def group_table(kind: str, n: Optional[int] = None) -> LatinSquare:
    if kind == "cyclic":
        if n is None:
            raise QuasigroupError("The cyclic table needs an order")
        return cyclic_table(n)
    if kind == "klein":
        return klein_table()
    raise QuasigroupError(f"Unknown group kind {kind!r}, expected one of {', '.join(GROUP_KINDS)}")


def random_square(n: int, rng: Optional[np.random.Generator] = None) -> LatinSquare:
    """Fill an order-n square cell by cell with shuffled candidates, backtracking on dead ends"""
    if n < 1:
        raise UnsupportedOrderError(f"Order must be positive, got {n}")
    if rng is None:
        rng = np.random.default_rng()

    table = [[0] * n for _ in range(n)]
    row_used = [0] * n
    col_used = [0] * n
    full = (1 << n) - 1

    def fill(k):
        if k == n * n:
            return True
        i, j = divmod(k, n)
        free = full & ~(row_used[i] | col_used[j])
        if not free:
            return False
        for symbol in rng.permutation(n):
            bit = 1 << int(symbol)
            if not free & bit:
                continue
            table[i][j] = int(symbol) + 1
            row_used[i] |= bit
            col_used[j] |= bit
            if fill(k + 1):
                return True
            row_used[i] &= ~bit
            col_used[j] &= ~bit
        return False

    fill(0)
    return LatinSquare(table)
