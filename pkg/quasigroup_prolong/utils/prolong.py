"""
Prolongation: extend an order-n quasigroup to order n+1 by adjoining q = n+1.

All three constructions start from the same picture. Every cell on the
track (x, sigma(x)) is moved to the new column and row, and q takes its
place. They differ only in how they patch one track cell and the corner:

  classical        track all q, corner q
  belyavskaya      track cell of x_a keeps a, x_a's border cells become q, corner a
  dd               track cell of x1 becomes a, x1's border cells become q, corner d
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional

import numpy as np

from quasigroup_prolong.utils.core import LatinSquare, Permutation, serialize_square
from quasigroup_prolong.utils.mappings import (
    MappingClassification,
    MappingError,
    MappingKind,
    classify,
    find_complete_mappings,
    find_quasicomplete_mappings,
)

logger = logging.getLogger(__name__)


class Method(str, Enum):
    CLASSICAL = "classical"
    BELYAVSKAYA = "belyavskaya"
    # dd is the construction from a quasicomplete mapping
    DD = "dd"

    @classmethod
    def from_name(cls, name: str) -> "Method":
        try:
            return cls(name)
        except ValueError:
            raise MappingError(f"Unknown prolongation method {name!r}")


@dataclass(frozen=True)
class ProlongationSpec:
    method: Method
    sigma: Permutation
    a: Optional[int] = None
    x1: Optional[int] = None


@dataclass(frozen=True)
class Prolongation:
    result: LatinSquare
    spec: ProlongationSpec
    classification: MappingClassification

    @property
    def q(self) -> int:
        return self.result.order

    @property
    def source_order(self) -> int:
        return self.result.order - 1

    def header(self) -> List[str]:
        info = self.classification
        lines = [f"method: {self.spec.method.value}", f"sigma: {self.spec.sigma}", f"conjugate: {info.conjugate}"]
        if self.spec.method is Method.BELYAVSKAYA:
            lines.append(f"a: {self.spec.a}")
            lines.append(f"x_a: {info.conjugate.values.index(self.spec.a) + 1}")
        elif self.spec.method is Method.DD:
            x2 = next(x for x in info.special_preimages if x != self.spec.x1)
            lines.append(f"d: {info.defect_element} a: {info.special} x1: {self.spec.x1} x2: {x2}")
        lines.append(f"q: {self.q}")
        return lines

    def to_text(self) -> str:
        return serialize_square(self.result, self.header())


def _require(square: LatinSquare, sigma: Permutation, kind: MappingKind) -> MappingClassification:
    info = classify(square, sigma)
    if info.kind is not kind:
        defect = ",".join(map(str, sorted(info.defect))) or "empty"
        raise MappingError(f"Mapping {sigma} is {info.kind.value}, not {kind.value} (defect: {defect})")
    return info


def _moved_track(square: LatinSquare, info: MappingClassification) -> np.ndarray:
    """The classical table: track cells replaced by q, their values moved to the border"""
    n = square.order
    q = n + 1
    rows = np.arange(n)
    cols = info.sigma.as_array() - 1
    values = np.array(info.conjugate.values, dtype=np.int64)

    table = np.empty((n + 1, n + 1), dtype=np.int64)
    table[:n, :n] = square.cells
    table[rows, cols] = q
    table[rows, n] = values
    table[n, cols] = values
    table[n, n] = q
    return table


def _finish(table: np.ndarray, spec: ProlongationSpec, info: MappingClassification) -> Prolongation:
    prolongation = Prolongation(LatinSquare(table), spec, info)
    logger.debug("Built %s prolongation of order %d from sigma=%s", spec.method.value, prolongation.q, spec.sigma)
    return prolongation


def prolong_classical(square: LatinSquare, sigma: Permutation) -> Prolongation:
    info = _require(square, sigma, MappingKind.COMPLETE)
    return _finish(_moved_track(square, info), ProlongationSpec(Method.CLASSICAL, sigma), info)


def prolong_classical_idempotent(square: LatinSquare) -> Prolongation:
    """Classical prolongation along the diagonal; a loop with identity q when the square is idempotent"""
    identity = Permutation.identity(square.order)
    if classify(square, identity).kind is not MappingKind.COMPLETE:
        raise MappingError(f"Diagonal {','.join(map(str, square.diagonal()))} is not a bijection")
    return prolong_classical(square, identity)


def prolong_belyavskaya(square: LatinSquare, sigma: Permutation, a: int) -> Prolongation:
    n = square.order
    if not 1 <= a <= n:
        raise MappingError(f"Element a={a} is outside 1..{n}")
    info = _require(square, sigma, MappingKind.COMPLETE)
    x_a = info.conjugate.values.index(a)
    col = sigma(x_a + 1) - 1

    table = _moved_track(square, info)
    table[x_a, col] = a
    table[x_a, n] = n + 1
    table[n, col] = n + 1
    table[n, n] = a
    return _finish(table, ProlongationSpec(Method.BELYAVSKAYA, sigma, a=a), info)


def prolong_quasicomplete(square: LatinSquare, sigma: Permutation, x1: int) -> Prolongation:
    n = square.order
    info = _require(square, sigma, MappingKind.QUASICOMPLETE)
    if x1 not in info.special_preimages:
        x_first, x_second = info.special_preimages
        raise MappingError(f"x1={x1} is not a special preimage of sigma (expected {x_first} or {x_second})")
    col = sigma(x1) - 1

    # x2's border cells already carry a = conj(x2) from the moved track
    table = _moved_track(square, info)
    table[x1 - 1, col] = info.special
    table[x1 - 1, n] = n + 1
    table[n, col] = n + 1
    table[n, n] = info.defect_element
    return _finish(table, ProlongationSpec(Method.DD, sigma, x1=x1), info)


def prolong(square: LatinSquare, spec: ProlongationSpec) -> Prolongation:
    if spec.method is Method.CLASSICAL:
        return prolong_classical(square, spec.sigma)
    # a wrong mapping kind is reported before a missing parameter
    if spec.method is Method.BELYAVSKAYA:
        if spec.a is None:
            _require(square, spec.sigma, MappingKind.COMPLETE)
            raise MappingError("The Belyavskaya construction needs the element a")
        return prolong_belyavskaya(square, spec.sigma, spec.a)
    if spec.x1 is None:
        _require(square, spec.sigma, MappingKind.QUASICOMPLETE)
        raise MappingError("The quasicomplete construction needs the special preimage x1")
    return prolong_quasicomplete(square, spec.sigma, spec.x1)


def eligible_mappings(square: LatinSquare, method: Method, limit: Optional[int] = None) -> List[Permutation]:
    """Mappings the method accepts: complete ones, or quasicomplete ones for dd"""
    if method is Method.DD:
        return find_quasicomplete_mappings(square, limit)
    return find_complete_mappings(square, limit)
