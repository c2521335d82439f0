"""
Exact isotopy decision for small Latin squares.

An isotopy from L to M is a triple (alpha, beta, gamma) of permutations with
gamma(L(x, y)) = M(alpha(x), beta(y)) for all x, y. The search branches on
alpha(1) and then on beta column by column, keeping all three maps as partial
injections and propagating every forced value to a fixpoint:

  alpha(x), beta(y) known      -> gamma(L(x, y)) = M(alpha(x), beta(y))
  alpha(x), gamma(s) known     -> beta of the column holding s in row x
  beta(y), gamma(s) known      -> alpha of the row holding s in column y

Once alpha(1) and all of beta are fixed, row 1 forces gamma and gamma forces
alpha, so every leaf is a complete triple; the search is exhaustive.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from quasigroup_prolong.utils.core import (
    LatinSquare,
    OrderMismatchError,
    Permutation,
    UnsupportedOrderError,
)

logger = logging.getLogger(__name__)

MAX_ORDER = 8

UNSET = -1


@dataclass(frozen=True)
class IsotopyWitness:
    alpha: Permutation
    beta: Permutation
    gamma: Permutation

    def inverse(self) -> "IsotopyWitness":
        """The witness from M back to L"""
        return IsotopyWitness(self.alpha.inverse(), self.beta.inverse(), self.gamma.inverse())

    def compose(self, other: "IsotopyWitness") -> "IsotopyWitness":
        """Follow this witness (L to M) by other (M to N), giving L to N"""
        return IsotopyWitness(
            other.alpha.compose(self.alpha),
            other.beta.compose(self.beta),
            other.gamma.compose(self.gamma),
        )

    def verify(self, left: LatinSquare, right: LatinSquare) -> bool:
        return verify_witness(left, right, self)


def witness_to_text(witness: IsotopyWitness) -> str:
    return f"{witness.alpha}\n{witness.beta}\n{witness.gamma}\n"


def verify_witness(left: LatinSquare, right: LatinSquare, witness: IsotopyWitness) -> bool:
    """Check gamma(L(x, y)) = M(alpha(x), beta(y)) on all n² pairs"""
    n = left.order
    if right.order != n or any(p.order != n for p in (witness.alpha, witness.beta, witness.gamma)):
        return False
    gamma_map = np.concatenate(([0], witness.gamma.as_array()))
    mapped = gamma_map[left.cells]
    looked_up = right.cells[np.ix_(witness.alpha.as_array() - 1, witness.beta.as_array() - 1)]
    return bool(np.array_equal(mapped, looked_up))


def _positions(table):
    """col_of[x][s] = y with table[x][y] = s, row_of[y][s] = x with table[x][y] = s"""
    n = len(table)
    col_of = [[0] * n for _ in range(n)]
    row_of = [[0] * n for _ in range(n)]
    for x in range(n):
        for y in range(n):
            s = table[x][y]
            col_of[x][s] = y
            row_of[y][s] = x
    return col_of, row_of


class _IsotopySearch:
    """Backtracking over partial injections; state is (alpha, alpha_inv, beta, beta_inv, gamma, gamma_inv)"""

    def __init__(self, left: LatinSquare, right: LatinSquare):
        self.n = left.order
        self.left = left.table
        self.right = right.table
        self.left_col, self.left_row = _positions(self.left)
        self.right_col, self.right_row = _positions(self.right)
        self.nodes = 0

    @staticmethod
    def _assign(forward, backward, i, v):
        """True if newly set, False if already consistent, None on conflict"""
        current = forward[i]
        if current == v:
            return False
        if current != UNSET or backward[v] != UNSET:
            return None
        forward[i] = v
        backward[v] = i
        return True

    def _propagate(self, state) -> bool:
        alpha, alpha_inv, beta, beta_inv, gamma, gamma_inv = state
        n = self.n
        assign = self._assign
        changed = True
        while changed:
            changed = False
            known_gamma = [(s, gamma[s]) for s in range(n) if gamma[s] != UNSET]
            for x in range(n):
                r = alpha[x]
                if r == UNSET:
                    continue
                left_row, right_row = self.left[x], self.right[r]
                for y in range(n):
                    c = beta[y]
                    if c == UNSET:
                        continue
                    result = assign(gamma, gamma_inv, left_row[y], right_row[c])
                    if result is None:
                        return False
                    changed = changed or result
                for s, t in known_gamma:
                    result = assign(beta, beta_inv, self.left_col[x][s], self.right_col[r][t])
                    if result is None:
                        return False
                    changed = changed or result
            known_gamma = [(s, gamma[s]) for s in range(n) if gamma[s] != UNSET]
            for y in range(n):
                c = beta[y]
                if c == UNSET:
                    continue
                for s, t in known_gamma:
                    result = assign(alpha, alpha_inv, self.left_row[y][s], self.right_row[c][t])
                    if result is None:
                        return False
                    changed = changed or result
        return True

    def _branch_point(self, state):
        """(index, slot of the inverse array) of the next free variable, None at a leaf"""
        alpha, _, beta, _, _, _ = state
        if alpha[0] == UNSET:
            return 0, 1
        for y in range(self.n):
            if beta[y] == UNSET:
                return y, 3
        for x in range(self.n):
            if alpha[x] == UNSET:
                return x, 1
        return None

    def solve(self, state) -> Optional[List[List[int]]]:
        self.nodes += 1
        if not self._propagate(state):
            return None
        point = self._branch_point(state)
        if point is None:
            return state
        index, slot = point
        backward = state[slot]
        for value in range(self.n):
            if backward[value] != UNSET:
                continue
            child = [list(part) for part in state]
            child[slot - 1][index] = value
            child[slot][value] = index
            found = self.solve(child)
            if found is not None:
                return found
        return None

    def run(self) -> Optional[IsotopyWitness]:
        empty = [UNSET] * self.n
        found = self.solve([list(empty) for _ in range(6)])
        logger.debug("Isotopy search of order %d visited %d nodes", self.n, self.nodes)
        if found is None:
            return None
        alpha, _, beta, _, gamma, _ = found
        return IsotopyWitness(
            Permutation(v + 1 for v in alpha),
            Permutation(v + 1 for v in beta),
            Permutation(v + 1 for v in gamma),
        )


def are_isotopic(left: LatinSquare, right: LatinSquare, max_order: int = MAX_ORDER) -> Optional[IsotopyWitness]:
    """Return a verified witness, or None when the squares are proven non-isotopic"""
    if left.order != right.order:
        raise OrderMismatchError(f"Cannot compare squares of orders {left.order} and {right.order}")
    if left.order > max_order:
        raise UnsupportedOrderError(f"Isotopy search supports orders up to {max_order}, got {left.order}")

    witness = _IsotopySearch(left, right).run()
    if witness is not None:
        assert verify_witness(left, right, witness), f"search produced an invalid witness {witness}"
    return witness
