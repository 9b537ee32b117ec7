"""Exhaustive enumeration oracle for the subset log-determinant objective.

Deliberately slow and simple: every s-subset is visited in lexicographic
order and its principal-submatrix log-determinant is computed directly.
This is the ground truth that the relaxation bounds are tested against,
so no pruning or cleverness is allowed here.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .instance import Instance, SymMatrix

NEG_INF = float("-inf")

DEFAULT_ENUMERATION_CAP = 20


@dataclass(frozen=True)
class ExactResult:
    value: float
    best_subset: tuple[int, ...]


def _check_subset(subset, n: int) -> tuple[int, ...]:
    idx = tuple(int(i) for i in subset)
    if not idx:
        raise ValueError("subset must be nonempty")
    if len(set(idx)) != len(idx):
        raise ValueError(f"subset has repeated indices: {idx}")
    if min(idx) < 0 or max(idx) >= n:
        raise ValueError(f"subset indices must lie in [0, {n - 1}]: {idx}")
    return idx


def logdet_submatrix(C: SymMatrix, subset) -> float:
    """log det of the principal submatrix C[S, S], with 0-based indices.

    Returns -inf when the submatrix fails a Cholesky factorization, i.e.
    it is singular or not positive definite.  That is a legitimate value
    (the subset simply carries no finite entropy), not an error.
    """
    idx = _check_subset(subset, C.n)
    sub = C.entries[np.ix_(idx, idx)]
    try:
        chol = np.linalg.cholesky(sub)
    except np.linalg.LinAlgError:
        return NEG_INF
    return float(2.0 * np.sum(np.log(np.diagonal(chol))))


def exact_mesp(inst: Instance, s: int, cap: int = DEFAULT_ENUMERATION_CAP) -> ExactResult:
    """Maximize logdet_submatrix over all s-subsets by enumeration.

    Ties are broken toward the lexicographically smallest subset, which
    falls out of visiting subsets in lexicographic order and updating
    only on strict improvement.
    """
    n = inst.n
    if n > cap:
        raise ValueError(f"n={n} exceeds the enumeration cap {cap}")
    s = int(s)
    if not 0 < s < n:
        raise ValueError(f"need 0 < s < n, got s={s}, n={n}")
    best_val = NEG_INF
    best_subset: tuple[int, ...] | None = None
    for combo in itertools.combinations(range(n), s):
        val = logdet_submatrix(inst.C, combo)
        if best_subset is None or val > best_val:
            best_val = val
            best_subset = combo
    assert best_subset is not None
    return ExactResult(value=best_val, best_subset=best_subset)
