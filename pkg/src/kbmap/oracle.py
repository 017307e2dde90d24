"""Brute-force references for k-bounded MAP and subproblem values.

Nothing here touches the encoder or the 0-1 solver; states are scored with
``world_score`` / ``score_delta`` only.
"""

from __future__ import annotations

from itertools import combinations
from typing import Iterable

from .model import EPS, GroundNetwork, State, score_delta, world_score

MAX_CANDIDATES = 25


class OracleTooLargeError(ValueError):
    pass


def _guard(atoms) -> list[int]:
    atoms = sorted(set(atoms))
    if len(atoms) > MAX_CANDIDATES:
        raise OracleTooLargeError(
            f"{len(atoms)} candidate atoms; enumeration is limited to {MAX_CANDIDATES}")
    return atoms


def bounded_subsets(atoms: list[int], k: int):
    for size in range(min(k, len(atoms)) + 1):
        yield from combinations(atoms, size)


def brute_force_k_map(network: GroundNetwork, candidates: Iterable[int], k: int) -> tuple[State, float]:
    """Best state among subsets of ``candidates`` with at most ``k`` atoms.

    Ties go to the lexicographically smallest sorted id tuple.
    """
    atoms = _guard(candidates)
    best_key = None
    best_score = None
    for subset in bounded_subsets(atoms, k):
        s = world_score(network, State(frozenset(subset)))
        if best_score is None or s > best_score + EPS or (
                s >= best_score - EPS and subset < best_key):
            best_key, best_score = subset, s
    return State(frozenset(best_key)), best_score


def brute_force_subproblem(network: GroundNetwork, open_set: Iterable[int], h: int, k: int) -> float:
    """max of score_delta(A, h) over A within ``open_set`` minus ``h``, ``|A| <= k``."""
    atoms = _guard(set(open_set) - {h})
    return max(score_delta(network, State(frozenset(a)), h) for a in bounded_subsets(atoms, k))
