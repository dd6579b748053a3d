"""Order-independent PC-style baseline sharing the orientation machinery.

Edges are tested level by level against conditioning sets drawn from
adjacency sets frozen at the start of each level, and deletions are applied
only once the level completes, so the result does not depend on variable
order.  For every deleted edge the separating set with the largest p-value
found at the deleting level is recorded, which also keeps the stored
sepsets order-free.
"""

from __future__ import annotations

from itertools import combinations

from .citest import DEFAULT_ALPHA, DEFAULT_MAX_COND, CIEngine
from .skeleton_orient import (
    Cpdag,
    Pair,
    PriorKnowledge,
    SeparationRecord,
    orient,
    pair_key,
)


def pc_stable_skeleton(
    variables,
    engine: CIEngine,
    alpha: float = DEFAULT_ALPHA,
    m_ci: int = DEFAULT_MAX_COND,
) -> tuple[Cpdag, dict[Pair, SeparationRecord]]:
    """Level-wise skeleton pruning with frozen adjacency sets.

    At level L every surviving edge x-y is tested against all size-L
    subsets of the level-start adjacencies of x and of y; the edge is
    removed at the end of the level if any such test fails to reject
    independence.  Levels stop once no adjacency is large enough or the
    conditioning cap is passed.
    """
    variables = list(variables)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    adjacency: dict[str, set[str]] = {
        v: set(variables) - {v} for v in variables
    }
    sepsets: dict[Pair, SeparationRecord] = {}

    level = 0
    while level <= m_ci:
        frozen = {v: set(adjacency[v]) for v in variables}
        edges = sorted(
            pair_key(x, y) for x in variables for y in adjacency[x] if x < y
        )
        if not any(
            len(frozen[x] - {y}) >= level or len(frozen[y] - {x}) >= level
            for x, y in edges
        ):
            break
        removals: dict[Pair, SeparationRecord] = {}
        for x, y in edges:
            best: tuple[float, tuple[str, ...]] | None = None
            tried: set[tuple[str, ...]] = set()
            for a, b in ((x, y), (y, x)):
                pool = sorted(frozen[a] - {b})
                if len(pool) < level:
                    continue
                for cond in combinations(pool, level):
                    if cond in tried:
                        continue
                    tried.add(cond)
                    p = engine.p_value(x, y, cond)
                    if p > alpha and (
                        best is None or p > best[0] or (p == best[0] and cond < best[1])
                    ):
                        best = (p, cond)
            if best is not None:
                removals[(x, y)] = SeparationRecord(witness=best[1], p_value=best[0])
        for (x, y), record in removals.items():
            adjacency[x].discard(y)
            adjacency[y].discard(x)
            sepsets[(x, y)] = record
        level += 1

    skeleton = Cpdag(
        vertices=tuple(variables),
        undirected={pair_key(x, y) for x in variables for y in adjacency[x] if x < y},
    )
    return skeleton, sepsets


def pc_stable(
    variables,
    engine: CIEngine,
    alpha: float = DEFAULT_ALPHA,
    m_ci: int = DEFAULT_MAX_COND,
    prior: PriorKnowledge | None = None,
) -> Cpdag:
    """Baseline pipeline: level-wise skeleton plus the shared orientation."""
    skeleton, sepsets = pc_stable_skeleton(variables, engine, alpha=alpha, m_ci=m_ci)
    return orient(skeleton, prior, sepsets)
