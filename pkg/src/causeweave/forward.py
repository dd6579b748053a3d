"""Forward enumeration of candidate parent-children sets for one target.

For a target X and an enumeration order T1..Tp-1 over the remaining
variables, a candidate set N is *admissible* when every member stays
dependent on X given every subset of the other members.  Admissibility is
hereditary (subsets of admissible sets are admissible), so the search
expands sets one higher-indexed variable at a time and only ever grows
sets that are still admissible.

The extension set of an admissible S is computed incrementally: the
intersection of the extension sets of all leave-one-out subsets of S is an
upper bound, and membership is settled with tests conditioned on exactly
|S| variables.  Consequently no conditional-independence query is issued
twice within one search.  Above the conditioning-size cap the upper bound
itself is used as the extension set (no further testing).

The search returns the admissible sets that could not be extended,
filtered down to the ones that are maximal under inclusion.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .citest import DEFAULT_ALPHA, DEFAULT_MAX_COND, CIEngine
from .errors import BudgetExceeded

DEFAULT_BUDGET = 10**6


@dataclass(frozen=True)
class CandidateSet:
    """One candidate neighborhood: members in enumeration order.

    ``satisfied_eq1`` records whether every growth step of the set was
    settled by direct testing; sets larger than the conditioning cap plus
    one rely on the intersection approximation instead.
    """

    members: tuple[str, ...]
    satisfied_eq1: bool = True

    def __len__(self) -> int:
        return len(self.members)

    def as_set(self) -> frozenset[str]:
        return frozenset(self.members)


@dataclass(frozen=True)
class NeighborhoodFamily:
    """All maximal admissible candidate sets found for one target."""

    target: str
    family: tuple[CandidateSet, ...]
    alpha: float
    m_ci: int

    def member_sets(self) -> tuple[frozenset[str], ...]:
        return tuple(c.as_set() for c in self.family)


class ForwardSearch:
    """Search state for a single target: enumeration order plus extension memo.

    The memo keeps the extension set of every set examined so far, which is
    exactly what the leave-one-out intersection needs; it lives only as long
    as the per-target search.
    """

    def __init__(
        self,
        target: str,
        variables,
        engine: CIEngine,
        alpha: float = DEFAULT_ALPHA,
        m_ci: int = DEFAULT_MAX_COND,
        budget: int = DEFAULT_BUDGET,
    ):
        variables = list(variables)
        if target not in variables:
            raise ValueError(f"target {target!r} not among variables")
        if not 0.0 < alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {alpha}")
        if m_ci < 1:
            raise ValueError(f"conditioning cap must be >= 1, got {m_ci}")
        self.target = target
        self.engine = engine
        self.alpha = alpha
        self.m_ci = m_ci
        self.budget = budget
        self.order = tuple(v for v in variables if v != target)
        self.rank = {v: i for i, v in enumerate(self.order)}
        self.memo: dict[frozenset[str], frozenset[str]] = {}
        self.expanded = 0

    def _dependent(self, other: str, cond) -> bool:
        return self.engine.p_value(self.target, other, cond) <= self.alpha

    def _sorted(self, s) -> list[str]:
        return sorted(s, key=self.rank.__getitem__)

    def later_variables(self, s: frozenset[str]) -> tuple[str, ...]:
        """Variables after the highest-ranked member of ``s``."""
        if not s:
            return self.order
        top = max(self.rank[v] for v in s)
        return self.order[top + 1 :]

    def extensions(self, s: frozenset[str]) -> frozenset[str]:
        """Variables that can extend the admissible set ``s``.

        Memoized; recurses over leave-one-out subsets when they have not
        been examined yet (they always have during a worklist run).
        """
        s = frozenset(s)
        cached = self.memo.get(s)
        if cached is not None:
            return cached
        if not s:
            result = frozenset(t for t in self.order if self._dependent(t, ()))
        else:
            members = self._sorted(s)
            upper: frozenset[str] | None = None
            for drop in members:
                sub_ext = self.extensions(s - {drop})
                upper = sub_ext if upper is None else upper & sub_ext
            candidates = [t for t in self.later_variables(s) if t in upper]
            if len(s) > self.m_ci:
                result = frozenset(candidates)
            else:
                accepted = []
                for t in candidates:
                    if not self._dependent(t, members):
                        continue
                    if all(
                        self._dependent(drop, self._sorted((s - {drop}) | {t}))
                        for drop in members
                    ):
                        accepted.append(t)
                result = frozenset(accepted)
        self.memo[s] = result
        return result

    def run(self, trace=None) -> NeighborhoodFamily:
        """Expand sets level by level and keep the maximal terminal ones."""
        terminal: list[frozenset[str]] = []
        level: list[frozenset[str]] = [frozenset()]
        seen: set[frozenset[str]] = set()
        while level:
            next_level: list[frozenset[str]] = []
            for s in sorted(level, key=lambda s_: tuple(self.rank[v] for v in self._sorted(s_))):
                assert s not in seen, "a candidate set was scheduled twice"
                seen.add(s)
                self.expanded += 1
                if self.expanded > self.budget:
                    raise BudgetExceeded(
                        f"{self.target}: more than {self.budget} candidate sets expanded"
                    )
                ext = self.extensions(s)
                if trace is not None:
                    trace.write(
                        json.dumps(
                            {"set": self._sorted(s), "extensions": self._sorted(ext)},
                            sort_keys=True,
                        )
                        + "\n"
                    )
                if ext:
                    next_level.extend(s | {t} for t in ext)
                else:
                    terminal.append(s)
            level = next_level
        family = [
            CandidateSet(
                members=tuple(self._sorted(s)),
                satisfied_eq1=len(s) <= self.m_ci + 1,
            )
            for s in _maximal(terminal)
        ]
        family.sort(key=lambda c: (len(c.members), tuple(self.rank[v] for v in c.members)))
        return NeighborhoodFamily(
            target=self.target, family=tuple(family), alpha=self.alpha, m_ci=self.m_ci
        )


def _maximal(sets: list[frozenset[str]]) -> list[frozenset[str]]:
    """Drop every set that is a proper subset of another set in the list."""
    kept: list[frozenset[str]] = []
    for s in sorted(sets, key=len, reverse=True):
        if not any(s < other for other in kept):
            kept.append(s)
    return kept


def candidate_extensions(
    target: str,
    s,
    variables,
    engine: CIEngine,
    alpha: float = DEFAULT_ALPHA,
    m_ci: int = DEFAULT_MAX_COND,
) -> frozenset[str]:
    """Extension set of one admissible candidate set, computed standalone.

    ``s`` must be admissible for the target (the empty set always is);
    all leave-one-out subsets are derived on the fly.
    """
    search = ForwardSearch(target, variables, engine, alpha=alpha, m_ci=m_ci)
    return search.extensions(frozenset(s))


def forward_step(
    target: str,
    variables,
    engine: CIEngine,
    alpha: float = DEFAULT_ALPHA,
    m_ci: int = DEFAULT_MAX_COND,
    budget: int = DEFAULT_BUDGET,
    trace=None,
) -> NeighborhoodFamily:
    """All maximal admissible candidate neighborhoods of ``target``.

    ``variables`` fixes the enumeration order.  ``trace``, when given, is a
    text sink receiving one JSON line per expanded set.
    """
    return ForwardSearch(
        target, variables, engine, alpha=alpha, m_ci=m_ci, budget=budget
    ).run(trace=trace)
