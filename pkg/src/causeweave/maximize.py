"""Selection of the best candidate neighborhood by a minimax p-value score.

For a pair (x, y) and a candidate set N, the *separation score* is the
largest p-value of the tests of x against y conditioned on subsets of N.
It is evaluated through an incremental identity: the score over N is the
maximum of the scores over the leave-one-out subsets of N and of the single
test conditioned on all of N.  Above the conditioning-size cap the direct
test is skipped and the leave-one-out maximum alone is used, which unrolls
to a maximum over the cap-sized subsets.  Each distinct query is issued at
most once per computation thanks to a per-computation memo.

A candidate's quality is the minimum separation score over all
non-members: a good neighborhood lets some subset of itself separate the
target from everything else.  Selection scans candidates with a running
floor so hopeless candidates are abandoned on the first non-member they
fail to separate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

from .citest import DEFAULT_MAX_COND, CIEngine
from .errors import EmptyFamily
from .forward import CandidateSet, NeighborhoodFamily

Witness = tuple[str, ...]


@dataclass(frozen=True)
class SepScore:
    """Best separating p-value for an unordered pair, plus the witness set."""

    pair: tuple[str, str]
    value: float
    witness: Witness


@dataclass(frozen=True)
class NeighborSelection:
    """The winning candidate set for a target and its quality margin."""

    target: str
    chosen: CandidateSet
    q_value: float
    runner_up_q: float

    @property
    def neighbors(self) -> frozenset[str]:
        return self.chosen.as_set()


class SepComputer:
    """Separation scores for one anchor variable, with shared memoization.

    ``score(other, n)`` returns the maximal p-value over subsets of ``n``
    (capped at ``m_ci`` conditioning variables) together with the witness
    subset attaining it; ties prefer the lexicographically smallest witness.
    """

    def __init__(self, anchor: str, engine: CIEngine, m_ci: int = DEFAULT_MAX_COND):
        self.anchor = anchor
        self.engine = engine
        self.m_ci = m_ci
        self._scores: dict[tuple[str, frozenset[str]], tuple[float, Witness]] = {}
        self._queried: dict[tuple[str, Witness], float] = {}

    def _ci(self, other: str, cond: Witness) -> float:
        key = (other, cond)
        found = self._queried.get(key)
        if found is None:
            found = self.engine.p_value(self.anchor, other, cond)
            self._queried[key] = found
        return found

    def score(self, other: str, n) -> tuple[float, Witness]:
        n = frozenset(n)
        if other == self.anchor or other in n or self.anchor in n:
            raise ValueError(
                f"separation query must keep {self.anchor!r}/{other!r} outside {sorted(n)!r}"
            )
        return self._score(other, n)

    def _score(self, other: str, n: frozenset[str]) -> tuple[float, Witness]:
        key = (other, n)
        cached = self._scores.get(key)
        if cached is not None:
            return cached
        if not n:
            best = (self._ci(other, ()), ())
        elif len(n) <= self.m_ci:
            best = (-1.0, ())
            for drop in sorted(n):
                best = _better(best, self._score(other, n - {drop}))
            full = tuple(sorted(n))
            best = _better(best, (self._ci(other, full), full))
        else:
            # Leave-one-out maxima recurse down to the cap-sized subsets,
            # so evaluate those directly; no test above the cap is run.
            best = (-1.0, ())
            for sub in combinations(sorted(n), self.m_ci):
                best = _better(best, self._score(other, frozenset(sub)))
        self._scores[key] = best
        return best


def _better(
    current: tuple[float, Witness], candidate: tuple[float, Witness]
) -> tuple[float, Witness]:
    if candidate[0] > current[0]:
        return candidate
    if candidate[0] == current[0] and candidate[1] < current[1]:
        return candidate
    return current


def sep_score(
    x: str, y: str, n, engine: CIEngine, m_ci: int = DEFAULT_MAX_COND
) -> SepScore:
    """Maximal separating p-value of (x, y) over subsets of ``n``."""
    value, witness = SepComputer(x, engine, m_ci=m_ci).score(y, n)
    a, b = sorted((x, y))
    return SepScore(pair=(a, b), value=value, witness=witness)


def q_value(
    x: str,
    n,
    variables,
    engine: CIEngine,
    m_ci: int = DEFAULT_MAX_COND,
    floor: float = -math.inf,
    computer: SepComputer | None = None,
) -> float:
    """Minimum separation score of ``x`` against every variable outside ``n``.

    Returns positive infinity when there is no outside variable.  As soon as
    any score drops to ``floor`` or below, that score is returned directly:
    the minimum cannot beat the floor anymore.
    """
    n = frozenset(n)
    if x in n or not n <= set(variables):
        raise ValueError(f"candidate set {sorted(n)!r} invalid for target {x!r}")
    computer = computer if computer is not None else SepComputer(x, engine, m_ci=m_ci)
    q = math.inf
    for other in sorted(set(variables) - n - {x}):
        value, _ = computer.score(other, n)
        if value <= floor:
            return value
        q = min(q, value)
    return q


def maximization_step(
    x: str,
    family: NeighborhoodFamily,
    variables,
    engine: CIEngine,
    m_ci: int = DEFAULT_MAX_COND,
) -> NeighborSelection:
    """Pick the family member with the largest quality score.

    Candidates are scanned in (cardinality, member-order) sequence with a
    rising floor, so ties resolve to the smaller, earlier set and losing
    candidates are abandoned early; the outcome equals a full argmax.
    """
    if not family.family:
        raise EmptyFamily(f"no candidate neighborhoods for {x!r}")
    ordered = sorted(family.family, key=lambda c: (len(c.members), tuple(sorted(c.members))))
    computer = SepComputer(x, engine, m_ci=m_ci)
    chosen: CandidateSet | None = None
    chosen_q = -math.inf
    runner_up = -math.inf
    floor = 0.0
    for cand in ordered:
        q = q_value(
            x, cand.as_set(), variables, engine, m_ci=m_ci, floor=floor, computer=computer
        )
        if chosen is None:
            chosen, chosen_q = cand, q
            floor = max(floor, q)
        elif q > floor:
            runner_up = max(runner_up, chosen_q)
            chosen, chosen_q = cand, q
            floor = q
        else:
            runner_up = max(runner_up, q)
    if runner_up == -math.inf:
        runner_up = 0.0
    return NeighborSelection(
        target=x, chosen=chosen, q_value=chosen_q, runner_up_q=min(runner_up, chosen_q)
    )
