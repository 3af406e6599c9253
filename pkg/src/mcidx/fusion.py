"""Multi-view retrieval: per-view budgets and round-robin fused ranking.

The total budget k maps to a per-view budget of roughly 2k/3; after taking
the top results from each view, deduplication brings the union back to
approximately k units. Fractional budgets (k=1.5, and the odd/even split of
2k/3) alternate by question ordinal so they average out over a dataset. The
fused union is never truncated to k: comparisons happen at matched budgets,
not matched output sizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import InvalidK, ViewMismatch
from .providers import EmbeddingProvider
from .retrieval import B_DEFAULT, K1_DEFAULT, DenseIndex, ScoredUnit, SparseIndex, rank_units
from .views import ViewKind

# Fixed merge order; recall over the returned set is order-insensitive, this
# just pins the emitted sequence for reproducibility.
VIEW_ORDER = (ViewKind.RAW_TEXT, ViewKind.KEYWORDS, ViewKind.SUMMARY)


@dataclass(frozen=True)
class BudgetPlan:
    k: float
    per_view_even: int
    per_view_odd: int


@dataclass(frozen=True)
class FusedUnit:
    unit_id: str
    view_ranks: dict[ViewKind, int]
    views: frozenset[ViewKind]


@dataclass(frozen=True)
class FusedResult:
    units: tuple[FusedUnit, ...]
    plan: BudgetPlan
    k_prime: int

    @property
    def unit_ids(self) -> list[str]:
        return [u.unit_id for u in self.units]


def _validate_k(k: float, minimum: float) -> float:
    if k == 1.5:
        return 1.5
    try:
        value = float(k)
    except (TypeError, ValueError):
        raise InvalidK(f"budget must be 1.5 or a positive integer, got {k!r}") from None
    if not value.is_integer() or value < minimum:
        raise InvalidK(f"budget must be 1.5 or an integer >= {minimum}, got {k!r}")
    return value


def per_view_budget(k: float, question_ordinal: int) -> int:
    """Per-view budget k' for total budget k at the given question ordinal.

    k=1.5 -> 1; k=3 -> 1/2 alternating; k=5 -> 3; k=10 -> 6/7 alternating;
    any other integer k -> floor(2k/3) on even ordinals, ceil(2k/3) on odd,
    never below 1.
    """
    value = _validate_k(k, minimum=2)
    odd = question_ordinal % 2 == 1
    if value == 1.5:
        return 1
    kk = int(value)
    if kk == 3:
        return 2 if odd else 1
    if kk == 5:
        return 3
    if kk == 10:
        return 7 if odd else 6
    budget = math.ceil(2 * kk / 3) if odd else math.floor(2 * kk / 3)
    return max(1, budget)


def make_budget_plan(k: float) -> BudgetPlan:
    return BudgetPlan(k=float(k), per_view_even=per_view_budget(k, 0), per_view_odd=per_view_budget(k, 1))


def retrieve_single(
    index: SparseIndex | DenseIndex,
    query: str,
    k: float,
    question_ordinal: int,
    provider: EmbeddingProvider | None = None,
    k1: float = K1_DEFAULT,
    b: float = B_DEFAULT,
) -> list[ScoredUnit]:
    """Top-k single-view retrieval; k=1.5 alternates between 1 and 2."""
    value = _validate_k(k, minimum=1)
    if value == 1.5:
        n = 2 if question_ordinal % 2 == 1 else 1
    else:
        n = int(value)
    return rank_units(index, query, provider, k1=k1, b=b)[:n]


def retrieve_mc(
    view_indexes: dict[ViewKind, SparseIndex | DenseIndex],
    query: str,
    k: float,
    question_ordinal: int,
    provider: EmbeddingProvider | None = None,
    k1: float = K1_DEFAULT,
    b: float = B_DEFAULT,
) -> FusedResult:
    """Fuse per-view top-k' rankings by round-robin with deduplication.

    Views are consumed in the fixed order raw, keywords, summary, taking each
    view's next-ranked unit in turn and skipping ids already emitted. The
    deduplicated union is returned in full.
    """
    missing = [v.value for v in VIEW_ORDER if v not in view_indexes]
    if missing:
        raise ViewMismatch(f"missing view indexes: {missing}")
    id_sets = {view: frozenset(view_indexes[view].unit_ids) for view in VIEW_ORDER}
    if len(set(id_sets.values())) != 1:
        raise ViewMismatch("view indexes cover different unit id sets")

    k_prime = per_view_budget(k, question_ordinal)
    tops = {
        view: [
            replace(scored, view_kind=view)
            for scored in rank_units(view_indexes[view], query, provider, k1=k1, b=b)[:k_prime]
        ]
        for view in VIEW_ORDER
    }

    view_ranks: dict[str, dict[ViewKind, int]] = {}
    for view in VIEW_ORDER:
        for scored in tops[view]:
            view_ranks.setdefault(scored.unit_id, {})[view] = scored.rank

    fused: list[FusedUnit] = []
    seen: set[str] = set()
    for round_idx in range(k_prime):
        for view in VIEW_ORDER:
            ranked = tops[view]
            if round_idx >= len(ranked):
                continue
            unit_id = ranked[round_idx].unit_id
            if unit_id in seen:
                continue
            seen.add(unit_id)
            ranks = view_ranks[unit_id]
            fused.append(FusedUnit(unit_id, dict(ranks), frozenset(ranks)))
    return FusedResult(tuple(fused), make_budget_plan(k), k_prime)
