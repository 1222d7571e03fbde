"""Interaction history, cooperation ratios, qualitative buckets and tiered views."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

from infogov.game import Action, ActionPair
from infogov.network import Graph, neighbors


class LedgerError(ValueError):
    pass


RARELY_BELOW = 0.33
OFTEN_ABOVE = 0.66


class CoopBucket(str, enum.Enum):
    RARELY = "Rarely"
    SOMETIMES = "Sometimes"
    OFTEN = "Often"

    @property
    def code(self) -> int:
        return _BUCKET_CODES[self]


_BUCKET_CODES = {CoopBucket.RARELY: 0, CoopBucket.SOMETIMES: 1, CoopBucket.OFTEN: 2}
BUCKETS = (CoopBucket.RARELY, CoopBucket.SOMETIMES, CoopBucket.OFTEN)


class InfoTier(str, enum.Enum):
    NO_INFO = "NoInfo"
    LA = "LA"
    LA_AR = "LA_AR"
    LA_NR = "LA_NR"

    @property
    def code(self) -> int:
        return _TIER_CODES[self]

    @classmethod
    def parse(cls, text: str) -> "InfoTier":
        key = text.strip().upper().replace("+", "_")
        for tier in cls:
            if tier.value.upper() == key or tier.name == key:
                return tier
        raise LedgerError(f"unknown information tier {text!r}")


_TIER_CODES = {InfoTier.NO_INFO: 0, InfoTier.LA: 1, InfoTier.LA_AR: 2, InfoTier.LA_NR: 3}
TIERS = (InfoTier.NO_INFO, InfoTier.LA, InfoTier.LA_AR, InfoTier.LA_NR)


def bucket(r: float) -> CoopBucket:
    """Rarely below 0.33, Often above 0.66, Sometimes in between (both ends inclusive)."""
    if not 0.0 <= r <= 1.0:
        raise LedgerError(f"ratio {r!r} outside [0, 1]")
    if r < RARELY_BELOW:
        return CoopBucket.RARELY
    if r > OFTEN_ABOVE:
        return CoopBucket.OFTEN
    return CoopBucket.SOMETIMES


@dataclass
class HistoryStore:
    """Per ordered pair action history plus per-agent action/cooperation counters."""

    n: int
    pairs: dict[tuple[int, int], list[ActionPair]] = field(default_factory=dict)
    actions: list[int] = field(default_factory=list)
    coops: list[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.actions:
            self.actions = [0] * self.n
        if not self.coops:
            self.coops = [0] * self.n

    def history(self, i: int, j: int) -> list[ActionPair]:
        return self.pairs.get((i, j), [])

    def last_pair(self, i: int, j: int) -> Optional[ActionPair]:
        h = self.pairs.get((i, j))
        return h[-1] if h else None

    def clear(self) -> None:
        self.pairs.clear()
        self.actions = [0] * self.n
        self.coops = [0] * self.n

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "actions": list(self.actions),
            "coops": list(self.coops),
            "pairs": {f"{i},{j}": [str(p) for p in h] for (i, j), h in sorted(self.pairs.items())},
        }


def record(store: HistoryStore, i: int, j: int, pair_from_i: ActionPair) -> HistoryStore:
    if i == j:
        raise LedgerError(f"agent {i} cannot interact with itself")
    store.pairs.setdefault((i, j), []).append(pair_from_i)
    store.pairs.setdefault((j, i), []).append(pair_from_i.swapped())
    store.actions[i] += 1
    store.actions[j] += 1
    store.coops[i] += pair_from_i.own is Action.C
    store.coops[j] += pair_from_i.other is Action.C
    return store


def coop_ratio(store: HistoryStore, a: int) -> Optional[float]:
    if store.actions[a] == 0:
        return None
    return store.coops[a] / store.actions[a]


def neighborhood_ratio(store: HistoryStore, g: Graph, a: int) -> Optional[float]:
    """Pooled ratio over ``a``'s neighbours: total C actions / total actions."""
    c = n = 0
    for b in neighbors(g, a):
        c += store.coops[b]
        n += store.actions[b]
    if n == 0:
        return None
    return c / n


@dataclass(frozen=True)
class InformationView:
    tier: InfoTier
    last_pair: Optional[ActionPair] = None
    own_bucket: Optional[CoopBucket] = None
    opponent_bucket: Optional[CoopBucket] = None
    neighborhood_bucket: Optional[CoopBucket] = None

    def __post_init__(self) -> None:
        allowed = _ALLOWED_FIELDS[self.tier]
        for name in ("last_pair", "own_bucket", "opponent_bucket", "neighborhood_bucket"):
            if getattr(self, name) is not None and name not in allowed:
                raise LedgerError(f"tier {self.tier.value} view cannot carry {name}")

    def to_dict(self) -> dict:
        return {
            "tier": self.tier.value,
            "last_pair": None if self.last_pair is None else str(self.last_pair),
            "own_bucket": _opt(self.own_bucket),
            "opponent_bucket": _opt(self.opponent_bucket),
            "neighborhood_bucket": _opt(self.neighborhood_bucket),
        }


def _opt(b: Optional[CoopBucket]) -> Optional[str]:
    return None if b is None else b.value


_ALLOWED_FIELDS = {
    InfoTier.NO_INFO: frozenset(),
    InfoTier.LA: frozenset({"last_pair"}),
    InfoTier.LA_AR: frozenset({"last_pair", "own_bucket", "opponent_bucket"}),
    InfoTier.LA_NR: frozenset({"last_pair", "own_bucket", "neighborhood_bucket"}),
}


def _maybe_bucket(r: Optional[float]) -> Optional[CoopBucket]:
    return None if r is None else bucket(r)


def build_view(
    store: HistoryStore, g: Graph, tier: InfoTier, a: int, coplayer: int
) -> InformationView:
    """View for ``a`` facing ``coplayer`` from the store's current contents.

    Callers get snapshot semantics by building every view of a step before
    recording any of that step's outcomes.
    """
    if not g.has_edge(a, coplayer):
        raise LedgerError(f"({a}, {coplayer}) is not an edge of the round graph")
    if tier is InfoTier.NO_INFO:
        return InformationView(tier)
    last = store.last_pair(a, coplayer)
    if tier is InfoTier.LA:
        return InformationView(tier, last)
    own = _maybe_bucket(coop_ratio(store, a))
    if tier is InfoTier.LA_AR:
        return InformationView(tier, last, own, opponent_bucket=_maybe_bucket(coop_ratio(store, coplayer)))
    return InformationView(tier, last, own, neighborhood_bucket=_maybe_bucket(neighborhood_ratio(store, g, a)))
