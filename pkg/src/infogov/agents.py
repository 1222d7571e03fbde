"""Agent decision contract and the table-calibrated stochastic agent."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional, Protocol, Union

import numpy as np

from infogov.game import ALL_PAIRS, Action, ActionPair
from infogov.ledger import BUCKETS, CoopBucket, InfoTier, InformationView


class CalibrationError(ValueError):
    pass


class DecisionError(RuntimeError):
    """An agent could not produce an action; the round it occurred in is invalid."""


class AgentPolicy(Protocol):
    def decide(self, view: InformationView, rng: np.random.Generator) -> Action: ...


GridKey = tuple[ActionPair, CoopBucket, CoopBucket]


@dataclass(frozen=True)
class CalibrationTable:
    """Probability of choosing C per information condition.

    ``nr`` is keyed (last pair, own bucket, neighbourhood bucket) and ``ar``
    (last pair, own bucket, opponent bucket).
    """

    first_move_p_c: float
    la: Mapping[ActionPair, float]
    nr: Mapping[GridKey, float]
    ar: Mapping[GridKey, float]

    def __post_init__(self) -> None:
        _check_prob("first_move_p_c", self.first_move_p_c)
        for pair in ALL_PAIRS:
            if pair not in self.la:
                raise CalibrationError(f"la table missing entry {_pair_key(pair)}")
            _check_prob(f"la[{_pair_key(pair)}]", self.la[pair])
        for name in ("nr", "ar"):
            grid = getattr(self, name)
            for key in _grid_keys():
                if key not in grid:
                    raise CalibrationError(f"{name} table missing entry {_grid_key_str(key)}")
                _check_prob(f"{name}[{_grid_key_str(key)}]", grid[key])
            if len(grid) != 36:
                raise CalibrationError(f"{name} table has {len(grid)} entries, expected 36")

    def probability(self, view: InformationView) -> float:
        """P(C) for ``view``; falls back to ``la`` when ratio buckets are missing."""
        if not isinstance(view, InformationView):
            raise CalibrationError(f"expected an InformationView, got {type(view).__name__}")
        if view.tier is InfoTier.NO_INFO or view.last_pair is None:
            return self.first_move_p_c
        if view.tier is InfoTier.LA:
            return self.la[view.last_pair]
        if view.tier is InfoTier.LA_NR:
            inner, grid = view.neighborhood_bucket, self.nr
        else:
            inner, grid = view.opponent_bucket, self.ar
        if view.own_bucket is None or inner is None:
            return self.la[view.last_pair]
        return grid[(view.last_pair, view.own_bucket, inner)]

    def monotonicity_violations(self, name: str = "nr") -> list[str]:
        """Cells where P(C) decreases along either bucket axis."""
        grid = getattr(self, name)
        bad = []
        for pair in ALL_PAIRS:
            for a in range(3):
                for b in range(2):
                    lo = grid[(pair, BUCKETS[a], BUCKETS[b])]
                    hi = grid[(pair, BUCKETS[a], BUCKETS[b + 1])]
                    if hi < lo:
                        bad.append(f"{_grid_key_str((pair, BUCKETS[a], BUCKETS[b + 1]))} < inner predecessor")
                    lo = grid[(pair, BUCKETS[b], BUCKETS[a])]
                    hi = grid[(pair, BUCKETS[b + 1], BUCKETS[a])]
                    if hi < lo:
                        bad.append(f"{_grid_key_str((pair, BUCKETS[b + 1], BUCKETS[a]))} < own-axis predecessor")
        return bad

    def as_arrays(self) -> tuple[float, np.ndarray, np.ndarray, np.ndarray]:
        """(first, la[4], nr[4,3,3], ar[4,3,3]) indexed by pair/bucket codes."""
        la = np.array([self.la[p] for p in ALL_PAIRS], dtype=np.float64)
        nr = np.empty((4, 3, 3), dtype=np.float64)
        ar = np.empty((4, 3, 3), dtype=np.float64)
        for pair, own, inner in _grid_keys():
            nr[pair.code, own.code, inner.code] = self.nr[(pair, own, inner)]
            ar[pair.code, own.code, inner.code] = self.ar[(pair, own, inner)]
        return float(self.first_move_p_c), la, nr, ar

    def to_dict(self) -> dict:
        return {
            "first_move_p_c": self.first_move_p_c,
            "axes": {"nr": ["last_pair", "own", "neighborhood"], "ar": ["last_pair", "own", "opponent"]},
            "la": {_pair_key(p): v for p, v in self.la.items()},
            "nr": {_grid_key_str(k): v for k, v in self.nr.items()},
            "ar": {_grid_key_str(k): v for k, v in self.ar.items()},
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "CalibrationTable":
        for key in ("first_move_p_c", "la", "nr", "ar"):
            if key not in data:
                raise CalibrationError(f"calibration missing key {key!r}")
        try:
            la = {ActionPair.parse(k): float(v) for k, v in data["la"].items()}
            nr = {_parse_grid_key(k): float(v) for k, v in data["nr"].items()}
            ar = {_parse_grid_key(k): float(v) for k, v in data["ar"].items()}
        except (ValueError, KeyError) as exc:
            raise CalibrationError(f"malformed calibration entry: {exc}") from exc
        return cls(float(data["first_move_p_c"]), la, nr, ar)


def _check_prob(name: str, p: float) -> None:
    if not (isinstance(p, (int, float)) and 0.0 <= p <= 1.0):
        raise CalibrationError(f"{name} = {p!r} is not a probability in [0, 1]")


def _grid_keys() -> list[GridKey]:
    return [(p, a, b) for p in ALL_PAIRS for a in BUCKETS for b in BUCKETS]


def _pair_key(pair: ActionPair) -> str:
    return f"{pair.own.value},{pair.other.value}"


def _grid_key_str(key: GridKey) -> str:
    pair, own, inner = key
    return f"{_pair_key(pair)}|{own.value}|{inner.value}"


def _parse_grid_key(text: str) -> GridKey:
    parts = text.split("|")
    if len(parts) != 3:
        raise ValueError(f"grid key {text!r} is not 'own,other|ownBucket|innerBucket'")
    return ActionPair.parse(parts[0]), CoopBucket(parts[1].strip()), CoopBucket(parts[2].strip())


def load_calibration(path: Union[str, Path], require_monotone: bool = False) -> CalibrationTable:
    with open(path) as fh:
        data = json.load(fh)
    table = CalibrationTable.from_dict(data)
    if require_monotone:
        bad = table.monotonicity_violations("nr")
        if bad:
            raise CalibrationError(f"nr table not monotone: {bad[0]}")
    return table


DEFAULT_CALIBRATION = "calibration_default.json"


def default_calibration_path() -> Path:
    return Path(str(resources.files("infogov") / "data" / DEFAULT_CALIBRATION))


def load_default_calibration() -> CalibrationTable:
    return load_calibration(default_calibration_path(), require_monotone=True)


def table_sla_decide(table: CalibrationTable, view: InformationView, rng: np.random.Generator) -> Action:
    """Draw one uniform from ``rng`` and cooperate when it falls below P(C)."""
    return Action.C if rng.random() < table.probability(view) else Action.D


class TableSLA:
    """Stochastic agent that reproduces the measured LLM cooperation frequencies."""

    def __init__(self, table: Optional[CalibrationTable] = None):
        self.table = table if table is not None else load_default_calibration()

    def decide(self, view: InformationView, rng: np.random.Generator) -> Action:
        return table_sla_decide(self.table, view, rng)


class ConstantPolicy:
    """Always plays the same action; used for stub scenarios and tests."""

    def __init__(self, action: Action):
        self.action = Action(action)

    def decide(self, view: InformationView, rng: np.random.Generator) -> Action:
        return self.action
