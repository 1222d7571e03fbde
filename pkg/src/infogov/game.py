"""Actions, the Prisoner's Dilemma payoff matrix and per-interaction payoffs."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, Mapping, NamedTuple


class GameError(ValueError):
    pass


class Action(str, enum.Enum):
    C = "C"
    D = "D"

    @property
    def code(self) -> int:
        return 0 if self is Action.C else 1

    @classmethod
    def from_code(cls, code: int) -> "Action":
        return cls.C if code == 0 else cls.D


class ActionPair(NamedTuple):
    """An interaction outcome seen from one player: ``own`` first."""

    own: Action
    other: Action

    def swapped(self) -> "ActionPair":
        return ActionPair(self.other, self.own)

    @property
    def code(self) -> int:
        # CC=0, CD=1, DC=2, DD=3; shared with the compiled kernels
        return _PAIR_CODES[self]

    @classmethod
    def from_code(cls, code: int) -> "ActionPair":
        return ALL_PAIRS[code]

    @classmethod
    def parse(cls, text: str) -> "ActionPair":
        """Parse ``"C,D"`` / ``"CD"`` / ``"[C, D]"`` style strings."""
        letters = [ch for ch in text.upper() if ch in "CD"]
        if len(letters) != 2:
            raise GameError(f"cannot parse action pair from {text!r}")
        return cls(Action(letters[0]), Action(letters[1]))

    def __str__(self) -> str:
        return f"{self.own.value}{self.other.value}"


ALL_PAIRS = tuple(ActionPair(a, b) for a in (Action.C, Action.D) for b in (Action.C, Action.D))
_PAIR_CODES = {p: k for k, p in enumerate(ALL_PAIRS)}
MUTUAL_C = ALL_PAIRS[0]


@dataclass(frozen=True)
class PayoffMatrix:
    """Symmetric 2x2 PD payoffs, integer points per player."""

    reward: int = 3
    temptation: int = 5
    punishment: int = 1
    sucker: int = 0

    def __post_init__(self) -> None:
        for name in ("reward", "temptation", "punishment", "sucker"):
            if not isinstance(getattr(self, name), int) or isinstance(getattr(self, name), bool):
                raise GameError(f"{name} must be an integer")
        t, r, p, s = self.temptation, self.reward, self.punishment, self.sucker
        if not t > r > p > s:
            raise GameError(f"payoffs violate T > R > P > S: T={t} R={r} P={p} S={s}")
        if not 2 * r > t + s:
            raise GameError(f"payoffs violate 2R > T + S: R={r} T={t} S={s}")

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "PayoffMatrix":
        known = {"reward", "temptation", "punishment", "sucker"}
        unknown = set(data) - known
        if unknown:
            raise GameError(f"unknown payoff keys: {sorted(unknown)}")
        return cls(**{k: data[k] for k in known if k in data})

    def to_dict(self) -> dict[str, int]:
        return {
            "reward": self.reward,
            "temptation": self.temptation,
            "punishment": self.punishment,
            "sucker": self.sucker,
        }

    def points(self, own: Action, other: Action) -> int:
        if own is Action.C:
            return self.reward if other is Action.C else self.sucker
        return self.temptation if other is Action.C else self.punishment


DEFAULT_MATRIX = PayoffMatrix()


def payoff(pair: ActionPair, matrix: PayoffMatrix = DEFAULT_MATRIX) -> tuple[int, int]:
    return matrix.points(pair.own, pair.other), matrix.points(pair.other, pair.own)


def interaction_welfare(pair: ActionPair, matrix: PayoffMatrix = DEFAULT_MATRIX) -> int:
    own, other = payoff(pair, matrix)
    return own + other
