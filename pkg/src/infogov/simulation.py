"""Round orchestration: graph, tier assignment, two-phase steps and metrics."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Protocol, Sequence, Union

import numpy as np

from infogov import kernels, seeding
from infogov.agents import (
    AgentPolicy,
    ConstantPolicy,
    DecisionError,
    TableSLA,
    load_calibration,
    load_default_calibration,
)
from infogov.game import ALL_PAIRS, Action, ActionPair, PayoffMatrix, payoff
from infogov.ledger import (
    HistoryStore,
    InfoTier,
    build_view,
    coop_ratio,
    neighborhood_ratio,
    record,
)
from infogov.network import Graph, edge_list, generate_connected_round_graph, neighbors

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


@dataclass
class ScenarioConfig:
    agents: int = 20
    edge_probability: float = 0.25
    steps: int = 20
    rounds: int = 10
    matrix: PayoffMatrix = field(default_factory=PayoffMatrix)
    agent_backend: str = "table"
    calibration: Optional[str] = None
    tier_policy: str = "static:LA"
    seed: int = 0
    llm: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.agents < 2:
            raise ConfigError("agents must be >= 2")
        if not 0.0 <= self.edge_probability <= 1.0:
            raise ConfigError("edge_probability must lie in [0, 1]")
        if self.steps < 1:
            raise ConfigError("steps must be >= 1")
        if self.rounds < 1:
            raise ConfigError("rounds must be >= 1")
        if self.agent_backend not in ("table", "llm", "all-c", "all-d"):
            raise ConfigError(f"unknown agent_backend {self.agent_backend!r}")
        kind, _, arg = self.tier_policy.partition(":")
        if kind == "static":
            if InfoTier.parse(arg) is InfoTier.NO_INFO:
                raise ConfigError("a static NoInfo policy is only allowed at step 0")
        elif kind != "rl" or not arg:
            raise ConfigError(f"tier_policy must be 'static:<tier>' or 'rl:<checkpoint>', got {self.tier_policy!r}")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ScenarioConfig":
        data = dict(data)
        known = set(cls.__dataclass_fields__)
        matrix_keys = {"reward", "temptation", "punishment", "sucker"}
        m = dict(data.pop("matrix", {}) or {})
        for k in matrix_keys & set(data):
            m[k] = data.pop(k)
        if "steps_per_round" in data:
            data["steps"] = data.pop("steps_per_round")
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(matrix=PayoffMatrix.from_mapping(m), **data)

    @classmethod
    def from_json(cls, path: Union[str, Path]) -> "ScenarioConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict[str, Any]:
        return {
            "agents": self.agents,
            "edge_probability": self.edge_probability,
            "steps": self.steps,
            "rounds": self.rounds,
            "matrix": self.matrix.to_dict(),
            "agent_backend": self.agent_backend,
            "calibration": self.calibration,
            "tier_policy": self.tier_policy,
            "seed": self.seed,
            "llm": dict(self.llm),
        }

    def replace(self, **changes: Any) -> "ScenarioConfig":
        d = self.to_dict()
        d.update(changes)
        return ScenarioConfig.from_dict(d)


class TierPolicy(Protocol):
    def select(self, state: "RoundState", t: int) -> list[InfoTier]: ...


class StaticTierPolicy:
    def __init__(self, tier: InfoTier):
        if tier is InfoTier.NO_INFO:
            raise ConfigError("a static NoInfo policy is only allowed at step 0")
        self.tier = tier

    def select(self, state: "RoundState", t: int) -> list[InfoTier]:
        return [self.tier] * state.graph.n


@dataclass
class StepRecord:
    t: int
    tiers: list[InfoTier]
    interactions: list[tuple[int, int, ActionPair, int, int]]
    own_ratios: list[Optional[float]]
    neighborhood_ratios: list[Optional[float]]

    @property
    def n_interactions(self) -> int:
        return len(self.interactions)

    def coop_rate(self) -> float:
        c = sum((p.own is Action.C) + (p.other is Action.C) for _, _, p, _, _ in self.interactions)
        return c / (2 * len(self.interactions))

    def welfare_total(self) -> int:
        return sum(pi + pj for _, _, _, pi, pj in self.interactions)

    def normalized_welfare(self) -> float:
        if not self.interactions:
            raise ValueError(f"step {self.t} has no interactions")
        return self.welfare_total() / len(self.interactions)

    def pair_shares(self) -> tuple[float, float, float]:
        """Shares of (CC, CD+DC, DD) among this step's interactions."""
        m = len(self.interactions)
        cc = sum(1 for _, _, p, _, _ in self.interactions if p.code == 0)
        dd = sum(1 for _, _, p, _, _ in self.interactions if p.code == 3)
        return cc / m, (m - cc - dd) / m, dd / m

    def to_dict(self) -> dict[str, Any]:
        return {
            "t": self.t,
            "tiers": [x.value for x in self.tiers],
            "interactions": [[i, j, str(p), pi, pj] for i, j, p, pi, pj in self.interactions],
            "own_ratios": self.own_ratios,
            "neighborhood_ratios": self.neighborhood_ratios,
            "metrics": {
                "coop_rate": self.coop_rate(),
                "welfare": self.normalized_welfare(),
                "pair_shares": list(self.pair_shares()),
            },
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "StepRecord":
        return cls(
            t=d["t"],
            tiers=[InfoTier(x) for x in d["tiers"]],
            interactions=[(i, j, ActionPair.parse(p), pi, pj) for i, j, p, pi, pj in d["interactions"]],
            own_ratios=d["own_ratios"],
            neighborhood_ratios=d["neighborhood_ratios"],
        )


@dataclass
class RoundLog:
    round_index: int
    round_seed: int
    n: int
    edges: list[tuple[int, int]]
    steps: list[StepRecord] = field(default_factory=list)
    valid: bool = True
    error: Optional[str] = None

    def coop_series(self) -> list[float]:
        return [s.coop_rate() for s in self.steps]

    def welfare_series(self) -> list[float]:
        return [s.normalized_welfare() for s in self.steps]

    def metrics(self) -> dict[str, float]:
        """The four per-round summary metrics: average and final C rate and welfare."""
        c, w = self.coop_series(), self.welfare_series()
        return {
            "avg_coop": float(np.mean(c)),
            "final_coop": c[-1],
            "avg_sw": float(np.mean(w)),
            "final_sw": w[-1],
        }

    def to_dict(self) -> dict[str, Any]:
        return {
            "round_index": self.round_index,
            "round_seed": self.round_seed,
            "n": self.n,
            "edges": [list(e) for e in self.edges],
            "valid": self.valid,
            "error": self.error,
            "steps": [s.to_dict() for s in self.steps],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "RoundLog":
        return cls(
            round_index=d["round_index"],
            round_seed=d["round_seed"],
            n=d["n"],
            edges=[tuple(e) for e in d["edges"]],
            steps=[StepRecord.from_dict(s) for s in d["steps"]],
            valid=d["valid"],
            error=d["error"],
        )


class RoundState:
    """Mutable per-round state: the graph, the history store and cached layouts."""

    def __init__(self, graph: Graph, round_seed: int, steps: int):
        self.graph = graph
        self.round_seed = round_seed
        self.steps = steps
        self.store = HistoryStore(graph.n)
        self.edges = edge_list(graph)
        self.records: list[StepRecord] = []
        self.t = 0
        self._csr: Optional[tuple[np.ndarray, ...]] = None

    def csr(self) -> tuple[np.ndarray, ...]:
        """(indptr, indices, edge_i, edge_j, slot_i, slot_j) for the compiled kernel."""
        if self._csr is None:
            g = self.graph
            nbrs = [neighbors(g, a) for a in range(g.n)]
            indptr = np.zeros(g.n + 1, dtype=np.int64)
            indptr[1:] = np.cumsum([len(x) for x in nbrs])
            indices = np.array([b for x in nbrs for b in x], dtype=np.int64)
            ei = np.array([i for i, _ in self.edges], dtype=np.int64)
            ej = np.array([j for _, j in self.edges], dtype=np.int64)
            slot_i = np.array([indptr[i] + nbrs[i].index(j) for i, j in self.edges], dtype=np.int64)
            slot_j = np.array([indptr[j] + nbrs[j].index(i) for i, j in self.edges], dtype=np.int64)
            self._csr = (indptr, indices, ei, ej, slot_i, slot_j)
        return self._csr


PolicyArg = Union[AgentPolicy, Sequence[AgentPolicy]]


def _fast_table(policies: PolicyArg) -> Optional[TableSLA]:
    if isinstance(policies, TableSLA):
        return policies
    if isinstance(policies, Sequence) and policies and all(p is policies[0] for p in policies):
        return _fast_table(policies[0])
    return None


def _decide_fast(state: RoundState, tiers: Sequence[InfoTier], table: TableSLA, t: int) -> list[ActionPair]:
    indptr, indices, ei, ej, slot_i, slot_j = state.csr()
    store = state.store
    n = state.graph.n
    u = np.empty(indptr[-1], dtype=np.float64)
    for a in range(n):
        lo, hi = indptr[a], indptr[a + 1]
        if hi > lo:
            u[lo:hi] = seeding.decision_stream(state.round_seed, a, t).random(hi - lo)
    last = np.array(
        [-1 if (p := store.last_pair(i, j)) is None else p.code for i, j in state.edges], dtype=np.int8
    )
    first, la, nr, ar = _table_arrays(table)
    out = kernels.table_step(
        ei, ej,
        np.array([x.code for x in tiers], dtype=np.int8),
        last,
        np.asarray(store.coops, dtype=np.int64),
        np.asarray(store.actions, dtype=np.int64),
        indptr, indices,
        u[slot_i], u[slot_j],
        first, la, nr, ar,
    )
    return [ALL_PAIRS[k] for k in (2 * out[:, 0] + out[:, 1]).tolist()]


def _table_arrays(table: TableSLA) -> tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    cached = getattr(table, "_arrays", None)
    if cached is None or cached[0] is not table.table:
        cached = (table.table, table.table.as_arrays())
        table._arrays = cached
    return cached[1]


def _decide_views(
    state: RoundState, tiers: Sequence[InfoTier], policies: PolicyArg, t: int
) -> list[ActionPair]:
    g, store = state.graph, state.store
    per_agent = policies if isinstance(policies, Sequence) else [policies] * g.n
    # views first, from the end-of-previous-step snapshot
    requests = []
    for i, j in state.edges:
        requests.append((i, build_view(store, g, tiers[i], i, j)))
        requests.append((j, build_view(store, g, tiers[j], j, i)))
    batcher = per_agent[0] if all(p is per_agent[0] for p in per_agent) else None
    if batcher is not None and hasattr(batcher, "decide_batch"):
        actions = list(batcher.decide_batch([v for _, v in requests]))
    else:
        streams: dict[int, np.random.Generator] = {}
        actions = []
        for a, view in requests:
            rng = streams.get(a)
            if rng is None:
                rng = streams[a] = seeding.decision_stream(state.round_seed, a, t)
            actions.append(per_agent[a].decide(view, rng))
    return [ActionPair(Action(actions[2 * k]), Action(actions[2 * k + 1])) for k in range(len(state.edges))]


def run_step(
    state: RoundState,
    tier_vector: Sequence[InfoTier],
    policies: PolicyArg,
    t: int,
    matrix: PayoffMatrix = PayoffMatrix(),
    fast: Optional[bool] = None,
) -> StepRecord:
    """Play every edge once: all decisions are collected before any history write.

    ``fast`` selects the compiled table kernel; by default it is used whenever a
    single :class:`TableSLA` drives every agent.
    """
    g = state.graph
    if len(tier_vector) != g.n:
        raise ValueError(f"need {g.n} tiers, got {len(tier_vector)}")
    if t >= state.steps:
        raise ValueError(f"step {t} beyond horizon {state.steps}")
    table = _fast_table(policies)
    if fast and table is None:
        raise ValueError("fast path requires a single TableSLA for all agents")
    use_fast = table is not None if fast is None else fast
    own = [coop_ratio(state.store, a) for a in range(g.n)]
    nbr = [neighborhood_ratio(state.store, g, a) for a in range(g.n)]
    if use_fast:
        pairs = _decide_fast(state, tier_vector, table, t)
    else:
        pairs = _decide_views(state, tier_vector, policies, t)
    interactions = []
    for (i, j), pair in zip(state.edges, pairs):
        pi, pj = payoff(pair, matrix)
        interactions.append((i, j, pair, pi, pj))
        record(state.store, i, j, pair)
    rec = StepRecord(t, list(tier_vector), interactions, own, nbr)
    state.records.append(rec)
    state.t = t + 1
    return rec


def new_round_state(cfg: ScenarioConfig, round_index: int) -> RoundState:
    rs = seeding.round_seed(cfg.seed, round_index)
    graph = generate_connected_round_graph(cfg.agents, cfg.edge_probability, rs)
    return RoundState(graph, rs, cfg.steps)


def build_policies(cfg: ScenarioConfig) -> AgentPolicy:
    if cfg.agent_backend == "table":
        table = load_calibration(cfg.calibration) if cfg.calibration else load_default_calibration()
        return TableSLA(table)
    if cfg.agent_backend == "all-c":
        return ConstantPolicy(Action.C)
    if cfg.agent_backend == "all-d":
        return ConstantPolicy(Action.D)
    from infogov.llm import LlmSLA

    return LlmSLA.from_config(cfg.llm, cfg.matrix)


def build_tier_policy(cfg: ScenarioConfig) -> TierPolicy:
    kind, _, arg = cfg.tier_policy.partition(":")
    if kind == "static":
        return StaticTierPolicy(InfoTier.parse(arg))
    from infogov.governor import RLTierPolicy, load_checkpoint

    return RLTierPolicy(load_checkpoint(arg), greedy=True)


def run_round(
    cfg: ScenarioConfig,
    round_index: int,
    policies: Optional[PolicyArg] = None,
    tier_policy: Optional[TierPolicy] = None,
) -> RoundLog:
    """Fresh graph, all-NoInfo at step 0, then the tier policy for the remaining steps."""
    policies = build_policies(cfg) if policies is None else policies
    tier_policy = build_tier_policy(cfg) if tier_policy is None else tier_policy
    state = new_round_state(cfg, round_index)
    for t in range(cfg.steps):
        tiers = [InfoTier.NO_INFO] * cfg.agents if t == 0 else tier_policy.select(state, t)
        run_step(state, tiers, policies, t, cfg.matrix)
    return RoundLog(round_index, state.round_seed, cfg.agents, list(state.edges), state.records)


@dataclass
class ExperimentResult:
    logs: list[RoundLog]
    summary: dict[str, float]
    invalid: list[int]

    @property
    def valid_logs(self) -> list[RoundLog]:
        return [lg for lg in self.logs if lg.valid]


METRICS = ("avg_coop", "final_coop", "avg_sw", "final_sw")


def mean_std(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Mean and population std over axis 0, computed about the first row.

    The shift keeps identical rows at exactly zero spread.
    """
    values = np.asarray(values, dtype=np.float64)
    dev = values - values[0]
    return values[0] + dev.mean(axis=0), dev.std(axis=0)


def summarize(logs: Sequence[RoundLog]) -> dict[str, float]:
    """Across-round mean and population std of the four round metrics."""
    valid = [lg for lg in logs if lg.valid]
    if not valid:
        raise ValueError("no valid rounds to summarize")
    per = [lg.metrics() for lg in valid]
    out: dict[str, float] = {"rounds": float(len(valid))}
    for k in METRICS:
        mean, std = mean_std(np.array([m[k] for m in per]))
        out[k] = float(mean)
        out[f"{k}_std"] = float(std)
    return out


def run_experiment(
    cfg: ScenarioConfig,
    policies: Optional[PolicyArg] = None,
    tier_policy: Optional[TierPolicy] = None,
    round_indices: Optional[Sequence[int]] = None,
) -> ExperimentResult:
    policies = build_policies(cfg) if policies is None else policies
    tier_policy = build_tier_policy(cfg) if tier_policy is None else tier_policy
    indices = list(range(cfg.rounds)) if round_indices is None else list(round_indices)
    logs, invalid = [], []
    for k in indices:
        try:
            logs.append(run_round(cfg, k, policies, tier_policy))
        except DecisionError as exc:
            log.warning("round %d invalid: %s", k, exc)
            rs = seeding.round_seed(cfg.seed, k)
            logs.append(RoundLog(k, rs, cfg.agents, [], [], valid=False, error=str(exc)))
            invalid.append(k)
    summary = summarize(logs) if len(invalid) < len(logs) else {}
    return ExperimentResult(logs, summary, invalid)
