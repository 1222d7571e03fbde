"""Shared-parameter advantage actor-critic that assigns information tiers.

One network is applied to every agent: it reads a 4-feature observation of
the agent and outputs a distribution over the three history tiers
(LA, LA_AR, LA_NR). Step 0 of a round is always NoInfo and never queries the
network. The reward for every agent's transition is the step's mean
interaction welfare.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

import numpy as np

from infogov import seeding
from infogov.game import MUTUAL_C, PayoffMatrix
from infogov.ledger import HistoryStore, InfoTier, coop_ratio, neighborhood_ratio
from infogov.network import Graph, neighbors

log = logging.getLogger(__name__)

OBS_DIM = 4
ACTION_TIERS = (InfoTier.LA, InfoTier.LA_AR, InfoTier.LA_NR)
INIT_SCALE = 0.08
CHECKPOINT_FORMAT = "infogov-ppa"
CHECKPOINT_VERSION = 1


class TrainingError(RuntimeError):
    pass


@dataclass
class TrainingConfig:
    lr_actor: float = 0.001
    lr_critic: float = 0.005
    gamma: float = 0.99
    entropy_coeff: float = 0.01
    episodes: int = 200
    hidden: int = 256
    eval_seeds: list[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.lr_actor <= 0 or self.lr_critic <= 0:
            raise ValueError("learning rates must be positive")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        if self.episodes < 0:
            raise ValueError("episodes must be non-negative")
        if self.entropy_coeff < 0:
            raise ValueError("entropy_coeff must be non-negative")

    def hash(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


# --- observations -----------------------------------------------------------


def build_observation(store: HistoryStore, g: Graph, a: int, t: int, T: int) -> np.ndarray:
    """[own ratio, pooled neighbour ratio, last-step (C,C) share, t/T]; absent values are 0."""
    if t > T:
        raise ValueError(f"step {t} beyond horizon {T}")
    own = coop_ratio(store, a)
    nbr = neighborhood_ratio(store, g, a)
    mutual = 0.0
    if t > 0:
        nb = neighbors(g, a)
        if nb:
            cc = sum(1 for b in nb if store.last_pair(a, b) == MUTUAL_C)
            mutual = cc / len(nb)
    return np.array([own or 0.0, nbr or 0.0, mutual, t / T], dtype=np.float64)


def build_observations(store: HistoryStore, g: Graph, t: int, T: int) -> np.ndarray:
    return np.stack([build_observation(store, g, a, t, T) for a in range(g.n)])


# --- network ----------------------------------------------------------------


def _mlp_forward(p: dict[str, np.ndarray], x: np.ndarray) -> tuple[np.ndarray, tuple]:
    pre = x @ p["W1"] + p["b1"]
    h = np.maximum(pre, 0.0)
    return h @ p["W2"] + p["b2"], (x, pre, h)


def _mlp_backward(p: dict[str, np.ndarray], cache: tuple, dout: np.ndarray) -> dict[str, np.ndarray]:
    x, pre, h = cache
    dh = (dout @ p["W2"].T) * (pre > 0)
    return {"W1": x.T @ dh, "b1": dh.sum(0), "W2": h.T @ dout, "b2": dout.sum(0)}


def _init_mlp(rng: np.random.Generator, n_in: int, hidden: int, n_out: int, scale: float) -> dict[str, np.ndarray]:
    return {
        "W1": rng.uniform(-scale, scale, (n_in, hidden)),
        "b1": np.zeros(hidden),
        "W2": rng.uniform(-scale, scale, (hidden, n_out)),
        "b2": np.zeros(n_out),
    }


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


class PolicyNetwork:
    """Actor (obs -> hidden ReLU -> 3 logits) and critic (obs -> hidden ReLU -> value)."""

    def __init__(self, actor: dict[str, np.ndarray], critic: dict[str, np.ndarray]):
        self.actor = actor
        self.critic = critic

    @classmethod
    def initialize(
        cls,
        seed: int,
        hidden: int = 256,
        obs_dim: int = OBS_DIM,
        n_actions: int = len(ACTION_TIERS),
        scale: float = INIT_SCALE,
    ) -> "PolicyNetwork":
        rng = seeding.stream(seeding.INIT, seed)
        return cls(_init_mlp(rng, obs_dim, hidden, n_actions, scale), _init_mlp(rng, obs_dim, hidden, 1, scale))

    def copy(self) -> "PolicyNetwork":
        return PolicyNetwork(
            {k: v.copy() for k, v in self.actor.items()}, {k: v.copy() for k, v in self.critic.items()}
        )

    def logits(self, obs: np.ndarray) -> np.ndarray:
        return _mlp_forward(self.actor, np.atleast_2d(obs))[0]

    def probs(self, obs: np.ndarray) -> np.ndarray:
        return softmax(self.logits(obs))

    def value(self, obs: np.ndarray) -> np.ndarray:
        return _mlp_forward(self.critic, np.atleast_2d(obs))[0][:, 0]

    def all_finite(self) -> bool:
        return all(np.isfinite(v).all() for d in (self.actor, self.critic) for v in d.values())

    def equals(self, other: "PolicyNetwork") -> bool:
        return all(
            np.array_equal(a[k], b[k]) for a, b in ((self.actor, other.actor), (self.critic, other.critic)) for k in a
        )


def actor_loss_and_grad(
    params: dict[str, np.ndarray],
    obs: np.ndarray,
    actions: np.ndarray,
    advantages: np.ndarray,
    entropy_coeff: float,
) -> tuple[float, dict[str, np.ndarray]]:
    """Loss -mean(A * log pi(a|s) + beta * H(pi(.|s))) with A held constant."""
    z, cache = _mlp_forward(params, obs)
    logp = log_softmax(z)
    pi = np.exp(logp)
    ent = -(pi * logp).sum(1)
    b = len(obs)
    rows = np.arange(b)
    loss = -float(np.mean(advantages * logp[rows, actions] + entropy_coeff * ent))
    onehot = np.zeros_like(z)
    onehot[rows, actions] = 1.0
    d_logp = advantages[:, None] * (onehot - pi)
    d_ent = -pi * (logp + ent[:, None])
    dz = -(d_logp + entropy_coeff * d_ent) / b
    return loss, _mlp_backward(params, cache, dz)


def critic_loss_and_grad(
    params: dict[str, np.ndarray], obs: np.ndarray, targets: np.ndarray
) -> tuple[float, dict[str, np.ndarray]]:
    """Loss mean((target - V(s))^2) with targets held constant."""
    v, cache = _mlp_forward(params, obs)
    delta = targets - v[:, 0]
    loss = float(np.mean(delta**2))
    dv = (-2.0 * delta / len(obs))[:, None]
    return loss, _mlp_backward(params, cache, dv)


# --- acting -----------------------------------------------------------------


def select_tiers(
    net: PolicyNetwork,
    obs: np.ndarray,
    t: int,
    mode: str = "sample",
    rng: Optional[np.random.Generator] = None,
) -> list[InfoTier]:
    if t == 0:
        return [InfoTier.NO_INFO] * len(obs)
    idx = choose_actions(net, obs, mode, rng)
    return [ACTION_TIERS[k] for k in idx]


def choose_actions(
    net: PolicyNetwork, obs: np.ndarray, mode: str, rng: Optional[np.random.Generator]
) -> np.ndarray:
    logits = net.logits(obs)
    if mode == "greedy":
        return logits.argmax(axis=1)
    if mode != "sample":
        raise ValueError(f"mode must be 'sample' or 'greedy', got {mode!r}")
    if rng is None:
        raise ValueError("sampling requires an rng")
    p = softmax(logits)
    u = rng.random(len(p))
    idx = (u[:, None] >= np.cumsum(p, axis=1)).sum(axis=1)
    return np.minimum(idx, p.shape[1] - 1)


class RLTierPolicy:
    """Tier policy backed by a trained network, for use in :func:`run_round`."""

    def __init__(self, net: PolicyNetwork, greedy: bool = True):
        self.net = net
        self.greedy = greedy

    def select(self, state, t: int) -> list[InfoTier]:
        obs = build_observations(state.store, state.graph, t, state.steps)
        if self.greedy:
            return select_tiers(self.net, obs, t, "greedy")
        return select_tiers(self.net, obs, t, "sample", seeding.stream(seeding.EVAL, state.round_seed, t))


# --- learning ---------------------------------------------------------------


def step_reward(step_record, matrix: PayoffMatrix = PayoffMatrix()) -> float:
    """Mean interaction welfare of a completed step."""
    interactions = step_record.interactions
    if not interactions:
        raise TrainingError(f"step {step_record.t} has no interactions")
    total = 0
    for _, _, pair, _, _ in interactions:
        own = matrix.points(pair.own, pair.other)
        other = matrix.points(pair.other, pair.own)
        total += own + other
    return total / len(interactions)


@dataclass
class Transition:
    obs: np.ndarray
    action: int
    reward: float
    next_obs: np.ndarray
    terminal: bool


def td_update(
    net: PolicyNetwork, batch: Sequence[Transition], cfg: TrainingConfig, train_actor: bool = True
) -> dict[str, float]:
    """One batch-averaged TD(0) actor-critic step, in place on ``net``.

    The advantage is the TD error computed before the critic moves; it is a
    constant in the actor gradient. ``train_actor=False`` freezes the actor.
    """
    if not batch:
        raise TrainingError("empty transition batch")
    obs = np.stack([tr.obs for tr in batch])
    nxt = np.stack([tr.next_obs for tr in batch])
    acts = np.array([tr.action for tr in batch])
    rew = np.array([tr.reward for tr in batch], dtype=np.float64)
    live = np.array([0.0 if tr.terminal else 1.0 for tr in batch])
    targets = rew + cfg.gamma * net.value(nxt) * live
    delta = targets - net.value(obs)
    c_loss, c_grad = critic_loss_and_grad(net.critic, obs, targets)
    a_loss, a_grad = actor_loss_and_grad(net.actor, obs, acts, delta, cfg.entropy_coeff)
    diag = {"critic_loss": c_loss, "actor_loss": a_loss, "mean_delta": float(delta.mean())}
    grads_ok = all(np.isfinite(g).all() for g in (*c_grad.values(), *a_grad.values()))
    if not (np.isfinite(c_loss) and np.isfinite(a_loss) and grads_ok):
        raise TrainingError(f"non-finite loss or gradient: {diag}")
    for k, g in c_grad.items():
        net.critic[k] -= cfg.lr_critic * g
    if train_actor:
        for k, g in a_grad.items():
            net.actor[k] -= cfg.lr_actor * g
    return diag


@dataclass
class CurvePoint:
    episode: int
    discounted_return: float
    mean_coop: float


def train(
    scenario,
    cfg: TrainingConfig,
    seed: int,
    policies=None,
    net: Optional[PolicyNetwork] = None,
    progress: Optional[Callable[[CurvePoint], None]] = None,
) -> tuple[PolicyNetwork, list[CurvePoint]]:
    """Train on ``cfg.episodes`` rounds, each on a fresh graph.

    Training rounds are drawn from a master seed derived from ``seed``, so
    they never coincide with evaluation rounds generated from small integer
    master seeds.
    """
    from infogov.simulation import RoundState, build_policies, run_step
    from infogov.network import generate_connected_round_graph

    policies = build_policies(scenario) if policies is None else policies
    net = PolicyNetwork.initialize(seed, cfg.hidden) if net is None else net
    master = seeding.derive_seed(seeding.GOVERNOR, seed)
    act_rng = seeding.stream(seeding.GOVERNOR, seed, 1)
    T, n = scenario.steps, scenario.agents
    curve = []
    for ep in range(cfg.episodes):
        rs = seeding.round_seed(master, ep)
        state = RoundState(generate_connected_round_graph(n, scenario.edge_probability, rs), rs, T)
        ret, disc, coops = 0.0, 1.0, []
        try:
            for t in range(T):
                if t == 0:
                    rec = run_step(state, [InfoTier.NO_INFO] * n, policies, t, scenario.matrix)
                    coops.append(rec.coop_rate())
                    continue
                obs = build_observations(state.store, state.graph, t, T)
                acts = choose_actions(net, obs, "sample", act_rng)
                rec = run_step(state, [ACTION_TIERS[k] for k in acts], policies, t, scenario.matrix)
                coops.append(rec.coop_rate())
                r = step_reward(rec, scenario.matrix)
                ret += disc * r
                disc *= cfg.gamma
                terminal = t == T - 1
                nxt = build_observations(state.store, state.graph, t + 1, T)
                batch = [Transition(obs[a], int(acts[a]), r, nxt[a], terminal) for a in range(n)]
                td_update(net, batch, cfg)
        except TrainingError as exc:
            raise TrainingError(f"episode {ep}: {exc}") from exc
        point = CurvePoint(ep, ret, float(np.mean(coops)))
        curve.append(point)
        if progress is not None:
            progress(point)
    return net, curve


def write_curve(curve: Sequence[CurvePoint], path: Union[str, Path]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["episode", "discounted_return", "mean_coop"])
        for p in curve:
            w.writerow([p.episode, repr(p.discounted_return), repr(p.mean_coop)])


# --- checkpoints ------------------------------------------------------------


def save_checkpoint(net: PolicyNetwork, path: Union[str, Path], cfg: Optional[TrainingConfig] = None) -> None:
    payload = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "config": None if cfg is None else asdict(cfg),
        "config_hash": None if cfg is None else cfg.hash(),
        "actor": {k: v.tolist() for k, v in net.actor.items()},
        "critic": {k: v.tolist() for k, v in net.critic.items()},
    }
    Path(path).write_text(json.dumps(payload))


def load_checkpoint(path: Union[str, Path]) -> PolicyNetwork:
    payload = json.loads(Path(path).read_text())
    if payload.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"{path} is not a governor checkpoint")
    if payload.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {payload.get('version')}")
    if payload.get("config") is not None and TrainingConfig(**payload["config"]).hash() != payload["config_hash"]:
        raise ValueError(f"{path}: config hash mismatch")
    net = PolicyNetwork(
        {k: np.array(v, dtype=np.float64) for k, v in payload["actor"].items()},
        {k: np.array(v, dtype=np.float64) for k, v in payload["critic"].items()},
    )
    if not net.all_finite():
        raise ValueError(f"{path} holds non-finite weights")
    return net
