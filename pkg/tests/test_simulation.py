import json

import numpy as np
import pytest

from infogov.agents import ConstantPolicy, DecisionError
from infogov.game import Action, ActionPair, PayoffMatrix
from infogov.ledger import InfoTier
from infogov.network import Graph
from infogov.simulation import (
    ConfigError,
    RoundLog,
    RoundState,
    ScenarioConfig,
    StaticTierPolicy,
    StepRecord,
    run_experiment,
    run_round,
    run_step,
    summarize,
)

C, D = Action.C, Action.D


class Recorder:
    """Policy that logs every view it is shown and answers from a rule."""

    def __init__(self, rule=lambda view: C):
        self.views = []
        self.rule = rule

    def decide(self, view, rng=None):
        self.views.append(view)
        return self.rule(view)


class Flaky:
    def __init__(self, fail_after):
        self.calls = 0
        self.fail_after = fail_after

    def decide(self, view, rng=None):
        self.calls += 1
        if self.calls > self.fail_after:
            raise DecisionError("endpoint gave up")
        return C


def test_two_agents_cooperating():
    st = RoundState(Graph.from_edges(2, [(0, 1)]), 1, 3)
    rec = run_step(st, [InfoTier.NO_INFO] * 2, ConstantPolicy(C), 0)
    assert rec.interactions == [(0, 1, ActionPair(C, C), 3, 3)]
    assert st.store.actions == [1, 1] and st.store.coops == [1, 1]
    assert rec.coop_rate() == 1.0 and rec.normalized_welfare() == 6.0


def test_middle_of_path_decides_twice():
    st = RoundState(Graph.from_edges(3, [(0, 1), (1, 2)]), 1, 2)
    pol = Recorder()
    run_step(st, [InfoTier.NO_INFO] * 3, pol, 0)
    assert len(pol.views) == 4
    assert st.store.actions == [1, 2, 1]


def test_views_use_previous_step_snapshot():
    # agent 1 meets 0 then 2; its view of 2 must not reflect the game with 0 in the same step
    st = RoundState(Graph.from_edges(3, [(0, 1), (1, 2)]), 1, 3)
    run_step(st, [InfoTier.NO_INFO] * 3, ConstantPolicy(D), 0)
    pol = Recorder()
    run_step(st, [InfoTier.LA_NR] * 3, pol, 1)
    assert all(v.last_pair == ActionPair(D, D) for v in pol.views)
    assert all(v.own_bucket.value == "Rarely" for v in pol.views)
    assert st.store.actions == [2, 4, 2]


def test_history_mirrors_for_coplayer():
    st = RoundState(Graph.from_edges(2, [(0, 1)]), 1, 3)
    alt = Recorder(lambda v: C if len(alt.views) % 2 else D)
    run_step(st, [InfoTier.NO_INFO] * 2, alt, 0)
    pair = st.store.last_pair(0, 1)
    assert st.store.last_pair(1, 0) == pair.swapped()


def test_step_beyond_horizon_and_tier_length():
    st = RoundState(Graph.from_edges(2, [(0, 1)]), 1, 1)
    with pytest.raises(ValueError):
        run_step(st, [InfoTier.LA], ConstantPolicy(C), 0)
    run_step(st, [InfoTier.NO_INFO] * 2, ConstantPolicy(C), 0)
    with pytest.raises(ValueError):
        run_step(st, [InfoTier.LA] * 2, ConstantPolicy(C), 1)


def test_round_is_deterministic(table_sla):
    cfg = ScenarioConfig(seed=11, steps=8)
    assert run_round(cfg, 3, table_sla).to_json() == run_round(cfg, 3, table_sla).to_json()
    assert run_round(cfg, 3, table_sla).to_json() != run_round(cfg.replace(seed=12), 3, table_sla).to_json()


def test_static_tier_schedule(table_sla):
    lg = run_round(ScenarioConfig(steps=5), 0, table_sla, StaticTierPolicy(InfoTier.LA))
    assert set(lg.steps[0].tiers) == {InfoTier.NO_INFO}
    assert all(set(s.tiers) == {InfoTier.LA} for s in lg.steps[1:])


def test_single_step_round(table_sla):
    lg = run_round(ScenarioConfig(steps=1), 0, table_sla)
    assert len(lg.steps) == 1
    assert lg.metrics()["avg_coop"] == lg.metrics()["final_coop"]


def test_rounds_get_distinct_graphs(table_sla):
    res = run_experiment(ScenarioConfig(steps=2, rounds=5), table_sla)
    assert len({tuple(lg.edges) for lg in res.logs}) == 5
    assert all(lg.edges for lg in res.logs)


@pytest.mark.parametrize("backend, sw, coop", [("all-d", 2.0, 0.0), ("all-c", 6.0, 1.0)])
def test_constant_populations(backend, sw, coop):
    res = run_experiment(ScenarioConfig(agent_backend=backend, steps=4, rounds=3))
    for k in ("avg_sw", "final_sw"):
        assert res.summary[k] == sw
    for k in ("avg_coop", "final_coop"):
        assert res.summary[k] == coop
    assert res.summary["avg_sw_std"] == 0.0


def test_step_invariants(table_sla):
    m = PayoffMatrix()
    lg = run_round(ScenarioConfig(seed=4), 2, table_sla)
    acts = np.zeros(20)
    for st in lg.steps:
        assert 0.0 <= st.coop_rate() <= 1.0
        assert 2.0 <= st.normalized_welfare() <= 6.0
        assert abs(sum(st.pair_shares()) - 1.0) < 1e-12
        for i, j, pair, pi, pj in st.interactions:
            assert (pi, pj) == (m.points(pair.own, pair.other), m.points(pair.other, pair.own))
            acts[i] += 1
            acts[j] += 1
    assert acts.sum() == 2 * len(lg.edges) * len(lg.steps)


def test_round_log_json_round_trip(table_sla):
    lg = run_round(ScenarioConfig(steps=3), 1, table_sla)
    back = RoundLog.from_dict(json.loads(lg.to_json()))
    assert back.to_json() == lg.to_json()
    assert back.metrics() == lg.metrics()


def test_decision_failure_invalidates_round():
    cfg = ScenarioConfig(steps=3, rounds=3)
    flaky = Flaky(fail_after=10**9)
    first = run_experiment(cfg, flaky)
    budget = sum(2 * len(lg.edges) * 3 for lg in first.logs[:1]) + 5
    res = run_experiment(cfg, Flaky(fail_after=budget))
    assert res.invalid == [1, 2]
    assert [lg.valid for lg in res.logs] == [True, False, False]
    assert res.summary["rounds"] == 1.0
    assert "gave up" in res.logs[1].error


def test_all_rounds_invalid_gives_empty_summary():
    res = run_experiment(ScenarioConfig(steps=2, rounds=2), Flaky(fail_after=0))
    assert res.summary == {} and res.invalid == [0, 1]
    with pytest.raises(ValueError):
        summarize(res.logs)


def test_summary_uses_population_std():
    def log_with(coop):
        pair = ActionPair(C, C) if coop else ActionPair(D, D)
        p = 3 if coop else 1
        return RoundLog(0, 0, 2, [(0, 1)], [StepRecord(0, [InfoTier.NO_INFO] * 2, [(0, 1, pair, p, p)], [0, 0], [0, 0])])

    s = summarize([log_with(True), log_with(False)])
    assert s["avg_coop"] == 0.5 and s["avg_coop_std"] == 0.5
    assert s["avg_sw"] == 4.0 and s["avg_sw_std"] == 2.0


@pytest.mark.parametrize(
    "kw",
    [
        dict(agents=1),
        dict(edge_probability=1.5),
        dict(steps=0),
        dict(rounds=0),
        dict(agent_backend="human"),
        dict(tier_policy="static:NoInfo"),
        dict(tier_policy="greedy"),
        dict(tier_policy="rl:"),
        dict(seed=-1),
    ],
)
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        ScenarioConfig(**kw)


def test_config_from_dict_aliases(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"steps_per_round": 7, "temptation": 6, "reward": 4, "rounds": 2}))
    cfg = ScenarioConfig.from_json(p)
    assert cfg.steps == 7 and cfg.matrix.temptation == 6 and cfg.rounds == 2
    assert ScenarioConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(ConfigError):
        ScenarioConfig.from_dict({"stepz": 3})
