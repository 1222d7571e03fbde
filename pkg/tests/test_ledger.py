import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from infogov.game import Action, ActionPair
from infogov.ledger import (
    TIERS,
    CoopBucket,
    HistoryStore,
    InfoTier,
    InformationView,
    LedgerError,
    bucket,
    build_view,
    coop_ratio,
    neighborhood_ratio,
    record,
)
from infogov.network import Graph, edge_list, generate_er

C, D = Action.C, Action.D


def test_record_mirrors_and_counts():
    s = HistoryStore(3)
    record(s, 0, 1, ActionPair(C, D))
    assert s.history(0, 1) == [ActionPair(C, D)]
    assert s.history(1, 0) == [ActionPair(D, C)]
    assert (s.actions[0], s.coops[0]) == (1, 1)
    assert (s.actions[1], s.coops[1]) == (1, 0)
    record(s, 1, 0, ActionPair(C, C))
    assert len(s.history(0, 1)) == len(s.history(1, 0)) == 2
    with pytest.raises(LedgerError):
        record(s, 2, 2, ActionPair(C, C))


def _store_with(actions_per_agent):
    """Agent k plays the given own actions against a dummy partner (last index)."""
    n = len(actions_per_agent) + 1
    s = HistoryStore(n)
    for a, acts in enumerate(actions_per_agent):
        for x in acts:
            s.pairs.setdefault((a, n - 1), []).append(ActionPair(x, C))
            s.actions[a] += 1
            s.coops[a] += x is C
    return s


def test_coop_ratio_examples():
    s = _store_with([[C, C, D], [], [D, D]])
    assert coop_ratio(s, 0) == pytest.approx(2 / 3)
    assert coop_ratio(s, 1) is None
    assert coop_ratio(s, 2) == 0.0


def test_neighborhood_ratio_examples():
    s = _store_with([[], [C, D], [C], [D, D, D]])
    g = Graph.from_edges(5, [(0, 1)])
    assert neighborhood_ratio(s, g, 0) == 0.5
    g = Graph.from_edges(5, [(0, 2), (0, 3)])
    assert neighborhood_ratio(s, g, 0) == 0.25
    assert neighborhood_ratio(s, Graph.from_edges(5, []), 0) is None


@pytest.mark.parametrize(
    "r, b",
    [
        (0.0, CoopBucket.RARELY),
        (0.20, CoopBucket.RARELY),
        (0.3299, CoopBucket.RARELY),
        (0.33, CoopBucket.SOMETIMES),
        (0.50, CoopBucket.SOMETIMES),
        (0.66, CoopBucket.SOMETIMES),
        (0.67, CoopBucket.OFTEN),
        (1.0, CoopBucket.OFTEN),
    ],
)
def test_bucket_boundaries(r, b):
    assert bucket(r) is b


@pytest.mark.parametrize("r", [-0.01, 1.01])
def test_bucket_out_of_range(r):
    with pytest.raises(LedgerError):
        bucket(r)


def test_build_view_examples():
    g = Graph.complete(3)
    s = HistoryStore(3)
    assert build_view(s, g, InfoTier.NO_INFO, 0, 1) == InformationView(InfoTier.NO_INFO)
    record(s, 0, 1, ActionPair(C, C))
    v = build_view(s, g, InfoTier.LA, 0, 1)
    assert v.last_pair == ActionPair(C, C) and v.own_bucket is None
    with pytest.raises(LedgerError):
        build_view(s, Graph.from_edges(3, [(0, 1)]), InfoTier.LA, 0, 2)


def test_build_view_la_nr_buckets():
    # agent 0: ratio 0.5; neighbours 1 and 2 pooled 7/10
    g = Graph.from_edges(4, [(0, 1), (0, 2)])
    s = HistoryStore(4)
    s.actions[:3] = [2, 5, 5]
    s.coops[:3] = [1, 4, 3]
    s.pairs[(0, 1)] = [ActionPair(D, C)]
    v = build_view(s, g, InfoTier.LA_NR, 0, 1)
    assert v.own_bucket is CoopBucket.SOMETIMES
    assert v.neighborhood_bucket is CoopBucket.OFTEN
    assert v.opponent_bucket is None


def test_view_rejects_forbidden_fields():
    with pytest.raises(LedgerError):
        InformationView(InfoTier.NO_INFO, ActionPair(C, C))
    with pytest.raises(LedgerError):
        InformationView(InfoTier.LA, ActionPair(C, C), CoopBucket.OFTEN)
    with pytest.raises(LedgerError):
        InformationView(InfoTier.LA_AR, ActionPair(C, C), neighborhood_bucket=CoopBucket.OFTEN)
    with pytest.raises(LedgerError):
        InformationView(InfoTier.LA_NR, ActionPair(C, C), opponent_bucket=CoopBucket.OFTEN)


ALLOWED = {
    InfoTier.NO_INFO: set(),
    InfoTier.LA: {"last_pair"},
    InfoTier.LA_AR: {"last_pair", "own_bucket", "opponent_bucket"},
    InfoTier.LA_NR: {"last_pair", "own_bucket", "neighborhood_bucket"},
}


@st.composite
def random_states(draw):
    n = draw(st.integers(2, 8))
    g = generate_er(n, draw(st.floats(0.2, 1.0)), draw(st.integers(0, 10_000)))
    s = HistoryStore(n)
    edges = edge_list(g)
    for _ in range(draw(st.integers(0, 4))):
        for i, j in edges:
            record(s, i, j, ActionPair(draw(st.sampled_from(list(Action))), draw(st.sampled_from(list(Action)))))
    return g, s


@given(random_states())
@settings(max_examples=80, deadline=None)
def test_ledger_properties(state):
    g, s = state
    for a in range(g.n):
        r = coop_ratio(s, a)
        if r is not None:
            assert 0.0 <= r <= 1.0
            assert abs(r * s.actions[a] - round(r * s.actions[a])) < 1e-9
        assert s.actions[a] == sum(len(h) for (i, _), h in s.pairs.items() if i == a)
        assert s.coops[a] == sum(p.own is C for (i, _), h in s.pairs.items() if i == a for p in h)
    for i, j in edge_list(g):
        for tier in TIERS:
            v = build_view(s, g, tier, i, j)
            present = {f for f in ("last_pair", "own_bucket", "opponent_bucket", "neighborhood_bucket") if getattr(v, f) is not None}
            assert present <= ALLOWED[tier]
        vi = build_view(s, g, InfoTier.LA, i, j)
        vj = build_view(s, g, InfoTier.LA, j, i)
        if vi.last_pair is not None:
            assert vi.last_pair == vj.last_pair.swapped()
        if len(g.edges) and g.degree(i) == 1:
            (b,) = [x for x in range(g.n) if g.has_edge(i, x)]
            assert neighborhood_ratio(s, g, i) == coop_ratio(s, b)


def test_clear_between_rounds():
    s = HistoryStore(2)
    record(s, 0, 1, ActionPair(C, C))
    s.clear()
    assert s.pairs == {} and s.actions == [0, 0] and coop_ratio(s, 0) is None
