import itertools

import pytest

from infogov.game import ALL_PAIRS, Action, ActionPair, GameError, PayoffMatrix, interaction_welfare, payoff

C, D = Action.C, Action.D


@pytest.mark.parametrize(
    "pair, expected",
    [((C, C), (3, 3)), ((C, D), (0, 5)), ((D, C), (5, 0)), ((D, D), (1, 1))],
)
def test_default_payoffs(pair, expected):
    assert payoff(ActionPair(*pair)) == expected


@pytest.mark.parametrize("pair, expected", [((C, C), 6), ((D, D), 2), ((C, D), 5), ((D, C), 5)])
def test_interaction_welfare(pair, expected):
    assert interaction_welfare(ActionPair(*pair)) == expected


@pytest.mark.parametrize("a, b", list(itertools.product(Action, Action)))
def test_payoff_symmetric_under_swap(a, b):
    m = PayoffMatrix(reward=4, temptation=7, punishment=2, sucker=-1)
    assert payoff(ActionPair(a, b), m)[0] == payoff(ActionPair(b, a), m)[1]


def test_welfare_values_for_defaults():
    assert {interaction_welfare(p) for p in ALL_PAIRS} == {6, 5, 2}


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(reward=5, temptation=3, punishment=1, sucker=0),  # T < R
        dict(reward=3, temptation=5, punishment=0, sucker=1),  # P < S
        dict(reward=3, temptation=7, punishment=1, sucker=0),  # 2R < T + S
        dict(reward=3, temptation=6, punishment=1, sucker=0),  # 2R == T + S
        dict(reward=3.0, temptation=5, punishment=1, sucker=0),
    ],
)
def test_non_pd_matrices_rejected(kwargs):
    with pytest.raises(GameError):
        PayoffMatrix(**kwargs)


def test_matrix_from_mapping():
    m = PayoffMatrix.from_mapping({"reward": 3, "temptation": 5, "punishment": 1, "sucker": 0})
    assert m == PayoffMatrix()
    with pytest.raises(GameError):
        PayoffMatrix.from_mapping({"rewrd": 3})


def test_action_serialization():
    assert [a.value for a in Action] == ["C", "D"]
    assert str(ActionPair(C, D)) == "CD"
    assert ActionPair.parse("[D, C]") == ActionPair(D, C)
    assert [p.code for p in ALL_PAIRS] == [0, 1, 2, 3]
    assert all(ActionPair.from_code(p.code) == p for p in ALL_PAIRS)
    assert ActionPair(C, D).swapped() == ActionPair(D, C)
