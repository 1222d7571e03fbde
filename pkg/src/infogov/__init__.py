"""Information-access governance for networked iterated Prisoner's Dilemma.

Strategic agents play pairwise PD on a random graph; an actor-critic governor
picks, per agent and per step, how much interaction history each agent sees.
"""

from infogov.game import Action, ActionPair, PayoffMatrix, interaction_welfare, payoff
from infogov.ledger import CoopBucket, HistoryStore, InfoTier, InformationView
from infogov.network import Graph, generate_er

__version__ = "0.1.0"

__all__ = [
    "Action",
    "ActionPair",
    "CoopBucket",
    "Graph",
    "HistoryStore",
    "InfoTier",
    "InformationView",
    "PayoffMatrix",
    "generate_er",
    "interaction_welfare",
    "payoff",
]
