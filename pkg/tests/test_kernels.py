"""Compiled and pure-Python decision kernels must agree bit for bit."""

import os
import subprocess
import sys

import numpy as np
import pytest

from infogov import kernels
from infogov.agents import TableSLA
from infogov.ledger import InfoTier, TIERS
from infogov.simulation import ScenarioConfig, StaticTierPolicy, run_round

needs_compiled = pytest.mark.skipif(kernels.table_step_compiled is None, reason="extension not built")


def _random_inputs(rng, table):
    n = int(rng.integers(2, 25))
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(iu.size) < rng.uniform(0.1, 0.9)
    ei, ej = iu[keep].astype(np.int64), ju[keep].astype(np.int64)
    m = ei.size
    nbrs = [[] for _ in range(n)]
    for i, j in zip(ei, ej):
        nbrs[i].append(j)
        nbrs[j].append(i)
    indptr = np.zeros(n + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([len(x) for x in nbrs])
    indices = np.array([b for x in nbrs for b in sorted(x)], dtype=np.int64)
    acts = rng.integers(0, 40, n).astype(np.int64)
    coops = (acts * rng.random(n)).astype(np.int64)
    first, la, nr, ar = table.as_arrays()
    return (
        ei, ej,
        rng.integers(0, 4, n).astype(np.int8),
        rng.integers(-1, 4, m).astype(np.int8),
        coops, acts, indptr, indices,
        rng.random(m), rng.random(m),
        first, la, nr, ar,
    )


@needs_compiled
def test_compiled_matches_python(table):
    rng = np.random.default_rng(2024)
    for _ in range(300):
        args = _random_inputs(rng, table)
        assert np.array_equal(kernels.table_step_compiled(*args), kernels.table_step_python(*args))


@pytest.mark.parametrize("tier", [t for t in TIERS if t is not InfoTier.NO_INFO])
def test_fast_path_matches_view_path(table, tier):
    cfg = ScenarioConfig(steps=12)
    sla = TableSLA(table)
    for k in range(4):
        fast = run_round(cfg, k, sla, StaticTierPolicy(tier))
        slow = run_round(cfg, k, [sla] * cfg.agents, StaticTierPolicy(tier))
        assert fast.to_json() == slow.to_json()


def test_forced_fallback_selected_at_import():
    code = "import infogov.kernels as k; print(k.BACKEND)"
    env = dict(os.environ, INFOGOV_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_fallback_round_matches_default_backend(tmp_path):
    code = (
        "from infogov.simulation import ScenarioConfig, run_round;"
        "print(run_round(ScenarioConfig(tier_policy='static:LA_NR'), 3).to_json())"
    )
    runs = []
    for flag in ("", "1"):
        env = dict(os.environ)
        env.pop("INFOGOV_PURE_PYTHON", None)
        if flag:
            env["INFOGOV_PURE_PYTHON"] = flag
        runs.append(subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True).stdout)
    assert runs[0] == runs[1]
