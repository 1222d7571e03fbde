"""Compare the compiled decision kernel with the pure-Python fallback.

Times the kernel alone on a mid-round state, then whole experiments with the
kernel swapped, and the per-view decision path for reference.

    python benchmarks/bench_kernels.py --rounds 20 --repeat 200
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from infogov import kernels, seeding
from infogov.agents import TableSLA, load_default_calibration
from infogov.ledger import InfoTier
from infogov.simulation import ScenarioConfig, new_round_state, run_experiment, run_step


def _kernel_args(state, table, t):
    indptr, indices, ei, ej, slot_i, slot_j = state.csr()
    u = np.empty(indptr[-1])
    for a in range(state.graph.n):
        lo, hi = indptr[a], indptr[a + 1]
        if hi > lo:
            u[lo:hi] = seeding.decision_stream(state.round_seed, a, t).random(hi - lo)
    store = state.store
    last = np.array([-1 if (p := store.last_pair(i, j)) is None else p.code for i, j in state.edges], dtype=np.int8)
    tiers = np.array([InfoTier.LA_NR.code] * state.graph.n, dtype=np.int8)
    first, la, nr, ar = table.as_arrays()
    return (
        ei, ej, tiers, last,
        np.asarray(store.coops, dtype=np.int64), np.asarray(store.actions, dtype=np.int64),
        indptr, indices, u[slot_i], u[slot_j], first, la, nr, ar,
    )


def _best_of(fn, repeat):
    best = float("inf")
    for _ in range(3):
        t0 = time.perf_counter()
        for _ in range(repeat):
            fn()
        best = min(best, (time.perf_counter() - t0) / repeat)
    return best


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rounds", type=int, default=20)
    ap.add_argument("--repeat", type=int, default=200)
    ap.add_argument("--agents", type=int, default=20)
    args = ap.parse_args()

    table = load_default_calibration()
    sla = TableSLA(table)
    cfg = ScenarioConfig(agents=args.agents, rounds=args.rounds, tier_policy="static:LA_NR")
    state = new_round_state(cfg, 0)
    for t in range(10):
        run_step(state, [InfoTier.NO_INFO if t == 0 else InfoTier.LA_NR] * cfg.agents, sla, t)
    kargs = _kernel_args(state, table, 10)

    print(f"agents={cfg.agents} edges={len(state.edges)} active backend={kernels.BACKEND}")
    py = _best_of(lambda: kernels.table_step_python(*kargs), args.repeat)
    print(f"table_step  python   {py * 1e6:9.1f} us/step")
    if kernels.table_step_compiled is not None:
        assert np.array_equal(kernels.table_step_compiled(*kargs), kernels.table_step_python(*kargs))
        cy = _best_of(lambda: kernels.table_step_compiled(*kargs), args.repeat)
        print(f"table_step  cython   {cy * 1e6:9.1f} us/step   speedup x{py / cy:.1f}")
    else:
        print("table_step  cython   (extension not built)")

    def experiment(kernel):
        saved = kernels.table_step
        kernels.table_step = kernel
        try:
            return run_experiment(cfg, sla)
        finally:
            kernels.table_step = saved

    rows = [("python", kernels.table_step_python)]
    if kernels.table_step_compiled is not None:
        rows.append(("cython", kernels.table_step_compiled))
    outputs = {}
    for name, kernel in rows:
        t0 = time.perf_counter()
        outputs[name] = [lg.to_json() for lg in experiment(kernel).logs]
        dt = time.perf_counter() - t0
        print(f"experiment  {name:<8s} {dt * 1e3 / args.rounds:9.2f} ms/round")
    if len(outputs) == 2:
        assert outputs["python"] == outputs["cython"], "kernels disagree"
    per_agent = [TableSLA(table) for _ in range(cfg.agents)]
    t0 = time.perf_counter()
    views = [lg.to_json() for lg in run_experiment(cfg, per_agent).logs]
    dt = time.perf_counter() - t0
    print(f"experiment  views    {dt * 1e3 / args.rounds:9.2f} ms/round   (per-view decisions, no kernel)")
    assert views == outputs["python"], "view path disagrees with kernel path"


if __name__ == "__main__":
    main()
