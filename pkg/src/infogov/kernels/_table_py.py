"""Pure-Python table-agent decision step, used when the extension is not built."""

from __future__ import annotations

import numpy as np


def _bucket(c: int, a: int) -> int:
    if a == 0:
        return -1
    r = c / a
    if r < 0.33:
        return 0
    if r > 0.66:
        return 2
    return 1


def _prob(tier, last, own, inner, first, la, grid):
    if tier == 0 or last < 0:
        return first
    if tier == 1 or own < 0 or inner < 0:
        return la[last]
    return grid[last][own][inner]


def table_step(ei, ej, tiers, last, coops, acts, indptr, indices, ui, uj, first, la, nr, ar):
    ei, ej, tiers, last = ei.tolist(), ej.tolist(), tiers.tolist(), last.tolist()
    coops, acts = coops.tolist(), acts.tolist()
    indptr, indices = indptr.tolist(), indices.tolist()
    ui, uj = ui.tolist(), uj.tolist()
    la, nr, ar = la.tolist(), nr.tolist(), ar.tolist()
    n = len(coops)
    nb = []
    for a in range(n):
        nc = na = 0
        for k in range(indptr[a], indptr[a + 1]):
            nc += coops[indices[k]]
            na += acts[indices[k]]
        nb.append(_bucket(nc, na))
    out = np.empty((len(ei), 2), dtype=np.uint8)
    for e, (i, j) in enumerate(zip(ei, ej)):
        ti, tj, lc = tiers[i], tiers[j], last[e]
        lm = -1 if lc < 0 else (((lc & 1) << 1) | (lc >> 1))
        bi, bj = _bucket(coops[i], acts[i]), _bucket(coops[j], acts[j])
        if ti == 2:
            pi = _prob(ti, lc, bi, bj, first, la, ar)
        else:
            pi = _prob(ti, lc, bi, nb[i], first, la, nr)
        if tj == 2:
            pj = _prob(tj, lm, bj, bi, first, la, ar)
        else:
            pj = _prob(tj, lm, bj, nb[j], first, la, nr)
        out[e, 0] = 0 if ui[e] < pi else 1
        out[e, 1] = 0 if uj[e] < pj else 1
    return out
