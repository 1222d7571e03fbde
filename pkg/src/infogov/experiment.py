"""Micro-level validation, baseline sweeps and CSV/SVG report emission."""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from infogov import seeding
from infogov.agents import AgentPolicy, CalibrationTable, DecisionError
from infogov.game import ALL_PAIRS, ActionPair
from infogov.ledger import BUCKETS, CoopBucket, InfoTier, InformationView
from infogov.simulation import (
    METRICS,
    ExperimentResult,
    RoundLog,
    ScenarioConfig,
    StaticTierPolicy,
    TierPolicy,
    mean_std,
    run_experiment,
)
from infogov.svg import line_chart

log = logging.getLogger(__name__)


# --- micro-level validation --------------------------------------------------


@dataclass(frozen=True)
class MicrovalScenario:
    tier: InfoTier
    last_pair: Optional[ActionPair] = None
    own_bucket: Optional[CoopBucket] = None
    inner_bucket: Optional[CoopBucket] = None
    trials: int = 100

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        self.view()

    def view(self) -> InformationView:
        if self.tier is InfoTier.LA_AR:
            return InformationView(self.tier, self.last_pair, self.own_bucket, opponent_bucket=self.inner_bucket)
        if self.tier is InfoTier.LA_NR:
            return InformationView(self.tier, self.last_pair, self.own_bucket, neighborhood_bucket=self.inner_bucket)
        if self.own_bucket is not None or self.inner_bucket is not None:
            raise ValueError(f"tier {self.tier.value} takes no ratio buckets")
        return InformationView(self.tier, self.last_pair)

    def label(self) -> str:
        parts = [self.tier.value]
        if self.last_pair is not None:
            parts.append(str(self.last_pair))
        parts += [b.value for b in (self.own_bucket, self.inner_bucket) if b is not None]
        return "|".join(parts)


@dataclass
class MicrovalResult:
    scenario: MicrovalScenario
    cooperations: int
    decisions: int
    errors: int

    @property
    def frequency(self) -> float:
        return self.cooperations / self.decisions if self.decisions else float("nan")

    @property
    def interval(self) -> tuple[float, float]:
        return wilson_interval(self.cooperations, self.decisions)


def wilson_interval(successes: int, n: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if n == 0:
        return (0.0, 1.0)
    p = successes / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == n else min(1.0, centre + half)
    return lo, hi


def microval(scenario: MicrovalScenario, backend: AgentPolicy, seed: int) -> MicrovalResult:
    """Evaluate one fixed view ``trials`` times with independent draws."""
    view = scenario.view()
    rng = seeding.stream(seeding.MICROVAL, seed)
    coops = errors = 0
    for _ in range(scenario.trials):
        try:
            action = backend.decide(view, rng)
        except DecisionError as exc:
            errors += 1
            log.debug("microval decision error: %s", exc)
            continue
        coops += action.value == "C"
    return MicrovalResult(scenario, coops, scenario.trials - errors, errors)


def calibration_scenarios(trials: int = 100, include_ar: bool = False) -> list[MicrovalScenario]:
    """The LA cells and the 36-cell ratio grid(s) measured during calibration."""
    out = [MicrovalScenario(InfoTier.LA, p, trials=trials) for p in ALL_PAIRS]
    tiers = [InfoTier.LA_NR] + ([InfoTier.LA_AR] if include_ar else [])
    for tier in tiers:
        out += [MicrovalScenario(tier, p, a, b, trials) for p in ALL_PAIRS for a in BUCKETS for b in BUCKETS]
    return out


def write_microval_csv(
    results: Sequence[MicrovalResult], path: Union[str, Path], table: Optional[CalibrationTable] = None
) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["tier", "last_pair", "own", "inner", "trials", "errors", "frequency", "ci_low", "ci_high", "expected"])
        for r in results:
            s = r.scenario
            lo, hi = r.interval
            expected = "" if table is None else repr(table.probability(s.view()))
            w.writerow([
                s.tier.value,
                "" if s.last_pair is None else str(s.last_pair),
                "" if s.own_bucket is None else s.own_bucket.value,
                "" if s.inner_bucket is None else s.inner_bucket.value,
                s.trials, r.errors, repr(r.frequency), repr(lo), repr(hi), expected,
            ])


# --- baseline sweeps -----------------------------------------------------------

BASELINE_TIERS = (InfoTier.LA, InfoTier.LA_NR, InfoTier.LA_AR)


def sweep_baselines(
    cfg: ScenarioConfig,
    rl_policy: Optional[TierPolicy] = None,
    policies=None,
    paired: bool = True,
) -> dict[str, ExperimentResult]:
    """Static LA / LA_NR / LA_AR (and RL when given) on the same round seeds.

    With ``paired=False`` each scenario draws its own master seed instead.
    """
    scenarios: list[tuple[str, TierPolicy]] = [(t.value, StaticTierPolicy(t)) for t in BASELINE_TIERS]
    if rl_policy is not None:
        scenarios.insert(0, ("RL", rl_policy))
    results = {}
    for k, (name, tp) in enumerate(scenarios):
        scfg = cfg if paired else cfg.replace(seed=seeding.derive_seed(cfg.seed, k) % 2**31)
        results[name] = run_experiment(scfg, policies=policies, tier_policy=tp)
    return results


def summary_rows(results: Mapping[str, ExperimentResult]) -> list[dict[str, Union[str, float]]]:
    rows = []
    for name, res in results.items():
        row: dict[str, Union[str, float]] = {"scenario": name}
        for k in METRICS:
            row[k] = res.summary.get(k, float("nan"))
        for k in METRICS:
            row[f"{k}_std"] = res.summary.get(f"{k}_std", float("nan"))
        row["valid_rounds"] = len(res.valid_logs)
        row["invalid_rounds"] = len(res.invalid)
        rows.append(row)
    return rows


def write_summary_csv(results: Mapping[str, ExperimentResult], path: Union[str, Path]) -> None:
    rows = summary_rows(results)
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        for row in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})


# --- reports -------------------------------------------------------------------

SERIES_COLUMNS = ("coop", "welfare", "cc", "mixed", "dd")


@dataclass
class ReportSeries:
    """Per-step across-round mean and population std of each metric."""

    steps: list[int]
    mean: dict[str, np.ndarray]
    std: dict[str, np.ndarray]
    rounds: int

    @classmethod
    def from_logs(cls, logs: Iterable[RoundLog]) -> "ReportSeries":
        valid = [lg for lg in logs if lg.valid]
        if not valid:
            raise ValueError("report needs at least one valid round")
        T = len(valid[0].steps)
        if any(len(lg.steps) != T for lg in valid):
            raise ValueError("rounds have different lengths")
        data = {k: np.zeros((len(valid), T)) for k in SERIES_COLUMNS}
        for r, lg in enumerate(valid):
            for t, st in enumerate(lg.steps):
                cc, mixed, dd = st.pair_shares()
                data["coop"][r, t] = st.coop_rate()
                data["welfare"][r, t] = st.normalized_welfare()
                data["cc"][r, t] = cc
                data["mixed"][r, t] = mixed
                data["dd"][r, t] = dd
        stats = {k: mean_std(v) for k, v in data.items()}
        return cls(
            steps=list(range(T)),
            mean={k: m for k, (m, _) in stats.items()},
            std={k: sd for k, (_, sd) in stats.items()},
            rounds=len(valid),
        )

    def write_csv(self, path: Union[str, Path]) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["step"] + [f"{k}_{s}" for k in SERIES_COLUMNS for s in ("mean", "std")])
            for t in self.steps:
                w.writerow([t] + [repr(float(d[k][t])) for k in SERIES_COLUMNS for d in (self.mean, self.std)])


def emit_report(
    logs_by_scenario: Mapping[str, Sequence[RoundLog]], out_dir: Union[str, Path]
) -> dict[str, ReportSeries]:
    """Write ``series_<name>.csv`` plus cooperation and pair-share charts."""
    out = Path(out_dir)
    charts = out / "charts"
    charts.mkdir(parents=True, exist_ok=True)
    series = {name: ReportSeries.from_logs(logs) for name, logs in logs_by_scenario.items()}
    for name, s in series.items():
        s.write_csv(out / f"series_{_slug(name)}.csv")
        pair_lines = [
            ("CC", s.mean["cc"], s.std["cc"]),
            ("CD+DC", s.mean["mixed"], s.std["mixed"]),
            ("DD", s.mean["dd"], s.std["dd"]),
        ]
        (charts / f"pairs_{_slug(name)}.svg").write_text(
            line_chart(f"Action pairs ({name})", s.steps, pair_lines, (0.0, 1.0), "share of interactions")
        )
    for key, title, yr, ylab in (
        ("coop", "Cooperation rate", (0.0, 1.0), "cooperation rate"),
        ("welfare", "Social welfare per interaction", (2.0, 6.0), "normalized welfare"),
    ):
        lines = [(name, s.mean[key], s.std[key]) for name, s in series.items()]
        steps = next(iter(series.values())).steps
        (charts / f"{key}.svg").write_text(line_chart(title, steps, lines, yr, ylab))
    return series


def _slug(name: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_" else "_" for ch in name)


def write_round_logs(logs: Sequence[RoundLog], out_dir: Union[str, Path], prefix: str = "") -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for lg in logs:
        (out / f"{prefix}round_{lg.round_index}.json").write_text(lg.to_json())


def read_round_logs(in_dir: Union[str, Path], prefix: str = "") -> list[RoundLog]:
    paths = sorted(Path(in_dir).glob(f"{prefix}round_*.json"), key=lambda p: int(p.stem.rsplit("_", 1)[1]))
    return [RoundLog.from_dict(json.loads(p.read_text())) for p in paths]
