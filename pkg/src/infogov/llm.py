"""Prompt rendering and a chat-completion backed agent with strict answer parsing."""

from __future__ import annotations

import json
import logging
import os
import re
import string
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Optional, Sequence, Union

import httpx
import numpy as np

from infogov.agents import DecisionError
from infogov.game import Action, PayoffMatrix
from infogov.ledger import CoopBucket, InfoTier, InformationView

log = logging.getLogger(__name__)

API_KEY_ENV = "INFOGOV_LLM_API_KEY"
BASE_URL_ENV = "INFOGOV_LLM_BASE_URL"

_TIER_FILES = {
    InfoTier.LA: "info_la.txt",
    InfoTier.LA_AR: "info_la_ar.txt",
    InfoTier.LA_NR: "info_la_nr.txt",
}


class RenderError(ValueError):
    pass


@dataclass(frozen=True)
class PromptTemplate:
    base_text: str
    info_sections: dict[InfoTier, str]
    no_prior_preamble: str

    @classmethod
    def load(cls, directory: Union[str, Path, None] = None) -> "PromptTemplate":
        """Read ``base.txt``, ``preamble.txt`` and ``info_*.txt`` from ``directory``.

        Defaults to the templates shipped with the package.
        """
        root = Path(directory) if directory else Path(str(resources.files("infogov") / "data" / "prompts"))
        return cls(
            base_text=(root / "base.txt").read_text(),
            info_sections={tier: (root / name).read_text() for tier, name in _TIER_FILES.items()},
            no_prior_preamble=(root / "preamble.txt").read_text().strip(),
        )


def _fill(text: str, values: dict[str, str]) -> str:
    names = {f for _, f, _, _ in string.Formatter().parse(text) if f is not None}
    missing = sorted(names - set(values))
    if missing:
        raise RenderError(f"unresolved placeholder(s): {', '.join('{' + m + '}' for m in missing)}")
    return text.format(**values)


def _word(b: Optional[CoopBucket]) -> str:
    if b is None:
        raise RenderError("ratio bucket missing for a tier that shows it")
    return b.value


def _info_values(view: InformationView) -> dict[str, str]:
    pair = view.last_pair
    values = {"your_action": pair.own.value, "coplayer_action": pair.other.value}
    if view.tier is InfoTier.LA_AR:
        values["your_ratio"] = _word(view.own_bucket)
        values["coplayer_ratio"] = _word(view.opponent_bucket)
    elif view.tier is InfoTier.LA_NR:
        values["your_ratio"] = _word(view.own_bucket)
        values["neighbor_ratio"] = _word(view.neighborhood_bucket)
    return values


def _payoff_values(matrix: PayoffMatrix) -> dict[str, str]:
    return {
        "payoff_cc": str(matrix.reward),
        "payoff_cd": str(matrix.sucker),
        "payoff_dc": str(matrix.temptation),
        "payoff_dd": str(matrix.punishment),
    }


def render_base(tpl: PromptTemplate, matrix: PayoffMatrix, info_section: str = "") -> str:
    return _fill(tpl.base_text, {**_payoff_values(matrix), "info_section": info_section})


def render_prompt(tpl: PromptTemplate, view: InformationView, matrix: PayoffMatrix = PayoffMatrix()) -> str:
    """Prompt for one decision.

    Without a last action pair (NoInfo, or a first meeting) the info section is
    dropped and the no-prior-information preamble leads. A ratio tier whose
    buckets are not available yet shows only the last-action section.
    """
    if view.tier is InfoTier.NO_INFO or view.last_pair is None:
        return tpl.no_prior_preamble + "\n\n" + render_base(tpl, matrix)
    tier = view.tier
    if tier is InfoTier.LA_AR and (view.own_bucket is None or view.opponent_bucket is None):
        tier = InfoTier.LA
    if tier is InfoTier.LA_NR and (view.own_bucket is None or view.neighborhood_bucket is None):
        tier = InfoTier.LA
    values = _info_values(view)
    section = _fill(tpl.info_sections[tier], values)
    return render_base(tpl, matrix, section)


_ANSWER = re.compile(r"ANSWER\s*:\s*\**\s*([CD])\b(.*)$", re.IGNORECASE | re.MULTILINE)
_STRAY = re.compile(r"\b[CD]\b", re.IGNORECASE)


def parse_decision(completion: str) -> Optional[Action]:
    """Action from the last ``ANSWER: C|D`` marker; None if absent or ambiguous."""
    matches = list(_ANSWER.finditer(completion or ""))
    if not matches:
        return None
    last = matches[-1]
    if _STRAY.search(last.group(2)):
        return None
    return Action(last.group(1).upper())


@dataclass
class LlmEndpointConfig:
    base_url: str = "http://localhost:8000/v1"
    model: str = "llama3-70b-8192"
    temperature: float = 0.8
    timeout: float = 60.0
    max_retries: int = 3
    max_parallel: int = 4
    backoff: float = 0.5
    api_key: Optional[str] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.max_parallel < 1:
            raise ValueError("max_parallel must be >= 1")

    @classmethod
    def from_env(cls, **overrides: Any) -> "LlmEndpointConfig":
        cfg = {k: v for k, v in overrides.items() if v is not None}
        if BASE_URL_ENV in os.environ:
            cfg["base_url"] = os.environ[BASE_URL_ENV]
        cfg.setdefault("api_key", os.environ.get(API_KEY_ENV))
        return cls(**cfg)


@dataclass
class DecisionRecord:
    prompt: str
    completion: Optional[str]
    action: Optional[Action]
    failure: Optional[str]
    attempt: int
    latency: float

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["action"] = None if self.action is None else self.action.value
        return d


class DecisionLog:
    """Thread-safe sink for decision records; optionally mirrored to a JSON-lines file."""

    def __init__(self, path: Union[str, Path, None] = None):
        self.records: list[DecisionRecord] = []
        self._path = Path(path) if path else None
        self._lock = threading.Lock()

    def append(self, rec: DecisionRecord) -> None:
        with self._lock:
            self.records.append(rec)
            if self._path is not None:
                with self._path.open("a") as fh:
                    fh.write(json.dumps(rec.to_dict()) + "\n")


class ChatClient:
    """Minimal chat-completion client; at most ``max_parallel`` requests in flight."""

    def __init__(self, cfg: LlmEndpointConfig, transport: Optional[httpx.BaseTransport] = None):
        self.cfg = cfg
        headers = {"Authorization": f"Bearer {cfg.api_key}"} if cfg.api_key else {}
        self._http = httpx.Client(
            base_url=cfg.base_url.rstrip("/"), timeout=cfg.timeout, headers=headers, transport=transport
        )
        self._slots = threading.BoundedSemaphore(cfg.max_parallel)

    def complete(self, prompt: str) -> str:
        body = {
            "model": self.cfg.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.cfg.temperature,
        }
        with self._slots:
            resp = self._http.post("/chat/completions", json=body)
        resp.raise_for_status()
        try:
            return resp.json()["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise httpx.DecodingError(f"malformed completion payload: {exc}") from exc

    def close(self) -> None:
        self._http.close()


def llm_sla_decide(
    cfg: LlmEndpointConfig,
    tpl: PromptTemplate,
    view: InformationView,
    matrix: PayoffMatrix,
    client: Optional[ChatClient] = None,
    log_sink: Optional[DecisionLog] = None,
    sleep: Callable[[float], None] = time.sleep,
) -> Action:
    """Render, query, parse; retry the same prompt up to ``cfg.max_retries`` times."""
    prompt = render_prompt(tpl, view, matrix)
    own_client = client is None
    client = ChatClient(cfg) if own_client else client
    failure = None
    try:
        for attempt in range(1, cfg.max_retries + 2):
            start = time.perf_counter()
            text, action = None, None
            try:
                text = client.complete(prompt)
                action = parse_decision(text)
                failure = None if action is not None else "no ANSWER marker"
            except httpx.HTTPError as exc:
                failure = f"transport: {exc}"
            rec = DecisionRecord(prompt, text, action, failure, attempt, time.perf_counter() - start)
            if log_sink is not None:
                log_sink.append(rec)
            if action is not None:
                return action
            log.debug("attempt %d failed: %s", attempt, failure)
            if attempt <= cfg.max_retries and cfg.backoff > 0:
                sleep(cfg.backoff * 2 ** (attempt - 1))
    finally:
        if own_client:
            client.close()
    raise DecisionError(f"no valid decision after {cfg.max_retries + 1} attempts (last: {failure})")


class LlmSLA:
    """Agent backed by a chat-completion endpoint.

    ``decide_batch`` issues a step's requests concurrently, bounded by
    ``max_parallel``, and returns actions in request order.
    """

    def __init__(
        self,
        cfg: LlmEndpointConfig,
        matrix: PayoffMatrix = PayoffMatrix(),
        template: Optional[PromptTemplate] = None,
        client: Optional[ChatClient] = None,
        log_sink: Optional[DecisionLog] = None,
    ):
        self.cfg = cfg
        self.matrix = matrix
        self.template = template or PromptTemplate.load()
        self.client = client or ChatClient(cfg)
        self.log = log_sink if log_sink is not None else DecisionLog()

    @classmethod
    def from_config(cls, options: dict[str, Any], matrix: PayoffMatrix) -> "LlmSLA":
        options = dict(options)
        template_dir = options.pop("template_dir", None)
        log_path = options.pop("decision_log", None)
        cfg = LlmEndpointConfig.from_env(**options)
        return cls(cfg, matrix, PromptTemplate.load(template_dir), log_sink=DecisionLog(log_path))

    def decide(self, view: InformationView, rng: Optional[np.random.Generator] = None) -> Action:
        return llm_sla_decide(self.cfg, self.template, view, self.matrix, self.client, self.log)

    def decide_batch(self, views: Sequence[InformationView]) -> list[Action]:
        if not views:
            return []
        with ThreadPoolExecutor(max_workers=self.cfg.max_parallel) as pool:
            return list(pool.map(self.decide, views))
