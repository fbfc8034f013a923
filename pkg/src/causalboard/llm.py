"""Chat-completion transport with replay fixtures and bounded parallelism.

Three modes: `live` posts to an OpenAI-compatible endpoint, `replay` serves
recorded fixtures only (no network), `record` calls live and freezes each
exchange to a fixture file. Fixtures are one JSON file per exchange, named
by the exchange key, so recorded batteries replay byte-identically.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import httpx

from .prompts import PromptSpec

RETRYABLE_STATUS = {429, 500, 502, 503, 504}


class LlmError(RuntimeError):
    """Transport or configuration failure."""


class MissingFixture(LlmError):
    def __init__(self, key: str):
        super().__init__(f"no fixture recorded for exchange key {key}")
        self.key = key


class BatteryError(LlmError):
    """Every prompt in a battery failed."""


@dataclass
class LlmConfig:
    mode: str = "replay"  # live | replay | record
    endpoint: str = "https://api.openai.com/v1/chat/completions"
    model: str = "gpt-4"
    temperature: float = 0.0
    max_parallel: int = 4
    timeout_s: float = 60.0
    max_attempts: int = 3
    backoff_base_s: float = 1.0
    fixtures_dir: Optional[str] = None
    api_key_env: str = "OPENAI_API_KEY"

    def validate(self) -> None:
        if self.mode not in ("live", "replay", "record"):
            raise LlmError(f"unknown mode {self.mode!r}")
        if self.max_parallel < 1:
            raise LlmError("max_parallel must be >= 1")
        if self.mode in ("replay", "record") and not self.fixtures_dir:
            raise LlmError(f"{self.mode} mode requires a fixtures directory")
        if self.mode in ("live", "record") and not os.environ.get(self.api_key_env):
            raise LlmError(
                f"{self.mode} mode requires the {self.api_key_env} environment "
                f"variable"
            )


@dataclass(frozen=True)
class Exchange:
    key: str
    prompt: str
    response: str
    model: str
    timestamp: float
    usage: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "key": self.key,
            "prompt": self.prompt,
            "response": self.response,
            "model": self.model,
            "timestamp": self.timestamp,
            "usage": dict(self.usage),
        }


def exchange_key(model: str, temperature: float, prompt: str) -> str:
    blob = f"{model}\x00{temperature!r}\x00{prompt}"
    return hashlib.sha256(blob.encode()).hexdigest()


def split_messages(prompt: str) -> list[dict]:
    """First line is the persona (system message); the rest is the user turn."""
    head, sep, tail = prompt.partition("\n")
    if sep and tail.strip():
        return [
            {"role": "system", "content": head},
            {"role": "user", "content": tail.strip()},
        ]
    return [{"role": "user", "content": prompt}]


def _http_transport(cfg: LlmConfig, messages: list[dict]) -> tuple[str, dict]:
    headers = {"Authorization": f"Bearer {os.environ[cfg.api_key_env]}"}
    body = {"model": cfg.model, "temperature": cfg.temperature, "messages": messages}
    last_error: Exception | None = None
    for attempt in range(cfg.max_attempts):
        if attempt:
            time.sleep(cfg.backoff_base_s * (2 ** (attempt - 1)))
        try:
            resp = httpx.post(
                cfg.endpoint, json=body, headers=headers, timeout=cfg.timeout_s
            )
        except httpx.HTTPError as exc:
            last_error = exc
            continue
        if resp.status_code in RETRYABLE_STATUS:
            last_error = LlmError(f"HTTP {resp.status_code}: {resp.text[:500]}")
            continue
        if resp.status_code != 200:
            raise LlmError(f"HTTP {resp.status_code}: {resp.text[:2000]}")
        payload = resp.json()
        text = payload["choices"][0]["message"]["content"]
        return text, payload.get("usage", {})
    raise LlmError(f"gave up after {cfg.max_attempts} attempts: {last_error}")


class LlmGateway:
    """Shareable across threads; completions never interleave per spec."""

    def __init__(
        self,
        cfg: LlmConfig,
        transport: Optional[Callable[[LlmConfig, list[dict]], tuple[str, dict]]] = None,
    ):
        cfg.validate()
        self.cfg = cfg
        self._transport = transport or _http_transport
        self._cache: dict[str, Exchange] = {}
        self._lock = threading.Lock()
        self.network_calls = 0

    # -- fixture store -----------------------------------------------------

    def _fixture_path(self, key: str) -> Path:
        assert self.cfg.fixtures_dir is not None
        return Path(self.cfg.fixtures_dir) / f"{key}.json"

    def _read_fixture(self, key: str) -> Optional[Exchange]:
        if not self.cfg.fixtures_dir:
            return None
        path = self._fixture_path(key)
        if not path.exists():
            return None
        doc = json.loads(path.read_text(encoding="utf-8"))
        return Exchange(
            key=key,
            prompt=doc["prompt"],
            response=doc["response"],
            model=doc["model"],
            timestamp=doc.get("timestamp", 0.0),
            usage=doc.get("usage", {}),
        )

    def _write_fixture(self, ex: Exchange) -> None:
        path = self._fixture_path(ex.key)
        if path.exists():  # fixtures are immutable once written
            return
        path.parent.mkdir(parents=True, exist_ok=True)
        doc = {
            "prompt": ex.prompt,
            "response": ex.response,
            "model": ex.model,
            "temperature": self.cfg.temperature,
            "timestamp": ex.timestamp,
            "usage": ex.usage,
        }
        path.write_text(
            json.dumps(doc, sort_keys=True, ensure_ascii=False, indent=2) + "\n",
            encoding="utf-8",
        )

    # -- completion --------------------------------------------------------

    def complete_text(self, prompt: str) -> Exchange:
        key = exchange_key(self.cfg.model, self.cfg.temperature, prompt)
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return hit

        ex = self._read_fixture(key)
        if ex is None:
            if self.cfg.mode == "replay":
                raise MissingFixture(key)
            with self._lock:
                self.network_calls += 1
            text, usage = self._transport(self.cfg, split_messages(prompt))
            ex = Exchange(
                key=key,
                prompt=prompt,
                response=text,
                model=self.cfg.model,
                timestamp=time.time(),
                usage=usage,
            )
            if self.cfg.mode == "record":
                self._write_fixture(ex)

        with self._lock:
            self._cache[key] = ex
        return ex

    def complete(self, spec: PromptSpec) -> Exchange:
        return self.complete_text(spec.rendered)

    def run_battery(self, specs: Sequence[PromptSpec]) -> list["BatteryItem"]:
        """Complete all specs with at most max_parallel in flight.

        Results come back in spec order regardless of completion order;
        per-spec failures are reported without aborting the battery unless
        every spec fails.
        """
        items: list[Optional[BatteryItem]] = [None] * len(specs)

        def work(i: int) -> None:
            try:
                items[i] = BatteryItem(spec=specs[i], exchange=self.complete(specs[i]))
            except Exception as exc:  # per-spec failure, kept alongside successes
                items[i] = BatteryItem(spec=specs[i], error=str(exc))

        if self.cfg.max_parallel == 1 or len(specs) <= 1:
            for i in range(len(specs)):
                work(i)
        else:
            with ThreadPoolExecutor(max_workers=self.cfg.max_parallel) as pool:
                list(pool.map(work, range(len(specs))))

        done = [item for item in items if item is not None]
        if done and all(item.error is not None for item in done):
            raise BatteryError(
                "; ".join(item.error or "" for item in done)
            )
        return done


@dataclass
class BatteryItem:
    spec: PromptSpec
    exchange: Optional[Exchange] = None
    error: Optional[str] = None


def write_fixture(
    fixtures_dir: str | Path,
    prompt: str,
    response: str,
    model: str = "gpt-4",
    temperature: float = 0.0,
) -> str:
    """Key a (prompt, response) pair into a replay fixture file.

    Returns the exchange key. Existing fixtures are left untouched.
    """
    key = exchange_key(model, temperature, prompt)
    path = Path(fixtures_dir) / f"{key}.json"
    if not path.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
        doc = {
            "prompt": prompt,
            "response": response,
            "model": model,
            "temperature": temperature,
            "timestamp": 0.0,
            "usage": {},
        }
        path.write_text(
            json.dumps(doc, sort_keys=True, ensure_ascii=False, indent=2) + "\n",
            encoding="utf-8",
        )
    return key
