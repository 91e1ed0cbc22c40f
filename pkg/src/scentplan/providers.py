"""Model provider abstraction with per-provider request budgets.

Concrete model identity (endpoint, model name, credentials) is configuration,
not code.  Two client implementations exist: a generic HTTP client, and a
mock that replays fixture responses keyed by (stage, clip id, attempt) so the
whole pipeline runs offline.
"""

from __future__ import annotations

import base64
import json
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import httpx


class ProviderError(RuntimeError):
    """Transport-level failure talking to a model endpoint."""


class BudgetExhaustedError(ProviderError):
    """The provider's request budget is spent."""


class MissingCredentialError(ProviderError):
    """The configured credential environment variable is not set."""


@dataclass(frozen=True)
class ProviderConfig:
    provider_id: str
    endpoint: str
    model_name: str
    request_budget: int
    credential_env: str | None = None

    @classmethod
    def from_file(cls, path: str | Path) -> "ProviderConfig":
        doc = json.loads(Path(path).read_text("utf-8"))
        return cls(
            provider_id=doc["provider_id"],
            endpoint=doc["endpoint"],
            model_name=doc["model_name"],
            request_budget=int(doc["request_budget"]),
            credential_env=doc.get("credential_env"),
        )


class ModelProvider:
    """Base client: enforces the request budget atomically, delegates sending."""

    def __init__(self, config: ProviderConfig):
        if config.request_budget < 0:
            raise ValueError("request_budget must be non-negative")
        self.config = config
        self._remaining = config.request_budget
        self._lock = threading.Lock()

    @property
    def remaining_budget(self) -> int:
        with self._lock:
            return self._remaining

    def complete(self, prompt: str, image_paths: Sequence[str] = (), tag: str = "") -> str:
        """One model call.  ``tag`` identifies the call site (e.g. ``A/kitchen-01``)
        so the mock client can look up its fixture; network clients ignore it."""
        with self._lock:
            if self._remaining <= 0:
                raise BudgetExhaustedError(
                    f"provider '{self.config.provider_id}' request budget exhausted"
                )
            self._remaining -= 1
        return self._send(prompt, image_paths, tag)

    def _send(self, prompt: str, image_paths: Sequence[str], tag: str) -> str:
        raise NotImplementedError


class HttpProvider(ModelProvider):
    """POSTs ``{model, prompt, images[]}`` to the configured endpoint.

    The endpoint must answer ``{"text": "..."}``.  The bearer credential is
    read from the environment variable named in the provider config.
    """

    def __init__(self, config: ProviderConfig, timeout: float = 120.0):
        super().__init__(config)
        self._timeout = timeout

    def _credential(self) -> str | None:
        import os

        if self.config.credential_env is None:
            return None
        value = os.environ.get(self.config.credential_env)
        if not value:
            raise MissingCredentialError(
                f"environment variable {self.config.credential_env} is not set"
            )
        return value

    def _send(self, prompt: str, image_paths: Sequence[str], tag: str) -> str:
        headers = {}
        token = self._credential()
        if token:
            headers["Authorization"] = f"Bearer {token}"
        images = [
            base64.b64encode(Path(p).read_bytes()).decode("ascii") for p in image_paths
        ]
        payload = {"model": self.config.model_name, "prompt": prompt, "images": images}
        try:
            resp = httpx.post(
                self.config.endpoint, json=payload, headers=headers, timeout=self._timeout
            )
            resp.raise_for_status()
            return resp.json()["text"]
        except httpx.HTTPError as exc:
            raise ProviderError(
                f"provider '{self.config.provider_id}' transport failure: {exc}"
            ) from exc
        except (KeyError, ValueError) as exc:
            raise ProviderError(
                f"provider '{self.config.provider_id}' malformed response: {exc}"
            ) from exc


class MockProvider(ModelProvider):
    """Replays fixture files ``<dir>/<stage>/<clip_id>/<attempt>.txt``.

    The attempt counter advances per tag.  When the exact attempt file is
    missing, the highest-numbered earlier attempt is replayed, so one fixture
    can serve repeated calls.
    """

    def __init__(self, fixtures_dir: str | Path, budget: int = 1_000_000,
                 provider_id: str = "mock"):
        super().__init__(
            ProviderConfig(
                provider_id=provider_id,
                endpoint="fixtures://" + str(fixtures_dir),
                model_name="fixture-replay",
                request_budget=budget,
            )
        )
        self.fixtures_dir = Path(fixtures_dir)
        self._attempts: dict[str, int] = {}
        self._attempt_lock = threading.Lock()

    def _send(self, prompt: str, image_paths: Sequence[str], tag: str) -> str:
        with self._attempt_lock:
            attempt = self._attempts.get(tag, 0) + 1
            self._attempts[tag] = attempt
        fixture_dir = self.fixtures_dir / tag
        for k in range(attempt, 0, -1):
            candidate = fixture_dir / f"{k}.txt"
            if candidate.is_file():
                return candidate.read_text("utf-8")
        raise ProviderError(f"no fixture response for '{tag}' attempt {attempt}")
