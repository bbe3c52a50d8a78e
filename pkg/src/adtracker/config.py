"""Application configuration: JSON file plus ADTRACKER_* environment
overrides, environment winning."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Mapping

from .errors import MalformedPayload

ENV_PREFIX = "ADTRACKER_"


@dataclass(frozen=True)
class AppConfig:
    data_dir: str = "./data"
    listen_addr: str = "127.0.0.1:8080"
    provider: str = "simulated"  # "simulated" | "live"
    base_url: str = "https://graph.facebook.com/v18.0"
    api_token: str = ""
    seed: int = 1337
    seed_count: int = 60
    poll_interval_s: int = 300
    worker_count: int = 4
    max_pages_per_cycle: int = 40
    page_size: int = 100
    requests_per_minute: int = 60
    retry_limit: int = 5
    cluster_threshold_km: float = 100.0
    image_ttl_s: int = 7 * 86400
    log_path: str = ""  # empty: stderr

    def __post_init__(self):
        if self.provider not in ("simulated", "live"):
            raise MalformedPayload(f"unknown provider mode: {self.provider!r}")
        if self.provider == "live" and not self.api_token:
            raise MalformedPayload("live provider requires api_token")
        for name in ("poll_interval_s", "worker_count", "max_pages_per_cycle",
                     "page_size", "requests_per_minute"):
            if getattr(self, name) <= 0:
                raise MalformedPayload(f"{name} must be positive")
        if self.retry_limit < 0:
            raise MalformedPayload("retry_limit must be >= 0")
        if self.cluster_threshold_km < 0:
            raise MalformedPayload("cluster_threshold_km must be >= 0")
        host, _, port = self.listen_addr.rpartition(":")
        if not host or not port.isdigit():
            raise MalformedPayload(f"listen_addr must be host:port, got {self.listen_addr!r}")


_FIELD_TYPES = {f.name: f.type for f in fields(AppConfig)}


def _coerce(name: str, raw: str) -> Any:
    kind = _FIELD_TYPES[name]
    if kind in ("int", int):
        try:
            return int(raw)
        except ValueError:
            raise MalformedPayload(f"{name} must be an integer, got {raw!r}")
    if kind in ("float", float):
        try:
            return float(raw)
        except ValueError:
            raise MalformedPayload(f"{name} must be a number, got {raw!r}")
    return raw


def load_config(
    path: str | Path | None = None,
    env: Mapping[str, str] | None = None,
) -> AppConfig:
    """Defaults, overlaid by the JSON file (if given), overlaid by
    ADTRACKER_<UPPER_FIELD_NAME> environment variables."""
    env = os.environ if env is None else env
    values: dict[str, Any] = {}

    if path is not None:
        try:
            loaded = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise MalformedPayload(f"config file not found: {path}")
        except json.JSONDecodeError as exc:
            raise MalformedPayload(f"config file is not valid JSON: {exc}")
        if not isinstance(loaded, dict):
            raise MalformedPayload("config file must hold a JSON object")
        for key, value in loaded.items():
            if key not in _FIELD_TYPES:
                raise MalformedPayload(f"unknown config key: {key!r}")
            values[key] = value

    for name in _FIELD_TYPES:
        raw = env.get(ENV_PREFIX + name.upper())
        if raw is not None:
            values[name] = _coerce(name, raw)

    return AppConfig(**values)
