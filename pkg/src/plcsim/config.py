"""Run configuration files.

Format: one ``key = value`` per line, ``#`` starts a comment, matrices
are written as space-separated entries with ``;`` between rows::

    q = 5
    G = 1 0 1 1 ; 0 1 1 1
    V = 1 0 0 1 ; 1 1 0 0 ; 2 1 0 1
    v = 1
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError
from .protocol.signs import SIGN_MODES

PRIVACY_MODES = ("off", "structural", "exhaustive")
TRIALS_ENV = "PLCSIM_TRIALS"
DEFAULT_TRIALS = 10

_INT_KEYS = ("q", "n", "k", "f", "mu", "v", "seed", "trials")
_MATRIX_KEYS = ("G", "V", "Lambda")
_BOOL_KEYS = ("emit_queries", "query_flip", "fixed_randomness")
_TRUE = ("1", "true", "yes", "on")
_FALSE = ("0", "false", "no", "off")


@dataclass
class RunConfig:
    q: int
    G: list[list[int]]
    V: list[list[int]]
    v: int = 1
    Lambda: list[list[int]] | None = None
    seed: int = 0
    trials: int | None = None
    privacy: str = "structural"
    emit_queries: bool = False
    sign_mode: str = "auto"
    query_flip: bool = False
    fixed_randomness: bool = False

    @property
    def n(self) -> int:
        return len(self.G[0])

    @property
    def k(self) -> int:
        return len(self.G)

    @property
    def f(self) -> int:
        return len(self.V[0])

    @property
    def mu(self) -> int:
        return len(self.V)

    def resolved_trials(self) -> int:
        if self.trials is not None:
            return self.trials
        env = os.environ.get(TRIALS_ENV)
        if env:
            try:
                return int(env)
            except ValueError:
                raise ConfigError(f"{TRIALS_ENV}={env!r} is not an integer") from None
        return DEFAULT_TRIALS


def _parse_matrix(text: str, line: int, key: str) -> list[list[int]]:
    rows = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            raise ConfigError(f"{key}: empty matrix row", line)
        try:
            rows.append([int(x) for x in chunk.split()])
        except ValueError:
            raise ConfigError(f"{key}: entries must be integers", line) from None
    if len({len(r) for r in rows}) != 1:
        raise ConfigError(f"{key}: rows have different lengths", line)
    return rows


def parse_config(text: str) -> RunConfig:
    values: dict[str, object] = {}
    lines: dict[str, int] = {}
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", no)
        key, value = (x.strip() for x in line.split("=", 1))
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", no)
        if not value:
            raise ConfigError(f"{key}: missing value", no)
        if key in _INT_KEYS:
            try:
                values[key] = int(value)
            except ValueError:
                raise ConfigError(f"{key}: expected an integer, got {value!r}", no) from None
        elif key in _MATRIX_KEYS:
            values[key] = _parse_matrix(value, no, key)
        elif key in _BOOL_KEYS:
            low = value.lower()
            if low not in _TRUE + _FALSE:
                raise ConfigError(f"{key}: expected true/false, got {value!r}", no)
            values[key] = low in _TRUE
        elif key == "privacy":
            if value not in PRIVACY_MODES:
                raise ConfigError(f"privacy must be one of {PRIVACY_MODES}, got {value!r}", no)
            values[key] = value
        elif key == "sign_mode":
            if value not in SIGN_MODES:
                raise ConfigError(f"sign_mode must be one of {SIGN_MODES}, got {value!r}", no)
            values[key] = value
        else:
            raise ConfigError(f"unknown key {key!r}", no)
        lines[key] = no

    for req in ("q", "G", "V"):
        if req not in values:
            raise ConfigError(f"missing required key {req!r}")
    G, V = values["G"], values["V"]
    checks = {"k": len(G), "n": len(G[0]), "mu": len(V), "f": len(V[0])}
    for key, actual in checks.items():
        if key in values and values[key] != actual:
            raise ConfigError(f"{key} = {values[key]} but the matrices give {actual}", lines[key])
        values.pop(key, None)
    lam = values.get("Lambda")
    if lam is not None and len(lam[0]) != len(G[0]):
        raise ConfigError(f"Lambda has {len(lam[0])} columns, G has {len(G[0])}", lines["Lambda"])
    v = values.get("v", 1)
    if not 1 <= v <= len(V):
        raise ConfigError(f"v = {v} outside [1:{len(V)}]", lines.get("v"))
    if values.get("trials", 0) < 0:
        raise ConfigError("trials must be non-negative", lines["trials"])
    return RunConfig(**values)


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text)
