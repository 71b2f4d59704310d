"""Calibrated constants, loadable from a TOML file.

Each table maps to one parameter object::

    [junta]
    c_alpha = 0.0625

    [boolean]
    eps_floor = 0.05

Unknown tables or keys are rejected so that typos do not go unnoticed.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import tomli

from .boolcount import BooleanParams
from .decouple import JuntaParams
from .fileio import ParseError
from .gausscount import CountParams
from .moments import MomentParams
from .oracles import OracleConfig
from .spectral import SpectralParams


@dataclass(frozen=True)
class Config:
    spectral: SpectralParams = field(default_factory=SpectralParams)
    junta: JuntaParams = field(default_factory=JuntaParams)
    count: CountParams = field(default_factory=CountParams)
    boolean: BooleanParams = field(default_factory=BooleanParams)
    moments: MomentParams = field(default_factory=MomentParams)
    oracle: OracleConfig = field(default_factory=OracleConfig)

    def snapshot(self) -> dict:
        return {f.name: dataclasses.asdict(getattr(self, f.name)) for f in dataclasses.fields(self)}


def _build(cls, table: dict, name: str):
    known = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in table.items():
        if key not in known:
            raise ParseError(f"unknown key [{name}].{key}")
        default = getattr(cls(), key)
        if isinstance(default, bool) or not isinstance(value, (int, float)):
            raise ParseError(f"[{name}].{key} must be a number")
        kwargs[key] = int(value) if isinstance(default, int) and float(value).is_integer() else value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"[{name}]: {exc}") from None


def parse_config(text: str) -> Config:
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ParseError(f"config: {exc}") from None
    parts = {}
    for f in dataclasses.fields(Config):
        table = data.pop(f.name, {})
        if not isinstance(table, dict):
            raise ParseError(f"[{f.name}] must be a table")
        parts[f.name] = _build(type(f.default_factory()), table, f.name)
    if data:
        raise ParseError(f"unknown config sections: {', '.join(sorted(data))}")
    return Config(**parts)


def load_config(path) -> Config:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    return parse_config(text)
