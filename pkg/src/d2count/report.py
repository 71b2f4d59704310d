from __future__ import annotations

import hashlib
import json
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction


def digest_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


@dataclass
class RunReport:
    """Everything needed to re-run a CLI invocation and check its result.

    Timings are kept apart: they are the only part allowed to differ between runs.
    """

    command: str
    arguments: dict
    input_digest: str
    parameters: dict
    result: dict = field(default_factory=dict)
    traces: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    @contextmanager
    def stage(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.timings[name] = round(time.perf_counter() - t0, 6)

    def set_value(self, value: Fraction, **extra):
        self.result = {"value": str(value), "decimal": float(value), **extra}

    def reproducible_view(self) -> dict:
        return {
            "command": self.command,
            "arguments": self.arguments,
            "input_digest": self.input_digest,
            "parameters": self.parameters,
            "result": self.result,
            "traces": self.traces,
        }

    def to_json(self) -> str:
        return json.dumps({**self.reproducible_view(), "timings": self.timings}, indent=2, sort_keys=True, default=str)

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        d = json.loads(text)
        return cls(d["command"], d["arguments"], d["input_digest"], d["parameters"],
                   d.get("result", {}), d.get("traces", []), d.get("timings", {}))
