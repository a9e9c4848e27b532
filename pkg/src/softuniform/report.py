"""Check reports: verdicts, witnesses, timings, JSON and text renderings."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Any, Callable

from .errors import SizeCapError, SoftError

VERDICTS = ("pass", "fail", "vacuous", "skipped")

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


@dataclass
class Check:
    name: str
    verdict: str
    witness: Any = None
    diagnostics: list[str] = field(default_factory=list)
    seconds: float = 0.0
    cap_exceeded: bool = False

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")

    def to_dict(self) -> dict:
        out = {"name": self.name, "verdict": self.verdict, "seconds": round(self.seconds, 6)}
        if self.witness is not None:
            out["witness"] = self.witness
        if self.diagnostics:
            out["diagnostics"] = list(self.diagnostics)
        if self.cap_exceeded:
            out["cap_exceeded"] = True
        return out


@dataclass
class CheckReport:
    command: str
    digest: str | None = None
    checks: list[Check] = field(default_factory=list)
    error: str | None = None
    extra: dict = field(default_factory=dict)

    def add(self, name: str, verdict: str | bool, witness=None, diagnostics=(), seconds=0.0) -> Check:
        if isinstance(verdict, bool):
            verdict = "pass" if verdict else "fail"
        c = Check(name, verdict, witness, list(diagnostics), seconds)
        self.checks.append(c)
        return c

    def run(self, name: str, fn: Callable[[], tuple]) -> Check:
        """Run ``fn() -> (verdict, witness, diagnostics)`` and time it.

        A cap overflow turns into a skipped check so the remaining checks
        still run.
        """
        t0 = time.perf_counter()
        try:
            verdict, witness, diag = fn()
        except SizeCapError as exc:
            c = self.add(name, "skipped", diagnostics=[str(exc)], seconds=time.perf_counter() - t0)
            c.cap_exceeded = True
            return c
        return self.add(name, verdict, witness, diag, time.perf_counter() - t0)

    def verdict_of(self, name: str) -> str:
        for c in self.checks:
            if c.name == name:
                return c.verdict
        raise KeyError(name)

    @property
    def exit_code(self) -> int:
        if self.error is not None:
            return EXIT_INPUT
        if any(c.verdict == "fail" for c in self.checks):
            return EXIT_FAIL
        if any(c.cap_exceeded for c in self.checks):
            return EXIT_INPUT
        return EXIT_OK

    def to_dict(self, timing: bool = True) -> dict:
        out: dict[str, Any] = {"command": self.command, "digest": self.digest}
        if self.error is not None:
            out["error"] = self.error
        checks = [c.to_dict() for c in self.checks]
        if not timing:
            for c in checks:
                c.pop("seconds")
        out["checks"] = checks
        out.update(self.extra)
        out["exit_code"] = self.exit_code
        return out

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing), indent=2, ensure_ascii=False) + "\n"

    def to_text(self) -> str:
        lines = [f"{self.command}  digest={self.digest or '-'}"]
        if self.error is not None:
            lines.append(f"error: {self.error}")
        if self.checks:
            w = max(len(c.name) for c in self.checks)
            for c in self.checks:
                lines.append(f"  {c.name.ljust(w)}  {c.verdict.ljust(7)}  {c.seconds * 1000:8.2f} ms")
                for d in c.diagnostics:
                    lines.append(f"  {' ' * w}    {d}")
                if c.witness is not None and c.verdict in ("fail", "vacuous"):
                    lines.append(f"  {' ' * w}    witness: {json.dumps(c.witness, ensure_ascii=False)}")
        for k, v in self.extra.items():
            lines.append(f"  {k}: {json.dumps(v, ensure_ascii=False)}")
        lines.append(f"exit {self.exit_code}")
        return "\n".join(lines) + "\n"

    def render(self, fmt: str = "text") -> str:
        return self.to_json() if fmt == "json" else self.to_text()


def input_error_report(command: str, exc: SoftError, digest: str | None = None) -> CheckReport:
    return CheckReport(command, digest, error=str(exc))
