"""Shared diagnostic record returned by validators."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning" | "info"
    code: str
    message: str
    where: tuple = ()  # optional coordinates (case id, element id, ...)

    def __str__(self) -> str:
        loc = f" at {'/'.join(str(w) for w in self.where)}" if self.where else ""
        return f"{self.severity}[{self.code}]{loc}: {self.message}"


def errors(diags: list) -> list:
    return [d for d in diags if d.severity == "error"]
