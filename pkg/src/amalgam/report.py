"""Structured pass/fail reporting shared by the checkers and the CLI."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional


@dataclass
class ClauseResult:
    key: str
    passed: Optional[bool]  # None: not evaluated (guarded out or capped)
    detail: str = ""


@dataclass
class CheckReport:
    subject: str
    items: list[ClauseResult] = field(default_factory=list)

    def add(self, key: str, passed: Optional[bool], detail: str = ""):
        self.items.append(ClauseResult(key, passed, detail))

    def skip(self, key: str, detail: str = "guarded out by an earlier failure"):
        self.items.append(ClauseResult(key, None, detail))

    @property
    def passed(self) -> bool:
        return all(item.passed is not False for item in self.items)

    def failing(self) -> list[str]:
        return [item.key for item in self.items if item.passed is False]

    def to_dict(self) -> dict:
        return {
            "subject": self.subject,
            "passed": self.passed,
            "items": [
                {"key": i.key, "passed": i.passed, "detail": i.detail}
                for i in self.items
            ],
        }

    def merged(self, other: "CheckReport") -> "CheckReport":
        out = CheckReport(self.subject)
        out.items = list(self.items) + list(other.items)
        return out
