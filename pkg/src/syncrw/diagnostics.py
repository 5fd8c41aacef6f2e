"""Diagnostics reported by the parser, resolver and checkers."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Span:
    path: str
    start: int
    end: int
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.path}:{self.line}:{self.col}"


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    code: str
    message: str
    span: Span | None = None

    def __str__(self) -> str:
        where = f"{self.span}: " if self.span else ""
        return f"{where}{self.severity} {self.code}: {self.message}"

    def to_json(self) -> dict:
        d = {"severity": self.severity, "code": self.code, "message": self.message}
        if self.span:
            d["span"] = {"path": self.span.path, "line": self.span.line, "col": self.span.col,
                         "start": self.span.start, "end": self.span.end}
        return d


@dataclass
class Report:
    """Outcome of a checker: passes when it holds no error diagnostics."""

    diagnostics: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not any(d.severity == "error" for d in self.diagnostics)

    def add(self, severity: str, code: str, message: str, span=None) -> None:
        self.diagnostics.append(Diagnostic(severity, code, message, span))

    def __iter__(self):
        return iter(self.diagnostics)

    def __len__(self) -> int:
        return len(self.diagnostics)


def error(code: str, message: str, span=None) -> Diagnostic:
    return Diagnostic("error", code, message, span)


def warning(code: str, message: str, span=None) -> Diagnostic:
    return Diagnostic("warning", code, message, span)
