"""Error codes and diagnostics shared by every module."""

from __future__ import annotations

from dataclasses import dataclass


class NormSimError(Exception):
    """Base error; ``code`` is a stable machine-readable identifier."""

    def __init__(self, code: str, message: str = ""):
        super().__init__(f"{code}: {message}" if message else code)
        self.code = code
        self.message = message


@dataclass(frozen=True)
class Diagnostic:
    code: str
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.code} at {self.path or '<root>'}: {self.message}"

    def to_dict(self) -> dict:
        return {"code": self.code, "path": self.path, "message": self.message}


class ScenarioError(NormSimError):
    """Raised when a scenario fails parsing or validation; carries every diagnostic found."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        code = self.diagnostics[0].code if self.diagnostics else "E_INVALID_SCENARIO"
        super().__init__(code, "; ".join(str(d) for d in self.diagnostics))

    @property
    def codes(self) -> list[str]:
        return [d.code for d in self.diagnostics]
