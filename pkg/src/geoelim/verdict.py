"""Pass/Fail verdicts shared by the checkers."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Pass:
    trials: int = 0
    kind = "Pass"

    @property
    def ok(self) -> bool:
        return True


@dataclass(frozen=True)
class Fail:
    witness: object
    detail: object = None
    kind = "Fail"

    @property
    def ok(self) -> bool:
        return False
