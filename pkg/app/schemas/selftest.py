from typing import List

from pydantic import Field

from app.schemas.base import ReportSchema


class CheckResult(ReportSchema):
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


class SelftestReport(ReportSchema):
    seed: int
    quick: bool
    checks: List[CheckResult] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)
