"""Shared report and error types."""
from __future__ import annotations

from dataclasses import dataclass, field


class StructuralError(ValueError):
    """Malformed presentation: missing table entries, unknown names, bad shapes."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems[:5]) + (" ..." if len(self.problems) > 5 else ""))


class CapExceeded(RuntimeError):
    """An enumeration would exceed the configured size bound."""

    def __init__(self, what, size, cap):
        self.what, self.size, self.cap = what, size, cap
        super().__init__(f"{what}: {size} elements exceeds cap {cap}")


class PreconditionError(ValueError):
    pass


@dataclass
class Violation:
    law: str
    witness: dict

    def to_json(self):
        return {"law": self.law, "witness": self.witness}


@dataclass
class LawReport:
    violations: list = field(default_factory=list)
    structural: list = field(default_factory=list)
    coverage: dict = field(default_factory=dict)
    skipped: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations and not self.structural

    def __len__(self):
        return len(self.violations) + len(self.structural)

    def add(self, law, **witness):
        self.violations.append(Violation(law, witness))

    def laws(self):
        return sorted({v.law for v in self.violations})

    def merge(self, other, prefix=""):
        for v in other.violations:
            self.violations.append(Violation(prefix + v.law, v.witness))
        self.structural.extend(other.structural)
        for k, v in other.coverage.items():
            self.coverage[prefix + k] = v
        self.skipped.extend(prefix + s for s in other.skipped)
        return self

    def to_json(self):
        return {
            "ok": self.ok,
            "violations": [v.to_json() for v in self.violations],
            "structural": list(self.structural),
            "coverage": {k: self.coverage[k] for k in sorted(self.coverage)},
            "skipped": list(self.skipped),
        }
