"""Verdict containers shared by the state model and the property engine."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

HOLDS = "holds"
VIOLATED = "violated"
NOT_APPLICABLE = "not-applicable"

SINGLE = "single-system"
COMPOSITE = "composite"
BOTH = "both"


@dataclass
class Witness:
    """Concrete inputs on which the two sides of a checked relation disagree.

    ``inputs`` holds live objects (states, outcomes, matrices); use
    :func:`gur.states.encode` to serialize them.
    """

    kind: str
    inputs: dict[str, Any]
    lhs: np.ndarray
    rhs: np.ndarray
    distance: float

    def to_dict(self) -> dict:
        from .states import encode

        return {
            "kind": self.kind,
            "inputs": {k: encode(v) for k, v in self.inputs.items()},
            "lhs": encode(np.asarray(self.lhs)),
            "rhs": encode(np.asarray(self.rhs)),
            "distance": float(self.distance),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Witness":
        from .states import decode

        return cls(
            kind=data["kind"],
            inputs={k: decode(v) for k, v in data["inputs"].items()},
            lhs=decode(data["lhs"]),
            rhs=decode(data["rhs"]),
            distance=float(data["distance"]),
        )


@dataclass
class CheckResult:
    """Outcome of one randomized check.

    ``verdict == "holds"`` with ``scope == "single-system"`` and a witness
    attached means the property holds for non-composite systems but a
    composite counterexample was found.
    """

    rule: str | None
    check: str
    verdict: str
    scope: str = BOTH
    trials_run: int = 0
    tol: float = 1e-9
    seed: int | None = None
    witness: Witness | None = None
    detail: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.verdict == HOLDS

    @property
    def restricted(self) -> bool:
        """Holds on single systems only."""
        return self.verdict == HOLDS and self.scope == SINGLE and self.witness is not None

    def to_dict(self) -> dict:
        out = {
            "rule": self.rule,
            "check": self.check,
            "verdict": self.verdict,
            "scope": self.scope,
            "trials": self.trials_run,
            "tol": self.tol,
            "seed": self.seed,
            "witness": None if self.witness is None else self.witness.to_dict(),
        }
        if self.detail:
            out["detail"] = self.detail
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "CheckResult":
        w = data.get("witness")
        return cls(
            rule=data["rule"],
            check=data["check"],
            verdict=data["verdict"],
            scope=data["scope"],
            trials_run=data["trials"],
            tol=data["tol"],
            seed=data["seed"],
            witness=None if w is None else Witness.from_dict(w),
            detail=data.get("detail", {}),
        )
