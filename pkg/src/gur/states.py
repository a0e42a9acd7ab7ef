"""States, proper mixtures and measurement outcomes on composite spaces."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable, Sequence

import numpy as np

from . import linalg as la
from .results import HOLDS, VIOLATED, CheckResult

GLOBAL = None  # Outcome.target for a measurement on the whole space


class ZeroTraceError(ValueError):
    pass


@dataclass(frozen=True)
class CompositeSpace:
    dims: tuple[int, ...]

    def __init__(self, dims: Iterable[int]):
        dims = tuple(int(d) for d in dims)
        if not dims:
            raise ValueError("a composite space needs at least one subsystem")
        if any(d < 1 for d in dims):
            raise ValueError(f"subsystem dimensions must be positive: {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def total(self) -> int:
        return int(np.prod(self.dims))

    @property
    def n(self) -> int:
        return len(self.dims)

    def without(self, index: int) -> "CompositeSpace":
        rest = [d for i, d in enumerate(self.dims) if i != index]
        return CompositeSpace(rest or [1])

    def others(self, index: int) -> list[int]:
        return [i for i in range(self.n) if i != index]

    def __str__(self) -> str:
        return ",".join(map(str, self.dims))


def as_space(space: CompositeSpace | Sequence[int] | int) -> CompositeSpace:
    if isinstance(space, CompositeSpace):
        return space
    if isinstance(space, (int, np.integer)):
        return CompositeSpace([space])
    return CompositeSpace(space)


@dataclass(frozen=True, eq=False)
class QuantumState:
    """A sub-normalized density operator.

    Only the shape is enforced on construction; physicality (positivity and
    trace at most one) is what the property engine tests rule outputs for,
    see :meth:`is_physical`.
    """

    space: CompositeSpace
    matrix: np.ndarray

    def __init__(self, space, matrix):
        space = as_space(space)
        m = np.array(matrix, dtype=complex)
        if m.shape != (space.total, space.total):
            raise ValueError(f"matrix of shape {m.shape} does not match space {space.dims}")
        m.setflags(write=False)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_vector(cls, space, vec) -> "QuantumState":
        v = np.asarray(vec, dtype=complex)
        return cls(space, np.outer(v, v.conj()))

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def scaled(self, c: float) -> "QuantumState":
        return QuantumState(self.space, c * self.matrix)

    def reduced(self, keep: Sequence[int]) -> "QuantumState":
        keep = sorted(keep)
        dims = [self.space.dims[i] for i in keep] or [1]
        return QuantumState(dims, la.partial_trace(self.matrix, self.space.dims, keep))

    def is_physical(self, tol: float = la.DEFAULT_TOL) -> bool:
        return la.is_psd(self.matrix, tol) and self.trace <= 1 + tol

    def to_dict(self) -> dict:
        return {"dims": list(self.space.dims), "entries": _entries(self.matrix)}

    @classmethod
    def from_dict(cls, data: dict) -> "QuantumState":
        dims = data["dims"]
        total = int(np.prod(dims))
        return cls(dims, _from_entries(data["entries"], (total, total)))


def _entries(m: np.ndarray) -> list[list[float]]:
    flat = np.asarray(m, dtype=complex).reshape(-1)
    return [[float(z.real), float(z.imag)] for z in flat]


def _from_entries(entries, shape) -> np.ndarray:
    arr = np.array([complex(re, im) for re, im in entries], dtype=complex)
    return arr.reshape(shape)


@dataclass(frozen=True)
class Gemenge:
    """Proper mixture: state ``items[i][1]`` was prepared with probability ``items[i][0]``.

    Measurement keeps the weights and replaces each state by its
    sub-normalized update, so weights need not sum to one afterwards.
    Zero and tiny weights are kept.
    """

    items: tuple[tuple[float, QuantumState], ...]

    def __init__(self, items: Iterable[tuple[float, QuantumState]]):
        items = tuple((float(w), s) for w, s in items)
        if not items:
            raise ValueError("empty Gemenge")
        if any(w < 0 for w, _ in items):
            raise ValueError("Gemenge weights must be non-negative")
        space = items[0][1].space
        if any(s.space != space for _, s in items):
            raise ValueError("Gemenge states live on different spaces")
        object.__setattr__(self, "items", items)

    @classmethod
    def of(cls, state: QuantumState) -> "Gemenge":
        return cls([(1.0, state)])

    @property
    def space(self) -> CompositeSpace:
        return self.items[0][1].space

    def density(self) -> QuantumState:
        return gemenge_density(self)

    @property
    def total_trace(self) -> float:
        return sum(w * s.trace for w, s in self.items)

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def __add__(self, other: "Gemenge") -> "Gemenge":
        return Gemenge(self.items + other.items)

    def scaled_weights(self, c: float) -> "Gemenge":
        return Gemenge([(c * w, s) for w, s in self.items])

    def map_states(self, fn) -> "Gemenge":
        return Gemenge([(w, fn(s)) for w, s in self.items])

    def to_dict(self) -> dict:
        return {"items": [{"weight": w, "state": s.to_dict()} for w, s in self.items]}

    @classmethod
    def from_dict(cls, data: dict) -> "Gemenge":
        return cls([(it["weight"], QuantumState.from_dict(it["state"])) for it in data["items"]])


def gemenge_density(g: Gemenge) -> QuantumState:
    space = g.items[0][1].space
    total = np.zeros((space.total, space.total), dtype=complex)
    for w, s in g.items:
        if s.space != space:
            raise ValueError("Gemenge states live on different spaces")
        total = total + w * s.matrix
    return QuantumState(space, total)


def normalize(s: QuantumState, tol: float = 1e-12) -> QuantumState:
    t = s.trace
    if t <= tol:
        raise ZeroTraceError("cannot normalize a state with vanishing trace")
    return s.scaled(1.0 / t)


@dataclass(frozen=True, eq=False)
class Outcome:
    """A projector observed either on one subsystem or on the whole space.

    ``refinement`` optionally lists rank-one projectors summing to
    ``projector``: the finer measurement a device actually performs.  Rules
    that do not depend on how an outcome was realised ignore it.
    """

    projector: np.ndarray
    target: int | None = GLOBAL
    refinement: tuple[np.ndarray, ...] | None = None

    def __init__(self, projector, target: int | None = GLOBAL, refinement=None, check: bool = True):
        p = np.array(projector, dtype=complex)
        if check and not la.is_projector(p, 1e-8):
            raise ValueError("outcome operator is not an orthogonal projector")
        p.setflags(write=False)
        object.__setattr__(self, "projector", p)
        object.__setattr__(self, "target", None if target is None else int(target))
        if refinement is not None:
            refinement = tuple(np.array(r, dtype=complex) for r in refinement)
        object.__setattr__(self, "refinement", refinement)

    @property
    def is_global(self) -> bool:
        return self.target is None

    @property
    def dim(self) -> int:
        return self.projector.shape[0]

    def check_space(self, space: CompositeSpace) -> None:
        expected = space.total if self.is_global else None
        if not self.is_global:
            if not 0 <= self.target < space.n:
                raise ValueError(f"target subsystem {self.target} not in space {space.dims}")
            expected = space.dims[self.target]
        if self.dim != expected:
            raise ValueError(f"projector of dimension {self.dim} does not fit target (dimension {expected})")

    def embedded(self, space: CompositeSpace) -> np.ndarray:
        """The projector acting on the full space."""
        self.check_space(space)
        if self.is_global:
            return np.asarray(self.projector)
        return la.embed_local(self.projector, space.dims, self.target)

    def globalized(self, space: CompositeSpace) -> "Outcome":
        """The same outcome seen by a device acting on the whole space."""
        if self.is_global:
            return self
        ref = None
        if self.refinement is not None:
            ref = [la.embed_local(r, space.dims, self.target) for r in self.refinement]
        return Outcome(self.embedded(space), GLOBAL, ref, check=False)

    def conjugated(self, u: np.ndarray) -> "Outcome":
        u = np.asarray(u)
        ref = None
        if self.refinement is not None:
            ref = [u @ r @ u.conj().T for r in self.refinement]
        return Outcome(u @ self.projector @ u.conj().T, self.target, ref, check=False)

    def with_refinement(self, refinement) -> "Outcome":
        return Outcome(self.projector, self.target, refinement, check=False)

    def with_target(self, target: int | None) -> "Outcome":
        return Outcome(self.projector, target, self.refinement, check=False)

    def to_dict(self) -> dict:
        d = self.dim
        out = {
            "target": "global" if self.is_global else self.target,
            "dim": d,
            "projector": _entries(self.projector),
        }
        if self.refinement is not None:
            out["refinement"] = [_entries(r) for r in self.refinement]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "Outcome":
        d = data["dim"]
        target = None if data["target"] == "global" else int(data["target"])
        ref = data.get("refinement")
        if ref is not None:
            ref = [_from_entries(r, (d, d)) for r in ref]
        return cls(_from_entries(data["projector"], (d, d)), target, ref, check=False)


@dataclass(frozen=True)
class Observable:
    outcomes: tuple[Outcome, ...]

    def __init__(self, outcomes: Iterable[Outcome]):
        object.__setattr__(self, "outcomes", tuple(outcomes))

    @classmethod
    def from_projectors(cls, projectors, target: int | None = GLOBAL) -> "Observable":
        return cls(Outcome(p, target, check=False) for p in projectors)

    def __iter__(self):
        return iter(self.outcomes)

    def __len__(self) -> int:
        return len(self.outcomes)


def validate_observable(obs: Observable, tol: float = la.DEFAULT_TOL) -> CheckResult:
    """Idempotence, mutual orthogonality and completeness of an observable."""
    problems = []
    outs = list(obs)
    if not outs:
        problems.append("no outcomes")
    elif len({o.target for o in outs}) != 1:
        problems.append("outcomes address different targets")
    elif len({o.dim for o in outs}) != 1:
        problems.append("outcomes have different dimensions")
    else:
        for i, o in enumerate(outs):
            if not la.is_projector(o.projector, tol):
                problems.append(f"outcome {i} is not a projector")
        for i in range(len(outs)):
            for j in range(i + 1, len(outs)):
                if la.dist(outs[i].projector @ outs[j].projector, 0 * outs[i].projector) > tol:
                    problems.append(f"outcomes {i} and {j} are not orthogonal")
        total = sum(o.projector for o in outs)
        if la.dist(total, np.eye(outs[0].dim)) > tol:
            problems.append("outcomes do not sum to the identity")
    return CheckResult(
        rule=None,
        check="observable",
        verdict=VIOLATED if problems else HOLDS,
        trials_run=1,
        tol=tol,
        detail={"problems": problems} if problems else {},
    )


def encode(obj: Any) -> Any:
    """JSON-ready form of states, outcomes, matrices and containers of them."""
    if isinstance(obj, QuantumState):
        return {"type": "state", **obj.to_dict()}
    if isinstance(obj, Gemenge):
        return {"type": "gemenge", **obj.to_dict()}
    if isinstance(obj, Outcome):
        return {"type": "outcome", **obj.to_dict()}
    if isinstance(obj, CompositeSpace):
        return {"type": "space", "dims": list(obj.dims)}
    if isinstance(obj, np.ndarray):
        shape = list(obj.shape)
        return {"type": "matrix", "shape": shape, "entries": _entries(obj)}
    if isinstance(obj, (list, tuple)):
        return [encode(o) for o in obj]
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)) and not isinstance(obj, bool):
        return int(obj)
    return obj


def decode(obj: Any) -> Any:
    if isinstance(obj, list):
        return [decode(o) for o in obj]
    if not isinstance(obj, dict):
        return obj
    if "type" not in obj:
        return {k: decode(v) for k, v in obj.items()}
    kind = obj["type"]
    if kind == "state":
        return QuantumState.from_dict(obj)
    if kind == "gemenge":
        return Gemenge.from_dict(obj)
    if kind == "outcome":
        return Outcome.from_dict(obj)
    if kind == "space":
        return CompositeSpace(obj["dims"])
    if kind == "matrix":
        return _from_entries(obj["entries"], tuple(obj["shape"]))
    raise ValueError(f"unknown encoded type {kind!r}")
