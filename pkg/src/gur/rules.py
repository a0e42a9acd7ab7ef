"""State-update rules: the Lüders rule, four valid alternatives and five invalid ones.

Every rule maps an :class:`~gur.states.Outcome` and a sub-normalized
:class:`~gur.states.QuantumState` to a :class:`~gur.states.Gemenge` whose
total trace is the probability of the outcome.  Outcomes with a subsystem
``target`` are local measurements; ``target=None`` measures the whole space.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from . import linalg as la
from .states import CompositeSpace, Gemenge, Outcome, QuantumState

ZERO = 1e-12  # denominators below this yield the zero operator


def _tr(m: np.ndarray) -> float:
    return float(np.trace(m).real)


def _zero(space: CompositeSpace) -> np.ndarray:
    return np.zeros((space.total, space.total), dtype=complex)


def _marginals(rho: np.ndarray, space: CompositeSpace, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Reduced state of subsystem ``k`` and joint reduced state of all others."""
    dims = space.dims
    own = la.partial_trace(rho, dims, [k])
    rest = la.partial_trace(rho, dims, space.others(k))
    return own, rest


def lambda_update(lam: float, p: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Single-system probability-amplifying update.

    ``Tr(P rho) * S rho S / Tr(G rho)`` with ``G = (1-lam) P + lam I`` and
    ``S = P + sqrt(lam) (I - P)`` its square root.
    """
    eye = np.eye(p.shape[0])
    g = (1 - lam) * p + lam * eye
    den = _tr(g @ rho)
    if den < ZERO:
        return np.zeros_like(rho)
    s = p + math.sqrt(lam) * (eye - p)
    return _tr(p @ rho) * (s @ rho @ s) / den


class UpdateRule:
    """Base class.  Subclasses implement ``_local`` and ``_global``.

    Both receive the outcome, the raw matrix and the space, and return a
    list of ``(weight, matrix)`` pairs.
    """

    name = "rule"
    #: whether the rule reads ``Outcome.refinement``
    uses_refinement = False

    def apply(self, outcome: Outcome, state: QuantumState | Gemenge) -> Gemenge:
        if isinstance(state, Gemenge):
            return self.apply_gemenge(outcome, state)
        space = state.space
        outcome.check_space(space)
        rho = np.asarray(state.matrix)
        if outcome.is_global:
            items = self._global(outcome, rho, space)
        else:
            items = self._local(outcome, rho, space)
        return Gemenge((w, QuantumState(space, m)) for w, m in items)

    __call__ = apply

    def apply_gemenge(self, outcome: Outcome, g: Gemenge) -> Gemenge:
        items = []
        for w, s in g:
            for w2, s2 in self.apply(outcome, s):
                items.append((w * w2, s2))
        return Gemenge(items)

    def apply_sequence(self, outcomes: Sequence[Outcome], g: QuantumState | Gemenge) -> Gemenge:
        if isinstance(g, QuantumState):
            g = Gemenge.of(g)
        for o in outcomes:
            g = self.apply_gemenge(o, g)
        return g

    def _local(self, outcome, rho, space):
        raise NotImplementedError

    def _global(self, outcome, rho, space):
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name}>"


class Luders(UpdateRule):
    name = "luders"

    def _local(self, outcome, rho, space):
        q = outcome.embedded(space)
        return [(1.0, q @ rho @ q)]

    def _global(self, outcome, rho, space):
        p = outcome.projector
        return [(1.0, p @ rho @ p)]


class LocallyLuders(UpdateRule):
    """Lüders update of the measured marginal, tensored with the untouched rest.

    Always leaves a product state; reduces to Lüders on single systems and
    for global outcomes.
    """

    name = "loc-luders"

    def _local(self, outcome, rho, space):
        t = _tr(rho)
        if t < ZERO:
            return [(1.0, _zero(space))]
        k = outcome.target
        own, rest = _marginals(rho, space, k)
        p = outcome.projector
        return [(1.0, la.place(p @ own @ p, rest, space.dims, k) / t)]

    def _global(self, outcome, rho, space):
        return Luders()._global(outcome, rho, space)


class Passive(UpdateRule):
    """Non-collapsing measurement: the state is only rescaled by the outcome probability."""

    name = "passive"

    def _scaled(self, q, rho, space):
        t = _tr(rho)
        if t < ZERO:
            return [(1.0, _zero(space))]
        return [(1.0, _tr(q @ rho) / t * rho)]

    def _local(self, outcome, rho, space):
        return self._scaled(outcome.embedded(space), rho, space)

    def _global(self, outcome, rho, space):
        return self._scaled(outcome.projector, rho, space)


class Depolarising(UpdateRule):
    name = "dep"

    def _local(self, outcome, rho, space):
        k = outcome.target
        q = outcome.embedded(space)
        rest = la.partial_trace(q @ rho @ q, space.dims, space.others(k))
        d = space.dims[k]
        return [(1.0, la.place(np.eye(d) / d, rest, space.dims, k))]

    def _global(self, outcome, rho, space):
        d = space.total
        return [(1.0, _tr(outcome.projector @ rho) * np.eye(d, dtype=complex) / d)]


class LambdaRule(UpdateRule):
    def __init__(self, lam: float):
        lam = float(lam)
        if not 0.0 <= lam <= 1.0:
            raise ValueError(f"lambda must lie in [0, 1], got {lam}")
        self.lam = lam

    @property
    def name(self) -> str:
        return f"lambda:{self.lam!r}"

    def _local(self, outcome, rho, space):
        t = _tr(rho)
        if t < ZERO:
            return [(1.0, _zero(space))]
        k = outcome.target
        own, rest = _marginals(rho, space, k)
        upd = lambda_update(self.lam, np.asarray(outcome.projector), own)
        return [(1.0, la.place(upd, rest, space.dims, k) / t)]

    def _global(self, outcome, rho, space):
        return [(1.0, lambda_update(self.lam, np.asarray(outcome.projector), rho))]


class CCDepolarising(UpdateRule):
    """Depolarising rule extended by treating a local outcome as its global embedding."""

    name = "cc-dep"

    def _local(self, outcome, rho, space):
        return self._global(outcome.globalized(space), rho, space)

    def _global(self, outcome, rho, space):
        return Depolarising()._global(outcome, rho, space)


class CCLambda(LambdaRule):
    @property
    def name(self) -> str:
        return f"cc-lambda:{self.lam!r}"

    def _local(self, outcome, rho, space):
        return self._global(outcome.globalized(space), rho, space)


class MuMixture(UpdateRule):
    """With probability ``1 - mu`` collapse (Lüders), otherwise stay passive.

    The output is kept as a two-item proper mixture.
    """

    def __init__(self, mu: float):
        mu = float(mu)
        if not 0.0 < mu < 1.0:
            raise ValueError(f"mu must lie in (0, 1), got {mu}")
        self.mu = mu

    @property
    def name(self) -> str:
        return f"mu:{self.mu!r}"

    def _mix(self, a, b):
        (_, ma), = a
        (_, mb), = b
        return [(1 - self.mu, ma), (self.mu, mb)]

    def _local(self, outcome, rho, space):
        return self._mix(Luders()._local(outcome, rho, space), Passive()._local(outcome, rho, space))

    def _global(self, outcome, rho, space):
        return self._mix(Luders()._global(outcome, rho, space), Passive()._global(outcome, rho, space))


def spectral_refinement(p: np.ndarray) -> list[np.ndarray]:
    """Rank-one projectors onto an eigenbasis of the range of ``p``."""
    vals, vecs = np.linalg.eigh((p + p.conj().T) / 2)
    return [np.outer(vecs[:, i], vecs[:, i].conj()) for i in range(len(vals)) if vals[i] > 0.5]


def check_refinement(p: np.ndarray, refinement: Sequence[np.ndarray], tol: float = 1e-8) -> None:
    refinement = [np.asarray(r) for r in refinement]
    if not refinement:
        raise ValueError("empty refinement")
    for r in refinement:
        if r.shape != p.shape or not la.is_projector(r, tol):
            raise ValueError("refinement element is not a projector of the outcome's dimension")
    for i in range(len(refinement)):
        for j in range(i + 1, len(refinement)):
            if la.dist(refinement[i] @ refinement[j], np.zeros_like(p)) > tol:
                raise ValueError("refinement projectors are not mutually orthogonal")
    if la.dist(sum(refinement), p) > tol:
        raise ValueError("refinement does not sum to the outcome projector")


class VonNeumann(UpdateRule):
    """Degenerate outcomes are realised by a finer, non-degenerate measurement.

    The post-measurement state is the proper mixture of Lüders updates for
    each element of ``outcome.refinement``; without one, an eigenbasis of the
    projector is used.  Local outcomes act as the refined map tensored with
    the identity on the other subsystems.
    """

    name = "von-neumann"
    uses_refinement = True

    def _refinement(self, outcome):
        p = np.asarray(outcome.projector)
        if outcome.refinement is None:
            return spectral_refinement(p)
        check_refinement(p, outcome.refinement)
        return list(outcome.refinement)

    def _local(self, outcome, rho, space):
        out = []
        for r in self._refinement(outcome):
            q = la.embed_local(r, space.dims, outcome.target)
            out.append((1.0, q @ rho @ q))
        return out

    def _global(self, outcome, rho, space):
        return [(1.0, r @ rho @ r) for r in self._refinement(outcome)]


class UnitaryKick(UpdateRule):
    """Every measurement applies a fixed unitary to the measured system.

    ``unitary=None`` uses the cyclic shift of the measured system's
    dimension (Pauli X on a qubit).
    """

    name = "unitary-kick"

    def __init__(self, unitary: np.ndarray | None = None):
        if unitary is not None:
            unitary = np.asarray(unitary, dtype=complex)
            if not la.is_unitary(unitary, 1e-8):
                raise ValueError("kick operator is not unitary")
        self.unitary = unitary

    def _kick(self, dim: int) -> np.ndarray:
        if self.unitary is None:
            return la.shift_operator(dim)
        if self.unitary.shape != (dim, dim):
            raise ValueError(f"kick unitary of shape {self.unitary.shape} cannot act on dimension {dim}")
        return self.unitary

    def _apply(self, q, w, rho, space):
        t = _tr(rho)
        if t < ZERO:
            return [(1.0, _zero(space))]
        return [(1.0, _tr(q @ rho) / t * (w @ rho @ w.conj().T))]

    def _local(self, outcome, rho, space):
        k = outcome.target
        w = la.embed_local(self._kick(space.dims[k]), space.dims, k)
        return self._apply(outcome.embedded(space), w, rho, space)

    def _global(self, outcome, rho, space):
        return self._apply(outcome.projector, self._kick(space.total), rho, space)


def apply_gemenge(rule: UpdateRule, outcome: Outcome, g: Gemenge) -> Gemenge:
    return rule.apply_gemenge(outcome, g)


def apply_sequence(rule: UpdateRule, outcomes: Sequence[Outcome], g: QuantumState | Gemenge) -> Gemenge:
    return rule.apply_sequence(outcomes, g)


# functional forms


def luders(outcome, state):
    return Luders().apply(outcome, state)


def locally_luders(outcome, state):
    return LocallyLuders().apply(outcome, state)


def passive(outcome, state):
    return Passive().apply(outcome, state)


def depolarising(outcome, state):
    return Depolarising().apply(outcome, state)


def lambda_rule(lam, outcome, state):
    return LambdaRule(lam).apply(outcome, state)


def cc_extended_depolarising(outcome, state):
    return CCDepolarising().apply(outcome, state)


def cc_extended_lambda(lam, outcome, state):
    return CCLambda(lam).apply(outcome, state)


def mu_mixture(mu, outcome, state):
    return MuMixture(mu).apply(outcome, state)


def von_neumann(outcome, state, refinement=None):
    if refinement is not None:
        outcome = outcome.with_refinement(refinement)
    return VonNeumann().apply(outcome, state)


def unitary_kick(unitary, outcome, state):
    return UnitaryKick(unitary).apply(outcome, state)


# registry

_SIMPLE = {
    "luders": Luders,
    "loc-luders": LocallyLuders,
    "passive": Passive,
    "dep": Depolarising,
    "cc-dep": CCDepolarising,
    "von-neumann": VonNeumann,
    "unitary-kick": UnitaryKick,
}
_PARAM = {"lambda": LambdaRule, "cc-lambda": CCLambda, "mu": MuMixture}

RULE_NAMES = tuple(_SIMPLE) + tuple(f"{k}:<value>" for k in _PARAM)


class UnknownRuleError(ValueError):
    pass


def get_rule(spec: str | UpdateRule, **params) -> UpdateRule:
    """Look up a rule by registry name, e.g. ``"luders"`` or ``"lambda:0.25"``.

    ``lambda``/``mu`` may be passed as keywords instead of after a colon.
    """
    if isinstance(spec, UpdateRule):
        return spec
    key, _, value = spec.strip().partition(":")
    if key in _SIMPLE:
        if value:
            raise UnknownRuleError(f"rule {key!r} takes no parameter")
        return _SIMPLE[key]()
    if key in _PARAM:
        pname = "mu" if key == "mu" else "lambda"
        if value:
            try:
                x = float(value)
            except ValueError:
                raise ValueError(f"bad parameter {value!r} for rule {key!r}") from None
        elif params.get(pname) is not None:
            x = float(params[pname])
        else:
            raise ValueError(f"rule {key!r} needs a parameter, e.g. {key}:0.5")
        return _PARAM[key](x)
    raise UnknownRuleError(f"unknown rule {spec!r}; known: {', '.join(RULE_NAMES)}")


VALID_RULES = ("luders", "loc-luders", "passive", "dep", "lambda:0.25")
INVALID_RULES = ("cc-dep", "cc-lambda:0.5", "mu:0.5", "von-neumann", "unitary-kick")


def catalog(names: Iterable[str] = VALID_RULES + INVALID_RULES) -> list[UpdateRule]:
    return [get_rule(n) for n in names]
