"""Randomized certification of update-rule properties.

Each check draws ``cfg.trials`` random inputs, evaluates both sides of the
relation it tests and stops at the first disagreement larger than
``cfg.tol``, returning it as a :class:`~gur.results.Witness`.  A ``holds``
verdict therefore means "no violation found in the sampled trials"; a
``violated`` verdict is conclusive and can be replayed with
:func:`replay_witness`.

Every relation is computed by a function registered in ``EVALUATORS``; the
same function produces the witness and re-evaluates it on replay.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import linalg as la
from .results import BOTH, COMPOSITE, HOLDS, NOT_APPLICABLE, SINGLE, VIOLATED, CheckResult, Witness
from .rules import ZERO, UpdateRule, get_rule
from .states import CompositeSpace, Gemenge, Outcome, QuantumState, as_space

DEFAULT_DIMS = ((2, 2), (2, 3), (2, 2, 2))


@dataclass
class CheckConfig:
    trials: int = 200
    dims: Sequence[CompositeSpace] = field(default_factory=lambda: [CompositeSpace(d) for d in DEFAULT_DIMS])
    tol: float = 1e-9
    seed: int = 0
    single_dims: Sequence[int] = (2, 3, 4)

    def __post_init__(self):
        self.dims = [as_space(d) for d in self.dims]
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be > 0")
        if not self.dims:
            raise ValueError("at least one space is required")

    @property
    def composite_spaces(self) -> list[CompositeSpace]:
        return [s for s in self.dims if s.n >= 2]

    @property
    def single_spaces(self) -> list[CompositeSpace]:
        return [CompositeSpace([d]) for d in self.single_dims]


def trial_rng(cfg: CheckConfig, check: str, trial: int) -> np.random.Generator:
    """Independent stream per (seed, check, trial)."""
    return np.random.default_rng([cfg.seed, zlib.crc32(check.encode()), trial])


# sampling helpers


def random_refinement(p: np.ndarray, rng: np.random.Generator) -> list[np.ndarray]:
    """Random rank-one projectors summing to ``p``."""
    vals, vecs = np.linalg.eigh((p + p.conj().T) / 2)
    basis = vecs[:, vals > 0.5]
    r = basis.shape[1]
    rotated = basis @ la.haar_unitary(r, rng)
    return [np.outer(rotated[:, i], rotated[:, i].conj()) for i in range(r)]


def random_outcome(space: CompositeSpace, rng, target: int | None | str = "random", rank: int | None = None) -> Outcome:
    if target == "random":
        target = int(rng.integers(space.n))
    d = space.total if target is None else space.dims[target]
    rank = int(rng.integers(1, d + 1)) if rank is None else rank
    p = la.random_projector(d, rank, rng)
    return Outcome(p, target, random_refinement(p, rng), check=False)


def random_local_observable(space: CompositeSpace, target: int, rng) -> list[Outcome]:
    d = space.dims[target]
    m = int(rng.integers(1, d + 1))
    return [Outcome(p, target, random_refinement(p, rng), check=False) for p in la.random_observable(d, m, rng)]


def random_state(space: CompositeSpace, rng, min_rank: int = 1) -> QuantumState:
    rank = int(rng.integers(min_rank, space.total + 1))
    return QuantumState(space, la.random_density(space.total, rank, rng))


def random_decompositions(rho: np.ndarray, space: CompositeSpace, rng) -> tuple[Gemenge, Gemenge]:
    """Two different proper mixtures with density ``rho``: spectral and a random unitary remix."""
    vals, vecs = np.linalg.eigh(rho)
    keep = vals > 1e-13
    vals, vecs = vals[keep], vecs[:, keep]
    spectral = Gemenge((float(w), QuantumState.from_vector(space, vecs[:, i])) for i, w in enumerate(vals))
    r = len(vals)
    m = r + int(rng.integers(0, 2))
    amps = np.zeros((space.total, m), dtype=complex)
    amps[:, :r] = vecs * np.sqrt(vals)
    mixed = amps @ la.haar_unitary(m, rng).T
    items = []
    for j in range(m):
        v = mixed[:, j]
        w = float(np.vdot(v, v).real)
        if w > 1e-14:
            items.append((w, QuantumState.from_vector(space, v / math.sqrt(w))))
    return spectral, Gemenge(items)


# Gemenge comparison helpers


def _density(g: Gemenge) -> np.ndarray:
    return np.asarray(g.density().matrix)


def _conj(g: Gemenge, u: np.ndarray) -> Gemenge:
    return g.map_states(lambda s: QuantumState(s.space, u @ s.matrix @ u.conj().T))


def matched_blocks(a: Gemenge, b: Gemenge) -> tuple[np.ndarray, np.ndarray]:
    """Block-diagonal views of two Gemenges for itemwise comparison.

    The first block is the summed density; the following blocks are the
    weighted items, with ``b``'s items greedily reordered to match ``a``'s.
    Missing items are padded with zeros.
    """
    wa = [w * np.asarray(s.matrix) for w, s in a]
    wb = [w * np.asarray(s.matrix) for w, s in b]
    zero = np.zeros_like(wa[0])
    n = max(len(wa), len(wb))
    wa += [zero] * (n - len(wa))
    wb += [zero] * (n - len(wb))
    unused = list(range(n))
    ordered = []
    for m in wa:
        best = min(unused, key=lambda j: la.dist(m, wb[j]))
        unused.remove(best)
        ordered.append(wb[best])
    lhs = _block_diag([sum(wa)] + wa)
    rhs = _block_diag([sum(wb)] + ordered)
    return lhs, rhs


def _block_diag(mats: Sequence[np.ndarray]) -> np.ndarray:
    n = sum(m.shape[0] for m in mats)
    out = np.zeros((n, n), dtype=complex)
    i = 0
    for m in mats:
        k = m.shape[0]
        out[i:i + k, i:i + k] = m
        i += k
    return out


def _scalar(x: float) -> np.ndarray:
    return np.array([[x]], dtype=complex)


# evaluators: (rule, **inputs) -> (lhs, rhs)


def eval_born(rule, outcome, state):
    q = outcome.embedded(state.space)
    return _scalar(rule(outcome, state).total_trace), _scalar(np.trace(q @ state.matrix).real)


def eval_homogeneity(rule, outcome, state, c):
    return _density(rule(outcome, state.scaled(c))), c * _density(rule(outcome, state))


def eval_completeness(rule, outcome, state):
    out = rule(outcome, state)
    min_eig = min(la.min_eigenvalue(s.matrix) for _, s in out)
    max_tr = max(s.trace for _, s in out)
    min_w = min(w for w, _ in out)
    herm = max(la.dist(s.matrix, s.matrix.conj().T) for _, s in out)
    lhs = np.array([[min(min_eig, 0.0), max(max_tr, 1.0), min(min_w, 0.0), herm]], dtype=complex)
    return lhs, np.array([[0, 1, 0, 0]], dtype=complex)


def eval_determinism(rule, outcome, state):
    return matched_blocks(rule(outcome, state), rule(outcome, state))


def eval_context(rule, outcome, refinement, state):
    other = outcome.with_refinement(refinement)
    return _density(rule(outcome, state)), _density(rule(other, state))


def eval_covariance(rule, outcome, state, unitaries):
    u = la.tensor_all(unitaries)
    rotated = outcome.conjugated(u if outcome.is_global else unitaries[outcome.target])
    moved = QuantumState(state.space, u @ state.matrix @ u.conj().T)
    return matched_blocks(rule(rotated, moved), _conj(rule(outcome, state), u))


def eval_self_consistency(rule, outcome, state, traced):
    space = state.space
    keep = space.others(traced)
    lhs = rule(outcome, state).map_states(lambda s: s.reduced(keep))
    k = keep.index(outcome.target)
    rhs = rule(outcome.with_target(k), state.reduced(keep))
    return matched_blocks(lhs, rhs)


def eval_no_signalling(rule, outcomes, state):
    k = outcomes[0].target
    keep = state.space.others(k)
    lhs = sum(np.asarray(rule(o, state).density().reduced(keep).matrix) for o in outcomes)
    return lhs, np.asarray(state.reduced(keep).matrix)


def eval_local_commutativity(rule, first, second, state):
    return _density(rule.apply_sequence([first, second], state)), _density(rule.apply_sequence([second, first], state))


def eval_det_repeatability(rule, outcome, state):
    sigma = _density(rule(outcome, state))
    q = outcome.embedded(state.space)
    return _scalar(np.trace(q @ sigma).real), _scalar(np.trace(sigma).real)


def eval_weak_repeatability(rule, outcome, state):
    """Normalized probabilities of the outcome after (lhs) and before (rhs) measuring it."""
    q = outcome.embedded(state.space)
    rho = np.asarray(state.matrix)
    first = np.trace(q @ rho).real / np.trace(rho).real
    sigma = _density(rule(outcome, state))
    t = np.trace(sigma).real
    second = np.trace(q @ sigma).real / t if t > ZERO else first
    return _scalar(second), _scalar(first)


def eval_prep_indistinguishability(rule, outcome, first, second):
    return _density(rule.apply_gemenge(outcome, first)), _density(rule.apply_gemenge(outcome, second))


def eval_composition_compatibility(rule, outcome, state):
    return matched_blocks(rule(outcome, state), rule(outcome.globalized(state.space), state))


def eval_ideality(rule, outcome, state):
    return _density(rule(outcome, state)), np.asarray(state.matrix)


def eval_local_tomography(rule, first, second, state):
    space = state.space
    q = first.embedded(space) @ second.embedded(space)
    return _scalar(rule.apply_sequence([first, second], state).total_trace), _scalar(np.trace(q @ state.matrix).real)


def eval_coherence(rule, fine, coarse, state):
    p = np.asarray(fine.embedded(state.space))
    return _scalar(np.trace(p @ _density(rule(coarse, state))).real), _scalar(np.trace(p @ state.matrix).real)


def eval_linearity(rule, outcome, first, second, p):
    mix = QuantumState(first.space, p * first.matrix + (1 - p) * second.matrix)
    rhs = p * _density(rule(outcome, first)) + (1 - p) * _density(rule(outcome, second))
    return _density(rule(outcome, mix)), rhs


def linear_extension(rule: UpdateRule, outcome: Outcome, space: CompositeSpace) -> Callable[[np.ndarray], np.ndarray]:
    """Extend ``rho -> density(rule(outcome, rho))`` linearly to all matrices.

    Only meaningful when the conditional map is convex-linear on states.
    The map is probed on the states ``|i><i|``, ``|i>+|j>`` and
    ``|i>+i|j>`` (normalized), which span every ``|i><j|``.
    """
    d = space.total

    def image(vec):
        return _density(rule(outcome, QuantumState.from_vector(space, vec)))

    eye = np.eye(d, dtype=complex)
    diag = [image(eye[i]) for i in range(d)]
    units = {}
    for i in range(d):
        units[i, i] = diag[i]
        for j in range(i + 1, d):
            re = 2 * image((eye[i] + eye[j]) / math.sqrt(2)) - diag[i] - diag[j]
            im = 2 * image((eye[i] + 1j * eye[j]) / math.sqrt(2)) - diag[i] - diag[j]
            units[i, j] = (re + 1j * im) / 2
            units[j, i] = (re - 1j * im) / 2

    def channel(m):
        m = np.asarray(m)
        out = np.zeros((d, d), dtype=complex)
        for (i, j), img in units.items():
            if m[i, j] != 0:
                out = out + m[i, j] * img
        return out

    return channel


def eval_choi_positivity(rule, outcome, space):
    choi = la.choi_matrix(linear_extension(rule, outcome, space), space.total)
    return _scalar(min(la.min_eigenvalue(choi), 0.0)), _scalar(0.0)


EVALUATORS: dict[str, Callable] = {
    "born": eval_born,
    "homogeneity": eval_homogeneity,
    "completeness": eval_completeness,
    "determinism": eval_determinism,
    "context": eval_context,
    "covariance": eval_covariance,
    "self_consistency": eval_self_consistency,
    "no_signalling": eval_no_signalling,
    "local_commutativity": eval_local_commutativity,
    "det_repeatability": eval_det_repeatability,
    "weak_repeatability": eval_weak_repeatability,
    "prep_indistinguishability": eval_prep_indistinguishability,
    "composition_compatibility": eval_composition_compatibility,
    "ideality": eval_ideality,
    "local_tomography": eval_local_tomography,
    "coherence": eval_coherence,
    "linearity": eval_linearity,
    "choi_positivity": eval_choi_positivity,
}


def evaluate(kind: str, rule: UpdateRule, inputs: dict) -> Witness:
    lhs, rhs = EVALUATORS[kind](rule, **inputs)
    return Witness(kind, dict(inputs), lhs, rhs, la.dist(lhs, rhs))


def replay_witness(rule: UpdateRule | str, witness: Witness | dict) -> float:
    """Recompute the distance recorded in a witness (also accepts its JSON form)."""
    rule = get_rule(rule)
    if isinstance(witness, dict):
        witness = Witness.from_dict(witness)
    return evaluate(witness.kind, rule, witness.inputs).distance


# generic driver


def _search(rule, cfg, check, kind, spaces, sampler, start=0):
    """Run trials until a witness exceeds tol.  Returns (witness or None, trials run)."""
    for t in range(cfg.trials):
        trial = start + t
        rng = trial_rng(cfg, check, trial)
        space = spaces[trial % len(spaces)]
        inputs = sampler(space, rng, trial)
        if inputs is None:
            continue
        w = evaluate(kind, rule, inputs)
        if w.distance > cfg.tol:
            return w, t + 1
    return None, cfg.trials


def _result(rule, cfg, check, witness, trials, scope):
    return CheckResult(
        rule=rule.name,
        check=check,
        verdict=VIOLATED if witness is not None else HOLDS,
        scope=scope,
        trials_run=trials,
        tol=cfg.tol,
        seed=cfg.seed,
        witness=witness,
    )


def _simple(rule, cfg, check, kind, spaces, sampler, scope):
    if not spaces:
        return CheckResult(rule.name, check, NOT_APPLICABLE, scope, 0, cfg.tol, cfg.seed,
                           detail={"reason": "no suitable space in configuration"})
    witness, n = _search(rule, cfg, check, kind, spaces, sampler)
    return _result(rule, cfg, check, witness, n, scope)


def _dual(rule, cfg, check, kind, single_sampler, composite_sampler):
    """Check on single systems first, then on composite systems.

    A composite-only failure gives ``holds`` restricted to single systems,
    with the composite witness attached.
    """
    witness, n1 = _search(rule, cfg, check + ":single", kind, cfg.single_spaces, single_sampler)
    if witness is not None:
        return _result(rule, cfg, check, witness, n1, SINGLE)
    spaces = cfg.composite_spaces
    if not spaces:
        return _result(rule, cfg, check, None, n1, SINGLE)
    witness, n2 = _search(rule, cfg, check + ":composite", kind, spaces, composite_sampler)
    res = _result(rule, cfg, check, None, n1 + n2, BOTH)
    if witness is not None:
        res.scope = SINGLE
        res.witness = witness
    return res


def _outcome_state(target="random", scale=False, globals_every=0):
    def sampler(space, rng, trial):
        tgt = target
        if globals_every and trial % globals_every == globals_every - 1:
            tgt = None
        state = random_state(space, rng)
        if scale:
            state = state.scaled(float(rng.uniform(0.2, 1.0)))
        return {"outcome": random_outcome(space, rng, tgt), "state": state}

    return sampler


# Definition-level checks


def check_born(rule, cfg):
    spaces = cfg.single_spaces + cfg.dims
    return _simple(rule, cfg, "born", "born", spaces, _outcome_state(scale=True, globals_every=4), BOTH)


def check_homogeneity(rule, cfg):
    fixed = (0.0, 0.3, 1.0)

    def sampler(space, rng, trial):
        inputs = _outcome_state(globals_every=5)(space, rng, trial)
        inputs["c"] = fixed[trial % 4] if trial % 4 < 3 else float(rng.uniform())
        return inputs

    return _simple(rule, cfg, "homogeneity", "homogeneity", cfg.single_spaces + cfg.dims, sampler, BOTH)


def check_A1(rule, cfg):
    return _simple(rule, cfg, "A1", "completeness", cfg.single_spaces + cfg.dims,
                   _outcome_state(scale=True, globals_every=4), BOTH)


def _plus_state():
    return QuantumState.from_vector([2], np.array([1, 1]) / math.sqrt(2))


def z_and_x_refinements() -> tuple[list[np.ndarray], list[np.ndarray]]:
    z = [np.diag([1, 0]).astype(complex), np.diag([0, 1]).astype(complex)]
    plus = np.array([1, 1]) / math.sqrt(2)
    minus = np.array([1, -1]) / math.sqrt(2)
    return z, [np.outer(plus, plus).astype(complex), np.outer(minus, minus).astype(complex)]


def check_A2(rule, cfg):
    """Post-measurement state must not depend on how the outcome was refined.

    Trial 0 is the qubit trivial outcome on ``|+>`` with computational vs
    Hadamard refinement; later trials use random degenerate outcomes.
    """
    spaces = cfg.single_spaces + cfg.dims

    def sampler(space, rng, trial):
        if trial == 0:
            z, x = z_and_x_refinements()
            return {"outcome": Outcome(np.eye(2), 0, z, check=False), "refinement": x, "state": _plus_state()}
        inputs = _outcome_state()(space, rng, trial)
        o = inputs["outcome"]
        inputs["refinement"] = random_refinement(np.asarray(o.projector), rng)
        return inputs

    for t in range(cfg.trials):
        rng = trial_rng(cfg, "A2:determinism", t)
        space = spaces[t % len(spaces)]
        w = evaluate("determinism", rule, _outcome_state()(space, rng, t))
        if w.distance > cfg.tol:
            return _result(rule, cfg, "A2", w, t + 1, BOTH)
    return _simple(rule, cfg, "A2", "context", spaces, sampler, BOTH)


def check_A3(rule, cfg):
    def sampler(space, rng, trial):
        inputs = _outcome_state()(space, rng, trial)
        inputs["unitaries"] = [la.haar_unitary(d, rng) for d in space.dims]
        return inputs

    return _simple(rule, cfg, "A3", "covariance", cfg.single_spaces + cfg.dims, sampler, BOTH)


def check_A4(rule, cfg):
    """Tracing out a bystander subsystem commutes with the update.

    Uses every configured space with at least two subsystems; a bipartite
    space checks consistency with the single-system form.
    """

    def sampler(space, rng, trial):
        inputs = _outcome_state()(space, rng, trial)
        k = inputs["outcome"].target
        others = space.others(k)
        inputs["traced"] = int(others[int(rng.integers(len(others)))])
        return inputs

    return _simple(rule, cfg, "A4", "self_consistency", cfg.composite_spaces, sampler, COMPOSITE)


def check_A5(rule, cfg):
    def sampler(space, rng, trial):
        k = int(rng.integers(space.n))
        return {"outcomes": random_local_observable(space, k, rng), "state": random_state(space, rng)}

    return _simple(rule, cfg, "A5", "no_signalling", cfg.composite_spaces, sampler, COMPOSITE)


def _two_parties(space, rng):
    k1, k2 = (int(x) for x in rng.choice(space.n, size=2, replace=False))
    return random_outcome(space, rng, k1), random_outcome(space, rng, k2)


def _pair_sampler(space, rng, trial):
    first, second = _two_parties(space, rng)
    return {"first": first, "second": second, "state": random_state(space, rng)}


def check_A6(rule, cfg):
    return _simple(rule, cfg, "A6", "local_commutativity", cfg.composite_spaces, _pair_sampler, COMPOSITE)


# operational properties


def check_det_repeatability(rule, cfg):
    return _dual(rule, cfg, "det_repeatability", "det_repeatability", _outcome_state(), _outcome_state())


def check_weak_repeatability(rule, cfg):
    """Repeat probability never drops, and rises strictly on some uncertain outcome."""
    out = None
    total = 0
    for scope, spaces in ((SINGLE, cfg.single_spaces), (COMPOSITE, cfg.composite_spaces)):
        if not spaces:
            continue
        sampler = _outcome_state()
        gain_seen = False
        candidate = None
        tag = f"weak_repeatability:{'single' if scope == SINGLE else 'composite'}"
        failure = None
        for t in range(cfg.trials):
            rng = trial_rng(cfg, tag, t)
            w = evaluate("weak_repeatability", rule, sampler(spaces[t % len(spaces)], rng, t))
            second, first = w.lhs[0, 0].real, w.rhs[0, 0].real
            total += 1
            if second < first - cfg.tol:
                failure = w
                break
            uncertain = cfg.tol < first < 1 - cfg.tol
            if uncertain and second > first + cfg.tol:
                gain_seen = True
            elif uncertain and candidate is None:
                candidate = w
        reason = "repeat probability dropped"
        if failure is None and not gain_seen:
            failure = candidate
            reason = "repeat probability never strictly greater"
        if failure is not None:
            if scope == SINGLE:
                out = _result(rule, cfg, "weak_repeatability", failure, total, SINGLE)
            else:
                out = _result(rule, cfg, "weak_repeatability", None, total, SINGLE)
                out.witness = failure
            out.detail["reason"] = reason
            return out
    return _result(rule, cfg, "weak_repeatability", None, total, BOTH)


def check_prep_indistinguishability(rule, cfg):
    def sampler(space, rng, trial):
        if trial == 0 and space.n == 1:
            zero, one = np.eye(2)
            plus, minus = np.array([1, 1]) / math.sqrt(2), np.array([1, -1]) / math.sqrt(2)
            g = Gemenge([(0.5, QuantumState.from_vector([2], zero)), (0.5, QuantumState.from_vector([2], one))])
            g2 = Gemenge([(0.5, QuantumState.from_vector([2], plus)), (0.5, QuantumState.from_vector([2], minus))])
            return {"outcome": Outcome(np.diag([1, 0]), 0, check=False), "first": g, "second": g2}
        state = random_state(space, rng, min_rank=2)
        first, second = random_decompositions(np.asarray(state.matrix), space, rng)
        return {"outcome": random_outcome(space, rng), "first": first, "second": second}

    return _dual(rule, cfg, "prep_indistinguishability", "prep_indistinguishability", sampler, sampler)


def check_composition_compatibility(rule, cfg):
    return _simple(rule, cfg, "composition_compatibility", "composition_compatibility",
                   cfg.composite_spaces, _outcome_state(), COMPOSITE)


def _certain_sampler(space, rng, trial):
    outcome = random_outcome(space, rng)
    q = outcome.embedded(space)
    g = rng.standard_normal((space.total, space.total)) + 1j * rng.standard_normal((space.total, space.total))
    v = q @ g
    rho = v @ v.conj().T
    return {"outcome": outcome, "state": QuantumState(space, rho / np.trace(rho).real)}


def check_ideality(rule, cfg):
    """Outcomes that are certain must leave the state untouched."""
    return _dual(rule, cfg, "ideality", "ideality", _certain_sampler, _certain_sampler)


def check_local_tomography(rule, cfg):
    """Sequential local outcomes reproduce the statistics of the product outcome.

    Not applicable when the joint post-state depends on the order.
    """
    spaces = cfg.composite_spaces
    if not spaces:
        return CheckResult(rule.name, "local_tomography", NOT_APPLICABLE, COMPOSITE, 0, cfg.tol, cfg.seed)
    for t in range(cfg.trials):
        rng = trial_rng(cfg, "local_tomography:order", t)
        w = evaluate("local_commutativity", rule, _pair_sampler(spaces[t % len(spaces)], rng, t))
        if w.distance > cfg.tol:
            return CheckResult(rule.name, "local_tomography", NOT_APPLICABLE, COMPOSITE, t + 1, cfg.tol, cfg.seed,
                               detail={"reason": "joint post-state depends on measurement order"})
    return _simple(rule, cfg, "local_tomography", "local_tomography", spaces, _pair_sampler, COMPOSITE)


def nested_outcomes(d: int, rng) -> tuple[Outcome, Outcome]:
    """Projectors ``fine <= coarse`` spanned by leading columns of one Haar unitary."""
    u = la.haar_unitary(d, rng)
    r = int(rng.integers(1, d + 1))
    r_fine = int(rng.integers(1, r + 1))
    coarse = u[:, :r] @ u[:, :r].conj().T
    fine = u[:, :r_fine] @ u[:, :r_fine].conj().T
    return Outcome(fine, 0, check=False), Outcome(coarse, 0, random_refinement(coarse, rng), check=False)


def check_coherence(rule, cfg, dims: Sequence[int] | None = None):
    """A prior coarse-grained outcome must not change the finer outcome's probability."""
    spaces = [CompositeSpace([d]) for d in (dims or cfg.single_dims)]

    def sampler(space, rng, trial):
        fine, coarse = nested_outcomes(space.total, rng)
        return {"fine": fine, "coarse": coarse, "state": random_state(space, rng)}

    return _simple(rule, cfg, "coherence", "coherence", spaces, sampler, SINGLE)


# CHSH

CHSH_ALICE = (0.0, math.pi / 2)
CHSH_BOB = (math.pi / 4, 3 * math.pi / 4)
# S = |E00 - E01 + E10 + E11|; with these angles this is the combination that
# reaches 2*sqrt(2) on the singlet.
CHSH_SIGNS = ((1, -1), (1, 1))


def singlet() -> QuantumState:
    v = np.array([0, 1, -1, 0]) / math.sqrt(2)
    return QuantumState.from_vector([2, 2], v)


def spin_projectors(theta: float) -> dict[int, np.ndarray]:
    z = np.diag([1.0, -1.0])
    x = np.array([[0.0, 1.0], [1.0, 0.0]])
    n = math.cos(theta) * z + math.sin(theta) * x
    return {+1: (np.eye(2) + n) / 2, -1: (np.eye(2) - n) / 2}


def correlator(rule: UpdateRule, a: float, b: float, state: QuantumState, bob_first: bool = False) -> float:
    pa, pb = spin_projectors(a), spin_projectors(b)
    total = 0.0
    for s, p in pa.items():
        for t, q in pb.items():
            oa, ob = Outcome(p, 0, check=False), Outcome(q, 1, check=False)
            order = [ob, oa] if bob_first else [oa, ob]
            total += s * t * rule.apply_sequence(order, state).total_trace
    return total


def chsh_value(rule: UpdateRule, bob_first: bool = False, state: QuantumState | None = None) -> float:
    state = singlet() if state is None else state
    s = 0.0
    for i, a in enumerate(CHSH_ALICE):
        for j, b in enumerate(CHSH_BOB):
            s += CHSH_SIGNS[i][j] * correlator(rule, a, b, state, bob_first)
    return abs(s)


def chsh_order_dependent(rule: UpdateRule, tol: float = la.DEFAULT_TOL) -> bool:
    """Whether any CHSH outcome pair yields different joint post-states in the two orders."""
    state = singlet()
    for a in CHSH_ALICE:
        for b in CHSH_BOB:
            for p in spin_projectors(a).values():
                for q in spin_projectors(b).values():
                    w = evaluate("local_commutativity", rule,
                                 {"first": Outcome(p, 0, check=False), "second": Outcome(q, 1, check=False),
                                  "state": state})
                    if w.distance > tol:
                        return True
    return False


def check_nonlocality(rule, cfg):
    """CHSH value on the singlet at fixed optimal settings must exceed 2."""
    if chsh_order_dependent(rule, cfg.tol):
        return CheckResult(rule.name, "nonlocality", NOT_APPLICABLE, COMPOSITE, 1, cfg.tol, cfg.seed,
                           detail={"reason": "joint post-state depends on measurement order",
                                   "chsh": [chsh_value(rule), chsh_value(rule, bob_first=True)]})
    s = chsh_value(rule)
    res = CheckResult(rule.name, "nonlocality", HOLDS if s > 2 + cfg.tol else VIOLATED, COMPOSITE, 1,
                      cfg.tol, cfg.seed, detail={"chsh": s})
    if res.verdict == VIOLATED:
        res.witness = Witness("chsh", {}, _scalar(s), _scalar(2.0), abs(s - 2.0))
    return res


def eval_chsh(rule):
    return _scalar(chsh_value(rule)), _scalar(2.0)


EVALUATORS["chsh"] = eval_chsh


# complete positivity


def check_complete_positivity(rule, cfg):
    """Conditional map must be linear (else violated) with a positive semidefinite Choi matrix."""

    def sampler(space, rng, trial):
        return {
            "outcome": random_outcome(space, rng),
            "first": random_state(space, rng),
            "second": random_state(space, rng),
            "p": float(rng.uniform(0.1, 0.9)),
        }

    res = _simple(rule, cfg, "complete_positivity", "linearity", cfg.composite_spaces, sampler, COMPOSITE)
    if res.verdict != HOLDS:
        res.detail["stage"] = "linearity"
        return res
    spaces = cfg.composite_spaces
    for t in range(cfg.trials):
        rng = trial_rng(cfg, "complete_positivity:choi", t)
        space = spaces[t % len(spaces)]
        w = evaluate("choi_positivity", rule, {"outcome": random_outcome(space, rng), "space": space})
        if w.distance > cfg.tol:
            res = _result(rule, cfg, "complete_positivity", w, cfg.trials + t + 1, COMPOSITE)
            res.detail["stage"] = "choi"
            return res
    res.trials_run += cfg.trials
    return res


check_composition_compat = check_composition_compatibility

# registry

ASSUMPTION_CHECKS = {
    "born": check_born,
    "homogeneity": check_homogeneity,
    "A1": check_A1,
    "A2": check_A2,
    "A3": check_A3,
    "A4": check_A4,
    "A5": check_A5,
    "A6": check_A6,
}

PROPERTY_CHECKS = {
    "det_repeatability": check_det_repeatability,
    "prep_indistinguishability": check_prep_indistinguishability,
    "composition_compatibility": check_composition_compatibility,
    "ideality": check_ideality,
    "local_tomography": check_local_tomography,
    "coherence": check_coherence,
    "nonlocality": check_nonlocality,
    "complete_positivity": check_complete_positivity,
    "weak_repeatability": check_weak_repeatability,
}

CHECKS = {**ASSUMPTION_CHECKS, **PROPERTY_CHECKS}


def run_check(rule: UpdateRule | str, name: str, cfg: CheckConfig | None = None) -> CheckResult:
    if name not in CHECKS:
        raise KeyError(f"unknown check {name!r}; known: {', '.join(CHECKS)}")
    return CHECKS[name](get_rule(rule), cfg or CheckConfig())


def run_all(rule: UpdateRule | str, cfg: CheckConfig | None = None, only: Sequence[str] | None = None) -> list[CheckResult]:
    cfg = cfg or CheckConfig()
    names = list(CHECKS) if only is None else list(only)
    return [run_check(rule, n, cfg) for n in names]
