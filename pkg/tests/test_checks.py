import json
import math

import numpy as np
import pytest

from gur import checks
from gur import linalg as la
from gur.checks import CheckConfig, evaluate, replay_witness, run_all, run_check
from gur.results import BOTH, HOLDS, NOT_APPLICABLE, SINGLE, VIOLATED, CheckResult
from gur.rules import Luders, UpdateRule, get_rule
from gur.states import CompositeSpace, Gemenge, Outcome, QuantumState

P0, P1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
PLUS = np.array([1, 1]) / math.sqrt(2)
PHI = np.array([1, 0, 0, 1]) / math.sqrt(2)

FAST = CheckConfig(trials=40, seed=3)


def proj(v):
    return np.outer(v, np.conj(v))


def vec_state(dims, v):
    return QuantumState.from_vector(dims, np.asarray(v, dtype=complex))


class Untouched(UpdateRule):
    """Returns the input unchanged: no Born factor."""

    name = "untouched"

    def _local(self, outcome, rho, space):
        return [(1.0, rho)]

    _global = _local


class NormalizedLuders(Luders):
    name = "normalized-luders"

    def _local(self, outcome, rho, space):
        ((w, m),) = super()._local(outcome, rho, space)
        t = np.trace(m).real
        return [(w, m / t if t > 1e-12 else m)]


class Negative(Luders):
    name = "negative"

    def _local(self, outcome, rho, space):
        ((w, m),) = super()._local(outcome, rho, space)
        return [(w, m - 0.1 * np.eye(len(m)))]

    def _global(self, outcome, rho, space):
        return self._local(outcome, rho, space)


def verdict(rule, check, cfg=FAST):
    return run_check(rule, check, cfg)


def test_config_invariants():
    with pytest.raises(ValueError):
        CheckConfig(trials=0)
    with pytest.raises(ValueError):
        CheckConfig(tol=0)
    cfg = CheckConfig(dims=[[2, 2], 3])
    assert [s.dims for s in cfg.dims] == [(2, 2), (3,)]
    assert [s.dims for s in cfg.composite_spaces] == [(2, 2)]


def test_unknown_check():
    with pytest.raises(KeyError):
        run_check("luders", "nosuch")


@pytest.mark.parametrize(
    "rule,check,expected",
    [
        ("luders", "born", HOLDS),
        ("passive", "born", HOLDS),
        (Untouched(), "born", VIOLATED),
        ("lambda:0.5", "homogeneity", HOLDS),
        ("luders", "homogeneity", HOLDS),
        (NormalizedLuders(), "homogeneity", VIOLATED),
        ("luders", "A1", HOLDS),
        ("dep", "A1", HOLDS),
        (Negative(), "A1", VIOLATED),
        ("von-neumann", "A2", VIOLATED),
        ("luders", "A2", HOLDS),
        ("mu:0.5", "A2", HOLDS),
        ("unitary-kick", "A3", VIOLATED),
        ("luders", "A3", HOLDS),
        ("passive", "A3", HOLDS),
        ("luders", "A4", HOLDS),
        ("loc-luders", "A4", HOLDS),
        ("cc-dep", "A4", HOLDS),
        ("cc-dep", "A5", VIOLATED),
        ("luders", "A5", HOLDS),
        ("loc-luders", "A5", HOLDS),
        ("mu:0.5", "A6", VIOLATED),
        ("luders", "A6", HOLDS),
        ("cc-lambda:0.5", "A6", VIOLATED),
        ("luders", "det_repeatability", HOLDS),
        ("passive", "det_repeatability", VIOLATED),
        ("lambda:0.5", "det_repeatability", VIOLATED),
        ("lambda:0.25", "weak_repeatability", HOLDS),
        ("passive", "weak_repeatability", VIOLATED),
        ("dep", "weak_repeatability", VIOLATED),
        ("passive", "prep_indistinguishability", VIOLATED),
        ("luders", "prep_indistinguishability", HOLDS),
        ("dep", "prep_indistinguishability", HOLDS),
        ("dep", "composition_compatibility", VIOLATED),
        ("passive", "composition_compatibility", HOLDS),
        ("loc-luders", "composition_compatibility", VIOLATED),
        ("passive", "ideality", HOLDS),
        ("dep", "ideality", VIOLATED),
        ("luders", "local_tomography", HOLDS),
        ("loc-luders", "local_tomography", VIOLATED),
        ("dep", "local_tomography", HOLDS),
        ("luders", "coherence", HOLDS),
        ("passive", "coherence", VIOLATED),
        ("loc-luders", "coherence", HOLDS),
        ("luders", "nonlocality", HOLDS),
        ("loc-luders", "nonlocality", VIOLATED),
        ("dep", "nonlocality", HOLDS),
        ("luders", "complete_positivity", HOLDS),
        ("passive", "complete_positivity", VIOLATED),
        ("dep", "complete_positivity", HOLDS),
    ],
)
def test_check_verdicts(rule, check, expected):
    res = verdict(rule, check)
    assert res.verdict == expected
    if expected == VIOLATED:
        assert res.witness is not None
        if res.detail.get("reason") != "repeat probability never strictly greater":
            assert res.witness.distance > res.tol


def test_a2_witness_is_refinement_pair():
    res = verdict("von-neumann", "A2")
    w = res.witness
    assert w.kind == "context"
    assert la.close(w.lhs, np.eye(2) / 2) and la.close(w.rhs, proj(PLUS))


def test_a5_signalling_example():
    outs = [Outcome(P0, 0), Outcome(P1, 0)]
    w = evaluate("no_signalling", get_rule("cc-dep"), {"outcomes": outs, "state": vec_state([2, 2], [1, 0, 0, 0])})
    assert la.close(w.lhs, np.eye(2) / 2) and la.close(w.rhs, P0)


def test_a6_mu_example():
    inputs = {"first": Outcome(P0, 0), "second": Outcome(P1, 1), "state": vec_state([2, 2], PHI)}
    w = evaluate("local_commutativity", get_rule("mu:0.5"), inputs)
    assert la.close(w.lhs, (0.5 * proj([0, 0, 0, 1]) + 0.5 * proj(PHI)) / 8)
    assert la.close(w.rhs, (0.5 * proj([1, 0, 0, 0]) + 0.5 * proj(PHI)) / 8)


def test_a6_cc_depolarising_is_order_dependent():
    # sub-normalized comparison: Tr(Q_A rho) Tr(Q_B)/D vs Tr(Q_B rho) Tr(Q_A)/D
    inputs = {"first": Outcome(P0, 0), "second": Outcome(P1, 1), "state": vec_state([2, 2], [1, 0, 0, 0])}
    w = evaluate("local_commutativity", get_rule("cc-dep"), inputs)
    assert la.close(w.lhs, np.eye(4) / 8) and la.close(w.rhs, np.zeros((4, 4)))


def test_det_repeatability_passive_example():
    w = evaluate("det_repeatability", get_rule("passive"), {"outcome": Outcome(P0, 0), "state": vec_state([2], PLUS)})
    assert w.lhs[0, 0].real / w.rhs[0, 0].real == pytest.approx(0.5)


def test_weak_repeatability_dep_example():
    w = evaluate("weak_repeatability", get_rule("dep"), {"outcome": Outcome(P0, 0), "state": vec_state([2], [1, 0])})
    assert w.lhs[0, 0].real == pytest.approx(0.5) and w.rhs[0, 0].real == pytest.approx(1.0)


def test_weak_repeatability_passive_has_no_strict_gain():
    res = verdict("passive", "weak_repeatability")
    assert res.verdict == VIOLATED
    assert res.detail["reason"] == "repeat probability never strictly greater"
    assert res.witness.distance <= res.tol  # equality: dominance holds but never strictly


def test_prep_witness_is_the_basis_pair():
    res = verdict("passive", "prep_indistinguishability")
    assert la.close(res.witness.lhs, 0.5 * P0) and la.close(res.witness.rhs, np.eye(2) / 4)


def test_composition_compatibility_dep_example():
    w = evaluate("composition_compatibility", get_rule("dep"),
                 {"outcome": Outcome(P0, 0), "state": vec_state([2, 2], [1, 0, 0, 0])})
    # first block of the matched view is the summed density
    assert la.close(w.lhs[:4, :4], np.kron(np.eye(2) / 2, P0))
    assert la.close(w.rhs[:4, :4], np.eye(4) / 4)


@pytest.mark.parametrize("rule", ["loc-luders", "lambda:0.25"])
def test_single_system_only_ideality(rule):
    res = verdict(rule, "ideality")
    assert res.holds and res.scope == SINGLE and res.restricted
    assert res.witness.distance > res.tol


def test_ideality_holds_everywhere_for_passive():
    res = verdict("passive", "ideality")
    assert res.holds and res.scope == BOTH and not res.restricted


def test_coherence_passive_example():
    inputs = {"fine": Outcome(P0, 0), "coarse": Outcome(P0, 0), "state": vec_state([2], PLUS)}
    w = evaluate("coherence", get_rule("passive"), inputs)
    assert w.lhs[0, 0].real == pytest.approx(0.25) and w.rhs[0, 0].real == pytest.approx(0.5)


def test_nested_outcomes_are_nested():
    rng = np.random.default_rng(0)
    for d in (2, 3, 4):
        fine, coarse = checks.nested_outcomes(d, rng)
        assert la.close(fine.projector @ coarse.projector, fine.projector)
        assert la.close(coarse.projector @ fine.projector, fine.projector)


def test_order_dependent_rules_are_not_applicable():
    assert verdict("mu:0.5", "local_tomography").verdict == NOT_APPLICABLE
    res = verdict("mu:0.5", "nonlocality")
    assert res.verdict == NOT_APPLICABLE and len(res.detail["chsh"]) == 2


def test_chsh_values():
    assert checks.chsh_value(get_rule("luders")) == pytest.approx(2 * math.sqrt(2), abs=1e-9)
    res = verdict("luders", "nonlocality")
    assert res.detail["chsh"] == pytest.approx(2 * math.sqrt(2))


def test_complete_positivity_stages():
    assert verdict("passive", "complete_positivity").detail["stage"] == "linearity"
    res = verdict("luders", "complete_positivity")
    assert res.holds and res.trials_run == 2 * FAST.trials


def test_linear_extension_reproduces_luders_choi():
    space = CompositeSpace([2, 2])
    q = la.embed_local(P0, [2, 2], 1)
    ext = checks.linear_extension(get_rule("luders"), Outcome(P0, 1), space)
    assert la.close(la.choi_matrix(ext, 4), la.choi_matrix(lambda m: q @ m @ q, 4))


def test_matched_blocks_ignore_item_order():
    a = QuantumState([2], P0)
    b = QuantumState([2], P1)
    lhs, rhs = checks.matched_blocks(Gemenge([(0.3, a), (0.7, b)]), Gemenge([(0.7, b), (0.3, a)]))
    assert la.dist(lhs, rhs) == 0
    lhs, rhs = checks.matched_blocks(Gemenge([(0.5, a), (0.5, b)]), Gemenge.of(QuantumState([2], np.eye(2) / 2)))
    assert la.close(lhs[:2, :2], rhs[:2, :2]) and la.dist(lhs, rhs) > 0.1


def test_run_all_luders_all_hold():
    assert all(r.holds and not r.restricted for r in run_all("luders", FAST))


def test_run_all_cc_depolarising_profile():
    got = {r.check: r.verdict for r in run_all("cc-dep", FAST, list(checks.ASSUMPTION_CHECKS))}
    assert got["A5"] == VIOLATED
    assert all(got[c] == HOLDS for c in ("born", "homogeneity", "A1", "A2", "A3", "A4"))


def test_run_all_unitary_kick_profile():
    got = {r.check: r.verdict for r in run_all("unitary-kick", FAST, list(checks.ASSUMPTION_CHECKS))}
    assert got.pop("A3") == VIOLATED
    assert set(got.values()) == {HOLDS}


def test_runs_are_deterministic():
    a = [r.to_dict() for r in run_all("lambda:0.25", FAST)]
    b = [r.to_dict() for r in run_all("lambda:0.25", FAST)]
    assert json.dumps(a) == json.dumps(b)


def test_seed_changes_samples():
    a = run_check("passive", "A6", CheckConfig(trials=3, seed=1))
    b = run_check("passive", "A6", CheckConfig(trials=3, seed=2))
    assert a.holds and b.holds
    ra, rb = checks.trial_rng(CheckConfig(seed=1), "A6", 0), checks.trial_rng(CheckConfig(seed=2), "A6", 0)
    assert ra.random() != rb.random()


@pytest.mark.parametrize("rule,check", [("von-neumann", "A2"), ("unitary-kick", "A3"), ("loc-luders", "ideality"),
                                        ("passive", "complete_positivity"), ("lambda:0.25", "prep_indistinguishability")])
def test_witness_replays_from_json(rule, check):
    res = verdict(rule, check)
    payload = json.loads(json.dumps(res.to_dict()))
    back = CheckResult.from_dict(payload)
    assert back.verdict == res.verdict and back.scope == res.scope
    assert abs(replay_witness(rule, payload["witness"]) - res.witness.distance) <= 1e-10
