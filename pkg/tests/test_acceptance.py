"""Acceptance criteria, one test each.

A PASS/FAIL line per criterion is printed in the "acceptance criteria"
section of the pytest summary.
"""

import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from gur import checks, experiments
from gur import linalg as la
from gur.checks import CheckConfig, replay_witness, run_all
from gur.results import VIOLATED
from gur.rules import INVALID_RULES, VALID_RULES, get_rule
from gur.states import Outcome, QuantumState

TOL = 1e-9
TSIRELSON = 2 * math.sqrt(2)


def gur(*args):
    start = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "gur.cli", *args], capture_output=True, text=True)
    return proc, time.perf_counter() - start


@pytest.fixture(scope="module")
def table1_runs():
    return [gur("table", "1", "--seed", "42", "--format", "json") for _ in range(2)]


def _cells_match(proc, table):
    report = json.loads(proc.stdout)
    golden = experiments.load_golden(table)
    got = {(r, c): report["cells"][r][c]["glyph"] for r in golden["rows"] for c in golden["columns"]}
    want = {(r, c): golden["cells"][r][c] for r in golden["rows"] for c in golden["columns"]}
    return {k: (want[k], got[k]) for k in want if want[k] != got[k]}, len(want)


def test_criterion_1_table1(record_property, table1_runs):
    record_property("criterion", "1. `gur table 1`: all 45 cells match the golden matrix, tol 1e-9, < 60 s")
    proc, elapsed = table1_runs[0]
    diff, n = _cells_match(proc, 1)
    assert n == 45
    assert diff == {}, diff
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["metadata"]["tol"] == TOL
    assert elapsed < 60


def test_criterion_2_table2(record_property):
    record_property("criterion", "2. `gur table 2`: all 30 cells match the golden matrix, < 60 s")
    proc, elapsed = gur("table", "2", "--format", "json")
    diff, n = _cells_match(proc, 2)
    assert n == 30
    assert elapsed < 60
    assert diff == {}, f"cells differing from golden (expected, got): {diff}"
    assert proc.returncode == 0, proc.stderr


def test_criterion_3_counterexamples(record_property):
    record_property("criterion", "3. dep-cc, passive-gemenge and mu-ordering reproduce their matrices to 1e-9")
    half = np.eye(2) / 2
    p0 = np.diag([1.0, 0.0])
    phi = np.array([1, 0, 0, 1]) / math.sqrt(2)
    k00, k11 = np.diag([1.0, 0, 0, 0]), np.diag([0, 0, 0, 1.0])
    mu = 0.5
    expected = {
        "dep-cc": (np.kron(half, p0), np.kron(half, half)),
        "passive-gemenge": (0.5 * p0, np.eye(2) / 4),
        "mu-ordering": (mu / 4 * ((1 - mu) * k11 + mu * np.outer(phi, phi)),
                        mu / 4 * ((1 - mu) * k00 + mu * np.outer(phi, phi))),
    }
    for name, (lhs, rhs) in expected.items():
        rec = experiments.counterexample(name, mu=mu)
        assert la.dist(rec.computed[0], lhs) <= TOL, name
        assert la.dist(rec.computed[1], rhs) <= TOL, name


def test_criterion_4_theorems(record_property):
    record_property("criterion", "4. uniqueness checks hold over the catalog; Lüders coherent over 1000 trials at d=2,3,4")
    cfg = CheckConfig()
    assert experiments.verify_lemma1(cfg).holds
    t1 = experiments.verify_theorem1(cfg, luders_trials=1000)
    assert t1.holds
    assert all(v == {"verdict": "holds", "trials": 1000} for v in t1.detail["luders"].values())
    assert set(t1.detail["luders"]) == {"2", "3", "4"}
    for name, status in t1.detail["rules"].items():
        expected = "equals-luders" if name in ("loc-luders", "lambda:0.0") else "witness"
        assert status == expected, name
    assert experiments.verify_theorem2(cfg).holds


def test_criterion_5_chsh(record_property):
    record_property("criterion", "5. CHSH: luders and dep at 2*sqrt(2) +- 1e-6; loc-luders and passive <= 2 + 1e-9")
    assert abs(experiments.chsh("luders") - TSIRELSON) <= 1e-6
    assert abs(experiments.chsh("dep") - TSIRELSON) <= 1e-6
    assert experiments.chsh("loc-luders") <= 2 + 1e-9
    assert experiments.chsh("passive") <= 2 + 1e-9


def test_criterion_6_born_and_homogeneity(record_property):
    record_property("criterion", "6. valid rules pass Born consistency and 1-homogeneity, 200 trials, 3 spaces")
    cfg = CheckConfig(trials=200, dims=[[2, 2], [2, 3], [2, 2, 2]], tol=TOL, single_dims=())
    for name in VALID_RULES:
        for check in ("born", "homogeneity"):
            res = checks.run_check(name, check, cfg)
            assert res.holds and res.trials_run == 200, (name, check)


def test_criterion_7_lambda_endpoints(record_property):
    record_property("criterion", "7. lambda=0 equals loc-luders; lambda=1 equals passive on single systems (100 inputs)")
    rng = np.random.default_rng(2024)
    zero, one = get_rule("lambda:0"), get_rule("lambda:1")
    locl, passive = get_rule("loc-luders"), get_rule("passive")
    spaces = [[2, 2], [2, 3], [2, 2, 2]]
    for i in range(100):
        dims = spaces[i % 3]
        total = int(np.prod(dims))
        rho = QuantumState(dims, la.random_density(total, int(rng.integers(1, total + 1)), rng))
        k = int(rng.integers(len(dims)))
        local = Outcome(la.random_projector(dims[k], int(rng.integers(1, dims[k] + 1)), rng), k)
        assert la.dist(zero(local, rho).density().matrix, locl(local, rho).density().matrix) <= TOL
        d = int(rng.integers(2, 5))
        sigma = QuantumState([d], la.random_density(d, int(rng.integers(1, d + 1)), rng))
        o = Outcome(la.random_projector(d, int(rng.integers(1, d + 1)), rng), 0)
        assert la.dist(one(o, sigma).density().matrix, passive(o, sigma).density().matrix) <= TOL


def test_criterion_8_witness_replay(record_property):
    record_property("criterion", "8. every violated witness replays from its serialized form within 1e-10")
    cfg = CheckConfig()
    replayed = 0
    for name in VALID_RULES + INVALID_RULES:
        for res in run_all(name, cfg):
            if res.witness is None:
                continue
            payload = json.loads(json.dumps(res.to_dict()))
            assert abs(replay_witness(name, payload["witness"]) - res.witness.distance) <= 1e-10, (name, res.check)
            replayed += res.verdict == VIOLATED
    assert replayed > 30


def test_criterion_9_determinism(record_property, table1_runs):
    record_property("criterion", "9. two runs of `gur table 1 --seed 42 --format json` are byte-identical")
    (a, _), (b, _) = table1_runs
    assert a.stdout and a.stdout == b.stdout
