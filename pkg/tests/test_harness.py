import json
import random

import pytest

import artifact.loops as loops_mod
from artifact.errors import UnknownSuite
from artifact.harness import (
    SUITES,
    SuiteConfig,
    check_discardy,
    check_matrix_units,
    check_metric_tensors,
    phi_even,
    phi_odd,
    random_loop,
    random_path,
    run_suite,
)
from artifact.loops import CIRCLE, HBasis, canonicalize, is_proper_power, single, wedge_sum
from artifact.modulispace import GLGroup, Inv, QGroup, random_point
from artifact.superalgebra import Grassmann, build_qn, odd_double, aff1
from artifact.surface import Skeleton, builtin

T = builtin("torus")


def test_phi_even_examples():
    pt = random_point(T, GLGroup(2), 0)
    assert phi_even(single(CIRCLE), 2, T)(pt) == Grassmann.scalar(2)
    a = canonicalize("a", T)
    (coeff, f), = phi_even(single(a), 2, T).terms
    assert coeff == 1 and f.atoms == (Inv("tr", a.letters),)
    (_, g), = phi_even(single(HBasis(0)), 2, T).terms
    assert g.atoms[0].fn == "logdet"


def test_phi_odd_examples():
    pt = random_point(T, QGroup(1), 0)
    a = single(canonicalize("a b", T))
    (coeff, f), = phi_odd(a, T).terms
    assert f.atoms[0].fn == "otr"
    assert phi_odd(wedge_sum(a, a), T)(pt).is_zero()
    # the trivial loop has zero odd trace
    assert phi_odd(single(CIRCLE), T)(pt).is_zero()
    (_, g), = phi_odd(single(HBasis(1)), T).terms
    assert g.atoms[0].fn == "odet"


def test_samplers_respect_constraints():
    rng = random.Random(1)
    for sk in (T, builtin("annulus2"), builtin("genus2")):
        for _ in range(30):
            w = random_path(sk, rng, 5)
            sk.check_path(w)
            assert 1 <= len(w) <= 5
    for _ in range(50):
        c = random_loop(T, rng, 5)
        assert not c.is_trivial() and not is_proper_power(c) and len(c.letters) <= 5


def test_unknown_suite():
    with pytest.raises(UnknownSuite):
        run_suite(SuiteConfig("NO_SUCH_SUITE"))
    with pytest.raises(ValueError):
        SuiteConfig("GT_AXIOMS", trials=0)


def test_report_json_shape_and_determinism():
    r1 = run_suite(SuiteConfig("GT_AXIOMS", trials=3, seed=7))
    r2 = run_suite(SuiteConfig("GT_AXIOMS", trials=3, seed=7))
    data = json.loads(r1.dumps())
    assert set(data) == {"suite", "trials", "elapsed_ms"}
    assert [t["seed"] for t in data["trials"]] == [7, 8, 9]
    assert all(t["verdict"] == "PASS" and t["counterexample"] is None for t in data["trials"])
    assert [t.to_json() for t in r1.trials] == [t.to_json() for t in r2.trials]


def test_every_suite_runs_one_trial():
    for name in SUITES:
        if name in ("ALGEBRA_IDS", "BV_SQUARE"):
            continue
        assert run_suite(SuiteConfig(name, trials=1, seed=3)).passed, name


def test_algebra_checks():
    for n in (1, 2):
        assert check_discardy(build_qn(n))
        assert not check_metric_tensors(build_qn(n))
    assert not check_metric_tensors(odd_double(aff1()))
    assert check_matrix_units(3, [[1, 2, 0], [0, -1, 5], [7, 0, 3]])


def test_discardy_detects_a_broken_unit():
    q = build_qn(2)
    broken = build_qn(2)
    broken.unit = [2 * u for u in q.unit]
    assert not check_discardy(broken)


def test_flipped_crossing_sign_fails_goldman_even(monkeypatch):
    # exactly one of the two candidate sign rules is consistent with the bracket of traces
    assert run_suite(SuiteConfig("GOLDMAN_EVEN", trials=4)).passed
    original = loops_mod._chord_sign
    monkeypatch.setattr(loops_mod, "_chord_sign", lambda *a: -original(*a))
    report = run_suite(SuiteConfig("GOLDMAN_EVEN", trials=4))
    assert not report.passed
    fail = report.first_failure()
    assert fail.counterexample["seed"] == fail.seed


def test_wrong_half_turn_breaks_bv_invariance(monkeypatch):
    cfg = SuiteConfig("BV_INVARIANCE", group="double", trials=6)
    assert run_suite(cfg).passed
    original = Skeleton.passage_turn2
    monkeypatch.setattr(Skeleton, "passage_turn2", lambda self, a, d: -original(self, a, d))
    assert not run_suite(cfg).passed
