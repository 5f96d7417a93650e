"""The ten acceptance criteria, each run with exact equality and a time bound.

Run directly (``python tests/test_acceptance.py``) or under pytest; either way
one PASS/FAIL line is printed per criterion.
"""

import sys
import time

import pytest

from artifact.harness import SuiteConfig, run_suite

try:
    from conftest import ACCEPTANCE
except ImportError:  # imported outside the tests directory
    ACCEPTANCE = {}


def _runs(*configs):
    reports = []
    for cfg in configs:
        reports.append(run_suite(cfg))
    return reports


def _count(reports, key):
    return sum(1 for r in reports for t in r.trials if t.info.get(key))


def _criterion(number, title, budget_s, body):
    start = time.perf_counter()
    problems = []
    try:
        problems = body()
    except Exception as exc:  # reported as a failing criterion, then re-raised by the test
        problems = [f"{type(exc).__name__}: {exc}"]
    elapsed = time.perf_counter() - start
    if elapsed > budget_s:
        problems.append(f"took {elapsed:.1f}s, budget {budget_s}s")
    verdict = "PASS" if not problems else "FAIL"
    line = f"[{verdict}] criterion {number:2d} {title} ({elapsed:.1f}s)"
    if problems:
        line += ": " + "; ".join(problems)
    ACCEPTANCE[number] = line
    print(line, flush=True)
    return problems


def _failures(reports):
    out = []
    for r in reports:
        bad = r.first_failure()
        if bad is not None:
            out.append(f"{r.suite} seed {bad.seed}: {bad.counterexample}")
    return out


def c1():
    reports = _runs(
        SuiteConfig("GT_AXIOMS", surface="torus", trials=25, max_length=5),
        SuiteConfig("GT_AXIOMS", surface="pants", trials=25, max_length=5),
    )
    problems = _failures(reports)
    if _count(reports, "cobracket_nonzero") == 0:
        problems.append("no self-intersecting loop sampled")
    return problems


def c2():
    reports = _runs(
        SuiteConfig("REALIZATION", surface="torus", trials=10),
        SuiteConfig("REALIZATION", surface="pants", trials=10),
        SuiteConfig("REALIZATION", surface="genus2", trials=5),
    )
    return _failures(reports)


def c3():
    reports = _runs(
        SuiteConfig("GOLDMAN_EVEN", surface="torus", n=2, trials=10),
        SuiteConfig("GOLDMAN_EVEN", surface="genus2", n=2, trials=5),
    )
    problems = _failures(reports)
    if _count(reports, "nonzero") < 10:
        problems.append("fewer than 10 trials with a nonzero bracket")
    return problems


def c4():
    reports = _runs(
        SuiteConfig("FR_INVARIANCE", surface="torus", n=2, trials=10),
        SuiteConfig("FR_INVARIANCE", surface="pants", n=2, trials=5),
        SuiteConfig("FR_QUASI", surface="torus", n=2, trials=10),
    )
    problems = _failures(reports)
    if _count(reports[2:], "nonzero") == 0:
        problems.append("jacobiator vanished on every triple")
    return problems


def c5():
    reports = _runs(
        SuiteConfig("BV_INVARIANCE", surface="torus", group="q", n=1, trials=10),
        SuiteConfig("BV_INVARIANCE", surface="torus", group="q", n=2, trials=4),
        SuiteConfig("BV_INVARIANCE", surface="torus", group="double", trials=10),
        SuiteConfig("BV_SQUARE", surface="annulus2", group="q", n=2, trials=10),
    )
    problems = _failures(reports)
    if _count(reports[2:3], "nonzero") == 0:
        problems.append("rotation term never exercised")
    if _count(reports[3:], "nonzero") == 0:
        problems.append("Δ² vanished on every function")
    return problems


def c6():
    reports = _runs(
        SuiteConfig("GEOMETRIC_BV", surface="torus", group="q", n=1, trials=10),
        SuiteConfig("GEOMETRIC_BV", surface="pants", group="q", n=1, trials=10),
        SuiteConfig("GEOMETRIC_BV", surface="torus", group="double", trials=10),
    )
    problems = _failures(reports)
    if _count(reports, "boundary") == 0:
        problems.append("no boundary intersection")
    if _count(reports, "rii") == 0:
        problems.append("no Reidemeister II inflation")
    return problems


def c7():
    reports = _runs(
        *[
            SuiteConfig("ODD_GOLDMAN", surface=s, group="q", n=n, trials=10, max_length=5)
            for s in ("torus", "pants")
            for n in (1, 2)
        ]
    )
    problems = _failures(reports)
    for r in reports:
        if not any(t.info.get("self_intersection") for t in r.trials):
            problems.append(f"{r.suite}: no self-intersecting trial")
        if not any(t.info.get("mutual_intersection") for t in r.trials):
            problems.append(f"{r.suite}: no mutually intersecting trial")
    return problems


def c8():
    reports = _runs(
        SuiteConfig("ODD_GOLDMAN_EXT", surface="torus", group="q", n=1, trials=6),
        SuiteConfig("ODD_GOLDMAN_EXT", surface="torus", group="q", n=2, trials=6),
        SuiteConfig("ODD_GOLDMAN_EXT", surface="genus2", group="q", n=1, trials=6),
    )
    problems = _failures(reports)
    for r in reports:
        if {t.info.get("case") for t in r.trials} != {"self", "pair", "mixed"}:
            problems.append("not all three cases exercised")
    return problems


def c9():
    return _failures(_runs(SuiteConfig("ALGEBRA_IDS", trials=15)))


def c10():
    reports = _runs(SuiteConfig("FUSION", trials=10))
    problems = _failures(reports)
    if not any(v for t in reports[0].trials for v in t.info.values()):
        problems.append("fusion terms vanished everywhere")
    return problems


CRITERIA = [
    (1, "GT_AXIOMS", 120, c1),
    (2, "realization and skeleton independence", 120, c2),
    (3, "GOLDMAN_EVEN", 120, c3),
    (4, "FR_INVARIANCE + FR_QUASI", 180, c4),
    (5, "BV_INVARIANCE + BV_SQUARE", 300, c5),
    (6, "GEOMETRIC_BV", 300, c6),
    (7, "ODD_GOLDMAN", 600, c7),
    (8, "ODD_GOLDMAN_EXT", 300, c8),
    (9, "ALGEBRA_IDS", 60, c9),
    (10, "FUSION", 60, c10),
]


@pytest.mark.parametrize("number,title,budget,body", CRITERIA, ids=[f"criterion{c[0]}" for c in CRITERIA])
def test_criterion(number, title, budget, body):
    problems = _criterion(number, title, budget, body)
    assert not problems, problems


if __name__ == "__main__":
    results = [_criterion(*c) for c in CRITERIA]
    sys.exit(1 if any(results) else 0)
