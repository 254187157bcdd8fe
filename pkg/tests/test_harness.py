import json
import math

import numpy as np
import pytest

import oracles
from conftest import line_system, sierpinski
from fhutch.compact import PointSet
from fhutch.errors import InputError
from fhutch.harness import (
    box_dimension,
    case_seed,
    decimation_error,
    lemma14_checks,
    lemma15_checks,
    run_convergence_suite,
    run_corollary_certificates,
    run_lemma14_suite,
    run_lemma15_case,
    run_lemma15_suite,
    run_lifted_contraction_suite,
    run_pointwise_certificates,
    run_set_level_certificate,
    undecimated_trace,
)
from fhutch.hutchinson import iterate
from fhutch.metric import abs_diff, euclidean, snowflake

METRICS = [euclidean(), abs_diff(), snowflake(2), snowflake(2, abs_diff()), snowflake(3)]


@pytest.mark.parametrize("m", METRICS, ids=lambda m: m.label())
def test_lemma_suites_clean(m):
    assert run_lemma14_suite(m, cases=150).passed
    assert run_lemma15_suite(m, cases=150).passed


def test_chain_with_b_four_weights():
    rep = run_lemma15_suite(snowflake(3), cases=200, chain_len=6)
    assert rep.passed


def test_wrong_b_is_detected():
    rep = run_lemma15_suite(snowflake(2, b=1.0), cases=200)
    assert not rep.passed
    assert any("(3)" in f.detail or "(9)" in f.detail for f in rep.failures)


def test_failures_replay_from_their_seed():
    m = snowflake(2, b=1.0)
    rep = run_lemma15_suite(m, cases=100)
    f = rep.failures[0]
    assert f.seed == case_seed(0xF1A7, f.case)
    replay = run_lemma15_case(m, f.seed)
    assert (f.detail, f.lhs, f.rhs) in [(d, lhs, rhs) for d, lhs, rhs, _ in replay]


def test_suites_are_deterministic():
    a = run_lemma14_suite(euclidean(), cases=30, seed=9).to_json()
    b = run_lemma14_suite(euclidean(), cases=30, seed=9).to_json()
    a.pop("ms"), b.pop("ms")
    assert a == b


def test_degenerate_quadruple():
    A = PointSet([[1.0, 2.0]])
    assert lemma14_checks(euclidean(), A, A, A, A) == []


def test_singleton_lemma15():
    A = PointSet([[0.5]])
    assert lemma15_checks(abs_diff(), A, A, [0.5], [0.5], [1.0], [[0.0], [1.0]]) == []


def test_lemma15_flags_member_passed_as_outside():
    A = PointSet([[0.5]])
    out = lemma15_checks(abs_diff(), A, A, [0.5], [0.5], [0.5], [[0.0], [1.0]])
    assert [o[0] for o in out] == ["(8) d(x,A) > 0 for x not in A"]


def test_lemma14_union_bound_matches_oracle():
    rng = np.random.default_rng(1)
    sets = [rng.uniform(-1, 1, size=(rng.integers(1, 8), 2)) for _ in range(4)]
    A, B, C, D = ({tuple(p) for p in s} for s in sets)
    lhs = oracles.hausdorff(A | B, C | D)
    assert lhs <= max(oracles.hausdorff(A, C), oracles.hausdorff(B, D)) + 1e-12
    assert lemma14_checks(euclidean(), *(PointSet(s) for s in sets)) == []


def test_report_json_shape():
    doc = run_lemma14_suite(snowflake(2, b=1.0), cases=40).to_json()
    json.dumps(doc)
    assert {"suite", "cases", "failures", "ms"} <= set(doc)
    for f in doc["failures"]:
        assert {"seed", "detail", "lhs", "rhs", "slack"} <= set(f)
    cases = [f["case"] for f in doc["failures"]]
    assert cases == sorted(cases)


# ---- lifted contraction ------------------------------------------------------------


def test_lifted_clean_on_sierpinski():
    rep = run_lifted_contraction_suite(sierpinski(), cases=100)
    assert rep.passed and rep.cases == 100


def test_lifted_precheck_aborts_on_expansive_map():
    S = line_system((0.5, 0.0), (2.0, 0.0), tau=0.1)
    rep = run_lifted_contraction_suite(S, cases=50)
    assert rep.notes.get("aborted") and len(rep.failures) == 1
    assert "map 1" in rep.failures[0].detail


def test_lifted_without_precheck_lists_witnesses():
    S = line_system((2.0, 0.0), tau=0.1)
    rep = run_lifted_contraction_suite(S, cases=30, precheck=False)
    assert not rep.passed
    assert any("H(f(A),f(B)) < H(A,B)" in f.detail for f in rep.failures)


def test_lifted_detects_nonpositive_tau():
    S = line_system((0.5, 0.0), tau=-0.5)
    rep = run_lifted_contraction_suite(S, cases=20, precheck=False)
    assert any("tau(H(A,B)) > 0" in f.detail for f in rep.failures)


# ---- convergence ---------------------------------------------------------------------------


def test_convergence_line_map_two_seeds():
    S = line_system((0.5, 0.25))
    rep = run_convergence_suite(S, [PointSet([[0.0]]), PointSet([[10.0]])], tol=1e-9, cell=None)
    assert rep.passed and rep.notes["attractor_sizes"] == [1, 1]


def test_convergence_from_attractor_is_immediate():
    S = sierpinski()
    cell = 2.0**-6
    res, _ = iterate(S, PointSet([[0, 0]]), 2 * cell, 30, cell)
    rep = run_convergence_suite(S, [res.attractor], 2 * cell, cell)
    assert rep.passed and rep.notes["iterations"] == [0]


def test_convergence_reports_divergence():
    S = line_system((2.0, 1.0), tau=0.1)
    rep = run_convergence_suite(S, [PointSet([[0.0]])], tol=1e-6, cell=None, max_iter=10)
    assert not rep.passed and "stopped as" in rep.failures[0].detail


def test_undecimated_trace_is_monotone():
    hs = undecimated_trace(sierpinski(), PointSet([[0, 0]]), 8)
    assert len(hs) == 8 and np.all(np.diff(hs) <= 1e-9)


def test_decimation_error_in_metric_units():
    assert decimation_error(euclidean(), 0.1, 2) == pytest.approx(0.1 * math.sqrt(2))
    assert decimation_error(snowflake(2), 0.1, 2) == pytest.approx(0.02)
    assert decimation_error(euclidean(), None, 2) == 0.0


# ---- certificate suites ------------------------------------------------------------------


def test_certificate_suites_on_sierpinski():
    S = sierpinski()
    assert run_pointwise_certificates(S, count=2000).passed
    assert run_set_level_certificate(S, PointSet([[0, 0]]), steps=5).passed
    for form in ("cor-2.5", "cor-2.6", "cor-2.7"):
        assert run_corollary_certificates(form, S, count=2000, require_agreement=True).passed


def test_certificate_suites_catch_expansive_map():
    S = line_system((2.0, 0.0), tau=0.1)
    assert not run_pointwise_certificates(S, count=100).passed
    rep = run_corollary_certificates("cor-2.5", S, count=100)
    assert not rep.passed and rep.notes["certificates"][0]["violations"] == 100


# ---- box counting --------------------------------------------------------------------------


def test_box_dimension_singleton_is_zero():
    est = box_dimension(PointSet([[0.3, 0.3]]), [0.5, 0.25, 0.125, 0.0625])
    assert est.slope == 0.0 and est.extra_paper


def test_box_dimension_of_dense_square():
    g = (np.arange(512) + 0.5) / 512
    A = PointSet(np.array(np.meshgrid(g, g)).reshape(2, -1).T)
    est = box_dimension(A, [2.0**-k for k in range(2, 8)])
    assert est.slope == pytest.approx(2.0, abs=0.1)


def test_box_counts_match_oracle():
    rng = np.random.default_rng(0)
    A = PointSet(rng.uniform(0, 1, size=(300, 2)))
    scales = [0.5, 0.2, 0.1, 0.05]
    est = box_dimension(A, scales)
    assert est.counts == [oracles.box_count(list(A), s) for s in sorted(scales)]


@pytest.mark.parametrize("scales", [[0.1, 0.05], [0.1, 0.09, 0.08], [0.1, 0.0, 0.01], [0.4, 0.2, 0.2, 0.1]])
def test_box_dimension_rejects_bad_scales(scales):
    with pytest.raises(InputError):
        box_dimension(PointSet([[0.0, 0.0]]), scales)
