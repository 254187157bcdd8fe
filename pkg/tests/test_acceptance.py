"""Acceptance gate: nine criteria, one PASS/FAIL line each.

Each ``criterion_*`` function returns ``(ok, detail)`` and the matching test
records a line before asserting, so a run shows every verdict even when some
fail. ``python tests/test_acceptance.py`` prints the lines without pytest.
"""

import hashlib
import json
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import oracles  # noqa: E402
from conftest import ACCEPTANCE_LINES, line_system, sierpinski  # noqa: E402
from fhutch import cli  # noqa: E402
from fhutch.certificates import (  # noqa: E402
    COROLLARY_F,
    certify_corollary_form,
    certify_pointwise,
    certify_set_level,
    trajectory_pairs,
)
from fhutch.compact import PointSet, hausdorff, hausdorff_accelerated, hausdorff_auto  # noqa: E402
from fhutch.harness import box_dimension, random_set, run_lemma14_suite, run_lemma15_suite  # noqa: E402
from fhutch.hutchinson import AffineMap, IfsSystem, iterate  # noqa: E402
from fhutch.metric import (  # noqa: E402
    F_KINDS,
    FGenerator,
    TauGenerator,
    abs_diff,
    check_b_triangle,
    check_F_axioms,
    check_tau_liminf,
    euclidean,
    snowflake,
)

UNIT_DIAG = math.sqrt(2)


def _timed(limit_s, body):
    t0 = time.perf_counter()
    ok, detail = body()
    elapsed = time.perf_counter() - t0
    in_time = limit_s is None or elapsed < limit_s
    budget = f" (limit {limit_s:g} s)" if limit_s else ""
    return ok and in_time, f"{detail}; {elapsed:.2f} s{budget}"


def criterion_1():
    """Snowflake b-triangle on 10^4 triples for p in {1.5, 2, 3}; (0,1,3) breaks b = 1."""
    def body():
        worst = []
        for p in (1.5, 2.0, 3.0):
            for m, dim in ((snowflake(p), 2), (snowflake(p, abs_diff()), 1)):
                rep = check_b_triangle(m, count=10_000, dim=dim)
                if not rep.passed:
                    return False, f"{m.label()} broke b={m.b:g}"
                worst.append(rep.worst_ratio / m.b)
        breaks = not check_b_triangle(snowflake(2, abs_diff(), b=1.0), triples=[[0, 1, 3]]).passed
        return breaks, f"0 violations, worst ratio/b {max(worst):.6f}; (0,1,3) breaks b=1: {breaks}"
    return _timed(1.0, body)


def criterion_2():
    """Grid-accelerated Hausdorff equals brute force within 1e-12."""
    def body():
        rng = np.random.default_rng(0xF1A7)
        worst = 0.0
        for k in range(100):
            dim = 1 + k % 3
            A = random_set(rng, dim, max_size=500)
            B = random_set(rng, dim, max_size=500)
            for m in (euclidean(), snowflake(2)):
                worst = max(worst, abs(hausdorff_accelerated(A, B, m).value - hausdorff(A, B, m).value))
        return worst <= 1e-12, f"100 pairs x 2 metrics, max |accel - brute| = {worst:.3g}"
    return _timed(5.0, body)


def criterion_3():
    """Set-distance lemma suites, 10^3 cases each, for b = 1 and b = 2."""
    def body():
        counts = {}
        for m in (euclidean(), snowflake(2)):
            for run in (run_lemma14_suite, run_lemma15_suite):
                rep = run(m, cases=1000)
                counts[f"{rep.suite}/{m.label()}"] = len(rep.failures)
        return not any(counts.values()), ", ".join(f"{k}: {v} failures" for k, v in counts.items())
    return _timed(10.0, body)


def criterion_4():
    """Trace of x -> x/2 from {1} is 2^-(m+1), strictly decreasing."""
    def body():
        _, trace = iterate(line_system((0.5, 0.0)), PointSet([[1.0]]), tol=1e-300, max_iter=31)
        h = trace.h_values
        want = np.array([2.0 ** -(m + 1) for m in range(31)])
        err = float(np.max(np.abs(h - want)))
        decreasing = bool(np.all(np.diff(h) < 0))
        return err <= 1e-12 and decreasing, f"m = 0..30, max error {err:.3g}, decreasing: {decreasing}"
    return _timed(None, body)


def criterion_5():
    """Sierpinski from two seeds: convergence in 30 steps, uniqueness and residual bounds."""
    def body():
        S = sierpinski()
        cell = 2.0**-10 * UNIT_DIAG
        tol = 2 * cell
        bound = S.b * (2 * tol + 2 * cell * math.sqrt(2))
        seeds = [PointSet([[0, 0]]), PointSet([[0, 0], [1, 0], [0, 1], [1, 1]])]
        results = [iterate(S, A0, tol, max_iter=30, cell=cell)[0] for A0 in seeds]
        conv = all(r.converged for r in results)
        gap = hausdorff_auto(results[0].attractor, results[1].attractor, S.metric).value
        resid = max(r.residual for r in results)
        ok = conv and gap <= bound and resid <= bound
        steps = [r.iterations + 1 for r in results]
        return ok, (f"steps {steps}, H(U1,U2) = {gap:.4g}, max residual {resid:.4g}, bound {bound:.4g}")
    return _timed(30.0, body)


def criterion_6():
    """Pointwise, set-level and closed-form certificates, plus fault injection."""
    def body():
        S = sierpinski()
        pointwise = sum(certify_pointwise(S, i, count=10_000).n_violations for i in range(3))
        traj = trajectory_pairs(S, PointSet([[0, 0]]), 10, cell=2.0**-6 * UNIT_DIAG)
        set_level = certify_set_level(S, traj)
        mismatched = 0
        for form, kind in COROLLARY_F.items():
            for i in range(3):
                closed = certify_corollary_form(form, S, i, count=10_000)
                direct = certify_pointwise(S, i, count=10_000, F=FGenerator(kind))
                mismatched += closed.disagreements + int(np.count_nonzero(closed.outcomes != direct.outcomes))
        bad = IfsSystem(euclidean(), (AffineMap(2 * np.eye(2), [0, 0]),), S.F, S.tau)
        faults = {
            "eq-1.2": certify_pointwise(bad, 0, count=1000).n_violations,
            "eq-1.3": certify_set_level(bad, trajectory_pairs(bad, PointSet([[1, 0], [0, 1]]), 3)).n_violations,
        }
        for form in COROLLARY_F:
            faults[form] = certify_corollary_form(form, bad, 0, count=1000).n_violations
        ok = pointwise == 0 and set_level.passed and set_level.samples == 10 and mismatched == 0 \
            and all(v >= 1 for v in faults.values())
        return ok, (f"pointwise violations {pointwise}, set-level {set_level.n_violations}/{set_level.samples}, "
                    f"closed-form mismatches {mismatched}, fault hits "
                    + ", ".join(f"{k}={v}" for k, v in faults.items()))
    return _timed(10.0, body)


def criterion_7():
    """Built-in F kinds pass F1-F3 with declared h; tau(t) = t fails the liminf check."""
    def body():
        reports = {k: check_F_axioms(FGenerator(k)).passed for k in F_KINDS}
        rejects = not check_tau_liminf(TauGenerator.expression("t"))
        return all(reports.values()) and rejects, f"F axioms {reports}; tau(t)=t rejected: {rejects}"
    return _timed(1.0, body)


def criterion_8():
    """Box-counting diagnostic (extra-paper): Sierpinski ~ log 3 / log 2, square ~ 2."""
    def body():
        cell = 2.0**-10 * UNIT_DIAG
        res, _ = iterate(sierpinski(), PointSet([[0, 0]]), 2 * cell, 30, cell)
        scales = [2.0**-k for k in range(2, 9)]
        tri = box_dimension(res.attractor, scales).slope
        g = (np.arange(1024) + 0.5) / 1024
        square = PointSet(np.array(np.meshgrid(g, g)).reshape(2, -1).T)
        sq = box_dimension(square, scales).slope
        target = math.log(3) / math.log(2)
        ok = abs(tri - target) <= 0.08 and abs(sq - 2.0) <= 0.1
        return ok, f"[extra-paper] Sierpinski {tri:.4f} (target {target:.4f} +- 0.08), square {sq:.4f} (2 +- 0.1)"
    return _timed(5.0, body)


def criterion_9(workdir: Path):
    """CLI: verify all suites on every preset; 512x512 Sierpinski PGM is byte-stable."""
    def body():
        codes = {}
        for name in ("sierpinski", "cantor", "square"):
            codes[name] = cli.main(["verify", "-c", name, "--suites", "all"])
        digests = []
        for run in ("a", "b"):
            out = workdir / run
            cli.main(["iterate", "-c", "sierpinski", "-o", str(out)])
            cli.main(["render", str(out / "attractor.csv"), "-o", str(out / "s.pgm"), "--size", "512x512"])
            digests.append(hashlib.sha256((out / "s.pgm").read_bytes()).hexdigest())
        ok = not any(codes.values()) and digests[0] == digests[1]
        return ok, f"verify exit codes {codes}; PGM sha256 {digests[0][:16]} stable: {digests[0] == digests[1]}"
    return _timed(None, body)


def _record(n, ok, detail):
    line = f"criterion {n} {'PASS' if ok else 'FAIL'}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


@pytest.mark.parametrize("n", range(1, 9))
def test_criterion(n):
    ok, detail = globals()[f"criterion_{n}"]()
    assert _record(n, ok, detail), detail


def test_criterion_9_cli(tmp_path, capsys):
    ok, detail = criterion_9(tmp_path)
    capsys.readouterr()  # the verify reports are long; keep only the verdict
    assert _record(9, ok, detail), detail


def test_oracle_sanity():
    """The pure-Python oracle agrees with hand arithmetic before it judges anything."""
    assert oracles.hausdorff({(0.0,)}, {(1.0,)}) == 1.0
    assert oracles.hausdorff({(0.0,), (1.0,)}, {(0.0,)}) == 1.0
    assert oracles.dist((0, 0), (3, 4)) == 5.0


if __name__ == "__main__":
    import tempfile

    results = []
    for k in range(1, 9):
        results.append(_record(k, *globals()[f"criterion_{k}"]()))
    with tempfile.TemporaryDirectory() as tmp:
        import contextlib
        import io

        with contextlib.redirect_stdout(io.StringIO()):
            ok9, detail9 = criterion_9(Path(tmp))
        results.append(_record(9, ok9, detail9))
    print(json.dumps({"passed": sum(results), "total": len(results)}))
    sys.exit(0 if all(results) else 1)
