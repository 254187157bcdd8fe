"""Randomized verification suites and a box-counting diagnostic.

Every suite runs ``cases`` independent cases. Case ``k`` draws from its own
generator seeded with ``case_seed(seed, k)``, and that derived seed is what a
failure records, so ``run_*_case(..., seed=failure.seed)`` replays it exactly.

Default random-set distribution: sizes uniform in [1, 50], coordinates
uniform in [-10, 10]^n, n drawn from {1, 2, 3} (forced to 1 for metrics that
live on R).
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import certificates as cert
from .compact import PointSet, decimate, hausdorff, hausdorff_auto, point_to_set, sup_distance, union
from .errors import InputError
from .hutchinson import IfsSystem, apply_map, hutchinson_step, iterate
from .metric import DEFAULT_SEED, BMetric

EXACT_TOL = 1e-12
STRICT_TOL = 1e-9


@dataclass
class Failure:
    case: int
    seed: int
    detail: str
    lhs: float
    rhs: float
    slack: float


@dataclass
class SuiteReport:
    suite: str
    cases: int
    failures: list = field(default_factory=list)
    ms: float = 0.0
    notes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        out = {
            "suite": self.suite,
            "cases": self.cases,
            "failures": [
                {k: v for k, v in asdict(f).items()} for f in sorted(self.failures, key=lambda f: f.case)
            ],
            "ms": round(self.ms, 3),
        }
        if self.notes:
            out["notes"] = self.notes
        return out


def case_seed(seed: int, case: int) -> int:
    return int(np.random.SeedSequence([seed, case]).generate_state(1, dtype=np.uint64)[0] >> 1)


def random_set(rng: np.random.Generator, dim: int, max_size: int = 50,
               low: float = -10.0, high: float = 10.0) -> PointSet:
    k = int(rng.integers(1, max_size + 1))
    return PointSet(rng.uniform(low, high, size=(k, dim)))


def _dims_for(m: BMetric, dims: Optional[Sequence[int]]) -> tuple:
    if m.fixed_dim is not None:
        return (m.fixed_dim,)
    return tuple(dims) if dims else (1, 2, 3)


def _run(name: str, cases: int, seed: int, body: Callable[[int, int], list]) -> SuiteReport:
    t0 = time.perf_counter()
    report = SuiteReport(name, cases)
    for k in range(cases):
        s = case_seed(seed, k)
        for detail, lhs, rhs, slack in body(k, s):
            report.failures.append(Failure(k, s, detail, float(lhs), float(rhs), float(slack)))
    report.ms = 1e3 * (time.perf_counter() - t0)
    return report


def _le(detail: str, lhs: float, rhs: float, tol: float = EXACT_TOL) -> list:
    """``lhs <= rhs`` within ``tol`` relative to ``max(1, |lhs|, |rhs|)``.

    Returns a one-element failure list when the inequality fails.
    """
    slack = rhs - lhs
    scale = max(1.0, abs(lhs), abs(rhs))
    return [] if slack >= -tol * scale else [(detail, lhs, rhs, slack)]


# ---------------------------------------------------------------------------
# Set-distance lemmas
# ---------------------------------------------------------------------------


def lemma14_checks(m: BMetric, A: PointSet, B: PointSet, C: PointSet, D: PointSet) -> list:
    """Nested-set monotonicity, sup over a union, the union bound, and H's relaxed triangle."""
    out = []
    C_sup = union(B, C)  # any superset of B
    out += _le("(i) sup_a d(a,C) <= sup_a d(a,B) for B in C",
               sup_distance(A, C_sup, m), sup_distance(A, B, m))
    lhs = sup_distance(union(A, B), C, m)
    rhs = max(sup_distance(A, C, m), sup_distance(B, C, m))
    if lhs != rhs:
        out.append(("(ii) sup over A|B of d(.,C) = max of sups", lhs, rhs, rhs - lhs))
    out += _le("(iii) H(A|B, C|D) <= max(H(A,C), H(B,D))",
               hausdorff(union(A, B), union(C, D), m).value,
               max(hausdorff(A, C, m).value, hausdorff(B, D, m).value))
    out += _le("H relaxed triangle: H(A,C) <= b(H(A,B) + H(B,C))",
               hausdorff(A, C, m).value,
               m.b * (hausdorff(A, B, m).value + hausdorff(B, C, m).value))
    return out


def run_lemma14_case(m: BMetric, seed: int, dims=None) -> list:
    rng = np.random.default_rng(seed)
    n = int(rng.choice(_dims_for(m, dims)))
    A, B, C, D = (random_set(rng, n) for _ in range(4))
    return lemma14_checks(m, A, B, C, D)


def run_lemma14_suite(m: BMetric, cases: int = 1000, seed: int = DEFAULT_SEED, dims=None) -> SuiteReport:
    return _run("lemma14", cases, seed, lambda k, s: run_lemma14_case(m, s, dims))


def lemma15_checks(m: BMetric, A: PointSet, B: PointSet, x, y, outside, chain) -> list:
    """Items 2, 3, 4/5 (nearest-point attainment), 8 and 9 on concrete inputs.

    ``x`` and ``y`` are arbitrary points for item 3, ``outside`` must not lie
    in ``A``, and ``chain`` holds at least two points.
    """
    out = []
    H = hausdorff(A, B, m).value
    dist = m.pairwise(A.points, B.points)
    for k in np.flatnonzero(dist.min(axis=1) > H + EXACT_TOL * max(1.0, H)):
        out.append((f"(2) d(x,B) <= H(A,B) at A[{k}]", dist[k].min(), H, H - dist[k].min()))
    # Finite sets attain the infimum, so the nearest point is a valid selection.
    j = np.argmin(dist, axis=1)
    sel = m.rows(A.points, B.points[j])
    for k in np.flatnonzero(sel > H + EXACT_TOL * max(1.0, H)):
        out.append((f"(4/5) d(a, nearest b) <= H(A,B) at A[{k}]", sel[k], H, H - sel[k]))
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    out += _le("(3) d(x,A) <= b(d(x,y) + d(y,A))",
               point_to_set(x, A, m), m.b * (float(m.rows(x, y)) + point_to_set(y, A, m)))
    self_dist = m.pairwise(A.points, A.points).min(axis=1)
    for k in np.flatnonzero(self_dist != 0.0):
        out.append((f"(8) d(x,A) = 0 for x = A[{k}]", self_dist[k], 0.0, -self_dist[k]))
    z = point_to_set(outside, A, m)
    if not z > 0.0:
        out.append(("(8) d(x,A) > 0 for x not in A", z, 0.0, z))
    pts = np.asarray(chain, dtype=float)
    n = len(pts) - 1
    steps = m.rows(pts[:-1], pts[1:])
    weights = np.array([m.b ** min(i, n - 1) for i in range(1, n + 1)])
    out += _le(f"(9) chain inequality, length {n}",
               float(m.rows(pts[0], pts[-1])), float(np.dot(weights, steps)))
    return out


def run_lemma15_case(m: BMetric, seed: int, dims=None, chain_len: Optional[int] = None) -> list:
    rng = np.random.default_rng(seed)
    n = int(rng.choice(_dims_for(m, dims)))
    A, B = random_set(rng, n), random_set(rng, n)
    x, y = rng.uniform(-10, 10, size=(2, n))
    outside = rng.uniform(-10, 10, size=n)
    while outside in A:
        outside = rng.uniform(-10, 10, size=n)
    length = chain_len or int(rng.integers(1, 7))
    chain = rng.uniform(-10, 10, size=(length + 1, n))
    return lemma15_checks(m, A, B, x, y, outside, chain)


def run_lemma15_suite(m: BMetric, cases: int = 1000, seed: int = DEFAULT_SEED, dims=None,
                      chain_len: Optional[int] = None) -> SuiteReport:
    return _run("lemma15", cases, seed, lambda k, s: run_lemma15_case(m, s, dims, chain_len))


# ---------------------------------------------------------------------------
# Lifted contraction and convergence
# ---------------------------------------------------------------------------


def lifted_checks(S: IfsSystem, A: PointSet, B: PointSet) -> list:
    """Set-level consequences of pointwise contraction for one pair ``A, B``.

    Per map: ``H(f(A), f(B)) < H(A, B)``, ``F(H(f(A), f(B))) < F(H(A, B))`` and the
    lifted inequality ``tau(H(A,B)) + F(H(f(A),f(B))) <= F(H(A,B))``. For the
    operator: ``H(T(A), T(B)) <= max_i H(f_i(A), f_i(B))``.
    """
    m = S.metric
    H = hausdorff(A, B, m).value
    if H == 0.0:
        return []
    out = []
    per_map = []
    for i, f in enumerate(S.maps):
        hf = hausdorff(apply_map(f, A), apply_map(f, B), m).value
        per_map.append(hf)
        out += _le(f"map {i}: H(f(A),f(B)) < H(A,B)", hf, H, STRICT_TOL)
        if hf > 0:
            fl, fr = S.F(hf), S.F(H)
            out += _le(f"map {i}: F(H(f(A),f(B))) < F(H(A,B))", fl, fr, STRICT_TOL)
            tau = float(S.tau(H))
            lhs = tau + fl
            if not tau > 0:
                out.append((f"map {i}: tau(H(A,B)) > 0", tau, 0.0, tau))
            else:
                out += _le(f"map {i}: tau(H) + F(H(f(A),f(B))) <= F(H)", lhs, fr, STRICT_TOL)
    ht = hausdorff(hutchinson_step(S, A), hutchinson_step(S, B), m).value
    out += _le("H(T(A),T(B)) <= max_i H(f_i(A),f_i(B))", ht, max(per_map))
    return out


def run_lifted_case(S: IfsSystem, seed: int, max_size: int = 50) -> list:
    rng = np.random.default_rng(seed)
    A, B = random_set(rng, S.dim, max_size), random_set(rng, S.dim, max_size)
    return lifted_checks(S, A, B)


def run_lifted_contraction_suite(S: IfsSystem, cases: int = 500, seed: int = DEFAULT_SEED,
                                 precheck: bool = True, precheck_pairs: int = 2000) -> SuiteReport:
    """Random-pair run of :func:`lifted_checks`.

    With ``precheck`` every map is first certified pointwise; if any map fails,
    the suite aborts without running cases and reports the first violation.
    """
    if precheck:
        t0 = time.perf_counter()
        for i in range(len(S.maps)):
            rep = cert.certify_pointwise(S, i, count=precheck_pairs, seed=seed)
            if not rep.passed:
                w = rep.violations[0]
                report = SuiteReport("lifted", 0)
                report.failures.append(Failure(
                    -1, seed,
                    f"precondition: map {i} fails the pointwise certificate at x={w['x']}, y={w['y']}",
                    w["lhs"], w["rhs"], w["slack"]))
                report.notes["aborted"] = True
                report.ms = 1e3 * (time.perf_counter() - t0)
                return report
    return _run("lifted", cases, seed, lambda k, s: run_lifted_case(S, s))


def decimation_error(m: BMetric, cell: Optional[float], dim: int) -> float:
    """Worst distance, in the metric's units, from a point to its cell representative."""
    if cell is None:
        return 0.0
    e = cell * math.sqrt(dim)
    return float(m.from_euclidean(e)) if m.monotone else e


def undecimated_trace(S: IfsSystem, A0: PointSet, steps: int, point_cap: int = 20_000) -> np.ndarray:
    """``H(A_m, A_{m+1})`` for exact iterates, stopping before sets exceed ``point_cap``."""
    hs = []
    A = A0
    for _ in range(steps):
        nxt = hutchinson_step(S, A)
        if len(nxt) > point_cap:
            break
        hs.append(hausdorff_auto(A, nxt, S.metric).value)
        if hs[-1] == 0.0:
            break
        A = nxt
    return np.array(hs)


def run_convergence_suite(S: IfsSystem, seeds: Sequence[PointSet], tol: float,
                          cell: Optional[float], max_iter: int = 50,
                          trace_steps: int = 30, point_cap: int = 20_000) -> SuiteReport:
    """Iterate from every seed and compare the results.

    Checks per seed: convergence, a non-increasing undecimated trace (to 1e-9),
    and the residual ``H(U, T(U)) <= b (tol + e)``. Across seeds: pairwise
    ``H(U_i, U_j) <= b (2 tol + 2 e)``. Here ``e`` is the decimation error
    ``cell * sqrt(n)`` expressed in the metric's units.
    """
    t0 = time.perf_counter()
    report = SuiteReport("convergence", len(seeds))
    b = S.metric.b
    e = decimation_error(S.metric, cell, S.dim)
    results = []
    for k, A0 in enumerate(seeds):
        res, _ = iterate(S, A0, tol, max_iter, cell)
        results.append(res)
        if not res.converged:
            report.failures.append(Failure(k, k, f"seed {k}: stopped as {res.stop_reason} after "
                                           f"{res.iterations + 1} steps", res.residual, tol, tol - res.residual))
            continue
        bound = b * (tol + e)
        if res.residual > bound:
            report.failures.append(Failure(k, k, f"seed {k}: residual H(U,T(U)) <= b(tol + e)",
                                           res.residual, bound, bound - res.residual))
        hs = undecimated_trace(S, A0, trace_steps, point_cap)
        rises = np.flatnonzero(np.diff(hs) > STRICT_TOL)
        for j in rises:
            report.failures.append(Failure(k, k, f"seed {k}: undecimated trace rises at m={j + 1}",
                                           hs[j + 1], hs[j], hs[j] - hs[j + 1]))
    bound = b * (2 * tol + 2 * e)
    for i in range(len(results)):
        for j in range(i + 1, len(results)):
            if results[i].converged and results[j].converged:
                h = hausdorff_auto(results[i].attractor, results[j].attractor, S.metric).value
                if h > bound:
                    report.failures.append(Failure(i, j, f"attractors from seeds {i} and {j} differ",
                                                   h, bound, bound - h))
    report.notes["attractor_sizes"] = [len(r.attractor) for r in results]
    report.notes["iterations"] = [r.iterations for r in results]
    report.ms = 1e3 * (time.perf_counter() - t0)
    return report


# ---------------------------------------------------------------------------
# Certificates as suites
# ---------------------------------------------------------------------------


def _certificate_suite(name: str, reports: list, require_agreement: bool = False) -> SuiteReport:
    out = SuiteReport(name, sum(r.samples for r in reports))
    for mi, rep in enumerate(reports):
        if require_agreement:
            if rep.disagreements:
                out.failures.append(Failure(mi, 0, f"map {mi}: closed form and F-form disagree on "
                                            f"{rep.disagreements} samples", rep.disagreements, 0, -rep.disagreements))
            continue
        for w in rep.violations:
            out.failures.append(Failure(mi, 0, f"map {mi}: {rep.inequality} violated at {w.get('x')}, {w.get('y')}",
                                        w["lhs"], w["rhs"], w["slack"]))
        hidden = rep.n_violations - len(rep.violations)
        if hidden > 0:
            out.failures.append(Failure(mi, 0, f"map {mi}: {hidden} further violations not listed",
                                        math.nan, math.nan, rep.min_slack))
    out.notes["certificates"] = [r.summary() for r in reports]
    return out


def run_pointwise_certificates(S: IfsSystem, count: int = 10_000, seed: int = DEFAULT_SEED,
                               low: float = -10.0, high: float = 10.0) -> SuiteReport:
    t0 = time.perf_counter()
    reps = [cert.certify_pointwise(S, i, count, seed, low, high) for i in range(len(S.maps))]
    out = _certificate_suite("eq-1.2", reps)
    out.ms = 1e3 * (time.perf_counter() - t0)
    return out


def run_set_level_certificate(S: IfsSystem, A0: PointSet, steps: int = 10,
                              cell: Optional[float] = None) -> SuiteReport:
    t0 = time.perf_counter()
    rep = cert.certify_set_level(S, cert.trajectory_pairs(S, A0, steps, cell))
    out = _certificate_suite("eq-1.3", [rep])
    out.ms = 1e3 * (time.perf_counter() - t0)
    return out


def run_corollary_certificates(form: str, S: IfsSystem, count: int = 10_000, seed: int = DEFAULT_SEED,
                               low: float = -10.0, high: float = 10.0,
                               require_agreement: bool = False) -> SuiteReport:
    """Closed-form certificate ``form`` for every map.

    By default violations are failures. With ``require_agreement`` only
    disagreement between the closed form and its F-form counts as failure and
    violations are reported in ``notes``.
    """
    t0 = time.perf_counter()
    reps = [cert.certify_corollary_form(form, S, i, count, seed, low, high) for i in range(len(S.maps))]
    out = _certificate_suite(form, reps, require_agreement)
    out.ms = 1e3 * (time.perf_counter() - t0)
    return out


# ---------------------------------------------------------------------------
# Box counting (extra-paper diagnostic)
# ---------------------------------------------------------------------------


@dataclass
class DimensionEstimate:
    slope: float
    scales: list
    counts: list
    residual: float
    extra_paper: bool = True  # a rendering sanity check, not part of the theory


def box_dimension(A: PointSet, scales: Sequence[float]) -> DimensionEstimate:
    """Least-squares slope of ``log N(s)`` against ``log(1/s)``.

    ``N(s)`` counts occupied grid cells of side ``s``. Needs at least three
    scales spanning two octaves.
    """
    s = np.asarray(sorted(float(v) for v in scales), dtype=float)
    if len(s) < 3 or np.any(~(s > 0)) or s[-1] / s[0] < 4.0 or len(np.unique(s)) != len(s):
        raise InputError("need >= 3 distinct positive scales spanning >= 2 octaves")
    counts = np.array([len(decimate(A, v)) for v in s], dtype=float)
    x, y = np.log(1.0 / s), np.log(counts)
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return DimensionEstimate(float(slope) + 0.0, s.tolist(), counts.astype(int).tolist(), resid)
