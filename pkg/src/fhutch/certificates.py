"""Sampling certificates for the contraction inequalities of an IFS.

Each certificate draws inputs, evaluates both sides of an inequality and
records the slack ``rhs - lhs``. A sample violates when its slack is below
``-1e-9``, or when tau is not positive there (tau must map into (0, inf)).
Passing means no counterexample was found, nothing more.

Inequality ids:

* ``eq-1.1`` / ``eq-1.2``: ``tau(d(x,y)) + F(d(fx,fy)) <= F(d(x,y))`` per map
  (``eq-1.1`` when tau is constant);
* ``eq-1.3``: the set-level Ciric form
  ``tau(M) + F(H(T(A),T(B))) <= F(M)`` with ``M = M_T(A, B)``;
* ``cor-2.5``, ``cor-2.6``, ``cor-2.7``: closed forms of ``eq-1.2`` for
  ``F = ln x + x``, ``F = ln(x^2 + x) + x`` and ``F = -1/sqrt(x)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .compact import PointSet, decimate, hausdorff_auto
from .hutchinson import IfsSystem, ciric_weight, hutchinson_step, images_of
from .metric import (
    DEFAULT_SEED,
    F_INV_SQRT,
    F_LOG_LINEAR,
    F_LOG_QUADRATIC,
    TAU_CONSTANT,
    FGenerator,
)

SLACK_TOL = 1e-9
MAX_WITNESSES = 25

SKIPPED, FAILED, PASSED = -1, 0, 1

COROLLARY_F = {
    "cor-2.5": F_LOG_LINEAR,
    "cor-2.6": F_LOG_QUADRATIC,
    "cor-2.7": F_INV_SQRT,
}


@dataclass
class CertificateReport:
    inequality: str
    samples: int
    skipped: int
    n_violations: int
    min_slack: float
    violations: list = field(default_factory=list)  # first MAX_WITNESSES witnesses
    outcomes: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int8))
    disagreements: Optional[int] = None  # corollary forms only

    @property
    def passed(self) -> bool:
        return self.n_violations == 0

    def summary(self) -> dict:
        out = {
            "inequality": self.inequality,
            "samples": self.samples,
            "skipped": self.skipped,
            "violations": self.n_violations,
            "min_slack": self.min_slack,
        }
        if self.disagreements is not None:
            out["disagreements"] = self.disagreements
        return out


def sample_pairs(dim: int, count: int, seed: int = DEFAULT_SEED,
                 low: float = -10.0, high: float = 10.0):
    rng = np.random.default_rng(seed)
    xy = rng.uniform(low, high, size=(2, count, dim))
    return xy[0], xy[1]


def _tau_values(tau, t: np.ndarray) -> np.ndarray:
    v = np.asarray(tau(t), dtype=float)
    return np.where(np.isfinite(v), v, -np.inf)


def _pair_report(inequality, x, y, d, dp, lhs, rhs, slack, tau_v) -> CertificateReport:
    """Assemble a report from per-sample arrays; NaN slack marks a skipped sample."""
    skip = np.isnan(slack)
    bad = ~skip & ((slack < -SLACK_TOL) | ~(tau_v > 0))
    outcomes = np.where(skip, SKIPPED, np.where(bad, FAILED, PASSED)).astype(np.int8)
    idx = np.flatnonzero(bad)
    witnesses = [
        {
            "x": x[i].tolist(),
            "y": y[i].tolist(),
            "d": float(d[i]),
            "d_image": float(dp[i]),
            "lhs": float(lhs[i]),
            "rhs": float(rhs[i]),
            "slack": float(slack[i]),
            "tau": float(tau_v[i]),
        }
        for i in idx[:MAX_WITNESSES]
    ]
    live = slack[~skip]
    return CertificateReport(
        inequality=inequality,
        samples=len(slack),
        skipped=int(skip.sum()),
        n_violations=int(idx.size),
        min_slack=float(live.min()) if live.size else float("inf"),
        violations=witnesses,
        outcomes=outcomes,
    )


def _distances(S: IfsSystem, i: int, count, seed, low, high):
    x, y = sample_pairs(S.dim, count, seed, low, high)
    f = S.maps[i]
    d = S.metric.rows(x, y)
    dp = S.metric.rows(f(x), f(y))
    live = (dp > 0) & (d > 0)
    return x, y, d, dp, live


def _f_form(F: FGenerator, tau, d, dp, live):
    """Slack ``F(d) - F(dp) - tau(d)`` on live samples, NaN elsewhere."""
    lhs = np.full(d.shape, np.nan)
    rhs = np.full(d.shape, np.nan)
    tau_v = np.full(d.shape, np.inf)
    if live.any():
        tv = _tau_values(tau, d[live])
        tau_v[live] = tv
        with np.errstate(all="ignore"):
            lhs[live] = tv + F(dp[live])
            rhs[live] = F(d[live])
    return lhs, rhs, rhs - lhs, tau_v


def certify_pointwise(
    S: IfsSystem,
    i: int,
    count: int = 10_000,
    seed: int = DEFAULT_SEED,
    low: float = -10.0,
    high: float = 10.0,
    F: Optional[FGenerator] = None,
) -> CertificateReport:
    """Check ``tau(d(x,y)) + F(d(f_i x, f_i y)) <= F(d(x,y))`` on sampled pairs.

    Pairs with ``d(f_i x, f_i y) = 0`` are skipped. ``F`` overrides the
    system's generator.
    """
    F = F or S.F
    x, y, d, dp, live = _distances(S, i, count, seed, low, high)
    lhs, rhs, slack, tau_v = _f_form(F, S.tau, d, dp, live)
    ident = "eq-1.1" if S.tau.kind == TAU_CONSTANT else "eq-1.2"
    return _pair_report(ident, x, y, d, dp, lhs, rhs, slack, tau_v)


def _closed_form(form: str, d, dp, tau_v):
    if form == "cor-2.5":
        lhs = dp * np.exp(dp - d)
        rhs = np.exp(-tau_v) * d
    elif form == "cor-2.6":
        lhs = dp * (dp + 1.0) * np.exp(dp - d)
        rhs = np.exp(-tau_v) * d * (d + 1.0)
    elif form == "cor-2.7":
        lhs = dp
        rhs = d / (1.0 + tau_v * np.sqrt(d)) ** 2
    else:
        raise ValueError(f"unknown corollary form {form!r}")
    return lhs, rhs


def certify_corollary_form(
    form: str,
    S: IfsSystem,
    i: int,
    count: int = 10_000,
    seed: int = DEFAULT_SEED,
    low: float = -10.0,
    high: float = 10.0,
) -> CertificateReport:
    """Check a closed-form contraction condition for map ``i``.

    The slack is relative, ``(rhs - lhs) / rhs``. Each sample is also judged by
    the equivalent F-form (with the form's own F and the system's tau), and
    ``disagreements`` counts samples where the two verdicts differ.
    """
    F = FGenerator(COROLLARY_F[form])
    x, y, d, dp, live = _distances(S, i, count, seed, low, high)
    lhs = np.full(d.shape, np.nan)
    rhs = np.full(d.shape, np.nan)
    tau_v = np.full(d.shape, np.inf)
    if live.any():
        tv = _tau_values(S.tau, d[live])
        tau_v[live] = tv
        with np.errstate(all="ignore"):
            lhs[live], rhs[live] = _closed_form(form, d[live], dp[live], tv)
    with np.errstate(all="ignore"):
        slack = np.where(live, (rhs - lhs) / rhs, np.nan)
    report = _pair_report(form, x, y, d, dp, lhs, rhs, slack, tau_v)
    _, _, f_slack, f_tau = _f_form(F, S.tau, d, dp, live)
    f_bad = live & ((f_slack < -SLACK_TOL) | ~(f_tau > 0))
    c_bad = report.outcomes == FAILED
    report.disagreements = int(np.count_nonzero(f_bad != c_bad))
    return report


def certify_set_level(S: IfsSystem, set_pairs: Iterable[tuple]) -> CertificateReport:
    """Check ``tau(M) + F(H(T(A),T(B))) <= F(M)`` with ``M = M_T(A, B)``.

    ``T`` and ``T^2`` are computed without decimation, so keep the sets small.
    Pairs with ``H(T(A), T(B)) = 0`` are skipped.
    """
    rows = []
    for A, B in set_pairs:
        TA, TB, T2A = images_of(S, A, B)
        hp = hausdorff_auto(TA, TB, S.metric).value
        M = ciric_weight(S, A, B, images=(TA, TB, T2A)).value
        rows.append((A, B, M, hp))
    n = len(rows)
    d = np.array([r[2] for r in rows], dtype=float)
    dp = np.array([r[3] for r in rows], dtype=float)
    live = (dp > 0) & (d > 0)
    lhs, rhs, slack, tau_v = _f_form(S.F, S.tau, d, dp, live)
    # Witness "points" for set pairs are the first point of each set.
    x = np.array([r[0].points[0] for r in rows]) if n else np.empty((0, S.dim))
    y = np.array([r[1].points[0] for r in rows]) if n else np.empty((0, S.dim))
    report = _pair_report("eq-1.3", x, y, d, dp, lhs, rhs, slack, tau_v)
    for w, i in zip(report.violations, np.flatnonzero(report.outcomes == FAILED)):
        w["sizes"] = [len(rows[i][0]), len(rows[i][1])]
        w["M"] = w.pop("d")
        w["H_image"] = w.pop("d_image")
    return report


def trajectory_pairs(S: IfsSystem, A0: PointSet, count: int, cell: Optional[float] = None):
    """``(A_m, A_{m+1})`` for ``m < count`` along ``A_{m+1} = T(A_m)``."""
    pairs = []
    A = A0
    for _ in range(count):
        nxt = hutchinson_step(S, A)
        if cell is not None:
            nxt = decimate(nxt, cell)
        pairs.append((A, nxt))
        A = nxt
    return pairs
