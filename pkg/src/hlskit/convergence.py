"""Warped sequences, their distance to the leaf space, and the density condition.

A :class:`WarpSequence` gives one basic function per index ``n``. For each
requested ``n`` the lab warps the base complex, takes the geodesic metric on
its vertices and brackets the Gromov-Hausdorff distance to the leaf space of
the base. Separately, :func:`check_density_condition` tests whether the
leaves on which ``f_n`` is small are dense. :func:`iff_audit` compares the
two answers.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .config import DEFAULTS
from .errors import StructuralError
from .foliation import FoliatedComplex, WarpSpec, hls, warp
from .gh import GhEstimate, combine, gh_exact, gh_heuristic, gromov_net_bound
from .metric import FiniteMetricSpace, k_net

KINDS = ("constant", "leaf_decay", "identity", "table")


@dataclass(frozen=True)
class WarpSequence:
    """Closed-form families of warps on ``base``.

    * ``constant``: ``f_n = 1/n`` on every leaf;
    * ``leaf_decay``: ``1/n`` on ``leaves``, 1 elsewhere;
    * ``identity``: ``f_n = 1``;
    * ``table``: explicit ``{n: {leaf: value}}``.

    Values must lie in ``(0, 1]``.
    """

    base: FoliatedComplex
    kind: str = "constant"
    leaves: tuple[str, ...] = ()
    table: Mapping[int, Mapping[str, float]] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise StructuralError(f"unknown warp family {self.kind!r}; choose from {KINDS}")
        object.__setattr__(self, "leaves", tuple(self.leaves))
        known = set(self.base.leaves)
        for leaf in self.leaves:
            if leaf not in known:
                raise StructuralError(f"warp family names unknown leaf {leaf!r}")
        object.__setattr__(self, "table", {int(n): dict(v) for n, v in self.table.items()})

    def term(self, n: int) -> WarpSpec:
        if n < 1:
            raise StructuralError("sequence indices start at 1")
        if self.kind == "constant":
            values = {leaf: 1.0 / n for leaf in self.base.leaves}
        elif self.kind == "identity":
            values = {leaf: 1.0 for leaf in self.base.leaves}
        elif self.kind == "leaf_decay":
            chosen = set(self.leaves)
            values = {leaf: (1.0 / n if leaf in chosen else 1.0) for leaf in self.base.leaves}
        else:
            if n not in self.table:
                raise StructuralError(f"warp table has no term for n={n}")
            values = dict(self.table[n])
            for leaf in self.base.leaves:
                if leaf not in values:
                    raise StructuralError(f"warp term n={n} misses leaf {leaf!r}")
        for leaf, v in values.items():
            if not 0 < v <= 1:
                raise StructuralError(f"warp term n={n} has value {v} on leaf {leaf!r}, outside (0, 1]")
        return WarpSpec(values)


@dataclass(frozen=True)
class Row:
    n: int
    gh_lower: float
    gh_upper: float
    method: str
    net_radius: float
    sample_radius: float
    density_radius: float
    condition_holds: bool

    @property
    def gap(self) -> float:
        return self.gh_upper - self.gh_lower


@dataclass(frozen=True)
class ConvergenceReport:
    rows: tuple[Row, ...]
    verdict: str
    tau_conv: float
    mesh: float

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "gh_lower", "gh_upper", "method", "density_radius", "condition_holds"])
        for r in self.rows:
            w.writerow([r.n, repr(r.gh_lower), repr(r.gh_upper), r.method, repr(r.density_radius), str(r.condition_holds).lower()])
        return buf.getvalue()

    def monotone_within_gap(self) -> bool:
        """``upper(n) <= upper(m) + gap(m)`` for every later row ``n``."""
        rows = self.rows
        return all(
            rows[j].gh_upper <= rows[i].gh_upper + rows[i].gap + 1e-12
            for i in range(len(rows))
            for j in range(i + 1, len(rows))
        )


@dataclass(frozen=True)
class ConditionReport:
    eps: float
    n: int
    family: tuple[str, ...]
    density_radius: float
    holds: bool


def _verdict(row: Row, tau: float) -> str:
    if row.gh_upper <= tau:
        return "converged"
    if row.gh_lower > tau:
        return "not-converged"
    return "inconclusive"


def estimate_row(
    warped: FoliatedComplex,
    target: FiniteMetricSpace,
    class_of_vertex: Mapping[str, str],
    seed: int = 0,
    budget: int | None = None,
    vertex_cap: int | None = None,
) -> tuple[GhEstimate, float]:
    """Bracket ``d_GH(warped, target)``; also returns the sampling radius used.

    Above ``vertex_cap`` vertices the warped metric is replaced by a
    farthest-point sample and both bounds are widened by its covering radius.
    """
    cap = DEFAULTS["vertex_cap"] if vertex_cap is None else vertex_cap
    table = warped.geodesic_table()
    x = FiniteMetricSpace(warped.vertices, table)
    sample_radius = 0.0
    if len(x) > cap:
        net = k_net(x, cap, seed)
        x = x.subspace(net.members)
        sample_radius = net.radius
    if len(x) * len(target) <= DEFAULTS["gh_exact_cap"]:
        v = gh_exact(x, target)
        est = GhEstimate(v, v, "exact")
    else:
        init = [(p, class_of_vertex[p]) for p in x.points]
        est = combine(
            gromov_net_bound(x, target, len(target), seed),
            gh_heuristic(x, target, budget, seed, init),
        )
    if sample_radius:
        est = GhEstimate(
            max(0.0, est.lower - sample_radius),
            est.upper + sample_radius,
            est.method + "+sample",
            est.witness,
            est.details,
        )
    return est, sample_radius


def _density(base_table: np.ndarray, k: FoliatedComplex, family: Iterable[str]) -> float:
    fam = set(family)
    idx = [i for i, v in enumerate(k.vertices) if k.leaf_of[v] in fam]
    if not idx:
        return float("inf")
    return float(base_table[:, idx].min(axis=1).max())


def check_density_condition(seq: WarpSequence, eps: float, n: int, _table: np.ndarray | None = None) -> ConditionReport:
    """Leaves with ``f_n < eps`` and whether their vertices are ``eps``-dense."""
    if not eps > 0:
        raise StructuralError("density scale must be positive")
    values = seq.term(n).values
    family = tuple(leaf for leaf in seq.base.leaves if values[leaf] < eps)
    table = seq.base.geodesic_table() if _table is None else _table
    radius = _density(table, seq.base, family)
    return ConditionReport(eps, n, family, radius, radius <= eps)


def run_convergence(
    seq: WarpSequence,
    ns: Sequence[int],
    tau_conv: float | None = None,
    seed: int = 0,
    budget: int | None = None,
    eps: float | None = None,
    vertex_cap: int | None = None,
) -> ConvergenceReport:
    """One row per ``n``: GH bounds between the warped complex and the leaf space.

    ``tau_conv`` defaults to ``2*mesh`` plus the sampling radius of the last
    row. The density columns use scale ``eps`` (default ``2*mesh``).
    """
    ns = [int(n) for n in ns]
    if not ns:
        raise StructuralError("need at least one sequence index")
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise StructuralError("sequence indices must be strictly increasing")
    base = seq.base
    h = hls(base)
    eps = 2 * base.mesh if eps is None else float(eps)
    table = base.geodesic_table()
    rows = []
    for n in ns:
        warped = warp(base, seq.term(n))
        est, sample_radius = estimate_row(warped, h.space, h.class_of_vertex, seed, budget, vertex_cap)
        cond = check_density_condition(seq, eps, n, table)
        rows.append(
            Row(
                n,
                est.lower,
                est.upper,
                est.method,
                float(max(est.details.get("r_x", 0.0), est.details.get("r_y", 0.0))),
                sample_radius,
                cond.density_radius,
                cond.holds,
            )
        )
    if tau_conv is None:
        tau_conv = 2 * base.mesh + rows[-1].sample_radius
    elif not tau_conv > 0:
        raise StructuralError("convergence tolerance must be positive")
    return ConvergenceReport(tuple(rows), _verdict(rows[-1], tau_conv), float(tau_conv), base.mesh)


@dataclass(frozen=True)
class AuditReport:
    conditions: tuple[ConditionReport, ...]
    condition_holds: bool
    convergence: ConvergenceReport
    agree: bool
    within_slack: bool
    note: str

    def to_json(self):
        return {
            "condition_holds": self.condition_holds,
            "verdict": self.convergence.verdict,
            "tau_conv": self.convergence.tau_conv,
            "agree": self.agree,
            "within_slack": self.within_slack,
            "note": self.note,
            "conditions": [
                {"eps": c.eps, "n": c.n, "family_size": len(c.family), "density_radius": c.density_radius, "holds": c.holds}
                for c in self.conditions
            ],
            "rows": [
                {"n": r.n, "gh_lower": r.gh_lower, "gh_upper": r.gh_upper, "method": r.method}
                for r in self.convergence.rows
            ],
        }


def iff_audit(
    seq: WarpSequence,
    eps_grid: Sequence[float],
    ns: Sequence[int],
    tau_conv: float | None = None,
    seed: int = 0,
    budget: int | None = None,
) -> AuditReport:
    """Cross-check the density condition against the convergence verdict.

    The condition holds when, for every ``eps`` in the grid, some ``N`` in
    ``ns`` has the condition at ``N`` and at every later index. Agreement
    means: condition holds exactly when the verdict is ``converged``.
    Disagreements are reported as they are; ``within_slack`` marks those
    whose final upper bound lies within ``mesh`` plus the estimator gap of
    the tolerance.
    """
    eps_grid = [float(e) for e in eps_grid]
    if not eps_grid or not ns:
        raise StructuralError("audit needs a nonempty eps grid and index list")
    table = seq.base.geodesic_table()
    conditions = []
    all_eps = True
    for e in eps_grid:
        reports = [check_density_condition(seq, e, n, table) for n in ns]
        conditions.extend(reports)
        tail = [r.holds for r in reports]
        all_eps &= any(all(tail[i:]) for i in range(len(tail)))
    conv = run_convergence(seq, ns, tau_conv, seed, budget)
    converged = conv.verdict == "converged"
    agree = all_eps == converged
    last = conv.rows[-1]
    slack = conv.mesh + last.gap
    within = (not agree) and abs(last.gh_upper - conv.tau_conv) <= slack
    if agree:
        note = "agree"
    else:
        note = f"disagree: condition {'holds' if all_eps else 'fails'}, verdict {conv.verdict}"
    return AuditReport(tuple(conditions), all_eps, conv, agree, within, note)
