"""Intrinsic metrics, metric balls, cut-off functions, completeness certificates.

A pseudo metric rho is intrinsic when sum_y mu_xy rho(x,y)^2 <= m(x) at
every vertex -- the discrete analogue of |grad rho| <= 1.  The default
metric here is the shortest-path metric with edge length
(Deg(u) v Deg(v))^(-1/2), which is intrinsic on every weighted graph.

Completeness of a graph is certified constructively: the cut-off functions
eta_k = eta_{k,2k} built from any intrinsic metric with finite balls are
nondecreasing, finitely supported, tend to 1, and satisfy
sup G(eta_k) <= 1/(2 k^2).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .errors import BadRadii, UnknownVertex
from .graph import WeightedGraph
from .operators import gamma
from .report import FAIL, PASS, VerificationReport

DEFAULT_PATH_METRIC = "default_path_metric"
USER_SUPPLIED = "user_supplied"


@dataclass(frozen=True)
class BaseMetric:
    """Distances rho(., base) from one base vertex."""

    graph: WeightedGraph = field(repr=False)
    base: str
    dist: np.ndarray
    provenance: str

    def to_dict(self) -> dict:
        return {"base": self.base,
                "dist": {v: float(d) for v, d in zip(self.graph.vertices, self.dist)}}


def edge_length_matrix(g: WeightedGraph) -> sparse.csr_matrix:
    """Per-edge lengths (Deg(u) v Deg(v))^(-1/2); self-loops have length 0."""
    deg = g.weighted_degrees()
    coo = g.weights.tocoo()
    lengths = 1.0 / np.sqrt(np.maximum(deg[coo.row], deg[coo.col]))
    lengths = np.where(coo.row == coo.col, 0.0, lengths)
    return sparse.coo_matrix((lengths, (coo.row, coo.col)), shape=(g.n, g.n)).tocsr()


def default_intrinsic_metric(g: WeightedGraph, o: str) -> BaseMetric:
    """Single-source shortest paths under the weighted-degree edge length."""
    i = g.index_of(o)
    dist = csgraph.dijkstra(edge_length_matrix(g), directed=False, indices=i)
    return BaseMetric(graph=g, base=o, dist=dist, provenance=DEFAULT_PATH_METRIC)


def hop_metric(g: WeightedGraph, o: str) -> BaseMetric:
    """Combinatorial hop distance from o (generally not intrinsic)."""
    i = g.index_of(o)
    dist = csgraph.dijkstra(g.weights, directed=False, indices=i, unweighted=True)
    return BaseMetric(graph=g, base=o, dist=dist, provenance=USER_SUPPLIED)


def user_metric(g: WeightedGraph, base: str, dist_map) -> BaseMetric:
    """Wrap externally supplied distances {vertex: rho(vertex, base)}."""
    dist = np.zeros(g.n)
    missing = set(g.vertices) - {str(k) for k in dist_map}
    if missing:
        raise UnknownVertex(f"user metric is missing distances for {sorted(missing)}")
    for k, v in dist_map.items():
        dist[g.index_of(str(k))] = float(v)
    if dist[g.index_of(base)] != 0.0:
        raise ValueError(f"dist({base!r}) must be 0 at the base point")
    return BaseMetric(graph=g, base=base, dist=dist, provenance=USER_SUPPLIED)


def metric_ball(metric: BaseMetric, r: float) -> tuple[str, ...]:
    """{x : rho(x, base) <= r}, in index order."""
    if r < 0:
        raise ValueError("ball radius must be nonnegative")
    g = metric.graph
    return tuple(g.vertices[i] for i in np.flatnonzero(metric.dist <= r))


def cutoff(metric: BaseMetric, r: float, R: float) -> np.ndarray:
    """eta_{r,R}(x) = clamp((R - rho(x, base)) / (R - r), 0, 1)."""
    if not (0 < r < R):
        raise BadRadii(f"need 0 < r < R, got r={r}, R={R}")
    return np.clip((R - metric.dist) / (R - r), 0.0, 1.0)


def verify_intrinsic(g: WeightedGraph,
                     metrics: Sequence[BaseMetric] | None = None,
                     tol: float = 1e-12) -> VerificationReport:
    """Check sum_y mu_xy rho(x,y)^2 <= m(x) (1 + tol) at every vertex.

    With ``metrics=None`` the default path metric is checked through its
    per-edge lengths (rho(x,y) <= edge length, so this is conservative and
    exact for neighbors).  Otherwise ``metrics`` must cover every base
    point, and rho(x, y) is read from the metric based at x.
    """
    if metrics is None:
        lengths = edge_length_matrix(g)
        lhs = np.asarray(g.weights.multiply(lengths.power(2)).sum(axis=1)).ravel()
        provenance = DEFAULT_PATH_METRIC
    else:
        by_base = {m.base: m for m in metrics}
        missing = set(g.vertices) - set(by_base)
        if missing:
            raise ValueError(
                f"metrics must cover every base point; missing {sorted(missing)}"
            )
        lhs = np.empty(g.n)
        coo = g.weights.tocoo()
        for i, x in enumerate(g.vertices):
            rho = by_base[x].dist
            mask = coo.row == i
            # rho(x, x) = 0 for a pseudo metric: self-loops contribute nothing
            lhs[i] = float(np.sum(coo.data[mask] * rho[coo.col[mask]] ** 2))
        provenance = by_base[g.vertices[0]].provenance

    slack = g.measure - lhs
    worst = float(-slack.min())  # > 0 means the inequality is violated
    violated = lhs > g.measure * (1.0 + tol)
    status = FAIL if violated.any() else PASS
    witness = None
    if status == FAIL:
        xi = int(np.argmax(lhs - g.measure))
        witness = {"vertex": g.vertices[xi], "function": None, "time": None}
    return VerificationReport(
        check_name="intrinsic-metric",
        status=status,
        worst_residual=worst,
        witness=witness,
        parameters={"tol": tol, "provenance": provenance,
                    "worst_slack": float(slack.min())},
    )


@dataclass(frozen=True)
class CutoffSequence:
    """The certificate functions eta_k = eta_{k,2k} for k = 1..k_max."""

    base: str
    functions: list[np.ndarray]
    gamma_sups: list[float]


def completeness_certificate(g: WeightedGraph, o: str, k_max: int,
                             metric: BaseMetric | None = None
                             ) -> tuple[CutoffSequence, VerificationReport]:
    """Build eta_k = eta_{k,2k} for k = 1..k_max and verify the certificate.

    Verified: 0 <= eta_k <= 1, eta_k nondecreasing in k, eta_k = 1 on the
    metric ball of radius k and 0 outside radius 2k, and
    sup G(eta_k) <= 1/(2 k^2).  On a finite host the report also gives the
    least k whose support region already covers the whole graph
    (``boundary_touch_k``); beyond it the certificate says nothing about any
    infinite family the host truncates.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    if metric is None:
        metric = default_intrinsic_metric(g, o)

    etas, sups = [], []
    worst = -np.inf
    failures = []
    boundary_touch_k = None
    for k in range(1, k_max + 1):
        eta = cutoff(metric, float(k), float(2 * k))
        gsup = float(gamma(g, eta).max())
        etas.append(eta)
        sups.append(gsup)
        bound = 1.0 / (2.0 * k * k)
        worst = max(worst, gsup - bound)
        if gsup > bound * (1.0 + 1e-9):
            failures.append(f"sup G(eta_{k}) = {gsup} > 1/(2k^2) = {bound}")
        if (eta < -0.0).any() or (eta > 1.0).any():
            failures.append(f"eta_{k} leaves [0, 1]")
        ball_k = metric.dist <= k
        if not np.all(eta[ball_k] == 1.0):
            failures.append(f"eta_{k} != 1 on the radius-{k} ball")
        outside = metric.dist > 2 * k
        if not np.all(eta[outside] == 0.0):
            failures.append(f"eta_{k} != 0 outside the radius-{2 * k} ball")
        if k > 1 and (etas[-1] < etas[-2] - 1e-15).any():
            failures.append(f"eta_{k} < eta_{k - 1} somewhere")
        if boundary_touch_k is None and np.all(metric.dist <= 2 * k):
            boundary_touch_k = k

    report = VerificationReport(
        check_name="completeness-certificate",
        status=PASS if not failures else FAIL,
        worst_residual=float(worst),
        witness=None if not failures else {"vertex": None, "function": None,
                                           "time": None, "detail": failures[0]},
        parameters={"base": o, "k_max": k_max,
                    "boundary_touch_k": boundary_touch_k,
                    "gamma_sups": [float(s) for s in sups],
                    "failures": failures},
    )
    return CutoffSequence(base=o, functions=etas, gamma_sups=sups), report
