"""Difference operators and per-vertex Bakry-Emery curvature.

The three operators, for a weighted graph with measure m and weights mu:

    laplacian:  (D f)(x)     = (1/m(x))  sum_y mu_xy (f(y) - f(x))
    gamma:      G(f,h)(x)    = (1/2m(x)) sum_y mu_xy (f(y)-f(x)) (h(y)-h(x))
    gamma2:     G2(f)(x)     = (1/2) D G(f)(x) - G(f, Df)(x)

All three accept a single vertex function (shape (n,)) or a stack of
functions as columns (shape (n, k)) and are exact up to floating point.
Since the self-loop difference f(x) - f(x) vanishes, self-loops contribute
nothing to any of them.

The curvature K(x) is the largest K with G2(f)(x) >= K G(f)(x) for every f.
Both sides are quadratic forms in f over the punctured 2-ball of x (adding
constants changes nothing, so f(x) = 0 is imposed), which reduces K(x) to a
semidefinite feasibility problem solved by bisection with a minimum-
eigenvalue test.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import IsolatedVertex, NoLowerBound
from .graph import WeightedGraph, as_vector, hop_distances, sparse_map
from .report import FAIL, PASS, VerificationReport

DEFAULT_CURVATURE_TOL = 1e-8
DEFAULT_PSD_TOL = 1e-10
DEFAULT_CURVATURE_FLOOR = -1e6


def _columns(g: WeightedGraph, f) -> tuple[np.ndarray, bool]:
    """Normalize input to a 2-d (n, k) array; report whether it was 1-d."""
    if isinstance(f, np.ndarray) and f.ndim == 2:
        if f.shape[0] != g.n:
            raise ValueError(f"expected {g.n} rows, got {f.shape[0]}")
        return f.astype(np.float64, copy=False), False
    return as_vector(g, f)[:, None], True


def laplacian(g: WeightedGraph, f) -> np.ndarray:
    """(1/m) (W f - deg_sum * f); missing entries of a mapping read as 0."""
    F, single = _columns(g, f)
    out = (g.weights @ F - g.degree_sums[:, None] * F) / g.measure[:, None]
    return out[:, 0] if single else out


def gamma(g: WeightedGraph, f, h=None) -> np.ndarray:
    """Carre du champ G(f,h); the one-argument form returns G(f) = G(f,f)."""
    F, single_f = _columns(g, f)
    if h is None:
        H, single = F, single_f
    else:
        H, single_h = _columns(g, h)
        single = single_f and single_h
        if F.shape != H.shape:
            raise ValueError("f and h must have matching shapes")
    W = g.weights
    out = (W @ (F * H) - F * (W @ H) - H * (W @ F)
           + F * H * g.degree_sums[:, None]) / (2.0 * g.measure[:, None])
    return out[:, 0] if single else out


def gamma2(g: WeightedGraph, f, h=None) -> np.ndarray:
    """Iterated form G2(f,h) = (1/2)[D G(f,h) - G(f, Dh) - G(h, Df)]."""
    if h is None:
        F, single = _columns(g, f)
        gf = gamma(g, F)
        return_val = 0.5 * laplacian(g, gf) - gamma(g, F, laplacian(g, F))
        return return_val[:, 0] if single else return_val
    F, single_f = _columns(g, f)
    H, single_h = _columns(g, h)
    out = 0.5 * (laplacian(g, gamma(g, F, H))
                 - gamma(g, F, laplacian(g, H))
                 - gamma(g, H, laplacian(g, F)))
    return out[:, 0] if (single_f and single_h) else out


def dirichlet_energy(g: WeightedGraph, f, h=None) -> float:
    """Q(f,h) = (1/2) sum_{x,y} mu_xy (f(y)-f(x)) (h(y)-h(x)).

    Evaluated edgewise, independently of the gamma operator (the two are
    tied by the energy identity Q(f) = ||G(f)||_{l1(m)}).
    """
    fv = as_vector(g, f)
    hv = fv if h is None else as_vector(g, h)
    coo = g.weights.tocoo()
    df = fv[coo.col] - fv[coo.row]
    dh = hv[coo.col] - hv[coo.row]
    return float(0.5 * np.sum(coo.data * df * dh))


# ---------------------------------------------------------------------------
# quadratic forms over the punctured 2-ball
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadraticFormPair:
    """Matrices Q1, Q2 with f^T Q1 f = G(f)(center), f^T Q2 f = G2(f)(center)
    for f vanishing at the center and supported on its 2-ball.

    ``basis`` lists the 2-ball minus the center in index order; ``hops``
    gives each basis vertex's hop distance (1 or 2) from the center.
    """

    center: str
    basis: tuple[str, ...]
    hops: tuple[int, ...]
    gamma_matrix: np.ndarray
    gamma2_matrix: np.ndarray


def curvature_forms(g: WeightedGraph, x: str) -> QuadraticFormPair:
    """Assemble Q1, Q2 at x by polarization of exact operator evaluations."""
    xi = g.index_of(x)
    dist = hop_distances(g, xi, cutoff=2)
    basis_idx = [int(i) for i in np.flatnonzero(dist <= 2) if i != xi]
    hops = tuple(int(dist[i]) for i in basis_idx)
    b = len(basis_idx)

    # columns: the b basis indicators, then e_i + e_j for i < j
    pairs = [(i, j) for i in range(b) for j in range(i + 1, b)]
    F = np.zeros((g.n, b + len(pairs)))
    for c, i in enumerate(basis_idx):
        F[i, c] = 1.0
    for c, (i, j) in enumerate(pairs):
        F[basis_idx[i], b + c] = 1.0
        F[basis_idx[j], b + c] = 1.0

    if b == 0:
        empty = np.zeros((0, 0))
        return QuadraticFormPair(x, (), (), empty, empty)

    g1 = gamma(g, F)[xi]
    g2 = gamma2(g, F)[xi]
    Q1 = np.diag(g1[:b])
    Q2 = np.diag(g2[:b])
    for c, (i, j) in enumerate(pairs):
        Q1[i, j] = Q1[j, i] = 0.5 * (g1[b + c] - g1[i] - g1[j])
        Q2[i, j] = Q2[j, i] = 0.5 * (g2[b + c] - g2[i] - g2[j])
    return QuadraticFormPair(x, tuple(g.vertices[i] for i in basis_idx),
                             hops, Q1, Q2)


# ---------------------------------------------------------------------------
# curvature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CurvatureResult:
    """K(x) with the certified bisection bracket and a unit-gradient minimizer.

    The minimizer f (sparse, over the punctured 2-ball) satisfies
    G(f)(x) = 1 and G2(f)(x) - K G(f)(x) = 0 within tolerance.
    """

    vertex: str
    curvature: float
    minimizer: dict[str, float]
    bracket: tuple[float, float]
    tolerance: float


def bakry_emery_curvature(g: WeightedGraph, x: str,
                          tol: float = DEFAULT_CURVATURE_TOL,
                          psd_tol: float = DEFAULT_PSD_TOL,
                          floor: float = DEFAULT_CURVATURE_FLOOR,
                          forms: QuadraticFormPair | None = None) -> CurvatureResult:
    """Largest K with Q2 - K Q1 positive semidefinite, bisected to ``tol``.

    The PSD test accepts lambda_min >= -psd_tol * ||Q2||.  The initial upper
    bound is the smallest neighbor Rayleigh quotient G2(delta_y)(x) /
    G(delta_y)(x); the lower bound comes from downward doubling, and hitting
    ``floor`` raises NoLowerBound as a diagnostic.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if forms is None:
        forms = curvature_forms(g, x)
    nb = [i for i, h in enumerate(forms.hops) if h == 1]
    if not nb:
        raise IsolatedVertex(
            f"vertex {x!r} has no neighbor: G(f)(x) vanishes identically "
            "and curvature is undefined"
        )
    Q1, Q2 = forms.gamma_matrix, forms.gamma2_matrix
    scale = float(np.linalg.norm(Q2, 2))
    thresh = -psd_tol * max(scale, 1.0)

    def is_psd(K: float) -> bool:
        lam = scipy.linalg.eigvalsh(Q2 - K * Q1)
        return lam[0] >= thresh

    hi = min(Q2[i, i] / Q1[i, i] for i in nb)
    if is_psd(hi):
        lo = hi
    else:
        step = max(1.0, 0.5 * abs(hi))
        lo = hi - step
        while not is_psd(lo):
            step *= 2.0
            lo = hi - step
            if lo < floor:
                raise NoLowerBound(
                    f"no K >= {floor} makes Q2 - K Q1 positive semidefinite "
                    f"at vertex {x!r} (psd_tol={psd_tol})"
                )
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if is_psd(mid):
                lo = mid
            else:
                hi = mid
    curvature = 0.5 * (lo + hi)
    minimizer = _unit_gradient_minimizer(forms, nb)
    return CurvatureResult(vertex=x, curvature=curvature, minimizer=minimizer,
                           bracket=(lo, hi), tolerance=tol)


def _unit_gradient_minimizer(forms: QuadraticFormPair, nb) -> dict[str, float]:
    """Minimizing direction of f^T Q2 f on {f^T Q1 f = 1}.

    Q1 is diagonal and positive exactly on the neighbor coordinates, and the
    hop-2 block C of Q2 is positive definite, so eliminating the hop-2
    coordinates (w = -C^{-1} B^T u) leaves a definite generalized eigenvalue
    problem on the neighbor block.
    """
    Q1, Q2 = forms.gamma_matrix, forms.gamma2_matrix
    far = [i for i in range(len(forms.basis)) if i not in set(nb)]
    D = np.diag(Q1)[nb]
    A = Q2[np.ix_(nb, nb)]
    if far:
        B = Q2[np.ix_(nb, far)]
        C = Q2[np.ix_(far, far)]
        S = A - B @ np.linalg.solve(C, B.T)
    else:
        S = A
    # scipy normalizes generalized eigenvectors to u^T diag(D) u = 1
    _, vecs = scipy.linalg.eigh(S, np.diag(D))
    u = vecs[:, 0]
    values = np.zeros(len(forms.basis))
    values[nb] = u
    if far:
        values[far] = -np.linalg.solve(C, B.T @ u)
    return {v: float(values[i]) for i, v in enumerate(forms.basis)}


def curvature_profile(g: WeightedGraph,
                      tol: float = DEFAULT_CURVATURE_TOL,
                      psd_tol: float = DEFAULT_PSD_TOL,
                      floor: float = DEFAULT_CURVATURE_FLOOR,
                      jobs: int = 1) -> tuple[list[CurvatureResult], float]:
    """Per-vertex curvature in index order, plus the global minimum K_min."""

    def one(x: str) -> CurvatureResult:
        return bakry_emery_curvature(g, x, tol=tol, psd_tol=psd_tol, floor=floor)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, g.vertices))
    else:
        results = [one(x) for x in g.vertices]
    k_min = min(r.curvature for r in results)
    return results, k_min


def verify_cd(g: WeightedGraph, K: float, trials: int, seed: int = 0,
              tol: float = 1e-9) -> VerificationReport:
    """Sample finitely supported f and check G2(f)(x) >= K G(f)(x) - tol.

    All vertex indicators are always included alongside ``trials`` random
    functions (half dense Gaussian, half sparse).  Failure is a report
    outcome with a reproducible witness, not an error.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    cols = [np.eye(g.n)]
    dense = rng.standard_normal((g.n, trials - trials // 2))
    cols.append(dense)
    sparse_cols = np.zeros((g.n, trials // 2))
    for c in range(sparse_cols.shape[1]):
        k = int(rng.integers(1, min(g.n, 6) + 1))
        supp = rng.choice(g.n, size=k, replace=False)
        sparse_cols[supp, c] = rng.standard_normal(k)
    cols.append(sparse_cols)
    F = np.hstack(cols)

    residual = K * gamma(g, F) - gamma2(g, F)
    worst = float(residual.max())
    xi, col = np.unravel_index(int(residual.argmax()), residual.shape)
    status = PASS if worst <= tol else FAIL
    witness = None
    if status == FAIL:
        witness = {
            "vertex": g.vertices[xi],
            "function": sparse_map(g, F[:, col]),
            "time": None,
        }
    return VerificationReport(
        check_name="cd-inequality",
        status=status,
        worst_residual=worst,
        witness=witness,
        parameters={"K": K, "trials": trials, "seed": seed, "tol": tol},
    )
