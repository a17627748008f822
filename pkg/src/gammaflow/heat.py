"""Heat-semigroup engine: spectral and ODE backends, Dirichlet restrictions,
and heat-mass curves over exhaustions.

The generator is symmetrized before decomposition: with M = diag(m) and
generator matrix L = M^{-1} (W - diag(deg_sums)), the conjugate
S = M^{1/2} L M^{-1/2} = M^{-1/2} (W - diag(deg_sums)) M^{-1/2} is symmetric
negative semidefinite, so

    P_t f = M^{-1/2} Phi exp(t Lam) Phi^T M^{1/2} f

with S = Phi Lam Phi^T.  The Dirichlet restriction to a finite domain keeps
the full-degree diagonal (off-domain neighbors kill mass), which makes its
semigroup sub-Markov: 0 <= P_t^D 1 <= 1.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg
from scipy import sparse
from scipy.integrate import solve_ivp

from .errors import (
    DisconnectedDomainWarning,
    EmptyDomain,
    IntegrationError,
    NegativeTime,
    TooLargeForSpectral,
    VertexOutsideDomain,
)
from .families import FamilySpec, generate_family
from .graph import WeightedGraph, as_vector, ball_indices
from .metrics import default_intrinsic_metric

SPECTRAL = "spectral"
ODE = "ode"
MAX_SPECTRAL_VERTICES = 3000
EIGENVALUE_TOL = 1e-8


def generator_matrix(g: WeightedGraph) -> sparse.csr_matrix:
    """Sparse matrix of the formal Laplacian acting on aligned vectors."""
    inv_m = sparse.diags(1.0 / g.measure)
    return (inv_m @ (g.weights - sparse.diags(g.degree_sums))).tocsr()


def _symmetrized(weights: sparse.spmatrix, degree_sums: np.ndarray,
                 measure: np.ndarray) -> np.ndarray:
    inv_sqrt_m = 1.0 / np.sqrt(measure)
    S = (weights.toarray() - np.diag(degree_sums)) * np.outer(inv_sqrt_m, inv_sqrt_m)
    return 0.5 * (S + S.T)


def _decompose(S: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix, with a tridiagonal fast path."""
    n = S.shape[0]
    if n > 2:
        off = S.copy()
        idx = np.arange(n)
        off[idx, idx] = 0.0
        off[idx[:-1], idx[:-1] + 1] = 0.0
        off[idx[:-1] + 1, idx[:-1]] = 0.0
        if not off.any():
            return scipy.linalg.eigh_tridiagonal(np.diag(S).copy(),
                                                 np.diag(S, 1).copy())
    return scipy.linalg.eigh(S)


@dataclass
class SemigroupOperator:
    """Factorized heat semigroup P_t = e^{tL} for one graph.

    In spectral mode P_t f is exact up to the eigendecomposition; in ode
    mode it is integrated adaptively to the configured tolerances.
    """

    graph: WeightedGraph
    mode: str
    eigenvalues: np.ndarray | None = None
    eigenvectors: np.ndarray | None = field(default=None, repr=False)
    rtol: float = 1e-9
    atol: float = 1e-12
    _generator: sparse.csr_matrix | None = field(default=None, repr=False)

    @property
    def generator(self) -> sparse.csr_matrix:
        if self._generator is None:
            object.__setattr__(self, "_generator", generator_matrix(self.graph))
        return self._generator

    def evolve(self, t: float, f, allow_negative: bool = False) -> np.ndarray:
        """P_t f for aligned vectors or column stacks; t < 0 needs opt-in.

        Negative times are the analytic extension e^{tL} on a finite graph;
        they exist only to support centered finite-difference checks.
        """
        if t < 0 and not allow_negative:
            raise NegativeTime(f"semigroup time must be >= 0, got {t}")
        single = not (isinstance(f, np.ndarray) and f.ndim == 2)
        F = as_vector(self.graph, f)[:, None] if single else f.astype(float, copy=False)
        if t == 0:
            out = F.copy()
        elif self.mode == SPECTRAL:
            m = self.graph.measure
            sqrt_m = np.sqrt(m)
            U = self.eigenvectors.T @ (F * sqrt_m[:, None])
            U *= np.exp(t * self.eigenvalues)[:, None]
            out = (self.eigenvectors @ U) / sqrt_m[:, None]
        else:
            out = np.empty_like(F)
            gen = self.generator
            for c in range(F.shape[1]):
                sol = solve_ivp(lambda s, y: gen @ y, (0.0, t), F[:, c],
                                method="DOP853", rtol=self.rtol, atol=self.atol)
                if not sol.success:
                    raise IntegrationError(
                        f"ode backend failed at t={t}: {sol.message}"
                    )
                out[:, c] = sol.y[:, -1]
        return out[:, 0] if single else out


def build_semigroup(g: WeightedGraph, mode: str = SPECTRAL,
                    rtol: float = 1e-9, atol: float = 1e-12,
                    max_spectral: int = MAX_SPECTRAL_VERTICES) -> SemigroupOperator:
    """Factorize the generator; spectral mode is exact, ode mode adaptive."""
    if mode not in (SPECTRAL, ODE):
        raise ValueError(f"mode must be {SPECTRAL!r} or {ODE!r}, got {mode!r}")
    if mode == SPECTRAL:
        if g.n > max_spectral:
            raise TooLargeForSpectral(
                f"{g.n} vertices exceed the dense-eigendecomposition guideline "
                f"({max_spectral}); pass mode='ode' to force the integrator"
            )
        lam, phi = _decompose(_symmetrized(g.weights, g.degree_sums, g.measure))
        if lam[-1] > EIGENVALUE_TOL * max(1.0, abs(lam[0])):
            raise AssertionError(
                f"generator spectrum must be <= 0; got max eigenvalue {lam[-1]}"
            )
        return SemigroupOperator(graph=g, mode=SPECTRAL, eigenvalues=lam,
                                 eigenvectors=phi)
    return SemigroupOperator(graph=g, mode=ODE, rtol=rtol, atol=atol)


def apply_semigroup(op: SemigroupOperator, t: float, f) -> np.ndarray:
    """P_t f; returns f exactly at t = 0 and rejects negative times."""
    return op.evolve(t, f, allow_negative=False)


# ---------------------------------------------------------------------------
# Dirichlet restrictions and heat mass
# ---------------------------------------------------------------------------

@dataclass
class DirichletRestriction:
    """Generator on a finite domain with killing outside.

    The matrix acts on functions on the domain: off-diagonal entries are
    mu_xy / m(x) for x, y both inside, while the diagonal keeps the full
    degree sum_{y in V} mu_xy even when neighbors lie outside the domain.
    """

    host: WeightedGraph
    domain: tuple[str, ...]
    matrix: np.ndarray
    measure: np.ndarray
    _spectrum: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return len(self.domain)

    def spectrum(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigendecomposition of the symmetrized restricted generator."""
        if self._spectrum is None:
            sqrt_m = np.sqrt(self.measure)
            S = self.matrix * np.outer(sqrt_m, 1.0 / sqrt_m)
            S = 0.5 * (S + S.T)
            self._spectrum = _decompose(S)
        return self._spectrum

    def evolve(self, t: float, f: np.ndarray) -> np.ndarray:
        lam, phi = self.spectrum()
        sqrt_m = np.sqrt(self.measure)
        u = phi.T @ (f * sqrt_m)
        return (phi @ (np.exp(t * lam) * u)) / sqrt_m


def dirichlet_restriction(g: WeightedGraph, domain: Sequence[str]) -> DirichletRestriction:
    """Restrict the generator to ``domain`` with Dirichlet killing outside."""
    dom = list(dict.fromkeys(str(v) for v in domain))
    if not dom:
        raise EmptyDomain("Dirichlet domain must be nonempty")
    idx = np.array(sorted(g.index_of(v) for v in dom))
    dom_sorted = tuple(g.vertices[i] for i in idx)

    W_sub = g.weights[np.ix_(idx, idx)].toarray()
    if len(idx) > 1:
        n_comp, _ = sparse.csgraph.connected_components(
            sparse.csr_matrix(W_sub - np.diag(np.diag(W_sub))), directed=False)
        if n_comp > 1:
            warnings.warn(
                f"Dirichlet domain of {len(idx)} vertices is disconnected "
                f"({n_comp} components)", DisconnectedDomainWarning, stacklevel=2)

    m_sub = g.measure[idx]
    full_deg = g.degree_sums[idx]
    L = W_sub / m_sub[:, None]
    L[np.arange(len(idx)), np.arange(len(idx))] -= full_deg / m_sub
    return DirichletRestriction(host=g, domain=dom_sorted, matrix=L, measure=m_sub)


def heat_mass(r: DirichletRestriction, t: float, x: str) -> float:
    """(e^{t L_D} 1_D)(x), the surviving probability mass at x by time t."""
    if t < 0:
        raise NegativeTime(f"semigroup time must be >= 0, got {t}")
    if x not in r.domain:
        raise VertexOutsideDomain(f"vertex {x!r} is outside the Dirichlet domain")
    pos = r.domain.index(x)
    if t == 0:
        return 1.0
    val = float(r.evolve(t, np.ones(r.size))[pos])
    if val < -1e-8 or val > 1.0 + 1e-8:
        raise AssertionError(f"heat mass {val} escaped [0, 1] beyond roundoff")
    return min(max(val, 0.0), 1.0)


# ---------------------------------------------------------------------------
# exhaustion curves
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MassCurve:
    """(P_t^{D_R} 1)(base) against the exhaustion radius R at fixed t."""

    base: str
    time: float
    radii: tuple[float, ...]
    masses: tuple[float, ...]
    ball_mode: str
    host_vertices: int

    @property
    def deficits(self) -> tuple[float, ...]:
        return tuple(1.0 - m for m in self.masses)

    def to_rows(self) -> list[tuple[float, float, float]]:
        return [(r, m, 1.0 - m) for r, m in zip(self.radii, self.masses)]

    def to_dict(self) -> dict:
        return {"base": self.base, "time": self.time, "ball_mode": self.ball_mode,
                "host_vertices": self.host_vertices,
                "radii": list(self.radii), "masses": list(self.masses),
                "deficits": list(self.deficits)}


def _exhaustion_host(spec: FamilySpec, max_radius: float) -> WeightedGraph:
    """Materialize a family large enough that every ball keeps its outward
    edges inside the host (the Dirichlet diagonal needs the full degree)."""
    pad = int(np.ceil(max_radius)) + 1
    if spec.family == "birth_death":
        n = spec.params[0] if spec.params else 0
        return generate_family(spec.with_params(max(n, pad)))
    if spec.family == "lattice_box":
        d = spec.params[0] if spec.params else 1
        radius = spec.params[1] if len(spec.params) > 1 else 0
        return generate_family(spec.with_params(d, max(radius, pad)))
    return generate_family(spec)


def exhaustion_mass_curve(family, o: str, t: float, radii: Sequence[float],
                          ball_mode: str = "hop") -> MassCurve:
    """Heat mass at o under Dirichlet restrictions to growing balls.

    ``family`` is a FamilySpec (materialized with enough padding) or an
    already-built host graph.  Balls grow by combinatorial hops by default;
    ``ball_mode='intrinsic'`` uses the default intrinsic metric instead.
    """
    radii = [float(r) for r in radii]
    if not radii or any(b <= a for a, b in zip(radii, radii[1:])) or radii[0] <= 0:
        raise ValueError(f"radii must increase and be positive, got {radii}")
    if ball_mode not in ("hop", "intrinsic"):
        raise ValueError(f"ball_mode must be 'hop' or 'intrinsic', got {ball_mode!r}")

    if isinstance(family, FamilySpec):
        host = _exhaustion_host(family, max(radii))
    else:
        host = family

    if ball_mode == "hop":
        dist = None
        oi = host.index_of(o)
    else:
        dist = default_intrinsic_metric(host, o).dist

    masses = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DisconnectedDomainWarning)
        for r in radii:
            if ball_mode == "hop":
                ball = [host.vertices[i] for i in ball_indices(host, oi, int(r))]
            else:
                ball = [host.vertices[i] for i in np.flatnonzero(dist <= r)]
            restriction = dirichlet_restriction(host, ball)
            masses.append(heat_mass(restriction, t, o))
    return MassCurve(base=o, time=float(t), radii=tuple(radii),
                     masses=tuple(masses), ball_mode=ball_mode,
                     host_vertices=host.n)
