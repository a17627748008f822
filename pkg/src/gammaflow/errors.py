"""Exception types shared across the package."""


class GammaflowError(Exception):
    """Base class for all errors raised by this package."""


class GraphConstructionError(GammaflowError, ValueError):
    """Invalid data supplied while building a weighted graph."""


class NonPositiveWeight(GraphConstructionError):
    """A vertex measure or edge weight is zero, negative, or not finite."""


class AsymmetricInput(GraphConstructionError):
    """Both directions of an edge were given explicitly with different weights."""


class DuplicateEdge(GraphConstructionError):
    """The same directed edge was given twice with conflicting weights."""


class Disconnected(GraphConstructionError):
    """The input graph is not connected."""


class UnknownVertex(GammaflowError, LookupError):
    """A vertex identifier does not belong to the graph."""


class InvalidSpec(GammaflowError, ValueError):
    """A family specification has invalid parameters."""


class IsolatedVertex(GammaflowError, ValueError):
    """Curvature is undefined at a vertex without neighbors."""


class NoLowerBound(GammaflowError, RuntimeError):
    """Downward doubling hit the configured floor without a feasible bracket.

    Diagnostic outcome: the iterated form is indefinite on the kernel of the
    gradient form beyond tolerance, so no finite curvature was certified.
    """


class BadRadii(GammaflowError, ValueError):
    """Cut-off radii must satisfy 0 < r < R."""


class EmptyDomain(GammaflowError, ValueError):
    """A Dirichlet restriction needs a nonempty domain."""


class DisconnectedDomainWarning(UserWarning):
    """The induced Dirichlet domain is disconnected; analysis proceeds anyway."""


class TooLargeForSpectral(GammaflowError, ValueError):
    """Graph exceeds the dense-eigendecomposition guideline; force ode mode."""


class NegativeTime(GammaflowError, ValueError):
    """Semigroup evaluation requires t >= 0."""


class VertexOutsideDomain(GammaflowError, ValueError):
    """Heat mass can only be evaluated at vertices of the Dirichlet domain."""


class InconclusiveTail(GammaflowError, RuntimeError):
    """Partial sums neither clearly converge nor diverge under the tail model."""


class IntegrationError(GammaflowError, RuntimeError):
    """The ODE backend failed, typically by step-size underflow on stiff input."""
