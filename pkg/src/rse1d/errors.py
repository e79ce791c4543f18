"""Exception types shared across the solver modules."""


class Rse1dError(Exception):
    """Base class for all rse1d errors."""


class NoConvergence(Rse1dError):
    """Newton iteration failed to reach the requested residual.

    Carries the last iterate and its residual so callers can decide
    whether to retry from a different seed.
    """

    def __init__(self, k_last, residual, message=None):
        self.k_last = k_last
        self.residual = residual
        super().__init__(
            message
            or f"Newton did not converge: last iterate {k_last}, residual {residual:.3e}"
        )


class ContourTooClose(Rse1dError):
    """A root sits too close to the winding contour even after nudging."""


class NonIntegerWinding(Rse1dError):
    """Contour quadrature of the winding integral is not close to an integer."""

    def __init__(self, value, nodes):
        self.value = value
        self.nodes = nodes
        super().__init__(
            f"winding integral {value} not within 0.25 of an integer at {nodes} nodes"
        )


class IncompleteBasis(Rse1dError):
    """Root search found fewer states than the argument-principle count."""

    def __init__(self, found, expected, parity):
        self.found = found
        self.expected = expected
        self.parity = parity
        super().__init__(
            f"{parity} basis incomplete: found {found} roots, winding count {expected}"
        )


class ZeroWavenumber(Rse1dError):
    """Operation undefined at (numerically) zero wavenumber."""


class DegenerateNorm(Rse1dError):
    """Normalization radicand vanishes; the state cannot be Siegert-normalized."""


class SpikeOutOfRange(Rse1dError):
    """Perturbing delta spike lies outside the open interval (-a, a)."""


class EigFailure(Rse1dError):
    """Dense eigensolver did not converge."""


class NearPole(Rse1dError):
    """Secular function evaluated too close to one of its poles."""


class ConfigError(Rse1dError):
    """Scenario configuration is malformed; message names the offending key."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")


class SolverError(Rse1dError):
    """A pipeline task failed; wraps the underlying solver exception."""

    def __init__(self, task, cause):
        self.task = task
        self.cause = cause
        super().__init__(f"task '{task}' failed: {cause}")
