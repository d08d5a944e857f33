"""Exception hierarchy shared by all whdbar modules."""


class WhdbarError(Exception):
    """Base class for all library errors."""


# -- variety ---------------------------------------------------------------

class MixedDegree(WhdbarError):
    """Polynomial terms have different weighted degrees."""


class ZeroPolynomial(WhdbarError):
    """Polynomial has no terms."""


class ZeroCoordinate(WhdbarError):
    """Every coordinate of the requested base point vanishes."""


class NewtonDivergence(WhdbarError):
    """Newton correction onto the slice variety did not converge."""


class SingularSlice(WhdbarError):
    """Base point projects onto a singular point of the slice variety."""


class RankDeficient(WhdbarError):
    """A Gram or Jacobian matrix is numerically singular."""


class DimensionUnknown(WhdbarError):
    """Rank test ambiguous and no declared dimension to check against."""


# -- forms -----------------------------------------------------------------

class DuplicateIndex(WhdbarError):
    """Index already contained in the multi-index."""


class DegreeOverflow(WhdbarError):
    """Form degree exceeds the chart dimension."""


class StencilOutOfDomain(WhdbarError):
    """Finite-difference stencil leaves the coefficient domain."""


class ExprError(WhdbarError):
    """Coefficient expression failed to parse or evaluate."""


# -- kernel ----------------------------------------------------------------

class QuadratureNonConvergent(WhdbarError):
    """Refinement ladder exhausted without meeting the target error."""


class SupportOverflow(WhdbarError):
    """Integrand does not vanish at the declared truncation radius."""


class NonIntegrableAtZero(WhdbarError):
    """Kernel exponent makes the integrand non-integrable at u = 0."""


class DeltaOutOfRange(WhdbarError):
    """Weighted-kernel exponent outside [0, 1)."""


# -- solver ----------------------------------------------------------------

class NotACone(WhdbarError):
    """Cone-mode operation on a variety with some weight != 1."""


class NotClosed(WhdbarError):
    """Input form violates the closedness relation beyond tolerance."""


# -- measure / verify ------------------------------------------------------

class AtlasIncomplete(WhdbarError):
    """Sampled region is not covered by the chart atlas."""


class SamplerError(WhdbarError):
    """Measure sampler failed to produce usable points."""


# -- cli -------------------------------------------------------------------

class ConfigError(WhdbarError):
    """Run configuration invalid (missing files, bad values)."""
