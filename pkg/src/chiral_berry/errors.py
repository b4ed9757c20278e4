"""Exception and warning types shared across the package."""


class PoleSingularity(ValueError):
    """Evaluation requested inside the excluded polar caps, where the
    tangent frame (and hence the polarization vectors) is undefined."""


class NotOrthogonal(ValueError):
    """Transformation matrix is not orthogonal to working precision."""


class OpenPath(ValueError):
    """Loop operations require a closed path."""


class QuadratureUnderResolved(UserWarning):
    """Quadrature rule degree is below the exactness bound for the model."""
