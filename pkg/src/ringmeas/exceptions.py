class ValidationError(ValueError):
    """Raised when specs fail validation; carries the full report."""

    def __init__(self, report):
        self.report = report
        super().__init__("; ".join(report.errors) or "invalid specification")


class SupportError(ValueError):
    """Shifted apparatus support leaves the truncated momentum lattice."""


class GridError(ValueError):
    """A q-grid is too coarse for the frequencies that occur."""


class ParityError(ValueError):
    pass


class ZeroProbabilityError(ValueError):
    pass


class NotInImageError(ValueError):
    """A Wigner table could not be inverted within tolerance."""
