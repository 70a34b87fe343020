"""Exception types raised by the engines.

The CLI prints the class name of any of these on stderr and exits with
status 1, so names are part of the external interface.
"""


class QCAError(Exception):
    """Base class for all engine errors."""


class SingularIntegral(QCAError):
    """An oscillatory Gaussian integral with vanishing quadratic coefficient."""


class SingularReduction(QCAError):
    """Zero pivot met while eliminating a variable from a quadratic form."""

    def __init__(self, label, pivot):
        self.label = label
        self.pivot = pivot
        super().__init__(f"zero pivot {pivot!r} for variable {label!r}")


class CausticError(QCAError):
    """Kernel requested at a focal point, where sin(N*phi) vanishes."""


class BoundaryError(QCAError):
    """Stencil reached past the edge of an open lattice."""


class EmptyHistory(QCAError):
    """Rendering requested for a history with no rows."""


class EnumerationBudgetExceeded(QCAError):
    def __init__(self, required, budget):
        self.required = required
        self.budget = budget
        super().__init__(f"{required} configurations exceed budget {budget}")


class GeneratorBudgetExceeded(QCAError):
    def __init__(self, required, budget):
        self.required = required
        self.budget = budget
        super().__init__(f"{required} Grassmann generators exceed budget {budget}")


class DimensionBudgetExceeded(QCAError):
    def __init__(self, sites, budget):
        self.sites = sites
        self.budget = budget
        super().__init__(f"{sites} sites exceed dense budget of {budget}")


class HermiticityError(QCAError):
    """Matrix handed to a unitary evolution is not Hermitian."""
