"""Exception hierarchy shared by all modules.

Validation problems (bad geometry, budgets, file schemas, config fields) derive
from ``ValidationError``; failures of the numerical models at otherwise valid
inputs derive from ``NumericalError``.
"""


class PgmError(Exception):
    """Base class for every error raised by the toolkit."""


class ValidationError(PgmError, ValueError):
    pass


class NumericalError(PgmError, ArithmeticError):
    pass


class GeometryError(ValidationError):
    """Unit-cell or array geometry outside the model's domain."""


class CoverageError(ValidationError):
    """A reflection provider was queried outside its frequency range or type set."""


class BudgetError(ValidationError):
    """Weight counts do not match the number of cells available."""


class TableError(ValidationError):
    """Malformed phase table (schema, ordering or rectangularity)."""


class PassivityError(TableError):
    """A tabulated reflection coefficient has magnitude above one."""


class RaggedGridError(TableError):
    """Cell types in a phase table do not share one frequency grid."""


class SlabResonanceError(NumericalError):
    """Grounded-slab impedance evaluated on its tangent pole."""


class NoCrossingError(NumericalError):
    """No 0-degree reflection-phase crossing inside the search interval."""
