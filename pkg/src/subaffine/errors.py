"""Exception hierarchy shared by all subaffine modules.

Three families matter to callers: validation errors (bad inputs or
configuration), budget errors (a computation would exceed its word or depth
budget), and numeric errors (a computation ran but lost its footing).  The
command line maps these to exit codes 2, 3 and 4.
"""


class SubaffineError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(SubaffineError):
    """Invalid input, configuration, or precondition."""


class BudgetError(SubaffineError):
    """A depth or word budget would be exceeded."""


class NumericError(SubaffineError):
    """A numerical computation failed beyond recovery."""


# -- symbolic ----------------------------------------------------------------

class EmptySubshift(ValidationError):
    """Pruning removed every state: the described subshift is empty."""


class LetterOutOfRange(ValidationError):
    """A word references a letter outside [0, kappa)."""


class BadSubshift(ValidationError):
    """Malformed subshift description (bad forbidden words)."""


# -- linalg ------------------------------------------------------------------

class SingularMatrix(NumericError):
    """Smallest eigenvalue of A^T A fell below 1e-300 after scaling."""


class NegativeT(ValidationError):
    """The singular value function requires t >= 0."""


class DimensionMismatch(ValidationError):
    """Operation requires a specific ambient dimension."""


class NonContractive(ValidationError):
    """A matrix violates the contractivity requirement alpha_1 < 1."""


# -- pressure ----------------------------------------------------------------

class DepthBudgetExceeded(BudgetError):
    """Enumerating K_n would exceed the configured word budget."""


class NotDiagonal(ValidationError):
    """Closed-form diagonal pressure requires diagonal matrices."""


class TOutOfRange(ValidationError):
    """Parameter t outside the validity range of a closed form."""


class IntegerCrossing(ValidationError):
    """A finite-difference step would cross an integer, where the
    singular value function has a kink."""


# -- measures ----------------------------------------------------------------

class DepthExceeded(ValidationError):
    """Cylinder query deeper than the stored table."""


class WindowOverrun(ValidationError):
    """Marginal depth k exceeds the construction depth n."""


# -- geometry ----------------------------------------------------------------

class TooFewPoints(ValidationError):
    """Operation needs more points than the cloud provides."""


class ScaleTooFine(ValidationError):
    """Requested box-count scale is below the cloud's resolution."""


# -- cli ---------------------------------------------------------------------

class MalformedConfig(ValidationError):
    """Configuration JSON is malformed or misses required fields."""
