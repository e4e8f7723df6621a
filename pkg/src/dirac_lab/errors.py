"""Exception types shared by the library and the command line."""


class ValidationError(ValueError):
    """Input is malformed or outside the admissible class."""


class NumericalError(ArithmeticError):
    """A computation broke down (singular block, lost positivity, ...)."""


class InadmissibleDataError(NumericalError):
    """Taylor data whose structured matrix is not positive definite.

    ``level`` is the first index ``k`` at which ``S_k`` lost positivity and
    ``min_eig`` its smallest eigenvalue.
    """

    def __init__(self, level, min_eig):
        self.level = level
        self.min_eig = min_eig
        super().__init__(f"S_{level} is not positive definite (min eigenvalue {min_eig:.3e})")
