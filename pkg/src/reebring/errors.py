"""Exception hierarchy shared by the engine, the oracle and the CLI."""


class ReebError(Exception):
    """Base class for every engine-level failure."""


class PreconditionViolated(ReebError):
    """An operation was called outside the hypotheses it is proved under.

    ``hypothesis`` is a short machine-readable name of the failed check.
    """

    def __init__(self, hypothesis: str, message: str = ""):
        self.hypothesis = hypothesis
        self.message = message or hypothesis
        super().__init__(f"{hypothesis}: {self.message}" if message else hypothesis)


class NotUfg(PreconditionViolated):
    def __init__(self, message: str = "element is not a unit free generator"):
        super().__init__("NotUfg", message)


class TorsionKunneth(PreconditionViolated):
    def __init__(self, message: str = "Kunneth product with torsion over a non-field"):
        super().__init__("TorsionKunneth", message)


class NoEligibleC0(PreconditionViolated):
    def __init__(self, message: str = "no q-marked UFG of the required degree"):
        super().__init__("NoEligibleC0", message)


class DegreeMismatch(PreconditionViolated):
    def __init__(self, message: str):
        super().__init__("DegreeMismatch", message)


class BudgetExceeded(PreconditionViolated):
    def __init__(self, message: str):
        super().__init__("BudgetExceeded", message)


class StepError(ReebError):
    """Wraps an engine error with the index of the script step that raised it."""

    def __init__(self, step_index: int, error: ReebError):
        self.step_index = step_index
        self.error = error
        self.hypothesis = getattr(error, "hypothesis", type(error).__name__)
        super().__init__(f"step {step_index}: {error}")
