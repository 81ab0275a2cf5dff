"""Exception hierarchy shared by all modules."""


class SymSpecError(Exception):
    """Base class for all errors raised by symspec."""


class InvalidInput(SymSpecError, ValueError):
    pass


class NotASubalgebra(SymSpecError):
    pass


class UnsupportedSpace(SymSpecError):
    pass


class CalibrationFailure(SymSpecError):
    pass


class UnsupportedHypersurface(SymSpecError):
    pass


class RankTooSmall(SymSpecError):
    pass


class BackendMismatch(SymSpecError):
    pass


class TopologyMismatch(SymSpecError):
    pass


class HypothesisNotMet(SymSpecError):
    """A theorem hypothesis does not hold; ``hypothesis`` names which one."""

    def __init__(self, hypothesis: str, detail: str = ""):
        self.hypothesis = hypothesis
        self.detail = detail
        msg = f"hypothesis not met: {hypothesis}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)
