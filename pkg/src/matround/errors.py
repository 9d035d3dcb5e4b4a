"""Exception types shared across the package."""


class MatroundError(Exception):
    """Base class for all errors raised by matround."""


class ElementOutOfGround(MatroundError, ValueError):
    pass


class EmptyGround(MatroundError, ValueError):
    pass


class OverlappingGrounds(MatroundError, ValueError):
    pass


class WrongPadSize(MatroundError, ValueError):
    pass


class NotAMatroid(MatroundError, ValueError):
    """An explicit independence family violates a matroid axiom."""


class GroundTooLarge(MatroundError, ValueError):
    pass


class LoadViolation(MatroundError, ValueError):
    """The q-values overload some element (sum of 1/q over its grounds exceeds 1)."""

    def __init__(self, report):
        self.report = report
        items = ", ".join(f"{e}: {s}" for e, s in sorted(report.items()))
        super().__init__(f"load property violated at {items}")


class Infeasible(MatroundError):
    """The LP relaxation has no feasible point."""


class InternalError(MatroundError, RuntimeError):
    """A guaranteed invariant failed; this indicates a bug, not bad input."""


class NoDroppableConstraint(InternalError):
    pass


class FractionalVertex(InternalError):
    pass


class NotPartitionable(MatroundError):
    """No partition into the requested number of independent sets exists."""

    def __init__(self, element, parts):
        self.element = element
        self.parts = parts
        super().__init__(f"element {element} cannot be placed in any part")
