"""Exception types shared across the planning pipeline."""


class ValidationError(ValueError):
    """A scene or parameter set violates a feasibility constraint.

    ``constraint`` carries a stable token naming the violated rule
    (e.g. ``"separation"`` or ``"altitude-window"``) for diagnostics.
    """

    def __init__(self, constraint: str, message: str):
        super().__init__(f"[{constraint}] {message}")
        self.constraint = constraint


class InfeasibleError(RuntimeError):
    """A planning stage has no feasible solution for the given inputs."""
