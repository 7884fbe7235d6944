"""Exception types shared across the package."""


class CapabilityError(RuntimeError):
    """Requested size exceeds what an exact method is allowed to handle."""


class ResonanceError(ZeroDivisionError):
    """Drive detuning sits on a motional mode frequency."""

    def __init__(self, mode: int, message: str | None = None):
        self.mode = mode
        super().__init__(message or f"beatnote detuning is resonant with mode {mode}")


class TruncationError(RuntimeError):
    """Two-kink domain-length cutoff too small for the requested eigenvectors."""

    def __init__(self, weight: float, l_max: int):
        self.weight = weight
        self.l_max = l_max
        super().__init__(
            f"eigenvector weight {weight:.3e} at l_max={l_max} exceeds 1e-8; raise l_max"
        )


class EvolutionError(RuntimeError):
    """Time stepper could not meet its accuracy target."""


class ConfigError(ValueError):
    """Scenario configuration failed validation."""
