class DomainError(ValueError):
    """Parameter outside the admissible range of a formula or sampler."""


class AccuracyError(ArithmeticError):
    """A numerical estimate could not be certified to the requested tolerance."""


class ResolutionError(AccuracyError):
    """Grid or quadrature too coarse for the quantity being computed."""


class SingularityError(ArithmeticError):
    """A singular kernel was evaluated at its singular point."""


class CollisionError(SingularityError):
    def __init__(self, pairs):
        self.pairs = [tuple(int(i) for i in p) for p in pairs]
        super().__init__(f"coincident particles at index pairs {self.pairs[:10]}")


class BlowUpError(ArithmeticError):
    def __init__(self, time: float, message: str = ""):
        self.time = time
        super().__init__(message or f"blow-up detected at t={time:g}")


class CFLError(ValueError):
    """Explicit advection step violates the CFL restriction."""


class MassDriftError(AccuracyError):
    """Mass conservation tolerance breached."""


class SizeError(ValueError):
    """Problem size above an exact solver's cap."""


class ConfigError(ValueError):
    """Invalid experiment configuration."""
