"""Exception types shared across the package."""


class SizeLimitError(ValueError):
    """Requested Hilbert space exceeds the configured dimension cap."""


class ConfigError(ValueError):
    """Invalid scenario configuration; carries the offending field path."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class SchemaError(ValueError):
    """Input file carries a missing or incompatible schema version."""


class NumericalAbort(RuntimeError):
    """An integrator hit NaN/Inf amplitudes or a positivity violation.

    Attributes carry enough context (time, step, label) to reproduce the run.
    """

    def __init__(self, message: str, *, t: float | None = None,
                 step: int | None = None, label: str = ""):
        self.t = t
        self.step = step
        self.label = label
        detail = []
        if label:
            detail.append(label)
        if t is not None:
            detail.append(f"t={t:.6g}")
        if step is not None:
            detail.append(f"step={step}")
        suffix = f" ({', '.join(detail)})" if detail else ""
        super().__init__(message + suffix)
