"""Exception hierarchy shared by all modules."""


class SecureDFilterError(Exception):
    """Base class for all library errors."""


class ConfigError(SecureDFilterError):
    """Malformed or inconsistent experiment configuration."""


class NotConnected(SecureDFilterError):
    """Graph has no spectral gap (lambda_2 <= tolerance)."""


class SpectralDisagreement(SecureDFilterError):
    """Eigenvalue-based and traversal-based connectivity checks disagree.

    Indicates eigensolver inaccuracy rather than a property of the input.
    """


class ZeroRow(SecureDFilterError):
    """An observation row is zero but the sensor was not declared observation-free."""


class MissingFeedback(SecureDFilterError):
    """The stealth attack strategy needs per-sensor prior estimates."""


class UnknownScenario(SecureDFilterError):
    """Requested attack scenario name is not in the built-in library."""


class UnknownFigure(SecureDFilterError):
    """Requested reproduction target is not in the built-in library."""


class DimensionMismatch(SecureDFilterError):
    """Array shapes are inconsistent with the declared system dimensions."""


class CombinatorialBlowup(SecureDFilterError):
    """Subset enumeration would exceed the configured cap."""

    def __init__(self, count: int, cap: int):
        self.count = count
        self.cap = cap
        super().__init__(
            f"enumeration needs {count} subsets, above the cap {cap}; "
            "use the scalar fast path (n = 1) or raise the cap explicitly"
        )


class DivergentGeometry(SecureDFilterError):
    """||A|| * gamma^L >= 1, so the disagreement bound p(t) has no finite limit."""


class SearchExhausted(SecureDFilterError):
    """Constructive feasibility search hit its doubling budget without a witness."""


class NotInGamma(SecureDFilterError):
    """Anchor time t0 is not in the non-increase set of the bound recursion."""


class NonMonotone(SecureDFilterError):
    """Sampled violation of the monotone-map precondition of the scalar recursion."""


class GammaBarEmpty(SecureDFilterError):
    """The post-detection bound recursion never decreased over the computed horizon."""


class BudgetExceeded(SecureDFilterError):
    """More sensors were flagged than the attack budget s allows.

    Signals a scenario that violates the fixed-attacked-set assumption,
    not a bug in the detector.
    """


class CertificateFalse(SecureDFilterError):
    """The 2x2 coupling matrix is not Schur stable; convergence test skipped."""


class NotScalar(SecureDFilterError):
    """The trimmed-consensus baseline only supports scalar states."""


class InvariantViolation(SecureDFilterError):
    """A runtime-checked theoretical bound failed along a simulated trajectory."""

    def __init__(self, message: str, *, run: int | None = None,
                 t: int | None = None, sensor: int | None = None):
        self.run = run
        self.t = t
        self.sensor = sensor
        where = ", ".join(
            f"{k}={v}" for k, v in (("run", run), ("t", t), ("sensor", sensor))
            if v is not None
        )
        super().__init__(f"{message}" + (f" [{where}]" if where else ""))
