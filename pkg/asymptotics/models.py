"""
Results of fitting the tails of computed leaves against the closed-form
decay rate.
"""

from dataclasses import dataclass, field

from integrand.models import ConeParams, LabError


class TailFitError(LabError):
    """Exception raised when a leaf tail cannot be fitted by t + a t^-mu."""

    pass


DEFAULT_WINDOW = (1e2, 1e4)


@dataclass(frozen=True)
class AsymptoticFit:
    """
    Least-squares fit of log(sigma(t) - t) = log a - mu log t on a window.

    mu_theory and rel_err are None when the fit is made without a profile
    to compare with.
    """

    a_hat: float
    mu_hat: float
    window: tuple[float, float]
    residual: float
    samples: int
    mu_theory: float | None = None
    rel_err: float | None = None
    phase_mu: float | None = None

    def within(self, tolerance: float) -> bool:
        return self.rel_err is not None and self.rel_err <= tolerance


@dataclass(frozen=True)
class MaxRate:
    """Supremum of the decay rate over raw power pairs, with a sampled check."""

    params: ConeParams
    mu_max: float
    sampled_exponents: list[tuple[float, float]] = field(default_factory=list)
    sampled_rates: list[float] = field(default_factory=list)

    @property
    def largest_sampled(self) -> float:
        return max(self.sampled_rates, default=float("-inf"))

    @property
    def dominated(self) -> bool:
        return all(rate < self.mu_max + 1e-12 for rate in self.sampled_rates)


@dataclass(frozen=True)
class SupersolutionReport:
    """
    Leaf operator applied to (1 + t^4)^(1/4) with the area profile.

    The barrier is a supersolution when the operator is nonpositive at every
    sample; this is expected for k >= 3 only.
    """

    k: int
    t: list[float]
    values: list[float]

    @property
    def max_value(self) -> float:
        return max(self.values)

    @property
    def is_supersolution(self) -> bool:
        return self.max_value <= 0

    @property
    def required(self) -> bool:
        return self.k >= 3

    @property
    def passed(self) -> bool:
        return self.is_supersolution or not self.required
