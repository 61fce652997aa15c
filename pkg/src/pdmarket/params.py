"""Parameter pair (alpha, theta) of the two-parameter Poisson-Dirichlet family.

Two admissible regimes:

* infinite-dimensional: ``0 <= alpha < 1`` and ``theta > -alpha``;
* finite symmetric Dirichlet: ``alpha < 0`` and ``theta = m * (-alpha)``
  for a positive integer ``m`` (the number of Dirichlet components).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainError

_M_TOL = 1e-9


@dataclass(frozen=True)
class PDParams:
    alpha: float
    theta: float

    def __post_init__(self):
        a, t = float(self.alpha), float(self.theta)
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "theta", t)
        if 0.0 <= a < 1.0:
            if not t > -a:
                raise DomainError(
                    f"theta must exceed -alpha; got alpha={a}, theta={t}"
                )
        elif a < 0.0:
            m = t / (-a)
            if not (t > 0 and abs(m - round(m)) <= _M_TOL * max(1.0, m)):
                raise DomainError(
                    "negative alpha requires theta = m*(-alpha) for a "
                    f"positive integer m; got alpha={a}, theta={t}"
                )
        else:
            raise DomainError(f"alpha must be < 1; got {a}")

    @property
    def is_finite(self) -> bool:
        """True in the finite (symmetric Dirichlet) regime."""
        return self.alpha < 0.0

    @property
    def m(self) -> int:
        """Number of components in the finite regime."""
        if not self.is_finite:
            raise DomainError("m is defined only for alpha < 0")
        return round(self.theta / (-self.alpha))
