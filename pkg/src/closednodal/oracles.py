"""Reference Dirichlet eigenvalues for balls and spherical shells in three dimensions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

__all__ = [
    "OracleValue",
    "RWindow",
    "ball_eigenvalue",
    "choose_R_window",
    "first_bessel_j1_zero",
    "shell_ground_eigenvalue",
]


@dataclass(frozen=True)
class OracleValue:
    value: float
    method: str  # "closed-form" | "bisection"
    bracket_width: float = 0.0


class RWindow(NamedTuple):
    """Open interval of outer radii for which the shell ground state sits
    strictly between the first two eigenvalues of the inner ball."""

    lower: float
    upper: float

    def __contains__(self, R: object) -> bool:
        return isinstance(R, (int, float)) and self.lower < R < self.upper


def _j1_numerator(x: float) -> float:
    # sin x - x cos x vanishes exactly where tan x = x, without the poles of tan
    return math.sin(x) - x * math.cos(x)


def first_bessel_j1_zero() -> tuple[float, float, float]:
    """First positive root of ``tan x = x`` by bisection.

    Returns ``(x, lo, hi)`` where ``[lo, hi]`` is the final bracket.
    """
    lo, hi = math.pi / 2 + 0.1, 1.49 * math.pi
    f_lo = _j1_numerator(lo)
    if f_lo * _j1_numerator(hi) >= 0:
        raise RuntimeError("bisection bracket does not straddle a root")
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = _j1_numerator(mid)
        if f_mid == 0.0:
            lo = hi = mid
            break
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi), lo, hi


def ball_eigenvalue(R: float, mode: str = "ground") -> OracleValue:
    """Dirichlet eigenvalue of the ball of radius ``R`` in R^3.

    ``mode="ground"`` gives pi^2/R^2; ``mode="first-excited"`` gives the
    threefold l=1 eigenvalue x^2/R^2 with x the first zero of j_1.
    """
    if R <= 0:
        raise ValueError("radius must be positive")
    if mode == "ground":
        return OracleValue(math.pi**2 / R**2, "closed-form")
    if mode == "first-excited":
        x, lo, hi = first_bessel_j1_zero()
        return OracleValue(x * x / R**2, "bisection", (hi * hi - lo * lo) / R**2)
    raise ValueError(f"unknown mode {mode!r}")


def shell_ground_eigenvalue(R1: float, R: float) -> OracleValue:
    """Ground state of the shell ``R1 < |x| < R``; the radial mode is
    ``sin(k (r - R1)) / r`` so the eigenvalue is ``(pi / (R - R1))^2``."""
    if not 0 < R1 < R:
        raise ValueError("need 0 < R1 < R")
    return OracleValue(math.pi**2 / (R - R1) ** 2, "closed-form")


def choose_R_window(R1: float = 1.0) -> RWindow:
    """Outer radii R with lambda_1(B_R1) < lambda_1(A_R1,R) < lambda_2(B_R1)."""
    if R1 <= 0:
        raise ValueError("R1 must be positive")
    x, _, _ = first_bessel_j1_zero()
    return RWindow(R1 + math.pi * R1 / x, 2.0 * R1)
