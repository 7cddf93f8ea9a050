"""
Eigenvalues of the form (alpha + beta * sqrt(delta)) / 2.
"""
import math
from dataclasses import dataclass


@dataclass(frozen=True, order=True)
class QuadraticEigenvalue:
    alpha: int
    beta: int
    delta: int = 1

    def __post_init__(self):
        if self.delta < 1:
            raise ValueError(f"delta must be a positive integer, got {self.delta}")

    @property
    def value(self) -> float:
        return (self.alpha + self.beta * math.sqrt(self.delta)) / 2

    def gap_to(self, other: "QuadraticEigenvalue") -> int:
        """Half the beta difference; the integer multiple of sqrt(delta) separating the two."""
        if (other.alpha, other.delta) != (self.alpha, self.delta):
            raise ValueError("Eigenvalues do not share alpha and delta.")
        diff = other.beta - self.beta
        if diff % 2:
            raise ValueError("Beta difference is odd; gap is not an integer multiple.")
        return diff // 2

    def __str__(self) -> str:
        return f"({self.alpha}{self.beta:+d}*sqrt({self.delta}))/2"
