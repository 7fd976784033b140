"""Mean-field free energy of the nested uniform antiferromagnet.

The low-temperature, large-N free-energy density of the level-C nested model
with driver amplitude A, problem amplitude B and penalty gamma is

    betaF(m) = C^2 * beta * ( sqrt[(A/C)^2 + (2 gamma B m)^2] - gamma B m^2 ),

with mean-field magnetization m. Two rescalings are visible directly in this
expression: the driver enters as A/C, and the overall prefactor is C^2 * beta,
i.e. nesting acts like an inverse-temperature boost beta -> C^2 beta. The
finite-N form replaces gamma by gamma + J/N.

``betaF`` above is the exponent of the dominant partition-function weight
(Z ~ e^{N betaF} at the dominating m), so the magnetization that the system
selects is the one maximizing this expression, equivalently minimizing the
conventionally signed free energy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class MeanFieldPoint:
    m: float
    A: float
    B: float
    gamma: float
    C: int
    beta: float
    J: float = 1.0
    N: int | None = None

    def __post_init__(self):
        if abs(self.m) > 1.0:
            raise DomainError("magnetization must lie in [-1, 1]")
        if not self.beta > 0:
            raise DomainError("beta must be positive")
        if self.C < 1:
            raise DomainError("nesting level must be >= 1")


def _betaf(m, A, B, gamma_eff, C, beta):
    return C * C * beta * (
        np.sqrt((A / C) ** 2 + (2.0 * gamma_eff * B * m) ** 2) - gamma_eff * B * m * m
    )


def beta_free_energy(pt: MeanFieldPoint, finite_n: bool = False) -> float:
    """Dimensionless betaF at the given point.

    ``finite_n`` selects the finite-size form with gamma -> gamma + J/N.
    """
    gamma_eff = pt.gamma
    if finite_n:
        if not pt.N:
            raise DomainError("finite_n form needs N")
        gamma_eff = pt.gamma + pt.J / pt.N
    return float(_betaf(pt.m, pt.A, pt.B, gamma_eff, pt.C, pt.beta))


def log_partition_large_beta(pt: MeanFieldPoint) -> float:
    """Low-temperature log-partition exponent, finite-N form.

    Equals ``N * beta_free_energy(pt, finite_n=True)`` exactly; the J/N
    correction vanishes in the thermodynamic limit.
    """
    if not pt.N:
        raise DomainError("the partition exponent needs N")
    lam = pt.gamma + pt.J / pt.N
    inner = (
        np.sqrt((pt.C * pt.A) ** 2 + (2.0 * pt.B * lam * pt.C ** 2 * pt.m) ** 2)
        - pt.B * lam * pt.C ** 2 * pt.m ** 2
    )
    return float(pt.N * pt.beta * inner)


def minimize_magnetization(
    A: float,
    B: float,
    gamma: float,
    beta: float,
    C: int,
    J: float = 1.0,
    N: int | None = None,
    finite_n: bool = False,
    tol: float = 1e-10,
) -> float:
    """Magnetization in [0, 1] dominating the partition function.

    This is the minimizer of the (conventionally signed) free energy, i.e.
    the maximizer of the exponent returned by ``beta_free_energy``; by the
    m -> -m symmetry the negative of the result is equally dominant. A grid
    scan picks the global basin (ties resolve toward smaller m, and a flat
    landscape returns 0), then golden-section refinement reaches ``tol``.
    """
    if B < 0:
        raise DomainError("B must be >= 0")
    gamma_eff = gamma
    if finite_n:
        if not N:
            raise DomainError("finite_n form needs N")
        gamma_eff = gamma + J / N

    def f(m):
        return _betaf(m, A, B, gamma_eff, C, beta)

    grid = np.linspace(0.0, 1.0, 4097)
    vals = f(grid)
    span = float(vals.max() - vals.min())
    if span <= 1e-14 * max(1.0, float(np.abs(vals).max())):
        return 0.0
    best = int(np.argmax(vals))  # ties: argmax returns the smallest index
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, grid.size - 1)]
    # golden-section maximization on [lo, hi]
    a, b = lo, hi
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
    return float(0.5 * (a + b))


def free_energy_grid(
    A_of_s,
    B_of_s,
    gamma: float,
    beta: float,
    C: int,
    n_m: int = 101,
    n_s: int = 51,
) -> list[tuple[float, float, float, float, float]]:
    """Tabulate betaF over an (m, s) grid; rows are (m, s, A, B, betaF)."""
    rows = []
    for s in np.linspace(0.0, 1.0, n_s):
        A, B = float(A_of_s(s)), float(B_of_s(s))
        for m in np.linspace(0.0, 1.0, n_m):
            rows.append((float(m), float(s), A, B, float(_betaf(m, A, B, gamma, C, beta))))
    return rows
