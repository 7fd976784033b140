import numpy as np
import pytest

from nqac.errors import DomainError
from nqac.meanfield import (
    MeanFieldPoint,
    beta_free_energy,
    free_energy_grid,
    log_partition_large_beta,
    minimize_magnetization,
)


def test_zero_magnetization_value():
    pt = MeanFieldPoint(m=0.0, A=1.0, B=0.7, gamma=0.4, C=3, beta=2.0)
    # only the driver term survives: C^2 beta A / C = C beta A = 6
    assert beta_free_energy(pt) == pytest.approx(6.0)


def test_even_in_magnetization():
    rng = np.random.default_rng(0)
    for _ in range(50):
        m = float(rng.uniform(0, 1))
        kw = dict(
            A=float(rng.uniform(0, 3)),
            B=float(rng.uniform(0, 3)),
            gamma=float(rng.uniform(0.05, 2)),
            C=int(rng.integers(1, 6)),
            beta=float(rng.uniform(0.1, 5)),
        )
        up = beta_free_energy(MeanFieldPoint(m=m, **kw))
        dn = beta_free_energy(MeanFieldPoint(m=-m, **kw))
        assert up == pytest.approx(dn, rel=1e-14)


def test_rescaling_identity_random_draws():
    rng = np.random.default_rng(1)
    for _ in range(10_000):
        m = float(rng.uniform(-1, 1))
        A = float(rng.uniform(0, 4))
        B = float(rng.uniform(0, 4))
        gamma = float(rng.uniform(0.01, 3))
        beta = float(rng.uniform(0.05, 6))
        C = int(rng.integers(1, 9))
        full = beta_free_energy(MeanFieldPoint(m=m, A=A, B=B, gamma=gamma, C=C, beta=beta))
        unit = beta_free_energy(MeanFieldPoint(m=m, A=A / C, B=B, gamma=gamma, C=1, beta=beta))
        assert full == pytest.approx(C * C * unit, rel=1e-12, abs=1e-300)


def test_minimizer_flat_when_B_zero():
    assert minimize_magnetization(A=1.0, B=0.0, gamma=0.5, beta=2.0, C=2) == 0.0


def test_minimizer_saturates_when_driver_off():
    # the maximum is quadratically flat, so localization is limited to
    # ~sqrt(machine eps); 1e-6 matches the module's grid-agreement guarantee
    m = minimize_magnetization(A=0.0, B=1.0, gamma=0.5, beta=4.0, C=2)
    assert m == pytest.approx(1.0, abs=1e-6)


def test_minimizer_driver_dominated():
    m = minimize_magnetization(A=50.0, B=0.1, gamma=0.3, beta=1.0, C=2)
    assert m == pytest.approx(0.0, abs=1e-6)


def test_minimizer_against_dense_grid():
    rng = np.random.default_rng(7)
    grid = np.linspace(0.0, 1.0, 1_000_001)
    for _ in range(100):
        A = float(rng.uniform(0, 2))
        B = float(rng.uniform(0, 2))
        gamma = float(rng.uniform(0.05, 2))
        beta = float(rng.uniform(0.2, 4))
        C = int(rng.integers(1, 5))
        m_star = minimize_magnetization(A=A, B=B, gamma=gamma, beta=beta, C=C)
        vals = C * C * beta * (
            np.sqrt((A / C) ** 2 + (2 * gamma * B * grid) ** 2) - gamma * B * grid**2
        )
        m_grid = grid[int(np.argmax(vals))]
        assert abs(m_star - m_grid) < 1e-6


def test_log_partition_trivial_value():
    pt = MeanFieldPoint(m=0.0, A=1.0, B=0.0, gamma=0.5, C=1, beta=1.0, N=4)
    assert log_partition_large_beta(pt) == pytest.approx(4.0)


def test_log_partition_consistent_with_finite_n_free_energy():
    rng = np.random.default_rng(9)
    for _ in range(200):
        pt = MeanFieldPoint(
            m=float(rng.uniform(-1, 1)),
            A=float(rng.uniform(0, 3)),
            B=float(rng.uniform(0, 3)),
            gamma=float(rng.uniform(0.05, 2)),
            C=int(rng.integers(1, 6)),
            beta=float(rng.uniform(0.1, 4)),
            J=float(rng.uniform(0.2, 2)),
            N=int(rng.integers(2, 40)),
        )
        lhs = log_partition_large_beta(pt)
        rhs = pt.N * beta_free_energy(pt, finite_n=True)
        assert lhs == pytest.approx(rhs, rel=1e-12)


def test_finite_size_correction_vanishes():
    kw = dict(m=0.4, A=0.8, B=1.2, gamma=0.6, C=3, beta=2.0, J=1.0)
    limit = beta_free_energy(MeanFieldPoint(N=None, **kw))
    at_n = beta_free_energy(MeanFieldPoint(N=1000, **kw), finite_n=True)
    assert abs(at_n - limit) < 0.02  # O(1/N) at N = 1e3
    at_bigger = beta_free_energy(MeanFieldPoint(N=10_000, **kw), finite_n=True)
    assert abs(at_bigger - limit) < abs(at_n - limit)


def test_point_validation():
    with pytest.raises(DomainError):
        MeanFieldPoint(m=1.5, A=1, B=1, gamma=0.5, C=1, beta=1)
    with pytest.raises(DomainError):
        MeanFieldPoint(m=0.0, A=1, B=1, gamma=0.5, C=0, beta=1)
    with pytest.raises(DomainError):
        MeanFieldPoint(m=0.0, A=1, B=1, gamma=0.5, C=1, beta=0.0)
    with pytest.raises(DomainError):
        beta_free_energy(
            MeanFieldPoint(m=0.0, A=1, B=1, gamma=0.5, C=1, beta=1.0), finite_n=True
        )


def test_free_energy_grid_rows():
    rows = free_energy_grid(lambda s: 1 - s, lambda s: s, 0.5, 2.0, 2, n_m=5, n_s=3)
    assert len(rows) == 15
    m, s, A, B, bf = rows[0]
    assert (m, s) == (0.0, 0.0)
    assert bf == pytest.approx(2 * 2 * 2 * (1.0 / 2))
