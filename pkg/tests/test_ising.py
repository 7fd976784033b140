import numpy as np
import pytest

from nqac.errors import CapacityExceeded, DimensionMismatch, DomainError
from nqac.instances import INSTANCE_NAMES, load_instance
from nqac.ising import (
    IsingProblem,
    apply_gauge,
    brute_force_ground,
    energies,
    energy,
    load_problem,
    problem_from_dict,
    rescale,
    save_problem,
)


def test_energy_k4_hand_sum(k4):
    # pair terms for (+,+,-,-): (0,1)=+1, (0,2)=(0,3)=(1,2)=(1,3)=-1, (2,3)=+1
    s = np.array([1, 1, -1, -1])
    assert energy(k4, s) == pytest.approx(-2.0)


def test_energy_linear_in_alpha(k4):
    s = np.array([1, -1, 1, -1])
    assert energy(rescale(k4, 0.5), s) == pytest.approx(0.5 * energy(k4, s))


def test_energy_single_spin_field():
    p = IsingProblem.from_couplings(1, h={0: 0.7})
    assert energy(p, [1]) == pytest.approx(0.7)


def test_energy_dimension_error(k4):
    with pytest.raises(DimensionMismatch):
        energy(k4, [1, 1, -1])


def test_energy_rejects_non_spins(k4):
    with pytest.raises(DomainError):
        energy(k4, [1, 1, 0, -1])


def test_energies_batch_matches_scalar(k4):
    rng = np.random.default_rng(0)
    S = rng.choice([-1, 1], size=(32, 4))
    batch = energies(k4, S)
    for row, e in zip(S, batch):
        assert e == pytest.approx(energy(k4, row))


def test_brute_force_k4_af(k4):
    e0, states = brute_force_ground(k4)
    assert e0 == pytest.approx(-2.0)
    assert states.shape[0] == 6
    # exactly the two-up-two-down configurations
    assert all(int(s.sum()) == 0 for s in states)
    assert len({s.tobytes() for s in states}) == 6


def test_brute_force_k8_harder_fixture():
    # frozen from this exhaustive oracle (256 states)
    p = load_instance("k8_harder")
    e0, states = brute_force_ground(p)
    assert e0 == pytest.approx(-4.9)
    assert states.shape[0] == 2
    # spin-flip partners of each other (h = 0)
    assert np.array_equal(states[0], -states[1])


def test_brute_force_capacity():
    p = IsingProblem.from_couplings(25, couplings={(0, 1): 1.0})
    with pytest.raises(CapacityExceeded):
        brute_force_ground(p)


def test_gauge_identity(k4):
    g = np.ones(4, dtype=np.int8)
    q = apply_gauge(k4, g)
    assert q.coupling_dict() == k4.coupling_dict()
    assert np.array_equal(q.h, k4.h)


def test_gauge_single_coupling_sign():
    p = IsingProblem.from_couplings(2, couplings={(0, 1): 1.0})
    q = apply_gauge(p, [1, -1])
    assert q.coupling_dict()[(0, 1)] == pytest.approx(-1.0)


def test_gauge_covariance_random():
    rng = np.random.default_rng(42)
    for _ in range(50):
        n = int(rng.integers(2, 8))
        coup = {
            (i, j): float(rng.normal())
            for i in range(n)
            for j in range(i + 1, n)
            if rng.random() < 0.6
        }
        h = rng.normal(size=n)
        p = IsingProblem.from_couplings(n, couplings=coup, h=h, alpha=float(rng.uniform(0.1, 1)))
        g = rng.choice([-1, 1], size=n)
        s = rng.choice([-1, 1], size=n)
        assert energy(apply_gauge(p, g), g * s) == pytest.approx(energy(p, s))


def test_spin_flip_symmetry_no_fields(k4):
    rng = np.random.default_rng(3)
    for _ in range(20):
        s = rng.choice([-1, 1], size=4)
        assert energy(k4, s) == pytest.approx(energy(k4, -s))


def test_rescale_examples(k4):
    assert energy(rescale(k4, 1.0), [1, 1, -1, -1]) == pytest.approx(-2.0)
    e0, _ = brute_force_ground(rescale(k4, 0.1))
    assert e0 == pytest.approx(-0.2)
    for bad in (0.0, -0.5, 1.5):
        with pytest.raises(DomainError):
            rescale(k4, bad)


def test_problem_validation():
    with pytest.raises(DomainError):
        IsingProblem.from_couplings(3, couplings={(1, 1): 1.0})
    with pytest.raises(DomainError):
        IsingProblem(n=2, h=np.zeros(2), pairs=[[0, 1], [1, 0]], values=[1.0, 2.0])
    with pytest.raises(DomainError):
        IsingProblem.from_couplings(2, couplings={(0, 1): 1.0}, alpha=0.0)


def test_json_round_trip(tmp_path, k4):
    path = tmp_path / "k4.json"
    save_problem(k4, path)
    q = load_problem(path)
    assert q.coupling_dict() == k4.coupling_dict()
    assert q.alpha == k4.alpha
    assert q.digest() == k4.digest()


def test_one_based_labels_shifted():
    d = {"n": 3, "h": {"1": 0.5}, "J": {"1,3": 1.0}, "alpha": 1.0}
    p = problem_from_dict(d)
    assert p.h[0] == pytest.approx(0.5)
    assert (0, 2) in p.coupling_dict()


def test_bundled_instances_load():
    for name in INSTANCE_NAMES:
        p = load_instance(name)
        assert p.n in (4, 8, 10)
        assert p.alpha == 1.0
    k8 = load_instance("k8_harder")
    # spot values against the published table (1-based row 1: 0.4, 0.7, ...)
    cd = k8.coupling_dict()
    assert cd[(0, 1)] == pytest.approx(0.4)
    assert cd[(2, 7)] == pytest.approx(0.9)
    assert cd[(3, 4)] == pytest.approx(1.0)
    k10 = load_instance("k10_easier")
    assert k10.coupling_dict()[(4, 9)] == pytest.approx(1.0)
    assert k10.coupling_dict()[(8, 9)] == pytest.approx(0.1)


def test_digest_changes_with_values(k4):
    other = rescale(k4, 0.5)
    assert other.digest() != k4.digest()
