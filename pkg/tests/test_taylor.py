import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import SIGNATURES, SIG_IDS, half_potential, potential
from dirac_lab.direct import random_parameter
from dirac_lab.errors import ValidationError
from dirac_lab.jalgebra import Signature, beta_gamma
from dirac_lab.potential import DiracPotential
from dirac_lab.snode import build_snode
from dirac_lab.taylor import (
    DEFAULT_RADIUS,
    DEFAULT_SAMPLES,
    TaylorData,
    disk_to_halfplane,
    sample_disk_weyl,
    taylor_algebraic,
    taylor_from_phi_stack,
    taylor_numeric,
)

S11 = Signature(1, 1)


# disk_to_halfplane

def test_disk_center_maps_to_i():
    assert disk_to_halfplane(0) == 1j


def test_disk_one_maps_to_zero():
    assert disk_to_halfplane(1) == 0


def test_disk_minus_one_rejected():
    with pytest.raises(ValidationError):
        disk_to_halfplane(-1)


@given(st.floats(0, 0.999), st.floats(0, 2 * np.pi))
def test_disk_maps_into_upper_half_plane(rho, theta):
    assert disk_to_halfplane(rho * np.exp(1j * theta)).imag > 0


# taylor_from_phi_stack

def test_zero_stack():
    data = taylor_from_phi_stack(np.zeros((6, 2)), Signature(2, 2))
    assert data.r == 2 and np.array_equal(data.phi, np.zeros((3, 2, 2)))


def test_telescoping():
    rng = np.random.default_rng(0)
    p0, p1 = rng.standard_normal((2, 2, 1)) + 1j * rng.standard_normal((2, 2, 1))
    data = taylor_from_phi_stack(-np.vstack([p0, p0 + p1]), Signature(1, 2))
    assert np.array_equal(data.phi[0], p0)
    assert np.abs(data.phi[1] - p1).max() < 1e-15


def test_phi_stack_shape_rejected():
    with pytest.raises(ValidationError):
        taylor_from_phi_stack(np.zeros((3, 1)), Signature(1, 2))
    with pytest.raises(ValidationError):
        taylor_from_phi_stack(np.zeros((4, 2)), Signature(1, 2))


def test_taylor_data_validation():
    with pytest.raises(ValidationError):
        TaylorData(S11, np.zeros((0, 1, 1)))
    with pytest.raises(ValidationError):
        TaylorData(S11, np.zeros((2, 1, 2)))
    with pytest.raises(ValidationError):
        TaylorData(S11, [[[np.nan]]])
    data = TaylorData(S11, np.arange(3.0).reshape(3, 1, 1))
    assert data.truncate(1).r == 1
    assert data.extend([[5.0]]).phi[-1, 0, 0] == 5
    with pytest.raises(ValidationError):
        data.truncate(3)


# taylor_algebraic

@pytest.mark.parametrize("sig", SIGNATURES, ids=SIG_IDS)
def test_trivial_potential_gives_zero(sig):
    assert np.abs(taylor_algebraic(DiracPotential.trivial(sig, 5)).phi).max() == 0


def test_half_example():
    pot = half_potential()
    _, gamma = beta_gamma(pot.C[0], S11)
    oracle = -gamma[0, 0] / gamma[0, 1]
    phi0 = taylor_algebraic(pot).phi[0, 0, 0]
    assert abs(phi0 - oracle) < 1e-14
    # gamma of C_HALF is proportional to (-1, 2), so phi_0 = rho_0 here
    assert abs(phi0 - 0.5) < 1e-14


@pytest.mark.parametrize("sig", SIGNATURES, ids=SIG_IDS)
def test_interval_consistency(sig):
    pot = potential(5, 12, sig)
    full = taylor_algebraic(pot).phi
    for r in (0, 3, 7, 11):
        part = taylor_algebraic(pot.truncate(r)).phi
        assert np.abs(part - full[: r + 1]).max() < 1e-13 * max(1.0, np.abs(full).max())


def test_algebraic_accepts_prebuilt_node():
    pot = potential(2, 4, Signature(2, 1))
    node = build_snode(pot)
    assert np.array_equal(taylor_algebraic(pot, node).phi, taylor_algebraic(pot).phi)


# taylor_numeric

def test_defaults():
    assert DEFAULT_RADIUS == 0.1 and DEFAULT_SAMPLES == 64


@pytest.mark.parametrize("sig", SIGNATURES, ids=SIG_IDS)
def test_numeric_trivial(sig):
    assert np.abs(taylor_numeric(DiracPotential.trivial(sig, 6)).phi).max() < 1e-10


@pytest.mark.parametrize("sig", SIGNATURES, ids=SIG_IDS)
@pytest.mark.parametrize("r", [0, 3, 6, 10])
def test_numeric_matches_algebraic(sig, r):
    for seed in range(5):
        pot = potential(seed, r, sig)
        a = taylor_algebraic(pot).phi
        b = taylor_numeric(pot, radius=0.1, samples=64).phi
        assert np.abs(a - b).max() < 1e-6


@pytest.mark.parametrize("sig", SIGNATURES, ids=SIG_IDS)
def test_parameter_independence(sig):
    rng = np.random.default_rng(17)
    for seed in range(3):
        pot = potential(seed, 10, sig)
        base = taylor_numeric(pot).phi
        for _ in range(3):
            other = taylor_numeric(pot, p=random_parameter(rng, sig)).phi
            assert np.abs(other - base).max() < 1e-6


@pytest.mark.parametrize("sig", SIGNATURES, ids=SIG_IDS)
def test_samples_are_non_expansive(sig):
    pot = potential(8, 10, sig)
    zetas = DEFAULT_RADIUS * np.exp(2j * np.pi * np.arange(DEFAULT_SAMPLES) / DEFAULT_SAMPLES)
    for val in sample_disk_weyl(pot, zetas):
        assert np.linalg.norm(val, 2) <= 1 + 1e-9


def test_samples_on_larger_circle_non_expansive():
    pot = potential(3, 6, Signature(2, 2))
    zetas = 0.95 * np.exp(2j * np.pi * np.arange(32) / 32)
    assert max(np.linalg.norm(v, 2) for v in sample_disk_weyl(pot, zetas)) <= 1 + 1e-9


def test_numeric_other_radius():
    pot = potential(4, 8, Signature(1, 2))
    a = taylor_algebraic(pot).phi
    assert np.abs(taylor_numeric(pot, radius=0.5, samples=128).phi - a).max() < 1e-6


@pytest.mark.parametrize("radius", [0.0, 1.0, -0.2, 1.5])
def test_numeric_rejects_radius(radius):
    with pytest.raises(ValidationError):
        taylor_numeric(half_potential(), radius=radius)


def test_numeric_rejects_too_few_samples():
    pot = potential(1, 5, S11)
    with pytest.raises(ValidationError):
        taylor_numeric(pot, samples=11)
    taylor_numeric(pot, samples=12)
