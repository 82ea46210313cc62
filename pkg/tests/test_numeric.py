import warnings

import numpy as np
import pytest

from susy_crystal import (
    DomainError,
    GridTooCoarseError,
    NonConvergenceError,
    PotentialProfile,
    ProfileKind,
    SlicingSpec,
    derive_params,
    monodromy,
    scatter_numeric,
    slice_matrix,
)
from susy_crystal.analytic import crystal_coefficients, square_well_coefficients, unitarity_defect
from susy_crystal.numeric import (
    TransferMatrix,
    scatter_fixed,
    scatter_numeric_many,
    schrodinger_residual,
    total_transfer_matrices,
)

from oracles import ode_scattering


def test_free_slice_is_phase():
    m = slice_matrix(0.0, 1.3, 0.7)
    assert np.allclose(m.m, np.diag([np.exp(1.3j * 0.7), np.exp(-1.3j * 0.7)]), atol=1e-15)


@pytest.mark.parametrize("V", [0.3, -2.0 + 1j, 1.69, 1.69 + 1e-12j])
def test_slice_unimodular(V):
    # V = p^2 puts the slice on the series branch
    m = slice_matrix(V, 1.3, 0.4)
    assert abs(m.det - 1) < 1e-14


def test_slice_series_branch_is_continuous():
    a = slice_matrix(1.69 - 1e-6, 1.3, 0.5).m
    b = slice_matrix(1.69 - 1e-10, 1.3, 0.5).m
    c = slice_matrix(1.69, 1.3, 0.5).m
    assert np.allclose(a, b, atol=1e-6) and np.allclose(b, c, atol=1e-10)


def test_slice_domain():
    with pytest.raises(DomainError):
        slice_matrix(0.1, 0.0, 1.0)


def test_zero_potential_profile():
    params = derive_params(0.0, 1.0, 7)
    prof = PotentialProfile.of("susy", params)
    M = monodromy(prof, 0.9)
    L = params.L
    assert np.allclose(M.m, np.diag([np.exp(0.9j * L), np.exp(-0.9j * L)]), atol=1e-12)
    c = scatter_numeric(prof, 0.9)
    assert abs(c.t - 1) < 1e-12 and abs(c.r_left) < 1e-12 and abs(c.r_right) < 1e-12


@pytest.mark.parametrize("N", [1, 6, 100])
def test_square_well_is_exact(N):
    # piecewise constant: slicing adds no error
    params = derive_params(0.1, 1.0, N)
    prof = PotentialProfile.of("well", params)
    p = np.linspace(0.6, 1.4, 17)
    num = scatter_fixed(prof, p, 8)
    ref = square_well_coefficients(p, params)
    assert np.allclose(num.t, ref.t, rtol=1e-11, atol=0)
    assert np.allclose(num.r_left, ref.r_left, rtol=1e-9, atol=1e-14)
    assert np.allclose(num.r_right, ref.r_right, rtol=1e-9, atol=1e-14)


def test_monodromy_power_matches_brute_force():
    params = derive_params(0.01, 1.0, 100)
    prof = PotentialProfile.of("susy", params)
    for p in (0.8, params.k1, 1.2):
        fast = monodromy(prof, p, SlicingSpec(64, use_monodromy_power=True))
        slow = monodromy(prof, p, SlicingSpec(64, use_monodromy_power=False))
        assert np.max(np.abs(fast.m - slow.m)) < 1e-10 * np.max(np.abs(slow.m))


def test_transfer_matrix_algebra():
    a = slice_matrix(0.2 + 0.1j, 1.0, 0.3)
    b = slice_matrix(-0.5, 1.0, 0.2)
    assert np.allclose((a @ b).m, a.m @ b.m)
    assert np.allclose(a.power(5).m, np.linalg.matrix_power(a.m, 5))
    assert np.allclose(a.power(0).m, np.eye(2))


@pytest.mark.parametrize("kind", ["well", "susy", "sin", "sin-shifted"])
def test_reciprocal_transmission(kind):
    params = derive_params(0.05, 1.0, 40)
    prof = PotentialProfile.of(kind, params)
    for p in (0.7, 1.0, 1.25):
        tl, tr = monodromy(prof, p).transmissions(p, params.L)
        assert abs(tl - tr) < 1e-10 * abs(tl)


def test_reciprocal_transmission_custom():
    rng = np.random.default_rng(3)
    samples = rng.normal(size=200) + 1j * rng.normal(size=200)
    prof = PotentialProfile(ProfileKind.CUSTOM_SAMPLED, samples=0.05 * samples, length=20.0)
    M = TransferMatrix(total_transfer_matrices(prof, [1.1], 0)[0])
    tl, tr = M.transmissions(1.1, 20.0)
    assert abs(tl - tr) < 1e-10 * abs(tl)


def test_determinant_drift_large_crystal():
    params = derive_params(0.01, 1.0, 5000)
    prof = PotentialProfile.of("susy", params)
    M = total_transfer_matrices(prof, np.linspace(0.6, 1.4, 9), 64)
    det = M[:, 0, 0] * M[:, 1, 1] - M[:, 0, 1] * M[:, 1, 0]
    assert np.max(np.abs(det - 1)) < 1e-10


def test_second_order_convergence():
    params = derive_params(0.1, 1.0, 10)
    prof = PotentialProfile.of("susy", params)
    p = np.array([0.75, 0.9, 1.1])
    exact = crystal_coefficients(p, params).T
    ns = np.array([16, 32, 64, 128])
    errs = [np.max(np.abs(scatter_fixed(prof, p, n).T - exact)) for n in ns]
    order = -np.polyfit(np.log(ns), np.log(errs), 1)[0]
    assert 1.8 <= order <= 2.2


@pytest.mark.parametrize("kind", ["sin", "sin-shifted", "susy"])
def test_against_ode_integrator(kind):
    params = derive_params(0.1, 1.0, 3)
    prof = PotentialProfile.of(kind, params)
    for p in (0.8, 1.0, 1.3):
        t, rl, rr = ode_scattering(lambda x: complex(prof(x)), p, params.L)
        c = scatter_numeric(prof, p, SlicingSpec(convergence_tol=1e-9))
        assert abs(c.t - t) < 1e-8
        assert abs(c.r_left - rl) < 1e-8
        assert abs(c.r_right - rr) < 1e-8


@pytest.mark.parametrize("eps,N", [(0.1, 10), (0.01, 100)])
def test_converged_matches_analytic(eps, N):
    params = derive_params(eps, 1.0, N)
    prof = PotentialProfile.of("susy", params)
    p = np.linspace(0.6, 1.4, 41)
    num = scatter_numeric_many(prof, p)
    ref = crystal_coefficients(p, params)
    assert np.max(np.abs(num.T / ref.T - 1)) < 1e-6
    assert np.max(np.abs(num.R_left / ref.R_left - 1)) < 1e-6
    assert np.max(np.abs(num.R_right - ref.R_right) / np.maximum(ref.R_right, 1e-16)) < 1e-6
    assert np.all(num.slices_per_period >= 128)


@pytest.mark.parametrize("kind", ["susy", "sin", "sin-shifted"])
def test_generalized_unitarity_numeric(kind):
    params = derive_params(0.01, 1.0, 200)
    prof = PotentialProfile.of(kind, params)
    c = scatter_numeric_many(prof, np.linspace(0.6, 1.4, 33))
    assert np.max(unitarity_defect(c)) < 1e-6


def test_nonconvergence_error():
    params = derive_params(0.1, 1.0, 10)
    prof = PotentialProfile.of("susy", params)
    spec = SlicingSpec(4, convergence_tol=1e-14, max_doublings=2)
    with pytest.raises(NonConvergenceError) as info:
        scatter_numeric(prof, 0.9, spec)
    err = info.value
    assert err.p == 0.9 and err.slices_per_period == 16
    assert len(err.previous) == 3 and len(err.last) == 3


def test_fixed_slicing_has_no_doubling():
    params = derive_params(0.1, 1.0, 10)
    prof = PotentialProfile.of("susy", params)
    c = scatter_numeric(prof, 0.9, SlicingSpec(8, max_doublings=0))
    assert c.slices_per_period == 8
    assert c.t == scatter_fixed(prof, 0.9, 8).t


def test_drift_warning_not_raised_normally():
    params = derive_params(0.01, 1.0, 1000)
    prof = PotentialProfile.of("susy", params)
    with warnings.catch_warnings():
        warnings.simplefilter("error", RuntimeWarning)
        scatter_numeric_many(prof, np.linspace(0.9, 1.1, 5))


@pytest.mark.parametrize("kw", [dict(slices_per_period=2), dict(convergence_tol=0.0), dict(max_doublings=1)])
def test_slicing_spec_validation(kw):
    with pytest.raises(DomainError):
        SlicingSpec(**kw)


def test_power_needs_periodic_profile():
    prof = PotentialProfile(ProfileKind.CUSTOM_SAMPLED, samples=[0.1], length=1.0)
    with pytest.raises(DomainError):
        monodromy(prof, 1.0)
    c = scatter_numeric(prof, 1.0)
    assert c.T + c.R_left == pytest.approx(1.0, abs=1e-12)  # real potential


def test_residual_plane_wave_second_order():
    prof = PotentialProfile.of("susy", derive_params(0.0, 1.0, 1))
    p = 1.3
    res = []
    for n in (100, 200, 400):
        x = np.linspace(-5.0, -1.0, n + 1)
        res.append(schrodinger_residual(x, np.exp(1j * p * x), prof, p * p))
    assert res[1] / res[0] == pytest.approx(0.25, rel=0.02)
    assert res[2] / res[1] == pytest.approx(0.25, rel=0.02)


def test_residual_negative_control():
    rng = np.random.default_rng(0)
    prof = PotentialProfile.of("susy", derive_params(0.01, 1.0, 1))
    x = np.linspace(0.1, 3.0, 200)
    xi = rng.normal(size=x.size) + 1j * rng.normal(size=x.size)
    assert schrodinger_residual(x, xi, prof, 1.0) > 1.0


def test_residual_errors():
    prof = PotentialProfile.of("susy", derive_params(0.01, 1.0, 1))
    with pytest.raises(GridTooCoarseError):
        schrodinger_residual([0.0, 1.0], [1.0, 1.0], prof, 1.0)
    with pytest.raises(DomainError):
        schrodinger_residual([0.0, 1.0, 3.0], [1.0, 1.0, 1.0], prof, 1.0)
