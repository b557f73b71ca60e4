import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from ringmeas.model import (
    ApparatusSpec,
    CouplingSpec,
    ObjectSpec,
    coordinate_kernel,
    moments,
    momentum_value,
    quasiclassicality,
    validate,
)
from ringmeas.random_configs import random_weights


@pytest.fixture
def running():
    obj = ObjectSpec.from_basis([-1.0, 1.0], [0, 1])
    app = ApparatusSpec.uniform(1, 4)
    return obj, app, CouplingSpec.from_shift(obj, app)


def test_validate_running_example(running):
    report = validate(*running)
    assert report.ok, report.errors
    assert report.N == 3 and report.min_K == 4


def test_validate_support_bound(running):
    obj, app, cpl = running
    small = ApparatusSpec.uniform(1, 3)
    report = validate(obj, small, cpl)
    assert not report.ok
    assert any("support bound" in e and "4" in e for e in report.errors)


def test_validate_normalization(running):
    obj, app, cpl = running
    bad = ApparatusSpec(m=1, w0=[0.3, 0.3, 0.3], K=4)
    assert any("normalization" in e for e in validate(obj, bad, cpl).errors)


def test_validate_integer_shift(running):
    obj, app, _ = running
    cpl = CouplingSpec(gamma=2.5 * 2 * math.pi / app.L)
    report = validate(obj, app, cpl)
    assert any("integer-shift" in e for e in report.errors)
    assert report.N is None


def test_validate_standard_shift_toggle(running):
    obj, _, _ = running
    app = ApparatusSpec.uniform(1, 10)
    cpl = CouplingSpec.from_shift(obj, app, N=5)
    assert not validate(obj, app, cpl).ok
    assert validate(obj, app, cpl, standard_shift=False).ok


@pytest.mark.parametrize("n", [(1, 0), (0, 0), (0, 1.5)])
def test_validate_rejects_bad_multipliers(n):
    obj = ObjectSpec.from_basis([0.0, 1.0], n)
    app = ApparatusSpec.uniform(1, 10)
    assert not validate(obj, app, CouplingSpec(gamma=3.0)).ok


def test_validate_rejects_incomplete_projectors():
    E = [np.diag([1, 0, 0]), np.diag([0, 1, 0])]
    obj = ObjectSpec(x=[0, 1], n=[0, 1], a=1.0, E=E)
    report = validate(obj, ApparatusSpec.uniform(1, 4), CouplingSpec(gamma=3.0))
    assert any("identity" in e for e in report.errors)


def test_validate_rejects_repeated_eigenvalues():
    obj = ObjectSpec.from_basis([1.0, 1.0], [0, 1])
    report = validate(obj, ApparatusSpec.uniform(1, 4), CouplingSpec(gamma=3.0))
    assert any("distinct" in e for e in report.errors)


def test_nonorthonormal_basis_projectors_fail():
    basis = np.array([[1, 1], [0, 1]]) / np.array([1, np.sqrt(2)])
    obj = ObjectSpec.from_basis([0.0, 1.0], [0, 1], basis=basis)
    assert not validate(obj, ApparatusSpec.uniform(1, 4), CouplingSpec(gamma=3.0)).ok


def test_momentum_value():
    app = ApparatusSpec.uniform(0, 5)
    assert momentum_value(app, 3) == pytest.approx(3.0)
    assert momentum_value(app, 0) == 0.0
    unit = ApparatusSpec.uniform(0, 5, L=1.0)
    assert momentum_value(unit, 1) == pytest.approx(2 * math.pi)
    with pytest.raises(IndexError):
        momentum_value(app, 6)


@given(st.floats(-3, 3), st.integers(0, 4), st.integers(0, 2**32 - 1))
def test_coordinate_kernel_diagonal_is_uniform(q, m, seed):
    app = ApparatusSpec(m=m, w0=random_weights(m, np.random.default_rng(seed)), K=m)
    assert coordinate_kernel(app, q, q) == pytest.approx(1 / app.L, abs=1e-12)


def test_coordinate_kernel_examples():
    sharp = ApparatusSpec.uniform(0, 0)
    assert coordinate_kernel(sharp, 1.0, -2.0) == pytest.approx(1 / sharp.L)
    app = ApparatusSpec.uniform(1, 1)
    assert coordinate_kernel(app, app.L / 2, 0.0) == pytest.approx(-1 / (3 * app.L), abs=1e-15)


def test_coordinate_kernel_integrates_to_one():
    app = ApparatusSpec(m=2, w0=[0.1, 0.2, 0.3, 0.25, 0.15], K=2)
    total, _ = quad(lambda q: coordinate_kernel(app, q, q).real, -app.L / 2, app.L / 2)
    assert total == pytest.approx(1.0, abs=1e-12)


def test_rho_a_is_diagonal_density():
    app = ApparatusSpec(m=2, w0=[0.1, 0.2, 0.3, 0.25, 0.15], K=4)
    rho = app.rho()
    P = np.diag(app.momenta())
    assert np.trace(rho) == pytest.approx(1.0)
    assert np.max(np.abs(rho @ P - P @ rho)) == 0.0
    assert np.count_nonzero(rho - np.diag(np.diag(rho))) == 0


def test_moments_examples():
    assert moments(ApparatusSpec.uniform(0, 0)).sigma_q2 == pytest.approx(math.pi ** 2 / 3)
    assert moments(ApparatusSpec.uniform(0, 0)).product == 0.0
    mo = moments(ApparatusSpec.uniform(1, 1))
    assert mo.sigma_p2 == pytest.approx(2 / 3)
    assert mo.product == pytest.approx(2 * math.pi ** 2 / 9)
    assert mo.product_symmetric == pytest.approx(2 * math.pi ** 2 / 9)


@pytest.mark.parametrize("L", [1.0, 2 * math.pi, 7.5])
def test_sigma_q_by_quadrature(L):
    total, _ = quad(lambda q: q * q / L, -L / 2, L / 2, epsabs=1e-14)
    assert abs(moments(ApparatusSpec.uniform(0, 0, L=L)).sigma_q2 - total) <= 1e-10


@given(st.integers(0, 6), st.integers(0, 2**32 - 1), st.floats(0.5, 10), st.floats(0.1, 3))
def test_closed_form_product_matches_direct(m, seed, L, hbar):
    w0 = random_weights(m, np.random.default_rng(seed), symmetric=True)
    mo = moments(ApparatusSpec(m=m, w0=w0, K=m, L=L, hbar=hbar))
    assert abs(mo.product_symmetric - mo.product) <= 1e-12 * max(1.0, mo.product)


def test_asymmetric_weights_have_no_closed_form():
    mo = moments(ApparatusSpec(m=1, w0=[0.5, 0.3, 0.2], K=1))
    assert mo.product_symmetric is None


def test_quasiclassicality():
    assert quasiclassicality(ApparatusSpec.uniform(0, 0)).ratio == 0.0
    q1 = quasiclassicality(ApparatusSpec.uniform(1, 1))
    assert q1.ratio == pytest.approx(math.sqrt(2 * math.pi ** 2 / 9))
    assert q1.ratio == pytest.approx(1.48, abs=0.005)
    assert not q1.quasi_classical
    r5 = quasiclassicality(ApparatusSpec.uniform(5, 5)).ratio
    r50 = quasiclassicality(ApparatusSpec.uniform(50, 50))
    assert q1.ratio < r5 < r50.ratio
    assert r50.quasi_classical
    with pytest.raises(ValueError):
        quasiclassicality(ApparatusSpec(m=1, w0=[0.5, 0.3, 0.2], K=1))
