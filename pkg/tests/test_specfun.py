import math
import warnings

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chirpedpdc.specfun import (
    PcfAccuracyWarning,
    PcfOrder,
    erfi_c,
    pcf_basis,
    pcf_d,
    pcf_d_derivative,
    pcf_d_diag,
    pcf_d_reciprocal,
    wronskian_check,
)

# reference values from mpmath.pcfd at 40 digits with the rotated argument
# formed exactly in multiprecision (branch +1: x e^{i pi/4}; -1: -x e^{-i pi/4})
DIAG_GOLDEN = [
    (0.146j, 1, 0.0, complex(1.0088676626943749, -0.092731130923012227)),
    (0.146j, 1, 2.5, complex(0.12832946453725237, -0.89256410481847066)),
    (0.146j, 1, -7.0, complex(1.1060408259406833, 0.79314713849216067)),
    (0.146j, 1, 40.0, complex(-0.79128005529871783, 0.41110774923389067)),
    (0.146j, 1, -120.0, complex(0.80083376829449852, 1.1597967505778917)),
    ((-1 - 0.146j), -1, 3.0, complex(-0.77991661253371624, -2.7847727570222763)),
    ((-1 - 0.146j), -1, -15.0, complex(0.059274382588898326, 0.005166659393855912)),
    ((-1 - 0.146j), -1, 60.0, complex(1.9466824293282634, -2.1220536799382696)),
    (1j, 1, 1.0, complex(0.73505056450656885, -0.14460936613082377)),
    (1j, 1, -4.0, complex(-6.7355976942969476, -5.4959870764518289)),
    (-1j, -1, 9.0, complex(6.3359742313997834, -7.9226319298642838)),
    ((-1 + 1j), 1, -25.0, complex(-3.326369985710893, 9.9133720126529123)),
    (5j, 1, 3.0, complex(-0.032653865932874937, 0.086394511768945818)),
    ((-1 - 5j), -1, -2.0, complex(-0.10197792421769841, -0.20446815337696668)),
]

GENERAL_GOLDEN = [
    ((0.5 + 0.3j), (1.2 - 0.7j), complex(1.0815368981922649, 0.34154843244756886)),
    ((-2.5 + 1j), (-3 + 2j), complex(-8.4794907397161996, 32.709171489065455)),
    (2.0, 4.0, complex(0.2747345833310127, 0.0)),
    (-0.5, 0.0, complex(1.2162802142575203, 0.0)),
]

ERFI_GOLDEN = [
    ((0.5 + 0.5j), complex(0.45788139443519222, 0.64261291485482053)),
    ((-3 + 3j), complex(0.012152181790312257, 0.86782649757545114)),
    ((20 + 20j), complex(0.0063003109798644005, 1.0189259784997888)),
    ((2 - 1j), complex(-5.0491437034470347, 0.53664356577856503)),
]


def _rel(a, b):
    return abs(a - b) / abs(b)


@pytest.mark.parametrize("order,branch,x,expected", DIAG_GOLDEN)
def test_diagonal_rays_match_mpmath(order, branch, x, expected):
    assert _rel(pcf_d_diag(order, x, branch), expected) < 1e-10


@pytest.mark.parametrize("order,z,expected", GENERAL_GOLDEN)
def test_general_argument_matches_mpmath(order, z, expected):
    assert _rel(pcf_d(order, z), expected) < 1e-12


def test_order_zero_is_gaussian():
    x = np.linspace(-10, 10, 2001)
    assert np.max(np.abs(pcf_d(0, x) - np.exp(-x * x / 4))) < 1e-12


def test_origin_closed_form():
    # D_a(0) = 2^{a/2} sqrt(pi) / Gamma((1 - a)/2)
    for a in (0.3j, -1 - 0.7j, 2.5 + 1j):
        ref = complex(mp.power(2, a / 2) * mp.sqrt(mp.pi) / mp.gamma((1 - mp.mpc(a)) / 2))
        assert _rel(pcf_d(a, 0.0), ref) < 1e-14


def test_hermite_orders_are_polynomials():
    # D_n(x) = 2^{-n/2} e^{-x^2/4} H_n(x / sqrt 2)
    x = np.linspace(-6, 6, 121)
    for n in range(5):
        herm = np.polynomial.hermite.hermval(x / math.sqrt(2), [0] * n + [1])
        ref = 2 ** (-n / 2) * np.exp(-x * x / 4) * herm
        assert np.max(np.abs(pcf_d(n, x) - ref)) < 1e-12 * max(1, np.max(np.abs(ref)))


def test_diag_agrees_with_generic_entry():
    x = np.array([-30.0, -3.0, 0.5, 12.0])
    a = 0.4j
    e = np.exp(0.25j * math.pi)
    assert np.max(np.abs(pcf_d_diag(a, x, 1) - pcf_d(a, x * e)) / np.abs(pcf_d(a, x * e))) < 1e-12


@pytest.mark.parametrize("nu", [0.01, 0.146, 1.0, 3.0])
def test_wronskian_grid(nu):
    x = np.linspace(-50, 50, 401)
    assert np.max(wronskian_check(nu, x)) <= 1e-8


def test_derivative_against_finite_difference():
    a, z, h = 0.3 + 0.2j, 1.7 - 0.4j, 1e-5
    fd = (pcf_d(a, z + h) - pcf_d(a, z - h)) / (2 * h)
    assert _rel(pcf_d_derivative(a, z), fd) < 1e-8


@pytest.mark.parametrize("nu", [0.146, 1.0])
def test_basis_solves_scaled_equation(nu):
    # phi'' + (x^2/4 + i/2 - nu) phi = 0, checked by a 4th-order difference
    # truncation grows like (x/2)^6 h^4, so stay inside |x| < 9
    x = np.linspace(-8, 8, 33) + 0.31
    h = 5e-3
    for k in range(2):
        f = lambda t: pcf_basis(nu, t)[k]
        d2 = (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) / (12 * h * h)
        res = d2 + (x * x / 4 + 0.5j - nu) * f(x)
        assert np.max(np.abs(res) / np.abs(f(x))) < 1e-6


@pytest.mark.parametrize("tag,k", [(PcfOrder.D_inu, 0), (PcfOrder.D_minus1_minus_inu, 1), (1, 0), (2, 1)])
def test_reciprocal_is_scaled_derivative(tag, k):
    nu, h = 0.146, 1e-3
    x = np.linspace(-15, 15, 31) + 0.05
    f = lambda t: pcf_basis(nu, t)[k]
    d = (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h)
    ref = (d + 0.5j * x * f(x)) / math.sqrt(nu)
    got = pcf_d_reciprocal(tag, x, nu)
    assert np.max(np.abs(got - ref) / np.abs(got)) < 1e-6


def test_reciprocal_rejects_unknown_tag():
    with pytest.raises(ValueError):
        pcf_d_reciprocal(PcfOrder.D_minus_inu, 1.0, 0.5)


def test_order_value_helper():
    assert PcfOrder.D_minus1_minus_inu.value(0.2) == -1 - 0.2j
    assert PcfOrder.D_inu_minus1.value(0.2) == -1 + 0.2j


def test_erfi_at_one():
    assert abs(erfi_c(1.0) - float(mp.erfi(1))) < 1e-10
    assert abs(erfi_c(1.0) - 1.650425758797542876) < 1e-14


@pytest.mark.parametrize("z,expected", ERFI_GOLDEN)
def test_erfi_complex(z, expected):
    assert _rel(erfi_c(z), expected) < 1e-12


@settings(max_examples=50, deadline=None)
@given(st.floats(-20, 20), st.floats(-20, 20))
def test_erfi_conjugate_and_odd(re, im):
    z = complex(re, im)
    v = erfi_c(z)
    assert abs(erfi_c(z.conjugate()) - v.conjugate()) <= 1e-12 * max(1.0, abs(v))
    assert abs(erfi_c(-z) + v) <= 1e-12 * max(1.0, abs(v))


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 2.0), st.floats(-60, 60))
def test_wronskian_property(nu, x):
    assert wronskian_check(nu, x) <= 1e-8 * math.exp(0.5 * math.pi * nu)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 1.5), st.floats(-40, 40))
def test_conjugate_symmetry_real_order(a, x):
    # D_a(conj z) = conj D_a(z) for real a
    z = x * np.exp(0.25j * math.pi)
    v = pcf_d(a, z)
    assert abs(pcf_d(a, np.conj(z)) - np.conj(v)) <= 1e-10 * max(abs(v), 1e-300)


def test_errors():
    with pytest.raises(ValueError):
        pcf_d(0.5, np.nan)
    with pytest.raises(ValueError):
        pcf_d(200.0, 1.0)
    with pytest.raises(ValueError):
        pcf_d(0.5, 1e7)
    with pytest.raises(ValueError):
        pcf_d_diag(0.5, 1.0, 0)
    with pytest.raises(ValueError):
        pcf_basis(0.0, 1.0)
    with pytest.raises(ValueError):
        erfi_c(np.inf)
    with pytest.raises(OverflowError):
        erfi_c(40.0)


def test_overflow_is_reported():
    # D_a grows like exp(z^2/4) in the sector around the negative real axis
    with pytest.raises(OverflowError):
        pcf_d(0.5j, -60.0)


def test_error_estimate_returned():
    v, err = pcf_d_diag(0.146j, 35.0, 1, return_error=True)
    assert err < 1e-12
    vals, errs = pcf_d(0.3, np.array([0.5, 20.0]), return_error=True)
    assert errs.shape == (2,) and np.all(errs < 1e-10)


def test_accuracy_warning_outside_envelope():
    # large imaginary order off the diagonals: no route reaches the target
    with pytest.warns(PcfAccuracyWarning):
        pcf_d(60j, 3.0 + 0.2j)


def test_scalar_and_array_shapes():
    assert isinstance(pcf_d(0.2, 1.0), complex)
    out = pcf_d_diag(0.2j, np.zeros((2, 3)), 1)
    assert out.shape == (2, 3)
