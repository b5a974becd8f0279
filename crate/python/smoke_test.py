"""Smoke test for the ptk extension module.

Build first:  maturin develop -m crates/py/Cargo.toml
Run:          pytest python/smoke_test.py
"""

import math

import pytest

ptk = pytest.importorskip("ptk")


def test_reduce_tau():
    tau, (a, b, c, d) = ptk.reduce_tau(complex(3.2, 0.1))
    assert abs(tau.real) <= 0.5 + 1e-12
    assert abs(tau) >= 1 - 1e-12
    assert a * d - b * c == 1


def test_delta_at_i():
    d = ptk.delta(1j)
    assert abs(d.real - 0.0017853698506421519) < 1e-15
    assert abs(d.imag) < 1e-15


def test_faltings_height_11a1():
    h = ptk.faltings_height(complex(0.5, 1.1493901061232524), 5 * math.log(11))
    assert abs(h - (-0.30800984111840306)) < 1e-12


def test_isogeny_bound_grows_with_height():
    lo = ptk.isogeny_bound(0.0)
    hi = ptk.isogeny_bound(10.0, d_k=2, case="general")
    assert 0 < lo < hi


def test_serre_threshold():
    assert ptk.serre_threshold() == 3094027


def test_bad_input_raises():
    with pytest.raises(ValueError):
        ptk.faltings_height(complex(0.0, 0.5), 1.0)
    with pytest.raises(ValueError):
        ptk.isogeny_bound(1.0, case="nope")
