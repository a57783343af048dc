import math

import numpy as np
import pytest

from thzlink import (
    ConstantAbsorption,
    InvalidParameterError,
    MediumSpec,
    OutOfDomainError,
    TabulatedAbsorption,
    absorption_at,
    load_absorption_table,
    transmittance,
)


def test_constant_provider_returns_k_everywhere():
    p = ConstantAbsorption(k=0.01)
    assert absorption_at(p, 300e9) == 0.01
    assert absorption_at(p, 1e9) == 0.01


def test_table_linear_midpoint():
    p = TabulatedAbsorption(rows=((100e9, 0.001), (300e9, 0.003)))
    assert absorption_at(p, 200e9) == pytest.approx(0.002, rel=1e-15)


def test_table_reproduces_knots_exactly():
    rows = ((100e9, 0.001), (200e9, 0.005), (300e9, 0.003))
    p = TabulatedAbsorption(rows=rows)
    for f, k in rows:
        assert absorption_at(p, f) == k


def test_table_rejects_out_of_range():
    p = TabulatedAbsorption(rows=((100e9, 0.001), (300e9, 0.003)))
    with pytest.raises(OutOfDomainError):
        absorption_at(p, 400e9)
    with pytest.raises(OutOfDomainError):
        absorption_at(p, 99e9)


def test_table_construction_validation():
    with pytest.raises(InvalidParameterError):
        TabulatedAbsorption(rows=((100e9, 0.001),))
    with pytest.raises(InvalidParameterError):
        TabulatedAbsorption(rows=((300e9, 0.001), (100e9, 0.003)))
    with pytest.raises(InvalidParameterError):
        TabulatedAbsorption(rows=((100e9, -0.001), (300e9, 0.003)))


def test_transmittance_lossless():
    assert transmittance(0.0, 10.0) == 1.0


def test_transmittance_constructed_half_power():
    assert transmittance(math.log(2) / 10.0, 10.0) == pytest.approx(0.5, rel=1e-15)


def test_transmittance_reference_value():
    # frozen from a 40-digit evaluation of exp(-0.233)
    assert transmittance(0.0233, 10.0) == pytest.approx(0.792153573524314, rel=1e-14)


def test_transmittance_rejects_bad_inputs():
    with pytest.raises(InvalidParameterError):
        transmittance(-0.1, 10.0)
    with pytest.raises(InvalidParameterError):
        transmittance(0.1, 0.0)
    with pytest.raises(InvalidParameterError):
        transmittance(0.1, -3.0)


def test_transmittance_multiplicative_and_bounded():
    rng = np.random.default_rng(42)
    for _ in range(200):
        k = rng.uniform(0.0, 1.0)
        d1 = rng.uniform(0.01, 50.0)
        d2 = rng.uniform(0.01, 50.0)
        a12 = transmittance(k, d1 + d2)
        assert a12 == pytest.approx(transmittance(k, d1) * transmittance(k, d2), rel=1e-12)
        assert 0.0 < a12 <= 1.0


def test_medium_spec_derives_transmittance():
    m = MediumSpec(k=0.0233, d=10.0)
    assert m.a == pytest.approx(0.792153573524314, rel=1e-14)
    with pytest.raises(InvalidParameterError):
        MediumSpec(k=-1.0, d=10.0)


def _write(tmp_path, text):
    f = tmp_path / "table.csv"
    f.write_text(text)
    return f


def test_load_table_roundtrip(tmp_path):
    f = _write(tmp_path, "frequency_hz,k_per_m\n100e9,0.001\n300e9,0.003\n")
    p = load_absorption_table(f)
    assert absorption_at(p, 200e9) == pytest.approx(0.002)


@pytest.mark.parametrize(
    "text",
    [
        "freq,k\n100e9,0.001\n300e9,0.003\n",          # wrong header
        "frequency_hz,k_per_m\n100e9,nan\n300e9,0.003\n",  # NaN
        "frequency_hz,k_per_m\n100e9,0.001\n100e9,0.003\n",  # duplicate
        "frequency_hz,k_per_m\n300e9,0.001\n100e9,0.003\n",  # unsorted
        "frequency_hz,k_per_m\n100e9,abc\n300e9,0.003\n",    # non-numeric
        "frequency_hz,k_per_m\n100e9,0.001\n",               # single row
    ],
)
def test_load_table_rejects_malformed(tmp_path, text):
    f = _write(tmp_path, text)
    with pytest.raises(InvalidParameterError):
        load_absorption_table(f)
