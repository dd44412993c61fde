import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nvcorr.chemshift import (
    MoleculeSpec,
    count_maxima,
    fully_resolved,
    line_frequencies,
    molecule,
    pair_resolved,
    resolvable,
    synth_spectrum,
)
from nvcorr.core import H1, FieldConfig
from nvcorr.spectral import fit_line

T5 = FieldConfig.from_tesla(5.0)
T1 = FieldConfig.from_tesla(1.0)
MOLECULES = ("acetic acid", "methyl formate")


def test_zero_shift_is_larmor():
    mol = MoleculeSpec("ref", H1, [(0.0, 1)])
    assert line_frequencies(mol, T5)[0][0] == 4.25e3 * 5e4


def test_proton_separation_at_5T():
    (f1, w1), (f2, w2) = line_frequencies(molecule("acetic acid", "1H"), T5)
    # 9.3 ppm of 212.5 MHz; quoted as about 1979 Hz
    assert f2 - f1 == pytest.approx(9.3e-6 * 212.5e6, rel=1e-9)
    assert f2 - f1 == pytest.approx(1979, rel=0.01)
    assert (w1, w2) == (3.0, 1.0)


def test_carbon_separation_at_1T():
    (f1, _), (f2, _) = line_frequencies(molecule("acetic acid", "13C"), T1)
    assert f2 - f1 == pytest.approx(157.3e-6 * 10.705e6, rel=1e-9)
    assert f2 - f1 == pytest.approx(1684, abs=1)


def test_molecule_validation():
    with pytest.raises(ValueError):
        MoleculeSpec("x", H1, [])
    with pytest.raises(ValueError):
        MoleculeSpec("x", H1, [(1.0, 0)])
    with pytest.raises(ValueError):
        MoleculeSpec("x", H1, [(float("nan"), 1)])
    with pytest.raises(KeyError):
        molecule("water", "1H")


def test_molecule_dict_round_trip():
    mol = molecule("methyl formate", "13C")
    assert MoleculeSpec.from_dict(mol.to_dict()) == mol


@pytest.mark.parametrize("shape", ["lorentzian", "gaussian"])
@pytest.mark.parametrize("fwhm", [0.5, 470.0, 110e3])
def test_single_line(shape, fwhm):
    mol = MoleculeSpec("one", H1, [(1.0, 2.0)])
    spec = synth_spectrum(mol, T5, fwhm, shape)
    f0 = line_frequencies(mol, T5)[0][0]
    assert abs(spec.peak()[0] - f0) <= spec.df_hz
    fit = fit_line(spec, shape)
    assert fit.fwhm_hz == pytest.approx(fwhm, rel=1e-6)
    assert np.trapezoid(spec.power, spec.f_hz) == pytest.approx(2.0, rel=1e-6)


@pytest.mark.parametrize("name", MOLECULES)
def test_area_independent_of_resolution(name):
    mol = molecule(name, "1H")
    areas = [np.trapezoid(s.power, s.f_hz) for s in (synth_spectrum(mol, T5, w) for w in (100, 470, 5e3, 110e3))]
    assert np.allclose(areas, 4.0, rtol=1e-6)


def test_merged_vs_resolved_maxima():
    mol = molecule("acetic acid", "1H")
    assert count_maxima(synth_spectrum(mol, T5, 470.0)) == 2
    assert count_maxima(synth_spectrum(mol, T5, 110e3)) == 1


@pytest.mark.parametrize("name", MOLECULES)
@pytest.mark.parametrize("nuc, field", [("1H", T5), ("13C", T5), ("13C", T1)])
def test_resolvability_claims(name, nuc, field):
    mol = molecule(name, nuc)
    assert fully_resolved(mol, field, 470.0)
    assert not any(resolvable(mol, field, 110e3).values())


def test_zero_separation_never_resolved():
    for w in (1e-3, 1.0, 470.0, 1e6):
        assert not pair_resolved(1e6, 1, 1e6, 3, w)


@settings(max_examples=40, deadline=None)
@given(
    sep=st.floats(10, 1e4),
    ratio=st.floats(0.2, 5),
    shape=st.sampled_from(["lorentzian", "gaussian"]),
)
def test_resolvability_monotone_in_width(sep, ratio, shape):
    widths = np.geomspace(sep / 20, sep * 5, 30)
    flags = [pair_resolved(1e6, 1.0, 1e6 + sep, ratio, w, shape) for w in widths]
    # once unresolved, stays unresolved as the width grows
    for a, b in itertools.pairwise(flags):
        assert a or not b


@settings(max_examples=30, deadline=None)
@given(
    k=st.floats(0.1, 10),
    w=st.floats(50, 5e4),
    name=st.sampled_from(MOLECULES),
    nuc=st.sampled_from(["1H", "13C"]),
)
def test_scale_invariance(k, w, name, nuc):
    mol = molecule(name, nuc)
    a = line_frequencies(mol, T1)
    b = line_frequencies(mol, FieldConfig(k * T1.b_gauss))
    for (fa, _), (fb, _) in zip(a, b):
        assert fb == pytest.approx(k * fa, rel=1e-12)
    assert resolvable(mol, T1, w) == resolvable(mol, FieldConfig(k * T1.b_gauss), k * w)
