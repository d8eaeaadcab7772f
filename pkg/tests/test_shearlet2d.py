from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from radonshear.errors import AdmissibilityError, AliasingError, CoverageError, DomainError, ParseError, StageError
from radonshear.groups import AffineElement, DilationFamily, affine_compose, affine_inverse, build_element
from radonshear.phantoms import cone_noise
from radonshear.radon2d import Image2D, affine_radon, apply_riesz, unitary_Q
from radonshear.shearlet2d import (
    Lattice,
    apply_shearlet_operator,
    coefficient_at,
    direct_transform,
    intertwine_residual,
    make_mother,
    mother_from_id,
    pipeline_transform,
    prefactor_exponent,
    reconstruct,
    scale_filter,
    shear_atom,
    slope_window_from_id,
    tensor_dilation_constant,
)


def rel(a, b):
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def element(fam, b, s, a):
    return AffineElement(np.asarray(b, dtype=float), build_element(fam, [s], a))


@pytest.fixture(scope="module")
def cone512():
    # wide field of view: coarse-scale atoms decay slowly in space
    return cone_noise(seed=0, n=512, sigma=0.3, band=(0.1, 0.12), spread=0.05)


@pytest.fixture(scope="module")
def lattice128(cone128):
    return Lattice.for_image(cone128)


@pytest.fixture(scope="module")
def direct128(cone128, mother, lattice128):
    return direct_transform(cone128, mother, lattice128)


@pytest.fixture(scope="module")
def sino128(cone128):
    return affine_radon(cone128)


@pytest.fixture(scope="module")
def padded(cone128):
    # the direct route is periodic on the image grid; a margin keeps coarse atoms from wrapping
    big = np.zeros((256, 256))
    big[64:192, 64:192] = cone128.values
    return Image2D(big, cone128.dx)


@pytest.fixture(scope="module")
def padded_pair(mother, padded):
    lat = Lattice.for_image(padded)
    return lat, direct_transform(padded, mother, lat), affine_radon(padded)


# -- mother shearlets -------------------------------------------------------------------


def test_indicator_mother_constant():
    # the slope window on [-1/2, 1/2] has unit energy, so C_psi = 2 ln 2
    m = make_mother("indicator-annulus:[1,2]", "indicator:[-0.5,0.5]")
    assert m.c_psi == pytest.approx(2.0 * math.log(2.0), abs=1e-3)


def test_default_mother_lives_in_the_cone(mother):
    xi = np.linspace(-4, 4, 401)
    X1, X2 = np.meshgrid(xi, xi)
    spec = mother.spectrum(X1, X2)
    assert np.all(spec[np.abs(X2) > np.abs(X1)] == 0)
    assert np.any(spec != 0)


def test_default_prefactor(mother):
    assert prefactor_exponent(mother.family, "chi") == -0.75
    assert prefactor_exponent(mother.family, "phi") == -0.25
    with pytest.raises(DomainError):
        prefactor_exponent(mother.family, "psi")


@pytest.mark.parametrize("gamma", [0.25, 0.5, 0.75])
def test_prefactor_matches_standard_closed_form(gamma):
    for d in (2, 3, 4):
        fam = DilationFamily.standard(d, gamma)
        assert prefactor_exponent(fam, "chi") == pytest.approx((d - 1) * (gamma - 2) / 2)
        assert prefactor_exponent(fam, "phi") == pytest.approx((d - 1) * (gamma - 1) / 2)


def test_mother_rejects_bad_inputs():
    with pytest.raises(AdmissibilityError):
        make_mother("indicator:[-0.5,0.5]")
    with pytest.raises(CoverageError):
        make_mother(psi2="indicator:[-5,5]")
    with pytest.raises(DomainError):
        make_mother(gamma=1.0)
    with pytest.raises(ParseError):
        slope_window_from_id("triangle")


def test_mother_id_roundtrip(mother):
    again = mother_from_id(mother.id)
    assert again.id == mother.id
    assert again.c_psi == pytest.approx(mother.c_psi, rel=1e-15)
    with pytest.raises(ParseError):
        mother_from_id("psi3=bump")


def test_tensor_dilation_constant_numeric():
    # (V_{0,a} (x) W_{0,a}) F(v, t) = |a|^((gamma-1)/2) |a|^(-1/2) F(v / |a|^(1-gamma), t / a), and
    # D_A F(v, t) = |det A|^(-1/2) F(A^-1 (v, t)) with A = diag(|a|^(1-gamma), a)
    gamma = 0.5
    fam = DilationFamily.standard(2, gamma)
    for a in (2.0, 0.25, -0.5):
        lhs_factor = abs(a) ** ((gamma - 1) / 2) * abs(a) ** -0.5
        det_a = abs(a) ** (1 - gamma) * abs(a)
        d_a_factor = 1.0 / det_a  # D_A is normalized on L1
        c = math.log(lhs_factor / d_a_factor) / math.log(abs(a))
        assert c == pytest.approx(tensor_dilation_constant(fam), abs=1e-14)
        # the constant 3 (1 - lambda_D) / 2 does not fit
        assert abs(c - 3 * (1 - fam.lambda_D) / 2) > 0.5


# -- atoms ------------------------------------------------------------------------------------


def test_identity_atom_is_mother(mother):
    at = shear_atom(mother, (0.0, 0.0), 0.0, 1.0, 256, dx=1 / 32)
    X1, X2 = np.meshgrid(at.xi1, at.xi2)
    np.testing.assert_allclose(at.spectrum(), mother.spectrum(X1, X2), atol=1e-12)


@settings(max_examples=20)
@given(
    st.floats(-0.5, 0.5),
    st.floats(-0.5, 0.5),
    st.floats(-1, 1),
    st.sampled_from([0.5, 0.25, -0.5, -0.25]),
)
def test_atom_norm_preserved(mother, bx, by, s, a):
    at = shear_atom(mother, (bx, by), s, a, 512, dx=1 / 32)
    assert abs(at.norm**2 - mother.norm_sq) / mother.norm_sq <= 1e-6


def test_atom_norm_at_unit_scale(mother):
    at = shear_atom(mother, (0.1, 0.2), 0.7, 1.0, 1024, dx=1 / 32)
    assert abs(at.norm**2 - mother.norm_sq) / mother.norm_sq <= 1e-6


def test_atom_support_at_quarter_scale(mother):
    # t(A_{1/4}) maps psi's box (1/2 <= |xi1| <= 2, |xi2| <= |xi1|) to 2 <= |xi1| <= 8, |xi2| <= |xi1| / 2
    at = shear_atom(mother, (0.0, 0.0), 0.0, 0.25, 256, dx=1 / 64)
    X1, X2 = np.meshgrid(at.xi1, at.xi2)
    energy = np.abs(at.spectrum()) ** 2
    inside = (np.abs(X1) >= 2) & (np.abs(X1) <= 8) & (np.abs(X2) <= np.abs(X1) / 2)
    assert energy[~inside].sum() <= 1e-20 * energy.sum()
    assert energy[inside & (np.abs(X1) > 4)].sum() > 0.1 * energy.sum()


def test_aliasing_error(mother):
    with pytest.raises(AliasingError, match="a=0.125"):
        shear_atom(mother, (0.0, 0.0), 0.0, 0.125, 64, dx=1 / 16)


# -- direct transform ---------------------------------------------------------------------------


def test_reproducing_peak(mother, lattice128):
    s0, a0 = 0.5, 0.25
    atom = shear_atom(mother, (8 / 64, -4 / 64), s0, a0, 128, dx=1 / 64)
    vol = direct_transform(atom, mother, lattice128)
    i = vol.slice_index(s0, a0)
    peak = vol.values[i][64 - 4, 64 + 8]
    assert peak == pytest.approx(atom.norm**2, rel=1e-10)
    assert max(np.abs(v).max() for v in vol.values) == pytest.approx(abs(peak), rel=1e-12)


def test_direct_linearity(mother, cone128, lattice128):
    g = cone_noise(seed=5, n=128)
    alpha, beta = 0.7 - 0.2j, -1.3
    combo = Image2D(alpha * cone128.values + beta * g.values, cone128.dx)
    lhs = direct_transform(combo, mother, lattice128)
    rhs = direct_transform(cone128, mother, lattice128).scaled(alpha) + direct_transform(g, mother, lattice128).scaled(beta)
    assert lhs.relative_distance(rhs) <= 1e-12


def test_direct_rejects_wrong_lattice(mother, cone128):
    with pytest.raises(DomainError):
        direct_transform(cone128, mother, Lattice.for_image(cone128, gamma=0.25))


def test_direct_aliasing_propagates(mother):
    img = Image2D(np.zeros((64, 64)), 1 / 16)
    with pytest.raises(AliasingError):
        direct_transform(img, mother, Lattice.for_image(img, J=3))


def test_energy_surrogate(mother, cone256):
    vol = direct_transform(cone256, mother)
    ratio = vol.energy() / (mother.c_psi * cone256.norm**2)
    assert 0.9 <= ratio <= 1.1


def test_covariance(mother, cone512):
    fam = mother.family
    scale = cone512.norm * math.sqrt(mother.norm_sq)
    for g0p in [((0.25, -0.125), 0.0, 1.0), ((0.0, 0.0), 0.5, 1.0), ((0.0, 0.0), 0.0, 2.0), ((0.1, -0.05), 0.25, 0.5)]:
        g0 = element(fam, *g0p)
        moved = apply_shearlet_operator(cone512, g0.b, g0p[1], g0p[2])
        for b, s, a in [((0.0, 0.0), 0.0, 0.25), ((0.2, 0.1), -0.5, 0.125), ((0.0, 0.3), 0.3, -0.25)]:
            h = affine_compose(affine_inverse(g0), element(fam, b, s, a))
            lhs = coefficient_at(moved, mother, b, s, a)
            rhs = coefficient_at(cone512, mother, h.b, h.h.s[0], h.h.a)
            assert abs(lhs - rhs) <= 1e-6 * scale


def test_coefficient_at_matches_volume(mother, cone128, direct128):
    i = direct128.slice_index(-0.25, -0.25)
    b = (cone128.x[70], cone128.y[50])
    assert coefficient_at(cone128, mother, b, -0.25, -0.25) == pytest.approx(direct128.values[i][50, 70], abs=1e-12)


def test_translation_rolls_coefficients(mother, cone128, lattice128, direct128):
    moved = Image2D(np.roll(cone128.values, (3, -5), axis=(0, 1)), cone128.dx)
    vol = direct_transform(moved, mother, lattice128)
    for v0, v1 in zip(direct128.values, vol.values):
        np.testing.assert_allclose(v1, np.roll(v0, (3, -5), axis=(0, 1)), atol=1e-12)


# -- Radon route ------------------------------------------------------------------------------------


def test_scale_filter_examples(mother):
    v = np.linspace(-3, 3, 61)
    np.testing.assert_allclose(scale_filter(mother, 1.0, v), np.conj(mother.phi2(-v)))
    np.testing.assert_allclose(scale_filter(mother, 0.25, v), mother.phi2(2 * v), atol=1e-15)
    # support scales as |a|^(1 - gamma)
    nz = np.abs(v[np.abs(scale_filter(mother, 0.25, v)) > 0])
    assert nz.max() < 0.5 + 1e-12


def test_pipeline_agrees_with_direct(mother, padded_pair):
    lat, direct, sino = padded_pair
    assert pipeline_transform(sino, mother, lat).relative_distance(direct) <= 1e-2


def test_phi_path_agrees_with_direct(mother, padded_pair):
    lat, direct, sino = padded_pair
    assert pipeline_transform(apply_riesz(sino), mother, lat).relative_distance(direct) <= 1e-2


def test_direct_route_wraps_without_margin(mother, padded_pair, direct128):
    # documents why the agreement tests use a padded field of view
    _, direct, _ = padded_pair
    crop = [v[64:192, 64:192] for v in direct.values]
    num = sum(np.sum(np.abs(c - v) ** 2) for c, v in zip(crop, direct128.values))
    den = sum(np.sum(np.abs(c) ** 2) for c in crop)
    assert 1e-3 < math.sqrt(num / den) < 5e-2


def test_pipeline_zero_sinogram(mother, lattice128, sino128):
    vol = pipeline_transform(sino128.with_values(np.zeros_like(sino128.values)), mother, lattice128)
    assert vol.energy() == 0.0


def test_pipeline_coverage_error(mother, cone128, lattice128):
    short = affine_radon(cone128, np.linspace(-1.5, 1.5, 65))
    with pytest.raises(CoverageError, match="scale a=1"):
        pipeline_transform(short, mother, lattice128)


def test_pipeline_rejects_wrong_lattice(mother, cone128, sino128):
    with pytest.raises(DomainError):
        pipeline_transform(sino128, mother, Lattice.for_image(cone128, gamma=0.25))


# -- intertwining --------------------------------------------------------------------------------------


def test_intertwine_identity(cone128):
    assert intertwine_residual(cone128, (0.0, 0.0), 0.0, 1.0) == 0.0


@pytest.mark.parametrize("b,s,a", [((0.0, 0.0), 0.0, 2.0), ((0.0, 0.0), 0.5, 1.0)])
def test_intertwine_examples(cone256, b, s, a):
    assert intertwine_residual(cone256, b, s, a) <= 2e-2


def test_intertwine_coverage(cone128):
    with pytest.raises(CoverageError):
        # the sinogram energy sits near v = 0; this shear reads only |v| >= 0.5
        intertwine_residual(cone128, (0.0, 0.0), 3.5, 1.0)


def test_q_of_operator_needs_nonzero_scale(cone128):
    with pytest.raises(DomainError):
        apply_shearlet_operator(cone128, (0.0, 0.0), 0.0, 0.0)


# -- reconstruction ---------------------------------------------------------------------------------------


def test_reconstruct_zero_volume(mother, direct128):
    img = reconstruct(direct128.scaled(0.0), mother)
    assert not np.any(img.values)


def test_reconstruct_from_direct(mother, cone128, direct128):
    img = reconstruct(direct128, mother)
    assert rel(img.values.real, cone128.values) <= 5e-2


def test_reconstruct_from_sinogram(mother, cone128, lattice128, sino128):
    vol = pipeline_transform(sino128, mother, lattice128)
    img = reconstruct(vol, mother)
    assert rel(img.values.real, cone128.values) <= 7e-2
