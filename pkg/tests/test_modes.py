"""Variational modes against an independent symbolic/quadrature oracle.

The oracle builds each trial function from its shape alone, normalizes it
symbolically and integrates the energy functional with sympy; cross densities
are integrated numerically with scipy. Nothing is shared with the library
except the evaluation point.
"""

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import dblquad

from topomode import (
    MinimizationFailure,
    ModeIndex,
    PhysicalSetup,
    minimize_variational,
    overlap,
    variational_energy,
    wavefunction,
)
from topomode.modes import _alpha_dimless, beta_integral, density_overlap, eigenvalue

from oracles import build_oracle, quad_overlap, rel

@pytest.fixture(scope="module")
def oracle():
    return build_oracle()


GRID = [(g, lam) for g in (0.0, 1.0, 10.0, 100.0) for lam in (0.2, 1.0, 5.0)]


@pytest.mark.parametrize("g,lam", GRID)
@pytest.mark.parametrize("index", list(ModeIndex))
def test_energy_matches_symbolic_oracle(oracle, index, g, lam):
    mode = minimize_variational(index, g, lam)
    expected = oracle[index]["energy"](mode.u, mode.v, g, lam)
    assert rel(mode.energy, expected) < 1e-8
    kin, pot, inter = oracle[index]["parts"](mode.u, mode.v, g, lam)
    assert rel(mode.eigenvalue, kin + pot + 2 * inter) < 1e-8
    # the oracle gradient vanishes at the library's minimizer
    gu, gv = oracle[index]["grad"](mode.u, mode.v, g, lam)
    assert abs(float(gu)) < 1e-7 * max(1, abs(float(expected)))
    assert abs(float(gv)) < 1e-7 * max(1, abs(float(expected)))


@given(st.sampled_from(list(ModeIndex)), st.floats(0.05, 20), st.floats(0.05, 20),
       st.floats(0, 500), st.floats(0.1, 10))
def test_closed_form_energy_anywhere(oracle, index, u, v, g, lam):
    assert rel(variational_energy(index, u, v, g, lam), oracle[index]["energy"](u, v, g, lam)) < 1e-10


@pytest.mark.parametrize("index,energy", [(ModeIndex.GROUND, 1.5), (ModeIndex.VORTEX, 2.5),
                                          (ModeIndex.AXIAL, 2.5), (ModeIndex.RADIAL, 3.5)])
def test_noninteracting_limit_is_exact(index, energy):
    mode = minimize_variational(index, 0.0, 1.0)
    assert abs(mode.u - 1) < 1e-8 and abs(mode.v - 1) < 1e-8
    assert abs(mode.energy - energy) < 1e-8
    assert abs(mode.eigenvalue - energy) < 1e-8


@pytest.mark.parametrize("lam", [0.2, 5.0])
def test_noninteracting_axial_width_follows_anisotropy(lam):
    mode = minimize_variational(ModeIndex.GROUND, 0.0, lam)
    assert mode.u == pytest.approx(1, abs=1e-8)
    assert mode.v == pytest.approx(lam, abs=1e-8)


@pytest.mark.parametrize("g,lam", [(0.0, 1.0), (10.0, 0.2), (100.0, 5.0)])
@pytest.mark.parametrize("index", list(ModeIndex))
def test_wavefunction_is_normalized(index, g, lam):
    mode = minimize_variational(index, g, lam)
    cut_r, cut_z = 12.0 / math.sqrt(mode.u), 12.0 / math.sqrt(mode.v)

    def integrand(z, r):
        return 2 * math.pi * r * abs(wavefunction(mode, r, 0.3, z)) ** 2

    value, _ = dblquad(integrand, 0, cut_r, -cut_z, cut_z, epsabs=0, epsrel=1e-12)
    assert value == pytest.approx(1, rel=1e-8)
    assert abs(overlap(mode, mode)) == pytest.approx(1, rel=1e-10)


@pytest.mark.parametrize("g,lam", [(1.0, 1.0), (100.0, 0.2), (10.0, 5.0)])
def test_interaction_amplitudes_match_quadrature(oracle, g, lam):
    modes = {i: minimize_variational(i, g, lam) for i in ModeIndex}
    table = {(j, k): quad_overlap(oracle, modes[j], modes[k]) for j in ModeIndex for k in ModeIndex}
    for j in ModeIndex:
        for k in ModeIndex:
            mj, mk = modes[j], modes[k]
            jk, jj = table[j, k], table[j, j]
            assert rel(density_overlap(j, mj.u, mj.v, k, mk.u, mk.v), jk) < 1e-8
            if g:
                assert rel(_alpha_dimless(mj, mk, g), g * (2 * jk - jj)) < 1e-8


def test_eigenvalue_counts_interaction_twice():
    mode = minimize_variational(ModeIndex.RADIAL, 50.0, 0.5)
    assert eigenvalue(mode) > mode.energy
    assert eigenvalue(mode, g=0.0) < mode.energy


def test_interaction_broadens_the_ground_mode():
    narrow = minimize_variational(ModeIndex.GROUND, 0.0, 0.5)
    wide = minimize_variational(ModeIndex.GROUND, 200.0, 0.5)
    assert wide.u < narrow.u and wide.v < narrow.v


@pytest.mark.parametrize("g,lam", [(-1.0, 1.0), (1.0, 0.0), (1.0, -1.0)])
def test_minimizer_input_validation(g, lam):
    with pytest.raises(ValueError):
        minimize_variational(ModeIndex.GROUND, g, lam)


def test_widths_must_be_positive():
    with pytest.raises(ValueError):
        variational_energy(ModeIndex.GROUND, 0.0, 1.0, 1.0, 1.0)


@pytest.mark.parametrize("text,index", [("000", ModeIndex.GROUND), ("(0,1,0)", ModeIndex.VORTEX),
                                        ("axial", ModeIndex.AXIAL), ("1 0 0", ModeIndex.RADIAL)])
def test_mode_index_parsing(text, index):
    assert ModeIndex.parse(text) is index


def test_mode_index_rejects_unknown():
    with pytest.raises(ValueError):
        ModeIndex.parse("200")


def test_minimization_failure_is_a_runtime_error():
    assert issubclass(MinimizationFailure, RuntimeError)


# -- selection rules and overlaps --------------------------------------------


@pytest.fixture(scope="module")
def lab_setup():
    return PhysicalSetup.rb87_reference()


def test_field_coupling_selection_rules(lab_setup):
    ground = lab_setup.mode(ModeIndex.GROUND)
    allowed = abs(beta_integral(ground, lab_setup.mode(ModeIndex.RADIAL)))
    assert allowed > 0.1
    for index in (ModeIndex.VORTEX, ModeIndex.AXIAL):
        assert abs(beta_integral(ground, lab_setup.mode(index))) < 1e-10 * allowed


def test_field_coupling_matches_cylindrical_quadrature(oracle, lab_setup):
    ground, radial = lab_setup.mode(ModeIndex.GROUND), lab_setup.mode(ModeIndex.RADIAL)
    d0 = oracle[ModeIndex.GROUND]["density"]
    dp = oracle[ModeIndex.RADIAL]["density"]

    def integrand(z, r):
        # amplitudes are real and carry the sign of (1 - u r^2)
        amp = math.sqrt(d0(r, z, ground.u, ground.v) * dp(r, z, radial.u, radial.v))
        return 2 * math.pi * r * amp * math.copysign(1, 1 - radial.u * r**2) * math.hypot(r, 2 * z)

    cut_r = 14.0 / math.sqrt(ground.u)
    cut_z = 14.0 / math.sqrt(ground.v)
    # the field magnitude has a kink along r = 0, z = 0; split the axial range there
    lower, _ = dblquad(integrand, 0, cut_r, -cut_z, 0, epsabs=0, epsrel=1e-11)
    upper, _ = dblquad(integrand, 0, cut_r, 0, cut_z, epsabs=0, epsrel=1e-11)
    assert rel(beta_integral(ground, radial), lower + upper) < 1e-7


def test_overlap_vanishes_between_different_symmetries(lab_setup):
    ground = lab_setup.mode(ModeIndex.GROUND)
    assert abs(overlap(ground, lab_setup.mode(ModeIndex.VORTEX))) < 1e-12
    assert abs(overlap(ground, lab_setup.mode(ModeIndex.AXIAL))) < 1e-12


def test_disk_cache_round_trip(tmp_path, monkeypatch):
    from topomode import modes

    monkeypatch.setenv("TOPOMODE_CACHE_DIR", str(tmp_path))
    modes._minimize_cached.cache_clear()
    first = minimize_variational(ModeIndex.RADIAL, 123.0, 0.7)
    assert (tmp_path / "modes.json").exists()
    modes._minimize_cached.cache_clear()
    assert minimize_variational(ModeIndex.RADIAL, 123.0, 0.7) == first


# -- spot values and limits --------------------------------------------------


def test_wavefunction_spot_values():
    ground = minimize_variational(ModeIndex.GROUND, 0.0, 1.0)
    assert wavefunction(ground, 0.0, 0.0, 0.0) == pytest.approx(math.pi ** -0.75, rel=1e-12)
    axial = minimize_variational(ModeIndex.AXIAL, 5.0, 0.7)
    assert wavefunction(axial, 0.8, 1.1, 0.0) == 0
    radial = minimize_variational(ModeIndex.RADIAL, 0.0, 1.0)
    assert abs(wavefunction(radial, 1.0, 0.0, 0.2)) < 1e-12
    vortex = minimize_variational(ModeIndex.VORTEX, 5.0, 0.7)
    value = wavefunction(vortex, 0.5, math.pi / 2, 0.1)
    assert value.real == pytest.approx(0, abs=1e-15) and value.imag > 0


def test_transition_frequencies_in_the_weak_coupling_limit():
    from topomode import AtomSpecies, TrapConfig, transition_frequency

    trap = TrapConfig.from_hz(120.0, 24.0)
    setup = PhysicalSetup(AtomSpecies(1.44e-25, 1e-30, 2), trap)
    assert transition_frequency(setup, ModeIndex.AXIAL) == pytest.approx(trap.omega_z, rel=1e-10)
    assert transition_frequency(setup, ModeIndex.RADIAL) == pytest.approx(2 * trap.omega_r, rel=1e-10)
    with pytest.raises(ValueError):
        transition_frequency(setup, ModeIndex.GROUND)


def test_self_amplitude_positive_and_linear_in_coupling():
    from topomode import alpha

    setup = PhysicalSetup.rb87_reference()
    assert alpha(ModeIndex.RADIAL, ModeIndex.RADIAL, setup) > 0
    ratio = alpha(ModeIndex.GROUND, ModeIndex.RADIAL, setup) / alpha(ModeIndex.RADIAL, ModeIndex.GROUND, setup)
    assert 0 < ratio < 2
    ground, radial = setup.mode(ModeIndex.GROUND), setup.mode(ModeIndex.RADIAL)
    # frozen widths: the amplitude is proportional to (N-1) a_s through g
    assert _alpha_dimless(ground, radial, 2 * setup.g) == pytest.approx(2 * _alpha_dimless(ground, radial, setup.g),
                                                                       rel=1e-14)
    assert _alpha_dimless(ground, radial, 0.0) == 0.0


def test_ground_breathing_overlap_is_reported_not_zero():
    setup = PhysicalSetup.rb87_reference()
    value = overlap(setup.mode(ModeIndex.GROUND), setup.mode(ModeIndex.RADIAL))
    assert abs(value.imag) < 1e-14
    assert 0.05 < abs(value) < 0.5
