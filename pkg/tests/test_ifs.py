"""Conformal map families, cylinder geometry, constants, stopping families."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from selfconformal.ifs import (
    Affine1D,
    Box,
    Moebius1D,
    Similarity2D,
    apply_word,
    builtin_system,
    check_osc,
    contraction_constants,
    lambda_rho,
    map_apply,
    system_from_json,
    system_to_json,
)
from selfconformal.symbolic import FiniteWord, PointRd, word


# ---------------------------------------------------------------------------
# map arithmetic oracles
# ---------------------------------------------------------------------------

def test_quartet_maps_tile_unit_interval():
    sys_ = builtin_system("moebius_interval_quartet")
    # phi_1[0,1]=[0,1/4], phi_2=[1/4,1/2], phi_3=[1/2,2/3], phi_4=[2/3,1]
    expected = [(0.0, 0.25), (0.25, 0.5), (0.5, 2.0 / 3.0), (2.0 / 3.0, 1.0)]
    for m, (lo, hi) in zip(sys_.maps, expected):
        img_lo = map_apply(m, PointRd((0.0,))).x
        img_hi = map_apply(m, PointRd((1.0,))).x
        a, b = min(img_lo, img_hi), max(img_lo, img_hi)
        assert abs(a - lo) < 1e-15 and abs(b - hi) < 1e-15


def test_quartet_map_values():
    sys_ = builtin_system("moebius_interval_quartet")
    x = 0.3
    vals = [x / 4.0, 1.0 / (2.0 * (1.0 + x)), (1.0 + x) / (2.0 + x), 2.0 / (2.0 + x)]
    for m, v in zip(sys_.maps, vals):
        assert abs(map_apply(m, PointRd((x,))).x - v) < 1e-15


def test_moebius_composition_associative():
    sys_ = builtin_system("moebius_interval_quartet")
    I = word((2, 3, 1, 4, 2, 3), 4)
    x = PointRd((0.37,))
    # compose via word_map matrix vs sequential application
    seq = apply_word(sys_, I, x)
    mat = sys_.word_map(I)
    from selfconformal.ifs import _moebius_apply

    assert abs(_moebius_apply(mat, 0.37) - seq.x) < 1e-12


def test_fixed_points():
    sys_ = builtin_system("moebius_interval_quartet")
    assert abs(sys_.base_point().x - 0.0) < 1e-15
    c = builtin_system("middle_third_cantor")
    assert abs(c.base_point().x) < 1e-15
    g = builtin_system("sierpinski_triangle")
    assert np.allclose(g.base_point().coords, (0.0, 0.0))


def test_iterate_power_detection():
    assert builtin_system("moebius_interval_quartet").iterate_power == 1
    assert builtin_system("moebius_interval_pair").iterate_power == 2
    assert builtin_system("middle_third_cantor").iterate_power == 1


def test_pair_square_equals_quartet():
    """The four-branch system is the square of the two-branch one."""
    pair = builtin_system("moebius_interval_pair")
    quartet = builtin_system("moebius_interval_quartet")
    # depth-2 words of the pair, in image order, match quartet branches:
    # 11 -> x/4, 12 -> phi_1(1/(1+x)) = 1/(2(1+x)), 22 -> (1+x)/(2+x)? check
    xs = np.linspace(0.0, 1.0, 7)
    combos = {
        (1, 1): 0,  # x/4
        (1, 2): 1,  # 1/(2(1+x))
        (2, 2): 2,  # phi_2(phi_2 x) = 1/(1+1/(1+x)) = (1+x)/(2+x)
        (2, 1): 3,  # phi_2(x/2) = 1/(1+x/2) = 2/(2+x)
    }
    for combo, idx in combos.items():
        for x in xs:
            lhs = apply_word(pair, word(combo, 2), PointRd((x,))).x
            rhs = map_apply(quartet.maps[idx], PointRd((x,))).x
            assert abs(lhs - rhs) < 1e-14


def test_kappa_values():
    assert abs(builtin_system("middle_third_cantor").kappa - 1.0 / 3.0) < 1e-15
    # quartet: sup|phi'| per branch = 1/4, 1/2, 1/4, 1/2 -> kappa = 1/2
    assert abs(builtin_system("moebius_interval_quartet").kappa - 0.5) < 1e-15
    # pair: second branch has |phi'(0)| = 1
    assert abs(builtin_system("moebius_interval_pair").kappa - 1.0) < 1e-15
    assert abs(builtin_system("sierpinski_triangle").kappa - 0.5) < 1e-15


def test_cylinder_geometry_cantor():
    sys_ = builtin_system("middle_third_cantor")
    geo = sys_.cylinder_geometry(word((2, 1), 2))
    # K_{21} = [2/3, 7/9]
    assert abs(geo.anchor.x - 2.0 / 3.0) < 1e-15
    assert abs(geo.diameter[0] - 1.0 / 9.0) < 1e-15
    assert abs(geo.diameter[1] - 1.0 / 9.0) < 1e-15
    box = sys_.word_box(word((2, 1), 2))
    assert abs(box.lo[0] - 2.0 / 3.0) < 1e-15 and abs(box.hi[0] - 7.0 / 9.0) < 1e-15


def test_cylinder_geometry_quartet_depth1():
    sys_ = builtin_system("moebius_interval_quartet")
    lens = [0.25, 0.25, 1.0 / 6.0, 1.0 / 3.0]
    for j, ln in enumerate(lens, start=1):
        geo = sys_.cylinder_geometry(word((j,), 4))
        assert abs(geo.diameter[0] - ln) < 1e-15


def test_gasket_cylinder_diameter_exact():
    g = builtin_system("sierpinski_triangle")
    geo = g.cylinder_geometry(word((2, 1, 1), 3))
    assert abs(geo.diameter[0] - 0.125) < 1e-15
    assert abs(geo.diameter[1] - 0.125) < 1e-15
    # anchor = phi_2 phi_1 phi_1 (0,0) = phi_2 phi_1 (0,0) = phi_2 (0,0) = (1/2, 0)
    assert np.allclose(geo.anchor.coords, (0.5, 0.0))


def test_apply_word_outside_domain_raises():
    sys_ = builtin_system("middle_third_cantor")
    with pytest.raises(ValueError):
        apply_word(sys_, word((1,), 2), PointRd((2.0,)))


# ---------------------------------------------------------------------------
# constants
# ---------------------------------------------------------------------------

def test_contraction_constants_cantor():
    sys_ = builtin_system("middle_third_cantor")
    c = contraction_constants(sys_, 4)
    assert abs(c["kappa"] - 1.0 / 3.0) < 1e-15
    assert abs(c["C1"] - 1.0) < 1e-12  # no distortion for affine maps
    assert abs(c["C3"] - 1.0) < 1e-12  # |K_I| = kappa^{|I|} exactly
    assert abs(c["C4"] - 1.0) < 1e-12  # exact multiplicativity


def test_contraction_constants_quartet_distortion():
    sys_ = builtin_system("moebius_interval_quartet")
    c = contraction_constants(sys_, 4)
    # branch 2 derivative 1/(2(1+x)^2): distortion on [0,1] is 4
    assert c["C1"] >= 4.0 - 1e-12
    assert c["C1"] < 50.0
    assert c["C4"] >= 1.0


def test_depth_for_diameter():
    sys_ = builtin_system("middle_third_cantor")
    d = sys_.depth_for_diameter(1e-6)
    assert (1.0 / 3.0) ** d < 1e-6
    assert d <= math.ceil(6 * math.log(10) / math.log(3)) + 1
    pair = builtin_system("moebius_interval_pair")
    d2 = pair.depth_for_diameter(1e-4)
    assert d2 % 2 == 0  # whole blocks of the contracting power
    geo = pair.cylinder_geometry(word((2,) * d2, 2))
    assert geo.diameter[1] < 1e-4


# ---------------------------------------------------------------------------
# stopping families
# ---------------------------------------------------------------------------

def test_lambda_rho_cantor_levels():
    sys_ = builtin_system("middle_third_cantor")
    fam = lambda_rho(sys_, 0.5)
    # diameters 1/3 < 0.5 <= 1 -> exactly the two depth-1 words
    assert sorted(w.symbols for w in fam) == [(1,), (2,)]
    fam2 = lambda_rho(sys_, 1.0 / 9.0 + 1e-9)
    assert all(len(w) == 2 for w in fam2) and len(fam2) == 4


def test_lambda_rho_root_and_errors():
    sys_ = builtin_system("middle_third_cantor")
    assert lambda_rho(sys_, 2.0)[0].symbols == ()
    with pytest.raises(ValueError):
        lambda_rho(sys_, 0.0)


def test_lambda_rho_quartet_mixed_depths():
    sys_ = builtin_system("moebius_interval_quartet")
    rho = 0.2
    fam = lambda_rho(sys_, rho)
    # antichain covering: no word a prefix of another, diameters < rho,
    # parents >= rho
    symbols = [w.symbols for w in fam]
    for a in symbols:
        for b in symbols:
            if a != b:
                assert a != b[: len(a)]
    for w in fam:
        geo = sys_.cylinder_geometry(w)
        assert geo.diameter[1] < rho
        parent = FiniteWord(w.symbols[:-1], 4)
        assert sys_.cylinder_geometry(parent).diameter[1] >= rho


@given(st.floats(min_value=0.01, max_value=0.9))
@settings(max_examples=30, deadline=None)
def test_lambda_rho_masses_cover_interval(rho):
    """Stopping-family cylinders of the quartet tile [0,1] (total length 1)."""
    sys_ = builtin_system("moebius_interval_quartet")
    fam = lambda_rho(sys_, rho)
    total = sum(sys_.cylinder_geometry(w).diameter[0] for w in fam)
    assert abs(total - 1.0) < 1e-9


# ---------------------------------------------------------------------------
# open set condition
# ---------------------------------------------------------------------------

def test_check_osc_builtins():
    for name in [
        "middle_third_cantor",
        "moebius_interval_quartet",
        "moebius_interval_pair",
        "sierpinski_triangle",
        "two_line_cantor",
    ]:
        rep = check_osc(builtin_system(name))
        assert rep["holds"], name
        assert rep["max_overlap"] < 1e-12


def test_check_osc_fails_on_overlapping_maps():
    from selfconformal.ifs import IfsSystem

    bad = IfsSystem(
        maps=[Affine1D(0.6, 0.0), Affine1D(0.6, 0.4)],
        dim=1,
        domain=Box((0.0,), (1.0,)),
        attractor_box=Box((0.0,), (1.0,)),
        osc_witness=Box((0.0,), (1.0,)),
    )
    rep = check_osc(bad)
    assert not rep["holds"]


# ---------------------------------------------------------------------------
# JSON round trip
# ---------------------------------------------------------------------------

@pytest.mark.parametrize(
    "name",
    [
        "middle_third_cantor",
        "moebius_interval_quartet",
        "moebius_interval_pair",
        "sierpinski_triangle",
        "two_line_cantor",
    ],
)
def test_json_round_trip_bit_exact(name):
    sys_ = builtin_system(name)
    blob = json.dumps(system_to_json(sys_))
    sys2 = system_from_json(json.loads(blob))
    assert system_to_json(sys2) == system_to_json(sys_)
    # float fields preserved bit-exactly
    for m1, m2 in zip(sys_.maps, sys2.maps):
        assert type(m1) is type(m2)
        assert m1 == m2
    blob2 = json.dumps(system_to_json(sys2))
    assert blob == blob2


def test_validation_rejects_bad_maps():
    with pytest.raises(ValueError):
        Affine1D(1.5, 0.0)
    with pytest.raises(ValueError):
        Moebius1D(1.0, 0.0, 0.0, 0.0)  # p*s - q*r = 0... (1*0-0*0)=0
    with pytest.raises(ValueError):
        Similarity2D(1.2, 0.0, False, (0.0, 0.0))
