import math

import numpy as np
import pytest

import pytransmission.symbol_functions as sf
from pytransmission.symbol_functions import CaseLabel, CutoffSpec, MediumPair
from pytransmission.utility_functions import BranchError


def test_scale_example():
    params = sf.scale(5 + 3j)
    assert params.mu == pytest.approx(4.0)
    assert params.h == pytest.approx(0.25)
    assert params.z == pytest.approx(7.5)
    assert params.theta == pytest.approx(1.875)
    assert (params.h * params.lam) ** 2 == pytest.approx(1 + 1j * params.theta)


@pytest.mark.parametrize("lam", [1 + 0.95j, -2 + 0.1j, 0j])
def test_scale_outside_wedge(lam):
    with pytest.raises(ValueError, match="outside scaling wedge"):
        sf.scale(lam)


def test_p_mode_branch():
    assert sf.p_mode(4.0, 1j) == pytest.approx(-math.sqrt(5))
    assert sf.p_mode(0.0, 3 + 1j).real < 0
    with pytest.raises(BranchError, match="branch ambiguity"):
        sf.p_mode(0.0, 1.0)


def test_p_modes_matches_scalar():
    lam = 20 + 4j
    modes = np.arange(0, 40)
    expected = [sf.p_mode(m ** 2, lam) for m in modes]
    assert np.allclose(sf.p_modes(modes, lam), expected, rtol=1e-14)


def test_rho_hyperbolic_limit():
    at_zero = sf.rho_j(0.5, 1.0, 0.0)
    assert at_zero == pytest.approx(1j * math.sqrt(0.5))
    assert sf.rho_j(0.5, 1.0, 1e-12) == pytest.approx(at_zero, abs=1e-10)


def test_rho_elliptic_and_glancing():
    assert sf.rho_j(4.0, 1.0, 0.0) == pytest.approx(-math.sqrt(3))
    with pytest.raises(BranchError, match="glancing singularity"):
        sf.rho_j(1.0, 1.0, 0.0)


def test_rho_vectorised():
    r0 = np.array([0.2, 2.0, 5.0])
    values = sf.rho_j(r0, 1.5, 0.3)
    assert values.shape == (3,)
    assert np.all(values.real <= 0)


def test_tau_example():
    assert sf.tau(9.0, MediumPair(1, 1, 1, 4), 0.0) == pytest.approx(-math.sqrt(8) + math.sqrt(5))


def test_tau_quotient_identity():
    pair = MediumPair(2, 3, 1, 5)
    r0, theta = 7.0, 0.3
    product = sf.tau(r0, pair, theta) * (pair.c1 * sf.rho_j(r0, pair.m1, theta) + pair.c2 * sf.rho_j(r0, pair.m2, theta))
    assert product == pytest.approx(sf.tau_quotient_rhs(r0, pair, theta), rel=1e-12)


@pytest.mark.parametrize("pair, label", [
    (MediumPair(1, 1, 1, 4), CaseLabel.ISOTROPIC),
    (MediumPair(2, 1, 1, 4), CaseLabel.ANISO_NEGATIVE),
    (MediumPair(1, 1, 2, 1), CaseLabel.ANISO_POSITIVE_DISTINCT),
    (MediumPair(1, 1, 1, 1), CaseLabel.DEGENERATE),
    (MediumPair(2, 1, 2, 3), CaseLabel.DEGENERATE),
])
def test_classify_case(pair, label):
    assert sf.classify_case(pair) == label


def test_medium_pair_parsing():
    pair = MediumPair.from_string("1, 1, 1, 4")
    assert pair.as_dict() == {"c1": 1.0, "n1": 1.0, "c2": 1.0, "n2": 4.0}
    assert pair.m2 == 4.0
    assert math.isnan(MediumPair(1, 2, 2, 1).c0)
    with pytest.raises(ValueError):
        MediumPair.from_string("1,1,1")
    with pytest.raises(ValueError):
        MediumPair(1, -1, 1, 4)


def test_cutoffs_partition_unity():
    t = np.linspace(-3, 3, 61)
    total = CutoffSpec.chi1(t) + CutoffSpec.chi2(t) + CutoffSpec.chi3(t)
    assert np.allclose(total, 1.0)
    assert CutoffSpec.chi3(0.5) == 0.0
    assert CutoffSpec.chi3(2.5) == 1.0
    assert CutoffSpec.chi3(1.5) == pytest.approx(0.5)
    assert CutoffSpec.chi2(0.0) == 1.0


def test_classify_point():
    cutoffs = CutoffSpec(0.1)
    assert sf.classify_point(1.0, cutoffs) == (0.0, 1.0, 0.0)
    assert cutoffs.classify_point(2.0) == (0.0, 0.0, 1.0)
    assert cutoffs.classify_point(0.0) == (1.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        CutoffSpec(0.0)


def test_symbol_table_flags_glancing_points():
    table = sf.symbol_table(MediumPair(1, 1, 1, 4), 0.0, [0.5, 1.0, 3.0])
    assert list(table["flags"]) == ["", "glancing", ""]
    assert set(table["case"]) == {"isotropic"}
    assert table.loc[2, "tau_re"] == pytest.approx(-math.sqrt(8) + math.sqrt(5))


def test_mode_symbol_rescales_to_rho():
    rng = np.random.default_rng(5)
    for _ in range(1000):
        re = rng.uniform(5.0, 500.0)
        lam = complex(re, rng.uniform(1.1, 0.85 * re))
        m = int(rng.integers(0, int(3 * abs(lam)) + 1))
        params = sf.scale(lam)
        scaled = params.h * sf.p_mode(m ** 2, lam)
        assert scaled == pytest.approx(sf.rho_j((params.h * m) ** 2, 1.0, params.theta), rel=1e-10)


def test_branch_discipline():
    rng = np.random.default_rng(6)
    for _ in range(200):
        lam = complex(rng.uniform(1.0, 100.0), rng.uniform(-20.0, 20.0))
        sigma = rng.uniform(0.0, 1.5) * abs(lam) ** 2
        root = sf.p_mode(sigma, lam)
        assert root.real < 0
        assert root ** 2 == pytest.approx(sigma - lam ** 2, rel=1e-12)
        value = sf.rho_j(sigma, 2.0, 0.3)
        assert value.real < 0
        assert value ** 2 == pytest.approx(sigma - (1 + 0.3j) * 2.0, rel=1e-12)


def test_classify_case_is_swap_invariant():
    rng = np.random.default_rng(7)
    for c1, n1, c2, n2 in rng.uniform(0.2, 3.0, (100, 4)):
        assert sf.classify_case(MediumPair(c1, n1, c2, n2)) == sf.classify_case(MediumPair(c2, n2, c1, n1))
