from fractions import Fraction
import math

import pytest

import besicovitch as b


def test_convergents_and_gap():
    g = b.ContinuedFraction.golden()
    assert [g.q(n) for n in range(8)] == [1, 1, 2, 3, 5, 8, 13, 21]
    lo, hi = b.approximation_gap(g, 5)
    qq = g.q(5) * g.q(6)
    assert Fraction(1, 2 * qq) < lo <= hi < Fraction(1, qq)
    alpha = (math.sqrt(5) - 1) / 2
    # the enclosure is far tighter than a double alpha
    assert abs(float(lo) - abs(alpha - g.p(5) / g.q(5))) < 1e-15


def test_birkhoff_matches_direct_sum():
    fam = b.tent_linear(b.ContinuedFraction.golden(), 5)
    x = Fraction(2, 7)
    for k in (0, 1, 5, 17, -9, 40):
        assert b.birkhoff(fam, x, k)["center"] == b.direct_sum(fam, x, k)["center"]


def test_tent_divergence():
    g = b.ContinuedFraction.golden()
    fam = b.tent_linear(g, 6)
    c = b.divergence_certificate(fam, 0, 10)  # q_5 <= 10 < q_6, so the bound is M_6 / 2
    assert c["holds"]
    assert c["bound"] == 3
    assert c["lo"] >= 3


def test_orbit_type_witness_and_classify():
    g = b.ContinuedFraction.golden()
    fam = b.eightpiece(g, [6, 20, 42])
    s = b.orbit_type_set(fam, "-+", 3)
    pts = s.sample(descents=1, seed=3)
    assert pts and all(s.contains(x) for x in pts)
    psi = b.psi_from_phi(fam)
    assert b.classify(pts[0], psi, [1, g.q(6), g.q(20), g.q(42)]) == ("-", "+")


def test_s3_flow_agrees_with_exact_fiber():
    psi = b.psi_from_phi(b.tent_linear(b.ContinuedFraction.golden(), 3))
    t, w, th, s = b.integrate_s3(0.3, 0.2, 0.0, 2.0, 1e-3, psi, stride=2000)[-1]
    ew, eth, es = b.exact_flow(0.3, 0.2, 0.0, t, psi)
    assert abs(s - es) < 1e-8
    assert abs(th - eth) < 1e-9


def test_errors_are_translated():
    short = b.ContinuedFraction.prefix([1, 2, 3])
    with pytest.raises(b.BesiError, match="DepthInsufficient"):
        b.tent_linear(short, 6)
    with pytest.raises(b.BesiError):
        b.fourier(b.tent_linear(b.ContinuedFraction.golden(), 3), 5)
