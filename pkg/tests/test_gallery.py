from fractions import Fraction

import numpy as np
import pytest

from comideal.exactseq import IdealSpec, SearchBounds, stability_probe
from comideal.gallery.ex15 import (
    DEFAULT_SCHEDULE,
    MILD_SCHEDULE,
    Schedule,
    ScheduleError,
    build_ex15,
    build_w_and_refute,
    check_product_inequality,
    check_rearrangement_bound,
    sample_indices,
    theta_brute_force,
    theta_exact,
    theta_table,
)
from comideal.gallery.matrices import MatrixScaleError, assemble_ex15_matrices, assemble_thm13_matrices
from comideal.gallery.thm13 import Thm13SearchError, build_thm13, check_thm13_estimates, toy_unstable_sequence


@pytest.fixture(scope="module")
def default():
    return build_ex15(DEFAULT_SCHEDULE)


@pytest.fixture(scope="module")
def mild():
    return build_ex15(MILD_SCHEDULE, strict=False)


@pytest.fixture(scope="module")
def toy_bundle():
    t = toy_unstable_sequence(14)
    probe = stability_probe(t, SearchBounds(4, 2, t.coverage))
    return build_thm13(IdealSpec.principal(t), t, 6, probe=probe)


# --- schedule and sequences ------------------------------------------------


def test_schedule_growth():
    assert Schedule(DEFAULT_SCHEDULE).conforming
    assert Schedule(MILD_SCHEDULE).growth_failure() == 1
    with pytest.raises(ScheduleError):
        build_ex15(MILD_SCHEDULE)
    with pytest.raises(ValueError):
        Schedule((1, 2))


def test_u_v_blocks(default):
    p, q = default.p, default.q
    assert q == (0, 3, 14, 81, 468)
    for n in range(1, 4):
        assert default.u.value_at((1 << p[n]) - 1).exponent == -p[n]
        assert default.v.value_at((1 << q[n]) - 1).exponent == n - p[n + 1]


def test_product_inequality_default(default):
    pc = check_product_inequality(default, 1 << default.q[3])
    assert pc.ok and pc.interior_ok
    assert [m for _, m in pc.margins] == [-2, -33290, -7291333849550732203721226]
    assert all(s["closed_form_agrees"] for s in pc.superblocks)


def test_product_inequality_fails_for_mild(mild):
    assert not check_product_inequality(mild).ok


def test_theta_exact_equals_brute_force(mild):
    rng = np.random.default_rng(11)
    ks = set(sample_indices(mild, 2000))
    while len(ks) < 50:
        ks.add(int(rng.integers(1, 2001)))
    for k in sorted(ks):
        assert theta_exact(mild, k).value.fraction() == theta_brute_force(mild, k)


def test_theta_table_default(default):
    rows = theta_table(default)
    assert [r["n"] for r in rows] == [1, 2, 3]
    assert rows[0]["holds"]
    # measured: the claimed lower bound and growth fail from n = 2 on
    assert not rows[1]["holds"] and not rows[2]["holds"]
    assert rows[1]["theta_over_bound"] == f"{7165 / 8192:.6g}"
    assert rows[2]["theta_over_bound"] == "0.46875"


def test_refutation_default(default):
    out = build_w_and_refute(default, alphas=(1, Fraction(1, 2)), cs=(1, 1 << 10))
    grid = {(g["alpha"], g["c"]): g for g in out["grid"]}
    assert grid[("1", "1")]["refuted"]
    assert grid[("1", "1")]["witness"]["excess_log2"] == -62
    assert not grid[("1/2", "1024")]["refuted"]
    assert out["w_bounds"]["ok"]


def test_rearrangement_mild(mild):
    r = check_rearrangement_bound(mild, 2000)
    assert r["ok"]


# --- matrices --------------------------------------------------------------


@pytest.mark.parametrize("route", ["commutator", "horn"])
def test_ex15_matrices(default, route):
    m = assemble_ex15_matrices(default, 127, route)
    assert m["strictly_upper"] and m["T_pow_N_zero"]
    assert np.array_equal(np.diag(m["A"]).real, [float(x) for x in default.w_values(127)])
    if route == "horn":
        assert m["svd_vs_u"]


def test_ex15_matrices_scale_guard(default):
    with pytest.raises(MatrixScaleError):
        assemble_ex15_matrices(default, 5000, "horn")


def test_thm13_matrices(toy_bundle):
    m = assemble_thm13_matrices(toy_bundle, toy_bundle.m[0])
    assert m["svd_vs_t"]
    assert m["eig_T_error"] <= 1e-8 and m["eig_D_error"] <= 1e-8
    assert m["eig_T_vs_lambda"] <= 1e-8


# --- non-stable pair construction-----------------------------------------


def test_thm13_invariants(toy_bundle):
    b = toy_bundle
    assert b.checks["invariants"]["all"]
    assert b.m[:2] == [31, 262141]
    assert all(r >= 1 - 1 / n for n, r in enumerate(b.ratios, start=1))


def test_thm13_lambda_is_lambda_prime_plus_w(toy_bundle):
    b = toy_bundle
    lp, lam = b.lambda_prime, b.lam
    m0 = b.m[0]
    assert lam.value_at(1) == lp.value_at(1) + b.wbar[0]
    assert lam.value_at(m0 + 1) == lp.value_at(m0 + 1) - b.wbar[0]


def test_thm13_estimates(toy_bundle):
    est = check_thm13_estimates(toy_bundle)
    assert est["closed_forms"] and est["crude_all"]
    assert est["lambda_prime"]["member"] and not est["lambda"]["member"]
    assert est["all"]


def test_thm13_needs_unstable_t():
    from comideal.exactseq import BlockSequence, Dyadic

    g = BlockSequence([(Dyadic.pow2(-k), 1) for k in range(1, 40)])
    with pytest.raises(ValueError):
        build_thm13(IdealSpec.principal(g), g, 2)


def test_thm13_reports_short_coverage():
    t = toy_unstable_sequence(14)
    probe = stability_probe(t, SearchBounds(4, 2, t.coverage))
    with pytest.raises(Thm13SearchError):
        build_thm13(IdealSpec.principal(t), t, 8, probe=probe)
