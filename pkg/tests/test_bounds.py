import json
import math

import numpy as np
import pytest

from esid import bounds as B
from esid.errors import DimensionMismatch, ValidationError
from esid.example import build_scenario, fig2_scenario
from esid.probability import (
    BINARY,
    Alphabet,
    WiretapChannel,
    bsc,
    constant_channel,
    identity_channel,
    make_distribution,
    point_mass,
    uniform,
)

CFG = B.OptimizerConfig(restarts=16, seed=0)


def h2_bits(p):
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


CAP_BSC01 = 1 - h2_bits(0.1)


def exact(q):
    return B.StealthConstraint(q)


def constant_eaves_wiretap():
    return WiretapChannel.from_channels(bsc(0.1), constant_channel(BINARY, uniform(BINARY)))


def degraded_bsc_wiretap():
    return WiretapChannel.from_channels(bsc(0.1), bsc(0.3))


def grid_max_mi(w, points=2001):
    """Oracle: max I(X;Y) over binary inputs by a fine grid, in bits."""
    best = 0.0
    for a in np.linspace(0, 1, points):
        p = np.array([a, 1 - a])
        out = p @ w
        v = sum(
            p[x] * w[x, y] * math.log2(w[x, y] / out[y]) for x in range(2) for y in range(w.shape[1]) if p[x] > 0 and w[x, y] > 0
        )
        best = max(best, v)
    return best


def test_constraint_invariants():
    q = uniform(BINARY)
    with pytest.raises(ValidationError):
        B.StealthConstraint(q, "exact", 0.1)
    with pytest.raises(ValidationError):
        B.StealthConstraint(q, "relaxed", 0.0)
    with pytest.raises(ValidationError):
        B.StealthConstraint(q, "loose")
    assert B.StealthConstraint.relaxed(q, 0.2).slack == 0.2


def test_config_invariants():
    with pytest.raises(ValidationError):
        B.OptimizerConfig(restarts=0)
    with pytest.raises(ValidationError):
        B.OptimizerConfig(tol=0)
    assert B.OptimizerConfig().aux_size(4) == 6
    assert B.OptimizerConfig(u_size=3).aux_size(4) == 3


def test_stealth_polytope_membership_examples():
    sc = build_scenario(fig2_scenario())
    wz = sc.eaves
    c = exact(uniform(BINARY))
    assert B.stealth_polytope_membership(uniform(wz.input), wz, c) == pytest.approx(0.0, abs=1e-15)
    assert B.stealth_polytope_membership(point_mass(wz.input, "00"), wz, c) == pytest.approx(0.5)
    p = make_distribution([1, 2, 3, 4], wz.input)
    self_c = exact(make_distribution(p.mass @ wz.rows, wz.output))
    assert B.stealth_polytope_membership(p, wz, self_c) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(DimensionMismatch):
        B.stealth_polytope_membership(uniform(BINARY), wz, c)


def test_relaxed_membership_uses_kl_slack():
    c = B.StealthConstraint.relaxed(uniform(BINARY), 0.01)
    p = make_distribution([0.6, 0.4], BINARY)
    kl = 0.6 * math.log(1.2) + 0.4 * math.log(0.8)
    assert B.stealth_polytope_membership(p, identity_channel(BINARY), c) == pytest.approx(max(0.0, kl - 0.01), abs=1e-15)


def test_prop1_constant_eaves_matches_grid_oracle():
    w = constant_eaves_wiretap()
    r = B.lower_bound_prop1(w, exact(uniform(BINARY)), CFG, "bits")
    assert r.status == "ok"
    assert r.value == pytest.approx(grid_max_mi(bsc(0.1).rows), abs=1e-6)
    assert r.value == pytest.approx(CAP_BSC01, abs=1e-9)
    assert r.argmax.mass == pytest.approx([0.5, 0.5], abs=1e-5)


def test_prop1_identical_channels_zero_gap():
    w = WiretapChannel.from_channels(bsc(0.1), bsc(0.1))
    r = B.lower_bound_prop1(w, exact(uniform(BINARY)), CFG, "bits")
    assert r.status == "ok"
    assert r.value == pytest.approx(CAP_BSC01, abs=1e-9)
    assert r.secrecy_gap == pytest.approx(0.0, abs=1e-12)


def test_cor1_single_letter_aux_gives_zero():
    w = degraded_bsc_wiretap()
    r = B.lower_bound_cor1(w, exact(uniform(BINARY)), B.OptimizerConfig(restarts=8, u_size=1), "bits")
    assert r.status == "ok"
    assert r.value == pytest.approx(0.0, abs=1e-12)


def test_degraded_pair_cor1_thm1_equal_prop1():
    w = degraded_bsc_wiretap()
    c = exact(uniform(BINARY))
    p1 = B.lower_bound_prop1(w, c, CFG, "bits")
    c1 = B.lower_bound_cor1(w, c, CFG, "bits")
    t1 = B.upper_bound_thm1(w, c, CFG, "bits")
    assert p1.value == pytest.approx(CAP_BSC01, abs=1e-9)
    assert c1.value == pytest.approx(p1.value, abs=1e-6)
    assert t1.value == pytest.approx(p1.value, abs=1e-6)


def test_empty_polytope():
    w = WiretapChannel.from_channels(bsc(0.1), bsc(0.1))
    c = exact(point_mass(BINARY, "0"))
    assert B.upper_bound_thm1(w, c, CFG).status == "zero_capacity"
    assert B.lower_bound_prop1(w, c, CFG).status == "infeasible"
    assert B.lower_bound_cor1(w, c, CFG).status == "infeasible"
    assert B.est_upper_bound(w, c, CFG).status == "infeasible"
    assert B.zero_capacity_check(w, c, CFG) == "zero"


def test_zero_capacity_constant_legit_identity_eaves():
    w = WiretapChannel.from_channels(constant_channel(BINARY, uniform(BINARY)), identity_channel(BINARY))
    assert B.zero_capacity_check(w, exact(uniform(BINARY)), CFG) == "zero"


def test_zero_capacity_positive_for_degraded_pair():
    assert B.zero_capacity_check(degraded_bsc_wiretap(), exact(uniform(BINARY)), CFG) == "positive"


def test_est_examples():
    c = exact(uniform(BINARY))
    same = WiretapChannel.from_channels(bsc(0.1), bsc(0.1))
    assert B.est_upper_bound(same, c, CFG).value == pytest.approx(0.0, abs=1e-9)
    r = B.est_upper_bound(constant_eaves_wiretap(), c, CFG, "bits")
    assert r.value == pytest.approx(CAP_BSC01, abs=1e-7)
    assert r.secrecy_gap == r.value


def test_secret_id_examples():
    noiseless = WiretapChannel.from_channels(
        identity_channel(Alphabet.range(4)), constant_channel(Alphabet.range(4), uniform(BINARY))
    )
    assert B.secret_id_rate(noiseless, CFG, "bits").value == pytest.approx(2.0, abs=1e-9)
    dead = WiretapChannel.from_channels(constant_channel(BINARY, uniform(BINARY)), identity_channel(BINARY))
    r = B.secret_id_rate(dead, CFG)
    assert r.value == 0.0
    assert r.status == "zero_capacity"


def test_channel_capacity_blahut_arimoto():
    cap, p = B.channel_capacity(bsc(0.1).rows)
    assert cap / math.log(2) == pytest.approx(CAP_BSC01, abs=1e-10)
    assert p == pytest.approx([0.5, 0.5], abs=1e-8)
    # the third row averages the first two, so it cannot raise capacity
    z = np.array([[0.7, 0.2, 0.1], [0.1, 0.2, 0.7], [0.4, 0.2, 0.4]])
    cap3, _ = B.channel_capacity(z)
    assert cap3 / math.log(2) == pytest.approx(grid_max_mi(z[:2]), abs=1e-6)


def test_returned_points_are_feasible_and_serializable():
    rng = np.random.default_rng(5)
    from esid.checks import random_feasible_instance

    w, q = random_feasible_instance(rng)
    res = B.all_bounds(w, exact(q), CFG)
    for name in ("prop1", "cor1", "thm1", "est"):
        r = res[name]
        if r.status == "ok":
            assert r.stealth_residual <= 1e-7
            assert r.secrecy_gap >= -1e-9
            assert r.value >= 0 or name == "est"
        data = r.to_dict()
        assert data["bound"] == name
        json.dumps(data)
    assert res["zero_capacity"] in ("zero", "positive", "inconclusive")


def test_determinism_across_memo_clear():
    w = degraded_bsc_wiretap()
    c = exact(make_distribution([0.45, 0.55], BINARY))
    first = B.lower_bound_cor1(w, c, CFG).to_dict()
    B._MEMO.clear()
    again = B.lower_bound_cor1(w, c, CFG).to_dict()
    assert json.dumps(first) == json.dumps(again)


def test_relaxed_constraint_widens_value():
    # Q_Z = (0.9, 0.1) under BSC(0.1) is reached only by a point mass, so exact stealth allows no rate
    w = WiretapChannel.from_channels(identity_channel(BINARY), bsc(0.1))
    q = make_distribution([0.9, 0.1], BINARY)
    tight = B.lower_bound_prop1(w, exact(q), CFG)
    loose = B.lower_bound_prop1(w, B.StealthConstraint.relaxed(q, 0.05), CFG)
    assert tight.status == "ok"
    assert tight.value == pytest.approx(0.0, abs=1e-9)
    assert loose.status == "ok"
    assert loose.value > 0.1
    assert loose.stealth_residual <= 1e-7


def test_infeasible_secrecy_under_relaxed_stealth():
    # eaves = identity sees everything legit sees; only point masses meet secrecy and they miss the slack
    w = WiretapChannel.from_channels(bsc(0.1), identity_channel(BINARY))
    q = make_distribution([0.9, 0.1], BINARY)
    assert B.lower_bound_prop1(w, B.StealthConstraint.relaxed(q, 0.05), CFG).status == "infeasible"
