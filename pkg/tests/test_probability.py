import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from esid.errors import CapExceeded, DimensionMismatch, NegativeMass, OutOfRange, ValidationError, ZeroMass
from esid.probability import (
    BINARY,
    Alphabet,
    Channel,
    Distribution,
    JointDistribution,
    WiretapChannel,
    bec,
    bsc,
    channel,
    compose,
    constant_channel,
    extend,
    identity_channel,
    iid,
    make_distribution,
    marginalize_joint,
    point_mass,
    product,
    product_distribution,
    push_forward,
    uniform,
)


def random_stochastic(rng, rows, cols):
    return rng.dirichlet(np.ones(cols), size=rows)


def test_make_distribution_normalizes():
    assert make_distribution([1, 1], BINARY).mass.tolist() == [0.5, 0.5]
    abc = Alphabet(("a", "b", "c"))
    assert make_distribution([2, 1, 1], abc).mass.tolist() == [0.5, 0.25, 0.25]


def test_make_distribution_errors():
    with pytest.raises(NegativeMass):
        make_distribution([0.5, -0.1], BINARY)
    with pytest.raises(ZeroMass):
        make_distribution([0, 0], BINARY)
    with pytest.raises(DimensionMismatch):
        make_distribution([1, 2, 3], BINARY)


def test_alphabet_rejects_duplicates_and_empty():
    with pytest.raises(ValidationError):
        Alphabet(("a", "a"))
    with pytest.raises(ValidationError):
        Alphabet(())


def test_distribution_validates_sum():
    with pytest.raises(ValidationError):
        Distribution(BINARY, np.array([0.5, 0.4]))


def test_channel_rejects_rows_summing_to_point_nine():
    with pytest.raises(ValidationError, match="sums to 0.9"):
        channel([[0.5, 0.4], [0.1, 0.9]])


def test_bec_rows():
    assert np.array_equal(bec(0).rows, [[1, 0, 0], [0, 0, 1]])
    assert np.array_equal(bec(1).rows, [[0, 1, 0], [0, 1, 0]])
    w = bec(0.6866)
    assert w.rows[0] == pytest.approx([0.3134, 0.6866, 0.0], abs=1e-15)
    assert w.rows[1] == pytest.approx([0.0, 0.6866, 0.3134], abs=1e-15)
    assert w.output.symbols == ("0", "e", "1")
    with pytest.raises(OutOfRange):
        bec(1.5)


def test_bsc_rows():
    assert np.array_equal(bsc(0).rows, np.eye(2))
    assert np.array_equal(bsc(0.5).rows, np.full((2, 2), 0.5))
    assert bsc(1 / 8).rows.tolist() == [[0.875, 0.125], [0.125, 0.875]]
    with pytest.raises(OutOfRange):
        bsc(-0.1)


def test_compose_examples():
    w = bec(0.3)
    assert compose(identity_channel(BINARY), w).allclose(w)
    q, p = 0.1, 0.3
    assert compose(bsc(q), bsc(p)).allclose(bsc(q * (1 - p) + (1 - q) * p))
    eps = 0.6866
    row0 = compose(bsc(1 / 8), bec(eps)).rows[0]
    assert row0 == pytest.approx([0.875 * (1 - eps), eps, 0.125 * (1 - eps)], abs=1e-15)
    with pytest.raises(DimensionMismatch):
        compose(bec(0.3), bsc(0.1))


def test_product_examples():
    ident = identity_channel(BINARY)
    assert np.array_equal(product(ident, ident).rows, np.eye(4))
    eps = 0.4
    w = product(bec(eps), bec(eps))
    assert w.input.symbols == ("00", "01", "10", "11")
    assert w.rows[w.input.index("00"), w.output.index("0e")] == pytest.approx((1 - eps) * eps)
    det = channel([[1.0], [1.0]], BINARY, Alphabet(("z",)))
    assert np.array_equal(product(bsc(0.2), det).rows, np.kron(bsc(0.2).rows, det.rows))


def test_extend_examples():
    w = bsc(0.2)
    assert extend(w, 1).allclose(w)
    q = 0.2
    w2 = extend(w, 2)
    assert w2.rows[w2.input.index("00"), w2.output.index("01")] == pytest.approx((1 - q) * q)
    b2 = extend(bec(0.5), 2)
    assert b2.rows[b2.input.index("01"), b2.output.index("ee")] == pytest.approx(0.25)
    with pytest.raises(CapExceeded):
        extend(bsc(0.1), 12)
    with pytest.raises(OutOfRange):
        extend(w, 0)


def test_push_forward_examples():
    eps = 0.3
    assert push_forward(uniform(BINARY), bsc(0.2)).mass == pytest.approx([0.5, 0.5])
    assert push_forward(point_mass(BINARY, "0"), bec(eps)).mass == pytest.approx([1 - eps, eps, 0])
    assert push_forward(uniform(BINARY), bec(eps)).mass == pytest.approx([(1 - eps) / 2, eps, (1 - eps) / 2])


def test_marginalize_joint_examples():
    j = JointDistribution(BINARY, BINARY, np.full((2, 2), 0.25))
    assert marginalize_joint(j, "left").mass.tolist() == [0.5, 0.5]
    j = JointDistribution(BINARY, BINARY, np.array([[0.5, 0.0], [0.25, 0.25]]))
    assert marginalize_joint(j, "left").mass.tolist() == [0.5, 0.5]
    assert marginalize_joint(j, "right").mass.tolist() == [0.75, 0.25]
    p, q = make_distribution([1, 3], BINARY), make_distribution([2, 1], BINARY)
    jp = JointDistribution(BINARY, BINARY, np.outer(p.mass, q.mass))
    assert marginalize_joint(jp, "right").allclose(q)


def test_wiretap_requires_shared_input():
    with pytest.raises(DimensionMismatch):
        WiretapChannel.from_channels(bsc(0.1), channel([[1.0], [1.0], [1.0]]))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_compose_associative_and_push_forward(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (channel(random_stochastic(rng, 3, 3)) for _ in range(3))
    left = compose(a, compose(b, c))
    right = compose(compose(a, b), c)
    assert np.max(np.abs(left.rows - right.rows)) <= 1e-12
    p = make_distribution(rng.dirichlet(np.ones(3)), a.input)
    direct = push_forward(p, compose(a, b)).mass
    staged = push_forward(push_forward(p, a), b).mass
    assert np.max(np.abs(direct - staged)) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_extend_rows_and_iid_commute(seed, n):
    rng = np.random.default_rng(seed)
    w = channel(random_stochastic(rng, 2, 3))
    wn = extend(w, n)
    assert np.max(np.abs(wn.rows.sum(axis=1) - 1)) <= n * 1e-9
    p = make_distribution(rng.dirichlet(np.ones(2)), w.input)
    lhs = push_forward(iid(p, n), wn).mass
    rhs = iid(push_forward(p, w), n).mass
    assert np.max(np.abs(lhs - rhs)) <= 1e-12


def test_product_commutes_with_product_inputs():
    rng = np.random.default_rng(3)
    w1, w2 = channel(random_stochastic(rng, 2, 3)), channel(random_stochastic(rng, 2, 2))
    p1 = make_distribution(rng.dirichlet(np.ones(2)), w1.input)
    p2 = make_distribution(rng.dirichlet(np.ones(2)), w2.input)
    lhs = push_forward(product_distribution(p1, p2), product(w1, w2)).mass
    rhs = product_distribution(push_forward(p1, w1), push_forward(p2, w2)).mass
    assert np.max(np.abs(lhs - rhs)) <= 1e-12


def test_constant_channel_rows():
    q = make_distribution([1, 3], BINARY)
    c = constant_channel(Alphabet.range(3), q)
    assert isinstance(c, Channel)
    assert np.array_equal(c.rows, np.tile(q.mass, (3, 1)))
