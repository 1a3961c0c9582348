import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from secrecy_lab.infotheory import (
    Channel,
    DistortionMeasure,
    DistributionError,
    JointDist,
    Pmf,
    binary_entropy,
    build_joint,
    condition,
    conditional_entropy,
    conditional_mutual_information,
    entropy,
    marginalize,
    mutual_information,
    tv_distance,
)

H_03 = -(0.3 * math.log2(0.3) + 0.7 * math.log2(0.7))


def test_entropy_examples():
    assert entropy(Pmf([0.5, 0.5])) == pytest.approx(1.0, abs=1e-15)
    assert entropy(Pmf([1.0, 0.0])) == 0.0
    assert entropy(Pmf([0.3, 0.7])) == pytest.approx(0.881290899230693, abs=1e-12)
    assert binary_entropy(0.3) == pytest.approx(H_03, abs=1e-15)


def test_pmf_validation():
    with pytest.raises(DistributionError):
        Pmf([0.5, 0.6])
    with pytest.raises(DistributionError):
        Pmf([1.2, -0.2])
    with pytest.raises(DistributionError):
        Pmf([])
    # drift inside tolerance is renormalized once, exactly
    p = Pmf([0.5, 0.5 + 5e-10])
    assert p.probs.sum() == 1.0
    assert p.alphabet_size == 2


def test_pmf_and_channel_json_roundtrip():
    p = Pmf([0.2, 0.3, 0.5])
    assert np.array_equal(Pmf.from_json(p.to_json()).probs, p.probs)
    ch = Channel.product(Channel.bsc(0.1), Channel([[0.2, 0.8], [0.6, 0.4]]))
    back = Channel.from_json(ch.to_json())
    assert back.output_shape == (2, 2)
    assert np.array_equal(back.rows, ch.rows)
    assert np.array_equal(Channel.from_json({"bsc": {"p": 0.25}}).rows, [[0.75, 0.25], [0.25, 0.75]])


def test_broadcast_flattening_is_row_major():
    ch = Channel.product(Channel([[0.1, 0.9], [1, 0]]), Channel([[0.5, 0.5], [0.3, 0.7]]))
    # column y * |Z| + z holds P(y|x) P(z|x)
    assert ch.rows[0, 1 * 2 + 0] == pytest.approx(0.9 * 0.5)
    assert ch.rows[1, 0 * 2 + 1] == pytest.approx(1.0 * 0.7)
    assert np.allclose(ch.output_marginal(0).rows, [[0.1, 0.9], [1, 0]])
    assert np.allclose(ch.output_marginal(1).rows, [[0.5, 0.5], [0.3, 0.7]])


def test_mutual_information_examples():
    fair = Pmf.uniform(2)
    indep = build_joint([(fair, ()), (Channel([[0.5, 0.5], [0.5, 0.5]]), (0,))])
    assert mutual_information(indep, 0, 1) == pytest.approx(0.0, abs=1e-15)
    copy = build_joint([(fair, ()), (Channel.identity(2), (0,))])
    assert mutual_information(copy, 0, 1) == pytest.approx(1.0, abs=1e-15)
    bsc = build_joint([(fair, ()), (Channel.bsc(0.3), (0,))])
    assert mutual_information(bsc, 0, 1) == pytest.approx(1 - H_03, abs=1e-12)
    assert mutual_information(bsc, 0, 1) == pytest.approx(0.118709100769307, abs=1e-12)


def test_overlapping_groups_raise():
    j = build_joint([(Pmf.uniform(2), ()), (Channel.bsc(0.1), (0,))], ["A", "B"])
    with pytest.raises(ValueError):
        mutual_information(j, ["A"], ["A", "B"])
    with pytest.raises(ValueError):
        conditional_mutual_information(j, "A", "B", "B")


def test_conditional_mutual_information_examples():
    fair = Pmf.uniform(2)
    # A = B uniform, C an independent coin
    j = build_joint([(fair, ()), (Channel.identity(2), (0,)), (fair, ())], ["A", "B", "C"])
    assert conditional_mutual_information(j, "A", "B", "C") == pytest.approx(1.0, abs=1e-14)
    # Markov chain A - C - B
    m = build_joint([(fair, ()), (Channel.bsc(0.2), (0,)), (Channel.bsc(0.35), (1,))], ["A", "C", "B"])
    assert conditional_mutual_information(m, "A", "B", "C") == pytest.approx(0.0, abs=1e-14)
    # S uniform, U = S, Z = BSC(0.3) of S: I(S;U|Z) = H(S|Z) = h(0.3)
    k = build_joint([(fair, ()), (Channel.identity(2), (0,)), (Channel.bsc(0.3), (0,))], ["S", "U", "Z"])
    assert conditional_mutual_information(k, "S", "U", "Z") == pytest.approx(H_03, abs=1e-12)
    assert conditional_entropy(k, "S", "Z") == pytest.approx(H_03, abs=1e-12)


def test_build_joint_examples():
    single = build_joint([(Pmf([0.3, 0.7]), ())])
    assert np.array_equal(single.mass, [0.3, 0.7])
    diag = build_joint([(Pmf.uniform(2), ()), (Channel.identity(2), (0,))])
    assert np.array_equal(diag.mass, [[0.5, 0], [0, 0.5]])
    j = build_joint([(Pmf([0.3, 0.7]), ()), (Channel.bsc(0.3), (0,))])
    assert np.allclose(j.mass, [[0.21, 0.09], [0.21, 0.49]], atol=1e-15)


def test_build_joint_dimension_mismatch():
    with pytest.raises(ValueError):
        build_joint([(Pmf.uniform(3), ()), (Channel.bsc(0.1), (0,))])
    with pytest.raises(ValueError):
        build_joint([(Pmf.uniform(2), ()), (Channel.bsc(0.1), (1,))])


def test_build_joint_composite_inputs_and_outputs():
    # X depends on (S, U) through the row index s * |U| + u
    rows = np.array([[1, 0], [0, 1], [0, 1], [1, 0]], dtype=float)  # X = S xor U
    j = build_joint(
        [(Pmf([0.4, 0.6]), ()), (Pmf([0.25, 0.75]), ()), (Channel(rows), (0, 1)),
         (Channel.product(Channel.identity(2), Channel.bsc(0.5)), (2,))],
        ["S", "U", "X", "Y", "Z"],
    )
    assert j.shape == (2, 2, 2, 2, 2)
    assert j.mass[1, 0, 1, 1, 0] == pytest.approx(0.6 * 0.25 * 0.5)
    assert j.mass[1, 1, 1].sum() == 0.0


def test_marginalize_condition_tv():
    j = build_joint([(Pmf([0.3, 0.7]), ()), (Channel.bsc(0.3), (0,))], ["A", "B"])
    assert np.allclose(marginalize(j, ["B"]).mass, [0.42, 0.58])
    c = condition(j, "A", 1)
    assert c.variable_names == ("B",)
    assert np.allclose(c.mass, [0.3, 0.7])
    z = build_joint([(Pmf([1.0, 0.0]), ()), (Channel.bsc(0.1), (0,))])
    with pytest.raises(ValueError):
        condition(z, 0, 1)
    assert tv_distance(Pmf([0.3, 0.7]), Pmf([0.3, 0.7])) == 0.0
    assert tv_distance(Pmf([1, 0]), Pmf([0, 1])) == 1.0
    assert tv_distance(Pmf([0.3, 0.7]), Pmf([0.5, 0.5])) == pytest.approx(0.2, abs=1e-15)


def test_joint_json_roundtrip():
    j = build_joint([(Pmf([0.3, 0.7]), ()), (Channel.bsc(0.3), (0,))], ["S", "Z"])
    back = JointDist.from_json(j.to_json())
    assert back.variable_names == ("S", "Z")
    assert np.array_equal(back.mass, j.mass)


def test_distortion_measure():
    d = DistortionMeasure.hamming(3)
    assert d.d_max == 1.0
    assert d.d[1, 1] == 0.0
    with pytest.raises(DistributionError):
        DistortionMeasure([[0, -1]])


# ---------------------------------------------------------------- properties

joint_arrays = arrays(
    np.float64, st.tuples(st.integers(1, 3), st.integers(1, 3), st.integers(1, 3)),
    elements=st.floats(0, 1, allow_nan=False, allow_infinity=False),
).filter(lambda a: a.sum() > 1e-3)


def _joint(a):
    return JointDist(["A", "B", "C"], a / a.sum())


@settings(max_examples=150, deadline=None)
@given(joint_arrays)
def test_mi_bounds_and_symmetry(a):
    j = _joint(a)
    i_ab = mutual_information(j, "A", "B")
    h_a = entropy(marginalize(j, ["A"]).mass)
    h_b = entropy(marginalize(j, ["B"]).mass)
    assert -1e-12 <= i_ab <= min(h_a, h_b) + 1e-10
    assert i_ab == pytest.approx(mutual_information(j, "B", "A"), abs=1e-12)
    h_ab = entropy(marginalize(j, ["A", "B"]).mass.ravel())
    assert i_ab == pytest.approx(max(h_a + h_b - h_ab, 0.0), abs=1e-10)


@settings(max_examples=150, deadline=None)
@given(joint_arrays)
def test_chain_rule(a):
    j = _joint(a)
    lhs = mutual_information(j, "A", ["B", "C"])
    rhs = mutual_information(j, "A", "C") + conditional_mutual_information(j, "A", "B", "C")
    assert lhs == pytest.approx(rhs, abs=1e-10)


prob_vectors = st.integers(1, 5).flatmap(
    lambda k: st.tuples(*[arrays(np.float64, k, elements=st.floats(0, 1)).filter(lambda v: v.sum() > 1e-3)
                          for _ in range(3)])
)


@settings(max_examples=150, deadline=None)
@given(prob_vectors)
def test_tv_metric(triple):
    p, q, r = (Pmf(v / v.sum()) for v in triple)
    assert tv_distance(p, q) == pytest.approx(tv_distance(q, p), abs=1e-15)
    assert tv_distance(p, r) <= tv_distance(p, q) + tv_distance(q, r) + 1e-12
    assert 0.0 <= tv_distance(p, q) <= 1.0 + 1e-12


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_build_then_marginalize_recovers_first(ns, ny, seed):
    rng = np.random.default_rng(seed)
    p = Pmf(rng.dirichlet(np.ones(ns)))
    ch = Channel(rng.dirichlet(np.ones(ny), size=ns))
    j = build_joint([(p, ()), (ch, (0,))])
    assert np.allclose(marginalize(j, [0]).mass, p.probs, atol=1e-15, rtol=0)
