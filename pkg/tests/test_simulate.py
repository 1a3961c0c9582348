import itertools
import math

import numpy as np
import pytest

from conftest import random_scheme_i
from secrecy_lab import kernels
from secrecy_lab.infotheory import Channel, DistortionMeasure, Pmf, build_joint
from secrecy_lab.optimize import binary_wiretap, structured_scheme_i
from secrecy_lab.regions import SchemeISpec
from secrecy_lab.simulate import (
    BudgetError,
    EncodingError,
    SimulationConfig,
    broadcast,
    channel_input,
    codeword_count,
    eavesdropper_estimate,
    generate_codebook,
    likelihood_encode,
    ml_decode,
    reconstruct,
    run_trials,
    scheme_laws,
    softcover_tv,
)

HAMMING = DistortionMeasure.hamming(2)


def bsc_spec(p_s=0.5, u_noise=0.1, bob=0.05, eve=0.3):
    """S -> U = BSC(u_noise) of S, X = U, Y and Z are BSCs of X."""
    return SchemeISpec(
        Pmf([1 - p_s, p_s]),
        Channel.bsc(u_noise),
        Channel([[1, 0], [0, 1], [1, 0], [0, 1]]),
        Channel.product(Channel.bsc(bob), Channel.bsc(eve)),
        [[0, 1], [0, 1]],
        HAMMING,
    )


# ---------------------------------------------------------------- codebook


def test_codeword_count():
    assert codeword_count(8, 0.0) == 1
    assert codeword_count(8, 0.5) == 16
    assert codeword_count(3, 0.5) == math.ceil(2**1.5)
    with pytest.raises(BudgetError):
        codeword_count(200, 0.9)
    with pytest.raises(ValueError):
        codeword_count(4, -0.1)


def test_generate_codebook_basics():
    cb = generate_codebook(Pmf([0.5, 0.5]), 8, 0.0, seed=1)
    assert cb.m_count == 1 and cb.codewords.shape == (1, 8)
    zero = generate_codebook(Pmf([1.0, 0.0, 0.0]), 6, 0.5, seed=2)
    assert not zero.codewords.any()
    a = generate_codebook(Pmf([0.2, 0.8]), 8, 0.5, seed=99)
    b = generate_codebook(Pmf([0.2, 0.8]), 8, 0.5, seed=99)
    assert np.array_equal(a.codewords, b.codewords)
    assert not a.codewords.flags.writeable


def test_codebook_symbol_frequency():
    p1 = 0.3
    counts = [generate_codebook(Pmf([1 - p1, p1]), 8, 0.5, seed).codewords.sum() for seed in range(1000)]
    total = 1000 * 16 * 8
    freq = sum(counts) / total
    sigma = math.sqrt(p1 * (1 - p1) / total)
    assert abs(freq - p1) < 3 * sigma


# ---------------------------------------------------------------- encoder and channel


def test_likelihood_encode_single_codeword():
    spec = bsc_spec()
    cb = generate_codebook(Pmf([0.5, 0.5]), 5, 0.0, seed=0)
    rng = np.random.default_rng(0)
    assert all(likelihood_encode(cb, spec, [1, 0, 1, 1, 0], rng) == 0 for _ in range(20))


def test_likelihood_encode_identical_codewords_is_uniform():
    spec = bsc_spec()
    cb = generate_codebook(Pmf([1.0, 0.0]), 4, 0.5, seed=0)  # 4 identical all-zero words
    rng = np.random.default_rng(3)
    draws = np.array([likelihood_encode(cb, spec, [1, 0, 0, 1], rng) for _ in range(20000)])
    counts = np.bincount(draws, minlength=4)
    sigma = math.sqrt(20000 * 0.25 * 0.75)
    assert np.all(np.abs(counts - 5000) < 3 * sigma)


def test_likelihood_encode_impossible_sequence_raises():
    # U = S exactly, so s^n must equal some codeword
    spec = bsc_spec(u_noise=0.0)
    cb = generate_codebook(Pmf([1.0, 0.0]), 3, 0.0, seed=0)
    with pytest.raises(EncodingError):
        likelihood_encode(cb, spec, [1, 1, 1], np.random.default_rng(0))


def test_likelihood_encoder_single_letter_law():
    # n = 1 and a codebook containing every U symbol once: P(m) = P(s|u_m) / sum
    spec = bsc_spec(p_s=0.3, u_noise=0.2)
    laws = scheme_laws(spec)
    cb = generate_codebook(Pmf([0.5, 0.5]), 1, 1.0, seed=0)
    cb = type(cb)(1, 1.0, 2, np.array([[0], [1]]), 0)
    rng = np.random.default_rng(11)
    n_draws = 20000
    for s in (0, 1):
        want = laws.s_given_u[:, s] / laws.s_given_u[:, s].sum()
        hits = sum(likelihood_encode(cb, spec, [s], rng, laws) == 1 for _ in range(n_draws))
        sigma = math.sqrt(want[1] * (1 - want[1]) / n_draws)
        assert abs(hits / n_draws - want[1]) < 3 * sigma


def test_channel_input_and_broadcast():
    rng = np.random.default_rng(5)
    copy = SchemeISpec(Pmf([0.5, 0.5]), Channel.bsc(0.2), Channel([[1, 0], [1, 0], [0, 1], [0, 1]]),
                       Channel.product(Channel.bsc(0.0), Channel.bsc(0.3)), [[0, 1], [0, 1]], HAMMING)
    s = rng.integers(0, 2, 100_000)
    u = rng.integers(0, 2, 100_000)
    x = channel_input(copy, s, u, rng)
    assert np.array_equal(x, s)
    y, z = broadcast(copy, x, rng)
    assert np.array_equal(y, x)
    flips = np.mean(z != x)
    assert abs(flips - 0.3) < 3 * math.sqrt(0.3 * 0.7 / len(x))


# ---------------------------------------------------------------- decoder


def test_ml_decode_single_codeword_and_noiseless():
    spec = bsc_spec(bob=0.0, u_noise=0.1)
    one = generate_codebook(Pmf([0.5, 0.5]), 6, 0.0, seed=0)
    assert ml_decode(one, spec, [1, 1, 0, 0, 1, 0]) == 0
    words = np.array(list(itertools.product((0, 1), repeat=4)))
    cb = type(one)(4, 1.0, 16, words, 0)
    for m in range(16):
        assert ml_decode(cb, spec, words[m]) == m
    assert np.array_equal(reconstruct(spec, words[5], words[5]), words[5])


def test_ml_decode_ties_go_to_lowest_index():
    spec = bsc_spec(bob=0.1)
    words = np.array([[0, 1], [1, 0], [0, 1]])
    cb = type(generate_codebook(Pmf([0.5, 0.5]), 2, 0.0, 0))(2, 0.8, 3, words, 0)
    assert ml_decode(cb, spec, [0, 0]) == 0
    assert ml_decode(cb, spec, [1, 0]) == 1


def test_decode_error_decreases_with_blocklength():
    spec = bsc_spec(u_noise=0.1, bob=0.05)
    rates = [run_trials(SimulationConfig(spec, n, 0.4, trials=100, codebook_redraws=10, seed=1)).decode_error_rate
             for n in (6, 8, 10, 12)]
    assert rates[2] < 0.2
    assert all(b < a for a, b in zip(rates, rates[1:])), rates


# ---------------------------------------------------------------- eavesdropper


def full_joint_posterior(cb, spec, z_seq, prefix, t):
    """P(s_t | z^n, s^{t-1}) by enumerating (s^n, m, x^n, z^n) with plain loops."""
    n, m_count = cb.n, cb.m_count
    sz = spec.sizes
    ps = spec.p_s.probs
    joint_su = spec.joint().mass.sum(axis=(2, 3, 4))
    s_given_u = joint_su / joint_su.sum(axis=0)
    x_rows = spec.p_x_given_su.rows
    z_given_x = spec.p_yz_given_x.output_marginal(1).rows
    post = np.zeros(sz["S"])
    for s in itertools.product(range(sz["S"]), repeat=n):
        if list(s[: t - 1]) != list(prefix):
            continue
        lik = np.array([np.prod([s_given_u[s[i], cb.codewords[m, i]] for i in range(n)]) for m in range(m_count)])
        if lik.sum() == 0:
            continue
        prior = np.prod(ps[list(s)])
        for m in range(m_count):
            u = cb.codewords[m]
            for x in itertools.product(range(sz["X"]), repeat=n):
                px = np.prod([x_rows[s[i] * sz["U"] + u[i], x[i]] * z_given_x[x[i], z_seq[i]] for i in range(n)])
                post[s[t - 1]] += prior * lik[m] / lik.sum() * px
    return post / post.sum()


def test_eavesdropper_matches_full_joint_enumeration(rng):
    from secrecy_lab.simulate import _suffix_posterior

    for k in range(4):
        spec = random_scheme_i(rng, floor=0.02)
        laws = scheme_laws(spec)
        cb = generate_codebook(Pmf(laws.p_u), 4, 0.5, seed=k)
        z = rng.integers(0, 2, 4)
        s = rng.integers(0, 2, 4)
        for t in (1, 2, 4):
            want = full_joint_posterior(cb, spec, z, s[: t - 1], t)
            got = _suffix_posterior(cb, laws, spec.p_s.probs, z, s[: t - 1])
            assert np.max(np.abs(want - got)) < 1e-10
            a, e = eavesdropper_estimate(cb, spec, z, s[: t - 1], t)
            assert e == pytest.approx((want @ spec.dist.d).min(), abs=1e-10)


def test_eavesdropper_useless_channel_sees_prior():
    spec = bsc_spec(p_s=0.3, eve=0.5)
    cb = generate_codebook(Pmf([0.5, 0.5]), 5, 0.6, seed=4)
    a, e = eavesdropper_estimate(cb, spec, [0, 1, 1, 0, 1], [], 1)
    assert a == 0
    assert e == pytest.approx(0.3, abs=1e-12)


def test_eavesdropper_noiseless_copy_of_source():
    spec = SchemeISpec(Pmf([0.4, 0.6]), Channel.bsc(0.2), Channel([[1, 0], [1, 0], [0, 1], [0, 1]]),
                       Channel.product(Channel.bsc(0.0), Channel.bsc(0.0)), [[0, 1], [0, 1]], HAMMING)
    cb = generate_codebook(Pmf([0.5, 0.5]), 4, 0.5, seed=0)
    for t in (1, 3):
        a, e = eavesdropper_estimate(cb, spec, [1, 0, 0, 1], [1, 0, 0][: t - 1], t)
        assert e == 0.0
        assert a == [1, 0, 0, 1][t - 1]


def test_eavesdropper_errors():
    spec = bsc_spec()
    cb = generate_codebook(Pmf([0.5, 0.5]), 6, 0.5, seed=0)
    with pytest.raises(BudgetError):
        eavesdropper_estimate(cb, spec, [0] * 6, [], 1, budget=100)
    with pytest.raises(ValueError):
        eavesdropper_estimate(cb, spec, [0] * 6, [0, 1], 1)
    # noiseless Eve with X = S: z = 1 is impossible when the source is constant 0
    never = SchemeISpec(Pmf([1.0, 0.0]), Channel.bsc(0.2), Channel([[1, 0], [1, 0], [0, 1], [0, 1]]),
                        Channel.product(Channel.bsc(0.0), Channel.bsc(0.0)), [[0, 1], [0, 1]], HAMMING)
    with pytest.raises(ValueError):
        eavesdropper_estimate(generate_codebook(Pmf([0.5, 0.5]), 3, 0.5, 0), never, [1, 0, 0], [], 1)


def test_oracle_beats_any_fixed_estimator(rng):
    from secrecy_lab.simulate import _suffix_posterior

    spec = random_scheme_i(rng, floor=0.02)
    laws = scheme_laws(spec)
    cb = generate_codebook(Pmf(laws.p_u), 5, 0.6, seed=9)
    tables = [rng.integers(0, 2, size=(2,) * 5) for _ in range(5)]  # psi(z^n)
    for _ in range(10):
        z = rng.integers(0, 2, 5)
        s = rng.integers(0, 2, 5)
        for t in range(1, 6):
            post = _suffix_posterior(cb, laws, spec.p_s.probs, z, s[: t - 1])
            best = (post @ spec.dist.d).min()
            for table in tables:
                assert post @ spec.dist.d[:, table[tuple(z)]] >= best - 1e-15


# ---------------------------------------------------------------- end to end


def test_run_trials_small_and_bounds():
    spec = bsc_spec()
    rep = run_trials(SimulationConfig(spec, 2, 0.0, trials=1, seed=0))
    assert len(rep.d_e_per_time) == 2
    rep = run_trials(SimulationConfig(spec, 6, 0.5, trials=40, codebook_redraws=2, seed=3))
    assert np.all((rep.d_e_per_time >= 0) & (rep.d_e_per_time <= 1))
    assert 0 <= rep.d_b_empirical <= 1 and 0 <= rep.decode_error_rate <= 1
    js = rep.to_json()
    assert len(js["d_e_per_time"]) == 6
    assert rep.per_time_csv().startswith("t,de_t\n1,")


def test_run_trials_reproducible_and_thread_independent():
    spec = bsc_spec()
    cfg = dict(spec=spec, n=6, rate_r=0.5, trials=30, codebook_redraws=4, seed=77)
    a = run_trials(SimulationConfig(**cfg))
    b = run_trials(SimulationConfig(**cfg, threads=3))
    assert a.to_json() == b.to_json()
    c = run_trials(SimulationConfig(**{**cfg, "seed": 78}))
    assert c.to_json() != a.to_json()


def test_identical_channels_leave_little_to_hide():
    # Eve's channel equals Bob's (both noiseless) and U = (S, X): the codeword she
    # reads off Z carries S, so she ends far below the a-priori level 0.2
    spec = structured_scheme_i(Pmf.bernoulli(0.2), np.array([[0.7, 0.3], [0.3, 0.7]]),
                               binary_wiretap(0.0, 0.0), HAMMING)
    rep = run_trials(SimulationConfig(spec, 8, 0.85, trials=100, seed=2))
    assert rep.d_e_per_time.mean() < 0.1
    assert rep.d_e_per_time[-1] < 0.05


def test_budget_guard_in_config():
    with pytest.raises(BudgetError):
        SimulationConfig(bsc_spec(), 20, 0.5, budget=1 << 20)


def test_encoder_fallback_is_counted():
    # U = S exactly and a single codeword: most source sequences have zero likelihood
    spec = bsc_spec(u_noise=0.0)
    rep = run_trials(SimulationConfig(spec, 4, 0.0, trials=50, seed=0))
    assert rep.encoder_failure_rate > 0.5


# ---------------------------------------------------------------- soft covering


def uxz(x_noise=0.15):
    return build_joint([(Pmf([0.5, 0.5]), ()), (Channel.bsc(x_noise), (0,)),
                        (Channel([[0.8, 0.2], [0.8, 0.2], [0.2, 0.8], [0.2, 0.8]]), (0, 1))],
                       ["U", "X", "Z"])


def test_softcover_constant_u_is_exact():
    j = build_joint([(Pmf([1.0]), ()), (Channel([[0.3, 0.7]]), (0,)), (Channel([[0.6, 0.4], [0.1, 0.9]]), (0, 1))])
    assert softcover_tv(j, 0.5, 6, 2, 5, seed=0) == pytest.approx(0.0, abs=1e-12)


def test_softcover_budget_and_range():
    with pytest.raises(BudgetError):
        softcover_tv(uxz(), 1.0, 16, 8, 1, seed=0, budget=1 << 16)
    with pytest.raises(ValueError):
        softcover_tv(uxz(), 1.0, 4, 5, 1, seed=0)
    tv = softcover_tv(uxz(), 0.5, 6, 1, 10, seed=0)
    assert 0.0 <= tv <= 1.0


def test_mixture_is_invariant_to_codeword_order(rng):
    factors = rng.dirichlet(np.ones(3), size=(5, 7))
    perm = rng.permutation(7)
    a = kernels.mixture_density(factors, [3] * 5)
    b = kernels.mixture_density(factors[:, perm, :], [3] * 5)
    assert np.allclose(a, b, rtol=0, atol=1e-14)
