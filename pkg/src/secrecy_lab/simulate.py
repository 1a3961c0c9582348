"""Finite-blocklength hybrid coding (Scheme I) and exact soft-covering checks.

The simulated system: a random codebook drawn i.i.d. from P_U, a likelihood
encoder choosing codeword m with probability proportional to
P(s^n | u^n(m)), a memoryless stochastic map to channel inputs, exact
maximum-likelihood decoding at the legitimate receiver followed by
symbol-by-symbol reconstruction phi(u, y), and an eavesdropper that sees
z^n plus the source prefix s^{t-1} and computes its exact posterior on s_t.

Sequences are indexed row-major with time 0 most significant.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .infotheory import JointDist, Pmf, mutual_information
from .regions import SchemeISpec, eval_scheme_i

DEFAULT_BUDGET = 1 << 25
MAX_CODEWORDS = 1 << 24

# stage tags for per-trial seed derivation
_CODEBOOK, _SOURCE, _ENCODE, _CHANNEL, _BROADCAST = range(5)


class BudgetError(RuntimeError):
    """An exact enumeration would exceed the configured budget."""


class EncodingError(RuntimeError):
    """Every codeword gives the source sequence zero likelihood."""


def enumeration_budget() -> int:
    env = os.environ.get("SECRECY_LAB_BUDGET")
    return int(env) if env else DEFAULT_BUDGET


def _check_budget(what: str, size: int, budget: Optional[int]) -> None:
    budget = enumeration_budget() if budget is None else budget
    if size > budget:
        raise BudgetError(f"{what}: enumeration size {size} exceeds budget {budget}")


def codeword_count(n: int, rate_r: float) -> int:
    """ceil(2^{nR}), guarded against overflow."""
    if rate_r < 0:
        raise ValueError("rate must be >= 0")
    exponent = n * rate_r
    if exponent > math.log2(MAX_CODEWORDS):
        raise BudgetError(f"2^(nR) = 2^{exponent:.2f} codewords exceeds {MAX_CODEWORDS}")
    # guard against 2^{integer} landing a hair above an integer
    return max(1, math.ceil(2.0**exponent - 1e-9))


def derive_seed(seed: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))


def derive_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, *key))


def _sample_rows(rows: np.ndarray, idx: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Draw one symbol per entry of ``idx`` from ``rows[idx]`` by inverse CDF."""
    cum = np.cumsum(rows[idx], axis=1)
    u = rng.random(len(idx))
    out = (u[:, None] >= cum).sum(axis=1)
    return np.minimum(out, rows.shape[1] - 1)


# ---------------------------------------------------------------- codebook


@dataclass(frozen=True, eq=False)
class CodebookInstance:
    n: int
    rate_r: float
    m_count: int
    codewords: np.ndarray  # (m_count, n) ints over the U alphabet
    seed: int

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "rate_r": self.rate_r,
            "m_count": self.m_count,
            "seed": self.seed,
            "codewords": self.codewords.tolist(),
        }


def generate_codebook(p_u: Pmf, n: int, rate_r: float, seed: int) -> CodebookInstance:
    """ceil(2^{nR}) codewords of length n, symbols i.i.d. from ``p_u``."""
    if n < 1:
        raise ValueError("blocklength must be >= 1")
    m_count = codeword_count(n, rate_r)
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    flat = _sample_rows(p_u.probs[None, :], np.zeros(m_count * n, dtype=np.intp), rng)
    words = flat.reshape(m_count, n)
    words.setflags(write=False)
    return CodebookInstance(n, float(rate_r), m_count, words, int(seed))


# ---------------------------------------------------------------- derived laws


@dataclass(frozen=True, eq=False)
class SchemeILaws:
    """Single-letter conditionals the encoder, decoder and eavesdropper need."""

    p_u: np.ndarray  # (U,)
    s_given_u: np.ndarray  # (U, S)
    y_given_u: np.ndarray  # (U, Y)
    z_given_su: np.ndarray  # (S, U, Z)
    x_given_su: np.ndarray  # (S, U, X)
    yz_given_x: np.ndarray  # (X, Y*Z)
    n_y: int
    n_z: int


def _safe_conditional(joint: np.ndarray) -> np.ndarray:
    """Normalize the last axis; zero-mass slices become uniform."""
    tot = joint.sum(axis=-1, keepdims=True)
    k = joint.shape[-1]
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(tot > 0, joint / tot, 1.0 / k)


def scheme_laws(spec: SchemeISpec) -> SchemeILaws:
    m = spec.joint().mass  # S U X Y Z
    ns, nu, nx = m.shape[:3]
    n_y, n_z = spec.p_yz_given_x.output_shape
    p_su = m.sum(axis=(2, 3, 4))
    x_given_su = spec.p_x_given_su.rows.reshape(ns, nu, nx)
    z_given_x = spec.p_yz_given_x.output_marginal(1).rows
    return SchemeILaws(
        p_u=p_su.sum(axis=0),
        s_given_u=_safe_conditional(p_su.T),
        y_given_u=_safe_conditional(m.sum(axis=(0, 2, 4))),
        z_given_su=x_given_su @ z_given_x,
        x_given_su=x_given_su,
        yz_given_x=spec.p_yz_given_x.rows,
        n_y=n_y,
        n_z=n_z,
    )


def _log(a: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(a)


# ---------------------------------------------------------------- encoder side


def likelihood_log_weights(codebook: CodebookInstance, laws: SchemeILaws,
                           s_seq: np.ndarray) -> np.ndarray:
    """log P(s^n | u^n(m)) for every codeword."""
    ls = _log(laws.s_given_u)  # (U, S)
    return ls[codebook.codewords, np.asarray(s_seq)[None, :]].sum(axis=1)


def likelihood_encode(codebook: CodebookInstance, spec: SchemeISpec, s_seq,
                      rng: np.random.Generator, laws: Optional[SchemeILaws] = None) -> int:
    """Sample m with probability proportional to P(s^n | u^n(m))."""
    laws = scheme_laws(spec) if laws is None else laws
    logw = likelihood_log_weights(codebook, laws, s_seq)
    peak = logw.max()
    if not np.isfinite(peak):
        raise EncodingError("source sequence has zero likelihood under every codeword")
    w = np.exp(logw - peak)
    w /= w.sum()
    return int(_sample_rows(w[None, :], np.zeros(1, dtype=np.intp), rng)[0])


def channel_input(spec: SchemeISpec, s_seq, codeword, rng: np.random.Generator,
                  laws: Optional[SchemeILaws] = None) -> np.ndarray:
    laws = scheme_laws(spec) if laws is None else laws
    nu = laws.x_given_su.shape[1]
    rows = laws.x_given_su.reshape(-1, laws.x_given_su.shape[2])
    idx = np.asarray(s_seq) * nu + np.asarray(codeword)
    return _sample_rows(rows, idx, rng)


def broadcast(spec: SchemeISpec, x_seq, rng: np.random.Generator) -> tuple:
    n_z = spec.p_yz_given_x.output_shape[1]
    flat = _sample_rows(spec.p_yz_given_x.rows, np.asarray(x_seq), rng)
    return flat // n_z, flat % n_z


# ---------------------------------------------------------------- receiver side


def ml_decode(codebook: CodebookInstance, spec: SchemeISpec, y_seq,
              laws: Optional[SchemeILaws] = None) -> int:
    """argmax_m prod_t P(y_t | u_t(m)); ties go to the lowest index."""
    laws = scheme_laws(spec) if laws is None else laws
    ly = _log(laws.y_given_u)
    scores = ly[codebook.codewords, np.asarray(y_seq)[None, :]].sum(axis=1)
    return int(np.argmax(scores))


def reconstruct(spec: SchemeISpec, codeword, y_seq) -> np.ndarray:
    return spec.phi[np.asarray(codeword), np.asarray(y_seq)]


# ---------------------------------------------------------------- eavesdropper


def _sequence_prior_log(p_s: np.ndarray, n: int) -> np.ndarray:
    ls = _log(p_s)
    return kernels.log_sequence_table(np.broadcast_to(ls[None, :, None], (n, len(p_s), 1)).copy())[:, 0]


def encoder_log_table(codebook: CodebookInstance, laws: SchemeILaws,
                      p_s: np.ndarray) -> tuple:
    """log P(s^n) + log P_LE(m | s^n) for all s^n and m.

    Source sequences with zero likelihood under every codeword fall back to
    a uniform codeword choice. Returns the table and the failure mask.
    """
    n = codebook.n
    ls = _log(laws.s_given_u)  # (U, S)
    # logf[t, s, m] = log P(s | u_t(m))
    logf = np.ascontiguousarray(ls[codebook.codewords.T, :].transpose(0, 2, 1))
    logl = kernels.log_sequence_table(logf)
    peak = logl.max(axis=1)
    failed = ~np.isfinite(peak)
    norm = np.empty_like(peak)
    ok = ~failed
    norm[ok] = peak[ok] + np.log(np.exp(logl[ok] - peak[ok, None]).sum(axis=1))
    table = np.empty_like(logl)
    table[ok] = logl[ok] - norm[ok, None]
    table[failed] = -math.log(codebook.m_count)
    table += _sequence_prior_log(p_s, n)[:, None]
    return table, failed


def _z_log_factors(codebook: CodebookInstance, laws: SchemeILaws, z_seq) -> np.ndarray:
    """logf[t, s, m] = log P(z_t | s, u_t(m))."""
    lz = _log(laws.z_given_su)  # (S, U, Z)
    z = np.asarray(z_seq)
    cw = codebook.codewords  # (M, n)
    # lz[s, cw[m, t], z[t]] -> (S, M, n)
    g = lz[:, cw, z[None, :]]
    return np.ascontiguousarray(g.transpose(2, 0, 1))


def _posterior_from_log(logv: np.ndarray, n_s: int) -> np.ndarray:
    """Normalize a log-weight array over its first axis after summing the rest."""
    blocks = logv.reshape(n_s, -1)
    peak = blocks.max()
    if not np.isfinite(peak):
        raise ValueError("observation has zero probability under the induced law")
    w = np.exp(blocks - peak).sum(axis=1)
    return w / w.sum()


def _optimal_estimate(post: np.ndarray, d: np.ndarray) -> tuple:
    cost = post @ d
    a = int(np.argmin(cost))
    return a, float(cost[a])


def eavesdropper_estimate(codebook: CodebookInstance, spec: SchemeISpec, z_seq, s_prefix,
                          t: int, budget: Optional[int] = None,
                          laws: Optional[SchemeILaws] = None) -> tuple:
    """Optimal causal estimate of s_t (1-based) from z^n and s^{t-1}.

    Sums the induced law P(s^n) P_LE(m|s^n) prod_j P(z_j|s_j, u_j(m)) over all
    codewords and all completions of the source suffix. Returns the
    reconstruction symbol and its posterior-expected distortion.
    """
    laws = scheme_laws(spec) if laws is None else laws
    n = codebook.n
    s_prefix = np.asarray(s_prefix, dtype=np.intp)
    if not 1 <= t <= n or len(s_prefix) != t - 1:
        raise ValueError("need 1 <= t <= n and a prefix of length t - 1")
    ns = spec.p_s.alphabet_size
    _check_budget("eavesdropper posterior", ns ** (n - t + 1) * codebook.m_count, budget)
    post = _suffix_posterior(codebook, laws, spec.p_s.probs, z_seq, s_prefix)
    return _optimal_estimate(post, spec.dist.d)


def _suffix_posterior(codebook, laws, p_s, z_seq, s_prefix) -> np.ndarray:
    n, ns = codebook.n, len(p_s)
    k = len(s_prefix)
    cw = codebook.codewords
    ls_u = _log(laws.s_given_u)  # (U, S)
    lz = _z_log_factors(codebook, laws, z_seq)  # (n, S, M)
    lp = _log(p_s)
    # prefix contributions per codeword
    pre_l = ls_u[cw[:, :k], s_prefix[None, :]].sum(axis=1) if k else np.zeros(codebook.m_count)
    pre_z = lz[np.arange(k), s_prefix, :].sum(axis=0) if k else np.zeros(codebook.m_count)
    pre_p = lp[s_prefix].sum()
    # suffix tables over completions
    logf_l = np.ascontiguousarray(ls_u[cw[:, k:].T, :].transpose(0, 2, 1))
    logl = pre_l[None, :] + kernels.log_sequence_table(logf_l)
    peak = logl.max(axis=1)
    failed = ~np.isfinite(peak)
    log_le = np.full_like(logl, -math.log(codebook.m_count))
    ok = ~failed
    norm = peak[ok] + np.log(np.exp(logl[ok] - peak[ok, None]).sum(axis=1))
    log_le[ok] = logl[ok] - norm[:, None]
    suffix_prior = _sequence_prior_log(p_s, n - k) if n > k else np.zeros(1)
    base = log_le + (pre_p + suffix_prior)[:, None] + pre_z[None, :]
    logv = kernels.log_marginal_over_codebook(base, lz[k:])
    return _posterior_from_log(logv, ns)


def eavesdropper_all_times(encoder_table: np.ndarray, lz: np.ndarray, s_seq,
                           d: np.ndarray) -> tuple:
    """Expected distortion and estimate of the optimal causal eavesdropper at every t.

    ``encoder_table`` comes from :func:`encoder_log_table` and ``lz`` from
    the per-trial Z factors; one pass over all (s^n, m) serves all t.
    """
    n, ns, _ = lz.shape
    logv = kernels.log_marginal_over_codebook(encoder_table, lz)
    s_seq = np.asarray(s_seq)
    est = np.empty(n, dtype=np.intp)
    dist = np.empty(n)
    start = 0
    for t in range(n):
        size = ns ** (n - t)
        post = _posterior_from_log(logv[start : start + size], ns)
        est[t], dist[t] = _optimal_estimate(post, d)
        start += s_seq[t] * ns ** (n - t - 1)
    return est, dist


# ---------------------------------------------------------------- end to end


@dataclass
class SimulationConfig:
    spec: SchemeISpec
    n: int
    rate_r: float
    trials: int = 100
    codebook_redraws: int = 1
    seed: int = 0
    budget: Optional[int] = None
    threads: int = 1

    def __post_init__(self):
        if self.n < 1 or self.trials < 1 or self.codebook_redraws < 1:
            raise ValueError("n, trials and codebook_redraws must be >= 1")
        m_count = codeword_count(self.n, self.rate_r)
        ns = self.spec.p_s.alphabet_size
        _check_budget("simulation |S|^n * m_count", ns**self.n * m_count, self.budget)


@dataclass
class SimulationReport:
    n: int
    rate_r: float
    m_count: int
    passes: int
    d_b_empirical: float
    d_b_stderr: float
    d_e_per_time: np.ndarray
    d_e_average: float
    decode_error_rate: float
    encoder_failure_rate: float
    transition_index_predicted: float
    beta: float
    d_b_single_letter: float
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "rate_r": self.rate_r,
            "m_count": self.m_count,
            "passes": self.passes,
            "d_b_empirical": self.d_b_empirical,
            "d_b_stderr": self.d_b_stderr,
            "d_e_per_time": [float(v) for v in self.d_e_per_time],
            "d_e_average": self.d_e_average,
            "decode_error_rate": self.decode_error_rate,
            "encoder_failure_rate": self.encoder_failure_rate,
            "transition_index_predicted": self.transition_index_predicted,
            "beta": self.beta,
            "d_b_single_letter": self.d_b_single_letter,
        }

    def per_time_csv(self) -> str:
        lines = ["t,de_t"] + [f"{t + 1},{v:.9g}" for t, v in enumerate(self.d_e_per_time)]
        return "\n".join(lines) + "\n"


def codebook_seed(seed: int, redraw: int) -> int:
    state = derive_seed(seed, redraw, _CODEBOOK).generate_state(2, np.uint32)
    return int(state[0]) << 32 | int(state[1])


def _run_redraw(cfg: SimulationConfig, laws: SchemeILaws, redraw: int) -> list:
    spec = cfg.spec
    p_s = spec.p_s.probs
    d = spec.dist.d
    cb = generate_codebook(Pmf(laws.p_u), cfg.n, cfg.rate_r, codebook_seed(cfg.seed, redraw))
    table, failed = encoder_log_table(cb, laws, p_s)
    ns = len(p_s)
    weights = ns ** np.arange(cfg.n - 1, -1, -1)
    out = []
    for trial in range(cfg.trials):
        s = _sample_rows(p_s[None, :], np.zeros(cfg.n, dtype=np.intp),
                         derive_rng(cfg.seed, redraw, trial, _SOURCE))
        row = int(s @ weights)
        p_le = np.exp(table[row] - table[row].max())
        p_le /= p_le.sum()
        m = int(_sample_rows(p_le[None, :], np.zeros(1, dtype=np.intp),
                             derive_rng(cfg.seed, redraw, trial, _ENCODE))[0])
        u = cb.codewords[m]
        x = channel_input(spec, s, u, derive_rng(cfg.seed, redraw, trial, _CHANNEL), laws)
        y, z = broadcast(spec, x, derive_rng(cfg.seed, redraw, trial, _BROADCAST))
        m_hat = ml_decode(cb, spec, y, laws)
        s_hat = reconstruct(spec, cb.codewords[m_hat], y)
        d_b = float(d[s, s_hat].mean())
        _, d_e = eavesdropper_all_times(table, _z_log_factors(cb, laws, z), s, d)
        out.append((d_b, d_e, m_hat != m, bool(failed[row])))
    return out


def run_trials(cfg: SimulationConfig) -> SimulationReport:
    """End-to-end Monte Carlo over codebook redraws x trials.

    Every random draw is seeded from (seed, redraw, trial, stage), and the
    aggregation runs in fixed (redraw, trial) order, so the report does
    not depend on ``threads``.
    """
    laws = scheme_laws(cfg.spec)
    redraws = range(cfg.codebook_redraws)
    if cfg.threads > 1 and cfg.codebook_redraws > 1:
        with ThreadPoolExecutor(cfg.threads) as pool:
            chunks = list(pool.map(lambda r: _run_redraw(cfg, laws, r), redraws))
    else:
        chunks = [_run_redraw(cfg, laws, r) for r in redraws]
    results = [item for chunk in chunks for item in chunk]
    d_b = np.array([r[0] for r in results])
    d_e = np.array([r[1] for r in results])
    point = eval_scheme_i(cfg.spec)
    beta = point.diagnostics["beta"]
    per_time = d_e.mean(axis=0)
    passes = len(results)
    return SimulationReport(
        n=cfg.n,
        rate_r=cfg.rate_r,
        m_count=codeword_count(cfg.n, cfg.rate_r),
        passes=passes,
        d_b_empirical=float(d_b.mean()),
        d_b_stderr=float(d_b.std(ddof=1) / math.sqrt(passes)) if passes > 1 else 0.0,
        d_e_per_time=per_time,
        d_e_average=float(per_time.mean()),
        decode_error_rate=float(np.mean([r[2] for r in results])),
        encoder_failure_rate=float(np.mean([r[3] for r in results])),
        transition_index_predicted=beta * cfg.n,
        beta=beta,
        d_b_single_letter=point.d_b,
    )


# ---------------------------------------------------------------- soft covering


def softcover_tv(p_uxz: JointDist, rate_r: float, n: int, k: int, codebook_samples: int,
                 seed: int, budget: Optional[int] = None) -> float:
    """Mean exact TV between the codebook-induced law of (X^n, Z^k) and its i.i.d. target.

    ``p_uxz`` is a joint over (U, X, Z) in that axis order. For each sampled
    codebook the induced law is the uniform mixture over codewords of
    prod_t P(x_t|u_t) prod_{t<=k} P(z_t|x_t, u_t); the target is
    prod_t P(x_t) prod_{t<=k} P(z_t|x_t).
    """
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    m = p_uxz.mass
    nu, nx, nz = m.shape
    _check_budget("soft-covering |X|^n |Z|^k", nx**n * nz**k, budget)
    p_u = m.sum(axis=(1, 2))
    p_ux = m.sum(axis=2)
    x_given_u = _safe_conditional(p_ux)
    z_given_xu = _safe_conditional(m)  # (U, X, Z)
    p_x = p_ux.sum(axis=0)
    z_given_x = _safe_conditional(m.sum(axis=0))  # (X, Z)

    cell = nx * nz
    sizes = [cell] * k + [nx] * (n - k)
    joint_ux_z = (x_given_u[:, :, None] * z_given_xu).reshape(nu, cell)  # (U, X*Z)
    target_factors = np.zeros((n, 1, cell))
    target_factors[:k, 0, :] = (p_x[:, None] * z_given_x).ravel()
    target_factors[k:, 0, :nx] = p_x
    target = kernels.mixture_density(target_factors, sizes)

    m_count = codeword_count(n, rate_r)
    total = 0.0
    for sample in range(codebook_samples):
        cb = generate_codebook(Pmf(p_u), n, rate_r, codebook_seed(seed, sample))
        cw = cb.codewords.T  # (n, M)
        factors = np.zeros((n, m_count, cell))
        factors[:k] = joint_ux_z[cw[:k]]
        factors[k:, :, :nx] = x_given_u[cw[k:]]
        induced = kernels.mixture_density(factors, sizes) / m_count
        total += 0.5 * np.abs(induced - target).sum()
    return total / codebook_samples


def mutual_information_ux(p_uxz: JointDist) -> float:
    return mutual_information(p_uxz, 0, 1)
