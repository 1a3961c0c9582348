"""Pure numpy implementations of the simulation kernels.

These mirror :mod:`secrecy_lab._kernels` (Cython) exactly in semantics and
serve when the compiled extension is unavailable.

Sequence axes are flattened row-major with time 0 most significant, so all
sequences sharing a prefix occupy one contiguous block.
"""

import numpy as np

# codewords processed per chunk in mixture_density
_CHUNK = 64


def mixture_density(factors, sizes):
    """Mixture of product laws over sequences of per-time cells.

    ``factors[t, m, c]`` is the weight of cell ``c`` at time ``t`` under
    mixture component ``m``; only the first ``sizes[t]`` cells are used.
    Returns ``out[c_0, ..., c_{n-1}] = sum_m prod_t factors[t, m, c_t]``
    flattened row-major.
    """
    factors = np.asarray(factors, dtype=np.float64)
    sizes = [int(s) for s in sizes]
    n, m_count, _ = factors.shape
    total = int(np.prod(sizes)) if sizes else 1
    out = np.zeros(total)
    for lo in range(0, m_count, _CHUNK):
        hi = min(lo + _CHUNK, m_count)
        acc = np.ones((hi - lo, 1))
        for t in range(n):
            f = factors[t, lo:hi, : sizes[t]]
            acc = (acc[:, :, None] * f[:, None, :]).reshape(hi - lo, -1)
        out += acc.sum(axis=0)
    return out


def log_sequence_table(logf):
    """``out[a_0..a_{n-1}, m] = sum_t logf[t, a_t, m]`` flattened row-major."""
    logf = np.asarray(logf, dtype=np.float64)
    n, a, m_count = logf.shape
    out = np.zeros((1, m_count))
    for t in range(n):
        out = (out[:, None, :] + logf[t][None, :, :]).reshape(-1, m_count)
    return out


def log_marginal_over_codebook(log_base, logf):
    """Row-wise log-sum-exp over codewords of ``log_base + log_sequence_table(logf)``.

    Rows whose every term is ``-inf`` give ``-inf``.
    """
    table = np.asarray(log_base, dtype=np.float64) + log_sequence_table(logf)
    peak = table.max(axis=1)
    finite = np.isfinite(peak)
    out = np.full(table.shape[0], -np.inf)
    if finite.any():
        shifted = np.exp(table[finite] - peak[finite, None])
        out[finite] = peak[finite] + np.log(shifted.sum(axis=1))
    return out
