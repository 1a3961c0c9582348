"""Single-letter evaluation of achievable (D_b, D_e) pairs.

Three schemes are covered: operationally separate coding (``O``), basic
hybrid coding with a likelihood encoder (``I``) and superposition hybrid
coding (``II``), plus the a-priori (perfect secrecy) bound on D_e.

Every evaluator builds the relevant joint distribution exactly, reads off
the mutual-information terms and computes the eavesdropper's inner minima
pointwise: for each conditioning value the reconstruction with least
posterior-expected distortion is chosen (lowest index on ties).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .infotheory import (
    Channel,
    DistortionMeasure,
    JointDist,
    Pmf,
    build_joint,
    conditional_mutual_information,
    mass_mutual_information,
    mutual_information,
)

# information terms at or below this are treated as exactly zero
ZERO_INFO = 1e-12
MINIMA_TOL = 1e-12
# strict rate inequalities need a margin above float noise at exact ties
RATE_TOL = 1e-12


class SpecError(ValueError):
    """Inconsistent alphabet sizes or malformed reconstruction map."""


def _check_phi(phi, rows: int, cols: int, recon: int, what: str) -> np.ndarray:
    table = np.array(phi, dtype=np.int64)
    if table.shape != (rows, cols):
        raise SpecError(f"{what}: phi must have shape {(rows, cols)}, got {table.shape}")
    if table.size and (table.min() < 0 or table.max() >= recon):
        raise SpecError(f"{what}: phi values must lie in [0, {recon})")
    table.setflags(write=False)
    return table


def _broadcast(ch: Channel, what: str) -> Channel:
    if len(ch.output_shape) != 2:
        raise SpecError(f"{what}: broadcast channel needs output_shape (|Y|, |Z|)")
    return ch


@dataclass(frozen=True, eq=False)
class SchemeISpec:
    p_s: Pmf
    p_u_given_s: Channel
    p_x_given_su: Channel  # input index s * |U| + u
    p_yz_given_x: Channel
    phi: np.ndarray  # phi[u, y] -> reconstruction symbol
    dist: DistortionMeasure

    def __post_init__(self):
        s, u = self.p_s.alphabet_size, self.p_u_given_s.output_size
        if self.p_u_given_s.input_size != s:
            raise SpecError("SchemeI: p_u_given_s input size != |S|")
        if self.p_x_given_su.input_size != s * u:
            raise SpecError("SchemeI: p_x_given_su input size != |S|*|U|")
        bc = _broadcast(self.p_yz_given_x, "SchemeI")
        if bc.input_size != self.p_x_given_su.output_size:
            raise SpecError("SchemeI: p_yz_given_x input size != |X|")
        if self.dist.source_size != s:
            raise SpecError("SchemeI: distortion rows != |S|")
        phi = _check_phi(self.phi, u, bc.output_shape[0], self.dist.recon_size, "SchemeI")
        object.__setattr__(self, "phi", phi)

    @property
    def sizes(self) -> dict:
        y, z = self.p_yz_given_x.output_shape
        return {
            "S": self.p_s.alphabet_size,
            "U": self.p_u_given_s.output_size,
            "X": self.p_x_given_su.output_size,
            "Y": y,
            "Z": z,
        }

    def joint(self) -> JointDist:
        """Joint law over (S, U, X, Y, Z)."""
        return build_joint(
            [
                (self.p_s, ()),
                (self.p_u_given_s, (0,)),
                (self.p_x_given_su, (0, 1)),
                (self.p_yz_given_x, (2,)),
            ],
            ["S", "U", "X", "Y", "Z"],
        )


@dataclass(frozen=True, eq=False)
class SchemeOSpec:
    p_s: Pmf
    p_shat_given_s: Channel
    p_u1_given_shat: Channel
    p_u2: Pmf
    p_v2_given_u2: Channel
    p_x_given_v2: Channel
    p_yz_given_x: Channel
    dist: DistortionMeasure

    def __post_init__(self):
        if self.p_shat_given_s.input_size != self.p_s.alphabet_size:
            raise SpecError("SchemeO: p_shat_given_s input size != |S|")
        if self.p_shat_given_s.output_size != self.dist.recon_size:
            raise SpecError("SchemeO: |Shat| must equal the reconstruction alphabet")
        if self.p_u1_given_shat.input_size != self.p_shat_given_s.output_size:
            raise SpecError("SchemeO: p_u1_given_shat input size != |Shat|")
        if self.p_v2_given_u2.input_size != self.p_u2.alphabet_size:
            raise SpecError("SchemeO: p_v2_given_u2 input size != |U2|")
        if self.p_x_given_v2.input_size != self.p_v2_given_u2.output_size:
            raise SpecError("SchemeO: p_x_given_v2 input size != |V2|")
        bc = _broadcast(self.p_yz_given_x, "SchemeO")
        if bc.input_size != self.p_x_given_v2.output_size:
            raise SpecError("SchemeO: p_yz_given_x input size != |X|")
        if self.dist.source_size != self.p_s.alphabet_size:
            raise SpecError("SchemeO: distortion rows != |S|")

    def source_joint(self) -> JointDist:
        """Joint law over (S, Shat, U1)."""
        return build_joint(
            [(self.p_s, ()), (self.p_shat_given_s, (0,)), (self.p_u1_given_shat, (1,))],
            ["S", "Shat", "U1"],
        )

    def channel_joint(self) -> JointDist:
        """Joint law over (U2, V2, X, Y, Z)."""
        return build_joint(
            [
                (self.p_u2, ()),
                (self.p_v2_given_u2, (0,)),
                (self.p_x_given_v2, (1,)),
                (self.p_yz_given_x, (2,)),
            ],
            ["U2", "V2", "X", "Y", "Z"],
        )


@dataclass(frozen=True, eq=False)
class SchemeIISpec:
    p_s: Pmf
    p_v_given_s: Channel
    p_u_given_v: Channel
    p_x_given_suv: Channel  # input index (s * |U| + u) * |V| + v
    p_yz_given_x: Channel
    phi: np.ndarray  # phi[v, y] -> reconstruction symbol
    dist: DistortionMeasure

    def __post_init__(self):
        s = self.p_s.alphabet_size
        v, u = self.p_v_given_s.output_size, self.p_u_given_v.output_size
        if self.p_v_given_s.input_size != s:
            raise SpecError("SchemeII: p_v_given_s input size != |S|")
        if self.p_u_given_v.input_size != v:
            raise SpecError("SchemeII: p_u_given_v input size != |V|")
        if self.p_x_given_suv.input_size != s * u * v:
            raise SpecError("SchemeII: p_x_given_suv input size != |S|*|U|*|V|")
        bc = _broadcast(self.p_yz_given_x, "SchemeII")
        if bc.input_size != self.p_x_given_suv.output_size:
            raise SpecError("SchemeII: p_yz_given_x input size != |X|")
        if self.dist.source_size != s:
            raise SpecError("SchemeII: distortion rows != |S|")
        phi = _check_phi(self.phi, v, bc.output_shape[0], self.dist.recon_size, "SchemeII")
        object.__setattr__(self, "phi", phi)

    def joint(self) -> JointDist:
        """Joint law over (S, V, U, X, Y, Z)."""
        return build_joint(
            [
                (self.p_s, ()),
                (self.p_v_given_s, (0,)),
                (self.p_u_given_v, (1,)),
                (self.p_x_given_suv, (0, 2, 1)),
                (self.p_yz_given_x, (3,)),
            ],
            ["S", "V", "U", "X", "Y", "Z"],
        )


@dataclass
class RegionPoint:
    scheme: str
    feasible: bool
    rate_slack: float
    d_b: float
    d_e: float
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "scheme": self.scheme,
            "feasible": bool(self.feasible),
            "rate_slack": float(self.rate_slack),
            "d_b": float(self.d_b),
            "d_e": float(self.d_e),
            "diagnostics": {
                k: (bool(v) if isinstance(v, (bool, np.bool_)) else float(v))
                for k, v in self.diagnostics.items()
            },
        }


def positive_part(x: float) -> float:
    return max(x, 0.0)


def _ratio(num: float, den: float) -> float:
    """min(num / den, 1) with the degenerate-denominator convention 1."""
    if den <= ZERO_INFO:
        return 1.0
    return min(num / den, 1.0)


def min_expected_distortion(p_s_cond: np.ndarray, d: np.ndarray) -> float:
    """min over maps psi(c) of E[d(S, psi(C))].

    ``p_s_cond`` has the source on axis 0 and any conditioning variables on
    the remaining axes; the minimum decomposes over conditioning cells.
    """
    cells = p_s_cond.reshape(p_s_cond.shape[0], -1)
    # cost[a, c] = sum_s P(s, c) d(s, a)
    cost = d.T @ cells
    return float(cost.min(axis=0).sum())


def pointwise_argmin(p_s_cond: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Optimal reconstruction per conditioning cell (ties to the lowest index)."""
    cells = p_s_cond.reshape(p_s_cond.shape[0], -1)
    return np.argmin(d.T @ cells, axis=0).reshape(p_s_cond.shape[1:])


def bayes_phi(p_s_a_b: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Reconstruction table phi[a, b] minimizing E[d(S, phi(A, B))]."""
    return pointwise_argmin(p_s_a_b, d)


def perfect_secrecy_bound(p_s: Pmf, dist: DistortionMeasure) -> float:
    """min over reconstruction symbols a of E[d(S, a)]."""
    return float((p_s.probs @ dist.d).min())


def _check_minima(scheme: str, base: float, *others: float) -> None:
    for o in others:
        if o > base + MINIMA_TOL:
            raise AssertionError(
                f"{scheme}: conditioned minimum {o} exceeds unconditioned {base}"
            )


def eval_scheme_i(spec: SchemeISpec, eps_rate: float = 0.0) -> RegionPoint:
    j = spec.joint()
    m = j.mass  # S U X Y Z
    d = spec.dist.d
    i_us = mutual_information(j, "U", "S")
    i_uy = mutual_information(j, "U", "Y")
    i_uz = mutual_information(j, "U", "Z")
    i_su_z = conditional_mutual_information(j, "S", "U", "Z")
    slack = i_uy - i_us
    feasible = slack > eps_rate + RATE_TOL

    p_suy = m.sum(axis=(2, 4))
    s_idx = np.arange(m.shape[0])[:, None, None]
    d_b = float((p_suy * d[s_idx, spec.phi[None, :, :]]).sum())

    psi0 = min_expected_distortion(m.sum(axis=(1, 2, 3)), d)
    psi1 = min_expected_distortion(m.sum(axis=(2, 3)), d)
    _check_minima("SchemeI", psi0, psi1)
    beta = _ratio(positive_part(i_uy - i_uz), i_su_z)
    d_e = beta * psi0 + (1.0 - beta) * psi1
    return RegionPoint(
        "I",
        feasible,
        slack,
        d_b,
        d_e,
        {
            "beta": beta,
            "I_US": i_us,
            "I_UY": i_uy,
            "I_UZ": i_uz,
            "I_SU_given_Z": i_su_z,
            "psi0": psi0,
            "psi1": psi1,
        },
    )


def scheme_o_source_terms(p_s: np.ndarray, shat_given_s: np.ndarray,
                          u1_given_shat: np.ndarray, d: np.ndarray) -> dict:
    """Source-side terms of Scheme O from raw probability arrays."""
    ms = p_s[:, None, None] * shat_given_s[:, :, None] * u1_given_shat[None, :, :]
    return {
        "I_SU1": mass_mutual_information(ms, (0,), (2,)),
        "I_SShat_given_U1": mass_mutual_information(ms, (0,), (1,), (2,)),
        "min0": min_expected_distortion(p_s, d),
        "min1": min_expected_distortion(ms.sum(axis=1), d),
        "d_b": float((ms.sum(axis=2) * d).sum()),
    }


def scheme_o_channel_terms(p_u2: np.ndarray, v2_given_u2: np.ndarray,
                           x_given_v2: np.ndarray, y_given_x: np.ndarray,
                           z_given_x: np.ndarray) -> dict:
    """Channel-side terms of Scheme O from raw probability arrays.

    Only the marginal channels X->Y and X->Z enter these terms.
    """
    m_uvx = p_u2[:, None, None] * v2_given_u2[:, :, None] * x_given_v2[None, :, :]
    m_uvy = m_uvx @ y_given_x
    m_uvz = m_uvx @ z_given_x
    return {
        "I_U2Y": mass_mutual_information(m_uvy, (0,), (2,)),
        "I_U2Z": mass_mutual_information(m_uvz, (0,), (2,)),
        "I_V2Y_given_U2": mass_mutual_information(m_uvy, (1,), (2,), (0,)),
        "I_V2Z_given_U2": mass_mutual_information(m_uvz, (1,), (2,), (0,)),
    }


def scheme_o_parts(spec: SchemeOSpec) -> tuple[dict, dict]:
    """Information terms of the source side and the channel side separately."""
    source = scheme_o_source_terms(
        spec.p_s.probs, spec.p_shat_given_s.rows, spec.p_u1_given_shat.rows, spec.dist.d
    )
    bc = spec.p_yz_given_x
    channel = scheme_o_channel_terms(
        spec.p_u2.probs,
        spec.p_v2_given_u2.rows,
        spec.p_x_given_v2.rows,
        bc.output_marginal(0).rows,
        bc.output_marginal(1).rows,
    )
    return source, channel


def combine_scheme_o(source: dict, channel: dict, eps_rate: float = 0.0) -> RegionPoint:
    r1, r2 = source["I_SU1"], source["I_SShat_given_U1"]
    cap1 = channel["I_U2Y"]
    cap2 = channel["I_V2Y_given_U2"] - channel["I_V2Z_given_U2"]
    slack1, slack2 = cap1 - r1, cap2 - r2
    feasible = min(slack1, slack2) > eps_rate + RATE_TOL
    eta = _ratio(positive_part(channel["I_U2Y"] - channel["I_U2Z"]), r1)
    m0, m1 = source["min0"], source["min1"]
    _check_minima("SchemeO", m0, m1)
    d_e = eta * m0 + (1.0 - eta) * m1
    diag = {"eta": eta, "slack_rate1": slack1, "slack_rate2": slack2}
    diag.update(source)
    diag.update(channel)
    diag.pop("d_b")
    # second rate condition tight with nothing left to protect
    diag["boundary_flag"] = bool(abs(slack2) <= ZERO_INFO and r2 <= ZERO_INFO)
    return RegionPoint("O", feasible, min(slack1, slack2), source["d_b"], d_e, diag)


def eval_scheme_o(spec: SchemeOSpec, eps_rate: float = 0.0) -> RegionPoint:
    source, channel = scheme_o_parts(spec)
    return combine_scheme_o(source, channel, eps_rate)


def eval_scheme_ii(spec: SchemeIISpec, eps_rate: float = 0.0) -> RegionPoint:
    j = spec.joint()
    m = j.mass  # S V U X Y Z
    d = spec.dist.d
    i_vs = mutual_information(j, "V", "S")
    i_uv_y = mutual_information(j, ("U", "V"), "Y")
    i_uy = mutual_information(j, "U", "Y")
    i_uz = mutual_information(j, "U", "Z")
    i_su_z = conditional_mutual_information(j, "S", "U", "Z")
    i_vy_u = conditional_mutual_information(j, "V", "Y", "U")
    i_su = mutual_information(j, "S", "U")
    i_zv_u = conditional_mutual_information(j, "Z", "V", "U")
    i_sv_zu = conditional_mutual_information(j, "S", "V", ("Z", "U"))

    slack = i_uv_y - i_vs
    feasible = slack > eps_rate + RATE_TOL

    p_svy = m.sum(axis=(2, 3, 5))
    s_idx = np.arange(m.shape[0])[:, None, None]
    d_b = float((p_svy * d[s_idx, spec.phi[None, :, :]]).sum())

    beta = _ratio(positive_part(i_uy - i_uz), i_su_z)
    r_s = min(i_vy_u, i_uv_y - i_su)
    alpha = _ratio(positive_part(r_s - i_zv_u), i_sv_zu)

    psi0 = min_expected_distortion(m.sum(axis=(1, 2, 3, 4)), d)
    psi1 = min_expected_distortion(m.sum(axis=(1, 3, 4)), d)
    psi2 = min_expected_distortion(m.sum(axis=(2, 3, 4)), d)
    _check_minima("SchemeII", psi0, psi1, psi2)
    w0 = min(beta, alpha)
    d_e = w0 * psi0 + (alpha - w0) * psi1 + (1.0 - alpha) * psi2
    return RegionPoint(
        "II",
        feasible,
        slack,
        d_b,
        d_e,
        {
            "beta": beta,
            "alpha": alpha,
            "r_s": r_s,
            "I_VS": i_vs,
            "I_UVY": i_uv_y,
            "I_UY": i_uy,
            "I_UZ": i_uz,
            "I_SU_given_Z": i_su_z,
            "I_VY_given_U": i_vy_u,
            "I_SU": i_su,
            "I_ZV_given_U": i_zv_u,
            "I_SV_given_ZU": i_sv_zu,
            "psi0": psi0,
            "psi1": psi1,
            "psi2": psi2,
        },
    )


def scheme_i_as_ii(spec: SchemeISpec, u_size: int = 1) -> SchemeIISpec:
    """Scheme I spec viewed as Scheme II with the hybrid codeword as V.

    The superposition layer U is held constant (all mass on symbol 0 of a
    ``u_size`` alphabet).
    """
    sz = spec.sizes
    s, v = sz["S"], sz["U"]
    u_rows = np.zeros((v, u_size))
    u_rows[:, 0] = 1.0
    x_rows = spec.p_x_given_su.rows.reshape(s, 1, v, -1)
    x_rows = np.broadcast_to(x_rows, (s, u_size, v, x_rows.shape[-1]))
    return SchemeIISpec(
        p_s=spec.p_s,
        p_v_given_s=spec.p_u_given_s,
        p_u_given_v=Channel(u_rows),
        p_x_given_suv=Channel(x_rows.reshape(s * u_size * v, -1)),
        p_yz_given_x=spec.p_yz_given_x,
        phi=spec.phi,
        dist=spec.dist,
    )


def embed_o_in_ii(spec: SchemeOSpec) -> SchemeIISpec:
    """Scheme O spec as Scheme II with U = (U1, U2) and V = (Shat, V2).

    Index conventions: ``u = u1 * |U2| + u2`` and ``v = shat * |V2| + v2``.
    """
    s = spec.p_s.alphabet_size
    n_shat = spec.p_shat_given_s.output_size
    n_u1 = spec.p_u1_given_shat.output_size
    n_u2 = spec.p_u2.alphabet_size
    n_v2 = spec.p_v2_given_u2.output_size
    n_x = spec.p_x_given_v2.output_size

    p_u2 = spec.p_u2.probs
    p_u2v2 = p_u2[:, None] * spec.p_v2_given_u2.rows
    p_v2 = p_u2v2.sum(axis=0)
    # Bayes reversal P(u2 | v2); unreachable v2 fall back to the prior
    with np.errstate(invalid="ignore", divide="ignore"):
        u2_given_v2 = np.where(p_v2[:, None] > 0, (p_u2v2 / p_v2).T, p_u2[None, :])

    v_given_s = np.einsum("sa,b->sab", spec.p_shat_given_s.rows, p_v2).reshape(s, -1)
    u_given_v = np.einsum(
        "ac,bd->abcd", spec.p_u1_given_shat.rows, u2_given_v2
    ).reshape(n_shat * n_v2, n_u1 * n_u2)
    x_given_suv = np.broadcast_to(
        spec.p_x_given_v2.rows[None, None, None, :, :],
        (s, n_u1 * n_u2, n_shat, n_v2, n_x),
    ).reshape(s * n_u1 * n_u2 * n_shat * n_v2, n_x)
    n_y = spec.p_yz_given_x.output_shape[0]
    phi = np.repeat(np.arange(n_shat), n_v2)[:, None] * np.ones((1, n_y), dtype=np.int64)
    return SchemeIISpec(
        p_s=spec.p_s,
        p_v_given_s=Channel(v_given_s),
        p_u_given_v=Channel(u_given_v),
        p_x_given_suv=Channel(x_given_suv),
        p_yz_given_x=spec.p_yz_given_x,
        phi=phi,
        dist=spec.dist,
    )


def evaluate(spec, eps_rate: float = 0.0) -> RegionPoint:
    """Dispatch on the spec type."""
    if isinstance(spec, SchemeISpec):
        return eval_scheme_i(spec, eps_rate)
    if isinstance(spec, SchemeOSpec):
        return eval_scheme_o(spec, eps_rate)
    if isinstance(spec, SchemeIISpec):
        return eval_scheme_ii(spec, eps_rate)
    raise TypeError(f"not a scheme spec: {type(spec)}")
