"""Exact finite-alphabet probability algebra.

All information quantities are in bits. A :class:`JointDist` is a dense
numpy array with one named axis per random variable; composite alphabets
such as a broadcast output ``(Y, Z)`` are flattened row-major.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

PROB_TOL = 1e-9

VarRef = Union[str, int]


class DistributionError(ValueError):
    """Raised when a probability object violates its invariants."""


def _as_prob_vector(values, what: str) -> np.ndarray:
    p = np.array(values, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise DistributionError(f"{what}: expected a non-empty vector")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise DistributionError(f"{what}: entries must be finite and >= 0")
    total = float(p.sum())
    if abs(total - 1.0) > PROB_TOL:
        raise DistributionError(f"{what}: sums to {total!r}, not 1")
    # leave summation round-off alone so a serialized vector reloads bit-exactly
    if abs(total - 1.0) <= 4 * np.finfo(float).eps * p.size:
        return p
    return p / total


@dataclass(frozen=True, eq=False)
class Pmf:
    """Probability mass function over ``range(alphabet_size)``."""

    probs: np.ndarray

    def __init__(self, probs):
        p = _as_prob_vector(probs, "Pmf")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def alphabet_size(self) -> int:
        return self.probs.size

    @classmethod
    def bernoulli(cls, p: float) -> "Pmf":
        return cls([1.0 - p, p])

    @classmethod
    def uniform(cls, k: int) -> "Pmf":
        return cls(np.full(k, 1.0 / k))

    def to_json(self) -> dict:
        return {"alphabet_size": self.alphabet_size, "probs": self.probs.tolist()}

    @classmethod
    def from_json(cls, obj) -> "Pmf":
        if isinstance(obj, dict):
            pmf = cls(obj["probs"])
            if "alphabet_size" in obj and obj["alphabet_size"] != pmf.alphabet_size:
                raise DistributionError("Pmf: alphabet_size does not match probs")
            return pmf
        return cls(obj)

    def __repr__(self) -> str:
        return f"Pmf({self.probs.tolist()})"


@dataclass(frozen=True, eq=False)
class Channel:
    """Row-stochastic matrix ``rows[x, y] = P(y | x)``.

    ``output_shape`` records how a composite output is flattened; for a
    broadcast channel ``X -> (Y, Z)`` it is ``(|Y|, |Z|)`` and column
    ``y * |Z| + z`` holds ``P(y, z | x)``.
    """

    rows: np.ndarray
    output_shape: tuple = field(default=())

    def __init__(self, rows, output_shape: Sequence[int] | None = None):
        m = np.array(rows, dtype=float)
        if m.ndim != 2 or m.shape[0] == 0 or m.shape[1] == 0:
            raise DistributionError("Channel: rows must be a non-empty matrix")
        m = np.vstack([_as_prob_vector(r, f"Channel row {i}") for i, r in enumerate(m)])
        shape = tuple(int(s) for s in output_shape) if output_shape else (m.shape[1],)
        if int(np.prod(shape)) != m.shape[1]:
            raise DistributionError(
                f"Channel: output_shape {shape} inconsistent with {m.shape[1]} columns"
            )
        m.setflags(write=False)
        object.__setattr__(self, "rows", m)
        object.__setattr__(self, "output_shape", shape)

    @property
    def input_size(self) -> int:
        return self.rows.shape[0]

    @property
    def output_size(self) -> int:
        return self.rows.shape[1]

    @classmethod
    def bsc(cls, p: float) -> "Channel":
        return cls([[1.0 - p, p], [p, 1.0 - p]])

    @classmethod
    def identity(cls, k: int) -> "Channel":
        return cls(np.eye(k))

    @classmethod
    def product(cls, first: "Channel", second: "Channel") -> "Channel":
        """Broadcast channel with conditionally independent outputs."""
        if first.input_size != second.input_size:
            raise DistributionError("Channel.product: input sizes differ")
        rows = np.einsum("xy,xz->xyz", first.rows, second.rows)
        return cls(
            rows.reshape(first.input_size, -1),
            output_shape=(first.output_size, second.output_size),
        )

    def output_marginal(self, axis: int) -> "Channel":
        """Marginal channel onto one factor of a composite output."""
        full = self.rows.reshape((self.input_size,) + self.output_shape)
        other = tuple(i + 1 for i in range(len(self.output_shape)) if i != axis)
        return Channel(full.sum(axis=other))

    def to_json(self) -> dict:
        out = {
            "input_size": self.input_size,
            "output_size": self.output_size,
            "rows": self.rows.tolist(),
        }
        if len(self.output_shape) > 1:
            out["output_shape"] = list(self.output_shape)
        return out

    @classmethod
    def from_json(cls, obj) -> "Channel":
        if isinstance(obj, dict):
            if "bsc" in obj:
                return cls.bsc(float(obj["bsc"]["p"]))
            if "y" in obj and "z" in obj:
                return cls.product(cls.from_json(obj["y"]), cls.from_json(obj["z"]))
            ch = cls(obj["rows"], obj.get("output_shape"))
            for key in ("input_size", "output_size"):
                if key in obj and obj[key] != getattr(ch, key):
                    raise DistributionError(f"Channel: {key} does not match rows")
            return ch
        return cls(obj)

    def __repr__(self) -> str:
        return f"Channel({self.rows.tolist()}, output_shape={self.output_shape})"


@dataclass(frozen=True, eq=False)
class DistortionMeasure:
    """Nonnegative matrix ``d[s, a]`` of per-letter distortions."""

    d: np.ndarray

    def __init__(self, d):
        m = np.array(d, dtype=float)
        if m.ndim != 2 or m.size == 0:
            raise DistributionError("DistortionMeasure: expected a matrix")
        if not np.all(np.isfinite(m)) or np.any(m < 0):
            raise DistributionError("DistortionMeasure: entries must be finite and >= 0")
        m.setflags(write=False)
        object.__setattr__(self, "d", m)

    @property
    def d_max(self) -> float:
        return float(self.d.max())

    @property
    def source_size(self) -> int:
        return self.d.shape[0]

    @property
    def recon_size(self) -> int:
        return self.d.shape[1]

    @classmethod
    def hamming(cls, k: int, recon: int | None = None) -> "DistortionMeasure":
        recon = k if recon is None else recon
        return cls(1.0 - np.eye(k, recon))

    def to_json(self) -> dict:
        return {"d": self.d.tolist(), "d_max": self.d_max}

    @classmethod
    def from_json(cls, obj) -> "DistortionMeasure":
        if isinstance(obj, str):
            if obj != "hamming":
                raise DistributionError(f"unknown distortion {obj!r}")
            return cls.hamming(2)
        if isinstance(obj, dict):
            if "hamming" in obj:
                return cls.hamming(int(obj["hamming"]))
            return cls(obj["d"])
        return cls(obj)


class JointDist:
    """Joint pmf over named discrete variables.

    Immutable; ``mass`` has one axis per entry of ``variable_names``.
    """

    __slots__ = ("variable_names", "mass")

    def __init__(self, variable_names: Sequence[str], mass, *, check: bool = True):
        names = tuple(variable_names)
        m = np.array(mass, dtype=float)
        if m.ndim != len(names):
            raise DistributionError(
                f"JointDist: {len(names)} names for a {m.ndim}-d mass array"
            )
        if len(set(names)) != len(names):
            raise DistributionError(f"JointDist: duplicate variable names {names}")
        if check:
            if not np.all(np.isfinite(m)) or np.any(m < 0):
                raise DistributionError("JointDist: mass must be finite and >= 0")
            total = float(m.sum())
            if abs(total - 1.0) > PROB_TOL:
                raise DistributionError(f"JointDist: total mass {total!r}, not 1")
            if abs(total - 1.0) > 4 * np.finfo(float).eps * m.size:
                m = m / total
        m.setflags(write=False)
        object.__setattr__(self, "variable_names", names)
        object.__setattr__(self, "mass", m)

    def __setattr__(self, key, value):
        raise AttributeError("JointDist is immutable")

    @property
    def shape(self) -> tuple:
        return self.mass.shape

    def axis(self, var: VarRef) -> int:
        if isinstance(var, (int, np.integer)):
            if not 0 <= var < len(self.variable_names):
                raise KeyError(f"no variable at index {var}")
            return int(var)
        try:
            return self.variable_names.index(var)
        except ValueError:
            raise KeyError(f"no variable named {var!r}") from None

    def axes(self, group: VarRef | Iterable[VarRef]) -> tuple:
        if isinstance(group, (str, int, np.integer)):
            group = (group,)
        return tuple(self.axis(v) for v in group)

    def to_json(self) -> dict:
        return {
            "variable_names": list(self.variable_names),
            "shape": list(self.shape),
            "mass": self.mass.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "JointDist":
        j = cls(obj["variable_names"], obj["mass"])
        if "shape" in obj and tuple(obj["shape"]) != j.shape:
            raise DistributionError("JointDist: shape does not match mass")
        return j

    def __repr__(self) -> str:
        return f"JointDist({list(self.variable_names)}, shape={self.shape})"


def entropy(p) -> float:
    """Shannon entropy in bits; accepts a :class:`Pmf` or any mass array."""
    a = p.probs if isinstance(p, Pmf) else np.asarray(p, dtype=float)
    a = a[a > 0]
    return float(-(a * np.log2(a)).sum())


def binary_entropy(p: float) -> float:
    return entropy([p, 1.0 - p])


def _marginal_mass(mass: np.ndarray, keep: tuple) -> np.ndarray:
    drop = tuple(i for i in range(mass.ndim) if i not in keep)
    return mass.sum(axis=drop) if drop else mass


def _group_entropy(mass: np.ndarray, keep: tuple) -> float:
    if not keep:
        return 0.0
    return entropy(_marginal_mass(mass, keep).ravel())


def _disjoint(*groups: tuple) -> None:
    seen: set = set()
    for g in groups:
        if seen.intersection(g):
            raise ValueError("variable groups must be disjoint")
        seen.update(g)


def mass_mutual_information(mass: np.ndarray, a: tuple, b: tuple, c: tuple = ()) -> float:
    """I(A;B|C) on a raw joint array, axes given as tuples of integers."""
    val = (
        _group_entropy(mass, a + c)
        + _group_entropy(mass, b + c)
        - _group_entropy(mass, a + b + c)
        - _group_entropy(mass, c)
    )
    return max(val, 0.0)


def mutual_information(j: JointDist, group_a, group_b) -> float:
    """I(A;B) = H(A) + H(B) - H(A,B), clipped at zero."""
    a, b = j.axes(group_a), j.axes(group_b)
    _disjoint(a, b)
    m = j.mass
    val = _group_entropy(m, a) + _group_entropy(m, b) - _group_entropy(m, a + b)
    return max(val, 0.0)


def conditional_mutual_information(j: JointDist, group_a, group_b, group_c) -> float:
    """I(A;B|C) = H(A,C) + H(B,C) - H(A,B,C) - H(C), clipped at zero."""
    a, b, c = j.axes(group_a), j.axes(group_b), j.axes(group_c)
    _disjoint(a, b, c)
    m = j.mass
    val = (
        _group_entropy(m, a + c)
        + _group_entropy(m, b + c)
        - _group_entropy(m, a + b + c)
        - _group_entropy(m, c)
    )
    return max(val, 0.0)


def conditional_entropy(j: JointDist, group_a, group_c) -> float:
    a, c = j.axes(group_a), j.axes(group_c)
    _disjoint(a, c)
    return max(_group_entropy(j.mass, a + c) - _group_entropy(j.mass, c), 0.0)


def build_joint(components: Sequence[tuple], names: Sequence[str] | None = None) -> JointDist:
    """Multiply a factorized list of components into a joint distribution.

    Each component is ``(factor, parents)``: a :class:`Pmf` with no parents,
    or a :class:`Channel` whose input is the row-major flattening of the
    listed parent variables. A channel with a composite ``output_shape``
    introduces one new variable per output factor.

    >>> j = build_joint([(Pmf([0.3, 0.7]), ()), (Channel.bsc(0.3), (0,))])
    >>> j.mass.round(2).tolist()
    [[0.21, 0.09], [0.21, 0.49]]
    """
    mass = np.ones(())
    for i, (factor, parents) in enumerate(components):
        parents = tuple(parents)
        if any(p < 0 or p >= mass.ndim for p in parents):
            raise DistributionError(f"component {i}: parent index out of range")
        if isinstance(factor, Pmf):
            if parents:
                raise DistributionError(f"component {i}: a Pmf takes no parents")
            table = factor.probs
            out_shape = (factor.alphabet_size,)
        elif isinstance(factor, Channel):
            parent_sizes = tuple(mass.shape[p] for p in parents)
            if int(np.prod(parent_sizes)) != factor.input_size:
                raise DistributionError(
                    f"component {i}: channel input size {factor.input_size} != "
                    f"product of parent sizes {parent_sizes}"
                )
            out_shape = factor.output_shape
            table = factor.rows.reshape(parent_sizes + out_shape)
        else:
            raise TypeError(f"component {i}: expected Pmf or Channel, got {type(factor)}")
        if len(set(parents)) != len(parents):
            raise DistributionError(f"component {i}: repeated parent")
        # sort parent axes so the table broadcasts against (existing..., new...)
        order = sorted(range(len(parents)), key=lambda k: parents[k])
        perm = order + list(range(len(parents), table.ndim))
        table = np.transpose(table, perm)
        target = [mass.shape[a] if a in parents else 1 for a in range(mass.ndim)]
        mass = mass.reshape(mass.shape + (1,) * len(out_shape)) * table.reshape(
            target + list(out_shape)
        )
    if names is None:
        names = [f"X{i}" for i in range(mass.ndim)]
    return JointDist(names, mass)


def marginalize(j: JointDist, keep) -> JointDist:
    """Marginal over ``keep``, with axes in the order given."""
    axes = j.axes(keep)
    if len(set(axes)) != len(axes):
        raise ValueError("duplicate variables in keep")
    m = _marginal_mass(j.mass, tuple(sorted(axes)))
    order = [sorted(axes).index(a) for a in axes]
    m = np.transpose(m, order)
    return JointDist([j.variable_names[a] for a in axes], m, check=False)


def condition(j: JointDist, given: VarRef, value: int) -> JointDist:
    """Conditional law of the remaining variables given ``given == value``."""
    ax = j.axis(given)
    if not 0 <= value < j.shape[ax]:
        raise IndexError(f"value {value} outside alphabet of {j.variable_names[ax]}")
    slab = np.take(j.mass, value, axis=ax)
    total = slab.sum()
    if total <= 0:
        raise DistributionError(
            f"conditioning on zero-probability event {j.variable_names[ax]}={value}"
        )
    names = [n for i, n in enumerate(j.variable_names) if i != ax]
    return JointDist(names, slab / total, check=False)


def tv_distance(a, b) -> float:
    """Half the L1 distance between two pmfs of identical shape."""
    ma = a.mass if isinstance(a, JointDist) else (a.probs if isinstance(a, Pmf) else np.asarray(a, float))
    mb = b.mass if isinstance(b, JointDist) else (b.probs if isinstance(b, Pmf) else np.asarray(b, float))
    if ma.shape != mb.shape:
        raise ValueError(f"shape mismatch {ma.shape} vs {mb.shape}")
    return float(0.5 * np.abs(ma - mb).sum())
