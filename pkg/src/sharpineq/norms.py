"""l^q norms and l^q products of norms, with exact duals and gradients.

Two shapes are supported:

* ``LqNorm(q, dim)`` -- the l^q norm on R^dim, q in [1, inf].
* ``ProductNorm(blocks, q)`` -- (||x_1||_1^q + ... + ||x_k||_k^q)^(1/q) for
  consecutive coordinate blocks x_i, each measured by its own norm.

The dual of l^q is l^p with 1/p + 1/q = 1, and the dual of an l^q product
is the l^p product of the block duals.  Canonical text forms::

    lq:2:dim=3
    prod(lq:2:dim=3,q=2)            # R^3 x R, the extra factor is |t|
    tensor(lq:2:dim=2,k=5,q=1.5)    # five copies of lq:2:dim=2
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DimensionMismatchError, DomainError, NonDifferentiableError

__all__ = [
    "LqNorm", "ProductNorm", "NormSpec", "conjugate", "norm", "dual_norm",
    "norm_gradient", "dual_spec", "parse_norm", "format_norm", "euclidean",
]


def conjugate(q: float) -> float:
    """Hoelder conjugate exponent, with 1 <-> inf."""
    if q == 1:
        return math.inf
    if math.isinf(q):
        return 1.0
    if q < 1:
        raise DomainError(f"exponent must be >= 1, got {q}")
    return q / (q - 1.0)


@dataclass(frozen=True)
class LqNorm:
    q: float
    dim: int

    def __post_init__(self):
        if not (self.q >= 1):
            raise DomainError(f"l^q norm needs q >= 1, got {self.q}")
        if self.dim < 1:
            raise DomainError("dimension must be positive")


@dataclass(frozen=True)
class ProductNorm:
    blocks: tuple
    q: float

    def __post_init__(self):
        if not (self.q >= 1):
            raise DomainError(f"product exponent must be >= 1, got {self.q}")
        if not self.blocks:
            raise DomainError("product norm needs at least one block")

    @property
    def dim(self) -> int:
        return sum(b.dim for b in self.blocks)

    @classmethod
    def with_line(cls, inner, q: float) -> "ProductNorm":
        """(||x||^q + |t|^q)^(1/q) on R^n x R."""
        return cls((inner, LqNorm(2.0, 1)), float(q))

    @classmethod
    def power(cls, inner, k: int, q: float) -> "ProductNorm":
        """k-fold l^q product of ``inner`` with itself."""
        return cls((inner,) * int(k), float(q))


NormSpec = Union[LqNorm, ProductNorm]


def euclidean(dim: int) -> LqNorm:
    return LqNorm(2.0, dim)


def _check(spec, v):
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != spec.dim:
        raise DimensionMismatchError(
            f"vector has dimension {v.shape[-1]}, norm expects {spec.dim}")
    return v


def _lq(v, q):
    a = np.abs(v)
    if math.isinf(q):
        return a.max(axis=-1)
    if q == 1:
        return a.sum(axis=-1)
    if q == 2:
        return np.sqrt(np.einsum("...i,...i->...", v, v))
    # scale by the max entry to avoid overflow in |v|^q
    m = a.max(axis=-1)
    safe = np.where(m > 0, m, 1.0)
    s = (a / safe[..., None]) ** q
    return m * s.sum(axis=-1) ** (1.0 / q)


def _split(spec: ProductNorm, v):
    out, start = [], 0
    for b in spec.blocks:
        out.append(v[..., start:start + b.dim])
        start += b.dim
    return out


def _eval(spec, v):
    if isinstance(spec, LqNorm):
        return _lq(v, spec.q)
    parts = np.stack([_eval(b, x) for b, x in zip(spec.blocks, _split(spec, v))],
                     axis=-1)
    return _lq(parts, spec.q)


def dual_spec(spec: NormSpec) -> NormSpec:
    """The NormSpec of the dual norm."""
    if isinstance(spec, LqNorm):
        return LqNorm(conjugate(spec.q), spec.dim)
    return ProductNorm(tuple(dual_spec(b) for b in spec.blocks), conjugate(spec.q))


def norm(spec: NormSpec, v):
    """Evaluate the norm along the last axis of ``v``."""
    v = _check(spec, v)
    out = _eval(spec, v)
    return float(out) if np.ndim(out) == 0 else out


def dual_norm(spec: NormSpec, v):
    """||v||_* = sup_{||y|| <= 1} v . y, evaluated exactly."""
    return norm(dual_spec(spec), v)


def _grad_lq(v, q):
    n = _lq(v, q)
    if math.isinf(q):
        a = np.abs(v)
        top = a == n
        if np.count_nonzero(top) != 1:
            raise NonDifferentiableError("l^inf norm is not smooth at a tie")
        return np.where(top, np.sign(v), 0.0)
    if q == 1:
        if np.any(v == 0):
            raise NonDifferentiableError("l^1 norm is not smooth on a coordinate plane")
        return np.sign(v)
    return np.sign(v) * (np.abs(v) / n) ** (q - 1.0)


def _grad(spec, v):
    if isinstance(spec, LqNorm):
        return _grad_lq(v, spec.q)
    parts = _split(spec, v)
    vals = np.array([_eval(b, x) for b, x in zip(spec.blocks, parts)])
    total = _lq(vals, spec.q)
    q = spec.q
    if q == 1 or math.isinf(q):
        # outer combination is smooth only in the trivial one-block-active case
        raise NonDifferentiableError("outer l^1/l^inf products are not supported")
    pieces = []
    for b, x, nb in zip(spec.blocks, parts, vals):
        if nb == 0:
            pieces.append(np.zeros_like(x))
        else:
            pieces.append((nb / total) ** (q - 1.0) * _grad(b, x))
    return np.concatenate(pieces)


def norm_gradient(spec: NormSpec, v) -> np.ndarray:
    """The vector x* with ||x*||_* = 1 and v . x* = ||v||.

    Raises :class:`NonDifferentiableError` at non-smooth points of l^1 / l^inf
    norms instead of picking a subgradient.
    """
    v = _check(spec, v)
    if v.ndim != 1:
        raise DimensionMismatchError("norm_gradient takes a single vector")
    if not np.all(np.isfinite(v)):
        raise DomainError("vector must be finite")
    if not np.any(v):
        raise DomainError("norm is not differentiable at the origin")
    return _grad(spec, v)


def unit_ball_volume(spec: NormSpec) -> float:
    """Lebesgue volume of {||x|| <= 1}."""
    from .domain import WeightedDomain

    return WeightedDomain(spec.dim, (), spec).ball_measure()


# --- text form -------------------------------------------------------------

def _fmt_num(x):
    if math.isinf(x):
        return "inf"
    return repr(float(x)).rstrip("0").rstrip(".") if float(x) != int(x) else str(int(x))


def format_norm(spec: NormSpec) -> str:
    if isinstance(spec, LqNorm):
        return f"lq:{_fmt_num(spec.q)}:dim={spec.dim}"
    blocks = spec.blocks
    if len(blocks) == 2 and blocks[1] == LqNorm(2.0, 1):
        return f"prod({format_norm(blocks[0])},q={_fmt_num(spec.q)})"
    if all(b == blocks[0] for b in blocks):
        return f"tensor({format_norm(blocks[0])},k={len(blocks)},q={_fmt_num(spec.q)})"
    inner = ";".join(format_norm(b) for b in blocks)
    return f"blocks({inner},q={_fmt_num(spec.q)})"


def _num(s):
    return math.inf if s.strip() in ("inf", "oo") else float(s)


def _split_top(s, sep):
    depth, cur, out = 0, [], []
    for ch in s:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == sep and depth == 0:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    out.append("".join(cur))
    return out


_LQ_RE = re.compile(r"^lq:([0-9.eE+-]+|inf)(?::dim=(\d+))?$")


def parse_norm(text: str, dim: int | None = None) -> NormSpec:
    """Parse the canonical text form.  ``dim`` fills in a missing ``dim=``."""
    s = text.strip().replace(" ", "")
    m = _LQ_RE.match(s)
    if m:
        d = int(m.group(2)) if m.group(2) else dim
        if d is None:
            raise DomainError(f"norm {text!r} needs a dimension")
        return LqNorm(_num(m.group(1)), d)
    m = re.match(r"^(prod|tensor|blocks)\((.*)\)$", s)
    if not m:
        raise DomainError(f"cannot parse norm {text!r}")
    kind, body = m.groups()
    args = _split_top(body, ",")
    kw = dict(a.split("=", 1) for a in args[1:])
    q = _num(kw.get("q", "2"))
    if kind == "prod":
        inner_dim = dim - 1 if dim is not None else None
        return ProductNorm.with_line(parse_norm(args[0], inner_dim), q)
    if kind == "tensor":
        k = int(kw["k"])
        inner_dim = dim // k if dim is not None else None
        return ProductNorm.power(parse_norm(args[0], inner_dim), k, q)
    return ProductNorm(tuple(parse_norm(b) for b in _split_top(args[0], ";")), q)
