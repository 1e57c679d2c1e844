"""Exact character sums in Z[zeta_p], the independent ground truth.

A sum over F_q of p-th roots of unity is kept as a length-p vector of
integer counts (coefficient of each zeta^j).  Nothing is ever rounded:
rationality is decided by the all-equal-tail criterion coming from
1 + zeta + ... + zeta^(p-1) = 0, and the value of the paired sum

    T(a,b,c) = sum_x zeta^(Tr(Q(x))) + sum_x zeta^(Tr(lam Q(x)))

is an exact integer.  `transform_all_triples` evaluates the same sums
for every (a,b,c) at once with a radix-p butterfly network; it is used
for whole-space sweeps and is checked against the per-triple path.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .code import CodeParams
from .errors import BudgetExceededError, NotRationalError
from .field import FieldCtx
from .quadform import _form_tables

ENUMERATION_BUDGET = 1 << 36


@dataclass(frozen=True)
class CyclotomicSum:
    """sum_j counts[j] * zeta_p^j with exact integer counts."""
    counts: tuple[int, ...]

    def __add__(self, other: "CyclotomicSum") -> "CyclotomicSum":
        return CyclotomicSum(tuple(x + y for x, y in zip(self.counts, other.counts)))

    def total(self) -> int:
        return sum(self.counts)


def reduce_rational(s: CyclotomicSum) -> int:
    """Integer value of a rational cyclotomic sum: counts (a, c, c, ..., c)
    reduce to a - c; anything else is not rational."""
    tail = set(s.counts[1:])
    if len(tail) != 1:
        raise NotRationalError(f"counts {s.counts} have unequal tail")
    return s.counts[0] - s.counts[1]


def form_char_sum(params: CodeParams, ctx: FieldCtx, a: int, b: int, c: int,
                  scale: int = 1) -> CyclotomicSum:
    """Bucket Tr^{q0}_p(scale * Q_{a,b,c}(x)) over all x in F_q."""
    if scale == 0:
        raise ValueError("scale must be nonzero")
    p2, pd1, pd2 = _form_tables(ctx, params.d1, params.d2)
    view = ctx.subfield(params.d)
    agg = ctx.add_vec(ctx.mul_vec(np.int64(a), p2), ctx.mul_vec(np.int64(b), pd1))
    agg = ctx.add_vec(agg, ctx.mul_vec(np.int64(c), pd2))
    qvals = ctx.trace_table(params.d)[agg]
    scaled = ctx.mul_vec(np.int64(scale), qvals)
    exps = view.trace_to_prime[view.small_vec(scaled)]
    buckets = np.bincount(exps, minlength=params.p)
    out = CyclotomicSum(tuple(int(v) for v in buckets))
    assert out.total() == params.q
    return out


def T_oracle(params: CodeParams, ctx: FieldCtx, a: int, b: int, c: int) -> int:
    """Exact T(a,b,c); raises NotRational only on an implementation bug."""
    s = form_char_sum(params, ctx, a, b, c, 1) + \
        form_char_sum(params, ctx, a, b, c, params.lam)
    assert s.total() == 2 * params.q
    return reduce_rational(s)


# ---------------------------------------------------------------------------
# whole-space sweep
# ---------------------------------------------------------------------------

def _pairing_twist(ctx: FieldCtx) -> np.ndarray:
    """Index permutation u -> u* with Tr(a u) = <digits(a), digits(u*)>.

    The trace pairing Tr(a u) equals digits(a)^T G digits(u) for the
    Gram matrix G[i][j] = Tr(e_i e_j) of the polynomial basis; folding
    G into the u side turns the character kernel into the plain
    digit-wise dot product that the butterfly stages implement.
    """
    m, p = ctx.m, ctx.p
    G = np.zeros((m, m), dtype=np.int64)
    for i in range(m):
        for j in range(m):
            G[i, j] = ctx.trace(ctx.mul(p ** i, p ** j), 1)
    twisted = (ctx.digits.astype(np.int64) @ G.T) % p
    return (twisted @ ctx._p_pows).astype(np.int64)


def transform_all_triples(params: CodeParams, ctx: FieldCtx) -> np.ndarray:
    """S(a,b,c) = sum_x zeta^(Tr^q_p(a x^2 + b x^d1 + c x^d2)) for every
    triple, as a (p, q^3) array of zeta-power coefficients.

    Flat triple index is (ia * q + ib) * q + ic.  Exact integer
    arithmetic throughout; coefficient magnitudes never exceed q.
    """
    p, q, m = params.p, params.q, params.m
    if q ** 3 > ENUMERATION_BUDGET:
        raise BudgetExceededError(f"q^3 = {q ** 3} exceeds enumeration budget")
    p2, pd1, pd2 = _form_tables(ctx, params.d1, params.d2)
    twist = _pairing_twist(ctx)
    # point mass at the twisted power triple of each x
    flat = (twist[p2] * q + twist[pd1]) * q + twist[pd2]
    coeff = np.zeros((p, q ** 3), dtype=np.int32)
    np.add.at(coeff[0], flat, 1)

    # radix-p stages over all 3m base-p digit positions of the triple index
    n = q ** 3
    for stage in range(3 * m):
        stride = p ** stage
        work = coeff.reshape(p, n // (stride * p), p, stride)
        pieces = [work[:, :, k, :] for k in range(p)]
        out = np.empty_like(work)
        for j in range(p):
            acc = pieces[0].copy()
            for k in range(1, p):
                acc += np.roll(pieces[k], (j * k) % p, axis=0)
            out[:, :, j, :] = acc
        coeff = out.reshape(p, n)
    return coeff


def batch_T_values(params: CodeParams, ctx: FieldCtx) -> np.ndarray:
    """T(a,b,c) for every triple (flat layout as above), via the sweep
    transform plus the lambda-scaled re-indexing; exact int64."""
    q = params.q
    coeff = transform_all_triples(params, ctx)
    lam_map = ctx.mul_vec(np.int64(params.lam), np.arange(q, dtype=np.int64))
    ia, ib, ic = np.meshgrid(lam_map, lam_map, lam_map, indexing="ij", sparse=True)
    perm = ((ia * q + ib) * q + ic).reshape(-1)
    scaled = coeff[:, perm]  # gather before adding: S at (lam a, lam b, lam c)
    total = coeff.astype(np.int64) + scaled
    tail = total[1]
    for j in range(2, params.p):
        if not np.array_equal(total[j], tail):
            raise NotRationalError("paired sweep produced a non-rational value")
    return total[0] - tail
