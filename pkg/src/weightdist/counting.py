"""Pair-fingerprint histograms, counting-lemma verification, exact moments.

The fingerprint of x is the triple fp(x) = (x^2, x^{d1}, x^{d2}),
packed into the single key (u q + v) q + w.  Counting the solutions of
the lemma systems reduces to histogram arithmetic on weighted pair
sums w1 fp(x1) + w2 fp(x2): the quartic systems become convolutions of
two pair histograms, which is what makes them O(q^2) instead of
O(q^4).

Power sums of T need solution counts of sum_i w_i fp(x_i) = 0 with
weights drawn from {1, lam}.  When lam = -1 (the q0 = 3 mod 4 branch)
these are the familiar +/- sign patterns; the general-weight form also
covers q0 = 1 mod 4 exactly.

All counts are exact; anything leaving int64 range is assembled in
Python integers.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .code import CodeParams, make_context, validate_params
from .errors import BudgetExceededError, LemmaMismatchError, ParameterError
from .field import FieldCtx
from .quadform import _form_tables

PAIR_BUDGET = 1 << 26  # max q^2 materialized per histogram build


@dataclass(frozen=True)
class LemmaCheck:
    name: str
    expected: int
    actual: int

    @property
    def ok(self) -> bool:
        return self.expected == self.actual


def _require(checks: list[LemmaCheck]):
    bad = [c for c in checks if not c.ok]
    if bad:
        raise LemmaMismatchError(
            "; ".join(f"{c.name}: expected {c.expected}, got {c.actual}" for c in bad))


def fingerprint_keys(params: CodeParams, ctx: FieldCtx, weight: int = 1) -> np.ndarray:
    """Packed keys of weight * fp(x) for every x, as int64 (u q + v) q + w."""
    p2, pd1, pd2 = _form_tables(ctx, params.d1, params.d2)
    q = params.q
    w = np.int64(weight)
    u, v, ww = ctx.mul_vec(w, p2), ctx.mul_vec(w, pd1), ctx.mul_vec(w, pd2)
    return (u * q + v) * q + ww


def _fingerprint_digits(params: CodeParams, ctx: FieldCtx, weight: int) -> np.ndarray:
    """(q, 3m) digit matrix of the packed fingerprint keys."""
    p2, pd1, pd2 = _form_tables(ctx, params.d1, params.d2)
    w = np.int64(weight)
    u, v, ww = ctx.mul_vec(w, p2), ctx.mul_vec(w, pd1), ctx.mul_vec(w, pd2)
    return np.concatenate([ctx.digits[ww], ctx.digits[v], ctx.digits[u]], axis=1)


def packed_neg(keys: np.ndarray, p: int, ndigits: int) -> np.ndarray:
    """Digit-wise negation of packed base-p keys."""
    out = np.zeros_like(keys)
    pw = 1
    for _ in range(ndigits):
        out += (-(keys // pw) % p) * pw
        pw *= p
    return out


class FingerprintHistogram:
    """Exact histogram of w1 fp(x1) + w2 fp(x2) over all q^2 pairs."""

    def __init__(self, keys: np.ndarray, counts: np.ndarray,
                 weights: tuple[int, int], q: int):
        self.keys = keys          # sorted, unique, int64
        self.counts = counts      # int64
        self.weights = weights
        self.q = q

    def total(self) -> int:
        return int(self.counts.sum())

    def get(self, key: int) -> int:
        pos = int(np.searchsorted(self.keys, key))
        if pos < len(self.keys) and self.keys[pos] == key:
            return int(self.counts[pos])
        return 0

    def get_many(self, keys: np.ndarray) -> np.ndarray:
        pos = np.searchsorted(self.keys, keys)
        pos = np.minimum(pos, len(self.keys) - 1)
        hit = self.keys[pos] == keys
        return np.where(hit, self.counts[pos], 0)

    def convolve_at_zero(self, other: "FingerprintHistogram",
                         p: int, ndigits: int) -> int:
        """sum_t self[t] * other[-t], exact."""
        aligned = self.get_many(packed_neg(other.keys, p, ndigits))
        return int(np.dot(aligned, other.counts))


def _pair_key_block(fd1: np.ndarray, fd2: np.ndarray, lo: int, hi: int,
                    p: int, p_pows: np.ndarray) -> np.ndarray:
    sums = (fd1[lo:hi, None, :].astype(np.int16) + fd2[None, :, :]) % p
    return (sums.astype(np.int64) @ p_pows).reshape(-1)


def _hist_slab(params: CodeParams, ctx: FieldCtx, weights: tuple[int, int],
               lo: int, hi: int):
    fd1 = _fingerprint_digits(params, ctx, weights[0])
    fd2 = _fingerprint_digits(params, ctx, weights[1])
    nd = 3 * params.m
    p_pows = np.array([params.p ** i for i in range(nd)], dtype=np.int64)
    keys = _pair_key_block(fd1, fd2, lo, hi, params.p, p_pows)
    return np.unique(keys, return_counts=True)


_WORKER_PARAMS: dict[tuple, tuple] = {}


def _hist_worker(args):
    (p, m, k, t, w1, w2, lo, hi) = args
    key = (p, m, k, t)
    if key not in _WORKER_PARAMS:
        params = validate_params(p, m, k, t)
        _WORKER_PARAMS[key] = (params, make_context(params))
    params, ctx = _WORKER_PARAMS[key]
    return _hist_slab(params, ctx, (w1, w2), lo, hi)


def _merge_uniques(parts):
    keys = np.concatenate([k for k, _ in parts])
    counts = np.concatenate([c for _, c in parts])
    order = np.argsort(keys, kind="stable")
    keys, counts = keys[order], counts[order]
    uk, start = np.unique(keys, return_index=True)
    sums = np.add.reduceat(counts, start)
    return uk, sums


def resolve_workers(workers: int | None) -> int:
    if workers is None:
        env = os.environ.get("WEIGHTDIST_WORKERS")
        if env:
            return max(1, int(env))
        return os.cpu_count() or 1
    return max(1, workers)


def build_histogram(params: CodeParams, ctx: FieldCtx,
                    weights: tuple[int, int] = (1, 1),
                    workers: int = 1) -> FingerprintHistogram:
    """Histogram over all q^2 pairs, x1 range partitioned across workers."""
    q = params.q
    if q * q > PAIR_BUDGET:
        raise BudgetExceededError(
            f"q^2 = {q * q} pairs exceed the in-memory histogram budget "
            f"{PAIR_BUDGET}; this parameter point needs the out-of-core path")
    workers = resolve_workers(workers)
    slab = max(256, q // (workers * 4)) if workers > 1 else q
    bounds = [(lo, min(lo + slab, q)) for lo in range(0, q, slab)]
    if workers == 1 or len(bounds) == 1:
        parts = [_hist_slab(params, ctx, weights, lo, hi) for lo, hi in bounds]
    else:
        args = [(params.p, params.m, params.k, params.t,
                 weights[0], weights[1], lo, hi) for lo, hi in bounds]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_hist_worker, args))
    keys, counts = _merge_uniques(parts)
    hist = FingerprintHistogram(keys, counts, weights, q)
    assert hist.total() == q * q
    return hist


_HIST_CACHE: dict[tuple, FingerprintHistogram] = {}


def _cached_hist(params: CodeParams, ctx: FieldCtx, weights: tuple[int, int],
                 workers: int = 1) -> FingerprintHistogram:
    key = (params, id(ctx), weights)
    if key not in _HIST_CACHE:
        _HIST_CACHE[key] = build_histogram(params, ctx, weights, workers=workers)
    return _HIST_CACHE[key]


def _zero_fp_count(params: CodeParams, ctx: FieldCtx) -> int:
    return int(np.count_nonzero(fingerprint_keys(params, ctx) == 0))


# ---------------------------------------------------------------------------
# the seven counting lemmas (q0 = 3 mod 4 hypothesis)
# ---------------------------------------------------------------------------

def count_pair_systems(params: CodeParams, ctx: FieldCtx) -> tuple[int, int]:
    """(N2, N2bar): zero buckets of the (+,+) and (+,-) pair histograms."""
    neg1 = ctx.neg(1)
    n2 = _cached_hist(params, ctx, (1, 1)).get(0)
    n2bar = _cached_hist(params, ctx, (1, neg1)).get(0)
    return n2, n2bar


def count_triple_systems(params: CodeParams, ctx: FieldCtx) -> tuple[int, int]:
    """(N3, N3bar) via q lookups of single fingerprints against H_(+,+)."""
    h = _cached_hist(params, ctx, (1, 1))
    neg_keys = np.sort(fingerprint_keys(params, ctx, ctx.neg(1)))
    pos_keys = np.sort(fingerprint_keys(params, ctx, 1))
    n3 = int(h.get_many(neg_keys).sum())
    n3bar = int(h.get_many(pos_keys).sum())
    return n3, n3bar


def count_quad_systems(params: CodeParams, ctx: FieldCtx) -> tuple[int, int, int]:
    """(N4, N4bar, N4tilde) as histogram convolutions."""
    nd = 3 * params.m
    h_pp = _cached_hist(params, ctx, (1, 1))
    h_pm = _cached_hist(params, ctx, (1, ctx.neg(1)))
    n4 = h_pp.convolve_at_zero(h_pp, params.p, nd)
    n4bar = h_pp.convolve_at_zero(h_pm, params.p, nd)
    n4tilde = int(np.dot(h_pp.counts, h_pp.counts))
    return n4, n4bar, n4tilde


def lemma_closed_forms(params: CodeParams) -> dict[str, int]:
    p, m, d = params.p, params.m, params.d
    pm, pd = p ** m, p ** d
    return {
        "N2": 1,
        "N2bar": 2 * pm - 1,
        "N3": pm * pd + pm - pd,
        "N3bar": pm * pd + pm - pd,
        "N4": 1 + (pm - 1) * (pd + 1) * (2 * pm - pd + 1),
        "N4bar": pm * pd * pd + pm - pd * pd,
        "N4tilde": 1 + (pm - 1) * (pd + 1) * (2 * pm - pd + 1),
    }


def verify_counting_lemmas(params: CodeParams, ctx: FieldCtx,
                           strict: bool = False) -> list[LemmaCheck]:
    """Exhaustive counts vs the closed forms.  The closed forms assume
    q0 = 3 (mod 4); refuse other parameter points rather than compare
    against formulas whose hypothesis fails."""
    if params.q0_mod4 != 3:
        raise ParameterError(
            "counting-lemma closed forms require q0 = 3 (mod 4); "
            f"q0 = {params.q0} here")
    want = lemma_closed_forms(params)
    n2, n2bar = count_pair_systems(params, ctx)
    n3, n3bar = count_triple_systems(params, ctx)
    n4, n4bar, n4tilde = count_quad_systems(params, ctx)
    checks = [
        LemmaCheck("N2", want["N2"], n2),
        LemmaCheck("N2bar", want["N2bar"], n2bar),
        LemmaCheck("N3", want["N3"], n3),
        LemmaCheck("N3bar", want["N3bar"], n3bar),
        LemmaCheck("N4", want["N4"], n4),
        LemmaCheck("N4bar", want["N4bar"], n4bar),
        LemmaCheck("N4tilde", want["N4tilde"], n4tilde),
    ]
    if strict:
        _require(checks)
    return checks


# ---------------------------------------------------------------------------
# appendix sub-lemma distributions
# ---------------------------------------------------------------------------

@lru_cache(maxsize=16)
def _sqrt_lookup(ctx: FieldCtx):
    """Solutions of x^2 = y: (elements sorted by their square, offsets)."""
    squares = ctx.power_map(2)
    order = np.argsort(squares, kind="stable")
    return order, squares[order]


def _pairs_with_first_equation(params: CodeParams, ctx: FieldCtx,
                               rhs: int, second_sign: int):
    """All (x1, x2) with x1^2 + second_sign * x2^2 = rhs; returns the two
    power-sum coordinates (v, w) of each pair under the same signs."""
    order, sorted_sq = _sqrt_lookup(ctx)
    q = params.q
    x1 = np.arange(q, dtype=np.int64)
    sq1 = ctx.power_map(2)[x1]
    # need x2^2 = second_sign^-1 * (rhs - x1^2); signs are +/-1 so inverse = sign
    target = ctx.add_vec(np.int64(rhs), ctx.neg_vec(sq1))
    if second_sign == -1:
        target = ctx.neg_vec(target)
    lo = np.searchsorted(sorted_sq, target, side="left")
    hi = np.searchsorted(sorted_sq, target, side="right")
    reps = (hi - lo).astype(np.int64)
    x1_rep = np.repeat(x1, reps)
    take = np.concatenate([np.arange(a, b) for a, b in zip(lo, hi)])
    x2 = order[take.astype(np.int64)]
    p2, pd1, pd2 = _form_tables(ctx, params.d1, params.d2)
    if second_sign == -1:
        v = ctx.add_vec(pd1[x1_rep], ctx.neg_vec(pd1[x2]))
        w = ctx.add_vec(pd2[x1_rep], ctx.neg_vec(pd2[x2]))
    else:
        v = ctx.add_vec(pd1[x1_rep], pd1[x2])
        w = ctx.add_vec(pd2[x1_rep], pd2[x2])
    return v, w


def sublemma_distributions(params: CodeParams, ctx: FieldCtx,
                           strict: bool = False) -> list[LemmaCheck]:
    """Appendix solution-count distributions over (b, c) in F_q*^2.

    Three systems, each with the first equation pinned to a unit:
      plus system   x1^2 + x2^2 = 1,  counts N1(b,c)
      minus system  x3^2 + x4^2 = -1, counts N2(b,c) (read at (-b,-c))
      mixed system  x3^2 - x4^2 = -1, counts N3(b,c) (read at (-b,-c))
    """
    if params.q0_mod4 != 3:
        raise ParameterError(
            "appendix distributions require q0 = 3 (mod 4); "
            f"q0 = {params.q0} here")
    p, q, pd = params.p, params.q, params.q0

    def tally(rhs, second_sign, negate_bc):
        v, w = _pairs_with_first_equation(params, ctx, rhs, second_sign)
        if negate_bc:
            v, w = ctx.neg_vec(v), ctx.neg_vec(w)
        keys = v * q + w
        uk, cnt = np.unique(keys, return_counts=True)
        return dict(zip(uk.tolist(), cnt.tolist()))

    one_one = 1 * q + 1
    checks = []

    n1 = tally(1, +1, negate_bc=False)
    n2 = tally(ctx.neg(1), +1, negate_bc=True)
    n3 = tally(ctx.neg(1), -1, negate_bc=True)

    checks.append(LemmaCheck("N1(1,1)", pd + 1, n1.get(one_one, 0)))
    checks.append(LemmaCheck("N2(1,1)", pd + 1, n2.get(one_one, 0)))
    checks.append(LemmaCheck("N3(1,1)", pd - 1, n3.get(one_one, 0)))

    def support_checks(tag, table, big_val, big_count):
        # only (b, c) with both coordinates nonzero count toward the lemma
        other = {key: cnt for key, cnt in table.items()
                 if key // q != 0 and key % q != 0 and key != one_one}
        bad = sum(1 for cnt in other.values() if cnt != big_val)
        checks.append(LemmaCheck(f"{tag} off-support values", 0, bad))
        checks.append(LemmaCheck(f"{tag} count at {big_val}", big_count,
                                 sum(1 for cnt in other.values() if cnt == big_val)))

    support_checks("N1", n1, 2 * (pd + 1), (q - pd) // (2 * (pd + 1)))
    support_checks("N2", n2, 2 * (pd + 1), (q - pd) // (2 * (pd + 1)))
    support_checks("N3", n3, 2 * (pd - 1), (q - pd) // (2 * (pd - 1)))

    # the appendix identifies the two plus/minus tables point by point
    mismatch = 0
    allkeys = set(n1) | set(n2)
    for key in allkeys:
        if key // q != 0 and key % q != 0:
            if n1.get(key, 0) != n2.get(key, 0):
                mismatch += 1
    checks.append(LemmaCheck("N1(b,c) == N2(b,c) everywhere", 0, mismatch))

    if strict:
        _require(checks)
    return checks


# ---------------------------------------------------------------------------
# power sums of T
# ---------------------------------------------------------------------------

def moment(params: CodeParams, ctx: FieldCtx, j: int) -> int:
    """Exact sum of T(a,b,c)^j over all q^3 triples.

    Expands T^j into solution counts of sum_i w_i fp(x_i) = 0 over
    weight patterns w in {1, lam}^j, reduced by global scaling and
    permutation.  For lam = -1 these are the classical sign patterns.
    """
    if j not in (1, 2, 3, 4):
        raise ParameterError(f"moment order {j} not supported")
    p3m = params.p ** (3 * params.m)
    lam = params.lam
    lam_inv = ctx.inv(lam)
    nd = 3 * params.m

    if j == 1:
        zero_count = _zero_fp_count(params, ctx)
        assert zero_count == 1
        return 2 * p3m * zero_count

    h11 = _cached_hist(params, ctx, (1, 1))
    if j == 2:
        h1l = _cached_hist(params, ctx, (1, lam))
        return p3m * (2 * h11.get(0) + 2 * h1l.get(0))

    if j == 3:
        def k3(weight):
            keys = np.sort(fingerprint_keys(params, ctx, ctx.neg(weight)))
            return int(h11.get_many(keys).sum())
        return p3m * (2 * k3(1) + 3 * k3(lam) + 3 * k3(lam_inv))

    h1l = _cached_hist(params, ctx, (1, lam))
    h1li = _cached_hist(params, ctx, (1, lam_inv))
    n4 = h11.convolve_at_zero(h11, params.p, nd)
    k4_l = h11.convolve_at_zero(h1l, params.p, nd)
    k4_li = h11.convolve_at_zero(h1li, params.p, nd)
    k4_mid = h1l.convolve_at_zero(h1l, params.p, nd)
    return p3m * (2 * n4 + 4 * k4_l + 4 * k4_li + 6 * k4_mid)


def moment_closed_forms(params: CodeParams) -> dict[int, int]:
    p, m, d = params.p, params.m, params.d
    n3 = p ** (m + d) + p ** m - p ** d
    return {
        1: 2 * p ** (3 * m),
        2: 4 * p ** (4 * m),
        3: 8 * p ** (3 * m) * n3,
        4: 16 * p ** (4 * m) * n3,
    }
