"""Value distribution of T and weight distribution of the code,
by three routes that must agree exactly:

  * closed form      -- the two frequency tables evaluated in exact
                        integer arithmetic,
  * full enumeration -- every (a,b,c) classified by rank/discriminant
                        (feasible up to the enumeration budget),
  * moment method    -- the four power sums of T pin the four signed
                        frequencies through an exact linear solve.

Weights and values are linked by
W = p^(m-t) (p^t - 1) - ((p^t - 1) / (2 p^t)) T, all divisions exact.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .code import CodeParams, make_context, validate_params
from .counting import moment, resolve_workers
from .errors import (
    BudgetExceededError,
    InadmissibleValueError,
    NonIntegralFrequencyError,
    NonIntegralSolutionError,
    NonIntegralWeightError,
    SingularSystemError,
)
from .field import FieldCtx
from .quadform import BatchClassifier

ENUMERATION_BUDGET = 1 << 36
_CHUNK = 1 << 19


@dataclass(frozen=True)
class ValueDistribution:
    """Exact map T value -> frequency."""
    freqs: dict[int, int]

    def total(self) -> int:
        return sum(self.freqs.values())

    def moment(self, j: int) -> int:
        return sum(cnt * v ** j for v, cnt in self.freqs.items())

    def nonzero(self) -> dict[int, int]:
        return {v: c for v, c in self.freqs.items() if c}


@dataclass(frozen=True)
class WeightHistogram:
    """Exact map Hamming weight -> frequency."""
    freqs: dict[int, int]

    def total(self) -> int:
        return sum(self.freqs.values())

    def min_nonzero_weight(self) -> int:
        return min(w for w, c in self.freqs.items() if w > 0 and c > 0)


@dataclass(frozen=True)
class CheckEntry:
    name: str
    expected: str
    actual: str
    passed: bool


@dataclass
class VerificationReport:
    params: CodeParams
    mode: str
    checks: list[CheckEntry] = field(default_factory=list)
    value_distribution: ValueDistribution | None = None
    weight_distribution: WeightHistogram | None = None
    runtime_ms: int = 0

    def add(self, name: str, expected, actual):
        self.checks.append(CheckEntry(name, str(expected), str(actual),
                                      str(expected) == str(actual)))

    def add_bool(self, name: str, ok: bool, detail: str = ""):
        self.checks.append(CheckEntry(name, "pass", detail or ("pass" if ok else "fail"), ok))

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)


def admissible_values(params: CodeParams) -> tuple[int, ...]:
    p, m, d = params.p, params.m, params.d
    hi = 2 * p ** ((m + d) // 2)
    lo = 2 * p ** ((m + 3 * d) // 2)
    return (2 * params.q, 0, hi, -hi, lo, -lo)


def _exact_div(num: int, den: int, what: str) -> int:
    quo, rem = divmod(num, den)
    if rem:
        raise NonIntegralFrequencyError(f"{what}: {num} not divisible by {den}")
    return quo


def table1_closed_form(params: CodeParams) -> ValueDistribution:
    """The six-row frequency table for T, checked integral and complete."""
    p, m, d = params.p, params.m, params.d
    pm = p ** m
    big = 2 * p ** ((m + d) // 2)
    small = 2 * p ** ((m + 3 * d) // 2)
    f0 = (pm - 1) * (p ** (2 * m) - p ** (2 * m - d) + p ** (2 * m - 4 * d)
                     + pm - p ** (m - d) - p ** (m - 3 * d) + 1)
    den = 2 * (p ** (2 * d) - 1)
    mid_factor = (p ** (2 * m) - p ** (2 * m - 2 * d) - p ** (2 * m - 3 * d)
                  + p ** (m - 2 * d) + p ** (m - 3 * d) - 1)
    n10 = _exact_div((p ** (m + d) + p ** ((m + 3 * d) // 2)) * mid_factor, den, "n10")
    n11 = _exact_div((p ** (m + d) - p ** ((m + 3 * d) // 2)) * mid_factor, den, "n11")
    lo_factor = (pm - 1) * (p ** (m - d) - 1)
    n20 = _exact_div((p ** (m - 3 * d) + p ** ((m - 3 * d) // 2)) * lo_factor, den, "n20")
    n21 = _exact_div((p ** (m - 3 * d) - p ** ((m - 3 * d) // 2)) * lo_factor, den, "n21")
    freqs = {2 * pm: 1, 0: f0, big: n10, -big: n11, small: n20, -small: n21}
    for v, cnt in freqs.items():
        if cnt < 0:
            raise NonIntegralFrequencyError(f"negative frequency {cnt} at value {v}")
    vd = ValueDistribution(freqs)
    if vd.total() != pm ** 3:
        raise NonIntegralFrequencyError(
            f"frequencies sum to {vd.total()}, expected q^3 = {pm ** 3}")
    return vd


def weight_from_T(params: CodeParams, t_value: int) -> int:
    """W = p^(m-t)(p^t - 1) - ((p^t - 1)/(2 p^t)) T, division exact."""
    p, m, t = params.p, params.m, params.t
    pt = p ** t
    num = (pt - 1) * t_value
    quo, rem = divmod(num, 2 * pt)
    if rem:
        raise NonIntegralWeightError(f"(p^t-1) T = {num} not divisible by 2 p^t")
    return p ** (m - t) * (pt - 1) - quo


def table2_closed_form(params: CodeParams) -> WeightHistogram:
    """The five nonzero weights with Table-1 frequencies, plus weight 0."""
    p, m, d, t = params.p, params.m, params.d, params.t
    pt = p ** t
    base = p ** (m - t)
    off1 = p ** ((m + d - 2 * t) // 2)
    off2 = p ** ((m + 3 * d - 2 * t) // 2)
    t1 = table1_closed_form(params)
    big = 2 * p ** ((m + d) // 2)
    small = 2 * p ** ((m + 3 * d) // 2)
    freqs = {
        0: 1,
        (pt - 1) * base: t1.freqs[0],
        (pt - 1) * (base - off1): t1.freqs[big],
        (pt - 1) * (base + off1): t1.freqs[-big],
        (pt - 1) * (base - off2): t1.freqs[small],
        (pt - 1) * (base + off2): t1.freqs[-small],
    }
    return WeightHistogram(freqs)


def distribution_to_weights(params: CodeParams, vd: ValueDistribution) -> WeightHistogram:
    out: dict[int, int] = {}
    for v, cnt in vd.freqs.items():
        w = weight_from_T(params, v)
        out[w] = out.get(w, 0) + cnt
    return WeightHistogram(out)


# ---------------------------------------------------------------------------
# full enumeration
# ---------------------------------------------------------------------------

_WORKER_STATE: dict[tuple, tuple] = {}


def _enum_state(key):
    if key not in _WORKER_STATE:
        params = validate_params(*key)
        ctx = make_context(params)
        _WORKER_STATE[key] = (params, ctx, BatchClassifier(params, ctx))
    return _WORKER_STATE[key]


def _enum_slab(args):
    (p, m, k, t, lo, hi) = args
    params, ctx, bc = _enum_state((p, m, k, t))
    q = params.q
    out: dict[int, int] = {}
    for start in range(lo, hi, _CHUNK):
        stop = min(start + _CHUNK, hi)
        flat = np.arange(start, stop, dtype=np.int64)
        a = flat // (q * q)
        b = (flat // q) % q
        c = flat % q
        _, _, tv = bc.classify_block(a, b, c)
        vals, counts = np.unique(tv, return_counts=True)
        for v, cnt in zip(vals.tolist(), counts.tolist()):
            out[v] = out.get(v, 0) + cnt
    return out


def enumerate_distribution(params: CodeParams, ctx: FieldCtx | None = None,
                           workers: int | None = 1) -> ValueDistribution:
    """Classify every triple; exact frequency map.  Partitioned over the
    flat triple range; the merged result is independent of worker count."""
    n = params.q ** 3
    if n > ENUMERATION_BUDGET:
        raise BudgetExceededError(f"q^3 = {n} exceeds enumeration budget 2^36")
    workers = resolve_workers(workers)
    key = (params.p, params.m, params.k, params.t)
    if workers == 1:
        merged = _enum_slab((*key, 0, n))
    else:
        slab = -(-n // (workers * 4))
        slab = max(slab, _CHUNK)
        jobs = [(*key, lo, min(lo + slab, n)) for lo in range(0, n, slab)]
        merged: dict[int, int] = {}
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(_enum_slab, jobs):
                for v, cnt in part.items():
                    merged[v] = merged.get(v, 0) + cnt
    return ValueDistribution(merged)


def enumerate_t_array(params: CodeParams, ctx: FieldCtx) -> np.ndarray:
    """Classifier T value for every triple, flat layout (a q + b) q + c.
    Only for parameter points small enough to hold the array."""
    n = params.q ** 3
    if n > 1 << 28:
        raise BudgetExceededError(f"q^3 = {n} too large to materialize")
    bc = BatchClassifier(params, ctx)
    q = params.q
    out = np.empty(n, dtype=np.int64)
    for start in range(0, n, _CHUNK):
        stop = min(start + _CHUNK, n)
        flat = np.arange(start, stop, dtype=np.int64)
        _, _, tv = bc.classify_block(flat // (q * q), (flat // q) % q, flat % q)
        out[start:stop] = tv
    return out


# ---------------------------------------------------------------------------
# moment method
# ---------------------------------------------------------------------------

def moment_solve_distribution(params: CodeParams, ctx: FieldCtx | None = None) -> ValueDistribution:
    """Recover the value distribution from the first four power sums of T.

    The power-sum system splits into two 2x2 linear systems, one for
    the frequency differences (odd moments) and one for the sums (even
    moments); both are solved exactly over the rationals and the
    results must come out integral and non-negative.
    """
    if ctx is None:
        ctx = make_context(params)
    p, m, d = params.p, params.m, params.d
    q = params.q
    s1 = moment(params, ctx, 1)
    s2 = moment(params, ctx, 2)
    s3 = moment(params, ctx, 3)
    s4 = moment(params, ctx, 4)
    big = 2 * p ** ((m + d) // 2)
    small = 2 * p ** ((m + 3 * d) // 2)

    # odd moments:  s_j - (2 p^m)^j = n10d big^j + n20d small^j, j = 1, 3
    # even moments: s_j - (2 p^m)^j = n10s big^j + n20s small^j, j = 2, 4
    def solve2(rhs1, rhs3, v1, v2, j1, j2):
        a11, a12 = Fraction(v1 ** j1), Fraction(v2 ** j1)
        a21, a22 = Fraction(v1 ** j2), Fraction(v2 ** j2)
        det = a11 * a22 - a12 * a21
        if det == 0:
            raise SingularSystemError("moment system is singular")
        x = (Fraction(rhs1) * a22 - a12 * Fraction(rhs3)) / det
        y = (a11 * Fraction(rhs3) - Fraction(rhs1) * a21) / det
        return x, y

    t0 = 2 * p ** m
    diff_hi, diff_lo = solve2(s1 - t0, s3 - t0 ** 3, big, small, 1, 3)
    sum_hi, sum_lo = solve2(s2 - t0 ** 2, s4 - t0 ** 4, big, small, 2, 4)

    def as_count(x: Fraction, what: str) -> int:
        if x.denominator != 1:
            raise NonIntegralSolutionError(f"{what} = {x} is not an integer")
        return int(x)

    n10 = as_count((sum_hi + diff_hi) / 2, "n_{1,0}")
    n11 = as_count((sum_hi - diff_hi) / 2, "n_{1,1}")
    n20 = as_count((sum_lo + diff_lo) / 2, "n_{2,0}")
    n21 = as_count((sum_lo - diff_lo) / 2, "n_{2,1}")
    for name, v in (("n_{1,0}", n10), ("n_{1,1}", n11),
                    ("n_{2,0}", n20), ("n_{2,1}", n21)):
        if v < 0:
            raise NonIntegralSolutionError(f"{name} = {v} is negative")
    f0 = q ** 3 - 1 - n10 - n11 - n20 - n21
    if f0 < 0:
        raise NonIntegralSolutionError(f"frequency of 0 came out negative: {f0}")
    return ValueDistribution({2 * p ** m: 1, 0: f0, big: n10, -big: n11,
                              small: n20, -small: n21})


# ---------------------------------------------------------------------------
# randomized spot check for points beyond the enumeration budget
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SampleCheckResult:
    n: int
    seed: int
    observed: dict[int, int]
    max_sigma: float
    checks: list[CheckEntry]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)


def sample_check(params: CodeParams, ctx: FieldCtx, n: int, seed: int,
                 sigma_limit: float = 5.0) -> SampleCheckResult:
    """Classify n uniform triples; every T must be admissible, and each
    bucket proportion must sit within sigma_limit binomial standard
    deviations of its Table 1 proportion."""
    if n < 1:
        raise ValueError("sample size must be >= 1")
    rng = np.random.default_rng(seed)
    bc = BatchClassifier(params, ctx)
    t1 = table1_closed_form(params)
    admissible = set(t1.freqs)
    observed: dict[int, int] = {}
    remaining = n
    while remaining > 0:
        block = min(remaining, _CHUNK)
        trip = rng.integers(0, params.q, size=(block, 3), dtype=np.int64)
        _, _, tv = bc.classify_block(trip[:, 0], trip[:, 1], trip[:, 2])
        vals, counts = np.unique(tv, return_counts=True)
        for v, cnt in zip(vals.tolist(), counts.tolist()):
            observed[v] = observed.get(v, 0) + cnt
        remaining -= block
    stray = set(observed) - admissible
    if stray:
        raise InadmissibleValueError(f"sampled T values outside Table 1: {sorted(stray)}")
    checks: list[CheckEntry] = []
    q3 = params.q ** 3
    max_sigma = 0.0
    for v in sorted(t1.freqs, reverse=True):
        pr = t1.freqs[v] / q3
        obs = observed.get(v, 0)
        sigma = (n * pr * (1 - pr)) ** 0.5
        dev = abs(obs - n * pr) / sigma if sigma > 0 else 0.0
        max_sigma = max(max_sigma, dev)
        checks.append(CheckEntry(
            name=f"sample proportion at T={v}",
            expected=f"{n * pr:.2f}",
            actual=f"{obs} ({dev:.2f} sigma)",
            passed=dev < sigma_limit,
        ))
    # the zero triple is classified deterministically
    zero_t = bc.classify_block(np.zeros(1, np.int64), np.zeros(1, np.int64),
                               np.zeros(1, np.int64))[2][0]
    checks.append(CheckEntry("T(0,0,0)", str(2 * params.q), str(int(zero_t)),
                             int(zero_t) == 2 * params.q))
    return SampleCheckResult(n=n, seed=seed, observed=observed,
                             max_sigma=max_sigma, checks=checks)
