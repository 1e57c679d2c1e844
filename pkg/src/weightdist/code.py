"""Parameter validation and construction of the cyclic code family.

The code lives over F_{p^t} and has parity-check polynomial
h0(x) h1(x) h2(x), the minimal polynomials over F_{p^t} of pi^-2,
pi^-(p^k+1) and pi^-(p^2k+1).  Codewords are the trace sequences
c_i = Tr^{q}_{p^t}(a pi^{2i} + b pi^{(p^k+1)i} + c pi^{(p^2k+1)i}).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import (
    DegenerateFactorError,
    FieldTooLargeError,
    InvalidSError,
    InvalidTError,
    ParameterError,
)
from .field import FIELD_SIZE_CAP, FieldCtx, cached_field, is_prime
from .errors import EvenCharacteristicError, NonPrimeError


@dataclass(frozen=True)
class CodeParams:
    p: int
    m: int
    k: int
    t: int
    d: int
    s: int
    m0: int
    q: int
    q0: int
    d1: int
    d2: int
    lam: int        # canonical index of the chosen non-square of F_{p^t}
    q0_mod4: int

    @property
    def length(self) -> int:
        return self.q - 1

    @property
    def dimension(self) -> int:
        return 3 * self.m0


def validate_params(p: int, m: int, k: int, t: int) -> CodeParams:
    """Check the parameter regime and derive every global quantity.

    lam is -1 when p^t = 3 (mod 4), else the primitive element of
    F_{p^t}; either way a non-square of F_{p^t} (hence of F_{q0},
    because d/t is odd).
    """
    for name, v in (("p", p), ("m", m), ("k", k), ("t", t)):
        if not isinstance(v, int) or v < 1:
            raise ParameterError(f"{name}={v} must be a positive integer")
    if p == 2:
        raise EvenCharacteristicError("p must be odd")
    if not is_prime(p):
        raise NonPrimeError(f"p={p} is not prime")
    d = math.gcd(m, k)
    s = m // d
    if s < 5 or s % 2 == 0:
        raise InvalidSError(f"s=m/gcd(m,k)={s} must be odd and >= 5")
    if d % t != 0:
        raise InvalidTError(f"t={t} does not divide d={d}")
    if (d // t) % 2 == 0:
        raise InvalidTError(f"d/t={d // t} must be odd")
    q = p ** m
    if q > FIELD_SIZE_CAP:
        raise FieldTooLargeError(f"q=p^m={q} exceeds cap 2^24")
    q0 = p ** d
    if p ** t % 4 == 3:
        lam = p - 1  # the constant -1
    else:
        lam = cached_field(p, m).subfield(t).gen
    return CodeParams(
        p=p, m=m, k=k, t=t, d=d, s=s, m0=m // t, q=q, q0=q0,
        d1=p ** k + 1, d2=p ** (2 * k) + 1, lam=lam, q0_mod4=q0 % 4,
    )


def make_context(params: CodeParams) -> FieldCtx:
    return cached_field(params.p, params.m)


@dataclass(frozen=True)
class CyclotomicCoset:
    base: int
    orbit: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.orbit)


def cyclotomic_coset(e: int, modulus: int, multiplier: int) -> CyclotomicCoset:
    """Orbit of e under repeated multiplication by `multiplier` mod `modulus`."""
    e %= modulus
    orbit = [e]
    cur = (e * multiplier) % modulus
    while cur != e:
        orbit.append(cur)
        cur = (cur * multiplier) % modulus
    return CyclotomicCoset(base=e, orbit=tuple(orbit))


@dataclass(frozen=True)
class SubfieldPolynomial:
    """Monic polynomial over F_{p^t}; coefficients are canonical indices."""
    coeffs: tuple[int, ...]  # low degree first, last entry 1
    subfield_degree: int

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def evaluate(self, ctx: FieldCtx, x: int) -> int:
        acc = 0
        for c in reversed(self.coeffs):
            acc = ctx.add(ctx.mul(acc, x), c)
        return acc


def minimal_polynomial(params: CodeParams, ctx: FieldCtx, beta: int) -> SubfieldPolynomial:
    """Minimal polynomial of beta over F_{p^t}, as the product over its
    Frobenius^t orbit; coefficients are checked to land in F_{p^t}."""
    if beta == 0:
        raise ParameterError("beta must be nonzero")
    t = params.t
    orbit = [beta]
    cur = ctx.frobenius(beta, t)
    while cur != beta:
        orbit.append(cur)
        cur = ctx.frobenius(cur, t)
    poly = [1]
    for gamma in orbit:
        ng = ctx.neg(gamma)
        nxt = [0] * (len(poly) + 1)
        for i, c in enumerate(poly):
            nxt[i] = ctx.add(nxt[i], ctx.mul(c, ng))
            nxt[i + 1] = ctx.add(nxt[i + 1], c)
        poly = nxt
    for c in poly:
        if not ctx.in_subfield(c, t):
            raise AssertionError("minimal polynomial coefficient escaped F_{p^t}")
    return SubfieldPolynomial(coeffs=tuple(poly), subfield_degree=t)


def _polmul(ctx: FieldCtx, a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = ctx.add(out[i + j], ctx.mul(ai, bj))
    return tuple(out)


def _polmod(ctx: FieldCtx, a: list[int], mod: tuple[int, ...]) -> list[int]:
    a = list(a)
    dm = len(mod) - 1
    for i in range(len(a) - 1, dm - 1, -1):
        c = a[i]
        if c:
            for j in range(dm + 1):
                a[i - dm + j] = ctx.sub(a[i - dm + j], ctx.mul(c, mod[j]))
    del a[dm:]
    while a and a[-1] == 0:
        a.pop()
    return a


def _pow_x_mod(ctx: FieldCtx, e: int, mod: tuple[int, ...]) -> list[int]:
    """x^e mod `mod` by square-and-multiply."""
    result = [1]
    base = _polmod(ctx, [0, 1], mod)
    while e:
        if e & 1:
            result = _polmod(ctx, list(_polmul(ctx, tuple(result), tuple(base))), mod)
        base = _polmod(ctx, list(_polmul(ctx, tuple(base), tuple(base))), mod)
        e >>= 1
    return result


def parity_check_polynomial(params: CodeParams, ctx: FieldCtx) -> SubfieldPolynomial:
    """h0 h1 h2; degree 3 m0.  Raises DegenerateFactor outside the regime."""
    pi_inv = ctx.inv(ctx.pi)
    betas = [ctx.pow(pi_inv, 2), ctx.pow(pi_inv, params.d1), ctx.pow(pi_inv, params.d2)]
    factors = [minimal_polynomial(params, ctx, b) for b in betas]
    for i, f in enumerate(factors):
        if f.degree != params.m0:
            raise DegenerateFactorError(
                f"factor {i} has degree {f.degree}, expected m0={params.m0}")
    if len({f.coeffs for f in factors}) != 3:
        raise DegenerateFactorError("parity-check factors are not pairwise distinct")
    prod = factors[0].coeffs
    for f in factors[1:]:
        prod = _polmul(ctx, prod, f.coeffs)
    h = SubfieldPolynomial(coeffs=prod, subfield_degree=params.t)
    assert h.degree == 3 * params.m0
    # h | x^(q-1) - 1  <=>  x^(q-1) = 1 (mod h)
    if _pow_x_mod(ctx, params.q - 1, h.coeffs) != [1]:
        raise DegenerateFactorError("h0 h1 h2 does not divide x^(q-1) - 1")
    return h


def parity_check_factors(params: CodeParams, ctx: FieldCtx) -> list[SubfieldPolynomial]:
    pi_inv = ctx.inv(ctx.pi)
    return [minimal_polynomial(params, ctx, ctx.pow(pi_inv, e))
            for e in (2, params.d1, params.d2)]


@lru_cache(maxsize=8)
def _exponent_tables(ctx: FieldCtx, d1: int, d2: int):
    """Per-index i tables of pi^{2i}, pi^{d1 i}, pi^{d2 i}."""
    n = ctx.q - 1
    i = np.arange(n, dtype=np.int64)
    return (ctx.antilog[(2 * i) % n],
            ctx.antilog[(d1 % n) * i % n],
            ctx.antilog[(d2 % n) * i % n])


def codeword(params: CodeParams, ctx: FieldCtx, a: int, b: int, c: int) -> np.ndarray:
    """The full length-(q-1) trace sequence for one triple (values in F_{p^t})."""
    e2, ed1, ed2 = _exponent_tables(ctx, params.d1, params.d2)
    acc = ctx.add_vec(ctx.mul_vec(np.int64(a), e2),
                      ctx.mul_vec(np.int64(b), ed1))
    acc = ctx.add_vec(acc, ctx.mul_vec(np.int64(c), ed2))
    return ctx.trace_table(params.t)[acc]


def codeword_weight_direct(params: CodeParams, ctx: FieldCtx,
                           a: int, b: int, c: int) -> int:
    """Hamming weight by direct counting of nonzero trace values."""
    return int(np.count_nonzero(codeword(params, ctx, a, b, c)))


def sequence_in_code(params: CodeParams, ctx: FieldCtx, seq: np.ndarray) -> bool:
    """True iff seq(x) h(x) = 0 mod (x^(q-1) - 1): the recurrence
    sum_j h_j seq_{i-j} vanishes at every index i, cyclically."""
    h = parity_check_polynomial(params, ctx)
    n = params.q - 1
    if len(seq) != n:
        raise ParameterError(f"sequence length {len(seq)} != q-1 = {n}")
    acc = np.zeros(n, dtype=np.int64)
    for j, hj in enumerate(h.coeffs):
        if hj:
            acc = ctx.add_vec(acc, ctx.mul_vec(np.int64(hj), np.roll(seq, j)))
    return not np.any(acc)


def lfsr_membership(params: CodeParams, ctx: FieldCtx, a: int, b: int, c: int) -> bool:
    return sequence_in_code(params, ctx, codeword(params, ctx, a, b, c))
