"""Exact arithmetic in F_{p^m} and its subfields.

Elements are plain ints: the canonical index of an element with
polynomial-basis coefficients (c_0, ..., c_{m-1}) is sum(c_i * p^i),
so 0 is the zero element and indices run over [0, q).  All tables are
dense numpy arrays indexed by element, which keeps both the scalar
API and the vectorized bulk paths exact.

The modulus is the lexicographically smallest monic irreducible of
degree m (coefficients compared from the constant term up) and the
primitive element is the generator with the smallest index, so two
builds from the same (p, m) are identical.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import (
    EvenCharacteristicError,
    FieldTooLargeError,
    NonPrimeError,
    NotADivisorError,
    NotInSubfieldError,
    ParameterError,
)

FIELD_SIZE_CAP = 1 << 24

# subfield views build dense size x size op tables; anything bigger is
# a bug in the caller (the code family only ever needs q0 = p^d with
# d <= m/5)
SUBFIELD_TABLE_CAP = 4096


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def prime_factors(n: int) -> list[int]:
    """Distinct prime factors of n, ascending (trial division; n <= 2^24 here)."""
    out = []
    f = 2
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1 if f == 2 else 2
    if n > 1:
        out.append(n)
    return out


# ---------------------------------------------------------------------------
# dense polynomial helpers over F_p (coefficient lists, low degree first)
# ---------------------------------------------------------------------------

def _poly_trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mulmod(a: list[int], b: list[int], mod: list[int], p: int) -> list[int]:
    prod = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] = (prod[i + j] + ai * bj) % p
    return _poly_rem(prod, mod, p)


def _poly_rem(a: list[int], mod: list[int], p: int) -> list[int]:
    a = a[:]
    dm = len(mod) - 1
    inv_lead = pow(mod[-1], p - 2, p)
    for i in range(len(a) - 1, dm - 1, -1):
        c = a[i]
        if c:
            f = (c * inv_lead) % p
            for j in range(dm + 1):
                a[i - dm + j] = (a[i - dm + j] - f * mod[j]) % p
    del a[dm:]
    return _poly_trim(a)


def _poly_powmod(a: list[int], e: int, mod: list[int], p: int) -> list[int]:
    result = [1]
    base = _poly_rem(a[:], mod, p)
    while e:
        if e & 1:
            result = _poly_mulmod(result, base, mod, p)
        base = _poly_mulmod(base, base, mod, p)
        e >>= 1
    return result


def _poly_gcd(a: list[int], b: list[int], p: int) -> list[int]:
    a, b = _poly_trim(a[:]), _poly_trim(b[:])
    while b:
        a, b = b, _poly_rem(a, b, p)
    return a


def _poly_sub(a: list[int], b: list[int], p: int) -> list[int]:
    n = max(len(a), len(b))
    a = a + [0] * (n - len(a))
    b = b + [0] * (n - len(b))
    return _poly_trim([(x - y) % p for x, y in zip(a, b)])


def _is_irreducible(f: list[int], p: int) -> bool:
    """Monic f of degree m >= 1: x^(p^m) == x mod f and no factor of degree m/l."""
    m = len(f) - 1
    if m == 1:
        return True
    x = [0, 1]
    # x^(p^j) mod f, built by iterated p-th powers
    frob = {0: x}
    cur = x
    for j in range(1, m + 1):
        cur = _poly_powmod(cur, p, f, p)
        frob[j] = cur
    if _poly_sub(frob[m], x, p):
        return False
    for ell in prime_factors(m):
        g = _poly_sub(frob[m // ell], x, p)
        if len(_poly_gcd(f, g, p)) > 1:
            return False
    return True


def _smallest_irreducible(p: int, m: int) -> tuple[int, ...]:
    """Lex-smallest monic irreducible of degree m, comparing (c_0, c_1, ...)."""
    if m == 1:
        return (0, 1)
    # c_0 most significant in the comparison; c_0 = 0 is divisible by x
    for c0 in range(1, p):
        for rest in range(p ** (m - 1)):
            coeffs = [c0] + [(rest // p ** (m - 1 - k)) % p for k in range(1, m)]
            f = coeffs + [1]
            if _is_irreducible(f, p):
                return tuple(f)
    raise ParameterError(f"no irreducible polynomial found for p={p}, m={m}")


@dataclass(frozen=True)
class FieldParams:
    p: int
    m: int
    modulus: tuple[int, ...]  # low degree first, length m+1, monic
    q: int


class FieldCtx:
    """Immutable context for F_{p^m}: log/antilog tables, traces, subfields.

    Safe to share between threads/processes after construction; every
    operation is pure.
    """

    def __init__(self, params: FieldParams, pi_index: int,
                 antilog: np.ndarray, log: np.ndarray):
        self.params = params
        self.p = params.p
        self.m = params.m
        self.q = params.q
        self.pi = pi_index
        self.antilog = antilog          # shape (q-1,), antilog[e] = index of pi^e
        self.log = log                  # shape (q,), log[0] = -1 sentinel
        self._p_pows = np.array([self.p ** i for i in range(self.m)], dtype=np.int64)
        dig_dtype = np.int8 if self.p <= 127 else np.int32
        digits = np.empty((self.q, self.m), dtype=dig_dtype)
        idx = np.arange(self.q, dtype=np.int64)
        for i in range(self.m):
            digits[:, i] = idx % self.p
            idx //= self.p
        self.digits = digits
        self._trace_tables: dict[int, np.ndarray] = {}
        self._subfields: dict[int, SubfieldView] = {}
        self._frob_exp = [pow(self.p, j, self.q - 1) for j in range(self.m + 1)]

    # -- scalar arithmetic ---------------------------------------------------

    def coeffs_to_index(self, coeffs) -> int:
        return int(sum(int(c) % self.p * self.p ** i for i, c in enumerate(coeffs)))

    def index_to_coeffs(self, x: int) -> tuple[int, ...]:
        return tuple(int(v) for v in self.digits[x])

    def add(self, a: int, b: int) -> int:
        p = self.p
        out = 0
        pw = 1
        for _ in range(self.m):
            out += ((a + b) % p) * pw
            a //= p
            b //= p
            pw *= p
        return out

    def neg(self, a: int) -> int:
        p = self.p
        out = 0
        pw = 1
        for _ in range(self.m):
            out += (-a % p) * pw
            a //= p
            pw *= p
        return out

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self.antilog[(int(self.log[a]) + int(self.log[b])) % (self.q - 1)])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero in F_q")
        return int(self.antilog[-int(self.log[a]) % (self.q - 1)])

    def pow(self, a: int, e: int) -> int:
        if a == 0:
            if e == 0:
                return 1
            if e < 0:
                raise ZeroDivisionError("negative power of zero in F_q")
            return 0
        return int(self.antilog[(int(self.log[a]) * e) % (self.q - 1)])

    def frobenius(self, a: int, i: int = 1) -> int:
        """a^(p^i); exact for any i >= 0."""
        if a == 0:
            return 0
        e = self._frob_exp[i] if i <= self.m else pow(self.p, i, self.q - 1)
        return int(self.antilog[(int(self.log[a]) * e) % (self.q - 1)])

    # -- traces and characters -------------------------------------------------

    def _frob_matrix(self, i: int) -> np.ndarray:
        """m x m matrix of x -> x^(p^i) on digit vectors (columns = basis images)."""
        cols = []
        for j in range(self.m):
            img = self.frobenius(self.p ** j, i)
            cols.append(self.digits[img])
        return np.stack(cols, axis=1).astype(np.int64)

    def trace_table(self, r: int) -> np.ndarray:
        """Index table of Tr^{p^m}_{p^r} over every element; cached per r."""
        if r not in self._trace_tables:
            if self.m % r != 0:
                raise NotADivisorError(f"r={r} does not divide m={self.m}")
            mat = np.zeros((self.m, self.m), dtype=np.int64)
            for j in range(self.m // r):
                mat = (mat + self._frob_matrix(r * j)) % self.p
            out_digits = (self.digits.astype(np.int64) @ mat.T) % self.p
            self._trace_tables[r] = (out_digits @ self._p_pows).astype(np.int32)
        return self._trace_tables[r]

    def trace(self, x: int, r: int = 1) -> int:
        """Tr^{p^m}_{p^r}(x); result lies in F_{p^r}."""
        t = int(self.trace_table(r)[x])
        assert self.frobenius(t, r) == t
        return t

    def subfield(self, r: int) -> "SubfieldView":
        if r not in self._subfields:
            self._subfields[r] = SubfieldView(self, r)
        return self._subfields[r]

    def in_subfield(self, x: int, r: int) -> bool:
        """Membership via Frobenius fixing: x in F_{p^r} iff x^(p^r) = x."""
        return self.frobenius(x, r) == x

    def quadratic_character(self, x: int, r: int) -> int:
        """eta over F_{p^r}: 0 at 0, +1 on nonzero squares, -1 otherwise."""
        if self.m % r != 0:
            raise NotADivisorError(f"r={r} does not divide m={self.m}")
        if x == 0:
            return 0
        if not self.in_subfield(x, r):
            raise NotInSubfieldError(f"element {x} not in F_{self.p}^{r}")
        cosize = (self.q - 1) // (self.p ** r - 1)
        return 1 if (int(self.log[x]) // cosize) % 2 == 0 else -1

    # -- vectorized arithmetic on index arrays ---------------------------------

    def add_vec(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        d = (self.digits[a].astype(np.int32) + self.digits[b]) % self.p
        return d.astype(np.int64) @ self._p_pows

    def neg_vec(self, a: np.ndarray) -> np.ndarray:
        d = (-self.digits[a].astype(np.int32)) % self.p
        return d.astype(np.int64) @ self._p_pows

    def mul_vec(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        out = np.zeros(np.broadcast(a, b).shape, dtype=np.int64)
        nz = (a != 0) & (b != 0)
        an, bn = np.broadcast_arrays(a, b)
        e = (self.log[an[nz]].astype(np.int64) + self.log[bn[nz]]) % (self.q - 1)
        out[nz] = self.antilog[e]
        return out

    def power_map(self, e: int) -> np.ndarray:
        """Table of x^e for every x (e >= 1)."""
        out = np.zeros(self.q, dtype=np.int64)
        logs = (np.arange(self.q - 1, dtype=np.int64) * (e % (self.q - 1))) % (self.q - 1)
        out[self.antilog] = self.antilog[logs]
        return out

    def __repr__(self):
        return f"FieldCtx(p={self.p}, m={self.m}, q={self.q}, pi={self.pi})"

    __hash__ = object.__hash__


class SubfieldView:
    """Dense tables for a subfield F_{p^r} inside a FieldCtx.

    Subfield elements get small indices 0..p^r-1 by ascending canonical
    index, which puts 0 at 0 and 1 at 1.  Op tables are built from the
    parent field's exact arithmetic.
    """

    def __init__(self, ctx: FieldCtx, r: int):
        if ctx.m % r != 0:
            raise NotADivisorError(f"r={r} does not divide m={ctx.m}")
        self.ctx = ctx
        self.r = r
        self.size = ctx.p ** r
        self.cosize = (ctx.q - 1) // (self.size - 1)
        self.gen = int(ctx.antilog[self.cosize % (ctx.q - 1)])
        members = [0] + [int(ctx.antilog[(j * self.cosize) % (ctx.q - 1)])
                         for j in range(self.size - 1)]
        self.elements = np.array(sorted(members), dtype=np.int64)
        assert len(set(members)) == self.size
        self._to_small = {int(e): i for i, e in enumerate(self.elements)}
        if self.size > SUBFIELD_TABLE_CAP:
            raise FieldTooLargeError(
                f"subfield of size {self.size} exceeds table cap")
        n = self.size
        self.add_t = np.empty((n, n), dtype=np.int32)
        self.mul_t = np.empty((n, n), dtype=np.int32)
        self.neg_t = np.empty(n, dtype=np.int32)
        self.inv_t = np.zeros(n, dtype=np.int32)
        for i, x in enumerate(self.elements):
            xi = int(x)
            self.neg_t[i] = self._to_small[ctx.neg(xi)]
            if xi:
                self.inv_t[i] = self._to_small[ctx.inv(xi)]
            for j, y in enumerate(self.elements):
                self.add_t[i, j] = self._to_small[ctx.add(xi, int(y))]
                self.mul_t[i, j] = self._to_small[ctx.mul(xi, int(y))]
        self.eta = np.zeros(n, dtype=np.int8)
        for i, x in enumerate(self.elements):
            if x:
                self.eta[i] = 1 if (int(ctx.log[x]) // self.cosize) % 2 == 0 else -1
        # Tr^{p^r}_p as a plain int in [0, p)
        self.trace_to_prime = np.empty(n, dtype=np.int8)
        for i, x in enumerate(self.elements):
            acc = 0
            for j in range(r):
                acc = ctx.add(acc, ctx.frobenius(int(x), j))
            assert acc < ctx.p
            self.trace_to_prime[i] = acc
        self.one = self._to_small[1]

    def small(self, x: int) -> int:
        """Small index of a big-field element known to lie in the subfield."""
        try:
            return self._to_small[x]
        except KeyError:
            raise NotInSubfieldError(
                f"element {x} not in F_{self.ctx.p}^{self.r}") from None

    def big(self, i: int) -> int:
        return int(self.elements[i])

    def small_vec(self, xs: np.ndarray) -> np.ndarray:
        pos = np.searchsorted(self.elements, xs)
        if not np.array_equal(self.elements[pos], np.asarray(xs)):
            raise NotInSubfieldError("array contains elements outside subfield")
        return pos


def build_field(p: int, m: int) -> FieldCtx:
    """Deterministic F_{p^m} context; rejects p=2, non-primes, q > 2^24."""
    if not isinstance(p, int) or not isinstance(m, int):
        raise ParameterError("p and m must be ints")
    if p == 2:
        raise EvenCharacteristicError("characteristic 2 not supported")
    if not is_prime(p):
        raise NonPrimeError(f"p={p} is not prime")
    if m < 1:
        raise ParameterError(f"m={m} must be >= 1")
    q = p ** m
    if q > FIELD_SIZE_CAP:
        raise FieldTooLargeError(f"q=p^m={q} exceeds cap 2^24")

    modulus = _smallest_irreducible(p, m)
    params = FieldParams(p=p, m=m, modulus=modulus, q=q)
    mod_list = list(modulus)

    def idx_to_poly(x: int) -> list[int]:
        out = []
        for _ in range(m):
            out.append(x % p)
            x //= p
        return _poly_trim(out)

    def poly_to_idx(f: list[int]) -> int:
        return sum(c * p ** i for i, c in enumerate(f))

    # smallest-index generator of the multiplicative group
    factors = prime_factors(q - 1)
    pi_index = None
    for cand in range(1, q):
        f = idx_to_poly(cand)
        if all(poly_to_idx(_poly_powmod(f, (q - 1) // ell, mod_list, p)) != 1
               for ell in factors):
            pi_index = cand
            break
    assert pi_index is not None

    # antilog walk: pi^e for e = 0..q-2, in blocks of matrix-vector products
    mul_pi = np.zeros((m, m), dtype=np.int64)
    pi_poly = idx_to_poly(pi_index)
    for j in range(m):
        col = _poly_mulmod([0] * j + [1], pi_poly, mod_list, p)
        for i, c in enumerate(col):
            mul_pi[i, j] = c
    vecs = np.zeros((m, q - 1), dtype=np.int64)
    vecs[0, 0] = 1
    block = 1024
    head = min(block, q - 1)
    for e in range(1, head):
        vecs[:, e] = (mul_pi @ vecs[:, e - 1]) % p
    if q - 1 > block:
        step = np.eye(m, dtype=np.int64)
        base, k = mul_pi, block
        while k:  # modular matrix power, reducing every product
            if k & 1:
                step = (step @ base) % p
            base = (base @ base) % p
            k >>= 1
        e = block
        while e < q - 1:
            w = min(block, q - 1 - e)
            vecs[:, e:e + w] = (step @ vecs[:, e - block:e - block + w]) % p
            e += w
    p_pows = np.array([p ** i for i in range(m)], dtype=np.int64)
    antilog = (p_pows @ vecs).astype(np.int32)

    log = np.full(q, -1, dtype=np.int32)
    log[antilog] = np.arange(q - 1, dtype=np.int32)
    if np.any(log[1:] < 0):
        raise ParameterError("primitive element walk did not cover F_q^*")

    return FieldCtx(params, pi_index, antilog.astype(np.int64), log.astype(np.int64))


@lru_cache(maxsize=None)
def cached_field(p: int, m: int) -> FieldCtx:
    """Process-wide cache; safe because contexts are immutable."""
    return build_field(p, m)
