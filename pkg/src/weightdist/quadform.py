"""Classification of the quadratic forms behind the exponential sums.

Q_{a,b,c}(x) = Tr^{q}_{q0}(a x^2 + b x^{p^k+1} + c x^{p^2k+1}) is a
quadratic form on F_q viewed as an s-dimensional F_{q0}-space.  Its
Gram matrix is built by polarization over the basis pi^0..pi^{s-1},
then reduced by symmetric congruence to read off the rank r and the
square class of the discriminant.  Those two invariants determine the
exact value of the paired character sum:

    r = 0:    2 q
    r odd:    0
    r even:   sign * 2 * q0^(s - r/2)

with sign = eta0(disc) * (-1)^((d-1) r), times (-1)^(d r / 2) when
p = 3 (mod 4).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .code import CodeParams
from .errors import RankBoundViolationError
from .field import FieldCtx, SubfieldView


@dataclass(frozen=True)
class FormClass:
    rank: int
    disc_class: int   # eta0 of the diagonal product: -1, 0 (rank 0) or +1
    t_value: int


class GramMatrix:
    """Symmetric s x s matrix over F_{q0}; entries are subfield small indices."""

    def __init__(self, entries: np.ndarray, view: SubfieldView, basis: tuple[int, ...]):
        self.entries = entries
        self.view = view
        self.basis = basis

    @property
    def s(self) -> int:
        return self.entries.shape[0]


@lru_cache(maxsize=16)
def _form_tables(ctx: FieldCtx, d1: int, d2: int):
    return ctx.power_map(2), ctx.power_map(d1), ctx.power_map(d2)


def q_value(params: CodeParams, ctx: FieldCtx, a: int, b: int, c: int, x: int) -> int:
    """Q_{a,b,c}(x) as a big-field index (lands in F_{q0})."""
    p2, pd1, pd2 = _form_tables(ctx, params.d1, params.d2)
    acc = ctx.add(ctx.mul(a, int(p2[x])), ctx.mul(b, int(pd1[x])))
    acc = ctx.add(acc, ctx.mul(c, int(pd2[x])))
    return int(ctx.trace_table(params.d)[acc])


def gram_matrix(params: CodeParams, ctx: FieldCtx, a: int, b: int, c: int,
                basis: tuple[int, ...] | None = None) -> GramMatrix:
    """Polarization: A_ii = Q(v_i), A_ij = (Q(v_i+v_j) - Q(v_i) - Q(v_j)) / 2."""
    s = params.s
    view = ctx.subfield(params.d)
    if basis is None:
        basis = tuple(ctx.pow(ctx.pi, j) for j in range(s))
    qv = [view.small(q_value(params, ctx, a, b, c, v)) for v in basis]
    inv2 = int(view.inv_t[view.small(2)])
    A = np.zeros((s, s), dtype=np.int32)
    add_t, mul_t, neg_t = view.add_t, view.mul_t, view.neg_t
    for i in range(s):
        A[i, i] = qv[i]
        for j in range(i + 1, s):
            qij = view.small(q_value(params, ctx, a, b, c, ctx.add(basis[i], basis[j])))
            num = add_t[add_t[qij, neg_t[qv[i]]], neg_t[qv[j]]]
            A[i, j] = A[j, i] = mul_t[num, inv2]
    return GramMatrix(A, view, basis)


def rank_and_discriminant(gram: GramMatrix) -> tuple[int, int]:
    """Symmetric congruence reduction; returns (rank, eta0(diagonal product))."""
    view = gram.view
    add_t, mul_t, neg_t, inv_t = view.add_t, view.mul_t, view.neg_t, view.inv_t
    w = gram.entries.copy()
    s = gram.s
    r = 0
    disc = view.one
    for i in range(s):
        piv = next((j for j in range(i, s) if w[j, j] != 0), None)
        if piv is None:
            off = next(((j, l) for j in range(i, s) for l in range(j + 1, s)
                        if w[j, l] != 0), None)
            if off is None:
                break
            j, l = off
            # add row l to row j and column l to column j: the new (j,j)
            # entry is 2 w[j,l] != 0 since the diagonal was all zero
            for u in range(i, s):
                w[j, u] = add_t[w[j, u], w[l, u]]
            for u in range(i, s):
                w[u, j] = add_t[w[u, j], w[u, l]]
            piv = j
        if piv != i:
            w[[i, piv], i:] = w[[piv, i], i:]
            w[i:, [i, piv]] = w[i:, [piv, i]]
        v = w[i, i]
        r += 1
        disc = mul_t[disc, v]
        inv_v = inv_t[v]
        col = w[i + 1:, i]
        if col.size:
            # Schur complement of the pivot, preserving congruence class
            f = mul_t[mul_t[col[:, None], w[i, i + 1:][None, :]], inv_v]
            w[i + 1:, i + 1:] = add_t[w[i + 1:, i + 1:], neg_t[f]]
    return r, (0 if r == 0 else int(view.eta[disc]))


def t_closed_form(params: CodeParams, r: int, disc_class: int) -> int:
    """Exact value of the paired character sum from (rank, disc class)."""
    if r == 0:
        return 2 * params.q
    if r % 2 == 1:
        return 0
    sign = disc_class * (-1) ** ((params.d - 1) * r)
    if params.p % 4 == 3:
        sign *= (-1) ** (params.d * r // 2)
    return sign * 2 * params.q0 ** (params.s - r // 2)


def classify(params: CodeParams, ctx: FieldCtx, a: int, b: int, c: int) -> FormClass:
    gram = gram_matrix(params, ctx, a, b, c)
    r, disc = rank_and_discriminant(gram)
    if (a, b, c) != (0, 0, 0) and r < params.s - 4:
        raise RankBoundViolationError(
            f"rank {r} < s-4 = {params.s - 4} at triple {(a, b, c)}")
    return FormClass(rank=r, disc_class=disc, t_value=t_closed_form(params, r, disc))


class BatchClassifier:
    """Vectorized classification of many triples at once.

    The Gram matrix is F_p-linear in the 3m digit coordinates of
    (a, b, c), so a block of triples becomes one matrix product against
    precomputed unit-triple Gram tensors, followed by a congruence
    reduction that runs all matrices in lockstep (data-dependent pivot
    choices are handled with index arrays).  Entries are subfield small
    indices and all arithmetic goes through the subfield's exact op
    tables; results agree entry-for-entry with `classify`.
    """

    def __init__(self, params: CodeParams, ctx: FieldCtx):
        self.params = params
        self.ctx = ctx
        self.view = view = ctx.subfield(params.d)
        p, m, d, s = params.p, params.m, params.d, params.s
        # additive coordinates of subfield elements over the basis mu^0..mu^(d-1)
        coord_pack = np.full(p ** d, -1, dtype=np.int64)
        coords_of_small = np.zeros((view.size, d), dtype=np.int8)
        mu_pows = [ctx.pow(view.gen, j) for j in range(d)]
        for packed in range(p ** d):
            digs = [(packed // p ** i) % p for i in range(d)]
            big = 0
            for c_i, mu in zip(digs, mu_pows):
                big = ctx.add(big, ctx.mul(c_i, mu))
            small = view.small(big)
            coord_pack[packed] = small
            coords_of_small[small] = digs
        self._small_by_pack = coord_pack
        # Gram tensors of the 3m unit triples, entries as additive coordinates
        unit_grams = np.zeros((3 * m, s, s, d), dtype=np.int8)
        for axis in range(3):
            for k in range(m):
                triple = [0, 0, 0]
                triple[axis] = p ** k
                g = gram_matrix(params, ctx, *triple)
                unit_grams[axis * m + k] = coords_of_small[g.entries]
        self._unit_grams = unit_grams.reshape(3 * m, s * s * d).astype(np.float64)
        self._d_pows = np.array([p ** i for i in range(d)], dtype=np.int64)

    def gram_block(self, a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
        """(n, s, s) small-index Gram matrices for index arrays a, b, c."""
        p, m, d, s = self.params.p, self.params.m, self.params.d, self.params.s
        dig = self.ctx.digits
        coords = np.concatenate([dig[a], dig[b], dig[c]], axis=1).astype(np.float64)
        flat = coords @ self._unit_grams       # exact: sums < 3m p^2 << 2^53
        cd = (flat.astype(np.int64) % p).reshape(-1, s, s, d)
        packed = cd @ self._d_pows
        return self._small_by_pack[packed].astype(np.int16)

    def reduce_block(self, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Congruence-reduce a block of symmetric matrices in place.

        Returns (rank, disc_class) arrays.  Same pivot policy as
        rank_and_discriminant: first nonzero diagonal entry, else an
        off-diagonal row+column addition to create one.
        """
        view = self.view
        add_t, mul_t = view.add_t, view.mul_t
        neg_t, inv_t = view.neg_t, view.inv_t
        n, s, _ = w.shape
        rank = np.zeros(n, dtype=np.int64)
        disc = np.full(n, view.one, dtype=np.int64)
        rows = np.arange(n)
        for i in range(s):
            sub = np.arange(i, s)
            diag = w[:, sub, sub]
            has_diag = (diag != 0).any(axis=1)
            j1 = i + np.argmax(diag != 0, axis=1)
            need_fix = ~has_diag
            if need_fix.any():
                iu, ju = np.triu_indices(s - i, k=1)
                if iu.size:
                    cand = np.where(need_fix)[0]
                    vals = w[cand[:, None], (iu + i)[None, :], (ju + i)[None, :]]
                    nz = vals != 0
                    fixable = nz.any(axis=1)
                    if fixable.any():
                        cf = cand[fixable]
                        first = np.argmax(nz[fixable], axis=1)
                        jj = iu[first] + i
                        ll = ju[first] + i
                        w[cf, jj, :] = add_t[w[cf, jj, :], w[cf, ll, :]]
                        w[cf, :, jj] = add_t[w[cf, :, jj], w[cf, :, ll]]
                        j1[cf] = jj
                        has_diag[cf] = True
            swap = has_diag & (j1 != i)
            if swap.any():
                sw = np.where(swap)[0]
                jj = j1[sw]
                tmp = w[sw, i, :].copy()
                w[sw, i, :] = w[sw, jj, :]
                w[sw, jj, :] = tmp
                tmp = w[sw, :, i].copy()
                w[sw, :, i] = w[sw, :, jj]
                w[sw, :, jj] = tmp
            act = np.where(has_diag)[0]
            if act.size == 0:
                break
            v = w[act, i, i]
            rank[act] += 1
            disc[act] = mul_t[disc[act], v]
            if i + 1 < s:
                col = w[act, i + 1:, i]
                f = mul_t[mul_t[col[:, :, None], col[:, None, :]], inv_t[v][:, None, None]]
                w[act, i + 1:, i + 1:] = add_t[w[act, i + 1:, i + 1:], neg_t[f]]
        disc_class = np.where(rank == 0, 0, view.eta[disc]).astype(np.int8)
        return rank, disc_class

    def t_values(self, rank: np.ndarray, disc_class: np.ndarray) -> np.ndarray:
        """Vectorized closed-form T from (rank, disc class); exact int64."""
        params = self.params
        t = np.zeros(rank.shape, dtype=np.int64)
        t[rank == 0] = 2 * params.q
        even = (rank % 2 == 0) & (rank > 0)
        r_e = rank[even]
        sign = disc_class[even].astype(np.int64)
        sign = sign * np.where(((params.d - 1) * r_e) % 2 == 0, 1, -1)
        if params.p % 4 == 3:
            sign = sign * np.where((params.d * r_e // 2) % 2 == 0, 1, -1)
        mag = 2 * params.q0 ** (params.s - r_e // 2).astype(np.int64)
        t[even] = sign * mag
        return t

    def classify_block(self, a: np.ndarray, b: np.ndarray, c: np.ndarray,
                       check_rank_bound: bool = True):
        """(rank, disc_class, t_value) arrays for a block of triples."""
        w = self.gram_block(a, b, c)
        rank, disc_class = self.reduce_block(w)
        if check_rank_bound:
            nonzero = (np.asarray(a) != 0) | (np.asarray(b) != 0) | (np.asarray(c) != 0)
            if np.any(nonzero & (rank < self.params.s - 4)):
                raise RankBoundViolationError("rank below s-4 on a nonzero triple")
        return rank, disc_class, self.t_values(rank, disc_class)
