"""Shift-twisted free algebra, L-operator ansatz, and RLL defect spans.

The abstract generators carry two coordinate blocks: moving a coefficient
function leftward past a generator shifts the function's arguments by hbar
on the coordinates named by the generator's indices.  Coefficients
therefore stay symbolic (products of theta factors at affine arguments and
entries of the composite R-matrix on shifted coordinates) until a whole
expression is frozen at one numeric parameter point.  Frozen defects of
the exchange relation for the L-ansatz become coefficient vectors over
ordered two-letter words, compared span-wise against the closed-form
relation families of :mod:`ellrmx.relations`.
"""

from __future__ import annotations

import cmath
import functools
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .elliptic import (
    DELTA_MIN,
    EllipticContext,
    LatticeIndex,
    PoleProximityError,
    all_indices,
    lattice_distance,
    omega,
    theta,
)
from .relations import (
    DegenerateRelationError,
    RelationVector,
    slnm_family_coeffs,
    word_slot,
)
from .rmatrix import DynamicalParams, r_slnm
from .tensor import basis_t

TWO_PI_I = 2j * cmath.pi


@dataclass(frozen=True)
class LConvention:
    """Ansatz convention: whether each L-term carries the exponential
    ``exp(2 pi i a2 z / n)`` alongside its theta coefficient."""

    exp_factor: bool = True


@dataclass(frozen=True)
class Generator:
    """Abstract generator labelled (i, j, alpha).

    Its shift signature adds hbar to coordinate i of the first block and
    coordinate j of the second; ansatz entry (i, j) therefore houses the
    generators labelled (j, i).
    """

    i: int
    j: int
    alpha: LatticeIndex

    @property
    def label(self) -> tuple[int, int, tuple[int, int]]:
        return (self.i, self.j, self.alpha.pair)


def word_shift(
    word: tuple[Generator, ...], m: int
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Total hbar-shift a coefficient picks up crossing ``word`` leftward."""
    s1 = [0] * m
    s2 = [0] * m
    for g in word:
        s1[g.i - 1] += 1
        s2[g.j - 1] += 1
    return tuple(s1), tuple(s2)


@dataclass(frozen=True)
class ThetaAtom:
    """theta evaluated at ``const + u1 . q1 + u2 . q2``."""

    const: complex
    u1: tuple[int, ...]
    u2: tuple[int, ...]


@dataclass(frozen=True)
class RMatrixAtom:
    """One entry of the composite R-matrix fed by one coordinate block."""

    row: int
    col: int
    z: complex
    block: int


@dataclass(frozen=True)
class ShiftedAtom:
    """An atom with the accumulated hbar-shift of every coordinate."""

    atom: ThetaAtom | RMatrixAtom
    s1: tuple[int, ...]
    s2: tuple[int, ...]

    def shifted(self, d1: tuple[int, ...], d2: tuple[int, ...]) -> "ShiftedAtom":
        return ShiftedAtom(
            self.atom,
            tuple(a + b for a, b in zip(self.s1, d1)),
            tuple(a + b for a, b in zip(self.s2, d2)),
        )


@dataclass(frozen=True)
class Deferred:
    """Product of shifted atoms with a numeric prefactor."""

    const: complex
    atoms: tuple[ShiftedAtom, ...] = ()

    def times(self, other: "Deferred") -> "Deferred":
        return Deferred(self.const * other.const, self.atoms + other.atoms)

    def shifted(self, d1: tuple[int, ...], d2: tuple[int, ...]) -> "Deferred":
        return Deferred(self.const, tuple(a.shifted(d1, d2) for a in self.atoms))


@dataclass(frozen=True)
class Coefficient:
    """Sum of deferred products; the coefficient record of one word."""

    parts: tuple[Deferred, ...]

    @classmethod
    def of(cls, value: complex) -> "Coefficient":
        return cls((Deferred(complex(value)),))

    @classmethod
    def of_atom(
        cls, atom: ThetaAtom | RMatrixAtom, m: int, const: complex = 1.0
    ) -> "Coefficient":
        zeros = (0,) * m
        return cls((Deferred(complex(const), (ShiftedAtom(atom, zeros, zeros),)),))

    def plus(self, other: "Coefficient") -> "Coefficient":
        return Coefficient(self.parts + other.parts)

    def times(self, other: "Coefficient") -> "Coefficient":
        return Coefficient(
            tuple(p.times(q) for p in self.parts for q in other.parts)
        )

    def shifted(self, d1: tuple[int, ...], d2: tuple[int, ...]) -> "Coefficient":
        return Coefficient(tuple(p.shifted(d1, d2) for p in self.parts))

    def scaled(self, value: complex) -> "Coefficient":
        return Coefficient(
            tuple(Deferred(p.const * value, p.atoms) for p in self.parts)
        )


def _atom_value(
    sa: ShiftedAtom,
    params: DynamicalParams,
    n: int,
    ctx: EllipticContext,
    cache: dict,
) -> complex:
    hit = cache.get(sa)
    if hit is not None:
        return hit
    q1, q2, hbar = params.q1, params.q2, params.hbar
    a = sa.atom
    if isinstance(a, ThetaAtom):
        arg = a.const
        for k, w in enumerate(a.u1):
            if w:
                arg += w * (q1[k] + hbar * sa.s1[k])
        for k, w in enumerate(a.u2):
            if w:
                arg += w * (q2[k] + hbar * sa.s2[k])
        value = theta(arg, ctx)
    elif isinstance(a, RMatrixAtom):
        shift = sa.s1 if a.block == 1 else sa.s2
        key = ("rmat", a.block, a.z, shift)
        mat = cache.get(key)
        if mat is None:
            base = q1 if a.block == 1 else q2
            coords = [base[k] + hbar * shift[k] for k in range(len(base))]
            mat = r_slnm(hbar, a.z, coords, n, ctx)
            cache[key] = mat
        value = mat[a.row, a.col]
    else:
        raise TypeError(f"unknown atom type {type(a).__name__}")
    cache[sa] = value
    return value


def _coefficient_value(
    coeff: Coefficient,
    params: DynamicalParams,
    n: int,
    ctx: EllipticContext,
    cache: dict,
) -> tuple[complex, float]:
    """Value of a coefficient plus its mass (sum of part moduli).

    The mass bounds the roundoff floor: a value far below mass times
    machine epsilon times the part count is an identical cancellation.
    """
    total = 0.0 + 0.0j
    mass = 0.0
    for part in coeff.parts:
        value = part.const
        for sa in part.atoms:
            value *= _atom_value(sa, params, n, ctx, cache)
        total += value
        mass += abs(value)
    return total, mass


@dataclass(frozen=True)
class NCSum:
    """Normal-ordered sum of coefficient-times-word terms, words of length <= 2.

    The product re-normalizes: ``(c1 w1)(c2 w2)`` becomes ``c1 (c2 shifted
    by the signature of w1)`` on the concatenated word.  Quadratic checks
    never need longer words, so concatenations past length two raise.
    """

    m: int
    n: int
    terms: Mapping[tuple[Generator, ...], Coefficient]

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", dict(self.terms))

    @classmethod
    def zero(cls, m: int, n: int) -> "NCSum":
        return cls(m, n, {})

    @classmethod
    def scalar(cls, m: int, n: int, coeff: Coefficient | complex) -> "NCSum":
        if not isinstance(coeff, Coefficient):
            coeff = Coefficient.of(coeff)
        return cls(m, n, {(): coeff})

    @classmethod
    def generator(
        cls, m: int, n: int, gen: Generator, coeff: Coefficient | complex = 1.0
    ) -> "NCSum":
        if not isinstance(coeff, Coefficient):
            coeff = Coefficient.of(coeff)
        return cls(m, n, {(gen,): coeff})

    def _check(self, other: "NCSum") -> None:
        if self.m != other.m or self.n != other.n:
            raise ValueError("mixed algebra sizes")

    def __add__(self, other: "NCSum") -> "NCSum":
        self._check(other)
        terms = dict(self.terms)
        for word, coeff in other.terms.items():
            prev = terms.get(word)
            terms[word] = coeff if prev is None else prev.plus(coeff)
        return NCSum(self.m, self.n, terms)

    def __sub__(self, other: "NCSum") -> "NCSum":
        return self + other.scaled(-1.0)

    def __mul__(self, other: "NCSum") -> "NCSum":
        self._check(other)
        out: dict[tuple[Generator, ...], Coefficient] = {}
        for w1, c1 in self.terms.items():
            s1, s2 = word_shift(w1, self.m)
            for w2, c2 in other.terms.items():
                word = w1 + w2
                if len(word) > 2:
                    raise ValueError(
                        "words longer than two cannot arise in quadratic checks"
                    )
                coeff = c1.times(c2.shifted(s1, s2))
                prev = out.get(word)
                out[word] = coeff if prev is None else prev.plus(coeff)
        return NCSum(self.m, self.n, out)

    def scaled(self, value: complex) -> "NCSum":
        return NCSum(
            self.m, self.n, {w: c.scaled(value) for w, c in self.terms.items()}
        )

    def freeze(
        self, params: DynamicalParams, ctx: EllipticContext, cache: dict | None = None
    ) -> dict[tuple[Generator, ...], complex]:
        """Evaluate every coefficient at the numeric parameter point."""
        if cache is None:
            cache = {}
        return {
            w: _coefficient_value(c, params, self.n, ctx, cache)[0]
            for w, c in self.terms.items()
        }


def l_entry(
    i: int,
    j: int,
    z: complex,
    q: DynamicalParams,
    n: int,
    conv: LConvention,
    ctx: EllipticContext,
) -> np.ndarray:
    """Ansatz entry (i, j): an n x n matrix of single-generator sums.

    Each characteristic contributes ``theta(z + q2_i - q1_j + omega_alpha)``
    times the operator basis element at alpha times the generator (j, i,
    alpha); with ``conv.exp_factor`` the term also carries
    ``exp(2 pi i alpha_2 z / n)``.
    """
    if q.q2 is None:
        raise ValueError("the ansatz needs two coordinate blocks")
    m = q.m
    if not (1 <= i <= m and 1 <= j <= m):
        raise ValueError(f"entry ({i}, {j}) out of range for m = {m}")
    out = np.empty((n, n), dtype=object)
    for r in range(n):
        for s in range(n):
            out[r, s] = NCSum.zero(m, n)
    u1 = [0] * m
    u1[j - 1] = -1
    u2 = [0] * m
    u2[i - 1] = 1
    u1t, u2t = tuple(u1), tuple(u2)
    for alpha in all_indices(n):
        t_mat = basis_t(alpha)
        atom = ThetaAtom(z + omega(alpha, ctx), u1t, u2t)
        pref = cmath.exp(TWO_PI_I * alpha.a2 * z / n) if conv.exp_factor else 1.0
        gen = Generator(j, i, alpha)
        for r in range(n):
            for s in range(n):
                entry = t_mat[r, s]
                if entry == 0:
                    continue
                coeff = Coefficient.of_atom(atom, m, pref * entry)
                out[r, s] = out[r, s] + NCSum.generator(m, n, gen, coeff)
    return out


def l_operator(
    z: complex,
    q: DynamicalParams,
    n: int,
    conv: LConvention,
    ctx: EllipticContext,
) -> np.ndarray:
    """Full composite-space ansatz: (m n) x (m n) matrix of sums."""
    m = q.m
    d = m * n
    out = np.empty((d, d), dtype=object)
    for i in range(1, m + 1):
        for j in range(1, m + 1):
            blk = l_entry(i, j, z, q, n, conv, ctx)
            out[(i - 1) * n : i * n, (j - 1) * n : j * n] = blk
    return out


@functools.lru_cache(maxsize=8)
def _defect_table(
    n: int,
    m: int,
    params: DynamicalParams,
    z1: complex,
    z2: complex,
    conv: LConvention,
    ctx: EllipticContext,
) -> tuple[dict[tuple[int, int, int, int], np.ndarray], dict[tuple[int, int, int, int], float]]:
    """Frozen coefficient vectors of every matrix element of the exchange
    defect: R(z1-z2 | q2) L1 L2 minus L2 L1 R(z1-z2 | q1).

    Keys are composite indices (a_out, b_out, a_in, b_in); values are
    coefficient vectors over ordered two-letter words.  The companion dict
    holds the mass (norm of summed part moduli) of each element, the scale
    against which a defect counts as an identical cancellation.  Results
    are memoized; callers must treat them as read-only.
    """
    if params.q2 is None:
        raise ValueError("the exchange relation needs two coordinate blocks")
    if params.m != m:
        raise ValueError("coordinate vectors do not match m")
    d = m * n
    g = m * m * n * n
    z12 = z1 - z2
    la = l_operator(z1, params, n, conv, ctx)
    lb = l_operator(z2, params, n, conv, ctx)
    r_left = r_slnm(params.hbar, z12, params.q2, n, ctx)
    prod_ab = np.empty((d, d, d, d), dtype=object)
    prod_ba = np.empty((d, d, d, d), dtype=object)
    for x in range(d):
        for y in range(d):
            for v in range(d):
                for w in range(d):
                    prod_ab[x, y, v, w] = la[x, y] * lb[v, w]
                    prod_ba[x, y, v, w] = lb[x, y] * la[v, w]
    cache: dict = {}
    table: dict[tuple[int, int, int, int], np.ndarray] = {}
    masses: dict[tuple[int, int, int, int], float] = {}
    for ao in range(d):
        for bo in range(d):
            for ai in range(d):
                for bi in range(d):
                    lhs = NCSum.zero(m, n)
                    for am in range(d):
                        for bm in range(d):
                            c = r_left[ao * d + bo, am * d + bm]
                            if c != 0:
                                lhs = lhs + prod_ab[am, ai, bm, bi].scaled(c)
                    rhs = NCSum.zero(m, n)
                    for am in range(d):
                        for bm in range(d):
                            atom = RMatrixAtom(am * d + bm, ai * d + bi, z12, 1)
                            rhs = rhs + (
                                prod_ba[bo, bm, ao, am]
                                * NCSum.scalar(m, n, Coefficient.of_atom(atom, m))
                            )
                    coords = np.zeros(g * g, dtype=complex)
                    mass_sq = 0.0
                    for word, coeff in (lhs - rhs).terms.items():
                        value, mass = _coefficient_value(coeff, params, n, ctx, cache)
                        slot = word_slot((word[0].label, word[1].label), m, n)
                        coords[slot] += value
                        mass_sq += mass * mass
                    table[(ao, bo, ai, bi)] = coords
                    masses[(ao, bo, ai, bi)] = mass_sq**0.5
    return table, masses


def rll_defect(
    n: int,
    m: int,
    params: DynamicalParams,
    z1: complex,
    z2: complex,
    conv: LConvention,
    ctx: EllipticContext,
) -> list[RelationVector]:
    """Defect vectors of the exchange relation for the L-ansatz.

    One vector per matrix element of LHS minus RHS, frozen at the numeric
    point.  Elements whose norm falls below 1e-12 of the largest term mass
    in the whole table are identical cancellations and are dropped; an
    exact identity (the 1 x 1 case) gives an empty list.
    """
    table, masses = _defect_table(n, m, params, z1, z2, conv, ctx)
    floor = 1e-12 * max(masses.values(), default=0.0)
    out = []
    for key, coords in table.items():
        if float(np.linalg.norm(coords)) > floor:
            out.append(RelationVector(f"defect-{key}", m, n, coords))
    return out


def relation_vectors_reference(
    n: int, m: int, params: DynamicalParams, ctx: EllipticContext
) -> list[RelationVector]:
    """Reference vectors of the four closed-form relation families.

    Family 1 runs over every coordinate pair and characteristic pair (only
    for n >= 2; there are no vertex-type relations at n == 1); families 2-4
    over their admissible index tuples.  Identically cancelling label
    combinations are dropped, as are roundoff-sized vectors (norm below
    1e-9 of the largest).
    """
    if params.q2 is None:
        raise ValueError("the families need two coordinate blocks")
    if params.m != m:
        raise ValueError("coordinate vectors do not match m")
    chars = all_indices(n)
    raw: list[RelationVector] = []

    def emit(family: int, idx: tuple[int, ...]) -> None:
        for alpha in chars:
            for beta in chars:
                try:
                    raw.append(
                        slnm_family_coeffs(family, idx, alpha, beta, params, ctx)
                    )
                except DegenerateRelationError:
                    continue

    if n > 1:
        for j in range(1, m + 1):
            for i in range(1, m + 1):
                emit(1, (j, i))
    for i in range(1, m + 1):
        for j in range(1, m + 1):
            for k in range(1, m + 1):
                if j != k:
                    emit(2, (i, j, k))
                    emit(3, (i, j, k))
    for i in range(1, m + 1):
        for k in range(1, m + 1):
            if k == i:
                continue
            for j in range(1, m + 1):
                for l in range(1, m + 1):
                    if l != j:
                        emit(4, (i, j, k, l))
    if not raw:
        return []
    norms = [float(np.linalg.norm(v.coords)) for v in raw]
    floor = 1e-9 * max(norms)
    return [v for v, nv in zip(raw, norms) if nv > floor]


def _stack(vectors: Sequence[RelationVector]) -> np.ndarray:
    """Stack vectors as rows, each normalized to unit length.

    Relations are projectively meaningful, so normalizing keeps the rank
    threshold honest when vector norms spread over orders of magnitude.
    """
    if not vectors:
        raise ValueError("empty relation sets cannot be compared")
    dims = {v.coords.size for v in vectors}
    if len(dims) != 1:
        raise ValueError(f"mixed vector dimensions {sorted(dims)}")
    mat = np.array([v.coords for v in vectors])
    return mat / np.linalg.norm(mat, axis=1, keepdims=True)


def _orthonormal_rows(mat: np.ndarray, rel_tol: float = 1e-8) -> np.ndarray:
    """Orthonormal basis (as columns) of the row space of ``mat``."""
    _, sv, vh = np.linalg.svd(mat, full_matrices=False)
    if sv.size == 0 or sv[0] == 0.0:
        return np.zeros((mat.shape[1], 0), dtype=complex)
    rank = int(np.sum(sv > rel_tol * sv[0]))
    return vh[:rank].T


def span_rank(vectors: Sequence[RelationVector], rel_tol: float = 1e-8) -> int:
    """Rank of the stacked vectors, singular values cut at ``rel_tol`` of
    the largest."""
    sv = np.linalg.svd(_stack(vectors), compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.sum(sv > rel_tol * sv[0]))


def span_equal(
    a: Sequence[RelationVector], b: Sequence[RelationVector], tol: float
) -> tuple[bool, float]:
    """Mutual-inclusion span test.

    Projects every vector of each set onto the span of the other; the
    metric is the worst relative least-squares residual, and the verdict is
    ``metric < tol``.
    """
    ma, mb = _stack(a), _stack(b)
    if ma.shape[1] != mb.shape[1]:
        raise ValueError("vector dimensions differ between the two sets")
    worst = 0.0
    for rows, basis in ((ma, _orthonormal_rows(mb)), (mb, _orthonormal_rows(ma))):
        v = rows.T
        res = v - basis @ (basis.conj().T @ v)
        num = np.linalg.norm(res, axis=0)
        den = np.linalg.norm(v, axis=0)
        worst = max(worst, float(np.max(num / den)))
    return worst < tol, worst


def span_gap(a: Sequence[RelationVector], b: Sequence[RelationVector]) -> float:
    """Largest principal-angle sine between the two spans (symmetric).

    Equals 0 for identical spans and reaches 1 when one span contains a
    direction orthogonal to the other, so rank mismatches surface as gaps
    of order one.
    """
    qa = _orthonormal_rows(_stack(a))
    qb = _orthonormal_rows(_stack(b))
    if qa.shape[1] == 0 or qb.shape[1] == 0:
        return 0.0 if qa.shape[1] == qb.shape[1] else 1.0
    ga = np.linalg.norm(qa - qb @ (qb.conj().T @ qa), 2)
    gb = np.linalg.norm(qb - qa @ (qa.conj().T @ qb), 2)
    return float(max(ga, gb))


def component_ratio(
    i: int,
    j: int,
    k: int,
    alpha: LatticeIndex,
    beta: LatticeIndex,
    params: DynamicalParams,
    z1: complex,
    z2: complex,
    conv: LConvention,
    ctx: EllipticContext,
) -> np.ndarray:
    """Defect component with first-block steps i->j (one auxiliary space)
    and i->k (the other), projected onto the operator-basis pair (alpha,
    beta) and divided by its theta prefactors.

    The divisor is the product of the two letters' coefficient functions:
    ``theta(z2 + q2_i - q1_k + omega_beta) * theta(z1 + q2_i - q1_j + hbar
    + omega_alpha)`` together with their exponential factors when the
    convention carries them.  If the extraction is consistent the result
    does not depend on (z1, z2).
    """
    m = params.m
    n = alpha.n
    if j == k:
        raise ValueError("needs distinct first-block indices j != k")
    table, _ = _defect_table(n, m, params, z1, z2, conv, ctx)
    g = m * m * n * n
    ta = basis_t(alpha)
    tb = basis_t(beta)
    comp = np.zeros(g * g, dtype=complex)
    for r_out in range(n):
        for r_in in range(n):
            wa = np.conj(ta[r_out, r_in])
            if wa == 0:
                continue
            for s_out in range(n):
                for s_in in range(n):
                    wb = np.conj(tb[s_out, s_in])
                    if wb == 0:
                        continue
                    key = (
                        (i - 1) * n + r_out,
                        (i - 1) * n + s_out,
                        (j - 1) * n + r_in,
                        (k - 1) * n + s_in,
                    )
                    comp += wa * wb * table[key]
    comp /= n * n
    d_b = z2 + params.q2[i - 1] - params.q1[k - 1] + omega(beta, ctx)
    d_a = z1 + params.q2[i - 1] - params.q1[j - 1] + params.hbar + omega(alpha, ctx)
    for arg in (d_b, d_a):
        if lattice_distance(arg, ctx.tau) < DELTA_MIN:
            raise PoleProximityError(
                f"prefactor argument {arg:.6g} too close to a theta zero; "
                "resample the spectral parameters"
            )
    div = theta(d_b, ctx) * theta(d_a, ctx)
    if conv.exp_factor:
        div *= cmath.exp(TWO_PI_I * (alpha.a2 * z1 + beta.a2 * z2) / n)
    return comp / div


def defect_factorization_check(
    i: int,
    j: int,
    k: int,
    alpha: LatticeIndex,
    beta: LatticeIndex,
    params: DynamicalParams,
    z_samples: Sequence[tuple[complex, complex]],
    conv: LConvention,
    ctx: EllipticContext,
) -> float | None:
    """Worst relative variation of :func:`component_ratio` across z-samples.

    A small value certifies that the z-dependence of this defect component
    factorizes into the theta prefactors, leaving a z-free relation vector
    (proportional to the family-2 vector for the same labels).  Returns
    None at m == 1, where no pair j != k exists and the check is vacuous.
    """
    if params.m == 1:
        return None
    if len(z_samples) < 2:
        raise ValueError("need at least two z-samples")
    ratios = [
        component_ratio(i, j, k, alpha, beta, params, z1, z2, conv, ctx)
        for z1, z2 in z_samples
    ]
    ref = ratios[0]
    scale = float(np.max(np.abs(ref)))
    if scale == 0.0:
        return 0.0
    worst = 0.0
    for other in ratios[1:]:
        worst = max(worst, float(np.max(np.abs(other - ref))) / scale)
    return worst
