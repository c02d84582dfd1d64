"""Bounded cochain complexes of finite-rank free modules over Z or Q.

Grading is cohomological: the differential of a complex raises degree by
one.  A complex stores an explicit degree window [lo, hi]; degrees outside
the window are zero.  Conventions pinned here once and used everywhere:

* shift:  (C[k])^n = C^(n+k) with differential (-1)^k d,
* atom(G, k) places one rank in degree -k,
* cone(f: A -> B) = B + A[1] with differential d(b, a) = (db - f(a), -da),
* fiber(f) = cone(f)[-1].
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import linalg
from .linalg import (RatSolver, as_matrix, as_vector, check_int_entries,
                     check_rat_entries, eye, int_kernel_basis, is_zero, mm,
                     mv, smith_normal_form, solve_int, solve_int_many, zeros)

RING_Z = "Z"
RING_Q = "Q"


def _check_ring(ring: str) -> str:
    if ring not in (RING_Z, RING_Q):
        raise ValueError(f"unknown ring {ring!r}")
    return ring


def _check_entries(ring: str, m: np.ndarray) -> np.ndarray:
    return check_int_entries(m) if ring == RING_Z else check_rat_entries(m)


class Complex:
    """Bounded cochain complex with exact differential matrices.

    ranks[i] is the rank in degree lo + i; diffs[i] is the matrix of
    d^(lo+i): rank(lo+i) -> rank(lo+i+1), acting on column vectors.
    d o d = 0 is asserted on construction.
    """

    __slots__ = ("ring", "lo", "hi", "ranks", "diffs")

    def __init__(self, ring: str, lo: int, ranks, diffs):
        self.ring = _check_ring(ring)
        ranks = tuple(int(r) for r in ranks)
        if not ranks:
            ranks = (0,)
            diffs = [zeros(0, 0)]
        if any(r < 0 for r in ranks):
            raise ValueError("ranks must be non-negative")
        self.lo = int(lo)
        self.hi = self.lo + len(ranks) - 1
        self.ranks = ranks
        diffs = list(diffs)
        if len(diffs) == len(ranks) - 1:
            diffs.append(zeros(0, ranks[-1]))
        if len(diffs) != len(ranks):
            raise ValueError("need one differential per degree")
        mats = []
        for i, d in enumerate(diffs):
            want_rows = ranks[i + 1] if i + 1 < len(ranks) else 0
            m = _check_entries(self.ring, as_matrix(d, want_rows, ranks[i]))
            if m.shape != (want_rows, ranks[i]):
                raise ValueError(
                    f"differential in degree {self.lo + i} has shape "
                    f"{m.shape}, expected {(want_rows, ranks[i])}")
            mats.append(m)
        self.diffs = tuple(mats)
        for i in range(len(mats) - 1):
            if not is_zero(mm(mats[i + 1], mats[i])):
                raise ValueError(f"d o d != 0 at degree {self.lo + i}")

    # -- access --------------------------------------------------------

    def rank(self, n: int) -> int:
        if self.lo <= n <= self.hi:
            return self.ranks[n - self.lo]
        return 0

    def diff(self, n: int) -> np.ndarray:
        if self.lo <= n <= self.hi:
            return self.diffs[n - self.lo]
        return zeros(self.rank(n + 1), 0)

    def degrees(self):
        return range(self.lo, self.hi + 1)

    def is_zero(self) -> bool:
        return all(r == 0 for r in self.ranks)

    def trim(self) -> "Complex":
        """Drop zero ranks at the ends of the window."""
        lo, hi = self.lo, self.hi
        while lo < hi and self.rank(lo) == 0:
            lo += 1
        while hi > lo and self.rank(hi) == 0:
            hi -= 1
        return self.window(lo, hi)

    def window(self, lo: int, hi: int) -> "Complex":
        """Restriction to [lo, hi] (degrees outside become zero)."""
        if hi < lo:
            raise ValueError("empty window")
        ranks = [self.rank(n) for n in range(lo, hi + 1)]
        diffs = [self.diff(n) if n < hi else zeros(0, self.rank(hi))
                 for n in range(lo, hi + 1)]
        return Complex(self.ring, lo, ranks, diffs)

    def __eq__(self, other):
        if not isinstance(other, Complex):
            return NotImplemented
        a, b = self.trim(), other.trim()
        if (a.ring, a.lo, a.ranks) != (b.ring, b.lo, b.ranks):
            return False
        return all((da == db).all() or (da.size == 0 and db.size == 0)
                   for da, db in zip(a.diffs, b.diffs))

    def __repr__(self):
        return (f"Complex({self.ring}, window=[{self.lo},{self.hi}], "
                f"ranks={list(self.ranks)})")

    # -- serialization ---------------------------------------------------

    def to_json(self) -> dict:
        return {
            "ring": self.ring,
            "lo": self.lo,
            "hi": self.hi,
            "ranks": list(self.ranks),
            "differentials": [[_entry_str(x) for x in d.flat]
                              for d in self.diffs],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Complex":
        ring = _check_ring(obj["ring"])
        lo, hi = int(obj["lo"]), int(obj["hi"])
        ranks = [int(r) for r in obj["ranks"]]
        if len(ranks) != hi - lo + 1:
            raise ValueError("ranks do not match the window")
        diffs = []
        raw = obj["differentials"]
        for i in range(len(ranks)):
            rows = ranks[i + 1] if i + 1 < len(ranks) else 0
            flat = [parse_entry(x) for x in raw[i]] if i < len(raw) else []
            if len(flat) != rows * ranks[i]:
                raise ValueError(f"differential {i} has {len(flat)} entries, "
                                 f"expected {rows * ranks[i]}")
            diffs.append(as_matrix(np.array(flat, dtype=object), rows, ranks[i]))
        return cls(ring, lo, ranks, diffs)


def _entry_str(x) -> str:
    f = Fraction(x)
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def parse_entry(x):
    """Entries in JSON are decimal strings (unbounded), 'p/q' strings or ints."""
    if isinstance(x, str):
        f = Fraction(x)
    elif isinstance(x, int):
        f = Fraction(x)
    else:
        raise ValueError(f"bad matrix entry {x!r}")
    return int(f) if f.denominator == 1 else f


@dataclass(frozen=True)
class ChainMap:
    """Degreewise matrices commuting with the differentials."""

    source: Complex
    target: Complex
    mats: dict  # degree -> matrix rank_target(n) x rank_source(n)

    def __post_init__(self):
        if self.source.ring != self.target.ring:
            raise ValueError("mismatched rings")
        full = {}
        for n in range(min(self.source.lo, self.target.lo),
                       max(self.source.hi, self.target.hi) + 1):
            m = self.mats.get(n)
            if m is None:
                m = zeros(self.target.rank(n), self.source.rank(n))
            m = _check_entries(self.source.ring,
                               as_matrix(m, self.target.rank(n), self.source.rank(n)))
            if m.shape != (self.target.rank(n), self.source.rank(n)):
                raise ValueError(f"component in degree {n} has wrong shape")
            full[n] = m
        object.__setattr__(self, "mats", full)
        for n in list(full)[:-1]:
            lhs = mm(self.component(n + 1), self.source.diff(n))
            rhs = mm(self.target.diff(n), self.component(n))
            if not is_zero(lhs - rhs):
                raise ValueError(f"does not commute with d in degree {n}")

    def component(self, n: int) -> np.ndarray:
        m = self.mats.get(n)
        if m is None:
            m = zeros(self.target.rank(n), self.source.rank(n))
        return m

    @staticmethod
    def identity(C: Complex) -> "ChainMap":
        return ChainMap(C, C, {n: eye(C.rank(n)) for n in C.degrees()})

    @staticmethod
    def zero(source: Complex, target: Complex) -> "ChainMap":
        return ChainMap(source, target, {})

    def compose(self, other: "ChainMap") -> "ChainMap":
        """self o other."""
        if other.target is not self.source and other.target != self.source:
            raise ValueError("composition mismatch")
        degs = set(self.mats) | set(other.mats)
        return ChainMap(other.source, self.target,
                        {n: mm(self.component(n), other.component(n)) for n in degs})


@dataclass(frozen=True)
class FgAbGroup:
    """Canonical value of a homology computation.

    kind 'Z': free rank + torsion coefficients in divisibility order.
    kind 'Q': dimension only.
    kind 'QZ': divisible rank (number of Q/Z summands) + torsion.
    """

    kind: str
    rank: int = 0
    torsion: tuple = ()

    def __post_init__(self):
        if self.kind not in ("Z", "Q", "QZ"):
            raise ValueError(f"bad kind {self.kind!r}")
        tor = tuple(int(t) for t in self.torsion)
        if any(t <= 1 for t in tor):
            raise ValueError("torsion coefficients must exceed 1")
        for a, b in zip(tor, tor[1:]):
            if b % a != 0:
                raise ValueError("torsion coefficients must divide the next")
        object.__setattr__(self, "torsion", tor)

    def is_trivial(self) -> bool:
        return self.rank == 0 and not self.torsion

    def __str__(self):
        free = {"Z": "Z", "Q": "Q", "QZ": "Q/Z"}[self.kind]
        parts = []
        if self.rank == 1:
            parts.append(free)
        elif self.rank > 1:
            parts.append(f"{free}^{self.rank}")
        parts.extend(f"Z/{t}" for t in self.torsion)
        return " + ".join(parts) if parts else "0"


def zero_group(ring: str) -> FgAbGroup:
    return FgAbGroup("Q" if ring == RING_Q else "Z")


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------

def atom(ring: str, k: int) -> Complex:
    """One copy of the coefficient ring placed in degree -k."""
    return Complex(ring, -k, (1,), [zeros(0, 1)])


def shift(C: Complex, k: int) -> Complex:
    """(C[k])^n = C^(n+k), differential (-1)^k d."""
    sign = -1 if k % 2 else 1
    return Complex(C.ring, C.lo - k,
                   C.ranks, [sign * d for d in C.diffs])


def truncate_above(C: Complex, m: int) -> Complex:
    """Stupid truncation keeping degrees >= m."""
    if m <= C.lo:
        return C
    if m > C.hi:
        return Complex(C.ring, m, (0,), [zeros(0, 0)])
    return C.window(m, C.hi)


def truncate_below(C: Complex, m: int) -> Complex:
    """Stupid truncation keeping degrees <= m."""
    if m >= C.hi:
        return C
    if m < C.lo:
        return Complex(C.ring, m, (0,), [zeros(0, 0)])
    out = C.window(C.lo, m)
    # the outgoing differential from the top retained degree is dropped
    diffs = list(out.diffs)
    diffs[-1] = zeros(0, out.ranks[-1])
    return Complex(C.ring, out.lo, out.ranks, diffs)


def direct_sum(A: Complex, B: Complex) -> Complex:
    if A.ring != B.ring:
        raise ValueError("mismatched rings")
    lo, hi = min(A.lo, B.lo), max(A.hi, B.hi)
    ranks, diffs = [], []
    for n in range(lo, hi + 1):
        ranks.append(A.rank(n) + B.rank(n))
    for n in range(lo, hi + 1):
        d = zeros(A.rank(n + 1) + B.rank(n + 1), A.rank(n) + B.rank(n))
        d[:A.rank(n + 1), :A.rank(n)] = A.diff(n)
        d[A.rank(n + 1):, A.rank(n):] = B.diff(n)
        diffs.append(d)
    return Complex(A.ring, lo, ranks, diffs)


def cone(f: ChainMap):
    """Mapping cone of f: A -> B, with the two structure maps.

    Returns (Cone, incl: B -> Cone, proj: Cone -> A[1]).
    Cone^n = B^n + A^(n+1), d(b, a) = (db - f(a), -da).
    """
    A, B = f.source, f.target
    lo = min(B.lo, A.lo - 1)
    hi = max(B.hi, A.hi - 1)
    ranks = [B.rank(n) + A.rank(n + 1) for n in range(lo, hi + 1)]
    diffs = []
    for n in range(lo, hi + 1):
        rb, ra = B.rank(n), A.rank(n + 1)
        rb1, ra1 = B.rank(n + 1), A.rank(n + 2)
        d = zeros(rb1 + ra1, rb + ra)
        d[:rb1, :rb] = B.diff(n)
        d[:rb1, rb:] = -f.component(n + 1)
        d[rb1:, rb:] = -A.diff(n + 1)
        diffs.append(d)
    C = Complex(A.ring, lo, ranks, diffs)
    incl = {}
    proj = {}
    shifted = shift(A, 1)
    for n in range(lo, hi + 1):
        rb, ra = B.rank(n), A.rank(n + 1)
        mi = zeros(rb + ra, rb)
        mi[:rb, :rb] = eye(rb)
        incl[n] = mi
        mp = zeros(ra, rb + ra)
        mp[:, rb:] = eye(ra)
        proj[n] = mp
    return C, ChainMap(B, C, incl), ChainMap(C, shifted, proj)


def fiber(f: ChainMap) -> Complex:
    """fiber(f) = cone(f)[-1]."""
    C, _, _ = cone(f)
    return shift(C, -1)


# ---------------------------------------------------------------------------
# Homology
# ---------------------------------------------------------------------------

class HomologyData:
    """H^n(C) with tracked generators.

    gens: matrix whose columns are (co)cycle representatives generating H^n;
    rels: relation matrix in generator coordinates (H = span / im rels).
    Over Q the relation matrix is zero.
    """

    __slots__ = ("complex", "degree", "group", "gens", "orders",
                 "_ker", "_im", "_express_solver", "_zero_solver")

    def __init__(self, C: Complex, n: int):
        self.complex, self.degree = C, n
        d_out = C.diff(n)
        d_in = C.diff(n - 1)
        if C.ring == RING_Z:
            ker = int_kernel_basis(d_out)
            # write the image inside the kernel lattice (the kernel basis is a
            # direct summand, so the coordinates are integral)
            ksnf = smith_normal_form(ker)
            if d_in.shape[1]:
                rel = solve_int_many(ker, d_in, snf=ksnf)
                assert rel is not None, "image not contained in kernel"
            else:
                rel = zeros(ker.shape[1], 0)
            rsnf = smith_normal_form(rel)
            k = ker.shape[1]
            gens, orders = [], []
            for i in range(k):
                d = rsnf.diag[i] if i < len(rsnf.diag) else 0
                if d == 1:
                    continue
                gcol = mv(ker, rsnf.Uinv[:, i])
                gens.append(gcol)
                orders.append(d)
            self.gens = (np.stack(gens, axis=1) if gens
                         else zeros(C.rank(n), 0))
            self.orders = tuple(orders)
            tor = tuple(sorted(d for d in orders if d != 0))
            self.group = FgAbGroup("Z", rank=orders.count(0), torsion=tor)
        else:
            solver = RatSolver(d_out)
            ker = solver.kernel_basis()
            im_rank = linalg.rat_rank(d_in)
            stacked = np.concatenate([d_in, ker], axis=1) if ker.size or d_in.size \
                else zeros(C.rank(n), 0)
            rs = RatSolver(stacked)
            cols = [p - d_in.shape[1] for p in rs.pivots if p >= d_in.shape[1]]
            gens = [ker[:, j] for j in cols]
            self.gens = (np.stack(gens, axis=1) if gens
                         else zeros(C.rank(n), 0))
            self.orders = tuple(0 for _ in gens)
            self.group = FgAbGroup("Q", rank=len(gens))
            assert len(gens) == ker.shape[1] - im_rank
        self._ker, self._im = None, d_in
        self._express_solver = None
        self._zero_solver = None

    # -- class arithmetic ----------------------------------------------

    def _solvers(self):
        if self._express_solver is None:
            stacked = (np.concatenate([self.gens, self._im], axis=1)
                       if self.gens.size or self._im.size
                       else zeros(self.complex.rank(self.degree), 0))
            if self.complex.ring == RING_Z:
                self._express_solver = ("Z", smith_normal_form(stacked), stacked)
                self._zero_solver = smith_normal_form(self._im)
            else:
                self._express_solver = ("Q", RatSolver(stacked), stacked)
                self._zero_solver = RatSolver(self._im)
        return self._express_solver

    def express(self, vec):
        """Coordinates of the class of a cocycle in the generators, or None."""
        kind, solver, stacked = self._solvers()
        vec = as_vector(vec, self.complex.rank(self.degree))
        if kind == "Z":
            sol = solve_int(stacked, vec, snf=solver)
        else:
            sol = solver.solve(vec)
        if sol is None:
            return None
        return sol[: self.gens.shape[1]]

    def class_is_zero(self, vec) -> bool:
        self._solvers()
        vec = as_vector(vec, self.complex.rank(self.degree))
        if self.complex.ring == RING_Z:
            return solve_int(self._im, vec, snf=self._zero_solver) is not None
        return self._zero_solver.solve(vec) is not None

    def classes_equal(self, v, w) -> bool:
        return self.class_is_zero(as_vector(v) - as_vector(w))


def homology(C: Complex, n: int) -> FgAbGroup:
    """H^n(C) as a canonical finitely generated group (SNF over Z,
    dimension over Q).  Degrees outside the window give the zero group."""
    if n < C.lo or n > C.hi:
        return zero_group(C.ring)
    if C.ring == RING_Q:
        dim = linalg.rat_nullity(C.diff(n)) - linalg.rat_rank(C.diff(n - 1))
        return FgAbGroup("Q", rank=dim)
    return HomologyData(C, n).group


def homology_presentation(C: Complex, n: int) -> HomologyData:
    return HomologyData(C, n)


def induced_map(f: ChainMap, n: int, source_h: HomologyData | None = None,
                target_h: HomologyData | None = None):
    """Matrix of H^n(f) in the tracked generators of source and target."""
    sh = source_h or HomologyData(f.source, n)
    th = target_h or HomologyData(f.target, n)
    cols = []
    for j in range(sh.gens.shape[1]):
        img = mv(f.component(n), sh.gens[:, j])
        coords = th.express(img)
        assert coords is not None, "image of a cycle is not a cycle class"
        cols.append(coords)
    mat = (np.stack(cols, axis=1) if cols
           else zeros(th.gens.shape[1], 0))
    return mat, sh, th


def exact_at_middle(f: ChainMap, g: ChainMap, n: int) -> bool:
    """Whether H^n(source f) -> H^n(target f) -> H^n(target g) is exact at the
    middle, verified by membership witnesses on kernel generators."""
    if g.source != f.target:
        raise ValueError("maps do not compose")
    P, sh, mh = induced_map(f, n)
    Q, _, th = induced_map(g, n, source_h=mh)
    # composite must vanish
    for j in range(sh.gens.shape[1]):
        img = mv(g.component(n), mv(f.component(n), sh.gens[:, j]))
        if not th.class_is_zero(img):
            return False
    # kernel of Q (with middle relations) must land in the image of P
    mid_rel = _relation_matrix(mh)
    tar_rel = _relation_matrix(th)
    lifted = np.concatenate([Q, tar_rel], axis=1) if Q.size or tar_rel.size \
        else zeros(th.gens.shape[1], 0)
    ker = (int_kernel_basis(lifted) if f.source.ring == RING_Z
           else linalg.rat_kernel_basis(lifted))
    src_cols = Q.shape[1]
    img_cols = np.concatenate([P, mid_rel], axis=1) if P.size or mid_rel.size \
        else zeros(mh.gens.shape[1], 0)
    for j in range(ker.shape[1]):
        x = ker[:src_cols, j]
        if f.source.ring == RING_Z:
            ok = solve_int(img_cols, x) is not None
        else:
            ok = RatSolver(img_cols).solve(x) is not None
        if not ok:
            return False
    return True


def _relation_matrix(h: HomologyData) -> np.ndarray:
    k = h.gens.shape[1]
    cols = []
    for i, d in enumerate(h.orders):
        if d != 0:
            col = zeros(k, 1).reshape(k)
            col[i] = d
            cols.append(col)
    return np.stack(cols, axis=1) if cols else zeros(k, 0)


# re-exported here because class equality and the exactness witnesses in the
# richer modules are all instances of the same mixed system
mixed_solve = linalg.mixed_solve
MixedSolver = linalg.MixedSolver
