"""Exact dense linear algebra over Z and Q.

Matrices are numpy arrays with dtype=object holding Python ints and
fractions.Fraction entries, so every result here is exact.  Integer-only
operations (matrix products, Smith normal form) run on int64 arrays while
conservative bounds prove no overflow is possible, and fall back to
object-dtype big-integer arithmetic otherwise; both paths compute the same
numbers.  This module provides the workhorses everything else is built on:
Smith normal form with unimodular transforms (integer kernels, integer
solving, quotient presentations), Gauss elimination over Q, and the
combined integral/rational solver behind class equality and the exactness
witnesses.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

import numpy as np

_INT64_SAFE = 2 ** 61


def zeros(rows: int, cols: int) -> np.ndarray:
    return np.zeros((rows, cols), dtype=object)


def eye(n: int) -> np.ndarray:
    m = zeros(n, n)
    for i in range(n):
        m[i, i] = 1
    return m


def as_matrix(entries, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    """Coerce nested lists / arrays to an object-dtype matrix."""
    m = np.array(entries, dtype=object)
    if m.ndim == 1 and rows is not None and cols is not None:
        m = m.reshape(rows, cols)
    if m.ndim != 2:
        if m.size == 0:
            m = m.reshape(rows if rows is not None else 0,
                          cols if cols is not None else 0)
        else:
            raise ValueError(f"expected a matrix, got array of ndim {m.ndim}")
    return m


def as_vector(entries, length: int | None = None) -> np.ndarray:
    v = np.array(entries, dtype=object)
    if v.ndim == 2 and 1 in v.shape:
        v = v.reshape(-1)
    if v.ndim != 1:
        if v.size == 0:
            v = v.reshape(length if length is not None else 0)
        else:
            raise ValueError("expected a vector")
    if length is not None and v.shape[0] != length:
        raise ValueError(f"expected vector of length {length}, got {v.shape[0]}")
    return v


def is_zero(a: np.ndarray) -> bool:
    return a.size == 0 or bool((a == 0).all())


def is_integral(a: np.ndarray) -> bool:
    return all(_as_frac(x).denominator == 1 for x in a.flat)


def _as_frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    raise TypeError(f"not an exact scalar: {x!r} of type {type(x).__name__}")


def check_int_entries(a: np.ndarray) -> np.ndarray:
    out = np.empty(a.shape, dtype=object)
    for idx, x in np.ndenumerate(a):
        if isinstance(x, (int, np.integer)):
            out[idx] = int(x)
        elif isinstance(x, Fraction) and x.denominator == 1:
            out[idx] = int(x)
        else:
            raise TypeError(f"non-integer entry {x!r}")
    return out


def check_rat_entries(a: np.ndarray) -> np.ndarray:
    """Validate exact rational entries.  Integers stay plain ints (and whole
    Fractions are normalized to ints) so that integer fast paths still apply
    to rational-coefficient matrices that happen to be integral."""
    out = np.empty(a.shape, dtype=object)
    for idx, x in np.ndenumerate(a):
        f = _as_frac(x)
        out[idx] = f if f.denominator != 1 else int(f)
    return out


def _int_bound(a: np.ndarray):
    """max |entry| if every entry is a plain integer, else None."""
    best = 0
    for x in a.flat:
        if not isinstance(x, (int, np.integer)):
            return None
        v = int(x)
        if v < 0:
            v = -v
        if v > best:
            best = v
    return best


def _to_object(a: np.ndarray) -> np.ndarray:
    if a.dtype == object:
        return a
    return np.array(a.tolist(), dtype=object).reshape(a.shape)


def mm(A, B) -> np.ndarray:
    """Exact matrix product with an int64 fast path."""
    A = A if isinstance(A, np.ndarray) else as_matrix(A)
    B = B if isinstance(B, np.ndarray) else as_matrix(B)
    if A.shape[-1] != B.shape[0]:
        raise ValueError(f"matmul mismatch {A.shape} @ {B.shape}")
    if A.size == 0 or B.size == 0:
        shape = (A.shape[0], B.shape[1]) if B.ndim == 2 else (A.shape[0],)
        return np.zeros(shape, dtype=object)
    a, b = _int_bound(A), _int_bound(B)
    if a is not None and b is not None and a * b * A.shape[-1] < _INT64_SAFE:
        out = A.astype(np.int64) @ B.astype(np.int64)
        return np.array(out.tolist(), dtype=object).reshape(out.shape)
    return A @ B


def mv(A, v) -> np.ndarray:
    """Exact matrix-vector product (same fast path as mm)."""
    v = v if isinstance(v, np.ndarray) else as_vector(v)
    return mm(A, v.reshape(-1, 1)).reshape(-1)


# ---------------------------------------------------------------------------
# Smith normal form
# ---------------------------------------------------------------------------

class SmithForm:
    """Decomposition U @ A @ V == D with U, V unimodular, D diagonal.

    The diagonal entries are non-negative and each divides the next.
    Uinv and Vinv are the exact inverses of U and V.
    """

    __slots__ = ("U", "D", "V", "Uinv", "Vinv", "diag", "rank")

    def __init__(self, U, D, V, Uinv, Vinv):
        self.U, self.D, self.V, self.Uinv, self.Vinv = U, D, V, Uinv, Vinv
        n = min(D.shape)
        self.diag = [int(D[i, i]) for i in range(n)]
        self.rank = sum(1 for d in self.diag if d != 0)


class _SnfState:
    """Mutable state for the reduction; int64 while provably safe.

    Before every arithmetic update a conservative bound on the largest
    possible new entry is checked; if it could reach 2^61 the five matrices
    are promoted to big-integer (object) arrays and the same vectorized
    expressions continue exactly.
    """

    def __init__(self, A: np.ndarray):
        m, n = A.shape
        bound = _int_bound(A)
        self.obj = bound is None or bound >= _INT64_SAFE
        self.maxdim = max(m, n, 1)
        if self.obj:
            self.D = A.copy()
            self.U, self.Uinv = eye(m), eye(m)
            self.V, self.Vinv = eye(n), eye(n)
        else:
            self.D = A.astype(np.int64)
            self.U = np.eye(m, dtype=np.int64)
            self.Uinv = np.eye(m, dtype=np.int64)
            self.V = np.eye(n, dtype=np.int64)
            self.Vinv = np.eye(n, dtype=np.int64)

    def _demote(self):
        if not self.obj:
            self.D, self.U, self.Uinv = map(_to_object, (self.D, self.U, self.Uinv))
            self.V, self.Vinv = map(_to_object, (self.V, self.Vinv))
            self.obj = True

    @staticmethod
    def _amax(a) -> int:
        if not isinstance(a, np.ndarray):
            return abs(int(a))
        if a.size == 0:
            return 0
        if a.dtype == object:
            return max((abs(int(x)) for x in a.flat), default=0)
        return int(np.abs(a).max())

    def _guard(self, qmax: int):
        """Promote to big integers unless (maxentry+1)(qmax+1)(dim+1) < 2^61,
        which bounds any single vectorized update below."""
        if self.obj:
            return
        entries = max(self._amax(self.D), self._amax(self.U), self._amax(self.Uinv),
                      self._amax(self.V), self._amax(self.Vinv))
        if (entries + 1) * (abs(int(qmax)) + 1) * (self.maxdim + 1) >= _INT64_SAFE:
            self._demote()

    def rows_reduce(self, t: int, q):
        """rows below t: row_i -= q_i * row_t (and transforms)."""
        self._guard(self._amax(q))
        if self.obj and isinstance(q, np.ndarray) and q.dtype != object:
            q = _to_object(q)
        self.D[t + 1:, :] -= np.outer(q, self.D[t, :])
        self.U[t + 1:, :] -= np.outer(q, self.U[t, :])
        self.Uinv[:, t] += self.Uinv[:, t + 1:] @ q

    def cols_reduce(self, t: int, q):
        self._guard(self._amax(q))
        if self.obj and isinstance(q, np.ndarray) and q.dtype != object:
            q = _to_object(q)
        self.D[:, t + 1:] -= np.outer(self.D[:, t], q)
        self.V[:, t + 1:] -= np.outer(self.V[:, t], q)
        self.Vinv[t, :] += q @ self.Vinv[t + 1:, :]

    def row_add(self, i: int, j: int, q: int):
        self._guard(q)
        self.D[i, :] += q * self.D[j, :]
        self.U[i, :] += q * self.U[j, :]
        self.Uinv[:, j] -= q * self.Uinv[:, i]

    def row_swap(self, i, j):
        if i == j:
            return
        self.D[[i, j], :] = self.D[[j, i], :]
        self.U[[i, j], :] = self.U[[j, i], :]
        self.Uinv[:, [i, j]] = self.Uinv[:, [j, i]]

    def col_swap(self, i, j):
        if i == j:
            return
        self.D[:, [i, j]] = self.D[:, [j, i]]
        self.V[:, [i, j]] = self.V[:, [j, i]]
        self.Vinv[[i, j], :] = self.Vinv[[j, i], :]

    def row_negate(self, i):
        self.D[i, :] = -self.D[i, :]
        self.U[i, :] = -self.U[i, :]
        self.Uinv[:, i] = -self.Uinv[:, i]

    def find_pivot(self, t: int):
        """Position of the smallest nonzero |entry| of the trailing block,
        or None if the block vanishes."""
        block = self.D[t:, t:]
        if block.size == 0:
            return None
        if block.dtype != object:
            ab = np.abs(block)
            big = np.iinfo(np.int64).max
            ab = np.where(block != 0, ab, big)
            flat = int(ab.argmin())
            bi, bj = divmod(flat, block.shape[1])
            if ab[bi, bj] == big:
                return None
            return t + bi, t + bj
        best, pos = None, None
        for (i, j), v in np.ndenumerate(block):
            if v != 0:
                a = abs(int(v))
                if best is None or a < best:
                    best, pos = a, (t + i, t + j)
        return pos


def smith_normal_form(A) -> SmithForm:
    """Smith normal form of an integer matrix, pivoting on the smallest
    nonzero entry; off-pivot entries are reduced modulo the pivot at every
    step, which keeps coefficient growth in check.  Deterministic.
    """
    A = check_int_entries(as_matrix(A))
    m, n = A.shape
    st = _SnfState(A)

    for t in range(min(m, n)):
        while True:
            pos = st.find_pivot(t)
            if pos is None:
                break
            st.row_swap(t, pos[0])
            st.col_swap(t, pos[1])
            if st.D[t, t] < 0:
                st.row_negate(t)
            p = int(st.D[t, t])
            col = st.D[t + 1:, t]
            if col.size and (col != 0).any():
                st.rows_reduce(t, col // p)
            row = st.D[t, t + 1:]
            if row.size and (row != 0).any():
                st.cols_reduce(t, row // p)
            if (st.D[t + 1:, t] != 0).any() or (st.D[t, t + 1:] != 0).any():
                continue
            # enforce the divisibility chain
            rest = st.D[t + 1:, t + 1:]
            bad = None
            if rest.size:
                mod = rest % p
                nz = np.argwhere(mod != 0)
                if len(nz):
                    bad = int(nz[0][0]) + t + 1
            if bad is None:
                break
            st.row_add(t, bad, 1)

    U, D, V = _to_object(st.U), _to_object(st.D), _to_object(st.V)
    Uinv, Vinv = _to_object(st.Uinv), _to_object(st.Vinv)
    return SmithForm(U, D, V, Uinv, Vinv)


def int_kernel_basis(A) -> np.ndarray:
    """Columns form a basis of the integer kernel lattice of A (a direct
    summand of Z^n, because the columns come out of a unimodular matrix)."""
    A = as_matrix(A)
    snf = smith_normal_form(A)
    r = snf.rank
    return snf.V[:, r:].copy()


def solve_int(A, b, snf: SmithForm | None = None):
    """One integer solution of A x = b, or None.

    b may have rational entries; the system is then unsolvable unless the
    relevant combinations are integral.
    """
    A = as_matrix(A)
    b = as_vector(b, A.shape[0])
    if snf is None:
        snf = smith_normal_form(A)
    sols = solve_int_many(A, b.reshape(-1, 1), snf=snf)
    if sols is None:
        return None
    return sols[:, 0]


def solve_int_many(A, B, snf: SmithForm | None = None):
    """Solve A X = B column by column over Z; None if any column fails."""
    A = as_matrix(A)
    B = as_matrix(B)
    if snf is None:
        snf = smith_normal_form(A)
    Y = mm(snf.U, B)
    m, n = A.shape
    X = zeros(n, B.shape[1])
    for i in range(m):
        di = snf.diag[i] if i < len(snf.diag) else 0
        for j in range(B.shape[1]):
            yij = _as_frac(Y[i, j])
            if di == 0:
                if yij != 0:
                    return None
            else:
                q = yij / di
                if q.denominator != 1:
                    return None
                if i < n:
                    X[i, j] = int(q)
    return mm(snf.V, X)


def int_image_contains(A, b, snf: SmithForm | None = None) -> bool:
    return solve_int(A, b, snf=snf) is not None


# ---------------------------------------------------------------------------
# Rational elimination
# ---------------------------------------------------------------------------

class RatSolver:
    """Row echelon factorization of a rational matrix, reusable across
    right-hand sides."""

    __slots__ = ("A", "T", "R", "pivots", "rank")

    def __init__(self, A):
        A = check_rat_entries(as_matrix(A))
        m, n = A.shape
        R = A.copy()
        T = eye(m)
        pivots: list[int] = []
        row = 0
        for col in range(n):
            piv = None
            for i in range(row, m):
                if R[i, col] != 0:
                    piv = i
                    break
            if piv is None:
                continue
            if piv != row:
                R[[row, piv], :] = R[[piv, row], :]
                T[[row, piv], :] = T[[piv, row], :]
            inv = Fraction(1, 1) / _as_frac(R[row, col])
            R[row, :] = R[row, :] * inv
            T[row, :] = T[row, :] * inv
            nz = [i for i in range(m) if i != row and R[i, col] != 0]
            for i in nz:
                f = R[i, col]
                R[i, :] = R[i, :] - f * R[row, :]
                T[i, :] = T[i, :] - f * T[row, :]
            pivots.append(col)
            row += 1
            if row == m:
                break
        self.A, self.T, self.R, self.pivots = A, T, R, pivots
        self.rank = len(pivots)

    def solve(self, b):
        """One rational solution of A x = b, or None."""
        b = as_vector(b, self.A.shape[0])
        y = self.T @ b
        n = self.A.shape[1]
        for i in range(self.rank, self.A.shape[0]):
            if _as_frac(y[i]) != 0:
                return None
        x = np.array([Fraction(0)] * n, dtype=object)
        for i, col in enumerate(self.pivots):
            x[col] = _as_frac(y[i])
        return x

    def kernel_basis(self) -> np.ndarray:
        """Columns form a basis of the rational null space."""
        n = self.A.shape[1]
        free = [j for j in range(n) if j not in self.pivots]
        out = zeros(n, len(free))
        for k, j in enumerate(free):
            out[j, k] = Fraction(1)
            for i, col in enumerate(self.pivots):
                out[col, k] = -_as_frac(self.R[i, j])
        return out


def solve_rat(A, b):
    return RatSolver(A).solve(b)


def rat_kernel_basis(A) -> np.ndarray:
    return RatSolver(A).kernel_basis()


def left_nullspace_rat(A) -> np.ndarray:
    """Rows form a basis of {y : y @ A == 0} over Q."""
    A = as_matrix(A)
    return rat_kernel_basis(A.T).T


def integerize_rows(A) -> np.ndarray:
    """Scale each row by the lcm of its denominators (rank and kernel are
    unchanged); result has plain integer entries."""
    A = as_matrix(A)
    if _int_bound(A) is not None:
        return A
    out = zeros(*A.shape)
    for i in range(A.shape[0]):
        lam = 1
        for x in A[i, :]:
            d = _as_frac(x).denominator
            lam = lam * d // gcd(lam, d)
        for j in range(A.shape[1]):
            out[i, j] = int(_as_frac(A[i, j]) * lam)
    return out


def rat_rank(A) -> int:
    """Rank over Q, via integer SNF after clearing denominators."""
    A = as_matrix(A)
    if A.size == 0:
        return 0
    return smith_normal_form(integerize_rows(A)).rank


def rat_nullity(A) -> int:
    return as_matrix(A).shape[1] - rat_rank(A)


# ---------------------------------------------------------------------------
# Mixed integral/rational systems
# ---------------------------------------------------------------------------

class MixedSolver:
    """Solver for  A_int @ u + A_rat @ v = b  with u integral, v rational.

    The factorizations are computed once, so repeated right-hand sides are
    cheap.  Strategy: a row basis P of the left null space of A_rat turns
    the problem into the pure integer system (P A_int) u = P b (each row
    scaled integral), solved by Smith normal form; v is then recovered
    over Q.
    """

    __slots__ = ("A_int", "A_rat", "P", "M", "scales", "snf", "rat")

    def __init__(self, A_int, A_rat):
        A_int = check_int_entries(as_matrix(A_int))
        A_rat = check_rat_entries(as_matrix(A_rat))
        if A_int.shape[0] != A_rat.shape[0]:
            raise ValueError("A_int and A_rat must have the same number of rows")
        self.A_int, self.A_rat = A_int, A_rat
        if A_rat.shape[1] == 0:
            self.P = eye(A_int.shape[0])
        else:
            self.P = left_nullspace_rat(A_rat)
        M0 = self.P @ A_int
        scales = []
        M = zeros(*M0.shape)
        for i in range(M0.shape[0]):
            lam = 1
            for x in M0[i, :]:
                d = _as_frac(x).denominator
                lam = lam * d // gcd(lam, d)
            scales.append(int(lam))
            for j in range(M0.shape[1]):
                M[i, j] = int(_as_frac(M0[i, j]) * lam)
        self.M, self.scales = M, scales
        self.snf = smith_normal_form(M)
        self.rat = RatSolver(A_rat) if A_rat.shape[1] > 0 else None

    def solve(self, b):
        """Return (u, v) with exact zero residual, or None."""
        b = as_vector(b, self.A_int.shape[0])
        rhs = self.P @ b
        c = zeros(len(self.scales), 1).reshape(len(self.scales))
        for i, lam in enumerate(self.scales):
            ci = _as_frac(rhs[i]) * lam
            if ci.denominator != 1:
                return None
            c[i] = int(ci)
        u = solve_int(self.M, c, snf=self.snf)
        if u is None:
            return None
        rem = b - mv(self.A_int, u)
        if self.rat is None:
            if not all(_as_frac(x) == 0 for x in rem):
                return None
            v = zeros(0, 1).reshape(0)
        else:
            v = self.rat.solve(rem)
            if v is None:
                return None
        resid = mv(self.A_int, u) + (self.A_rat @ v if v.shape[0] else 0) - b
        assert all(_as_frac(x) == 0 for x in np.atleast_1d(resid).flat)
        return u, v


def mixed_solve(A_int, A_rat, b):
    """One solution (u, v) of the mixed system, or None.

    >>> mixed_solve([[2]], np.zeros((1, 0)), [4])[0].tolist()
    [2]
    >>> mixed_solve([[2]], np.zeros((1, 0)), [3]) is None
    True
    >>> mixed_solve(np.zeros((1, 0)), [[2]], [3])[1].tolist()
    [Fraction(3, 2)]
    """
    return MixedSolver(A_int, A_rat).solve(b)


# ---------------------------------------------------------------------------
# Small utilities shared by the tests and the random suites
# ---------------------------------------------------------------------------

def random_unimodular(n: int, rng, steps: int = 12) -> np.ndarray:
    """Product of random elementary matrices; determinant +-1."""
    m = eye(n)
    for _ in range(steps):
        if n < 2:
            break
        i, j = rng.sample(range(n), 2)
        q = rng.randint(-2, 2)
        m[i, :] = m[i, :] + q * m[j, :]
        if rng.random() < 0.3:
            m[[i, j], :] = m[[j, i], :]
    return m


def lcm_denominator(vec) -> int:
    lam = 1
    for x in np.atleast_1d(vec).flat:
        d = _as_frac(x).denominator
        lam = lam * d // gcd(lam, d)
    return int(lam)
