"""Exact matrices and subspaces over Q or F_p.

Subspaces are canonicalized to reduced row echelon form at construction, so
structural equality of bases is subspace equality and deduplication never
double-counts.  Rank computations over Q clear denominators and run
fraction-free (Bareiss) integer elimination; the result is identical to a
rational RREF but roughly 40x faster, which the certification loops need.
Rows over F_2 are bit-packed ints inside the hot paths; the observable
contract (Scalar entries) is unchanged.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm

from .errors import (
    BudgetExceeded,
    DimensionMismatch,
    FieldMismatch,
    InfiniteField,
    InternalError,
)
from .fields import QQ, FieldSpec, Scalar, Value

DEFAULT_BUDGET = 10**8
DEFAULT_RATIONAL_BOUND = 10


# ---------------------------------------------------------------------------
# Integer elimination cores.
# ---------------------------------------------------------------------------


def _clear_row(row) -> list[int]:
    """Scale a rational row to a primitive integer row (same span)."""
    den = 1
    for x in row:
        if isinstance(x, Fraction):
            den = lcm(den, x.denominator)
    ints = [int(x * den) if isinstance(x, Fraction) else int(x) * den for x in row]
    g = 0
    for v in ints:
        g = gcd(g, v)
    if g > 1:
        ints = [v // g for v in ints]
    return ints


def _int_rank(rows: list[list[int]], ncols: int) -> int:
    """Rank of an integer matrix by Bareiss fraction-free elimination."""
    m = [list(r) for r in rows if any(r)]
    nr = len(m)
    prev = 1
    r = 0
    for c in range(ncols):
        if r >= nr:
            break
        piv = None
        for i in range(r, nr):
            if m[i][c]:
                piv = i
                break
        if piv is None:
            continue
        if piv != r:
            m[r], m[piv] = m[piv], m[r]
        pv = m[r][c]
        for i in range(r + 1, nr):
            fi = m[i][c]
            row_i = m[i]
            row_r = m[r]
            for j in range(c + 1, ncols):
                row_i[j] = (row_i[j] * pv - fi * row_r[j]) // prev
            row_i[c] = 0
        prev = pv
        r += 1
    return r


def _int_det(rows: list[list[int]]) -> int:
    """Determinant of a square integer matrix (Bareiss)."""
    m = [list(r) for r in rows]
    n = len(m)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for c in range(n):
        piv = None
        for i in range(c, n):
            if m[i][c]:
                piv = i
                break
        if piv is None:
            return 0
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            sign = -sign
        pv = m[c][c]
        for i in range(c + 1, n):
            fi = m[i][c]
            for j in range(c + 1, n):
                m[i][j] = (m[i][j] * pv - fi * m[c][j]) // prev
            m[i][c] = 0
        prev = pv
    return sign * m[n - 1][n - 1]


def _rat_rref(rows, ncols: int):
    """Exact RREF over Q.

    Works on cleared integer rows with fraction-free Gauss-Jordan steps
    (per-row gcd reduction keeps entries small), then divides each pivot
    row by its pivot.  RREF is unique, so the result is canonical.
    """
    m = [_clear_row(r) for r in rows]
    pivots: list[int] = []
    r = 0
    nr = len(m)
    for c in range(ncols):
        if r >= nr:
            break
        piv = None
        for i in range(r, nr):
            if m[i][c]:
                piv = i
                break
        if piv is None:
            continue
        if piv != r:
            m[r], m[piv] = m[piv], m[r]
        pv = m[r][c]
        for i in range(nr):
            if i == r or not m[i][c]:
                continue
            fi = m[i][c]
            m[i] = [a * pv - fi * b for a, b in zip(m[i], m[r])]
            g = 0
            for v in m[i]:
                g = gcd(g, v)
            if g > 1:
                m[i] = [v // g for v in m[i]]
        pivots.append(c)
        r += 1
    out = []
    for i, c in enumerate(pivots):
        pv = m[i][c]
        out.append(tuple(Fraction(v, pv) for v in m[i]))
    return out, pivots


def _fp_rref(rows, ncols: int, p: int):
    """RREF over F_p (Gauss-Jordan with modular inverses)."""
    m = [[int(x) % p for x in r] for r in rows]
    pivots: list[int] = []
    r = 0
    nr = len(m)
    for c in range(ncols):
        if r >= nr:
            break
        piv = None
        for i in range(r, nr):
            if m[i][c]:
                piv = i
                break
        if piv is None:
            continue
        if piv != r:
            m[r], m[piv] = m[piv], m[r]
        inv = pow(m[r][c], -1, p)
        m[r] = [x * inv % p for x in m[r]]
        for i in range(nr):
            if i != r and m[i][c]:
                fi = m[i][c]
                m[i] = [(a - fi * b) % p for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    return [tuple(m[i]) for i in range(len(pivots))], pivots


def _fp_rank(rows, ncols: int, p: int) -> int:
    if p == 2:
        return _gf2_rank([_gf2_pack(r) for r in rows])
    m = [[int(x) % p for x in r] for r in rows if any(int(x) % p for x in r)]
    r = 0
    nr = len(m)
    for c in range(ncols):
        if r >= nr:
            break
        piv = None
        for i in range(r, nr):
            if m[i][c]:
                piv = i
                break
        if piv is None:
            continue
        if piv != r:
            m[r], m[piv] = m[piv], m[r]
        inv = pow(m[r][c], -1, p)
        row_r = [x * inv % p for x in m[r]]
        m[r] = row_r
        for i in range(r + 1, nr):
            fi = m[i][c]
            if fi:
                m[i] = [(a - fi * b) % p for a, b in zip(m[i], row_r)]
        r += 1
    return r


def _gf2_pack(row) -> int:
    word = 0
    for j, x in enumerate(row):
        if int(x) & 1:
            word |= 1 << j
    return word


def _gf2_unpack(word: int, ncols: int) -> tuple[int, ...]:
    return tuple((word >> j) & 1 for j in range(ncols))


def _gf2_rank(words: list[int]) -> int:
    basis: list[int] = []
    rank = 0
    for w in words:
        for b in basis:
            w = min(w, w ^ b)
        if w:
            basis.append(w)
            basis.sort(reverse=True)
            rank += 1
    return rank


# ---------------------------------------------------------------------------
# Matrices.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExactMatrix:
    """Row-major exact matrix over a FieldSpec; entries are raw values."""

    field: FieldSpec
    rows: int
    cols: int
    entries: tuple[tuple[Value, ...], ...]

    def __post_init__(self):
        if len(self.entries) != self.rows or any(
            len(r) != self.cols for r in self.entries
        ):
            raise DimensionMismatch("entry grid does not match declared shape")

    @classmethod
    def from_rows(cls, field: FieldSpec, rows, cols: int | None = None) -> "ExactMatrix":
        data = [tuple(field.coerce(x) for x in r) for r in rows]
        if cols is None:
            if not data:
                raise DimensionMismatch("empty matrix needs an explicit column count")
            cols = len(data[0])
        return cls(field, len(data), cols, tuple(data))

    @classmethod
    def identity(cls, field: FieldSpec, n: int) -> "ExactMatrix":
        one, zero = field.one(), field.zero()
        return cls(
            field, n, n, tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n))
        )

    @classmethod
    def zeros(cls, field: FieldSpec, rows: int, cols: int) -> "ExactMatrix":
        zero = field.zero()
        return cls(field, rows, cols, tuple(tuple(zero for _ in range(cols)) for _ in range(rows)))

    def entry(self, i: int, j: int) -> Scalar:
        return Scalar(self.field, self.entries[i][j])

    def row(self, i: int) -> tuple[Value, ...]:
        return self.entries[i]

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def transpose(self) -> "ExactMatrix":
        return ExactMatrix(
            self.field,
            self.cols,
            self.rows,
            tuple(tuple(self.entries[i][j] for i in range(self.rows)) for j in range(self.cols)),
        )

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.field != other.field:
            raise FieldMismatch(f"{self.field} vs {other.field}")
        if self.cols != other.rows:
            raise DimensionMismatch(f"{self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        f = self.field
        ot = other.transpose()
        out = []
        for r in self.entries:
            out.append(
                tuple(
                    f.coerce(sum(a * b for a, b in zip(r, c))) for c in ot.entries
                )
            )
        return ExactMatrix(f, self.rows, other.cols, tuple(out))

    def apply(self, vec: tuple[Value, ...]) -> tuple[Value, ...]:
        """Matrix-vector product (vec as a column vector)."""
        if len(vec) != self.cols:
            raise DimensionMismatch(f"{self.rows}x{self.cols} applied to length {len(vec)}")
        f = self.field
        return tuple(f.coerce(sum(a * b for a, b in zip(r, vec))) for r in self.entries)

    def neg(self) -> "ExactMatrix":
        f = self.field
        return ExactMatrix(
            f, self.rows, self.cols, tuple(tuple(f.neg(x) for x in r) for r in self.entries)
        )

    def kron(self, other: "ExactMatrix") -> "ExactMatrix":
        """Kronecker product (blocks self[i][j] * other)."""
        if self.field != other.field:
            raise FieldMismatch(f"{self.field} vs {other.field}")
        f = self.field
        out = []
        for i in range(self.rows):
            for a in range(other.rows):
                row = []
                for j in range(self.cols):
                    s = self.entries[i][j]
                    row.extend(f.mul(s, x) for x in other.entries[a])
                out.append(tuple(row))
        return ExactMatrix(f, self.rows * other.rows, self.cols * other.cols, tuple(out))

    def det(self) -> Value:
        if not self.is_square:
            raise DimensionMismatch("determinant needs a square matrix")
        if self.field.is_finite:
            p = self.field.p
            m = [[int(x) % p for x in r] for r in self.entries]
            d = _int_det(m)
            return d % p
        scale = Fraction(1)
        int_rows = []
        for r in self.entries:
            den = 1
            for x in r:
                den = lcm(den, x.denominator)
            int_rows.append([int(x * den) for x in r])
            scale *= den
        return Fraction(_int_det(int_rows)) / scale

    def to_json_dict(self) -> dict:
        d = {
            "field": "Fp" if self.field.is_finite else "Q",
            "rows": self.rows,
            "cols": self.cols,
            "entries": [self.field.format(x) for r in self.entries for x in r],
        }
        if self.field.is_finite:
            d["p"] = self.field.p
        return d

    @classmethod
    def from_json_dict(cls, d: dict) -> "ExactMatrix":
        field = FieldSpec("prime", d["p"]) if d["field"] == "Fp" else QQ
        rows, cols = d["rows"], d["cols"]
        flat = d["entries"]
        if len(flat) != rows * cols:
            raise DimensionMismatch("entry count does not match rows*cols")
        data = [
            [field.parse(flat[i * cols + j]) for j in range(cols)] for i in range(rows)
        ]
        return cls.from_rows(field, data, cols)


def rref(M: ExactMatrix) -> tuple[ExactMatrix, int]:
    """Reduced row echelon form and rank, exact over either field."""
    if M.field.is_finite:
        nz, pivots = _fp_rref(M.entries, M.cols, M.field.p)
    else:
        nz, pivots = _rat_rref(M.entries, M.cols)
    zero_row = tuple(M.field.zero() for _ in range(M.cols))
    full = list(nz) + [zero_row] * (M.rows - len(nz))
    return ExactMatrix(M.field, M.rows, M.cols, tuple(full)), len(pivots)


def rank(M: ExactMatrix) -> int:
    """Rank without forming the RREF (fraction-free over Q)."""
    if M.field.is_finite:
        return _fp_rank(M.entries, M.cols, M.field.p)
    return _int_rank([_clear_row(r) for r in M.entries], M.cols)


def nullspace(M: ExactMatrix) -> ExactMatrix:
    """Basis (as rows) of {x : Mx = 0}, via free-variable parameterization."""
    if M.field.is_finite:
        nz, pivots = _fp_rref(M.entries, M.cols, M.field.p)
    else:
        nz, pivots = _rat_rref(M.entries, M.cols)
    f = M.field
    pivot_set = set(pivots)
    free_cols = [c for c in range(M.cols) if c not in pivot_set]
    rows = []
    for fc in free_cols:
        vec = [f.zero()] * M.cols
        vec[fc] = f.one()
        for i, pc in enumerate(pivots):
            vec[pc] = f.neg(nz[i][fc])
        rows.append(tuple(vec))
    return ExactMatrix(f, len(rows), M.cols, tuple(rows))


# ---------------------------------------------------------------------------
# Subspaces.
# ---------------------------------------------------------------------------


def _is_rref(entries, ncols: int) -> bool:
    last = -1
    pivots = []
    for r in entries:
        pc = next((j for j, x in enumerate(r) if x != 0), None)
        if pc is None or pc <= last or r[pc] != 1:
            return False
        pivots.append(pc)
        last = pc
    for i, pc in enumerate(pivots):
        for k in range(len(entries)):
            if k != i and entries[k][pc] != 0:
                return False
    return True


@dataclass(frozen=True)
class Subspace:
    """A subspace of field^ambient, held as its unique RREF basis."""

    field: FieldSpec
    ambient: int
    basis: ExactMatrix

    def __post_init__(self):
        if self.basis.cols != self.ambient or self.basis.field != self.field:
            raise DimensionMismatch("basis shape does not match ambient space")
        if not _is_rref(self.basis.entries, self.ambient):
            raise ValueError("subspace basis must be in RREF; use span()")

    @property
    def dim(self) -> int:
        return self.basis.rows

    def to_json_dict(self) -> dict:
        return {"ambient": self.ambient, "dim": self.dim, "basis": self.basis.to_json_dict()}

    @classmethod
    def from_json_dict(cls, d: dict) -> "Subspace":
        basis = ExactMatrix.from_json_dict(d["basis"])
        return cls(basis.field, d["ambient"], basis)


def zero_subspace(field: FieldSpec, ambient: int) -> Subspace:
    return Subspace(field, ambient, ExactMatrix(field, 0, ambient, ()))


def full_subspace(field: FieldSpec, ambient: int) -> Subspace:
    return Subspace(field, ambient, ExactMatrix.identity(field, ambient))


def span(vectors: ExactMatrix) -> Subspace:
    """Canonical subspace spanned by the rows of `vectors`."""
    if vectors.field.is_finite:
        nz, _ = _fp_rref(vectors.entries, vectors.cols, vectors.field.p)
    else:
        nz, _ = _rat_rref(vectors.entries, vectors.cols)
    basis = ExactMatrix(vectors.field, len(nz), vectors.cols, tuple(nz))
    return Subspace(vectors.field, vectors.cols, basis)


def span_rows(field: FieldSpec, ambient: int, rows) -> Subspace:
    return span(ExactMatrix.from_rows(field, rows, ambient))


def _check_same_space(W1: Subspace, W2: Subspace) -> None:
    if W1.field != W2.field:
        raise FieldMismatch(f"{W1.field} vs {W2.field}")
    if W1.ambient != W2.ambient:
        raise DimensionMismatch(f"ambient {W1.ambient} vs {W2.ambient}")


def subspace_sum(W1: Subspace, W2: Subspace) -> Subspace:
    """W1 + W2 as the canonical span of the concatenated bases."""
    _check_same_space(W1, W2)
    rows = W1.basis.entries + W2.basis.entries
    return span(ExactMatrix(W1.field, len(rows), W1.ambient, rows))


def subspace_intersection(W1: Subspace, W2: Subspace) -> Subspace:
    """W1 ∩ W2 by the kernel method (independent of subspace_sum).

    A combination a·B1 = -b·B2 lies in both spaces exactly when (a, b) is
    in the kernel of [B1; B2] transposed, so the intersection is the image
    of that kernel under (a, b) -> a·B1.
    """
    _check_same_space(W1, W2)
    stacked = ExactMatrix(
        W1.field,
        W1.dim + W2.dim,
        W1.ambient,
        W1.basis.entries + W2.basis.entries,
    )
    ker = nullspace(stacked.transpose())
    f = W1.field
    rows = []
    for u in ker.entries:
        a = u[: W1.dim]
        vec = [f.zero()] * W1.ambient
        for coeff, brow in zip(a, W1.basis.entries):
            if coeff == 0:
                continue
            for j, x in enumerate(brow):
                vec[j] = f.add(vec[j], f.mul(coeff, x))
        rows.append(tuple(vec))
    return span(ExactMatrix(f, len(rows), W1.ambient, tuple(rows)))


def apply_operator(T: ExactMatrix, W: Subspace) -> Subspace:
    """The image subspace T·W = span{T w : w in basis of W}."""
    if T.field != W.field:
        raise FieldMismatch(f"{T.field} vs {W.field}")
    if not T.is_square or T.cols != W.ambient:
        raise DimensionMismatch(f"operator {T.rows}x{T.cols} on ambient {W.ambient}")
    rows = tuple(T.apply(w) for w in W.basis.entries)
    return span(ExactMatrix(W.field, len(rows), W.ambient, rows))


def _ops_of(fam) -> tuple:
    ops = getattr(fam, "ops", fam)
    return tuple(ops)


def expansion_dim(fam, W: Subspace) -> int:
    """dim(W + T_1 W + ... + T_k W), exactly.

    `fam` is an OperatorFamily or any sequence of square ExactMatrix over
    the field of W.  The count is the rank of the stacked (k+1)*m row
    matrix; over Q the stack is cleared to integers and ranked
    fraction-free, which gives the identical exact answer.
    """
    ops = _ops_of(fam)
    for T in ops:
        if T.field != W.field:
            raise FieldMismatch(f"{T.field} vs {W.field}")
        if not T.is_square or T.cols != W.ambient:
            raise DimensionMismatch(f"operator {T.rows}x{T.cols} on ambient {W.ambient}")
    if W.dim == 0:
        return 0
    n = W.ambient
    if W.field.is_finite:
        p = W.field.p
        base = [[int(x) for x in r] for r in W.basis.entries]
        tmats = [[[int(x) for x in r] for r in T.entries] for T in ops]
        stacked = list(base)
        for tm in tmats:
            for w in base:
                stacked.append([sum(a * b for a, b in zip(row, w)) % p for row in tm])
        return _fp_rank(stacked, n, p)
    base = [_clear_row(r) for r in W.basis.entries]
    tmats = []
    for T in ops:
        den = 1
        for r in T.entries:
            for x in r:
                den = lcm(den, x.denominator)
        tmats.append([[int(x * den) for x in r] for r in T.entries])
    stacked = [list(r) for r in base]
    for tm in tmats:
        for w in base:
            img = [sum(a * b for a, b in zip(row, w)) for row in tm]
            g = 0
            for v in img:
                g = gcd(g, v)
            if g > 1:
                img = [v // g for v in img]
            stacked.append(img)
    return _int_rank(stacked, n)


# ---------------------------------------------------------------------------
# Enumeration of subspaces over F_p.
# ---------------------------------------------------------------------------


def gaussian_binomial(n: int, d: int, q: int) -> int:
    """Number of d-dimensional subspaces of F_q^n."""
    if d < 0 or d > n:
        return 0
    num = 1
    den = 1
    for i in range(d):
        num *= q ** (n - i) - 1
        den *= q ** (i + 1) - 1
    assert num % den == 0
    return num // den


def subspace_count(p: int, n: int, d: int) -> int:
    return gaussian_binomial(n, d, p)


def _free_cells(pattern: tuple[int, ...], n: int) -> list[tuple[int, int]]:
    pivot_set = set(pattern)
    return [
        (r, c)
        for r in range(len(pattern))
        for c in range(pattern[r] + 1, n)
        if c not in pivot_set
    ]


def _iter_rref_rows_for_pattern(p: int, n: int, pattern: tuple[int, ...]):
    """All RREF bases with the given pivot columns, free entries in
    lexicographic order (free cells row-major, first cell most significant)."""
    d = len(pattern)
    cells = _free_cells(pattern, n)
    template = [[0] * n for _ in range(d)]
    for r, c in enumerate(pattern):
        template[r][c] = 1
    for assignment in itertools.product(range(p), repeat=len(cells)):
        rows = [list(r) for r in template]
        for (r, c), v in zip(cells, assignment):
            rows[r][c] = v
        yield tuple(tuple(r) for r in rows)


def _iter_rref_rows(p: int, n: int, d: int):
    """Every d-dimensional RREF basis over F_p, exactly once, in the
    documented order: pivot patterns lexicographic, then free entries
    lexicographic."""
    if d == 0:
        yield ()
        return
    for pattern in itertools.combinations(range(n), d):
        yield from _iter_rref_rows_for_pattern(p, n, pattern)


def enumerate_subspaces(field: FieldSpec, n: int, d: int, budget: int = DEFAULT_BUDGET):
    """Stream every d-dimensional subspace of F_p^n, canonical and ordered.

    Raises BudgetExceeded before yielding anything if the Gaussian-binomial
    count estimate is over `budget`.
    """
    if not field.is_finite:
        raise InfiniteField("enumeration needs a finite field")
    if d < 0 or d > n:
        raise DimensionMismatch(f"0 <= d <= n violated: d={d}, n={n}")
    count = gaussian_binomial(n, d, field.p)
    if count > budget:
        raise BudgetExceeded(f"{count} subspaces exceeds budget {budget}")
    for rows in _iter_rref_rows(field.p, n, d):
        basis = ExactMatrix(field, len(rows), n, rows)
        yield Subspace(field, n, basis)


# ---------------------------------------------------------------------------
# Seeded random subspaces.
# ---------------------------------------------------------------------------


def random_subspace(
    field: FieldSpec,
    n: int,
    d: int,
    seed,
    bound: int = DEFAULT_RATIONAL_BOUND,
    max_attempts: int = 1000,
) -> Subspace:
    """A seeded random d-dimensional subspace (deterministic given seed).

    Over Q the raw basis entries are uniform integers in [-bound, bound];
    over F_p they are uniform residues.  Matrices are resampled whole until
    the rank is d.
    """
    if d < 0 or d > n:
        raise DimensionMismatch(f"0 <= d <= n violated: d={d}, n={n}")
    if d == 0:
        return zero_subspace(field, n)
    rng = random.Random(seed)
    for _ in range(max_attempts):
        if field.is_finite:
            rows = [[rng.randrange(field.p) for _ in range(n)] for _ in range(d)]
        else:
            rows = [[rng.randint(-bound, bound) for _ in range(n)] for _ in range(d)]
        W = span_rows(field, n, rows)
        if W.dim == d:
            return W
    raise InternalError(f"no rank-{d} sample in {max_attempts} attempts")


# ---------------------------------------------------------------------------
# Matrix interchange (JSON with string entries; never floats).
# ---------------------------------------------------------------------------


def matrix_to_json(M: ExactMatrix) -> dict:
    return M.to_json_dict()


def matrix_from_json(d: dict) -> ExactMatrix:
    return ExactMatrix.from_json_dict(d)
