"""Builders for the operator families the toolkit certifies.

Permutation conventions used throughout: an action stores, per generator,
the array ``img`` with ``img[i]`` = index of the image of point i.  The
matrix of a permutation sends basis vector e_i to e_{img[i]}, so the matrix
of "g then h" is matrix(h) @ matrix(g); inverse permutations get inverse
matrices.  Mean-zero models use the basis {e_i - e_last : i < last}, which
keeps every operator integer-valued and all dimension counts exact; the
orthonormalized (unitary) model lives in the spectral module and agrees
with this one up to an invertible change of basis, so dimension counts
transfer verbatim.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field as dc_field

from .errors import (
    BudgetExceeded,
    DegreeTooSmall,
    DimensionMismatch,
    DimensionTooSmall,
    FieldMismatch,
    InfiniteField,
    InternalError,
    InvalidPermutation,
    ModularDegeneracy,
    NotPrime,
)
from .fields import GF, QQ, FieldSpec, PolyFp, find_irreducible, is_prime
from .linalg import ExactMatrix, Subspace, rank, span_rows, _fp_rref


@dataclass(frozen=True)
class PermutationAction:
    """A finite point set with one permutation per generator label."""

    points: tuple[str, ...]
    labels: tuple[str, ...]
    images: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(set(self.labels)) != len(self.labels):
            raise InvalidPermutation("generator labels must be distinct")
        if len(self.images) != len(self.labels):
            raise InvalidPermutation("one image array per label")
        n = len(self.points)
        for img in self.images:
            if sorted(img) != list(range(n)):
                raise InvalidPermutation(f"{img} is not a bijection of {n} points")

    def image(self, label: str) -> tuple[int, ...]:
        return self.images[self.labels.index(label)]

    def to_json_dict(self) -> dict:
        return {
            "points": list(self.points),
            "labels": list(self.labels),
            "images": [list(img) for img in self.images],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "PermutationAction":
        return cls(
            tuple(d["points"]),
            tuple(d["labels"]),
            tuple(tuple(img) for img in d["images"]),
        )


def compose_perms(first: tuple[int, ...], then: tuple[int, ...]) -> tuple[int, ...]:
    """The permutation "first, then `then`": i -> then[first[i]]."""
    return tuple(then[i] for i in first)


def invert_perm(img: tuple[int, ...]) -> tuple[int, ...]:
    out = [0] * len(img)
    for i, j in enumerate(img):
        out[j] = i
    return tuple(out)


@dataclass
class OperatorFamily:
    """A finite list of square operators on field^n, with provenance.

    Treat instances as immutable.  `action` is present for families that
    came from a permutation action; the spectral certifier needs it to
    rebuild the unitary model.
    """

    field: FieldSpec
    n: int
    ops: tuple[ExactMatrix, ...]
    labels: tuple[str, ...]
    meta: dict = dc_field(default_factory=dict)
    action: PermutationAction | None = None

    def __post_init__(self):
        self.ops = tuple(self.ops)
        self.labels = tuple(self.labels)
        if len(self.ops) < 1:
            raise DimensionMismatch("a family needs at least one operator")
        if len(self.labels) != len(self.ops):
            raise DimensionMismatch("one label per operator")
        for T in self.ops:
            if T.field != self.field:
                raise FieldMismatch(f"{T.field} vs {self.field}")
            if not T.is_square or T.rows != self.n:
                raise DimensionMismatch(f"operator {T.rows}x{T.cols}, ambient {self.n}")

    @property
    def k(self) -> int:
        return len(self.ops)


# ---------------------------------------------------------------------------
# Mobius action on the projective line over F_p.
# ---------------------------------------------------------------------------


def sl2p_projective_action(p: int) -> PermutationAction:
    """Generators A: z -> z+1 and B: z -> -1/z on {0, ..., p-1, inf}.

    A fixes inf; B swaps 0 and inf and acts by z -> -z^{-1} elsewhere.
    """
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    points = tuple(str(i) for i in range(p)) + ("inf",)
    inf = p
    a_img = tuple((z + 1) % p for z in range(p)) + (inf,)
    b_list = [0] * (p + 1)
    b_list[0] = inf
    b_list[inf] = 0
    for z in range(1, p):
        b_list[z] = (-pow(z, -1, p)) % p
    return PermutationAction(points, ("A", "B"), (a_img, tuple(b_list)))


def perm_to_sumzero_family(
    act: PermutationAction,
    field: FieldSpec = QQ,
    meta: dict | None = None,
) -> OperatorFamily:
    """Restrict the permutation matrices to the mean-zero subspace.

    In the basis {e_i - e_last : i < last} every operator has integer
    entries.  Rejected when the characteristic divides the point count,
    because then the model contains an invariant vector.
    """
    N = len(act.points)
    if N < 2:
        raise DimensionTooSmall("need at least 2 points")
    if field.is_finite and N % field.p == 0:
        raise ModularDegeneracy(f"char {field.p} divides point count {N}")
    n = N - 1
    ops = []
    for img in act.images:
        last_img = img[N - 1]
        rows = [[0] * n for _ in range(n)]
        for i in range(n):
            if img[i] != N - 1:
                rows[img[i]][i] += 1
            if last_img != N - 1:
                rows[last_img][i] -= 1
        ops.append(ExactMatrix.from_rows(field, rows, n))
    info = dict(meta or {"construction": "perm-sumzero", "params": {}})
    return OperatorFamily(field, n, tuple(ops), act.labels, info, action=act)


def sl2p_family(p: int, field: FieldSpec = QQ) -> OperatorFamily:
    """The two mean-zero operators of the projective-line action (n = p)."""
    act = sl2p_projective_action(p)
    return perm_to_sumzero_family(
        act, field, {"construction": "sl2p", "params": {"p": p}}
    )


# ---------------------------------------------------------------------------
# SL_d generators and their finite projective quotients.
# ---------------------------------------------------------------------------


def sld_generators(d: int) -> tuple[ExactMatrix, ExactMatrix]:
    """The elementary generator A (e1 -> e1+e2, rest fixed) and the signed
    cycle B (e_i -> e_{i+1}, e_d -> (-1)^(d-1) e_1), both determinant 1."""
    if d < 3:
        raise DimensionTooSmall(f"d must be >= 3, got {d}")
    a_rows = [[1 if i == j else 0 for j in range(d)] for i in range(d)]
    a_rows[1][0] = 1
    b_rows = [[0] * d for _ in range(d)]
    for i in range(d - 1):
        b_rows[i + 1][i] = 1
    b_rows[0][d - 1] = (-1) ** (d - 1)
    A = ExactMatrix.from_rows(QQ, a_rows, d)
    B = ExactMatrix.from_rows(QQ, b_rows, d)
    return A, B


def projective_points(p: int, d: int) -> list[tuple[int, ...]]:
    """Canonical representatives of lines in F_p^d (first nonzero entry 1),
    ordered lexicographically."""
    pts = []
    for lead in range(d):
        for tail in itertools.product(range(p), repeat=d - lead - 1):
            pts.append((0,) * lead + (1,) + tail)
    pts.sort()
    return pts


def _canonicalize_line(vec: tuple[int, ...], p: int) -> tuple[int, ...]:
    for x in vec:
        if x:
            inv = pow(x, -1, p)
            return tuple(v * inv % p for v in vec)
    raise InternalError("zero vector has no line")


def sld_mod_p_projective_action(d: int, p: int, max_points: int = 2048) -> PermutationAction:
    """Reduce the SL_d generators mod p and act on projective points."""
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    A, B = sld_generators(d)
    npts = (p**d - 1) // (p - 1)
    if npts > max_points:
        raise BudgetExceeded(f"{npts} projective points exceeds cap {max_points}")
    pts = projective_points(p, d)
    index = {v: i for i, v in enumerate(pts)}
    images = []
    for M in (A, B):
        rows = [[int(x) % p for x in r] for r in M.entries]
        img = []
        for v in pts:
            w = tuple(sum(a * b for a, b in zip(row, v)) % p for row in rows)
            img.append(index[_canonicalize_line(w, p)])
        images.append(tuple(img))
    labels = tuple(",".join(str(x) for x in v) for v in pts)
    return PermutationAction(labels, ("A", "B"), tuple(images))


def sld_mod_p_projective_family(
    d: int, p: int, field: FieldSpec = QQ, max_points: int = 2048
) -> OperatorFamily:
    act = sld_mod_p_projective_action(d, p, max_points)
    return perm_to_sumzero_family(
        act, field, {"construction": "sld-mod-p", "params": {"d": d, "p": p}}
    )


# ---------------------------------------------------------------------------
# Symmetric group standard representation.
# ---------------------------------------------------------------------------


def symmetric_standard_family(
    n: int,
    gens: list[tuple[int, ...]] | None = None,
    field: FieldSpec = QQ,
) -> OperatorFamily:
    """Mean-zero model of a permutation action on {1..n}.

    `gens` lists image tuples in 1-indexed one-line notation; the default
    pair is the transposition (1 2) and the full cycle (1 2 ... n).
    """
    if n < 2:
        raise DimensionTooSmall("need n >= 2 points")
    if gens is None:
        transposition = (2, 1) + tuple(range(3, n + 1))
        cycle = tuple(range(2, n + 1)) + (1,)
        gens = [transposition, cycle] if n > 2 else [transposition, (2, 1)]
    images = []
    for g in gens:
        if sorted(g) != list(range(1, n + 1)):
            raise InvalidPermutation(f"{g} is not a permutation of 1..{n}")
        images.append(tuple(x - 1 for x in g))
    labels = tuple(f"s{i+1}" for i in range(len(images)))
    act = PermutationAction(tuple(str(i) for i in range(1, n + 1)), labels, tuple(images))
    return perm_to_sumzero_family(
        act,
        field,
        {"construction": "sym-standard", "params": {"n": n, "gens": [list(g) for g in gens]}},
    )


# ---------------------------------------------------------------------------
# Companion-matrix families (the slow-expansion witnesses).
# ---------------------------------------------------------------------------


def companion_matrix(f: PolyFp) -> ExactMatrix:
    """Multiplication by x on F_p[x]/(f), in the basis 1, x, ..., x^{n-1}."""
    if not f.is_monic or f.degree < 1:
        raise DegreeTooSmall("companion matrix needs a monic polynomial of degree >= 1")
    n = f.degree
    p = f.p
    rows = [[0] * n for _ in range(n)]
    for j in range(n - 1):
        rows[j + 1][j] = 1
    for i in range(n):
        rows[i][n - 1] = (-f.coeffs[i]) % p
    return ExactMatrix.from_rows(GF(p), rows, n)


def companion_counterexample(
    p: int, n: int, include_constant: bool = True
) -> tuple[OperatorFamily, Subspace]:
    """Single multiplication-by-x operator plus the low-monomial witness.

    With the constant monomial included the witness has dimension
    floor(n/2) and expands by exactly one dimension, so its ratio is
    1 + 1/floor(n/2); the `include_constant=False` variant starts the
    span at x instead (dimension floor(n/2) - 1, same one-dimension
    growth, slightly worse ratio).
    """
    if n < 4:
        raise DegreeTooSmall(f"need degree >= 4, got {n}")
    f = find_irreducible(p, n)
    C = companion_matrix(f)
    gfp = GF(p)
    m = n // 2
    start = 0 if include_constant else 1
    rows = []
    for j in range(start, m):
        e = [0] * n
        e[j] = 1
        rows.append(e)
    witness = span_rows(gfp, n, rows)
    fam = OperatorFamily(
        gfp,
        n,
        (C,),
        ("x",),
        {
            "construction": "companion",
            "params": {"p": p, "n": n, "include_constant": include_constant},
            "modulus": str(f),
        },
    )
    return fam, witness


def matrix_algebra_counterexample(
    p: int, n: int, d: int, include_constant: bool = True
) -> tuple[OperatorFamily, Subspace]:
    """Block version: companion operator tensor I_d on F_p^{nd}; the witness
    tensors up too, so the expansion ratio is independent of d."""
    if n < 4:
        raise DegreeTooSmall(f"need degree >= 4, got {n}")
    if d < 1:
        raise DimensionTooSmall(f"need d >= 1, got {d}")
    base_fam, base_wit = companion_counterexample(p, n, include_constant)
    gfp = GF(p)
    C = base_fam.ops[0].kron(ExactMatrix.identity(gfp, d))
    rows = []
    for w in base_wit.basis.entries:
        for t in range(d):
            row = [0] * (n * d)
            for j, x in enumerate(w):
                row[j * d + t] = int(x)
            rows.append(row)
    witness = span_rows(gfp, n * d, rows)
    fam = OperatorFamily(
        gfp,
        n * d,
        (C,),
        ("x",),
        {
            "construction": "matrix-companion",
            "params": {"p": p, "n": n, "d": d, "include_constant": include_constant},
            "modulus": base_fam.meta["modulus"],
        },
    )
    return fam, witness


# ---------------------------------------------------------------------------
# Random families.
# ---------------------------------------------------------------------------


def random_family(
    field: FieldSpec,
    n: int,
    k: int,
    seed,
    bound: int = 10,
    max_attempts: int = 1000,
) -> OperatorFamily:
    """k seeded random invertible operators on field^n."""
    if k < 1:
        raise DimensionMismatch("k must be >= 1")
    rng = random.Random(seed)
    ops = []
    for _ in range(k):
        for _ in range(max_attempts):
            if field.is_finite:
                rows = [[rng.randrange(field.p) for _ in range(n)] for _ in range(n)]
            else:
                rows = [[rng.randint(-bound, bound) for _ in range(n)] for _ in range(n)]
            M = ExactMatrix.from_rows(field, rows, n)
            if rank(M) == n:
                ops.append(M)
                break
        else:
            raise InternalError(f"no invertible sample in {max_attempts} attempts")
    labels = tuple(f"T{i+1}" for i in range(k))
    return OperatorFamily(
        field,
        n,
        tuple(ops),
        labels,
        {
            "construction": "random",
            "params": {"field": str(field), "n": n, "k": k, "seed": seed, "bound": bound},
        },
    )


# ---------------------------------------------------------------------------
# Group closure (sanity checks on finite quotients).
# ---------------------------------------------------------------------------


def fp_matrix_inverse(M: ExactMatrix) -> ExactMatrix:
    """Inverse of a square matrix over F_p via Gauss-Jordan."""
    if not M.field.is_finite:
        raise InfiniteField("modular inverse needs a finite field")
    if not M.is_square:
        raise DimensionMismatch("inverse needs a square matrix")
    p = M.field.p
    n = M.rows
    aug = [
        [int(x) % p for x in M.entries[i]] + [1 if j == i else 0 for j in range(n)]
        for i in range(n)
    ]
    reduced, pivots = _fp_rref(aug, 2 * n, p)
    if pivots != list(range(n)):
        raise DimensionMismatch("matrix is singular")
    inv_rows = [r[n:] for r in reduced]
    return ExactMatrix.from_rows(M.field, inv_rows, n)


def closure_size(
    generators: list[ExactMatrix],
    include_inverses: bool = True,
    max_size: int = 10**7,
) -> int:
    """Size of the group generated by matrices over F_p (BFS closure)."""
    if not generators:
        raise DimensionMismatch("need at least one generator")
    field = generators[0].field
    if not field.is_finite:
        raise InfiniteField("closure enumeration needs a finite field")
    p = field.p
    n = generators[0].rows
    gens = [tuple(tuple(int(x) % p for x in r) for r in M.entries) for M in generators]
    if include_inverses:
        for M in generators:
            inv = fp_matrix_inverse(M)
            gens.append(tuple(tuple(int(x) for x in r) for r in inv.entries))
    ident = tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))

    def mul(a, b):
        bt = list(zip(*b))
        return tuple(
            tuple(sum(x * y for x, y in zip(row, col)) % p for col in bt) for row in a
        )

    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for g in gens:
            for x in frontier:
                y = mul(g, x)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
                    if len(seen) > max_size:
                        raise BudgetExceeded(f"closure exceeded {max_size} elements")
        frontier = nxt
    return len(seen)


# ---------------------------------------------------------------------------
# Family serialization (embeds the matrix interchange format).
# ---------------------------------------------------------------------------

FAMILY_FORMAT = "expandim-family/1"


def family_to_json(fam: OperatorFamily, witness: Subspace | None = None) -> dict:
    d = {
        "format": FAMILY_FORMAT,
        "field": "Fp" if fam.field.is_finite else "Q",
        "n": fam.n,
        "k": fam.k,
        "labels": list(fam.labels),
        "ops": [T.to_json_dict() for T in fam.ops],
        "meta": fam.meta,
    }
    if fam.field.is_finite:
        d["p"] = fam.field.p
    if fam.action is not None:
        d["action"] = fam.action.to_json_dict()
    if witness is not None:
        d["witness"] = witness.to_json_dict()
    return d


def family_from_json(d: dict) -> tuple[OperatorFamily, Subspace | None]:
    if d.get("format") != FAMILY_FORMAT:
        raise ValueError(f"not a family file (format={d.get('format')!r})")
    field = GF(d["p"]) if d["field"] == "Fp" else QQ
    ops = tuple(ExactMatrix.from_json_dict(m) for m in d["ops"])
    action = PermutationAction.from_json_dict(d["action"]) if d.get("action") else None
    fam = OperatorFamily(
        field, d["n"], ops, tuple(d["labels"]), dict(d.get("meta", {})), action=action
    )
    witness = Subspace.from_json_dict(d["witness"]) if d.get("witness") else None
    return fam, witness
