"""Exact scalar domains: arbitrary-precision rationals and prime fields F_p.

Rationals are stdlib ``Fraction`` values (always in lowest terms, positive
denominator), prime-field residues are plain ints in ``[0, p)``.  Nothing in
this module ever rounds.  Univariate polynomial arithmetic over F_p lives
here too, enough to test irreducibility and scan for irreducible polynomials.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

from .errors import (
    DivisionByZero,
    FieldMismatch,
    NotPrime,
    ZeroOrConstantPolynomial,
)

Value = Fraction | int

RATIONALS = "rationals"
PRIME = "prime"


def is_prime(n: int) -> bool:
    """Primality by trial division; moduli here are small."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    for d in range(3, isqrt(n) + 1, 2):
        if n % d == 0:
            return False
    return True


@dataclass(frozen=True)
class FieldSpec:
    """An exact scalar domain: the rationals, or F_p for a prime p."""

    kind: str
    p: int | None = None

    def __post_init__(self):
        if self.kind == RATIONALS:
            if self.p is not None:
                raise NotPrime("rationals carry no modulus")
        elif self.kind == PRIME:
            if self.p is None or not is_prime(self.p):
                raise NotPrime(f"modulus {self.p!r} is not prime")
        else:
            raise ValueError(f"unknown field kind {self.kind!r}")

    @property
    def is_finite(self) -> bool:
        return self.kind == PRIME

    def zero(self) -> Value:
        return 0 if self.is_finite else Fraction(0)

    def one(self) -> Value:
        return 1 if self.is_finite else Fraction(1)

    def coerce(self, x) -> Value:
        """Map an int/Fraction/"a/b" string into this field, reduced."""
        if self.is_finite:
            if isinstance(x, str):
                x = int(x)
            if isinstance(x, Fraction):
                if x.denominator % self.p == 0:
                    raise DivisionByZero(f"denominator divisible by {self.p}")
                return x.numerator * pow(x.denominator, -1, self.p) % self.p
            return int(x) % self.p
        return Fraction(x)

    def add(self, a: Value, b: Value) -> Value:
        return (a + b) % self.p if self.is_finite else a + b

    def sub(self, a: Value, b: Value) -> Value:
        return (a - b) % self.p if self.is_finite else a - b

    def mul(self, a: Value, b: Value) -> Value:
        return (a * b) % self.p if self.is_finite else a * b

    def neg(self, a: Value) -> Value:
        return (-a) % self.p if self.is_finite else -a

    def inv(self, a: Value) -> Value:
        if a == 0:
            raise DivisionByZero("zero has no inverse")
        return pow(a, -1, self.p) if self.is_finite else 1 / a

    def div(self, a: Value, b: Value) -> Value:
        if b == 0:
            raise DivisionByZero("division by zero")
        return a * pow(b, -1, self.p) % self.p if self.is_finite else a / b

    def format(self, a: Value) -> str:
        return str(a)

    def parse(self, s: str) -> Value:
        return self.coerce(Fraction(s) if not self.is_finite else int(s))

    def __str__(self) -> str:
        return "Q" if not self.is_finite else f"F{self.p}"


QQ = FieldSpec(RATIONALS)


def GF(p: int) -> FieldSpec:
    """The prime field F_p (p verified prime by trial division)."""
    return FieldSpec(PRIME, p)


@dataclass(frozen=True)
class Scalar:
    """A field element tagged with its field, for the public surface.

    Matrix internals store raw values; this wrapper is what operations
    that mix user-provided scalars go through, so field mismatches fail
    loudly instead of silently coercing.
    """

    field: FieldSpec
    value: Value

    def _check(self, other: "Scalar") -> None:
        if self.field != other.field:
            raise FieldMismatch(f"{self.field} vs {other.field}")

    def __add__(self, other: "Scalar") -> "Scalar":
        self._check(other)
        return Scalar(self.field, self.field.add(self.value, other.value))

    def __sub__(self, other: "Scalar") -> "Scalar":
        self._check(other)
        return Scalar(self.field, self.field.sub(self.value, other.value))

    def __mul__(self, other: "Scalar") -> "Scalar":
        self._check(other)
        return Scalar(self.field, self.field.mul(self.value, other.value))

    def __truediv__(self, other: "Scalar") -> "Scalar":
        self._check(other)
        return Scalar(self.field, self.field.div(self.value, other.value))

    def __neg__(self) -> "Scalar":
        return Scalar(self.field, self.field.neg(self.value))

    def __str__(self) -> str:
        return self.field.format(self.value)


def scalar_arith(a: Scalar, b: Scalar, op: str) -> Scalar:
    """Exact field arithmetic: op in {"add", "sub", "mul", "div"}."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown op {op!r}")


# ---------------------------------------------------------------------------
# Univariate polynomials over F_p.
#
# Coefficients are ascending powers: coeffs[i] multiplies x**i.  The leading
# coefficient is nonzero except for the zero polynomial (empty tuple).
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PolyFp:
    """A polynomial over F_p in canonical (trimmed) form."""

    p: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if not is_prime(self.p):
            raise NotPrime(f"modulus {self.p} is not prime")
        if any(not (0 <= c < self.p) for c in self.coeffs):
            raise ValueError("coefficients must be reduced residues")
        if self.coeffs and self.coeffs[-1] == 0:
            raise ValueError("leading coefficient must be nonzero")

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def is_monic(self) -> bool:
        return bool(self.coeffs) and self.coeffs[-1] == 1

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        terms = []
        for i in range(self.degree, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            if i == 0:
                terms.append(str(c))
            else:
                x = "x" if i == 1 else f"x^{i}"
                terms.append(x if c == 1 else f"{c}{x}")
        return " + ".join(terms)


def poly(p: int, coeffs) -> PolyFp:
    """Build a PolyFp from ascending coefficients, reducing and trimming."""
    cs = [c % p for c in coeffs]
    while cs and cs[-1] == 0:
        cs.pop()
    return PolyFp(p, tuple(cs))


def poly_x(p: int) -> PolyFp:
    return poly(p, [0, 1])


def _check_same_p(f: PolyFp, g: PolyFp) -> None:
    if f.p != g.p:
        raise FieldMismatch(f"F{f.p} vs F{g.p}")


def poly_add(f: PolyFp, g: PolyFp) -> PolyFp:
    _check_same_p(f, g)
    n = max(len(f.coeffs), len(g.coeffs))
    a = list(f.coeffs) + [0] * (n - len(f.coeffs))
    b = list(g.coeffs) + [0] * (n - len(g.coeffs))
    return poly(f.p, [x + y for x, y in zip(a, b)])


def poly_sub(f: PolyFp, g: PolyFp) -> PolyFp:
    _check_same_p(f, g)
    n = max(len(f.coeffs), len(g.coeffs))
    a = list(f.coeffs) + [0] * (n - len(f.coeffs))
    b = list(g.coeffs) + [0] * (n - len(g.coeffs))
    return poly(f.p, [x - y for x, y in zip(a, b)])


def poly_mul(f: PolyFp, g: PolyFp) -> PolyFp:
    _check_same_p(f, g)
    if f.is_zero or g.is_zero:
        return poly(f.p, [])
    out = [0] * (len(f.coeffs) + len(g.coeffs) - 1)
    for i, a in enumerate(f.coeffs):
        if a == 0:
            continue
        for j, b in enumerate(g.coeffs):
            out[i + j] += a * b
    return poly(f.p, out)


def poly_divmod(f: PolyFp, g: PolyFp) -> tuple[PolyFp, PolyFp]:
    _check_same_p(f, g)
    if g.is_zero:
        raise DivisionByZero("polynomial division by zero")
    p = f.p
    rem = list(f.coeffs)
    dg = g.degree
    lead_inv = pow(g.coeffs[-1], -1, p)
    quo = [0] * max(len(rem) - dg, 0)
    for i in range(len(rem) - dg - 1, -1, -1):
        c = rem[i + dg] % p
        if c == 0:
            continue
        q = c * lead_inv % p
        quo[i] = q
        for j, b in enumerate(g.coeffs):
            rem[i + j] = (rem[i + j] - q * b) % p
    return poly(p, quo), poly(p, rem)


def poly_mod(f: PolyFp, g: PolyFp) -> PolyFp:
    return poly_divmod(f, g)[1]


def poly_gcd(f: PolyFp, g: PolyFp) -> PolyFp:
    """Monic gcd via the Euclidean algorithm."""
    _check_same_p(f, g)
    a, b = f, g
    while not b.is_zero:
        a, b = b, poly_mod(a, b)
    if a.is_zero:
        return a
    inv = pow(a.coeffs[-1], -1, a.p)
    return poly(a.p, [c * inv for c in a.coeffs])


def poly_mulmod(f: PolyFp, g: PolyFp, mod: PolyFp) -> PolyFp:
    return poly_mod(poly_mul(f, g), mod)


def poly_powmod(base: PolyFp, e: int, mod: PolyFp) -> PolyFp:
    """base**e mod `mod` by repeated squaring."""
    result = poly(base.p, [1])
    b = poly_mod(base, mod)
    while e > 0:
        if e & 1:
            result = poly_mulmod(result, b, mod)
        b = poly_mulmod(b, b, mod)
        e >>= 1
    return result


def _monic_polys(p: int, degree: int):
    """All monic polynomials of the given degree, ascending in the integer
    encoding sum(c_i * p**i) of the lower coefficients."""
    for code in range(p**degree):
        cs = []
        c = code
        for _ in range(degree):
            cs.append(c % p)
            c //= p
        cs.append(1)
        yield PolyFp(p, tuple(cs))


def _is_irreducible_gcd(f: PolyFp) -> bool:
    # f (degree n) has a nontrivial factor iff it has an irreducible factor
    # of degree <= n/2, iff gcd(f, x^{p^i} - x) != 1 for some i <= n/2.
    p, n = f.p, f.degree
    x = poly_x(p)
    for i in range(1, n // 2 + 1):
        h = poly_powmod(x, p**i, f)
        g = poly_gcd(f, poly_sub(h, x))
        if g.degree != 0:
            return False
    return True


def _is_irreducible_trial(f: PolyFp) -> bool:
    # Exhaustive trial division; exponential in degree, used as the
    # independent cross-check route at small degree.
    p, n = f.p, f.degree
    for d in range(1, n // 2 + 1):
        for g in _monic_polys(p, d):
            if poly_mod(f, g).is_zero:
                return False
    return True


def poly_is_irreducible(f: PolyFp, method: str = "gcd") -> bool:
    """True iff f has no nontrivial factor over F_p.

    method="gcd" checks gcd(f, x^{p^i} - x) for i up to deg(f)/2 with
    repeated-squaring exponentiation; method="trial" divides by every
    monic polynomial of degree up to deg(f)/2.  The two agree (tested for
    degrees <= 8); "trial" is exponential and should stay small.
    """
    if f.degree < 1:
        raise ZeroOrConstantPolynomial(f"degree {f.degree} polynomial")
    if method == "gcd":
        return _is_irreducible_gcd(f)
    if method == "trial":
        return _is_irreducible_trial(f)
    raise ValueError(f"unknown method {method!r}")


def find_irreducible(p: int, n: int) -> PolyFp:
    """The smallest monic irreducible of degree n over F_p.

    "Smallest" orders monic polynomials by their lower-coefficient integer
    encoding sum(c_i * p**i), so the scan is deterministic.
    """
    if n < 1:
        raise ZeroOrConstantPolynomial("degree must be >= 1")
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    for f in _monic_polys(p, n):
        if poly_is_irreducible(f):
            return f
    raise AssertionError("unreachable: an irreducible of every degree exists")
