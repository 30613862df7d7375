"""Finite fields F_q = F_p[w]/(g(w)) in a fixed power basis.

Elements are stored as integer codes ``sum(c_i * p**i)`` of their
coordinates ``(c_0, ..., c_{f-1})`` with respect to ``1, w, ..., w^{f-1}``.
The defining polynomial is a Conway polynomial for the small fields in
``CONWAY`` and the first primitive polynomial in lexicographic order
otherwise, so a given ``(p, f)`` always yields the same coordinates.
"""

from __future__ import annotations

import functools
import re
from typing import Iterable, Sequence

import numpy as np

from .errors import NoSolution

# Conway polynomials, coefficients low -> high (monic, leading 1 omitted).
CONWAY: dict[tuple[int, int], tuple[int, ...]] = {
    (2, 1): (1,),
    (2, 2): (1, 1),
    (2, 3): (1, 1, 0),
    (2, 4): (1, 1, 0, 0),
    (2, 5): (1, 0, 1, 0, 0),
    (2, 6): (1, 1, 0, 1, 1, 0),
    (3, 1): (1,),
    (3, 2): (2, 2),
    (3, 3): (1, 2, 0),
    (3, 4): (2, 0, 0, 2),
    (5, 1): (3,),
    (5, 2): (2, 4),
    (5, 3): (3, 3, 0),
    (7, 1): (4,),
    (7, 2): (3, 6),
}


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def _prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def _polymulmod(a: Sequence[int], b: Sequence[int], low: Sequence[int], p: int) -> list[int]:
    """Multiply two residues mod the monic polynomial x^f + sum(low[i] x^i)."""
    f = len(low)
    acc = [0] * (2 * f - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                acc[i + j] += ai * bj
    for k in range(2 * f - 2, f - 1, -1):
        c = acc[k] % p
        if c:
            for l in range(f):
                acc[k - f + l] -= c * low[l]
    return [x % p for x in acc[:f]]


def _is_primitive(low: Sequence[int], p: int) -> bool:
    f = len(low)
    q = p**f
    if f == 1:
        root = (-low[0]) % p
        if root == 0:
            return False
        return all(pow(root, (q - 1) // r, p) != 1 for r in _prime_factors(q - 1)) and pow(root, q - 1, p) == 1

    def power_of_x(e: int) -> list[int]:
        result = [1] + [0] * (f - 1)
        base = [0, 1] + [0] * (f - 2)
        while e:
            if e & 1:
                result = _polymulmod(result, base, low, p)
            base = _polymulmod(base, base, low, p)
            e >>= 1
        return result

    one = [1] + [0] * (f - 1)
    if power_of_x(q - 1) != one:
        return False
    return all(power_of_x((q - 1) // r) != one for r in _prime_factors(q - 1))


def defining_polynomial(p: int, f: int) -> tuple[int, ...]:
    """Low-order coefficients of the monic modulus used for F_{p^f}."""
    if (p, f) in CONWAY:
        return CONWAY[(p, f)]
    # lexicographic search over (c_0, ..., c_{f-1}) read as a base-p integer
    for code in range(p**f):
        low = [(code // p**i) % p for i in range(f)]
        if _is_primitive(low, p):
            return tuple(low)
    raise AssertionError(f"no primitive polynomial of degree {f} over F_{p}")  # pragma: no cover


def solve_mod_p(rows: list[list[int]], rhs: list[int], p: int) -> list[int] | None:
    """Solve the linear system ``rows * x = rhs`` over F_p; return one solution or None."""
    m = len(rows)
    ncols = len(rows[0]) if rows else 0
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, m) if aug[i][c] % p), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        inv = pow(aug[r][c], p - 2, p)
        aug[r] = [(x * inv) % p for x in aug[r]]
        for i in range(m):
            if i != r and aug[i][c] % p:
                fac = aug[i][c]
                aug[i] = [(x - fac * y) % p for x, y in zip(aug[i], aug[r])]
        pivots.append(c)
        r += 1
    if any(all(x % p == 0 for x in row[:-1]) and row[-1] % p for row in aug):
        return None
    x = [0] * ncols
    for i, c in enumerate(pivots):
        x[c] = aug[i][-1]
    return x


def rank_mod_p(vectors: Iterable[Sequence[int]], p: int) -> int:
    rows = [list(v) for v in vectors]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][c] % p), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = pow(rows[rank][c], p - 2, p)
        rows[rank] = [(x * inv) % p for x in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][c] % p:
                fac = rows[i][c]
                rows[i] = [(x - fac * y) % p for x, y in zip(rows[i], rows[rank])]
        rank += 1
    return rank


class GF:
    """The field F_{p^f}; instances are cached per ``(p, f)``."""

    def __new__(cls, p: int, f: int = 1):
        return _gf(p, f)

    @classmethod
    def _create(cls, p: int, f: int) -> "GF":
        if not is_prime(p):
            raise ValueError(f"p={p} is not prime")
        if f < 1:
            raise ValueError("f must be positive")
        self = object.__new__(cls)
        self.p = p
        self.f = f
        self.q = p**f
        self.modulus = defining_polynomial(p, f)
        self._mul_cache: dict[tuple[int, int], int] = {}
        return self

    def __reduce__(self):
        return (GF, (self.p, self.f))

    def __repr__(self) -> str:
        return f"GF({self.p}^{self.f})"

    def modulus_str(self) -> str:
        coeffs = list(self.modulus) + [1]
        terms = []
        for i in range(self.f, -1, -1):
            c = coeffs[i]
            if not c:
                continue
            mon = "" if i == 0 else ("w" if i == 1 else f"w^{i}")
            terms.append(str(c) if not mon else (mon if c == 1 else f"{c}*{mon}"))
        return "+".join(terms)

    # -- code <-> coordinates -------------------------------------------
    def coords(self, code: int) -> tuple[int, ...]:
        p = self.p
        return tuple((code // p**i) % p for i in range(self.f))

    def code(self, coords: Sequence[int]) -> int:
        p = self.p
        return sum((int(c) % p) * p**i for i, c in enumerate(coords))

    def __call__(self, value) -> "FqElement":
        if isinstance(value, FqElement):
            if value.field is not self:
                raise ValueError("element of a different field")
            return value
        if isinstance(value, (int, np.integer)):
            return FqElement(self, self.code([int(value) % self.p]))
        if isinstance(value, str):
            return self.parse(value)
        return FqElement(self, self.code(value))

    @property
    def zero(self) -> "FqElement":
        return FqElement(self, 0)

    @property
    def one(self) -> "FqElement":
        return FqElement(self, 1)

    @property
    def gen(self) -> "FqElement":
        """The class of ``w``; a primitive element of F_q."""
        if self.f == 1:
            return FqElement(self, (-self.modulus[0]) % self.p)
        return FqElement(self, self.p)

    def elements(self):
        for code in range(self.q):
            yield FqElement(self, code)

    def from_code(self, code: int) -> "FqElement":
        """The element with integer code ``code`` (base-p digits are the coordinates)."""
        if not 0 <= code < self.q:
            raise ValueError(f"code {code} out of range for GF({self.p}^{self.f})")
        return FqElement(self, int(code))

    def random_element(self, rng, nonzero: bool = False) -> "FqElement":
        """Uniform element drawn with ``rng.randrange``."""
        return FqElement(self, rng.randrange(1 if nonzero else 0, self.q))

    # -- arithmetic on codes -------------------------------------------
    def add_codes(self, a: int, b: int) -> int:
        if self.f == 1:
            return (a + b) % self.p
        return self.code([x + y for x, y in zip(self.coords(a), self.coords(b))])

    def neg_code(self, a: int) -> int:
        if self.f == 1:
            return (-a) % self.p
        return self.code([-x for x in self.coords(a)])

    def mul_codes(self, a: int, b: int) -> int:
        if self.f == 1:
            return (a * b) % self.p
        key = (a, b) if a <= b else (b, a)
        hit = self._mul_cache.get(key)
        if hit is None:
            hit = self.code(_polymulmod(self.coords(a), self.coords(b), self.modulus, self.p))
            if len(self._mul_cache) < 1 << 16:
                self._mul_cache[key] = hit
        return hit

    def pow_code(self, a: int, e: int) -> int:
        if e < 0:
            a = self.inv_code(a)
            e = -e
        result = 1
        while e:
            if e & 1:
                result = self.mul_codes(result, a)
            a = self.mul_codes(a, a)
            e >>= 1
        return result

    def inv_code(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero in F_q")
        return self.pow_code(a, self.q - 2)

    def frobenius_code(self, a: int, k: int = 1) -> int:
        """a -> a^(p^k); negative k applies the inverse automorphism."""
        k %= self.f
        return self.pow_code(a, self.p**k) if k else a

    # -- parsing / printing --------------------------------------------
    _TERM = re.compile(r"^(?:(\d+)\*?)?(w(?:\^(\d+))?)?$")

    def parse(self, text: str) -> "FqElement":
        """Parse a power-basis literal like ``w^2+2*w+1``."""
        s = text.replace(" ", "")
        if s.startswith("(") and s.endswith(")"):
            s = s[1:-1]
        if not s:
            raise ValueError("empty field literal")
        s = s.replace("-", "+-")
        coords = [0] * self.f
        acc = 0
        for raw in s.split("+"):
            if not raw:
                continue
            sign = 1
            if raw.startswith("-"):
                sign, raw = -1, raw[1:]
            m = self._TERM.match(raw)
            if not m or (m.group(1) is None and m.group(2) is None):
                raise ValueError(f"bad field literal {text!r}")
            c = int(m.group(1)) if m.group(1) is not None else 1
            if m.group(2) is None:
                coords[0] += sign * c
                continue
            e = int(m.group(3)) if m.group(3) is not None else 1
            if e < self.f:
                coords[e] += sign * c
            else:
                acc = self.add_codes(acc, self.mul_codes(self.code([sign * c]), self.pow_code(self.gen.code, e)))
        return FqElement(self, self.add_codes(self.code(coords), acc))

    def format_code(self, code: int) -> str:
        if self.f == 1:
            return str(code)
        parts = []
        for i, c in reversed(list(enumerate(self.coords(code)))):
            if not c:
                continue
            mon = "" if i == 0 else ("w" if i == 1 else f"w^{i}")
            if not mon:
                parts.append(str(c))
            elif c == 1:
                parts.append(mon)
            else:
                parts.append(f"{c}*{mon}")
        return "+".join(parts) if parts else "0"

    # -- F_p-linear algebra --------------------------------------------
    def trace(self, a: "FqElement") -> int:
        """Absolute trace F_q -> F_p."""
        acc = 0
        x = a.code
        for _ in range(self.f):
            acc = self.add_codes(acc, x)
            x = self.frobenius_code(x)
        assert acc < self.p
        return acc

    def solve_wp(self, c: "FqElement") -> "FqElement":
        """A root of ``x^p - x = c`` in F_q, or raise NoSolution."""
        if c.code == 0:
            return self.zero
        f, p = self.f, self.p
        cols = []
        for i in range(f):
            basis = self.code([1 if k == i else 0 for k in range(f)])
            image = self.add_codes(self.frobenius_code(basis), self.neg_code(basis))
            cols.append(self.coords(image))
        rows = [[cols[j][i] for j in range(f)] for i in range(f)]
        sol = solve_mod_p(rows, list(c.coords), p)
        if sol is None:
            raise NoSolution(f"{c} is not in wp(F_{self.q}) (trace {self.trace(c)})")
        return FqElement(self, self.code(sol))

    def subfield_generator(self, f_sub: int) -> "FqElement":
        """A primitive element of the subfield F_{p^f_sub}."""
        if self.f % f_sub:
            raise ValueError(f"F_{self.p}^{f_sub} is not a subfield of F_{self.p}^{self.f}")
        return self.gen ** ((self.q - 1) // (self.p**f_sub - 1))


@functools.lru_cache(maxsize=None)
def _gf(p: int, f: int) -> GF:
    return GF._create(p, f)


class FqElement:
    """Immutable element of a ``GF``."""

    __slots__ = ("field", "code")

    def __init__(self, field: GF, code: int):
        self.field = field
        self.code = int(code)

    @property
    def coords(self) -> tuple[int, ...]:
        return self.field.coords(self.code)

    def _coerce(self, other) -> "FqElement | None":
        if isinstance(other, FqElement):
            return other
        if isinstance(other, (int, np.integer)):
            return self.field(int(other))
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return FqElement(self.field, self.field.add_codes(self.code, o.code))

    __radd__ = __add__

    def __neg__(self):
        return FqElement(self.field, self.field.neg_code(self.code))

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return FqElement(self.field, self.field.mul_codes(self.code, o.code))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return FqElement(self.field, self.field.mul_codes(self.code, self.field.inv_code(o.code)))

    def __pow__(self, e: int):
        return FqElement(self.field, self.field.pow_code(self.code, e))

    def inverse(self) -> "FqElement":
        return FqElement(self.field, self.field.inv_code(self.code))

    def frobenius(self, k: int = 1) -> "FqElement":
        return FqElement(self.field, self.field.frobenius_code(self.code, k))

    def is_zero(self) -> bool:
        return self.code == 0

    def __bool__(self) -> bool:
        return self.code != 0

    def __eq__(self, other) -> bool:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.field is o.field and self.code == o.code

    def __hash__(self) -> int:
        return hash((self.field.p, self.field.f, self.code))

    def __repr__(self) -> str:
        return self.field.format_code(self.code)
