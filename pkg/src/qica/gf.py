"""Small finite fields with integer-labeled elements and precomputed tables."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class FieldError(ValueError):
    """Raised when the requested order is unsupported or tables fail audit."""


# Monic moduli over GF(p), coefficients ascending (constant first).  Fixed so
# element labels are reproducible: the element sum(a_i x^i) gets the label
# sum(a_i p^i), hence label 0 is the zero and label 1 the one of the field.
_MODULI: dict[int, tuple[int, ...]] = {
    4: (1, 1, 1),            # x^2 + x + 1
    8: (1, 1, 0, 1),         # x^3 + x + 1
    9: (1, 0, 1),            # x^2 + 1
    16: (1, 1, 0, 0, 1),     # x^4 + x + 1
    25: (2, 0, 1),           # x^2 + 2
    27: (1, 2, 0, 1),        # x^3 + 2x + 1
    32: (1, 0, 1, 0, 0, 1),  # x^5 + x^2 + 1
    49: (1, 0, 1),           # x^2 + 1
    64: (1, 1, 0, 0, 0, 0, 1),
    81: (2, 1, 0, 0, 1),     # x^4 + x + 2
    121: (1, 0, 1),
    125: (3, 3, 0, 1),       # x^3 + 3x + 3
    128: (1, 1, 0, 0, 0, 0, 0, 1),
}

_MAX_PRIME = 128


def _is_prime(m: int) -> bool:
    if m < 2:
        return False
    d = 2
    while d * d <= m:
        if m % d == 0:
            return False
        d += 1
    return True


def _prime_power(q: int) -> tuple[int, int] | None:
    for p in range(2, q + 1):
        if not _is_prime(p):
            continue
        m, e = q, 0
        while m % p == 0:
            m //= p
            e += 1
        if m == 1:
            return p, e
    return None


@dataclass(frozen=True, eq=False)
class Field:
    """GF(q) with elements labeled 0..q-1; tables are exhaustively audited."""

    q: int
    p: int
    deg: int
    add_table: np.ndarray = field(repr=False)
    mul_table: np.ndarray = field(repr=False)
    neg_table: np.ndarray = field(repr=False)
    inv_table: np.ndarray = field(repr=False)

    def add(self, a: int, b: int) -> int:
        return int(self.add_table[a, b])

    def mul(self, a: int, b: int) -> int:
        return int(self.mul_table[a, b])

    def neg(self, a: int) -> int:
        return int(self.neg_table[a])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        return int(self.inv_table[a])


def field_op(q: int, op: str, a: int, b: int | None = None) -> int:
    """One field operation by name: add, mul, neg, inv."""
    f = make_field(q)
    for operand in (a,) if b is None else (a, b):
        if not 0 <= operand < q:
            raise FieldError(f"operand {operand} outside 0..{q - 1}")
    if op in ("add", "mul") and b is None:
        raise FieldError(f"{op} needs two operands")
    if op == "add":
        return f.add(a, b)
    if op == "mul":
        return f.mul(a, b)
    if op == "neg":
        return f.neg(a)
    if op == "inv":
        return f.inv(a)
    raise FieldError(f"unknown op {op!r}")


def _digits(a: int, p: int, deg: int) -> list[int]:
    out = []
    for _ in range(deg):
        out.append(a % p)
        a //= p
    return out


def _undigits(coeffs: list[int], p: int) -> int:
    out = 0
    for c in reversed(coeffs):
        out = out * p + c
    return out


def _poly_mul_mod(a: list[int], b: list[int], mod: tuple[int, ...], p: int) -> list[int]:
    deg = len(mod) - 1
    prod = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] = (prod[i + j] + ai * bj) % p
    for i in range(len(prod) - 1, deg - 1, -1):
        c = prod[i]
        if c:
            prod[i] = 0
            for j in range(deg + 1):
                prod[i - deg + j] = (prod[i - deg + j] - c * mod[j]) % p
    return [prod[i] if i < len(prod) else 0 for i in range(deg)]


def _audit(f: Field) -> None:
    q = f.q
    idx = np.arange(q)
    add, mul = f.add_table, f.mul_table
    ok = (
        np.array_equal(add, add.T)
        and np.array_equal(mul, mul.T)
        and np.array_equal(add[0], idx)
        and np.array_equal(mul[1], idx)
        and np.array_equal(mul[0], np.zeros(q, dtype=add.dtype))
        and np.array_equal(add[idx, f.neg_table], np.zeros(q, dtype=add.dtype))
        and np.array_equal(mul[idx[1:], f.inv_table[1:]], np.ones(q - 1, dtype=add.dtype))
    )
    if not ok:
        raise FieldError(f"GF({q}): unit/inverse audit failed")
    # associativity and distributivity over all q^3 triples
    a = idx[:, None, None]
    b = idx[None, :, None]
    c = idx[None, None, :]
    if not np.array_equal(add[add[a, b], c], add[a, add[b, c]]):
        raise FieldError(f"GF({q}): addition not associative")
    if not np.array_equal(mul[mul[a, b], c], mul[a, mul[b, c]]):
        raise FieldError(f"GF({q}): multiplication not associative")
    if not np.array_equal(mul[a, add[b, c]], add[mul[a, b], mul[a, c]]):
        raise FieldError(f"GF({q}): distributivity fails")


_CACHE: dict[int, Field] = {}


def make_field(q: int) -> Field:
    """GF(q) for prime q <= 128 or prime powers with a registered modulus."""
    if q in _CACHE:
        return _CACHE[q]
    pp = _prime_power(q)
    if pp is None:
        raise FieldError(f"{q} is not a prime power")
    p, deg = pp
    if deg == 1:
        if q > _MAX_PRIME:
            raise FieldError(f"prime fields supported up to {_MAX_PRIME}")
        idx = np.arange(q, dtype=np.int16)
        add = (idx[:, None] + idx[None, :]) % q
        mul = (idx[:, None] * idx[None, :]) % q
        neg = (-idx) % q
        inv = np.zeros(q, dtype=np.int16)
        for a in range(1, q):
            inv[a] = pow(a, q - 2, q)
    else:
        if q not in _MODULI:
            raise FieldError(f"no registered modulus for GF({q})")
        mod = _MODULI[q]
        digits = [_digits(a, p, deg) for a in range(q)]
        add = np.zeros((q, q), dtype=np.int16)
        mul = np.zeros((q, q), dtype=np.int16)
        for a in range(q):
            for b in range(q):
                s = [(x + y) % p for x, y in zip(digits[a], digits[b])]
                add[a, b] = _undigits(s, p)
                mul[a, b] = _undigits(_poly_mul_mod(digits[a], digits[b], mod, p), p)
        neg = np.array(
            [_undigits([(-x) % p for x in digits[a]], p) for a in range(q)],
            dtype=np.int16,
        )
        inv = np.zeros(q, dtype=np.int16)
        for a in range(1, q):
            row = np.nonzero(mul[a] == 1)[0]
            if len(row) != 1:
                raise FieldError(f"GF({q}): modulus is not irreducible")
            inv[a] = row[0]
    f = Field(q, p, deg, add, mul, neg, inv)
    _audit(f)
    _CACHE[q] = f
    return f
