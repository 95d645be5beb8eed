"""Arithmetic and dense linear algebra over GF(2^m), 1 <= m <= 16.

Scalars go through a carryless multiply with polynomial reduction.  Arrays go
through exp/log tables built once per field; the two paths are tested
against each other exhaustively for m <= 8.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

AES_POLY = 0x11B
ELEM = np.int64


def _degree(p: int) -> int:
    return p.bit_length() - 1


def _polymod(a: int, b: int) -> int:
    db = _degree(b)
    while a and _degree(a) >= db:
        a ^= b << (_degree(a) - db)
    return a


def is_irreducible(poly: int) -> bool:
    """Brute-force check: no polynomial of degree 1..m//2 divides ``poly``."""
    m = _degree(poly)
    if m < 1:
        return False
    for d in range(1, m // 2 + 1):
        for q in range(1 << d, 1 << (d + 1)):
            if _polymod(poly, q) == 0:
                return False
    return True


@lru_cache(maxsize=None)
def default_polynomial(m: int) -> int:
    """0x11B for m = 8, otherwise the smallest irreducible polynomial of degree m."""
    if m == 8:
        return AES_POLY
    for p in range(1 << m, 1 << (m + 1)):
        if is_irreducible(p):
            return p
    raise AssertionError("unreachable: irreducible polynomials exist for every degree")


def clmul(a: int, b: int, poly: int) -> int:
    """Carryless product of ``a`` and ``b`` reduced modulo ``poly``."""
    m = _degree(poly)
    top = 1 << m
    out = 0
    while b:
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= poly
    return out


def _prime_factors(n: int) -> list[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def _pow(a: int, e: int, poly: int) -> int:
    r = 1
    while e:
        if e & 1:
            r = clmul(r, a, poly)
        a = clmul(a, a, poly)
        e >>= 1
    return r


@lru_cache(maxsize=None)
def _tables(m: int, poly: int) -> tuple[np.ndarray, np.ndarray, int]:
    # 0x11B is not primitive, so x is not always a generator; search for one
    order = (1 << m) - 1
    factors = _prime_factors(order) if order > 1 else []
    gen = 1 if order == 1 else next(
        g for g in range(2, 1 << m) if all(_pow(g, order // p, poly) != 1 for p in factors)
    )
    exp = np.zeros(2 * order + 1, dtype=ELEM)
    log = np.zeros(1 << m, dtype=ELEM)
    x = 1
    for i in range(order):
        exp[i] = x
        log[x] = i
        x = clmul(x, gen, poly)
    exp[order:2 * order] = exp[:order]
    exp.setflags(write=False)
    log.setflags(write=False)
    return exp, log, gen


@dataclass(frozen=True)
class FieldSpec:
    """GF(2^m) given by a reduction polynomial (bitmask including the x^m term)."""

    m: int = 8
    poly: int | None = None

    def __post_init__(self):
        if not 1 <= int(self.m) <= 16:
            raise ValueError("field bits m must lie in 1..16")
        poly = default_polynomial(self.m) if self.poly is None else int(self.poly)
        if _degree(poly) != self.m:
            raise ValueError(f"polynomial {poly:#x} does not have degree {self.m}")
        if not is_irreducible(poly):
            raise ValueError(f"polynomial {poly:#x} is reducible over GF(2)")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "poly", poly)

    @classmethod
    def from_config(cls, cfg: dict) -> "FieldSpec":
        poly = cfg.get("polynomial")
        if isinstance(poly, str):
            poly = int(poly, 16)
        return cls(int(cfg["m"]), poly)

    def to_config(self) -> dict:
        return {"m": self.m, "polynomial": f"{self.poly:#x}"}

    @property
    def size(self) -> int:
        return 1 << self.m

    @property
    def generator(self) -> int:
        return _tables(self.m, self.poly)[2]

    def _check(self, *xs):
        for x in xs:
            if not 0 <= x < self.size:
                raise ValueError(f"{x} is not an element of GF(2^{self.m})")

    def add(self, a: int, b: int) -> int:
        self._check(a, b)
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        self._check(a, b)
        return clmul(a, b, self.poly)

    def inv(self, a: int) -> int:
        self._check(a)
        if a == 0:
            raise ZeroDivisionError("zero has no inverse")
        return _pow(a, self.size - 2, self.poly)

    # vectorised, table-driven

    def mul_array(self, a, b) -> np.ndarray:
        exp, log, _ = _tables(self.m, self.poly)
        a = np.asarray(a, dtype=ELEM)
        b = np.asarray(b, dtype=ELEM)
        out = exp[log[a] + log[b]]
        return np.where((a == 0) | (b == 0), 0, out)

    def inv_array(self, a) -> np.ndarray:
        exp, log, _ = _tables(self.m, self.poly)
        a = np.asarray(a, dtype=ELEM)
        if np.any(a == 0):
            raise ZeroDivisionError("zero has no inverse")
        order = self.size - 1
        return exp[(order - log[a]) % order] if order > 1 else a.copy()

    def random(self, shape, rng: np.random.Generator) -> np.ndarray:
        return rng.integers(0, self.size, size=shape, dtype=ELEM)


def mat_mul(f: FieldSpec, a, b) -> np.ndarray:
    """Matrix product over the field; leading batch axes broadcast."""
    a = np.asarray(a, dtype=ELEM)
    b = np.asarray(b, dtype=ELEM)
    if a.shape[-1] != b.shape[-2]:
        raise ValueError(f"shape mismatch {a.shape} @ {b.shape}")
    if a.shape[-1] == 0:
        shape = np.broadcast_shapes(a.shape[:-2], b.shape[:-2]) + (a.shape[-2], b.shape[-1])
        return np.zeros(shape, dtype=ELEM)
    prods = f.mul_array(a[..., :, :, None], b[..., None, :, :])
    return np.bitwise_xor.reduce(prods, axis=-2)


def invert_unitriangular(f: FieldSpec, u) -> np.ndarray:
    """Inverse of an upper unitriangular matrix by back substitution.

    Typically called with ``u = I - F`` (which equals ``I + F`` here), with F
    strictly upper triangular.  Leading batch axes are allowed.
    """
    u = np.asarray(u, dtype=ELEM)
    k = u.shape[-1]
    if u.shape[-2] != k:
        raise ValueError("matrix must be square")
    diag = np.diagonal(u, axis1=-2, axis2=-1)
    if np.any(diag != 1) or np.any(np.tril(u, -1) != 0):
        raise ValueError("matrix is not upper unitriangular")
    strict = np.triu(u, 1)  # -F, which is +F in characteristic 2
    g = np.zeros_like(u)
    eye = np.eye(k, dtype=ELEM)
    # row i of G: e_i + sum_{j>i} F[i, j] G[j, :]
    for i in range(k - 1, -1, -1):
        row = np.broadcast_to(eye[i], u.shape[:-2] + (k,)).copy()
        if i + 1 < k:
            prods = f.mul_array(strict[..., i, i + 1:, None], g[..., i + 1:, :])
            row ^= np.bitwise_xor.reduce(prods, axis=-2)
        g[..., i, :] = row
    return g


def _row_reduce(f: FieldSpec, a: np.ndarray, aug: np.ndarray | None = None):
    a = np.array(a, dtype=ELEM)
    aug = None if aug is None else np.array(aug, dtype=ELEM)
    rows, cols = a.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        p = r + nz[0]
        a[[r, p]] = a[[p, r]]
        if aug is not None:
            aug[[r, p]] = aug[[p, r]]
        s = f.inv(int(a[r, c]))
        a[r] = f.mul_array(a[r], s)
        if aug is not None:
            aug[r] = f.mul_array(aug[r], s)
        others = np.nonzero(a[:, c])[0]
        others = others[others != r]
        if others.size:
            coef = a[others, c][:, None]
            a[others] ^= f.mul_array(coef, a[r][None, :])
            if aug is not None:
                aug[others] ^= f.mul_array(coef, aug[r][None, :])
        r += 1
    return r, a, aug


def rank(f: FieldSpec, a) -> int:
    a = np.asarray(a, dtype=ELEM)
    if a.size == 0:
        return 0
    return _row_reduce(f, a)[0]


def gauss_inverse(f: FieldSpec, a) -> np.ndarray:
    """General inverse by Gauss-Jordan elimination; raises if singular."""
    a = np.asarray(a, dtype=ELEM)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    r, _, inv = _row_reduce(f, a, np.eye(n, dtype=ELEM))
    if r < n:
        raise np.linalg.LinAlgError("matrix is singular over the field")
    return inv


@dataclass(frozen=True, eq=False)
class FieldMatrix:
    """A matrix with entries in a given field."""

    field: FieldSpec
    entries: np.ndarray

    def __post_init__(self):
        e = np.array(self.entries, dtype=ELEM)
        if e.ndim != 2 or 0 in e.shape:
            raise ValueError("a field matrix needs positive dimensions")
        if np.any((e < 0) | (e >= self.field.size)):
            raise ValueError(f"entries must lie in [0, {self.field.size})")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def shape(self):
        return self.entries.shape

    def __matmul__(self, other: "FieldMatrix") -> "FieldMatrix":
        if other.field != self.field:
            raise ValueError("matrices over different fields")
        return FieldMatrix(self.field, mat_mul(self.field, self.entries, other.entries))

    def __eq__(self, other):
        return isinstance(other, FieldMatrix) and self.field == other.field and np.array_equal(self.entries, other.entries)

    __hash__ = None

    def rank(self) -> int:
        return rank(self.field, self.entries)

    def inverse_unitriangular(self) -> "FieldMatrix":
        return FieldMatrix(self.field, invert_unitriangular(self.field, self.entries))
