"""Short Weierstrass curves over prime fields.

Points are affine ``(x, y)`` tuples with ``None`` standing for the point at
infinity.  Internally scalar multiplication runs in Jacobian coordinates; the
base point gets a cached table of its powers-of-two multiples so that
``k*P`` costs only additions.

No attempt is made at constant-time arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

from ..errors import ParameterError

Point = Optional[Tuple[int, int]]
INFINITY: Point = None


@dataclass(frozen=True)
class CurveParams:
    """y^2 = x^3 + a*x + b over F_q with base point P of prime order n."""

    name: str
    q: int
    a: int
    b: int
    gx: int
    gy: int
    n: int
    cofactor: int = 1

    @property
    def base_point(self) -> Tuple[int, int]:
        return (self.gx, self.gy)

    @property
    def field_bytes(self) -> int:
        return (self.q.bit_length() + 7) // 8

    @property
    def scalar_bytes(self) -> int:
        return (self.n.bit_length() + 7) // 8

    def validate(self) -> None:
        if self.n < 2:
            raise ParameterError(f"{self.name}: group order n={self.n} < 2")
        if not _is_probable_prime(self.n):
            raise ParameterError(f"{self.name}: n is not prime")
        if (4 * self.a ** 3 + 27 * self.b ** 2) % self.q == 0:
            raise ParameterError(f"{self.name}: singular curve")
        if not is_on_curve(self, self.base_point):
            raise ParameterError(f"{self.name}: base point not on curve")
        if scalar_mul(self, self.n, self.base_point) is not INFINITY:
            raise ParameterError(f"{self.name}: n*P != O")


def _is_probable_prime(m: int) -> bool:
    if m < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    for p in small:
        if m % p == 0:
            return m == p
    d, s = m - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, m)
        if x in (1, m - 1):
            continue
        for _ in range(s - 1):
            x = x * x % m
            if x == m - 1:
                break
        else:
            return False
    return True


def is_on_curve(curve: CurveParams, point: Point) -> bool:
    if point is INFINITY:
        return True
    x, y = point
    q = curve.q
    if not (0 <= x < q and 0 <= y < q):
        return False
    return (y * y - (x * x * x + curve.a * x + curve.b)) % q == 0


def point_neg(curve: CurveParams, point: Point) -> Point:
    if point is INFINITY:
        return INFINITY
    x, y = point
    return (x, (-y) % curve.q)


def point_add(curve: CurveParams, p1: Point, p2: Point) -> Point:
    """Affine chord-and-tangent addition."""
    if p1 is INFINITY:
        return p2
    if p2 is INFINITY:
        return p1
    q = curve.q
    x1, y1 = p1
    x2, y2 = p2
    if x1 == x2:
        if (y1 + y2) % q == 0:
            return INFINITY
        lam = (3 * x1 * x1 + curve.a) * pow(2 * y1, -1, q) % q
    else:
        lam = (y2 - y1) * pow(x2 - x1, -1, q) % q
    x3 = (lam * lam - x1 - x2) % q
    return (x3, (lam * (x1 - x3) - y1) % q)


# Jacobian coordinates: (X, Y, Z) represents (X/Z^2, Y/Z^3); Z == 0 is O.
_JAC_INF = (1, 1, 0)


def _jac_double(curve: CurveParams, pt):
    X, Y, Z = pt
    if Z == 0 or Y == 0:
        return _JAC_INF
    q = curve.q
    YY = Y * Y % q
    S = 4 * X * YY % q
    M = 3 * X * X
    if curve.a:
        M += curve.a * pow(Z, 4, q)
    M %= q
    X3 = (M * M - 2 * S) % q
    Y3 = (M * (S - X3) - 8 * YY * YY) % q
    Z3 = 2 * Y * Z % q
    return (X3, Y3, Z3)


def _jac_add_affine(curve: CurveParams, pt, aff):
    if aff is INFINITY:
        return pt
    X1, Y1, Z1 = pt
    x2, y2 = aff
    if Z1 == 0:
        return (x2, y2, 1)
    q = curve.q
    Z1Z1 = Z1 * Z1 % q
    U2 = x2 * Z1Z1 % q
    S2 = y2 * Z1 * Z1Z1 % q
    H = (U2 - X1) % q
    R = (S2 - Y1) % q
    if H == 0:
        if R == 0:
            return _jac_double(curve, pt)
        return _JAC_INF
    HH = H * H % q
    HHH = H * HH % q
    V = X1 * HH % q
    X3 = (R * R - HHH - 2 * V) % q
    Y3 = (R * (V - X3) - Y1 * HHH) % q
    Z3 = Z1 * H % q
    return (X3, Y3, Z3)


def _to_affine(curve: CurveParams, pt) -> Point:
    X, Y, Z = pt
    if Z == 0:
        return INFINITY
    q = curve.q
    zi = pow(Z, -1, q)
    zi2 = zi * zi % q
    return (X * zi2 % q, Y * zi2 * zi % q)


@lru_cache(maxsize=None)
def _base_table(curve: CurveParams) -> Tuple[Point, ...]:
    """Affine 2^i * P for i in [0, bits(n)]."""
    table = []
    pt: Point = curve.base_point
    for _ in range(curve.n.bit_length() + 1):
        table.append(pt)
        pt = point_add(curve, pt, pt)
    return tuple(table)


def scalar_mul(curve: CurveParams, k: int, point: Point) -> Point:
    """Return k*point (left-to-right double-and-add)."""
    if point is INFINITY:
        return INFINITY
    if k < 0:
        k, point = -k, point_neg(curve, point)
    if k == 0:
        return INFINITY
    acc = _JAC_INF
    for bit in bin(k)[2:]:
        acc = _jac_double(curve, acc)
        if bit == "1":
            acc = _jac_add_affine(curve, acc, point)
    return _to_affine(curve, acc)


def base_mul(curve: CurveParams, k: int) -> Point:
    """Return k*P using the precomputed doubling table of the base point."""
    k %= curve.n
    table = _base_table(curve)
    acc = _JAC_INF
    i = 0
    while k:
        if k & 1:
            acc = _jac_add_affine(curve, acc, table[i])
        k >>= 1
        i += 1
    return _to_affine(curve, acc)


def double_base_mul(curve: CurveParams, u1: int, u2: int, point: Point) -> Point:
    """Return u1*P + u2*point by interleaved (Shamir) double-and-add."""
    g = curve.base_point
    both = point_add(curve, g, point)
    acc = _JAC_INF
    for i in range(max(u1.bit_length(), u2.bit_length()) - 1, -1, -1):
        acc = _jac_double(curve, acc)
        b1 = (u1 >> i) & 1
        b2 = (u2 >> i) & 1
        if b1 and b2:
            acc = _jac_add_affine(curve, acc, both)
        elif b1:
            acc = _jac_add_affine(curve, acc, g)
        elif b2:
            acc = _jac_add_affine(curve, acc, point)
    return _to_affine(curve, acc)


SECP256K1 = CurveParams(
    name="secp256k1",
    q=0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEFFFFFC2F,
    a=0,
    b=7,
    gx=0x79BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798,
    gy=0x483ADA7726A3C4655DA4FBFC0E1108A8FD17B448A68554199C47D08FFB10D4B8,
    n=0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141,
)

# Textbook curve small enough for exhaustive search over every scalar.
TOY19 = CurveParams(name="toy19", q=17, a=2, b=2, gx=5, gy=1, n=19)
