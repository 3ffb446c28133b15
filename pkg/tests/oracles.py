"""Independent reference implementations used only by the tests.

Nothing here imports the library's curve or ECDSA code.  Points are affine
tuples, None is the point at infinity, and scalar multiplication is plain
repeated addition, so the toy curve is the only sensible target.
"""
import hashlib

# y^2 = x^3 + 2x + 2 over F_17, base point (5, 1) of order 19
TOY_Q, TOY_A, TOY_B = 17, 2, 2
TOY_G = (5, 1)
TOY_N = 19


def inv(a, m):
    # Fermat: m is prime
    return pow(a % m, m - 2, m)


def add(p1, p2, q=TOY_Q, a=TOY_A):
    if p1 is None:
        return p2
    if p2 is None:
        return p1
    (x1, y1), (x2, y2) = p1, p2
    if x1 == x2 and (y1 + y2) % q == 0:
        return None
    if p1 == p2:
        slope = (3 * x1 * x1 + a) * inv(2 * y1, q) % q
    else:
        slope = (y2 - y1) * inv(x2 - x1, q) % q
    x3 = (slope * slope - x1 - x2) % q
    return (x3, (slope * (x1 - x3) - y1) % q)


def mul(k, point):
    acc = None
    for _ in range(k):
        acc = add(acc, point)
    return acc


def all_points():
    pts = [None]
    for x in range(TOY_Q):
        for y in range(TOY_Q):
            if (y * y - (x ** 3 + TOY_A * x + TOY_B)) % TOY_Q == 0:
                pts.append((x, y))
    return pts


def e_of(message):
    return int.from_bytes(hashlib.sha256(message).digest(), "big") % TOY_N


def sign(message, d, k):
    """Textbook ECDSA with a fixed nonce; None when r or s would be 0."""
    x1, _ = mul(k, TOY_G)
    r = x1 % TOY_N
    if r == 0:
        return None
    s = inv(k, TOY_N) * (e_of(message) + d * r) % TOY_N
    if s == 0:
        return None
    return (r, s)


def verify(message, sig, public):
    r, s = sig
    if not (1 <= r < TOY_N and 1 <= s < TOY_N):
        return False
    w = inv(s, TOY_N)
    point = add(mul(e_of(message) * w % TOY_N, TOY_G), mul(r * w % TOY_N, public))
    return point is not None and point[0] % TOY_N == r


def multiples(point):
    """[0*point, 1*point, ..., 18*point] by repeated addition."""
    table = [None]
    for _ in range(TOY_N - 1):
        table.append(add(table[-1], point))
    return table


def verify_with_tables(message, sig, g_table, q_table):
    """verify(), with k*G and k*Q looked up instead of recomputed."""
    r, s = sig
    if not (1 <= r < TOY_N and 1 <= s < TOY_N):
        return False
    w = inv(s, TOY_N)
    point = add(g_table[e_of(message) * w % TOY_N], q_table[r * w % TOY_N])
    return point is not None and point[0] % TOY_N == r
