"""Truncated q-series over exact coefficient rings.

A :class:`QSeries` holds the coefficients of q^0 .. q^(trunc-1) in a dense
numpy array.  Exact integers and rationals live in object arrays (Python
ints / Fractions); integers mod m use int64 when m is small enough for
products to fit, and object arrays otherwise.  Series are immutable.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

_INT64_MAX = 2**63 - 1


class RingMismatch(ValueError):
    pass


class NotInvertible(ArithmeticError):
    pass


class IntegralityError(ArithmeticError):
    """Raised when a rational series has a denominator sharing a factor with the modulus."""

    def __init__(self, exponent, value, modulus):
        super().__init__(
            f"coefficient of q^{exponent} is {value}, not {modulus}-integral")
        self.exponent = exponent
        self.value = value
        self.modulus = modulus


@dataclass(frozen=True)
class CoefficientRing:
    kind: str  # "ZZ", "QQ" or "Zmod"
    modulus: int | None = None

    def __post_init__(self):
        if self.kind not in ("ZZ", "QQ", "Zmod"):
            raise ValueError(f"unknown ring kind {self.kind!r}")
        if self.kind == "Zmod":
            if self.modulus is None or self.modulus < 2:
                raise ValueError("Zmod needs a modulus >= 2")
        elif self.modulus is not None:
            raise ValueError(f"{self.kind} takes no modulus")

    @property
    def is_modular(self) -> bool:
        return self.kind == "Zmod"

    @property
    def dtype(self):
        # (m-1)^2 must fit so a single product never overflows
        if self.kind == "Zmod" and (self.modulus - 1) ** 2 <= _INT64_MAX:
            return np.int64
        return object

    def __call__(self, x):
        """Coerce a Python scalar into the ring."""
        if self.kind == "ZZ":
            if isinstance(x, Fraction):
                if x.denominator != 1:
                    raise ValueError(f"{x} is not an integer")
                return int(x.numerator)
            return int(x)
        if self.kind == "QQ":
            return Fraction(x)
        m = self.modulus
        if isinstance(x, Fraction):
            if math.gcd(x.denominator, m) != 1:
                raise IntegralityError(0, x, m)
            return x.numerator * pow(x.denominator, -1, m) % m
        return int(x) % m

    def token(self) -> str:
        return f"Z/{self.modulus}" if self.kind == "Zmod" else self.kind

    @classmethod
    def from_token(cls, token: str) -> "CoefficientRing":
        if token.startswith("Z/"):
            return Zmod(int(token[2:]))
        return cls(token)

    def __repr__(self):
        return self.token()


ZZ = CoefficientRing("ZZ")
QQ = CoefficientRing("QQ")


def Zmod(m: int) -> CoefficientRing:
    return CoefficientRing("Zmod", int(m))


def _zeros(n, ring):
    if ring.dtype is object:
        arr = np.empty(n, dtype=object)
        arr[:] = Fraction(0) if ring.kind == "QQ" else 0
        return arr
    return np.zeros(n, dtype=np.int64)


def _mod_batch(m):
    """How many (m-1)^2 products may be summed in int64 before reducing."""
    return max(1, _INT64_MAX // ((m - 1) ** 2) - 1)


class QSeries:
    """Truncated power series sum_{n < trunc} a(n) q^n."""

    __slots__ = ("ring", "trunc", "_c")

    def __init__(self, coeffs, ring=ZZ, trunc=None):
        if trunc is None:
            trunc = len(coeffs)
        if trunc < 0:
            raise ValueError("trunc must be nonnegative")
        arr = _zeros(trunc, ring)
        if isinstance(coeffs, dict):
            for n, v in coeffs.items():
                if 0 <= n < trunc:
                    arr[n] = ring(v)
                elif n < 0:
                    raise ValueError("negative exponent")
        else:
            src = coeffs[:trunc]
            if ring.dtype is object or not isinstance(src, np.ndarray) or src.dtype == object:
                for i, v in enumerate(src):
                    arr[i] = ring(v)
            else:
                arr[: len(src)] = np.mod(src, ring.modulus)
        self._init(arr, ring)

    def _init(self, arr, ring):
        arr.flags.writeable = False
        self._c = arr
        self.ring = ring
        self.trunc = len(arr)

    @classmethod
    def _wrap(cls, arr, ring):
        s = cls.__new__(cls)
        s._init(arr, ring)
        return s

    # -- access -----------------------------------------------------------
    @property
    def coeffs(self) -> np.ndarray:
        """Read-only view of the coefficient array."""
        return self._c

    def __getitem__(self, n):
        if isinstance(n, slice):
            return [self._py(v) for v in self._c[n]]
        if n < 0:
            raise IndexError("negative exponent")
        if n >= self.trunc:
            raise IndexError(f"q^{n} is beyond the truncation order {self.trunc}")
        return self._py(self._c[n])

    def _py(self, v):
        return v if self.ring.dtype is object else int(v)

    def __len__(self):
        return self.trunc

    def tolist(self):
        return [self._py(v) for v in self._c]

    def nonzero(self) -> dict:
        return {int(i): self._py(self._c[i]) for i in np.flatnonzero(self._c != 0)}

    def valuation(self):
        nz = np.flatnonzero(self._c != 0)
        return int(nz[0]) if len(nz) else None

    def is_zero(self) -> bool:
        return not np.any(self._c != 0)

    def truncate(self, trunc: int) -> "QSeries":
        if trunc > self.trunc:
            raise ValueError(f"cannot extend a series known to {self.trunc} terms")
        return QSeries._wrap(self._c[:trunc].copy(), self.ring)

    def __eq__(self, other):
        if not isinstance(other, QSeries):
            return NotImplemented
        return (self.ring == other.ring and self.trunc == other.trunc
                and bool(np.all(self._c == other._c)))

    def __hash__(self):
        return hash((self.ring, self.trunc, tuple(self.tolist())))

    def __repr__(self):
        terms = []
        for n, v in list(self.nonzero().items())[:8]:
            terms.append(f"{v}*q^{n}")
        more = " + ..." if len(self.nonzero()) > 8 else ""
        body = " + ".join(terms) if terms else "0"
        return f"QSeries({body}{more} + O(q^{self.trunc}), {self.ring})"

    # -- ring plumbing ----------------------------------------------------
    def _check(self, other):
        if not isinstance(other, QSeries):
            raise TypeError(f"expected QSeries, got {type(other).__name__}")
        if self.ring != other.ring:
            raise RingMismatch(f"{self.ring} vs {other.ring}")

    def _reduce(self, arr):
        if self.ring.is_modular:
            return np.mod(arr, self.ring.modulus)
        return arr

    def change_ring(self, ring: CoefficientRing) -> "QSeries":
        if ring == self.ring:
            return self
        if ring.kind == "Zmod":
            return reduce_mod(self, ring.modulus)
        if self.ring.is_modular:
            raise RingMismatch("cannot lift a series mod m to characteristic zero")
        if ring.kind == "QQ":
            arr = np.array([Fraction(v) for v in self._c] or [], dtype=object)
            if not len(arr):
                arr = _zeros(0, QQ)
            return QSeries._wrap(arr, QQ)
        arr = _zeros(self.trunc, ZZ)
        for i, v in enumerate(self._c):
            arr[i] = ZZ(v)
        return QSeries._wrap(arr, ZZ)

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, QSeries):
            return self + constant(other, self.trunc, self.ring)
        self._check(other)
        n = min(self.trunc, other.trunc)
        return QSeries._wrap(self._reduce(self._c[:n] + other._c[:n]), self.ring)

    __radd__ = __add__

    def __neg__(self):
        return QSeries._wrap(self._reduce(-self._c), self.ring)

    def __sub__(self, other):
        if not isinstance(other, QSeries):
            return self - constant(other, self.trunc, self.ring)
        self._check(other)
        n = min(self.trunc, other.trunc)
        return QSeries._wrap(self._reduce(self._c[:n] - other._c[:n]), self.ring)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "QSeries":
        c = self.ring(c)
        if self.ring.dtype is object:
            arr = np.empty(self.trunc, dtype=object)
            arr[:] = [self.ring(c * v) for v in self._c]
            return QSeries._wrap(arr, self.ring)
        return QSeries._wrap(np.mod(self._c * c, self.ring.modulus), self.ring)

    def __mul__(self, other):
        if isinstance(other, QSeries):
            return _cauchy(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, e):
        return pow_int(self, e)

    def shift(self, a: int) -> "QSeries":
        """Multiply by q^a (a >= 0); the truncation order grows by a."""
        if a < 0:
            raise ValueError("use divide_q for negative shifts")
        arr = _zeros(self.trunc + a, self.ring)
        arr[a:] = self._c
        return QSeries._wrap(arr, self.ring)

    def divide_q(self, a: int) -> "QSeries":
        """Divide by q^a; the first a coefficients must vanish."""
        if np.any(self._c[:a] != 0):
            raise ValueError(f"series has a nonzero coefficient below q^{a}")
        return QSeries._wrap(self._c[a:].copy(), self.ring)

    def invert(self) -> "QSeries":
        return invert_unit(self)


def constant(c, trunc: int, ring=ZZ) -> QSeries:
    return QSeries({0: c}, ring, trunc)


def monomial(n: int, trunc: int, ring=ZZ, c=1) -> QSeries:
    return QSeries({n: c}, ring, trunc)


def _cauchy(a: QSeries, b: QSeries) -> QSeries:
    a._check(b)
    ring = a.ring
    n = min(a.trunc, b.trunc)
    x, y = a._c[:n], b._c[:n]
    nx = np.flatnonzero(x != 0)
    ny = np.flatnonzero(y != 0)
    # iterate the sparser operand
    if len(ny) < len(nx):
        x, y, nx = y, x, ny
    out = _zeros(n, ring)
    if ring.dtype is object:
        for i in nx:
            i = int(i)
            out[i:] += x[i] * y[: n - i]
        if ring.is_modular:
            out = np.mod(out, ring.modulus)
        return QSeries._wrap(out, ring)
    m = ring.modulus
    batch = _mod_batch(m)
    pending = 0
    for i in nx:
        i = int(i)
        out[i:] += int(x[i]) * y[: n - i]
        pending += 1
        if pending >= batch:
            np.mod(out, m, out=out)
            pending = 0
    np.mod(out, m, out=out)
    return QSeries._wrap(out, ring)


def arith(a: QSeries, b, op: str) -> QSeries:
    """Dispatch add/sub/mul/scale; `b` is a scalar for op='scale'."""
    if op == "add":
        a._check(b)
        return a + b
    if op == "sub":
        a._check(b)
        return a - b
    if op == "mul":
        return _cauchy(a, b)
    if op == "scale":
        return a.scale(b)
    raise ValueError(f"unknown op {op!r}")


def _ring_inverse(ring, c):
    if ring.kind == "ZZ":
        if c not in (1, -1):
            raise NotInvertible(f"constant term {c} is not a unit in ZZ")
        return c
    if ring.kind == "QQ":
        if c == 0:
            raise NotInvertible("constant term is zero")
        return 1 / Fraction(c)
    c = int(c) % ring.modulus
    if math.gcd(c, ring.modulus) != 1:
        raise NotInvertible(f"constant term {c} is not a unit mod {ring.modulus}")
    return pow(c, -1, ring.modulus)


def _dot(ring, u, v):
    """Exact dot product of two coefficient vectors in `ring`."""
    if ring.dtype is object:
        return ring(np.dot(u, v)) if len(u) else ring(0)
    m = ring.modulus
    if (m - 1) ** 2 * max(1, len(u)) <= _INT64_MAX:
        return int(np.dot(u, v)) % m
    total = 0
    step = _mod_batch(m)
    for s in range(0, len(u), step):
        total += int(np.dot(u[s:s + step], v[s:s + step])) % m
    return total % m


def invert_unit(a: QSeries) -> QSeries:
    """Multiplicative inverse up to the truncation order."""
    ring = a.ring
    n = a.trunc
    if n == 0:
        return a
    inv0 = _ring_inverse(ring, a._c[0])
    b = _zeros(n, ring)
    b[0] = ring(inv0)
    nz = np.flatnonzero(a._c != 0)
    nz = nz[nz > 0]
    sparse = len(nz) < n // 4
    coef = a._c
    for k in range(1, n):
        if sparse:
            idx = nz[: np.searchsorted(nz, k, side="right")]
            s = _dot(ring, coef[idx], b[k - idx])
        else:
            s = _dot(ring, coef[1:k + 1], b[k - 1::-1])
        v = -inv0 * s
        b[k] = v % ring.modulus if ring.is_modular else v
    return QSeries._wrap(b, ring)


def pow_int(a: QSeries, e: int) -> QSeries:
    if e < 0:
        raise ValueError("negative exponent; invert first")
    result = constant(1, a.trunc, a.ring)
    if e == 0:
        return result
    nnz = int(np.count_nonzero(a._c))
    if nnz * nnz <= 4 * a.trunc:
        # sparse base (pentagonal-type): repeated sparse products stay cheap
        for _ in range(e):
            result = _cauchy(a, result)
        return result
    base = a
    while e:
        if e & 1:
            result = result * base
        e >>= 1
        if e:
            base = base * base
    return result


# -- named series -----------------------------------------------------------

def pentagonal_terms(trunc: int):
    """Yield (exponent, sign) for Euler's pentagonal series below trunc."""
    yield 0, 1
    j = 1
    while True:
        g1 = j * (3 * j - 1) // 2
        if g1 >= trunc:
            break
        sign = -1 if j % 2 else 1
        yield g1, sign
        g2 = j * (3 * j + 1) // 2
        if g2 < trunc:
            yield g2, sign
        j += 1


def euler_E(r: int, trunc: int, ring=ZZ) -> QSeries:
    """E(q)^r = prod (1 - q^n)^r via the sparse pentagonal expansion."""
    if r < 0:
        raise ValueError("r must be nonnegative")
    e1 = QSeries(dict(pentagonal_terms(trunc)), ring, trunc)
    if r == 1:
        return e1
    return pow_int(e1, r)


def partition_series(trunc: int, ring=ZZ) -> QSeries:
    """P = sum p(n) q^n = 1/E(q), by the pentagonal recurrence."""
    pent = [(g, s) for g, s in pentagonal_terms(trunc) if g > 0]
    vals = [0] * trunc
    if trunc:
        vals[0] = 1
    m = ring.modulus if ring.is_modular else None
    for n in range(1, trunc):
        acc = 0
        for g, s in pent:
            if g > n:
                break
            acc -= s * vals[n - g]
        vals[n] = acc % m if m else acc
    return QSeries(vals, ring, trunc)


def substitute_power(a: QSeries, t: int) -> QSeries:
    """a(q^t); the truncation order scales by t."""
    if t < 1:
        raise ValueError("t must be positive")
    out = _zeros(a.trunc * t, a.ring)
    out[::t] = a._c
    return QSeries._wrap(out, a.ring)


def eta24_power(r: int, trunc: int, ring=ZZ) -> QSeries:
    """eta(24 tau)^r = q^r E(q^24)^r, exponents kept integral by the 24-scaling."""
    if r < 1:
        raise ValueError("r must be positive")
    inner = -(-max(trunc - r, 0) // 24)
    base = substitute_power(euler_E(r, inner, ring), 24).shift(r)
    if base.trunc >= trunc:
        return base.truncate(trunc)
    return QSeries._wrap(np.concatenate([base._c, _zeros(trunc - base.trunc, ring)]), ring)


def delta_q(a: QSeries) -> QSeries:
    """q d/dq."""
    idx = np.arange(a.trunc, dtype=object if a.ring.dtype is object else np.int64)
    return QSeries._wrap(a._reduce(a._c * idx), a.ring)


def U_op(a: QSeries, m: int) -> QSeries:
    """sum a(mn) q^n; the truncation order becomes ceil(trunc/m)."""
    if m < 1:
        raise ValueError("m must be positive")
    return QSeries._wrap(a._c[::m].copy(), a.ring)


def ap_extract(a: QSeries, ell: int, beta: int) -> QSeries:
    """sum a(ell n + beta) q^n."""
    if ell < 1 or not 0 <= beta < ell:
        raise ValueError("need ell >= 1 and 0 <= beta < ell")
    return QSeries._wrap(a._c[beta::ell].copy(), a.ring)


def legendre(a: int, p: int) -> int:
    """Legendre symbol (a/p) for an odd prime p, by Euler's criterion."""
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


@dataclass(frozen=True)
class SieveSpec:
    ell: int
    epsilon: int

    def __post_init__(self):
        if self.ell <= 3 or not is_prime(self.ell):
            raise ValueError("ell must be a prime > 3")
        if self.epsilon not in (-1, 0, 1):
            raise ValueError("epsilon must be -1, 0 or 1")


def sieve(a: QSeries, s: SieveSpec) -> QSeries:
    """Keep a(n) exactly when legendre(1 - 24n, ell) == epsilon."""
    keep = np.array([legendre(1 - 24 * n, s.ell) == s.epsilon for n in range(a.trunc)],
                    dtype=bool)
    out = _zeros(a.trunc, a.ring)
    out[keep] = a._c[keep]
    return QSeries._wrap(out, a.ring)


def reduce_mod(a: QSeries, m: int) -> QSeries:
    """Reduce an integral or rational series mod m.

    For rational input this is the m-integrality test: a denominator sharing
    a factor with m raises IntegralityError naming the exponent.
    """
    ring = Zmod(m)
    if a.ring.is_modular:
        if a.ring.modulus % m:
            raise RingMismatch(f"cannot reduce mod {a.ring.modulus} series mod {m}")
        return QSeries(a._c, ring)
    out = _zeros(a.trunc, ring)
    for n, v in enumerate(a._c):
        if isinstance(v, Fraction) and v.denominator != 1:
            if math.gcd(v.denominator, m) != 1:
                raise IntegralityError(n, v, m)
            out[n] = v.numerator * pow(v.denominator, -1, m) % m
        else:
            out[n] = int(v) % m
    return QSeries._wrap(out, ring)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    # deterministic Miller-Rabin for n < 3.3e24
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def primes_between(lo: int, hi: int):
    return [p for p in range(max(lo, 2), hi + 1) if is_prime(p)]


# -- on-disk cache ------------------------------------------------------------

def cache_dir() -> Path:
    return Path(os.environ.get("QCONG_CACHE", "./.qcong-cache"))


def _format_coeff(v) -> str:
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    return str(int(v))


def save_series(name: str, a: QSeries, directory=None) -> Path:
    """Write `a` as text: a header 'ring trunc name', then 'n coefficient' lines."""
    if any(ch.isspace() for ch in name) or "/" in name:
        raise ValueError(f"bad series name {name!r}")
    d = Path(directory) if directory is not None else cache_dir()
    d.mkdir(parents=True, exist_ok=True)
    path = d / f"{name}.txt"
    tmp = path.with_suffix(".tmp")
    with open(tmp, "w") as fh:
        fh.write(f"{a.ring.token()} {a.trunc} {name}\n")
        for n, v in a.nonzero().items():
            fh.write(f"{n} {_format_coeff(v)}\n")
    os.replace(tmp, path)
    return path


def load_series(name: str, directory=None) -> QSeries | None:
    d = Path(directory) if directory is not None else cache_dir()
    path = d / f"{name}.txt"
    if not path.exists():
        return None
    with open(path) as fh:
        token, trunc, stored = fh.readline().split()
        if stored != name:
            raise ValueError(f"{path} holds series {stored!r}, expected {name!r}")
        ring = CoefficientRing.from_token(token)
        coeffs = {}
        for line in fh:
            n, v = line.split()
            coeffs[int(n)] = Fraction(v) if "/" in v else int(v)
    return QSeries(coeffs, ring, int(trunc))


def cached_series(name: str, trunc: int, build, directory=None) -> QSeries:
    """Load `name` from the cache if it covers `trunc`, else build and store it."""
    hit = load_series(name, directory)
    if hit is not None and hit.trunc >= trunc:
        return hit.truncate(trunc)
    s = build(trunc)
    save_series(name, s, directory)
    return s
