"""Level-one modular and quasimodular forms with exact q-expansions.

Forms are polynomials in E2, E4, E6 and Delta with rational coefficients.
A monomial E2^a E4^b E6^c Delta^d is keyed by the tuple (a, b, c, d) and
has weight 2a + 4b + 6c + 12d.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import series as qs
from .linalg import InconsistentSystem, solve_exact, solve_mod_p
from .series import QQ, ZZ, QSeries, Zmod


@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    """B_n with B_1 = -1/2, from sum_{j<=m} binom(m+1, j) B_j = 0."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n % 2 and n > 1:
        raise ValueError("odd Bernoulli numbers beyond B_1 vanish; not exposed")
    B = [Fraction(1)]
    for m in range(1, n + 1):
        if m % 2 and m > 1:
            B.append(Fraction(0))
            continue
        B.append(-sum(math.comb(m + 1, j) * B[j] for j in range(m)) / (m + 1))
    return B[n]


def sigma_table(j: int, trunc: int, modulus: int | None = None) -> np.ndarray:
    """sigma_j(n) for n < trunc (sigma_j(0) = 0)."""
    if modulus is None:
        out = np.zeros(trunc, dtype=object)
        out[:] = 0
        dj = np.array([d**j for d in range(trunc)], dtype=object)
    else:
        out = np.zeros(trunc, dtype=np.int64)
        dj = np.ones(trunc, dtype=np.int64) % modulus
        base = np.arange(trunc, dtype=np.int64) % modulus
        for _ in range(j):
            dj = dj * base % modulus
    if trunc < 2:
        return out
    # divisors d <= s by strides, larger ones through their cofactor q < trunc / s
    s = math.isqrt(trunc - 1)
    for i, d in enumerate(range(1, s + 1)):
        out[d::d] += dj[d]
        if modulus is not None and i % 1024 == 1023:
            np.mod(out, modulus, out=out)
    for q in range(1, (trunc - 1) // (s + 1) + 1):
        d = np.arange(s + 1, (trunc - 1) // q + 1)
        out[q * d] += dj[d]
        if modulus is not None and q % 1024 == 0:
            np.mod(out, modulus, out=out)
    if modulus is not None:
        np.mod(out, modulus, out=out)
    return out


def phi(j: int, trunc: int, ring=ZZ) -> QSeries:
    """Phi_j = sum sigma_j(n) q^n."""
    if j < 1 or j % 2 == 0:
        raise ValueError("j must be odd and positive")
    if ring.is_modular and ring.dtype is not object:
        return QSeries(sigma_table(j, trunc, ring.modulus), ring)
    return QSeries(sigma_table(j, trunc), ZZ).change_ring(ring)


# -- base series --------------------------------------------------------------

_BASE_LOCK = threading.Lock()
_BASE: dict = {}


def _eisenstein_series_raw(n, trunc, ring):
    c = -Fraction(2 * n) / bernoulli(n)
    if ring == ZZ and c.denominator != 1:
        ring = QQ
    base = phi(n - 1, trunc, ring)
    return qs.constant(1, trunc, ring) + base.scale(c)


def _base_series(name, trunc, ring):
    key = (name, ring)
    with _BASE_LOCK:
        hit = _BASE.get(key)
        if hit is not None and hit.trunc >= trunc:
            return hit.truncate(trunc)
    size = max(trunc, 64)
    if name == "Delta":
        s = qs.euler_E(24, max(size - 1, 1), ring).shift(1)
    else:
        s = _eisenstein_series_raw({"E2": 2, "E4": 4, "E6": 6}[name], size, ring)
    with _BASE_LOCK:
        _BASE[key] = s
    return s.truncate(trunc)


_NAMES = ("E2", "E4", "E6", "Delta")
_WEIGHTS = (2, 4, 6, 12)


def mono_weight(mono) -> int:
    return sum(e * w for e, w in zip(mono, _WEIGHTS))


_MONO_CACHE: dict = {}


def mono_series(mono, trunc: int, ring=ZZ) -> QSeries:
    key = (mono, ring)
    hit = _MONO_CACHE.get(key)
    if hit is not None and hit.trunc >= trunc:
        return hit.truncate(trunc)
    d = mono[3]
    inner = max(trunc - d, 0)
    s = qs.constant(1, inner, ring)
    for name, e in zip(_NAMES[:3], mono[:3]):
        if e:
            s = s * qs.pow_int(_base_series(name, inner, ring), e)
    if d:
        # Delta^d = q^d E^{24d}
        s = (s * qs.euler_E(24 * d, inner, ring)).shift(d)
    s = _pad(s, trunc)
    _MONO_CACHE[key] = s
    return s


def _pad(s, trunc):
    """Pad with zeros or cut to exactly `trunc` terms."""
    if s.trunc >= trunc:
        return s.truncate(trunc)
    arr = qs._zeros(trunc, s.ring)
    arr[: s.trunc] = s.coeffs
    return QSeries._wrap(arr, s.ring)


def _fmt_mono(mono):
    parts = []
    for name, e in zip(("E2", "E4", "E6", "Delta"), mono):
        if e == 1:
            parts.append(name)
        elif e:
            parts.append(f"{name}^{e}")
    return "*".join(parts) or "1"


class FormPolynomial:
    """Rational polynomial in E2, E4, E6, Delta; weights may be mixed."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        for mono, c in (terms or {}).items():
            mono = tuple(int(e) for e in mono)
            if len(mono) != 4 or min(mono) < 0:
                raise ValueError(f"bad monomial {mono}")
            c = Fraction(c)
            if c:
                clean[mono] = clean.get(mono, Fraction(0)) + c
        self.terms = {m: c for m, c in clean.items() if c}

    # arithmetic
    def _lift(self, other):
        if isinstance(other, FormPolynomial):
            return other
        return FormPolynomial({(0, 0, 0, 0): other})

    def __add__(self, other):
        other = self._lift(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return FormPolynomial(out)._narrow()

    __radd__ = __add__

    def __neg__(self):
        return FormPolynomial({m: -c for m, c in self.terms.items()})._narrow()

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, FormPolynomial):
            return FormPolynomial({m: c * Fraction(other) for m, c in self.terms.items()})._narrow()
        out = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                out[m] = out.get(m, 0) + c1 * c2
        return FormPolynomial(out)._narrow()

    __rmul__ = __mul__

    def __pow__(self, e):
        out = FormPolynomial({(0, 0, 0, 0): 1})
        for _ in range(e):
            out = out * self
        return out._narrow()

    def __eq__(self, other):
        if not isinstance(other, FormPolynomial):
            other = self._lift(other)
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"{c}*{_fmt_mono(m)}" for m, c in sorted(self.terms.items()))

    def _narrow(self):
        ws = self.weights()
        if len(ws) == 1:
            return Level1Form(self.terms, ws.pop())
        if not ws:
            return self
        return FormPolynomial(self.terms) if type(self) is not FormPolynomial else self

    # structure
    def weights(self) -> set:
        return {mono_weight(m) for m in self.terms}

    @property
    def depth(self) -> int:
        return max((m[0] for m in self.terms), default=0)

    def is_quasimodular(self) -> bool:
        return self.depth > 0

    def is_zero(self) -> bool:
        return not self.terms

    def homogeneous_parts(self) -> dict:
        parts = {}
        for m, c in self.terms.items():
            parts.setdefault(mono_weight(m), {})[m] = c
        return {w: Level1Form(t, w) for w, t in sorted(parts.items())}

    def is_integral_at(self, p: int) -> bool:
        return all(c.denominator % p for c in self.terms.values())

    def reduce_coefficients(self, m: int) -> "FormPolynomial":
        """Coefficients reduced into 0..m-1 (m-integral input)."""
        out = {}
        for mono, c in self.terms.items():
            if math.gcd(c.denominator, m) != 1:
                raise qs.IntegralityError(0, c, m)
            out[mono] = c.numerator * pow(c.denominator, -1, m) % m
        return FormPolynomial(out)._narrow()

    def series(self, trunc: int, ring=None) -> QSeries:
        """q-expansion to `trunc` terms.

        Default ring is ZZ for integral coefficients, else QQ.  For a
        modular ring the monomials are expanded mod m directly.
        """
        if ring is None:
            ring = ZZ if all(c.denominator == 1 for c in self.terms.values()) else QQ
        return _poly_series(self, trunc, ring)


def _poly_series(poly, trunc, ring):
    if ring.is_modular:
        acc = qs.constant(0, trunc, ring)
        for mono, c in poly.terms.items():
            acc = acc + mono_series(mono, trunc, ring).scale(ring(c))
        return acc
    if ring.kind == "ZZ":
        acc = qs.constant(0, trunc, ZZ)
        for mono, c in poly.terms.items():
            acc = acc + mono_series(mono, trunc, ZZ).scale(ZZ(c))
        return acc
    acc = qs.constant(0, trunc, QQ)
    for mono, c in poly.terms.items():
        acc = acc + mono_series(mono, trunc, ZZ).change_ring(QQ).scale(c)
    return acc


class Level1Form(FormPolynomial):
    """Homogeneous FormPolynomial of a declared weight."""

    __slots__ = ("weight",)

    def __init__(self, terms=None, weight: int = 0):
        super().__init__(terms)
        if weight < 0 or weight % 2:
            raise ValueError("weight must be even and nonnegative")
        for m in self.terms:
            if mono_weight(m) != weight:
                raise ValueError(f"monomial {_fmt_mono(m)} has weight {mono_weight(m)}, not {weight}")
        self.weight = weight

    def _narrow(self):
        return self

    def __add__(self, other):
        out = FormPolynomial.__add__(self, other)
        if isinstance(out, Level1Form) or out.terms:
            return out
        return Level1Form({}, self.weight)

    def __mul__(self, other):
        out = FormPolynomial.__mul__(self, other)
        if isinstance(out, Level1Form):
            if isinstance(other, Level1Form):
                out.weight = self.weight + other.weight
            elif not isinstance(other, FormPolynomial):
                out.weight = self.weight
            return out
        if not out.terms:
            w = self.weight + (other.weight if isinstance(other, Level1Form) else 0)
            return Level1Form({}, w)
        return out

    __rmul__ = __mul__

    def __neg__(self):
        return Level1Form({m: -c for m, c in self.terms.items()}, self.weight)

    def __pow__(self, e):
        out = Level1Form({(0, 0, 0, 0): 1}, 0)
        for _ in range(e):
            out = out * self
        return out

    def __repr__(self):
        return f"[wt {self.weight}] " + FormPolynomial.__repr__(self)

    def reduce_coefficients(self, m):
        out = FormPolynomial.reduce_coefficients(self, m)
        return out if isinstance(out, Level1Form) else Level1Form({}, self.weight)


def _gen(mono, weight):
    return Level1Form({mono: 1}, weight)


E2 = _gen((1, 0, 0, 0), 2)
E4 = _gen((0, 1, 0, 0), 4)
E6 = _gen((0, 0, 1, 0), 6)
Delta = _gen((0, 0, 0, 1), 12)
ONE = _gen((0, 0, 0, 0), 0)


def zero_form(weight: int) -> Level1Form:
    return Level1Form({}, weight)


# -- bases and coordinates ----------------------------------------------------------

def basis_monomials(weight: int, kind: str = "full"):
    """Delta^d E4^b E6^c with c in {0, 1}, ordered by increasing d."""
    if kind not in ("full", "cusp"):
        raise ValueError("kind must be 'full' or 'cusp'")
    if weight < 0 or weight % 2:
        return []
    out = []
    for d in range(weight // 12 + 1):
        r = weight - 12 * d
        if r % 4 == 0:
            b, c = r // 4, 0
        elif r >= 6:
            b, c = (r - 6) // 4, 1
        else:
            continue
        if kind == "cusp" and d == 0:
            continue
        out.append((0, b, c, d))
    return out


def level1_basis(weight: int, kind: str = "full") -> list:
    return [Level1Form({m: 1}, weight) for m in basis_monomials(weight, kind)]


def dim_M(weight: int) -> int:
    return len(basis_monomials(weight, "full"))


def dim_S(weight: int) -> int:
    return len(basis_monomials(weight, "cusp"))


def sturm_bound(weight: int) -> int:
    return weight // 12 + 1


def to_basis(f: QSeries, basis: list, check_to: int | None = None) -> list:
    """Exact coordinates of f in `basis`, checked against every known coefficient.

    Over Zmod(m) the system is solved mod m (m prime).
    """
    if not basis:
        if not f.is_zero():
            raise InconsistentSystem("nonzero series in the zero space")
        return []
    trunc = f.trunc if check_to is None else min(check_to, f.trunc)
    ring = f.ring
    if ring.is_modular:
        cols = [b.series(trunc, ring).coeffs for b in basis]
        A = [[int(c[n]) for c in cols] for n in range(trunc)]
        x = solve_mod_p(A, [int(v) for v in f.coeffs[:trunc]], ring.modulus)
    else:
        cols = [b.series(trunc).coeffs for b in basis]
        A = [[c[n] for c in cols] for n in range(trunc)]
        x = solve_exact(A, list(f.coeffs[:trunc]))
    return x


def combine(coords, basis, weight=None) -> Level1Form:
    out = Level1Form({}, weight if weight is not None else (basis[0].weight if basis else 0))
    for c, b in zip(coords, basis):
        out = out + b * Fraction(c)
    return out


def as_level1(f: QSeries, weight: int, kind: str = "full") -> Level1Form:
    """Identify a q-series as a form of the given weight (exact or mod p)."""
    basis = level1_basis(weight, kind)
    x = to_basis(f, basis)
    return combine(x, basis, weight)


@dataclass
class Verdict:
    status: str  # "proved", "checked only" or "mismatch"
    checked: int
    bound: int
    index: int | None = None

    @property
    def ok(self) -> bool:
        return self.status != "mismatch"


def sturm_verify(f: QSeries, g: QSeries, weight: int, modulus: int | None = None) -> Verdict:
    """Compare f and g (mod `modulus` if given) against the level-one Sturm bound."""
    n = min(f.trunc, g.trunc)
    bound = sturm_bound(weight)
    for i in range(n):
        d = f[i] - g[i]
        if modulus is not None:
            if isinstance(d, Fraction):
                d = d.numerator * pow(d.denominator, -1, modulus)
            d %= modulus
        if d != 0:
            return Verdict("mismatch", i, bound, i)
    return Verdict("proved" if n > bound else "checked only", n, bound)


def eisenstein(n: int) -> Level1Form:
    """E_n = 1 - (2n/B_n) Phi_{n-1}, as a polynomial in E4, E6, Delta (E2 itself for n=2)."""
    if n < 2 or n % 2:
        raise ValueError("n must be even and at least 2")
    if n == 2:
        return E2
    return _eisenstein_cached(n)


@lru_cache(maxsize=None)
def _eisenstein_cached(n):
    trunc = sturm_bound(n) + 8
    s = _eisenstein_series_raw(n, trunc, ZZ)
    return as_level1(s, n)


def eisenstein_series(n: int, trunc: int, ring=ZZ) -> QSeries:
    """E_n straight from the divisor-sum formula."""
    return _eisenstein_series_raw(n, trunc, ring)


# -- Hecke and U operators ---------------------------------------------------------

def hecke_T_integer(f: Level1Form, ell: int, trunc: int, ring=None) -> QSeries:
    """f | T(ell) on M_k(1): c(n) = a(ell n) + ell^(k-1) a(n/ell)."""
    if not isinstance(f, Level1Form):
        raise TypeError("need a homogeneous Level1Form")
    if f.is_quasimodular():
        raise ValueError("T(ell) is only defined here on modular (depth 0) forms")
    a = f.series(ell * trunc, ring)
    k = f.weight
    scale = ell ** (k - 1)
    out = {}
    for n in range(trunc):
        c = a[ell * n]
        if n % ell == 0:
            c += scale * a[n // ell]
        out[n] = c
    return QSeries(out, a.ring, trunc)


# -- Chua's function and the p(F, n) congruences ----------------------------------------

@dataclass(frozen=True)
class PFcongParams:
    ell: int
    beta: int
    r: int
    lambda_exp: int

    @classmethod
    def for_prime(cls, ell: int) -> "PFcongParams":
        if ell <= 3 or not qs.is_prime(ell):
            raise ValueError("ell must be a prime > 3")
        beta = pow(24, -1, ell)
        r, rem = divmod(24 * beta - 1, ell)
        lam, rem2 = divmod(ell * ell + 24 * beta - 1, 24 * ell)
        assert rem == 0 and rem2 == 0 and 24 * lam - ell == r
        return cls(ell, beta, r, lam)


def h_ell(ell: int, trunc: int, ring=ZZ) -> QSeries:
    """(eta(tau) eta(ell tau))^(ell-1) = q^((ell^2-1)/24) (E(q) E(q^ell))^(ell-1)."""
    if ell <= 3 or not qs.is_prime(ell):
        raise ValueError("ell must be a prime > 3")
    v = (ell * ell - 1) // 24
    inner = max(trunc - v, 1)
    a = qs.euler_E(ell - 1, inner, ring)
    b = qs.substitute_power(qs.euler_E(ell - 1, -(-inner // ell), ring), ell).truncate(inner)
    return _pad((a * b).shift(v), trunc)


def chua_lift(ell: int, F: Level1Form, extra: int = 6) -> Level1Form:
    """j_ell = h F | U(ell) + (-1)^((ell-1)/2) ell^(k+(ell-1)/2-1) h F(ell tau), as a cusp form.

    The identification is checked on sturm_bound + `extra` coefficients, and
    the q-valuation must reach lambda_ell.
    """
    if F.is_quasimodular():
        raise ValueError("F must be modular")
    k = F.weight
    w = k + ell - 1
    pars = PFcongParams.for_prime(ell)
    T = sturm_bound(w) + extra
    ring = ZZ if all(c.denominator == 1 for c in F.terms.values()) else QQ
    hf = h_ell(ell, ell * T).change_ring(ring) * F.series(ell * T, ring)
    h = h_ell(ell, T).change_ring(ring)
    Fl = qs.substitute_power(F.series(-(-T // ell), ring), ell).truncate(T)
    sign = -1 if ((ell - 1) // 2) % 2 else 1
    j = qs.U_op(hf, ell) + (h * Fl).scale(sign * ell ** (k + (ell - 1) // 2 - 1))
    try:
        form = as_level1(j, w, "cusp")
    except InconsistentSystem as exc:
        raise InconsistentSystem(f"j_{ell} for {F!r} is not a cusp form of weight {w}") from exc
    val = j.valuation()
    if val is not None and val < pars.lambda_exp:
        raise ArithmeticError(f"j_{ell} has valuation {val} < lambda = {pars.lambda_exp}")
    return form


class CongruenceFailure(ArithmeticError):
    def __init__(self, msg, index=None):
        super().__init__(msg if index is None else f"{msg} (first failure at n={index})")
        self.index = index


def pfcong_G(ell: int, F: Level1Form, check_terms: int = 100) -> Level1Form:
    """The modular form G with sum p(F, ell n + beta) q^n = E^r G mod ell.

    Built from the Chua lift divided by Delta^lambda, then checked mod ell on
    `check_terms` coefficients against p(F, n) computed directly.
    """
    pars = PFcongParams.for_prime(ell)
    k = F.weight
    w = k + ell - 1 - 12 * pars.lambda_exp
    if w < 0:
        G = zero_form(0)
    else:
        j = chua_lift(ell, F)
        T = sturm_bound(w) + 6 + pars.lambda_exp
        js = j.series(T, QQ)
        Pw = qs.invert_unit(qs.euler_E(24 * pars.lambda_exp, T - pars.lambda_exp, QQ))
        g = js.divide_q(pars.lambda_exp) * Pw
        G = as_level1(g, w)
    verify_pfcong(ell, F, G, check_terms)
    return G


def verify_pfcong(ell, F, G, check_terms):
    pars = PFcongParams.for_prime(ell)
    ring = Zmod(ell)
    N = ell * check_terms + pars.beta + 1
    lhs = qs.ap_extract(qs.partition_series(N, ring) * F.series(N, ring), ell, pars.beta)
    lhs = lhs.truncate(check_terms)
    rhs = qs.euler_E(pars.r, check_terms, ring) * G.series(check_terms, ring)
    if lhs != rhs:
        bad = next(i for i in range(check_terms) if lhs[i] != rhs[i])
        raise CongruenceFailure(f"p(F, {ell}n+{pars.beta}) != E^{pars.r} G mod {ell}", bad)


def reduce_quasimodular(poly: FormPolynomial, ell: int, check_terms: int = 200) -> FormPolynomial:
    """Rewrite E2 as E_(ell+1) to get a congruent polynomial free of E2 (mod ell)."""
    if not poly.is_quasimodular():
        return poly
    sub = eisenstein(ell + 1)
    out = FormPolynomial()
    for (a, b, c, d), coef in poly.terms.items():
        term = FormPolynomial({(0, b, c, d): coef})
        for _ in range(a):
            term = term * sub
        out = out + term
    out = out.reduce_coefficients(ell)
    ring = Zmod(ell)
    if poly.series(check_terms, ring) != out.series(check_terms, ring):
        raise CongruenceFailure(f"E2 -> E{ell + 1} rewriting failed mod {ell}")
    return out
