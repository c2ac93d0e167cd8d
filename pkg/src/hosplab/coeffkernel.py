"""Exact arithmetic over Gaussian rationals, polynomials and rational functions.

Every series coefficient handled by the library is a rational function whose
denominator is a product of a few known linear factors such as ``z``, ``z - 1``
or ``z - a``.  :class:`RationalFunction` keeps those factors as explicit integer
exponents so pole orders are read off directly, and keeps the numerator as a
:class:`Polynomial` with Gaussian-integer coefficients over one positive common
denominator.  That layout keeps the recurrences in :mod:`hosplab.recurrences`
running on plain Python integers.

``BigRational`` is :class:`fractions.Fraction` from the standard library.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from numbers import Rational
from typing import Iterable, Mapping, Sequence

import mpmath

BigRational = Fraction

__all__ = [
    "BigRational",
    "GaussianRational",
    "Polynomial",
    "RationalFunction",
    "LogComplex",
    "PoleError",
    "ratfunc_arith",
    "ratfunc_differentiate",
    "ratfunc_evaluate",
    "ratfunc_evaluate_log",
    "ratfunc_evaluate_mp",
    "leading_laurent_coefficient",
]


class PoleError(ZeroDivisionError):
    """Raised when a rational function is evaluated at (or next to) a pole."""


# ---------------------------------------------------------------------------
# Gaussian rationals
# ---------------------------------------------------------------------------


class GaussianRational:
    """Exact complex number ``re + i*im`` with rational parts.

    Immutable and hashable.  Accepts ints, Fractions, other GaussianRationals
    and finite Python complex/float values (converted exactly from their binary
    representation).
    """

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        if isinstance(re, GaussianRational):
            r = re
            re, im = r.re, r.im + Fraction(im)
        elif isinstance(re, complex):
            re, im = Fraction(re.real), Fraction(re.imag) + Fraction(im)
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    @classmethod
    def coerce(cls, x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, (int, Rational, float, complex)):
            return cls(x)
        raise TypeError(f"cannot convert {type(x).__name__} to GaussianRational")

    # arithmetic
    def __add__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return GaussianRational.coerce(other) - self

    def __mul__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(self.re * o.re - self.im * o.im,
                                self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def norm(self) -> Fraction:
        """Squared modulus ``re**2 + im**2``."""
        return self.re * self.re + self.im * self.im

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def __truediv__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero GaussianRational")
        p = self * o.conjugate()
        return GaussianRational(p.re / n, p.im / n)

    def __rtruediv__(self, other):
        return GaussianRational.coerce(other) / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return GaussianRational(1) / (self ** (-k))
        out = GaussianRational(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def to_mpc(self):
        return mpmath.mpc(mpmath.mpf(self.re.numerator) / self.re.denominator,
                          mpmath.mpf(self.im.numerator) / self.im.denominator)

    def is_real(self) -> bool:
        return self.im == 0

    def __repr__(self):
        if self.im == 0:
            return f"GaussianRational({self.re})"
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"({self.im})i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}({abs(self.im)})i"


def _split_gaussian(x) -> tuple[int, int, int]:
    """Return integers ``(a, b, d)`` with ``x = (a + i b)/d`` and ``d > 0``."""
    g = GaussianRational.coerce(x)
    d = g.re.denominator * g.im.denominator // math.gcd(g.re.denominator, g.im.denominator)
    return g.re.numerator * (d // g.re.denominator), g.im.numerator * (d // g.im.denominator), d


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------


class Polynomial:
    """Univariate polynomial with Gaussian-rational coefficients.

    Stored as Gaussian-integer coefficient lists ``re``/``im`` (low degree
    first) over a single positive denominator ``den``; the representation is
    canonical (trailing zeros stripped, common content removed from ``den``),
    so structural equality is value equality.
    """

    __slots__ = ("_re", "_im", "_den")

    def __init__(self, coefficients: Iterable = ()):
        parts = [_split_gaussian(c) for c in coefficients]
        if not parts:
            self._set((), (), 1)
            return
        den = reduce(lambda x, y: x * y // math.gcd(x, y), (p[2] for p in parts), 1)
        re = [a * (den // d) for a, _, d in parts]
        im = [b * (den // d) for _, b, d in parts]
        self._set(re, im, den)

    @classmethod
    def _raw(cls, re: Sequence[int], im: Sequence[int], den: int = 1) -> "Polynomial":
        p = cls.__new__(cls)
        p._set(re, im, den)
        return p

    def _set(self, re, im, den):
        re = list(re)
        im = list(im)
        n = max(len(re), len(im))
        re += [0] * (n - len(re))
        im += [0] * (n - len(im))
        while n and re[n - 1] == 0 and im[n - 1] == 0:
            n -= 1
        re, im = re[:n], im[:n]
        if den < 0:
            den, re, im = -den, [-c for c in re], [-c for c in im]
        if n == 0:
            den = 1
        elif den != 1:
            g = math.gcd(den, *re, *im)
            if g > 1:
                den //= g
                re = [c // g for c in re]
                im = [c // g for c in im]
        object.__setattr__(self, "_re", tuple(re))
        object.__setattr__(self, "_im", tuple(im))
        object.__setattr__(self, "_den", den)

    def __setattr__(self, name, value):
        raise AttributeError("Polynomial is immutable")

    # constructors
    @classmethod
    def constant(cls, c) -> "Polynomial":
        return cls([c])

    @classmethod
    def monomial(cls, k: int, c=1) -> "Polynomial":
        return cls([0] * k + [c])

    @classmethod
    def linear_factor(cls, root) -> "Polynomial":
        """The monic polynomial ``z - root``."""
        return cls([-GaussianRational.coerce(root), 1])

    # views
    @property
    def coefficients(self) -> tuple[GaussianRational, ...]:
        d = self._den
        return tuple(GaussianRational(Fraction(a, d), Fraction(b, d))
                     for a, b in zip(self._re, self._im))

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self._re) - 1

    def is_zero(self) -> bool:
        return not self._re

    def is_real(self) -> bool:
        return not any(self._im)

    def __len__(self):
        return len(self._re)

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return (self._re, self._im, self._den) == (other._re, other._im, other._den)

    def __hash__(self):
        return hash((self._re, self._im, self._den))

    def __repr__(self):
        return f"Polynomial({[str(c) for c in self.coefficients]})"

    # arithmetic
    def __add__(self, other: "Polynomial") -> "Polynomial":
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(other)
        d1, d2 = self._den, other._den
        g = math.gcd(d1, d2)
        s1, s2 = d2 // g, d1 // g
        n = max(len(self._re), len(other._re))
        re = [0] * n
        im = [0] * n
        for i, (a, b) in enumerate(zip(self._re, self._im)):
            re[i] += a * s1
            im[i] += b * s1
        for i, (a, b) in enumerate(zip(other._re, other._im)):
            re[i] += a * s2
            im[i] += b * s2
        return Polynomial._raw(re, im, d1 * s1)

    def __neg__(self):
        return Polynomial._raw([-c for c in self._re], [-c for c in self._im], self._den)

    def __sub__(self, other):
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(other)
        return self + (-other)

    def scale(self, c) -> "Polynomial":
        """Multiply by a Gaussian-rational scalar."""
        a, b, d = _split_gaussian(c)
        re = [x * a - y * b for x, y in zip(self._re, self._im)]
        im = [x * b + y * a for x, y in zip(self._re, self._im)]
        return Polynomial._raw(re, im, self._den * d)

    def shift(self, k: int) -> "Polynomial":
        """Multiply by ``z**k`` (k >= 0)."""
        if self.is_zero() or k == 0:
            return self
        return Polynomial._raw([0] * k + list(self._re), [0] * k + list(self._im), self._den)

    def mul_linear(self, root) -> "Polynomial":
        """Multiply by ``(z - root)``."""
        a, b, d = _split_gaussian(root)
        n = len(self._re)
        if n == 0:
            return self
        re = [0] * (n + 1)
        im = [0] * (n + 1)
        for i in range(n):
            x, y = self._re[i], self._im[i]
            re[i + 1] += x * d
            im[i + 1] += y * d
            re[i] -= x * a - y * b
            im[i] -= x * b + y * a
        return Polynomial._raw(re, im, self._den * d)

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            return self.scale(other)
        if self.is_zero() or other.is_zero():
            return Polynomial()
        n, m = len(self._re), len(other._re)
        re = [0] * (n + m - 1)
        im = [0] * (n + m - 1)
        for i in range(n):
            a, b = self._re[i], self._im[i]
            if a == 0 and b == 0:
                continue
            for j in range(m):
                c, e = other._re[j], other._im[j]
                re[i + j] += a * c - b * e
                im[i + j] += a * e + b * c
        return Polynomial._raw(re, im, self._den * other._den)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Polynomial":
        out = Polynomial.constant(1)
        for _ in range(k):
            out = out * self
        return out

    def derivative(self) -> "Polynomial":
        re = [i * c for i, c in enumerate(self._re)][1:]
        im = [i * c for i, c in enumerate(self._im)][1:]
        return Polynomial._raw(re, im, self._den)

    def leading(self) -> GaussianRational:
        if self.is_zero():
            return GaussianRational(0)
        return GaussianRational(Fraction(self._re[-1], self._den), Fraction(self._im[-1], self._den))

    def monic(self) -> "Polynomial":
        return self.scale(GaussianRational(1) / self.leading())

    # evaluation
    def evaluate_exact(self, x) -> GaussianRational:
        """Exact value at a Gaussian-rational point (integer Horner scheme)."""
        if self.is_zero():
            return GaussianRational(0)
        a, b, d = _split_gaussian(x)
        deg = self.degree
        # sum c_k (a+ib)^k d^(deg-k), then divide by d^deg * den
        sr, si = 0, 0
        for k in range(deg, -1, -1):
            sr, si = sr * a - si * b, sr * b + si * a
            dk = d ** (deg - k) if d != 1 else 1
            sr += self._re[k] * dk
            si += self._im[k] * dk
        scale = self._den * d ** deg
        return GaussianRational(Fraction(sr, scale), Fraction(si, scale))

    def evaluate_mp(self, x):
        """Value at an mpmath/complex point in current mpmath precision."""
        z = mpmath.mpc(x)
        sr = mpmath.mpc(0)
        for a, b in zip(reversed(self._re), reversed(self._im)):
            sr = sr * z + mpmath.mpc(a, b)
        return sr / self._den

    def __call__(self, x):
        if isinstance(x, (GaussianRational, int, Fraction)):
            return self.evaluate_exact(x)
        return complex(self.evaluate_mp(x))

    def divmod_linear(self, root) -> tuple["Polynomial", GaussianRational]:
        """Synthetic division by ``(z - root)``: returns (quotient, remainder)."""
        if self.is_zero():
            return Polynomial(), GaussianRational(0)
        a, b, d = _split_gaussian(root)
        deg = self.degree
        if d == 1:
            qr = [0] * deg
            qi = [0] * deg
            cr, ci = self._re[deg], self._im[deg]
            for k in range(deg - 1, -1, -1):
                qr[k], qi[k] = cr, ci
                cr, ci = self._re[k] + cr * a - ci * b, self._im[k] + cr * b + ci * a
            return (Polynomial._raw(qr, qi, self._den),
                    GaussianRational(Fraction(cr, self._den), Fraction(ci, self._den)))
        r = GaussianRational(Fraction(a, d), Fraction(b, d))
        coeffs = self.coefficients
        q = [GaussianRational(0)] * deg
        acc = coeffs[deg]
        for k in range(deg - 1, -1, -1):
            q[k] = acc
            acc = coeffs[k] + acc * r
        return Polynomial(q), acc

    def divmod(self, other: "Polynomial") -> tuple["Polynomial", "Polynomial"]:
        """Euclidean division over the Gaussian rationals."""
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coefficients)
        oc = other.coefficients
        lead = oc[-1]
        m = len(oc) - 1
        if len(rem) - 1 < m:
            return Polynomial(), self
        q = [GaussianRational(0)] * (len(rem) - m)
        for k in range(len(rem) - 1 - m, -1, -1):
            c = rem[k + m] / lead
            q[k] = c
            if c:
                for j in range(m + 1):
                    rem[k + j] = rem[k + j] - c * oc[j]
        return Polynomial(q), Polynomial(rem[:m])

    def gcd(self, other: "Polynomial") -> "Polynomial":
        """Monic greatest common divisor."""
        a, b = self, other
        while not b.is_zero():
            a, b = b, a.divmod(b)[1]
        if a.is_zero():
            return a
        return a.monic()

    def gaussian_integer_parts(self) -> tuple[tuple[int, ...], tuple[int, ...], int]:
        """Raw storage ``(re, im, den)``; coefficient k equals (re[k]+i im[k])/den."""
        return self._re, self._im, self._den


# ---------------------------------------------------------------------------
# Rational functions
# ---------------------------------------------------------------------------


def _root_key(r) -> GaussianRational:
    return GaussianRational.coerce(r)


class RationalFunction:
    """Exact ratio ``num / (prod (z - r)**k_r * extra)``.

    ``factors`` maps each known root ``r`` (a Gaussian rational) to a positive
    exponent.  ``extra`` is a monic polynomial holding any remaining
    denominator, normally 1; it only appears after dividing by a rational
    function whose numerator has roots outside the known set.

    Construction normalizes: known roots are divided out of ``num`` while the
    matching exponent is positive, and ``num`` is reduced against ``extra``.
    """

    __slots__ = ("_num", "_factors", "_extra")

    def __init__(self, numerator, factors: Mapping | None = None,
                 extra: Polynomial | None = None, *, known_roots: Iterable = ()):
        num = numerator if isinstance(numerator, Polynomial) else Polynomial.constant(numerator)
        fac: dict[GaussianRational, int] = {}
        for r, k in (factors or {}).items():
            k = int(k)
            if k < 0:
                # a negative denominator exponent is a numerator factor
                for _ in range(-k):
                    num = num.mul_linear(r)
                k = 0
            fac[_root_key(r)] = fac.get(_root_key(r), 0) + k
        for r in known_roots:
            fac.setdefault(_root_key(r), 0)
        ex = extra if extra is not None else Polynomial.constant(1)
        if ex.is_zero():
            raise ZeroDivisionError("zero denominator")
        if ex.degree > 0:
            # pull known roots out of the extra part as well
            for r in list(fac):
                q, rem = ex.divmod_linear(r)
                while not rem and q.degree >= 0 and ex.degree > 0:
                    fac[r] += 1
                    ex = q
                    q, rem = ex.divmod_linear(r)
            lead = ex.leading()
            num = num.scale(GaussianRational(1) / lead)
            ex = ex.monic()
            if ex.degree > 0 and not num.is_zero():
                g = num.gcd(ex)
                if g.degree > 0:
                    num = num.divmod(g)[0]
                    ex = ex.divmod(g)[0].monic()
        else:
            num = num.scale(GaussianRational(1) / ex.leading())
            ex = Polynomial.constant(1)
        if num.is_zero():
            fac = {r: 0 for r in fac}
            ex = Polynomial.constant(1)
        else:
            for r, k in fac.items():
                while k > 0:
                    q, rem = num.divmod_linear(r)
                    if rem:
                        break
                    num, k = q, k - 1
                fac[r] = k
        object.__setattr__(self, "_num", num)
        object.__setattr__(self, "_factors",
                           dict(sorted(fac.items(), key=lambda kv: (kv[0].re, kv[0].im))))
        object.__setattr__(self, "_extra", ex)

    def __setattr__(self, name, value):
        raise AttributeError("RationalFunction is immutable")

    # constructors
    @classmethod
    def from_polynomial(cls, p, known_roots: Iterable = ()) -> "RationalFunction":
        return cls(p, {}, known_roots=known_roots)

    @classmethod
    def constant(cls, c, known_roots: Iterable = ()) -> "RationalFunction":
        return cls(Polynomial.constant(c), {}, known_roots=known_roots)

    @classmethod
    def z(cls, known_roots: Iterable = ()) -> "RationalFunction":
        return cls(Polynomial([0, 1]), {}, known_roots=known_roots)

    @classmethod
    def pole(cls, root, order: int = 1, coefficient=1, known_roots: Iterable = ()) -> "RationalFunction":
        """``coefficient / (z - root)**order``."""
        return cls(Polynomial.constant(coefficient), {root: order}, known_roots=known_roots)

    # views
    @property
    def numerator(self) -> Polynomial:
        """Numerator polynomial (the factored denominator multiplied out is ``denominator``)."""
        return self._num

    @property
    def denominator(self) -> Polynomial:
        d = self._extra
        for r, k in self._factors.items():
            for _ in range(k):
                d = d.mul_linear(r)
        return d

    @property
    def factors(self) -> dict[GaussianRational, int]:
        return {r: k for r, k in self._factors.items() if k > 0}

    @property
    def known_roots(self) -> tuple[GaussianRational, ...]:
        return tuple(self._factors)

    @property
    def extra(self) -> Polynomial:
        return self._extra

    def pole_order(self, root) -> int:
        """Order of the pole at a known root (0 if regular there)."""
        return self._factors.get(_root_key(root), 0)

    def is_zero(self) -> bool:
        return self._num.is_zero()

    def _parts(self):
        return self._num, self._factors, self._extra

    # arithmetic
    def _common(self, other: "RationalFunction"):
        roots = dict.fromkeys(list(self._factors) + list(other._factors))
        fac = {r: max(self._factors.get(r, 0), other._factors.get(r, 0)) for r in roots}

        def lift(f: RationalFunction, ex_mul: Polynomial) -> Polynomial:
            p = f._num * ex_mul
            for r in roots:
                for _ in range(fac[r] - f._factors.get(r, 0)):
                    p = p.mul_linear(r)
            return p

        if self._extra.degree <= 0 and other._extra.degree <= 0:
            one = Polynomial.constant(1)
            return lift(self, one), lift(other, one), fac, one
        g = self._extra.gcd(other._extra)
        m1 = other._extra.divmod(g)[0]
        m2 = self._extra.divmod(g)[0]
        return lift(self, m1), lift(other, m2), fac, self._extra * m1

    @staticmethod
    def _coerce(x) -> "RationalFunction":
        if isinstance(x, RationalFunction):
            return x
        if isinstance(x, Polynomial):
            return RationalFunction(x)
        return RationalFunction.constant(x)

    def __add__(self, other):
        other = self._coerce(other)
        a, b, fac, ex = self._common(other)
        return RationalFunction(a + b, fac, ex)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self._num, self._factors, self._extra)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        fac = dict(self._factors)
        for r, k in other._factors.items():
            fac[r] = fac.get(r, 0) + k
        return RationalFunction(self._num * other._num, fac, self._extra * other._extra)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        fac = dict(self._factors)
        for r in other._factors:
            fac.setdefault(r, 0)
        num = self._num * other._extra
        for r, k in other._factors.items():
            for _ in range(k):
                num = num.mul_linear(r)
        # divide known roots out of the divisor's numerator before falling back
        # to the general extra denominator
        den = other._num
        for r in list(fac):
            q, rem = den.divmod_linear(r)
            while den.degree > 0 and not rem:
                fac[r] += 1
                den = q
                q, rem = den.divmod_linear(r)
        return RationalFunction(num, fac, self._extra * den)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, k: int):
        if k < 0:
            return RationalFunction.constant(1) / (self ** (-k))
        out = RationalFunction.constant(1, known_roots=self._factors)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def scale(self, c) -> "RationalFunction":
        return RationalFunction(self._num.scale(c), self._factors, self._extra)

    def derivative(self) -> "RationalFunction":
        """Exact derivative.

        For ``N / (prod (z - r)**k_r)`` the result is
        ``(N' prod (z - r) - N sum_r k_r prod_{s != r} (z - s)) / prod (z - r)**(k_r + 1)``;
        a nontrivial extra denominator is handled by the quotient rule.
        """
        num, fac, ex = self._parts()
        active = [r for r, k in fac.items() if k > 0]
        top = num.derivative()
        for r in active:
            top = top.mul_linear(r)
        for r in active:
            term = num.scale(fac[r])
            for s in active:
                if s != r:
                    term = term.mul_linear(s)
            top = top - term
        new_fac = {r: (k + 1 if k > 0 else 0) for r, k in fac.items()}
        if ex.degree <= 0:
            return RationalFunction(top, new_fac)
        # (top/P)/E with E non-constant: d/dz[A/E] = (A' E - A E')/E^2 where A = N/P
        plain = RationalFunction(num, fac)
        a_prime = RationalFunction(top, new_fac)
        e = RationalFunction(ex)
        return (a_prime * e - plain * RationalFunction(ex.derivative())) / (e * e)

    def __repr__(self):
        dens = " * ".join(f"(z - ({r}))^{k}" for r, k in self._factors.items() if k > 0)
        if self._extra.degree > 0:
            dens = (dens + " * " if dens else "") + repr(self._extra)
        return f"RationalFunction({self._num!r} / [{dens or '1'}])"

    # evaluation
    def evaluate_exact(self, x) -> GaussianRational:
        x = GaussianRational.coerce(x)
        d = self._extra.evaluate_exact(x)
        for r, k in self._factors.items():
            if k:
                d = d * (x - r) ** k
        if not d:
            raise PoleError(f"evaluation at a pole z = {x}")
        return self._num.evaluate_exact(x) / d

    def _check_pole(self, z: complex, tol: float):
        for r, k in self._factors.items():
            if k > 0:
                rc = complex(r)
                if abs(z - rc) <= tol * max(1.0, abs(rc)):
                    raise PoleError(f"evaluation within {tol:g} of the pole z = {rc}")

    def evaluate_mp(self, z, *, tol: float = 1e-13):
        """High-precision value as an mpmath ``mpc``.

        The point is converted exactly from binary64 and the numerator summed
        in integer arithmetic, so the only rounding is the final conversion.
        """
        zc = complex(z)
        self._check_pole(zc, tol)
        val = self.evaluate_exact(GaussianRational(zc))
        return val.to_mpc()

    def __call__(self, z):
        if isinstance(z, (GaussianRational, int, Fraction)):
            return self.evaluate_exact(z)
        return ratfunc_evaluate(self, z)


# ---------------------------------------------------------------------------
# Log-magnitude complex numbers
# ---------------------------------------------------------------------------


def _wrap_phase(phi: float) -> float:
    phi = math.remainder(phi, 2 * math.pi)
    if phi <= -math.pi:
        phi += 2 * math.pi
    return phi


@dataclass(frozen=True)
class LogComplex:
    """Complex number stored as ``exp(log_magnitude + i*phase)``.

    Covers magnitudes far outside binary64 range.  Zero has
    ``log_magnitude = -inf``.  Multiplication and division add/subtract the
    fields; addition goes through mpmath.
    """

    log_magnitude: float
    phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "log_magnitude", float(self.log_magnitude))
        object.__setattr__(self, "phase", _wrap_phase(float(self.phase)))

    @classmethod
    def from_complex(cls, z) -> "LogComplex":
        z = complex(z)
        if z == 0:
            return cls(-math.inf, 0.0)
        return cls(math.log(abs(z)), math.atan2(z.imag, z.real))

    @classmethod
    def from_mp(cls, z) -> "LogComplex":
        z = mpmath.mpc(z)
        if z == 0:
            return cls(-math.inf, 0.0)
        return cls(float(mpmath.log(abs(z))), float(mpmath.arg(z)))

    @classmethod
    def from_log(cls, logz) -> "LogComplex":
        """From a (possibly huge) complex logarithm."""
        logz = complex(logz)
        return cls(logz.real, logz.imag)

    @classmethod
    def from_gaussian(cls, g: GaussianRational) -> "LogComplex":
        if not g:
            return cls(-math.inf, 0.0)
        with mpmath.workprec(80):
            return cls.from_mp(g.to_mpc())

    def to_mp(self):
        if self.log_magnitude == -math.inf:
            return mpmath.mpc(0)
        return mpmath.exp(mpmath.mpc(self.log_magnitude, self.phase))

    def to_complex(self) -> complex:
        if self.log_magnitude == -math.inf:
            return 0j
        if self.log_magnitude > 709.7:
            raise OverflowError("LogComplex magnitude exceeds binary64 range")
        return cmath.rect(math.exp(self.log_magnitude), self.phase)

    __complex__ = to_complex

    @property
    def log10_magnitude(self) -> float:
        return self.log_magnitude / math.log(10)

    def __abs__(self):
        return math.exp(self.log_magnitude)

    def __mul__(self, other):
        if not isinstance(other, LogComplex):
            other = LogComplex.from_complex(other)
        return LogComplex(self.log_magnitude + other.log_magnitude, self.phase + other.phase)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, LogComplex):
            other = LogComplex.from_complex(other)
        if other.log_magnitude == -math.inf:
            raise ZeroDivisionError("LogComplex division by zero")
        return LogComplex(self.log_magnitude - other.log_magnitude, self.phase - other.phase)

    def __pow__(self, k: float):
        return LogComplex(self.log_magnitude * k, self.phase * k)

    def __neg__(self):
        return LogComplex(self.log_magnitude, self.phase + math.pi)

    def __add__(self, other):
        if not isinstance(other, LogComplex):
            other = LogComplex.from_complex(other)
        with mpmath.workdps(30):
            return LogComplex.from_mp(self.to_mp() + other.to_mp())

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, LogComplex):
            other = LogComplex.from_complex(other)
        return self + (-other)

    def conjugate(self):
        return LogComplex(self.log_magnitude, -self.phase)


# ---------------------------------------------------------------------------
# Function-style interface over the classes above
# ---------------------------------------------------------------------------


def ratfunc_arith(lhs: RationalFunction, rhs: RationalFunction, op: str) -> RationalFunction:
    """Exact ``lhs <op> rhs`` for op in {'add', 'sub', 'mul', 'div'}."""
    if op == "add":
        return lhs + rhs
    if op == "sub":
        return lhs - rhs
    if op == "mul":
        return lhs * rhs
    if op == "div":
        return lhs / rhs
    raise ValueError(f"unknown operation {op!r}")


def ratfunc_differentiate(f: RationalFunction) -> RationalFunction:
    return f.derivative()


def ratfunc_evaluate(f: RationalFunction, z, *, tol: float = 1e-13) -> complex:
    """Binary64 value of ``f(z)``; raises OverflowError outside binary64 range."""
    with mpmath.workprec(80):
        v = f.evaluate_mp(z, tol=tol)
        if abs(v) > mpmath.mpf("1.7e308"):
            raise OverflowError("value outside binary64 range; use ratfunc_evaluate_log")
        return complex(v)


def ratfunc_evaluate_log(f: RationalFunction, z, *, tol: float = 1e-13) -> LogComplex:
    """``f(z)`` as a :class:`LogComplex` (no overflow)."""
    with mpmath.workprec(80):
        return LogComplex.from_mp(f.evaluate_mp(z, tol=tol))


def ratfunc_evaluate_mp(f: RationalFunction, z, *, tol: float = 1e-13):
    """``f(z)`` as an mpmath ``mpc`` at the current working precision."""
    return f.evaluate_mp(z, tol=tol)


def leading_laurent_coefficient(f: RationalFunction, pole, order: int) -> GaussianRational:
    """Coefficient of ``(z - pole)**(-order)`` in the Laurent expansion at ``pole``.

    ``pole`` must be one of ``f``'s known roots.  Returns 0 when ``order``
    exceeds the pole order.  Orders below the pole order need Taylor terms of
    the analytic cofactor; requests reaching past the numerator degree plus
    the pole order raise ValueError.
    """
    r = _root_key(pole)
    if r not in f.known_roots:
        raise ValueError(f"{pole} is not a known root of this rational function")
    k = f.pole_order(r)
    if order > k:
        return GaussianRational(0)
    if order <= 0 and -order > f.numerator.degree + k:
        raise ValueError("requested order exceeds the polynomial degree budget")
    j = k - order  # Taylor index of the cofactor g = f * (z - r)**k
    num, fac, ex = f._parts()
    # g = num / (extra * prod_{s != r} (z - s)**k_s); expand around r
    shifted_num = _taylor_shift(num, r, j)
    den = ex
    for s, ks in fac.items():
        if s != r:
            for _ in range(ks):
                den = den.mul_linear(s)
    shifted_den = _taylor_shift(den, r, j)
    if not shifted_den[0]:
        raise ValueError("cofactor singular at the pole")
    # power-series division
    q: list[GaussianRational] = []
    for i in range(j + 1):
        acc = shifted_num[i] if i < len(shifted_num) else GaussianRational(0)
        for m in range(i):
            if i - m < len(shifted_den):
                acc = acc - q[m] * shifted_den[i - m]
        q.append(acc / shifted_den[0])
    return q[j]


def _taylor_shift(p: Polynomial, r: GaussianRational, upto: int) -> list[GaussianRational]:
    """Coefficients of ``p(r + t)`` in powers of ``t`` up to ``t**upto``."""
    out = []
    cur = p
    for i in range(upto + 1):
        if cur.is_zero():
            out.append(GaussianRational(0))
            continue
        q, rem = cur.divmod_linear(r)
        out.append(rem)
        cur = q
    return out
