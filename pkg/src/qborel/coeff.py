"""Exact coefficient arithmetic.

Everything downstream computes over the field Q(q) of rational functions in
the deformation parameter, extended when needed by a single adjoined
transcendental ``lam`` (a free character value), giving Q(q)(lam).  All
arithmetic is exact: rational numbers are ``fractions.Fraction``, and
rational functions are reduced to a unique canonical form so that structural
equality decides mathematical equality.

The two levels share one pair of classes:

* ``LaurentPoly`` -- sparse Laurent polynomial, coefficient values are either
  ``Fraction`` (the q-level) or ``RationalFunction`` (the lam-level).
* ``RationalFunction`` -- quotient of two Laurent polynomials in reduced
  canonical form (denominator a true polynomial with nonzero constant term,
  primitive with positive leading coefficient at the q-level, monic at the
  lam-level).
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd as _int_gcd


class PoleError(ZeroDivisionError):
    """Evaluation at a point where the denominator vanishes."""


def _is_base(c):
    return isinstance(c, (Fraction, int))


def _coeff_zero(sample):
    if _is_base(sample):
        return Fraction(0)
    return sample.zero()


def _coeff_one(sample):
    if _is_base(sample):
        return Fraction(1)
    return sample.one()


class LaurentPoly:
    """Sparse Laurent polynomial; map from integer exponent to coefficient.

    Immutable; zero coefficients are never stored, so two equal polynomials
    have identical coefficient maps.
    """

    __slots__ = ("c",)

    def __init__(self, coeffs=None):
        c = {}
        if coeffs:
            for e, v in coeffs.items():
                if isinstance(v, int):
                    v = Fraction(v)
                if v:
                    c[e] = v
        self.c = c

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero():
        return LaurentPoly()

    @staticmethod
    def term(coeff, exp=0):
        return LaurentPoly({exp: coeff})

    # -- predicates and structure -----------------------------------------

    def is_zero(self):
        return not self.c

    def __bool__(self):
        return bool(self.c)

    def degree(self):
        if not self.c:
            raise ValueError("zero polynomial has no degree")
        return max(self.c)

    def valuation(self):
        if not self.c:
            raise ValueError("zero polynomial has no valuation")
        return min(self.c)

    def leading(self):
        return self.c[self.degree()]

    def __eq__(self, other):
        return isinstance(other, LaurentPoly) and self.c == other.c

    def __hash__(self):
        return hash(frozenset(self.c.items()))

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        c = dict(self.c)
        for e, v in other.c.items():
            w = c.get(e)
            if w is None:
                c[e] = v
            else:
                w = w + v
                if w:
                    c[e] = w
                else:
                    del c[e]
        out = LaurentPoly.__new__(LaurentPoly)
        out.c = c
        return out

    def __neg__(self):
        out = LaurentPoly.__new__(LaurentPoly)
        out.c = {e: -v for e, v in self.c.items()}
        return out

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not self.c or not other.c:
            return LaurentPoly()
        c = {}
        for e1, v1 in self.c.items():
            for e2, v2 in other.c.items():
                e = e1 + e2
                w = c.get(e)
                if w is None:
                    c[e] = v1 * v2
                else:
                    w = w + v1 * v2
                    if w:
                        c[e] = w
                    else:
                        del c[e]
        out = LaurentPoly.__new__(LaurentPoly)
        out.c = c
        return out

    def scale(self, k):
        if _is_base(k):
            k = Fraction(k)
        if not k:
            return LaurentPoly()
        out = LaurentPoly.__new__(LaurentPoly)
        out.c = {e: v * k for e, v in self.c.items()}
        return out

    def shift(self, k):
        """Multiply by var**k."""
        out = LaurentPoly.__new__(LaurentPoly)
        out.c = {e + k: v for e, v in self.c.items()}
        return out

    def __pow__(self, n):
        if n < 0:
            raise ValueError("negative power of a polynomial")
        out = LaurentPoly({0: _coeff_one(next(iter(self.c.values())))}) if self.c else None
        if n == 0:
            if out is None:
                raise ValueError("0**0 not defined here")
            return out
        acc = None
        base = self
        while n:
            if n & 1:
                acc = base if acc is None else acc * base
            n >>= 1
            if n:
                base = base * base
        return acc

    def evaluate(self, x):
        """Evaluate at a nonzero Fraction (base level only)."""
        if x == 0:
            if any(e < 0 for e in self.c):
                raise PoleError("evaluation at 0 with negative exponents")
        total = Fraction(0)
        for e, v in self.c.items():
            total += v * (Fraction(x) ** e)
        return total

    def render(self, var="q"):
        return render_poly(self, var)

    def __repr__(self):
        return f"LaurentPoly({self.render()})"


# ---------------------------------------------------------------------------
# dense helpers for gcd (coefficients form a field)
# ---------------------------------------------------------------------------


def _dense(p: LaurentPoly):
    """(valuation, [c0, c1, ...]) with c0 the valuation coefficient."""
    v = p.valuation()
    d = p.degree()
    sample = p.leading()
    row = [_coeff_zero(sample)] * (d - v + 1)
    for e, cv in p.c.items():
        row[e - v] = cv
    return v, row


def _dense_trim(row):
    while row and not row[-1]:
        row.pop()
    return row


def _dense_divmod(a, b):
    """Polynomial division of dense coefficient lists over a field."""
    a = list(a)
    db = len(b) - 1
    lead = b[-1]
    q = [_coeff_zero(lead)] * max(0, len(a) - db)
    while len(a) - 1 >= db and _dense_trim(a):
        da = len(a) - 1
        if da < db:
            break
        f = a[-1] / lead
        q[da - db] = f
        for i in range(db + 1):
            a[da - db + i] = a[da - db + i] - f * b[i]
        a.pop()
    return q, _dense_trim(a)


def _dense_gcd(a, b):
    a = _dense_trim(list(a))
    b = _dense_trim(list(b))
    while b:
        _, r = _dense_divmod(a, b)
        a, b = b, r
    if not a:
        return a
    lead = a[-1]
    return [x / lead for x in a]


def _poly_from_dense(val, row):
    return LaurentPoly({val + i: c for i, c in enumerate(row) if c})


class RationalFunction:
    """Quotient of Laurent polynomials in canonical reduced form.

    The denominator is normalized to a polynomial with nonzero constant term;
    it is primitive with positive leading coefficient over Q, and monic when
    the coefficients themselves are rational functions.  The numerator may
    keep negative exponents.  Equality is structural.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: LaurentPoly, den: LaurentPoly):
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if num.is_zero():
            self.num = LaurentPoly()
            self.den = LaurentPoly({0: _coeff_one(den.c[den.degree()])})
            return
        # shift the denominator to a true polynomial with nonzero constant term
        dv = den.valuation()
        if dv != 0:
            den = den.shift(-dv)
            num = num.shift(-dv)
        nv, nrow = _dense(num)
        _, drow = _dense(den)
        g = _dense_gcd(nrow, drow)
        if len(g) > 1:
            nrow, _ = _dense_divmod(nrow, g)
            drow, _ = _dense_divmod(drow, g)
        num = _poly_from_dense(nv, _dense_trim(nrow))
        den = _poly_from_dense(0, _dense_trim(drow))
        # gcd cancellation can reintroduce a var factor in the denominator
        dv = den.valuation()
        if dv != 0:
            den = den.shift(-dv)
            num = num.shift(-dv)
        sample = den.leading()
        if _is_base(sample):
            # primitive, positive leading coefficient
            nums = [v.numerator for v in den.c.values()]
            dens = [v.denominator for v in den.c.values()]
            g_num = 0
            for x in nums:
                g_num = _int_gcd(g_num, abs(x))
            l_den = 1
            for x in dens:
                l_den = l_den * x // _int_gcd(l_den, x)
            k = Fraction(l_den, g_num)
            if den.leading() < 0:
                k = -k
            if k != 1:
                den = den.scale(k)
                num = num.scale(k)
        else:
            lead = den.leading()
            if lead != lead.one():
                inv = lead.one() / lead
                den = den.scale(inv)
                num = num.scale(inv)
        self.num = num
        self.den = den

    # -- structure ---------------------------------------------------------

    def is_zero(self):
        return self.num.is_zero()

    def __bool__(self):
        return bool(self.num)

    def __eq__(self, other):
        return (
            isinstance(other, RationalFunction)
            and self.num == other.num
            and self.den == other.den
        )

    def __hash__(self):
        return hash((self.num, self.den))

    def zero(self):
        return RationalFunction(LaurentPoly(), self.den)

    def one(self):
        one = LaurentPoly({0: _coeff_one(self.den.leading())})
        return RationalFunction(one, one)

    def is_one(self):
        return self == self.one()

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        if not self.num:
            return other
        if not other.num:
            return self
        return RationalFunction(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    def __neg__(self):
        out = RationalFunction.__new__(RationalFunction)
        out.num = -self.num
        out.den = self.den
        return out

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not self.num or not other.num:
            return RationalFunction(LaurentPoly(), self.den)
        return RationalFunction(self.num * other.num, self.den * other.den)

    def inv(self):
        if not self.num:
            raise ZeroDivisionError("inverting zero")
        return RationalFunction(self.den, self.num)

    def __truediv__(self, other):
        if not other.num:
            raise ZeroDivisionError("division by zero rational function")
        return RationalFunction(self.num * other.den, self.den * other.num)

    def __pow__(self, n):
        if n < 0:
            return self.inv() ** (-n)
        acc = self.one()
        base = self
        while n:
            if n & 1:
                acc = acc * base
            n >>= 1
            base = base * base
        return acc

    def render(self, var="q"):
        if self.den == LaurentPoly({0: Fraction(1)}) or (
            not _is_base(self.den.leading())
            and self.den.c == {0: self.den.leading().one()}
        ):
            return render_poly(self.num, var)
        ns = render_poly(self.num, var)
        ds = render_poly(self.den, var)
        if len(self.num.c) > 1:
            ns = "(" + ns + ")"
        if len(self.den.c) > 1:
            ds = "(" + ds + ")"
        return f"{ns}/{ds}"

    def __repr__(self):
        return f"RationalFunction({self.render()})"


# ---------------------------------------------------------------------------
# the q-level tower: Q(q)
# ---------------------------------------------------------------------------

LP_Q_ONE = LaurentPoly({0: Fraction(1)})


def rfq(num: LaurentPoly, den: LaurentPoly = None) -> RationalFunction:
    return RationalFunction(num, den if den is not None else LP_Q_ONE)


def rfq_const(x) -> RationalFunction:
    return rfq(LaurentPoly({0: Fraction(x)}))


def rfq_qpow(k: int) -> RationalFunction:
    return rfq(LaurentPoly({k: Fraction(1)}))


RFQ_ZERO = rfq_const(0)
RFQ_ONE = rfq_const(1)


def q_number(n: int, d: int = 1) -> RationalFunction:
    """Balanced quantum integer [n] in q**d: (q_a**n - q_a**-n)/(q_a - q_a**-1)."""
    if d <= 0:
        raise ValueError("d must be positive")
    if n == 0:
        return RFQ_ZERO
    sign = 1
    if n < 0:
        n, sign = -n, -1
    coeffs = {d * k: Fraction(sign) for k in range(n - 1, -n - 1, -2)}
    return rfq(LaurentPoly(coeffs))


def q_factorial(n: int, d: int = 1) -> RationalFunction:
    acc = RFQ_ONE
    for k in range(2, n + 1):
        acc = acc * q_number(k, d)
    return acc


def eval_at(f: RationalFunction, q0) -> Fraction:
    """Exact evaluation of a q-level rational function at a nonzero rational."""
    q0 = Fraction(q0)
    if q0 == 0:
        raise PoleError("q = 0 is outside the Laurent domain")
    d = f.den.evaluate(q0)
    if d == 0:
        raise PoleError(f"denominator vanishes at q = {q0}")
    return f.num.evaluate(q0) / d


# ---------------------------------------------------------------------------
# the lam-level tower: Q(q)(lam), exactly one adjoined transcendental
# ---------------------------------------------------------------------------

LP_LAM_ONE = LaurentPoly({0: RFQ_ONE})


class Scalar(RationalFunction):
    """Element of Q(q)(lam): rational function in lam over Q(q).

    Thin alias used by the algebra layer; all behaviour lives in
    ``RationalFunction`` with ``RationalFunction`` coefficients.
    """

    __slots__ = ()


def sc(num: LaurentPoly, den: LaurentPoly = None) -> Scalar:
    out = Scalar(num, den if den is not None else LP_LAM_ONE)
    return out


def sc_from_rfq(x: RationalFunction) -> Scalar:
    return sc(LaurentPoly({0: x}))


def sc_const(x) -> Scalar:
    return sc_from_rfq(rfq_const(x))


def sc_qpow(k: int) -> Scalar:
    return sc_from_rfq(rfq_qpow(k))


def sc_lam_pow(k: int) -> Scalar:
    return sc(LaurentPoly({k: RFQ_ONE}))


SC_ZERO = sc_const(0)
SC_ONE = sc_const(1)
SC_LAM = sc_lam_pow(1)


def is_q_level(x: RationalFunction) -> bool:
    """True when the coefficients are plain rationals (the Q(q) tower)."""
    return _is_base(x.den.leading())


def is_lam_free(x: Scalar) -> bool:
    return (not x.num or (set(x.num.c) == {0})) and set(x.den.c) == {0}


def sc_to_rfq(x: Scalar) -> RationalFunction:
    if not is_lam_free(x):
        raise ValueError(f"scalar {x.render('lam')} involves lam")
    num = x.num.c.get(0, RFQ_ZERO)
    den = x.den.c[0]
    return num / den


def sc_substitute_lam(x: Scalar, value: Scalar) -> Scalar:
    """Substitute a concrete value for lam (value must not hit the poles)."""

    def ev(p: LaurentPoly) -> Scalar:
        total = SC_ZERO
        for e, c in p.c.items():
            total = total + sc_from_rfq(c) * (value ** e)
        return total

    den = ev(x.den)
    if not den:
        raise PoleError("lam substitution hits a pole")
    return Scalar((ev(x.num) / den).num, (ev(x.num) / den).den)


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------


def _render_coeff(c, wrap):
    if _is_base(c):
        return str(c), c < 0
    s = c.render("q")
    neg = False
    if wrap and (("+" in s[1:]) or ("-" in s[1:]) or "/" in s):
        s = "(" + s + ")"
    elif s.startswith("-"):
        neg = True
    return s, neg


def render_poly(p: LaurentPoly, var="q") -> str:
    """Fixed rendering grammar: terms by descending exponent, var^k powers."""
    if p.is_zero():
        return "0"
    parts = []
    for e in sorted(p.c, reverse=True):
        c = p.c[e]
        if e == 0:
            body = None
        elif e == 1:
            body = var
        else:
            body = f"{var}^{e}"
        if _is_base(c):
            neg = c < 0
            mag = -c if neg else c
            if body is None:
                text = str(mag)
            elif mag == 1:
                text = body
            else:
                text = f"{str(mag)}{body}"
        else:
            s, neg = _render_coeff(c, wrap=True)
            if neg:
                s = s[1:]
            if body is None:
                text = s
            elif s == "1":
                text = body
            else:
                text = f"{s}{body}"
        if not parts:
            parts.append(("-" if neg else "") + text)
        else:
            parts.append(("- " if neg else "+ ") + text)
    return " ".join(parts)


def render_scalar(x: Scalar) -> str:
    return x.render("lam")


# ---------------------------------------------------------------------------
# parsing (same grammar the renderer emits, plus *, parentheses)
# ---------------------------------------------------------------------------


class ParseError(ValueError):
    pass


def _tokenize(s):
    toks = []
    i = 0
    while i < len(s):
        ch = s[i]
        if ch.isspace():
            i += 1
            continue
        if ch in "+-*/()^":
            toks.append(ch)
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < len(s) and s[j].isdigit():
                j += 1
            toks.append(int(s[i:j]))
            i = j
            continue
        if s.startswith("lam", i):
            toks.append("lam")
            i += 3
            continue
        if ch == "q":
            toks.append("q")
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r} in {s!r}")
    return toks


class _Parser:
    def __init__(self, toks):
        self.toks = toks
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self):
        t = self.peek()
        self.i += 1
        return t

    def parse(self) -> Scalar:
        v = self.expr()
        if self.peek() is not None:
            raise ParseError(f"trailing tokens near {self.peek()!r}")
        return v

    def expr(self) -> Scalar:
        sign = 1
        while self.peek() in ("+", "-"):
            if self.next() == "-":
                sign = -sign
        v = self.term()
        if sign < 0:
            v = SC_ZERO - v
        while self.peek() in ("+", "-"):
            op = self.next()
            w = self.term()
            v = v + w if op == "+" else v - w
        return v

    def term(self) -> Scalar:
        v = self.factor()
        while True:
            t = self.peek()
            if t in ("*", "/"):
                self.next()
                w = self.factor()
                v = v * w if t == "*" else v / w
            elif t == "(" or t in ("q", "lam") or isinstance(t, int):
                w = self.factor()
                v = v * w
            else:
                return v

    def factor(self) -> Scalar:
        t = self.next()
        neg = False
        while t == "-":
            neg = not neg
            t = self.next()
        if t == "(":
            v = self.expr()
            if self.next() != ")":
                raise ParseError("missing )")
        elif t == "q":
            v = sc_qpow(1)
        elif t == "lam":
            v = SC_LAM
        elif isinstance(t, int):
            v = sc_const(t)
        else:
            raise ParseError(f"unexpected token {t!r}")
        if self.peek() == "^":
            self.next()
            sign = 1
            e = self.next()
            if e == "-":
                sign = -1
                e = self.next()
            if not isinstance(e, int):
                raise ParseError("exponent must be an integer")
            v = v ** (sign * e)
        if neg:
            v = SC_ZERO - v
        return v


def parse_scalar(s: str) -> Scalar:
    """Parse an expression in q (and optionally lam) into Q(q)(lam)."""
    return _Parser(_tokenize(s)).parse()


def parse_rfq(s: str) -> RationalFunction:
    return sc_to_rfq(parse_scalar(s))
