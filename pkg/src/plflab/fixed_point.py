"""1e18-mantissa fixed-point decimals for protocol-side arithmetic.

All protocol quantities (rates, balances, indices) are stored as integer
mantissas scaled by 10**18, mirroring the on-chain integer parameterization
of lending contracts. Every operation floors toward negative infinity; the
measured protocols never publish their rounding semantics, so floor is
pinned here as the replayable convention. Mantissas must fit in a signed
128-bit word; wider intermediates are used internally and overflow raises
instead of wrapping.

The econometrics side of the package works in binary floats. The only
sanctioned bridge is :meth:`FixedDec.to_float`, which is exact up to 1 ulp
of the closest double.
"""

from __future__ import annotations

SCALE = 10**18
_I128_MAX = 2**127 - 1
_I128_MIN = -(2**127)


class FixedPointOverflow(OverflowError):
    """Result mantissa does not fit in a signed 128-bit word."""


class FixedPointDivisionByZero(ZeroDivisionError):
    """Division by a zero-valued FixedDec."""


def _check(mantissa: int) -> int:
    if not (_I128_MIN <= mantissa <= _I128_MAX):
        raise FixedPointOverflow(f"mantissa {mantissa} exceeds 128-bit range")
    return mantissa


class FixedDec:
    """Immutable fixed-point decimal with an integer mantissa scaled by 1e18."""

    __slots__ = ("mantissa",)

    mantissa: int

    def __init__(self, mantissa: int = 0):
        object.__setattr__(self, "mantissa", _check(int(mantissa)))

    def __setattr__(self, name, value):
        raise AttributeError("FixedDec is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_int(cls, n: int) -> "FixedDec":
        return cls(n * SCALE)

    @classmethod
    def from_float(cls, x: float) -> "FixedDec":
        """Nearest FixedDec to a double. Convenience for scenario plumbing;
        protocol parameters should come from strings or mantissas."""
        return cls(round(x * SCALE))

    @classmethod
    def parse(cls, text: str) -> "FixedDec":
        """Parse "d.ddd" decimal notation with up to 18 fractional digits."""
        s = text.strip()
        if not s:
            raise ValueError("empty FixedDec literal")
        sign = 1
        if s[0] in "+-":
            sign = -1 if s[0] == "-" else 1
            s = s[1:]
        whole, _, frac = s.partition(".")
        if frac and not frac.isdigit() or whole and not whole.isdigit():
            raise ValueError(f"malformed FixedDec literal {text!r}")
        if not whole and not frac:
            raise ValueError(f"malformed FixedDec literal {text!r}")
        if len(frac) > 18:
            raise ValueError(f"more than 18 fractional digits in {text!r}")
        mantissa = int(whole or "0") * SCALE + int(frac.ljust(18, "0") or "0")
        return cls(sign * mantissa)

    # -- projections -------------------------------------------------------

    def to_decimal_string(self) -> str:
        """Serialize with exactly 18 fractional digits (CSV wire format)."""
        m = self.mantissa
        sign = "-" if m < 0 else ""
        whole, frac = divmod(abs(m), SCALE)
        return f"{sign}{whole}.{frac:018d}"

    def to_float(self) -> float:
        """Closest double to mantissa/1e18; exact within 1 ulp."""
        return self.mantissa / SCALE

    # -- arithmetic (floor toward -inf everywhere) -------------------------

    def __add__(self, other: "FixedDec") -> "FixedDec":
        return FixedDec(self.mantissa + other.mantissa)

    def __sub__(self, other: "FixedDec") -> "FixedDec":
        return FixedDec(self.mantissa - other.mantissa)

    def __neg__(self) -> "FixedDec":
        return FixedDec(-self.mantissa)

    def __mul__(self, other: "FixedDec") -> "FixedDec":
        return FixedDec(self.mantissa * other.mantissa // SCALE)

    def __truediv__(self, other: "FixedDec") -> "FixedDec":
        if other.mantissa == 0:
            raise FixedPointDivisionByZero("FixedDec division by zero")
        return FixedDec(self.mantissa * SCALE // other.mantissa)

    def mul_int(self, n: int) -> "FixedDec":
        """Exact product with a plain integer (no rounding)."""
        return FixedDec(self.mantissa * n)

    def div_int(self, n: int) -> "FixedDec":
        if n == 0:
            raise FixedPointDivisionByZero("FixedDec division by zero")
        return FixedDec(self.mantissa // n)

    # -- comparisons / hashing --------------------------------------------

    def __eq__(self, other) -> bool:
        return isinstance(other, FixedDec) and self.mantissa == other.mantissa

    def __lt__(self, other: "FixedDec") -> bool:
        return self.mantissa < other.mantissa

    def __le__(self, other: "FixedDec") -> bool:
        return self.mantissa <= other.mantissa

    def __gt__(self, other: "FixedDec") -> bool:
        return self.mantissa > other.mantissa

    def __ge__(self, other: "FixedDec") -> bool:
        return self.mantissa >= other.mantissa

    def __hash__(self) -> int:
        return hash(("FixedDec", self.mantissa))

    def __repr__(self) -> str:
        return f"FixedDec({self.to_decimal_string()!r})"

    def is_zero(self) -> bool:
        return self.mantissa == 0

    def is_negative(self) -> bool:
        return self.mantissa < 0


ZERO = FixedDec(0)
ONE = FixedDec(SCALE)


def mul(a: FixedDec, b: FixedDec) -> FixedDec:
    """floor(a*b / 1e18)."""
    return a * b


def div(a: FixedDec, b: FixedDec) -> FixedDec:
    """floor(a*1e18 / b)."""
    return a / b


def pow_u(a: FixedDec, n: int) -> FixedDec:
    """a**n by repeated squaring with floor at every multiply; a**0 == 1."""
    if n < 0:
        raise ValueError("pow_u exponent must be non-negative")
    result = ONE
    base = a
    while n:
        if n & 1:
            result = result * base
        n >>= 1
        if n:
            base = base * base
    return result
