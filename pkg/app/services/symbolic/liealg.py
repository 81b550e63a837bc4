"""
Exact universal enveloping algebra of gl_n in PBW normal form

Basis of gl_n: matrix units E(i, j); the diagonal units are written H(i). Monomials are
canonical byte strings (two bytes per factor) and coefficients are Fractions. Stored
elements are normal ordered lower < Cartan < upper, each block lexicographic.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import sympy

from app.services.symbolic.presets import canonical_preset, generic_symbols, preset, s, sf, w

logger = logging.getLogger(__name__)

Scalar = Union[int, Fraction]

REFERENCE_GL4_SCALAR = "4*s^2 + 4*sf^2 - 8*sf - 4*s"


class PBWOrder(Enum):
    LOWER_FIRST = "lower<cartan<upper"
    UPPER_FIRST = "upper<cartan<lower"


class CharacterConvention(Enum):
    """Which operators kill the spherical vector once moved to the right"""
    LOWERING_ANNIHILATES = "lowering"
    RAISING_ANNIHILATES = "raising"


@dataclass(frozen=True, order=True)
class BasisElement:
    i: int
    j: int

    @property
    def kind(self) -> str:
        if self.i == self.j:
            return "cartan"
        return "lower" if self.i > self.j else "upper"

    def __str__(self) -> str:
        return f"H({self.i})" if self.i == self.j else f"E({self.i},{self.j})"


_BLOCK_RANK = {
    PBWOrder.LOWER_FIRST: {"lower": 0, "cartan": 1, "upper": 2},
    PBWOrder.UPPER_FIRST: {"upper": 0, "cartan": 1, "lower": 2},
}


def _sort_key(i: int, j: int, order: PBWOrder) -> Tuple[int, int, int]:
    kind = "cartan" if i == j else ("lower" if i > j else "upper")
    return _BLOCK_RANK[order][kind], i, j


def _factors(mono: bytes) -> List[Tuple[int, int]]:
    return [(mono[k], mono[k + 1]) for k in range(0, len(mono), 2)]


def _bracket(x: Tuple[int, int], y: Tuple[int, int]) -> List[Tuple[Tuple[int, int], int]]:
    # [E_ab, E_cd] = delta_bc E_ad - delta_da E_cb
    (a, b), (c, d) = x, y
    out = []
    if b == c:
        out.append(((a, d), 1))
    if d == a:
        out.append(((c, b), -1))
    return out


@lru_cache(maxsize=None)
def _normal_order(mono: bytes, order: PBWOrder) -> Tuple[Tuple[bytes, Fraction], ...]:
    factors = _factors(mono)
    for k in range(len(factors) - 1):
        x, y = factors[k], factors[k + 1]
        if _sort_key(*x, order) > _sort_key(*y, order):
            break
    else:
        return ((mono, Fraction(1)),)

    head, tail = mono[:2 * k], mono[2 * k + 4:]
    result: Dict[bytes, Fraction] = {}
    # xy = yx + [x, y]
    pieces = [(head + bytes(y) + bytes(x) + tail, 1)]
    pieces += [(head + bytes(z) + tail, sign) for z, sign in _bracket(x, y)]
    for word, sign in pieces:
        for key, coef in _normal_order(word, order):
            result[key] = result.get(key, Fraction(0)) + sign * coef
    return tuple((key, coef) for key, coef in result.items() if coef != 0)


class UEAElement:
    """Element of U(gl_n) with rational coefficients, stored in PBW normal form"""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Optional[Dict[bytes, Fraction]] = None, order: PBWOrder = PBWOrder.LOWER_FIRST):
        self.n = n
        self.terms: Dict[bytes, Fraction] = {}
        for mono, coef in (terms or {}).items():
            coef = Fraction(coef)
            if coef == 0:
                continue
            for key, c in _normal_order(mono, order):
                self.terms[key] = self.terms.get(key, Fraction(0)) + coef * c
        self.terms = {k: v for k, v in self.terms.items() if v != 0}

    @classmethod
    def scalar(cls, n: int, value: Scalar) -> "UEAElement":
        return cls(n, {b"": Fraction(value)})

    @classmethod
    def basis(cls, n: int, i: int, j: int) -> "UEAElement":
        if not (1 <= i <= n and 1 <= j <= n):
            raise ValueError(f"indices ({i},{j}) out of range for gl_{n}")
        return cls(n, {bytes((i, j)): Fraction(1)})

    def _check(self, other: "UEAElement") -> None:
        if self.n != other.n:
            raise ValueError(f"cannot combine gl_{self.n} and gl_{other.n} elements")

    def __add__(self, other: "UEAElement") -> "UEAElement":
        self._check(other)
        terms = dict(self.terms)
        for k, v in other.terms.items():
            terms[k] = terms.get(k, Fraction(0)) + v
        return UEAElement(self.n, terms)

    def __neg__(self) -> "UEAElement":
        return UEAElement(self.n, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other: "UEAElement") -> "UEAElement":
        return self + (-other)

    def __mul__(self, other: Union["UEAElement", Scalar]) -> "UEAElement":
        if isinstance(other, UEAElement):
            return multiply(self, other)
        return UEAElement(self.n, {k: v * Fraction(other) for k, v in self.terms.items()})

    def __rmul__(self, other: Scalar) -> "UEAElement":
        return self * other

    def __pow__(self, k: int) -> "UEAElement":
        result = UEAElement.scalar(self.n, 1)
        for _ in range(k):
            result = result * self
        return result

    def __eq__(self, other) -> bool:
        return isinstance(other, UEAElement) and self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, frozenset(self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    def monomials(self) -> Iterable[Tuple[Tuple[BasisElement, ...], Fraction]]:
        for mono, coef in sorted(self.terms.items()):
            yield tuple(BasisElement(i, j) for i, j in _factors(mono)), coef

    def cartan_part(self) -> "UEAElement":
        return UEAElement(self.n, {m: c for m, c in self.terms.items() if _is_cartan(m)})

    def normal_form(self) -> "UEAElement":
        return UEAElement(self.n, self.terms)

    def reordered(self, order: PBWOrder) -> Dict[bytes, Fraction]:
        """Terms of the same element normal ordered in another PBW order"""
        terms: Dict[bytes, Fraction] = {}
        for mono, coef in self.terms.items():
            for key, c in _normal_order(mono, order):
                terms[key] = terms.get(key, Fraction(0)) + coef * c
        return {k: v for k, v in terms.items() if v != 0}

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for factors, coef in self.monomials():
            word = "*".join(str(f) for f in factors) or "1"
            parts.append(f"{coef}*{word}")
        return " + ".join(parts)


def _is_cartan(mono: bytes) -> bool:
    return all(i == j for i, j in _factors(mono))


def multiply(x: UEAElement, y: UEAElement) -> UEAElement:
    """PBW-normal-ordered product"""
    x._check(y)
    terms: Dict[bytes, Fraction] = {}
    for m1, c1 in x.terms.items():
        for m2, c2 in y.terms.items():
            for key, c in _normal_order(m1 + m2, PBWOrder.LOWER_FIRST):
                terms[key] = terms.get(key, Fraction(0)) + c1 * c2 * c
    return UEAElement(x.n, {k: v for k, v in terms.items() if v != 0})


def E(n: int, i: int, j: int) -> UEAElement:
    return UEAElement.basis(n, i, j)


def H(n: int, *indices: int) -> UEAElement:
    """H(i) for one index, H(i)-H(j) for two, diag(1,1,-1,-1)-style for four"""
    if len(indices) == 1:
        return E(n, indices[0], indices[0])
    if len(indices) == 2:
        return E(n, indices[0], indices[0]) - E(n, indices[1], indices[1])
    if len(indices) == 4:
        a, b, c, d = indices
        return E(n, a, a) + E(n, b, b) - E(n, c, c) - E(n, d, d)
    raise ValueError(f"no named Cartan combination with {len(indices)} indices")


def bracket(x: UEAElement, y: UEAElement) -> UEAElement:
    return multiply(x, y) - multiply(y, x)


def casimir_pairs(n: int) -> List[Tuple[UEAElement, UEAElement]]:
    """Dual basis pairs (X, X*) of gl_n under the trace form"""
    return [(E(n, i, j), E(n, j, i)) for i in range(1, n + 1) for j in range(1, n + 1)]


@lru_cache(maxsize=None)
def casimir(n: int) -> UEAElement:
    """Omega = sum_i H(i)^2 + sum_{i != j} E(i,j) E(j,i), normal ordered"""
    if n < 2:
        raise ValueError("the Casimir element is built for n >= 2")
    total = UEAElement(n)
    for x, x_star in casimir_pairs(n):
        total = total + multiply(x, x_star)
    return total


def _cartan_value(mono: bytes, params: Sequence[sympy.Expr]) -> sympy.Expr:
    value = sympy.Integer(1)
    for i, _ in _factors(mono):
        value *= params[i - 1]
    return value


def infinitesimal_character(x: UEAElement, params: Optional[Sequence[sympy.Expr]] = None,
                            convention: CharacterConvention = CharacterConvention.LOWERING_ANNIHILATES) -> sympy.Expr:
    """Scalar by which x acts on the spherical vector of I(s_1, ..., s_n), H(i) -> s_i.

    Monomials that still carry an E factor after normal ordering with the annihilating
    operators rightmost act by 0; pure-Cartan monomials give polynomials in the s_i.
    """
    params = tuple(params) if params is not None else generic_symbols(x.n)
    if len(params) != x.n:
        raise ValueError(f"need {x.n} parameters, got {len(params)}")
    if convention is CharacterConvention.LOWERING_ANNIHILATES:
        terms = x.reordered(PBWOrder.UPPER_FIRST)
    else:
        terms = x.terms
    value = sympy.Integer(0)
    for mono, coef in terms.items():
        if _is_cartan(mono):
            value += sympy.Rational(coef.numerator, coef.denominator) * _cartan_value(mono, params)
    return sympy.expand(value)


# -- GL(4) Levi decomposition -------------------------------------------------

def omega_blocks(n: int = 4) -> Tuple[UEAElement, UEAElement, UEAElement]:
    """Levi pieces of the gl_4 Casimir: two gl_2 blocks and the centre of the Levi"""
    half = Fraction(1, 2)
    omega1 = half * H(n, 1, 2) ** 2 + multiply(E(n, 1, 2), E(n, 2, 1)) + multiply(E(n, 2, 1), E(n, 1, 2))
    omega2 = half * H(n, 3, 4) ** 2 + multiply(E(n, 3, 4), E(n, 4, 3)) + multiply(E(n, 4, 3), E(n, 3, 4))
    omega3 = Fraction(1, 4) * H(n, 1, 2, 3, 4) ** 2
    return omega1, omega2, omega3


@dataclass
class SplitCheckResult:
    verdict: bool
    residual: UEAElement
    expected_cartan: UEAElement
    offending: List[str]

    def summary(self) -> dict:
        return {
            "verdict": self.verdict,
            "residual_terms": len(self.residual.terms),
            "residual_cartan": repr(self.residual.cartan_part()),
            "expected_cartan": repr(self.expected_cartan),
            "offending_monomials": self.offending,
        }


def _off_block(factor: BasisElement) -> bool:
    return (factor.i <= 2 < factor.j) or (factor.j <= 2 < factor.i)


def casimir_split_check(n: int = 4) -> SplitCheckResult:
    """Omega - Omega1 - Omega2 - Omega3 must consist of off-Levi E monomials, their
    normal-ordering H corrections, and the central term (H1+H2+H3+H4)^2 / 4."""
    if n != 4:
        raise ValueError("the Levi split is defined for gl_4")
    omega1, omega2, omega3 = omega_blocks(n)
    residual = casimir(n) - omega1 - omega2 - omega3

    central = Fraction(1, 4) * (H(n, 1) + H(n, 2) + H(n, 3) + H(n, 4)) ** 2
    corrections = UEAElement(n)
    for i in (1, 2):
        for j in (3, 4):
            corrections = corrections + bracket(E(n, i, j), E(n, j, i))
    expected_cartan = central + corrections

    offending = []
    for factors, coef in residual.monomials():
        if all(f.kind == "cartan" for f in factors):
            continue
        if not any(_off_block(f) for f in factors):
            offending.append(f"{coef}*{'*'.join(str(f) for f in factors)}")
    verdict = residual.cartan_part() == expected_cartan and not offending
    if not verdict:
        logger.warning(f"Casimir split check failed: {len(offending)} offending monomials")
    return SplitCheckResult(verdict=verdict, residual=residual, expected_cartan=expected_cartan, offending=offending)


def sl4_variant_element(n: int = 4) -> UEAElement:
    """1/2 (H12^2 + H23^2 + H34^2) plus all E(i,j) E(j,i)"""
    half = Fraction(1, 2)
    total = half * (H(n, 1, 2) ** 2 + H(n, 2, 3) ** 2 + H(n, 3, 4) ** 2)
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if i != j:
                total = total + multiply(E(n, i, j), E(n, j, i))
    return total


def sl4_variant_scalar(params: Optional[Sequence[sympy.Expr]] = None,
                       convention: CharacterConvention = CharacterConvention.LOWERING_ANNIHILATES) -> sympy.Expr:
    return infinitesimal_character(sl4_variant_element(), params, convention)


def parse_scalar(text: str) -> sympy.Expr:
    """Parse a displayed scalar such as '4*s^2 + 4*sf^2 - 8*sf - 4*s'"""
    return sympy.expand(sympy.sympify(text.replace("^", "**"), locals={"s": s, "sf": sf, "w": w}))


def format_scalar(expr: sympy.Expr) -> str:
    return str(sympy.expand(expr)).replace("**", "^")


def casimir_eigenvalue(preset_name: str = "interleaved",
                       convention: CharacterConvention = CharacterConvention.LOWERING_ANNIHILATES) -> dict:
    """Casimir scalar on I(preset) with the difference identity and the comparison branches"""
    preset_name = canonical_preset(preset_name)
    params = preset(preset_name)
    omega = casimir(4)
    scalar = infinitesimal_character(omega, params, convention)
    other = (CharacterConvention.RAISING_ANNIHILATES
             if convention is CharacterConvention.LOWERING_ANNIHILATES
             else CharacterConvention.LOWERING_ANNIHILATES)
    other_scalar = infinitesimal_character(omega, params, other)
    reference = parse_scalar(REFERENCE_GL4_SCALAR)
    difference = sympy.expand(scalar - scalar.subs(s, w))
    identity = sympy.expand(difference - 4 * (s * (s - 1) - w * (w - 1))) == 0
    centre_terms = [bracket(omega, E(4, i, j)).is_zero() for i in range(1, 5) for j in range(1, 5)]
    return {
        "preset": preset_name,
        "convention": convention.value,
        "scalar": format_scalar(scalar),
        "matches_reference": sympy.expand(scalar - reference) == 0 if preset_name == "interleaved" else None,
        "reference": REFERENCE_GL4_SCALAR,
        "difference_identity": identity,
        "other_convention": {"convention": other.value, "scalar": format_scalar(other_scalar)},
        "sl4_variant": format_scalar(sl4_variant_scalar(params, convention)),
        "central": all(centre_terms),
    }
