"""
Simple-reflection intertwining operators on unramified principal-series parameters

sigma_k : I(..., p_k, p_{k+1}, ...) -> I(..., p_{k+1} + 1, p_k - 1, ...) and contributes the
local factor zeta(d - 1) / zeta(d) with d = p_k - p_{k+1}. Factors stay formal; they are
never evaluated numerically here.
"""
import logging
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import sympy

from app.core.exceptions import InvariantViolationError
from app.services.symbolic.presets import PRESET_NOTES, canonical_preset, generic_symbols, preset, s, sf, sf1, sf2

logger = logging.getLogger(__name__)


class LinearFormError(ValueError):
    """Expression is not affine-linear in the formal symbols"""


class ReflectionIndexError(ValueError):
    """Simple reflection index outside 1..n-1"""


class SpecializationMismatchError(InvariantViolationError):
    """Specialised factor arguments differ from the expected Rankin-Selberg shifts"""


@dataclass(frozen=True)
class LinForm:
    """Rational-coefficient affine form in the formal symbols"""
    expr: sympy.Expr

    def __post_init__(self):
        expr = sympy.expand(sympy.sympify(self.expr))
        symbols = sorted(expr.free_symbols, key=str)
        if symbols:
            poly = sympy.Poly(expr, *symbols)
            if poly.total_degree() > 1 or any(not c.is_rational for c in poly.coeffs()):
                raise LinearFormError(f"{expr} is not a rational affine form")
        elif not expr.is_rational:
            raise LinearFormError(f"{expr} is not rational")
        object.__setattr__(self, "expr", expr)

    def __add__(self, other) -> "LinForm":
        return LinForm(self.expr + (other.expr if isinstance(other, LinForm) else sympy.Rational(other)))

    def __sub__(self, other) -> "LinForm":
        return LinForm(self.expr - (other.expr if isinstance(other, LinForm) else sympy.Rational(other)))

    def substitute(self, mapping: Mapping[sympy.Symbol, sympy.Expr]) -> "LinForm":
        return LinForm(self.expr.subs(mapping, simultaneous=True))

    def __str__(self) -> str:
        return str(self.expr)


@dataclass(frozen=True)
class ParamTuple:
    entries: Tuple[LinForm, ...]

    @classmethod
    def generic(cls, n: int) -> "ParamTuple":
        return cls(tuple(LinForm(sym) for sym in generic_symbols(n)))

    @classmethod
    def of(cls, *exprs) -> "ParamTuple":
        return cls(tuple(LinForm(e) for e in exprs))

    @property
    def n(self) -> int:
        return len(self.entries)

    def substitute(self, mapping: Mapping[sympy.Symbol, sympy.Expr]) -> "ParamTuple":
        return ParamTuple(tuple(e.substitute(mapping) for e in self.entries))

    def __str__(self) -> str:
        return "(" + ", ".join(str(e) for e in self.entries) + ")"


@dataclass(frozen=True)
class FormalRatio:
    """zeta(x - 1) / zeta(x), or its reciprocal when inverted"""
    argument: LinForm
    inverted: bool = False

    def invert(self) -> "FormalRatio":
        return FormalRatio(self.argument, not self.inverted)

    def substitute(self, mapping) -> "FormalRatio":
        return FormalRatio(self.argument.substitute(mapping), self.inverted)

    def __str__(self) -> str:
        x = self.argument.expr
        num, den = f"zeta({x - 1})", f"zeta({x})"
        return f"{den}/{num}" if self.inverted else f"{num}/{den}"


@dataclass(frozen=True)
class FactorProduct:
    """Ordered product of formal ratios; nothing cancels unless cancel() is called"""
    factors: Tuple[FormalRatio, ...] = ()

    def times(self, other: "FactorProduct") -> "FactorProduct":
        return FactorProduct(self.factors + other.factors)

    def inverted(self) -> "FactorProduct":
        return FactorProduct(tuple(f.invert() for f in self.factors))

    def substitute(self, mapping) -> "FactorProduct":
        return FactorProduct(tuple(f.substitute(mapping) for f in self.factors))

    def cancel(self) -> "FactorProduct":
        """Remove each ratio together with a reciprocal of the same argument"""
        remaining: List[FormalRatio] = []
        for factor in self.factors:
            partner = next((k for k, r in enumerate(remaining) if r == factor.invert()), None)
            if partner is None:
                remaining.append(factor)
            else:
                remaining.pop(partner)
        return FactorProduct(tuple(remaining))

    def arguments(self) -> List[sympy.Expr]:
        return [f.argument.expr for f in self.factors]

    def __len__(self) -> int:
        return len(self.factors)

    def __str__(self) -> str:
        return " * ".join(str(f) for f in self.factors) or "1"


class WordOrder(Enum):
    APPLICATION = "application"  # word[0] acts first
    OPERATOR = "operator"  # rightmost letter acts first, as in a composition of maps


@dataclass
class Step:
    reflection: int
    before: ParamTuple
    after: ParamTuple
    factor: FormalRatio

    def as_dict(self) -> dict:
        return {
            "reflection": self.reflection,
            "tuple": [str(e) for e in self.after.entries],
            "factor": str(self.factor),
            "argument": str(self.factor.argument),
        }


@dataclass
class WordResult:
    word: List[int]
    start: ParamTuple
    final: ParamTuple
    product: FactorProduct
    steps: List[Step] = field(default_factory=list)
    permutation: Tuple[int, ...] = ()  # final position k holds start entry permutation[k]


def apply_reflection(k: int, p: ParamTuple) -> Tuple[ParamTuple, FactorProduct]:
    """sigma_k on p with its local factor"""
    if not 1 <= k <= p.n - 1:
        raise ReflectionIndexError(f"reflection index {k} outside 1..{p.n - 1}")
    entries = list(p.entries)
    left, right = entries[k - 1], entries[k]
    entries[k - 1], entries[k] = right + 1, left - 1
    factor = FormalRatio(left - right)
    return ParamTuple(tuple(entries)), FactorProduct((factor,))


def compose_word(word: Sequence[int], p: ParamTuple, order: WordOrder = WordOrder.APPLICATION) -> WordResult:
    """Apply a word of simple reflections, recording every intermediate tuple and factor"""
    letters = list(word) if order is WordOrder.APPLICATION else list(reversed(word))
    current, product = p, FactorProduct()
    permutation = list(range(1, p.n + 1))
    steps: List[Step] = []
    for k in letters:
        after, factor = apply_reflection(k, current)
        if factor.factors[0].argument.expr != sympy.expand(current.entries[k - 1].expr - current.entries[k].expr):
            raise InvariantViolationError(f"factor argument bookkeeping failed at sigma_{k}")
        steps.append(Step(reflection=k, before=current, after=after, factor=factor.factors[0]))
        permutation[k - 1], permutation[k] = permutation[k], permutation[k - 1]
        current, product = after, product.times(factor)
    return WordResult(word=list(word), start=p, final=current, product=product, steps=steps,
                      permutation=tuple(permutation))


def transposition_product(word: Sequence[int], n: int, order: WordOrder = WordOrder.APPLICATION) -> Tuple[int, ...]:
    """Position permutation of a word, composed from its adjacent transpositions"""
    letters = list(word) if order is WordOrder.APPLICATION else list(reversed(word))
    perm = tuple(range(1, n + 1))
    for k in letters:
        swap = list(range(1, n + 1))
        swap[k - 1], swap[k] = swap[k], swap[k - 1]
        perm = tuple(perm[swap[i] - 1] for i in range(n))
    return perm


def symbol_permutation(result: WordResult) -> Tuple[sympy.Symbol, ...]:
    """Base symbol carried by each final entry, shifts stripped"""
    out = []
    for entry in result.final.entries:
        symbols = sorted(entry.expr.free_symbols, key=str)
        out.append(symbols[0] if len(symbols) == 1 else entry.expr)
    return tuple(out)


def shift_vector(result: WordResult) -> Tuple[sympy.Expr, ...]:
    """Constant shift of each final entry relative to the start entry it came from"""
    return tuple(
        sympy.expand(result.final.entries[k].expr - result.start.entries[result.permutation[k] - 1].expr)
        for k in range(result.final.n)
    )


# Rule-derived arguments of the four factors of [2, 1, 3, 2] after each specialisation
EXPECTED_ARGUMENTS: Dict[str, List[sympy.Expr]] = {
    "rankin-selberg": [2 * s - sf1 - sf2, 2 * s + sf1 - sf2 - 1, 2 * s - sf1 + sf2 - 1, 2 * s + sf1 + sf2 - 2],
    "interleaved": [-2 * s + 2 * sf, 2 * sf - 1, 2 * sf - 1, 2 * s + 2 * sf - 2],
}

# Third factor in the hand-written chain table; the reflection rule gives zeta(s2-s4-2)/zeta(s2-s4-1)
_, _s2, _, _s4 = generic_symbols(4)
TABULATED_THIRD_FACTOR = "zeta(s3 - s4 - 2)/zeta(s2 - s4 - 1)"


@dataclass
class SpecializationReport:
    preset: str
    note: str
    arguments: List[str]
    expected: List[str]
    per_factor: List[bool]
    verdict: str
    discrepancies: List[str]

    def as_dict(self) -> dict:
        return self.__dict__.copy()


def specialize_rankin_selberg(result: WordResult, preset_name: str = "rankin-selberg",
                              strict: bool = True) -> SpecializationReport:
    """Substitute a Levi preset into the [2,1,3,2] chain and check the factor arguments"""
    preset_name = canonical_preset(preset_name)
    if result.start != ParamTuple.generic(4) or list(result.word) != [2, 1, 3, 2]:
        raise ValueError("specialisation expects the word [2, 1, 3, 2] applied to generic (s1, s2, s3, s4)")

    discrepancies = []
    third = result.product.factors[2]
    if third.argument.expr == sympy.expand(_s2 - _s4 - 1):
        message = (f"tabulated third factor {TABULATED_THIRD_FACTOR} differs from the rule-derived "
                   f"{third}; using the rule-derived factor")
        logger.warning(message)
        discrepancies.append(message)

    mapping = dict(zip(generic_symbols(4), preset(preset_name)))
    specialised = result.product.substitute(mapping)
    arguments = specialised.arguments()
    expected = EXPECTED_ARGUMENTS[preset_name]
    per_factor = [sympy.expand(a - e) == 0 for a, e in zip(arguments, expected)]
    verdict = "pass" if all(per_factor) and len(arguments) == len(expected) else "fail"
    report = SpecializationReport(
        preset=preset_name,
        note=PRESET_NOTES[preset_name],
        arguments=[str(a) for a in arguments],
        expected=[str(e) for e in expected],
        per_factor=per_factor,
        verdict=verdict,
        discrepancies=discrepancies,
    )
    if verdict != "pass":
        bad = [f"factor {k + 1}: {a} != {e}" for k, (a, e, ok) in
               enumerate(zip(report.arguments, report.expected, per_factor)) if not ok]
        logger.error(f"Rankin-Selberg specialisation failed: {bad}")
        if strict:
            raise SpecializationMismatchError("; ".join(bad))
    return report


def reflection_argument_counter(product: FactorProduct) -> Counter:
    """Multiset of factor arguments"""
    return Counter(str(a) for a in product.arguments())


def chain_report(word: Sequence[int], preset_name: Optional[str] = "rankin-selberg",
                 order: WordOrder = WordOrder.APPLICATION) -> dict:
    """Step table of a word on generic parameters, plus the specialisation when it applies"""
    n = max(max(word, default=1) + 1, 4 if preset_name else 2)
    result = compose_word(word, ParamTuple.generic(n), order)
    report = {
        "word": list(word),
        "order": order.value,
        "start": [str(e) for e in result.start.entries],
        "steps": [step.as_dict() for step in result.steps],
        "final": [str(e) for e in result.final.entries],
        "product": str(result.product),
        "permutation": list(result.permutation),
        "permutation_consistent": result.permutation == transposition_product(word, n, order),
    }
    if preset_name and n == 4 and list(word) == [2, 1, 3, 2] and order is WordOrder.APPLICATION:
        report["specialization"] = specialize_rankin_selberg(result, preset_name, strict=False).as_dict()
    return report
