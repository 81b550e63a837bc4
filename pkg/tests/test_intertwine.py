"""
Tests for simple-reflection intertwining chains
"""
import logging

import pytest
import sympy

from app.services.symbolic.intertwine import (
    FactorProduct,
    LinearFormError,
    LinForm,
    ParamTuple,
    ReflectionIndexError,
    SpecializationMismatchError,
    WordOrder,
    apply_reflection,
    chain_report,
    compose_word,
    reflection_argument_counter,
    shift_vector,
    specialize_rankin_selberg,
    symbol_permutation,
    transposition_product,
)
from app.services.symbolic.presets import generic_symbols

s1, s2, s3, s4 = generic_symbols(4)


@pytest.fixture
def chain():
    return compose_word([2, 1, 3, 2], ParamTuple.generic(4))


class TestReflections:
    """Test single reflections"""

    def test_rule(self):
        """sigma_1 sends (p1, p2) to (p2 + 1, p1 - 1) with argument p1 - p2"""
        p, product = apply_reflection(1, ParamTuple.generic(2))
        a, b = generic_symbols(2)
        assert [e.expr for e in p.entries] == [b + 1, a - 1]
        assert product.arguments() == [a - b]
        assert str(product) == f"zeta({a - b - 1})/zeta({a - b})"

    def test_index_range(self):
        with pytest.raises(ReflectionIndexError):
            apply_reflection(4, ParamTuple.generic(4))

    def test_linear_forms_only(self):
        with pytest.raises(LinearFormError):
            LinForm(s1 * s2)
        with pytest.raises(LinearFormError):
            LinForm(sympy.sqrt(2) * s1)


class TestChain:
    """Test the [2, 1, 3, 2] chain on (s1, s2, s3, s4)"""

    def test_final_tuple(self, chain):
        """The chain ends at I(s3 + 2, s4 + 2, s1 - 2, s2 - 2)"""
        assert [e.expr for e in chain.final.entries] == [s3 + 2, s4 + 2, s1 - 2, s2 - 2]

    def test_factor_arguments(self, chain):
        """Arguments of the four zeta ratios in application order"""
        assert chain.product.arguments() == [s2 - s3, s1 - s3 - 1, s2 - s4 - 1, s1 - s4 - 2]
        assert len(chain.product) == 4

    def test_permutation_and_shifts(self, chain):
        assert symbol_permutation(chain) == (s3, s4, s1, s2)
        assert shift_vector(chain) == (2, 2, -2, -2)
        assert chain.permutation == transposition_product([2, 1, 3, 2], 4)

    def test_operator_order(self):
        """Operator order applies the rightmost letter first"""
        operator = compose_word([2, 1, 3, 2], ParamTuple.generic(4), WordOrder.OPERATOR)
        reversed_word = compose_word([2, 3, 1, 2], ParamTuple.generic(4))
        assert operator.final == reversed_word.final

    def test_braid_relation(self):
        """sigma1 sigma2 sigma1 and sigma2 sigma1 sigma2 agree with the same factors"""
        left = compose_word([1, 2, 1], ParamTuple.generic(3))
        right = compose_word([2, 1, 2], ParamTuple.generic(3))
        a, b, c = generic_symbols(3)
        assert left.final == right.final
        assert [e.expr for e in left.final.entries] == [c + 2, b, a - 2]
        assert reflection_argument_counter(left.product) == reflection_argument_counter(right.product)

    def test_cancel(self, chain):
        """A product times its inverse cancels completely"""
        assert len(chain.product.times(chain.product.inverted()).cancel()) == 0
        assert len(chain.product.cancel()) == 4
        assert str(FactorProduct()) == "1"


class TestSpecialization:
    """Test the Rankin-Selberg specialisation"""

    def test_rankin_selberg_passes(self, chain, caplog):
        """All four arguments match the Rankin-Selberg shifts; the tabulated variant is logged"""
        with caplog.at_level(logging.WARNING):
            report = specialize_rankin_selberg(chain, "rankin-selberg")
        assert report.verdict == "pass"
        assert all(report.per_factor)
        assert report.discrepancies
        assert "s3 - s4 - 2" in caplog.text

    def test_interleaved_passes(self, chain):
        assert specialize_rankin_selberg(chain, "interleaved").verdict == "pass"

    def test_mismatch_raises(self, chain, monkeypatch):
        from app.services.symbolic import intertwine

        s = sympy.Symbol("s")
        broken = dict(intertwine.EXPECTED_ARGUMENTS)
        broken["rankin-selberg"] = [2 * s, 2 * s, 2 * s, 2 * s]
        monkeypatch.setattr(intertwine, "EXPECTED_ARGUMENTS", broken)
        with pytest.raises(SpecializationMismatchError):
            specialize_rankin_selberg(chain, "rankin-selberg")
        assert specialize_rankin_selberg(chain, "rankin-selberg", strict=False).verdict == "fail"

    def test_wrong_word_rejected(self):
        with pytest.raises(ValueError):
            specialize_rankin_selberg(compose_word([1, 2, 3], ParamTuple.generic(4)))

    def test_chain_report(self):
        report = chain_report([2, 1, 3, 2], "rankin-selberg")
        assert report["final"] == ["s3 + 2", "s4 + 2", "s1 - 2", "s2 - 2"]
        assert report["permutation_consistent"] is True
        assert report["specialization"]["verdict"] == "pass"
        assert len(report["steps"]) == 4
