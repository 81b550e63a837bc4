"""
Named parameter specialisations shared by the symbolic engines
"""
from typing import Dict, Tuple

import sympy

s, w = sympy.symbols("s w")
sf, sf1, sf2 = sympy.symbols("sf sf1 sf2")


def generic_symbols(n: int) -> Tuple[sympy.Symbol, ...]:
    return sympy.symbols(f"s1:{n + 1}")


# Levi-block specialisations of (s1, s2, s3, s4)
PRESETS: Dict[str, Tuple[sympy.Expr, ...]] = {
    # GL(2) x GL(2) cuspidal data f1, f2 on the two blocks
    "rankin-selberg": (s + sf1, s - sf1, -s + sf2, -s - sf2),
    # one form f, blocks interleaved
    "interleaved": (s + sf, -s + sf, s - sf, -s - sf),
}

PRESET_NOTES: Dict[str, str] = {
    "rankin-selberg": "(s+sf1, s-sf1, -s+sf2, -s-sf2): Rankin-Selberg pair of GL(2) data",
    "interleaved": "(s+sf, -s+sf, s-sf, -s-sf): single GL(2) datum, used for the Casimir scalar",
}


class UnknownPresetError(KeyError):
    """No parameter preset with this name"""


# older names for the two specialisations, still accepted on the command line
PRESET_ALIASES: Dict[str, str] = {
    "section2": "rankin-selberg",
    "section5": "interleaved",
}


def canonical_preset(name: str) -> str:
    name = PRESET_ALIASES.get(name, name)
    if name not in PRESETS:
        raise UnknownPresetError(
            f"unknown preset '{name}'; choose from {sorted(PRESETS)} or aliases {sorted(PRESET_ALIASES)}")
    return name


def preset(name: str) -> Tuple[sympy.Expr, ...]:
    return PRESETS[canonical_preset(name)]


def substitution(name: str, n: int = 4) -> Dict[sympy.Symbol, sympy.Expr]:
    return dict(zip(generic_symbols(n), preset(name)))
