"""
Special functions and completed L-functions
"""
from app.services.analytic.gamma import lngamma, GammaPoleError
from app.services.analytic.zeta import zeta, hurwitz_zeta, dirichlet_L_chi4, ZetaPoleError
from app.services.analytic.lfunction import (
    LFunctionSpec,
    LFunctionPoleError,
    ZETA,
    CHI4,
    DEDEKIND,
    BUILTIN_SPECS,
    completed,
    dedekind_gaussian,
    hardy_z,
    load_lfunction_spec,
    riemann_von_mangoldt,
    theta_function,
    xi,
)

__all__ = [
    "lngamma", "GammaPoleError", "zeta", "hurwitz_zeta", "dirichlet_L_chi4", "ZetaPoleError",
    "LFunctionSpec", "LFunctionPoleError", "ZETA", "CHI4", "DEDEKIND", "BUILTIN_SPECS",
    "completed", "dedekind_gaussian", "hardy_z", "load_lfunction_spec",
    "riemann_von_mangoldt", "theta_function", "xi",
]
