"""
Run configuration for the command line
"""
from enum import Enum
from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.core.config import settings
from app.services.symbolic.presets import PRESET_ALIASES


class Command(str, Enum):
    specfun = "specfun"
    scattering_zeros = "scattering-zeros"
    count = "count"
    gaps = "gaps"
    casimir = "casimir"
    intertwine = "intertwine"
    ms_norm = "ms-norm"
    spectrum_solve = "spectrum-solve"
    interlace = "interlace"
    correlate = "correlate"


class OutputFormat(str, Enum):
    csv = "csv"
    json = "json"


class Precision(str, Enum):
    double = "double"
    extended = "extended"


class SpecialFunction(str, Enum):
    zeta = "zeta"
    xi = "xi"
    lngamma = "lngamma"
    chi4 = "chi4"
    dedekind = "dedekind"
    hardy_z = "hardy-z"
    completed = "completed"
    scattering = "c"


class CorrelationSource(str, Enum):
    line = "line"
    theta_zeros = "theta-zeros"


# commands that scan the constant term at height a
HEIGHT_COMMANDS = {Command.scattering_zeros, Command.count, Command.gaps, Command.ms_norm,
                   Command.spectrum_solve, Command.interlace, Command.correlate}


class RunConfig(BaseModel):
    model_config = ConfigDict(use_enum_values=False)

    command: Command
    a: float = 3.0
    t_max: float = 60.0
    theta: str = "delta-at-i"
    output: Optional[Path] = None
    format: OutputFormat = OutputFormat.csv
    strict: bool = False
    precision: Precision = Precision.double
    tail_terms: int = Field(default_factory=lambda: settings.TAIL_FIT_TERMS, ge=1)
    timestamp: bool = True
    metrics_out: Optional[Path] = None
    use_cache: bool = True

    # specfun
    function: SpecialFunction = SpecialFunction.zeta
    points: List[complex] = Field(default_factory=list)
    lfunction: Optional[str] = None
    # gaps
    window_start: float = 0.0
    # casimir / intertwine
    n: int = Field(default=4, ge=2)
    preset: str = "interleaved"
    convention: str = "lowering"
    word: List[int] = Field(default_factory=lambda: [2, 1, 3, 2])
    order: str = "application"
    # spectrum
    model: str = "gl2"
    sf: float = 0.0
    # correlate
    source: CorrelationSource = CorrelationSource.line
    bin_width: float = Field(default=0.1, gt=0)
    max_gap: float = Field(default=3.0, gt=0)

    @field_validator('t_max')
    @classmethod
    def validate_t_max(cls, v):
        if not 0 < v <= settings.T_MAX_LIMIT:
            raise ValueError(f't_max must lie in (0, {settings.T_MAX_LIMIT}]')
        return v

    @field_validator('preset')
    @classmethod
    def resolve_preset_alias(cls, v):
        return PRESET_ALIASES.get(v, v)

    @field_validator('points', mode='before')
    @classmethod
    def parse_points(cls, v):
        return [complex(str(p).replace(" ", "").replace("i", "j")) if isinstance(p, str) else p for p in v or []]

    @model_validator(mode='after')
    def validate_height(self):
        if self.command in HEIGHT_COMMANDS and not self.a > 1:
            raise ValueError('a must exceed 1')
        return self
