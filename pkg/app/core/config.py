"""
Configuration management for thetaspec
"""
from pydantic_settings import BaseSettings
from pydantic import Field, field_validator, ConfigDict
from pathlib import Path
import os
import yaml


class Settings(BaseSettings):
    # Pydantic v2 config
    model_config = ConfigDict(env_file=[".env", "../.env"], case_sensitive=True, extra='ignore', populate_by_name=True)

    # Application
    APP_NAME: str = "thetaspec"
    APP_VERSION: str = "1.0.0"
    LOG_LEVEL: str = Field(default="INFO", description="Root log level for the command line")

    # Zero cache
    CACHE_DIR: Path = Field(
        default=Path("./data/zero_cache"),
        validation_alias="THETASPEC_CACHE_DIR",
        description="Directory holding cached constant-term zero scans"
    )

    # Special functions
    EM_BERNOULLI_TERMS: int = Field(default=12, description="Bernoulli correction terms in Euler-Maclaurin")
    EM_MIN_TERMS: int = Field(default=20, description="Minimum number of directly summed Dirichlet terms")
    STIRLING_SHIFT: float = Field(default=15.0, description="Recurse log-gamma upward until Re z reaches this")
    EXTENDED_DPS: int = Field(default=30, description="Decimal digits used by the extended-precision oracle")

    # Scattering phase scan
    T_MIN: float = Field(default=1e-3, description="Lower end of every critical-line scan")
    T_MAX_LIMIT: float = Field(default=300.0, description="Largest admissible scan height")
    SCAN_STEP: float = Field(default=0.01, description="Phase tracking grid step")
    MAX_STEP_HALVINGS: int = Field(default=4, description="Grid refinements allowed before a phase jump is fatal")
    BISECTION_TOL: float = Field(default=1e-10, description="Target accuracy of the phase equation at a zero")
    PHASE_FD_STEP: float = Field(default=1e-4, description="Centered finite-difference step for the phase derivative")

    # Spectral line
    ADJUST_RETRIES: int = Field(default=5, description="Height adjustments before giving up")
    ADJUST_FACTOR: float = Field(default=1.01, description="Multiplicative height bump per adjustment")
    THETA_VANISH_TOL: float = Field(default=1e-8, description="Period modulus treated as vanishing")
    TAIL_FIT_TERMS: int = Field(default=10, description="Trailing zeros used to fit the tail weight")
    MATCH_TOL: float = Field(default=1e-4, description="Root-to-period-zero distance counted as a match")
    THETA_ZERO_STEP: float = Field(default=0.01, description="Sign-change scan step for period zeros")
    TAIL_STABILITY_TOL: float = Field(default=1e-7, description="Largest root move allowed when the truncation doubles")

    # Output
    CSV_DIGITS: int = Field(default=15, description="Significant digits written to reports")

    # Metrics
    METRICS_ENABLED: bool = Field(default=True, description="Record prometheus metrics during runs")

    def __init__(self, **kwargs):
        # Merge YAML defaults and local overrides first
        yaml_config = {}
        try:
            with open(Path(__file__).resolve().parent.parent.parent / 'config' / 'default.yaml', 'r') as f:
                yaml_config = yaml.safe_load(f) or {}
            local_path = Path(__file__).resolve().parent.parent.parent / 'config' / 'local.yaml'
            if local_path.exists():
                local_cfg = yaml.safe_load(local_path.read_text()) or {}
                # shallow merge local over default
                def merge(a, b):
                    for k, v in (b or {}).items():
                        if isinstance(v, dict) and isinstance(a.get(k), dict):
                            merge(a[k], v)
                        else:
                            a[k] = v
                    return a
                yaml_config = merge(yaml_config, local_cfg)
        except Exception:
            yaml_config = yaml_config or {}

        def g(path, default=None):
            cur = yaml_config
            for p in path:
                if not isinstance(cur, dict) or p not in cur:
                    return default
                cur = cur[p]
            return cur

        yaml_fields = {
            'APP_NAME': g(['app', 'name']),
            'APP_VERSION': g(['app', 'version']),
            'LOG_LEVEL': g(['logging', 'level']),
            'THETASPEC_CACHE_DIR': g(['cache', 'dir']),
            'EM_BERNOULLI_TERMS': g(['analytic', 'em_bernoulli_terms']),
            'EM_MIN_TERMS': g(['analytic', 'em_min_terms']),
            'STIRLING_SHIFT': g(['analytic', 'stirling_shift']),
            'EXTENDED_DPS': g(['analytic', 'extended_dps']),
            'T_MIN': g(['scattering', 't_min']),
            'T_MAX_LIMIT': g(['scattering', 't_max_limit']),
            'SCAN_STEP': g(['scattering', 'scan_step']),
            'MAX_STEP_HALVINGS': g(['scattering', 'max_step_halvings']),
            'BISECTION_TOL': g(['scattering', 'bisection_tol']),
            'PHASE_FD_STEP': g(['scattering', 'phase_fd_step']),
            'ADJUST_RETRIES': g(['spectrum', 'adjust_retries']),
            'ADJUST_FACTOR': g(['spectrum', 'adjust_factor']),
            'THETA_VANISH_TOL': g(['spectrum', 'theta_vanish_tol']),
            'TAIL_FIT_TERMS': g(['spectrum', 'tail_fit_terms']),
            'MATCH_TOL': g(['spectrum', 'match_tol']),
            'THETA_ZERO_STEP': g(['spectrum', 'theta_zero_step']),
            'TAIL_STABILITY_TOL': g(['spectrum', 'tail_stability_tol']),
            'CSV_DIGITS': g(['output', 'csv_digits']),
            'METRICS_ENABLED': g(['metrics', 'enabled']),
        }

        # env/kwargs override YAML, so only map keys the environment leaves unset
        mapped = {
            key: value for key, value in yaml_fields.items()
            if value is not None and key not in os.environ
        }
        # validation reads the alias before the field name
        if 'CACHE_DIR' in kwargs:
            kwargs['THETASPEC_CACHE_DIR'] = kwargs.pop('CACHE_DIR')
        mapped.update(kwargs)
        super().__init__(**mapped)

    @field_validator('CACHE_DIR', mode='before')
    @classmethod
    def ensure_path_type(cls, v):
        if isinstance(v, str):
            return Path(v)
        return v

    @field_validator('T_MIN', 'SCAN_STEP', 'PHASE_FD_STEP', 'BISECTION_TOL')
    @classmethod
    def ensure_positive(cls, v):
        if v <= 0:
            raise ValueError("must be positive")
        return v


settings = Settings()
