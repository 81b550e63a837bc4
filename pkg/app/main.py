"""
thetaspec command line

Every command writes one report, CSV unless ``--format json`` is given. casimir, intertwine
and ms-norm are symbolic or single-point checks and print JSON by default.

``specfun --function completed|hardy-z --lfunction NAME_OR_PATH`` evaluates a builtin
L-function (zeta, chi4, dedekind) or one read from a definition file::

    # name: my-zeta
    # degree: 1
    # gamma: 1/2,0,0
    # conductor: 0.5641895835477563
    # poles: 1,0
    1,1
    2,1
    ...

One ``# gamma: scale,shift_re,shift_im`` line per gamma factor Gamma(scale s + shift),
``# conductor: Q`` for the Q^s factor, optional ``# poles: re,im`` lines, then ``n,a(n)``
rows. L(s) is summed directly from the rows, so only Re s > 1 is meaningful.
"""
import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ValidationError

from app.core.cache import ZeroCache
from app.core.config import settings
from app.core.exceptions import InvariantViolationError, ThetaspecError, UsageError
from app.core.monitoring import write_metrics
from app.schemas.reports import CorrelationReport, CountReport, InterlaceReport, SpectrumSummary
from app.schemas.run import Command, OutputFormat, Precision, RunConfig, SpecialFunction

logger = logging.getLogger(__name__)

# commands whose report defaults to JSON
JSON_COMMANDS = {Command.casimir.value, Command.intertwine.value, Command.ms_norm.value}

LFUNCTION_HELP = ("builtin L-function name or definition file with # name, # degree, # gamma, "
                  "# conductor and optional # poles headers followed by n,a(n) rows")


class ArgumentParser(argparse.ArgumentParser):
    """argparse that raises instead of exiting on bad input"""

    def error(self, message):
        raise UsageError(message)


@dataclass
class Result:
    payload: Any  # dict or pydantic model, emitted as JSON
    header: Optional[List[str]] = None  # CSV table header; key,value rows of the payload when None
    rows: List[Sequence[Any]] = field(default_factory=list)


# -- formatting -------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.{settings.CSV_DIGITS}g}"
    if value is None:
        return ""
    return str(value)


def _jsonable(value):
    if isinstance(value, BaseModel):
        return value.model_dump(mode="json")
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.floating, float)):
        return float(f"{float(value):.{settings.CSV_DIGITS}g}") if math.isfinite(value) else str(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, complex):
        return {"re": _jsonable(value.real), "im": _jsonable(value.imag)}
    return value


def render(result: Result, config: RunConfig) -> str:
    if config.format is OutputFormat.json:
        return json.dumps(_jsonable(result.payload), indent=2, sort_keys=False) + "\n"
    buffer = io.StringIO()
    if config.timestamp:
        buffer.write(f"# generated {datetime.now(timezone.utc).isoformat(timespec='seconds')}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    if result.header is not None:
        writer.writerow(result.header)
        writer.writerows([_fmt(v) for v in row] for row in result.rows)
    else:
        payload = _jsonable(result.payload)
        writer.writerow(["key", "value"])
        for key, value in payload.items():
            writer.writerow([key, value if isinstance(value, str) else json.dumps(value)])
    return buffer.getvalue()


# -- commands ---------------------------------------------------------------

def _scan(config: RunConfig):
    from app.services import scattering

    datum = scattering.get_datum()
    cache = ZeroCache() if config.use_cache else None
    key = (config.a, datum.t_min, config.t_max, datum.step)
    found = cache.get(*key) if cache else None
    if found is None:
        found = scattering.zeros(config.a, config.t_max, datum)
        if cache:
            cache.set(*key, found)
    return found, datum


def _lfunction(config: RunConfig):
    """A builtin L-function by name, or one read from a definition file"""
    from app.services.analytic import BUILTIN_SPECS, ZETA, load_lfunction_spec

    if config.lfunction is None:
        return ZETA
    if config.lfunction in BUILTIN_SPECS:
        return BUILTIN_SPECS[config.lfunction]
    path = Path(config.lfunction)
    if not path.is_file():
        raise UsageError(f"--lfunction must name one of {sorted(BUILTIN_SPECS)} or an existing file, "
                         f"got '{config.lfunction}'")
    return load_lfunction_spec(path)


def cmd_specfun(config: RunConfig) -> Result:
    from app.services.analytic import BUILTIN_SPECS, completed, dedekind_gaussian, dirichlet_L_chi4, hardy_z
    from app.services.analytic import lngamma, xi, zeta
    from app.services.analytic import precision
    from app.services.scattering import c

    points = config.points or [complex(0.5, 14.134725141734693)]
    extended = config.precision is Precision.extended
    spec = _lfunction(config)
    double: Dict[SpecialFunction, Callable] = {
        SpecialFunction.zeta: zeta,
        SpecialFunction.xi: xi,
        SpecialFunction.lngamma: lngamma,
        SpecialFunction.chi4: dirichlet_L_chi4,
        SpecialFunction.dedekind: dedekind_gaussian,
        SpecialFunction.scattering: c,
        SpecialFunction.hardy_z: lambda p: hardy_z(spec, p.real),
        SpecialFunction.completed: lambda p: completed(spec, p),
    }
    oracle: Dict[SpecialFunction, Callable] = {
        SpecialFunction.zeta: lambda p: precision.mp_L("zeta", p),
        SpecialFunction.xi: precision.mp_xi,
        SpecialFunction.lngamma: precision.mp_lngamma,
        SpecialFunction.chi4: lambda p: precision.mp_L("chi4", p),
        SpecialFunction.dedekind: lambda p: precision.mp_L("dedekind", p),
        SpecialFunction.scattering: precision.mp_scattering,
    }
    if BUILTIN_SPECS.get(spec.name) is spec:
        oracle[SpecialFunction.completed] = lambda p: precision.mp_completed(spec, p)
    if extended and config.function not in oracle:
        raise UsageError(f"--precision extended is not available for {config.function.value} of {spec.name}")

    rows = []
    for p in points:
        if extended:
            with precision.extended():
                value = complex(oracle[config.function](p))
        else:
            value = complex(double[config.function](p))
        rows.append((p.real, p.imag, value.real, value.imag))
    payload = {
        "function": config.function.value,
        "precision": config.precision.value,
        "values": [{"s": complex(r[0], r[1]), "value": complex(r[2], r[3])} for r in rows],
    }
    if config.function in (SpecialFunction.hardy_z, SpecialFunction.completed):
        payload["lfunction"] = spec.name
    return Result(payload, ["re_s", "im_s", "re_value", "im_value"], rows)


def cmd_scattering_zeros(config: RunConfig) -> Result:
    found, _ = _scan(config)
    rows = [(z.index, z.t, z.branch, z.residual) for z in found]
    payload = {"a": config.a, "t_max": config.t_max, "n_zeros": len(found),
               "zeros": [{"j": z.index, "t": z.t, "branch": z.branch, "residual": z.residual} for z in found]}
    return Result(payload, ["j", "t_j", "branch", "residual"], rows)


def cmd_count(config: RunConfig) -> Result:
    from app.services import scattering

    found, datum = _scan(config)
    winding = scattering.winding_count(config.a, config.t_max, datum)
    predicted = scattering.count_predicted(config.a, config.t_max)
    bound = 2.0 * math.log(config.t_max)
    report = CountReport(
        a=config.a, T=config.t_max, found=len(found), winding=winding, predicted=predicted,
        deviation=abs(len(found) - predicted), log_bound=bound, complete=len(found) == winding,
    )
    if not report.complete:
        logger.error(f"Zero count {report.found} differs from the winding number {winding}")
        raise InvariantViolationError(f"found {report.found} zeros, winding number is {winding}")
    return Result(report)


def cmd_gaps(config: RunConfig) -> Result:
    from app.services import scattering

    found, datum = _scan(config)
    window = scattering.zeros_in_window(found, config.window_start, config.t_max)
    report = scattering.gaps(window, config.a, datum)
    if config.strict and not report.rigid:
        local = report.stats["local"]
        raise InvariantViolationError(
            f"normalised gaps are not rigid: CV {local['cv']:.4f} (limit {scattering.RIGIDITY_CV}), "
            f"mean {local['mean']:.4f} (band {scattering.MEAN_BAND})")
    rows = [(z.index, z.t, raw, local, smooth)
            for z, raw, local, smooth in zip(window, report.raw, report.local, report.smooth)]
    payload = {"a": config.a, "window": [config.window_start, config.t_max], "n_zeros": len(window),
               "stats": report.stats}
    return Result(payload, ["j", "t_j", "raw", "local", "smooth"], rows)


def cmd_casimir(config: RunConfig) -> Result:
    from app.services.symbolic import liealg

    convention = liealg.CharacterConvention(config.convention)
    if config.n == 4:
        payload = liealg.casimir_eigenvalue(config.preset, convention)
        payload["split_check"] = liealg.casimir_split_check(4).summary()
    else:
        omega = liealg.casimir(config.n)
        payload = {
            "n": config.n,
            "convention": convention.value,
            "scalar": liealg.format_scalar(liealg.infinitesimal_character(omega, convention=convention)),
            "central": all(liealg.bracket(omega, liealg.E(config.n, i, j)).is_zero()
                           for i in range(1, config.n + 1) for j in range(1, config.n + 1)),
        }
    return Result(payload)


def cmd_intertwine(config: RunConfig) -> Result:
    from app.services.symbolic.intertwine import WordOrder, chain_report

    preset = config.preset if config.preset in ("rankin-selberg", "interleaved") else None
    report = chain_report(config.word, preset, WordOrder(config.order))
    rows = [(k + 1, step["reflection"], " ".join(step["tuple"]), step["factor"])
            for k, step in enumerate(report["steps"])]
    return Result(report, ["step", "reflection", "tuple", "factor"], rows)


def cmd_ms_norm(config: RunConfig) -> Result:
    from app.services.maass_selberg import MSContext, norm_check, residue_norm_check, truncated_norm_sq

    ctx = MSContext(T=config.a)
    residue = residue_norm_check(ctx, extended=config.precision is Precision.extended)
    if config.points:
        checks = [norm_check(ctx, p.real) for p in config.points]
        rows = [(c["t"], c["closed_form"], c["extrapolated"], c["residual"], c["fd_error"]) for c in checks]
        header = ["t", "closed_form", "extrapolated", "residual", "fd_error"]
    else:
        found, datum = _scan(config)
        checks = []
        for z in found:
            norm = truncated_norm_sq(ctx, z.t)
            slope = float(datum.total_phase_derivative(config.a, z.t))
            checks.append({"j": z.index, "t": z.t, "norm_sq": norm, "z_prime": slope,
                           "difference": abs(norm - slope)})
        if any(c["norm_sq"] <= 0 for c in checks):
            raise InvariantViolationError("non-positive truncated norm at a constant-term zero")
        rows = [(c["j"], c["t"], c["norm_sq"], c["z_prime"], c["difference"]) for c in checks]
        header = ["j", "t_j", "norm_sq", "z_prime", "difference"]
    payload = {"T": config.a, "residue": residue.__dict__, "checks": checks}
    if config.points:
        first = checks[0]
        payload.update({key: first[key] for key in ("t", "closed_form", "extrapolated", "residual")})
    return Result(payload, header, rows)


def _spectrum(config: RunConfig):
    from app.services.spectrum import build_line, discrete_roots, get_provider

    provider = get_provider(config.theta)
    line = build_line(config.a, config.t_max, provider, precision=config.precision.value,
                      model=config.model, sf=config.sf, tail_terms=config.tail_terms)
    return provider, line, discrete_roots(line)


def cmd_spectrum_solve(config: RunConfig) -> Result:
    from app.services.scattering import TWO_PI
    from app.services.spectrum import eigenvalue_candidates, pair_correlation, theta_zeros
    from app.services.spectrum.statistics import MIN_POINTS, line_counting
    from app.services.spectrum.theta import combined_counting

    provider, line, roots = _spectrum(config)
    candidates = eigenvalue_candidates(line, roots, provider)
    cv_line = cv_theta = None
    # both sequences are unfolded by their smooth counts, above the range where the line count is defined
    line_ts = line.t[line.t > TWO_PI]
    if line_ts.size >= MIN_POINTS:
        cv_line = pair_correlation(line_ts, counting=line_counting(line.a)).cv
    zs = theta_zeros(provider, float(line.t[-1]))
    if zs.size >= MIN_POINTS:
        cv_theta = pair_correlation(zs, counting=combined_counting(provider)).cv

    rows = []
    for k, zero in enumerate(line.zeros):
        root = roots[k] if k < len(roots) else None
        rows.append((zero.index, zero.t, line.weights[k], line.norm_sq[k],
                     root.tau if root else None, root.residual if root else None,
                     root.deriv_cert if root else None))
    summary = SpectrumSummary(
        a=line.a, t_max=config.t_max, n_zeros=len(line), n_roots=len(roots), matches=len(candidates.matches),
        cv_line=cv_line, cv_theta_zeros=cv_theta, requested_a=line.requested_a, adjustments=line.adjustments,
        verdict=candidates.verdict, metadata={k: str(v) for k, v in line.metadata.items()},
    )
    return Result(summary, ["j", "t_j", "weight", "norm_sq", "tau_j", "residual", "deriv_cert"], rows)


def cmd_interlace(config: RunConfig) -> Result:
    from app.services.spectrum import tail_stability

    _, line, roots = _spectrum(config)
    stability = tail_stability(line)
    interior = all(r.bracket[0] < r.tau < r.bracket[1] for r in roots)
    positive = all(r.deriv_cert > 0 for r in roots)
    ok = interior and positive and len(roots) == len(line) - 1
    report = InterlaceReport(
        a=line.a, t_max=config.t_max, brackets=len(line) - 1, roots=len(roots), all_interior=interior,
        all_certificates_positive=positive, tail_base_terms=stability.base_terms, tail_compared=stability.compared,
        tail_comparison_t_max=stability.comparison_t_max, tail_tolerance=stability.tolerance,
        tail_max_absolute_move=stability.max_absolute_move,
        tail_median_relative_move=stability.median_relative_move,
        tail_max_relative_move=stability.max_relative_move,
        tail_verdict=stability.verdict, verdict="pass" if ok else "fail",
    )
    if not ok:
        raise InvariantViolationError(f"interlacing failed: {report.roots} roots on {report.brackets} brackets")
    if config.strict and stability.verdict != "stable":
        raise InvariantViolationError(
            f"roots moved by up to {stability.max_absolute_move:.3e} when the truncation doubled "
            f"(tolerance {stability.tolerance:g})")
    return Result(report)


def cmd_correlate(config: RunConfig) -> Result:
    from app.services.scattering import TWO_PI
    from app.services.spectrum import get_provider, pair_correlation, theta_zeros
    from app.services.spectrum.statistics import line_counting
    from app.services.spectrum.theta import combined_counting

    if config.source.value == "line":
        found, _ = _scan(config)
        ts = [z.t for z in found if z.t >= config.window_start and z.t > TWO_PI]
        counting = line_counting(config.a)
    else:
        provider = get_provider(config.theta)
        ts = [t for t in theta_zeros(provider, config.t_max) if t >= config.window_start]
        counting = combined_counting(provider)
    result = pair_correlation(ts, bin_width=config.bin_width, max_gap=config.max_gap, counting=counting)
    histogram = [list(row) for row in result.rows()]
    report = CorrelationReport(source=config.source.value, n_points=len(ts), mean=result.mean, cv=result.cv,
                               bin_width=config.bin_width, max_gap=config.max_gap, histogram=histogram)
    return Result(report, ["bin_lo", "bin_hi", "pair_density"], histogram)


HANDLERS: Dict[Command, Callable[[RunConfig], Result]] = {
    Command.specfun: cmd_specfun,
    Command.scattering_zeros: cmd_scattering_zeros,
    Command.count: cmd_count,
    Command.gaps: cmd_gaps,
    Command.casimir: cmd_casimir,
    Command.intertwine: cmd_intertwine,
    Command.ms_norm: cmd_ms_norm,
    Command.spectrum_solve: cmd_spectrum_solve,
    Command.interlace: cmd_interlace,
    Command.correlate: cmd_correlate,
}


# -- entry points -------------------------------------------------------------

def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="thetaspec", description="Spectral computations for truncated Eisenstein series")
    parser.add_argument("command", choices=[c.value for c in Command])
    parser.add_argument("--a", type=float, default=3.0, help="truncation height")
    parser.add_argument("--t-max", type=float, default=60.0)
    parser.add_argument("--theta", default="delta-at-i", help="theta provider")
    parser.add_argument("--output", "-o", default=None)
    parser.add_argument("--format", choices=[f.value for f in OutputFormat], default=None,
                        help="json for casimir, intertwine and ms-norm, csv otherwise")
    parser.add_argument("--strict", action="store_true",
                        help="exit 2 when the gap rigidity or tail-doubling threshold fails")
    parser.add_argument("--precision", choices=[p.value for p in Precision], default="double")
    parser.add_argument("--tail-terms", type=int, default=settings.TAIL_FIT_TERMS)
    parser.add_argument("--no-timestamp", action="store_true")
    parser.add_argument("--no-cache", action="store_true")
    parser.add_argument("--metrics-out", default=None)
    parser.add_argument("--log-level", default=None)
    parser.add_argument("--function", choices=[f.value for f in SpecialFunction], default="zeta")
    parser.add_argument("--point", dest="points", action="append", default=[], help="complex point, repeatable")
    parser.add_argument("--t", dest="heights", type=float, action="append", default=[],
                        help="height t on the critical line, repeatable; same as --point with a real value")
    parser.add_argument("--lfunction", default=None, help=LFUNCTION_HELP)
    parser.add_argument("--window-start", type=float, default=0.0)
    parser.add_argument("--n", type=int, default=4)
    parser.add_argument("--preset", default=None)
    parser.add_argument("--convention", choices=["lowering", "raising"], default="lowering")
    parser.add_argument("--word", default="2,1,3,2", help="comma separated reflection indices")
    parser.add_argument("--order", choices=["application", "operator"], default="application")
    parser.add_argument("--model", choices=["gl2", "gl4"], default="gl2")
    parser.add_argument("--sf", type=float, default=0.0)
    parser.add_argument("--source", choices=["line", "theta-zeros"], default="line")
    parser.add_argument("--bin-width", type=float, default=0.1)
    parser.add_argument("--max-gap", type=float, default=3.0)
    return parser


def parse_args(argv: Sequence[str]) -> RunConfig:
    argv = list(argv)
    if argv[:2] == ["ms", "norm"]:
        argv = ["ms-norm"] + argv[2:]
    args = build_parser().parse_args(argv)
    try:
        word = [int(k) for k in args.word.split(",") if k.strip()]
    except ValueError:
        raise UsageError(f"--word must be comma separated integers, got '{args.word}'") from None
    preset = args.preset or ("rankin-selberg" if args.command == Command.intertwine.value else "interleaved")
    output_format = args.format or (
        OutputFormat.json.value if args.command in JSON_COMMANDS else OutputFormat.csv.value)
    if args.log_level:
        logging.getLogger().setLevel(args.log_level.upper())
    return RunConfig(
        command=args.command, a=args.a, t_max=args.t_max, theta=args.theta, output=args.output,
        format=output_format, strict=args.strict, precision=args.precision, tail_terms=args.tail_terms,
        timestamp=not args.no_timestamp,
        metrics_out=args.metrics_out, use_cache=not args.no_cache, function=args.function,
        points=args.points + [complex(h) for h in args.heights], lfunction=args.lfunction,
        window_start=args.window_start, n=args.n, preset=preset, convention=args.convention, word=word,
        order=args.order, model=args.model, sf=args.sf, source=args.source, bin_width=args.bin_width,
        max_gap=args.max_gap,
    )


def run(config: RunConfig) -> int:
    """Execute one command and write its report; returns the process exit code"""
    try:
        result = HANDLERS[config.command](config)
        text = render(result, config)
    except InvariantViolationError as e:
        logger.error(f"Invariant violated in {config.command.value}: {e}")
        print(f"invariant violation: {e}", file=sys.stderr)
        return 2
    except (UsageError, ValidationError, ValueError, KeyError) as e:
        logger.error(f"Usage error in {config.command.value}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 1
    except ThetaspecError as e:
        logger.error(f"{config.command.value} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 2
    finally:
        write_metrics(config.metrics_out)

    if config.output is None:
        sys.stdout.write(text)
    else:
        config.output.parent.mkdir(parents=True, exist_ok=True)
        config.output.write_text(text)
        logger.info(f"Wrote {config.command.value} report to {config.output}")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO),
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        config = parse_args(sys.argv[1:] if argv is None else argv)
    except (UsageError, ValidationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
