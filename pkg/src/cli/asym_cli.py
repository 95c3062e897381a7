#!/usr/bin/env python3
"""
Critical-case asymptotics CLI

Usage:
    asym-cli check <config> [--csv PATH]
    asym-cli expand <config> --order N --eps E
    asym-cli solve <config> --eps E
    asym-cli lemmas <config> [--lemma K ...] [--samples N] [--seed S]
    asym-cli verify <config> --order N [--eps LIST] [--slack D]

Exit codes: 0 success or passing verdict, 1 failing verdict or numerical
breakdown, 2 usage or configuration error.
"""

import functools
import logging
import sys
import time
from pathlib import Path
from typing import List, Optional

import click
import coloredlogs
import numpy as np
import pandas as pd

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from asymptotics import __version__
from asymptotics.errors import AsymptoticsError, ConfigError
from asymptotics.expansion import build_expansion, required_zeta_range
from asymptotics.harness import SweepRunner, emit_report, theorem_check, write_manifest_json
from asymptotics.harness.report_writer import FLOAT_FORMAT
from asymptotics.models import RunManifest
from asymptotics.principles import run_suites
from asymptotics.problem.initial import truncation_window, validate_initial_decay, window_grid
from asymptotics.problem.loader import load_problem_file, spec_hash
from asymptotics.settings import RunSettings, load_settings
from asymptotics.solver import solve_reference
from asymptotics.spectral import check_conditions, drift_coefficient, eigendecompose

logger = logging.getLogger('asym_cli')

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
PROFILE_TIME_ROWS = 51


def setup_logging(level: str = 'INFO', log_file: Optional[str] = None):
    """Configure logging: colored console output plus an optional file."""
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
    coloredlogs.install(level=level.upper(), fmt=LOG_FORMAT, stream=sys.stderr)
    if log_file:
        handler = logging.FileHandler(log_file)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        root.addHandler(handler)


def guarded(func):
    """Map toolkit errors to exit codes; the wrapped command returns its own code."""
    @functools.wraps(func)
    @click.pass_context
    def wrapper(ctx, *args, **kwargs):
        try:
            code = func(ctx, *args, **kwargs)
        except ConfigError as e:
            click.echo(f"Configuration error: {e}", err=True)
            ctx.exit(EXIT_USAGE)
        except AsymptoticsError as e:
            logger.exception(f"{ctx.info_name} failed")
            click.echo(f"Error: {e}", err=True)
            ctx.exit(EXIT_FAIL)
        ctx.exit(code or EXIT_OK)
    return wrapper


def _order(ctx, param, value):
    if value is not None and value not in (0, 1):
        raise click.BadParameter("order must be 0 or 1")
    return value


def _eps_list(ctx, param, value):
    if value is None:
        return None
    try:
        return [float(v) for v in value.split(',') if v.strip()]
    except ValueError:
        raise click.BadParameter(f"not a comma-separated list of numbers: {value}")


def _load(ctx, config: str):
    """Problem document, its raw text and the run settings."""
    settings = load_settings(ctx.obj.get('defaults'))
    spec, text = load_problem_file(config)
    return spec, text, settings


def _manifest(command: str, config: str, text: str, settings: RunSettings, parameters: dict,
              stages: dict) -> RunManifest:
    return RunManifest(command=command, spec_path=str(config), spec_hash=spec_hash(text),
                       parameters={'settings': settings.model_dump(), **parameters},
                       version=__version__, stage_seconds=stages)


@click.group()
@click.option('--log-level', default='INFO', type=click.Choice(['DEBUG', 'INFO', 'WARNING', 'ERROR'],
                                                              case_sensitive=False), help='Log level')
@click.option('--log-file', default=None, type=click.Path(), help='Also log to this file')
@click.option('--defaults', 'defaults_path', default=None, type=click.Path(),
              help='Defaults table (config/defaults.yaml when omitted)')
@click.version_option(__version__)
@click.pass_context
def cli(ctx, log_level, log_file, defaults_path):
    """Surge/boundary-function expansions: build, solve, verify"""
    setup_logging(log_level, log_file)
    ctx.ensure_object(dict)
    ctx.obj['defaults'] = defaults_path


@cli.command()
@click.argument('config', type=click.Path(exists=True, dir_okay=False))
@click.option('--csv', 'csv_path', default=None, type=click.Path(), help='Also write the rows as CSV')
@click.option('--out', default='./out', type=click.Path(), help='Output directory')
@guarded
def check(ctx, config, csv_path, out):
    """Check the structural conditions I-VIII"""
    spec, text, settings = _load(ctx, config)
    started = time.perf_counter()
    report = check_conditions(spec, settings.spectral)

    rows = []
    for v in report.verdicts:
        status = 'pass' if v.passed else 'FAIL'
        value = '' if v.value is None else f"{v.value:.6g}"
        click.echo(f"{v.name:<5} {status:<5} {value:>12}  {v.witness}")
        rows.append({'condition': v.name, 'passed': v.passed, 'value': v.value, 'witness': v.witness})
    click.echo(f"\n{'All conditions pass' if report.passed else 'Failed: ' + ', '.join(report.failed())}")

    if csv_path:
        pd.DataFrame(rows).to_csv(csv_path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    manifest = _manifest('check', config, text, settings, {'passed': report.passed},
                         {'check': time.perf_counter() - started})
    write_manifest_json(manifest, Path(out) / 'run_manifest.json')
    return EXIT_OK if report.passed else EXIT_FAIL


def _profile_frame(profile) -> pd.DataFrame:
    stride = max(1, (profile.times.size - 1) // (PROFILE_TIME_ROWS - 1))
    rows = np.arange(0, profile.times.size, stride)
    if rows[-1] != profile.times.size - 1:
        rows = np.append(rows, profile.times.size - 1)
    zeta, t = np.meshgrid(profile.zeta, profile.times[rows])
    return pd.DataFrame({'zeta': zeta.ravel(), 't': t.ravel(), 'value': profile.values[rows].ravel()})


@cli.command()
@click.argument('config', type=click.Path(exists=True, dir_okay=False))
@click.option('--order', type=int, default=1, callback=_order, help='Expansion order N (0 or 1)')
@click.option('--eps', type=float, required=True, help='Small parameter used to size the profile grid')
@click.option('--out', default='./out', type=click.Path(), help='Output directory')
@guarded
def expand(ctx, config, order, eps, out):
    """Build the expansion terms and write the profiles"""
    spec, text, settings = _load(ctx, config)
    report = check_conditions(spec, settings.spectral)
    if not report.passed:
        click.echo(f"Conditions failed: {', '.join(report.failed())}", err=True)
        return EXIT_FAIL

    started = time.perf_counter()
    sd = eigendecompose(spec.L, spec.W, settings.spectral)
    B = drift_coefficient(sd, spec.D)
    zeta_range = required_zeta_range(spec, B, [eps], spec.T, settings.solver.decay_width)
    exp_set = build_expansion(spec, sd, order, zeta_range, spec.T, settings.expansion)
    elapsed = time.perf_counter() - started

    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    _profile_frame(exp_set.phi0).to_csv(out_dir / 'phi0.csv', index=False, float_format=FLOAT_FORMAT,
                                        lineterminator='\n')
    if exp_set.phi1 is not None:
        _profile_frame(exp_set.phi1).to_csv(out_dir / 'phi1.csv', index=False, float_format=FLOAT_FORMAT,
                                            lineterminator='\n')

    summary = exp_set.summary()
    parameters = {
        'eps': eps, 'expansion': summary,
        'h0': exp_set.h0.tolist(), 'h0_star': exp_set.h0_star.tolist(),
        'psi0': exp_set.psi0.tolist(), 'q': exp_set.q.tolist(),
    }
    write_manifest_json(_manifest('expand', config, text, settings, parameters, {'expand': elapsed}),
                        out_dir / 'expansion_manifest.json')
    click.echo(f"B={summary['B']:.10g}  g={summary['g']:.10g}  mu={summary['mu']:.10g}  k={summary['k_gap']:.10g}")
    click.echo(f"Profiles written to {out_dir}")
    return EXIT_OK


@cli.command()
@click.argument('config', type=click.Path(exists=True, dir_okay=False))
@click.option('--eps', type=float, required=True, help='Small parameter')
@click.option('--out', default='./out', type=click.Path(), help='Output directory')
@guarded
def solve(ctx, config, eps, out):
    """Solve the full stiff system with the reference scheme"""
    spec, text, settings = _load(ctx, config)
    started = time.perf_counter()
    sd = eigendecompose(spec.L, spec.W, settings.spectral)
    centre, half = truncation_window(spec, validate_initial_decay(spec), eps, spec.T, settings.solver.decay_width)
    x = window_grid(centre, half, settings.solver.grid_step * eps)
    times = [0.0] + [f * spec.T for f in settings.harness.fractions]
    field = solve_reference(spec, eps, x, times, sd=sd, settings=settings.solver)
    elapsed = time.perf_counter() - started

    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    nt, nx, m = field.values.shape
    frame = pd.DataFrame({
        't': np.repeat(field.times, nx * m),
        'x': np.tile(np.repeat(field.x_grid, m), nt),
        'state': np.tile(np.arange(m), nt * nx),
        'value': field.values.ravel(),
    })
    frame.to_csv(out_dir / 'solution.csv', index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    write_manifest_json(_manifest('solve', config, text, settings, {'eps': eps, 'scheme': field.scheme},
                                  {'solve': elapsed}),
                        out_dir / 'solve_manifest.json')
    click.echo(f"{field.scheme['steps']} steps on {nx} points, dt<={field.scheme['dt']:.3e}; "
               f"solution written to {out_dir / 'solution.csv'}")
    return EXIT_OK


@cli.command()
@click.argument('config', type=click.Path(exists=True, dir_okay=False))
@click.option('--lemma', 'lemmas', multiple=True, type=click.IntRange(1, 5),
              help='Lemma to run (repeatable, all when omitted)')
@click.option('--samples', type=click.IntRange(min=1), default=None, help='Instances per suite')
@click.option('--seed', type=int, default=None, help='Root seed')
@click.option('--workers', type=click.IntRange(min=1), default=1, help='Worker threads')
@click.option('--out', default='./out', type=click.Path(), help='Output directory')
@guarded
def lemmas(ctx, config, lemmas, samples, seed, workers, out):
    """Run the comparison-principle suites"""
    spec, text, settings = _load(ctx, config)
    selected = sorted(set(lemmas)) or [1, 2, 3, 4, 5]
    started = time.perf_counter()
    report = run_suites(selected, settings.principles, samples=samples, seed=seed, workers=workers, spec=spec)
    elapsed = time.perf_counter() - started

    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(report.rows(), columns=['lemma', 'instance', 'verdict', 'ratio', 'margin', 'detail']) \
        .to_csv(out_dir / 'lemmas.csv', index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    for lemma in selected:
        click.echo(report.summary(lemma))

    parameters = {'lemmas': selected, 'samples': samples, 'seed': settings.principles.seed if seed is None else seed,
                  'workers': workers, 'passed': report.passed}
    write_manifest_json(_manifest('lemmas', config, text, settings, parameters, {'lemmas': elapsed}),
                        out_dir / 'run_manifest.json')
    return EXIT_OK if report.passed else EXIT_FAIL


@cli.command()
@click.argument('config', type=click.Path(exists=True, dir_okay=False))
@click.option('--order', type=int, default=0, callback=_order, help='Expansion order N (0 or 1)')
@click.option('--eps', 'eps_values', default=None, callback=_eps_list,
              help='Comma-separated, strictly decreasing eps list')
@click.option('--slack', type=float, default=None, help='Slope slack delta')
@click.option('--workers', type=click.IntRange(min=1), default=None, help='Worker threads')
@click.option('--out', default='./out', type=click.Path(), help='Output directory')
@guarded
def verify(ctx, config, order, eps_values, slack, workers, out):
    """Sweep eps and check the residual estimate"""
    spec, text, settings = _load(ctx, config)
    eps_values = eps_values or settings.harness.eps
    slack = settings.harness.slack if slack is None else slack

    runner = SweepRunner(spec, order, eps_values, settings)
    report = runner.run(workers)
    verdict = theorem_check(report, slack)

    click.echo(f"{'eps':>10} {'error':>12} {'defect':>12} {'kernel':>12} {'E/eps^(N+1)':>12}")
    for e in report.entries:
        click.echo(f"{e.eps:>10.4g} {e.error:>12.4e} {e.defect:>12.4e} {e.kernel_defect:>12.4e} {e.ratio:>12.4g}")
    click.echo(f"\nslope {report.slope:.3f} (need >= {verdict.required_slope:.3f}), "
               f"C_hat {verdict.c_hat:.4g}, spread {verdict.ratio_spread:.3g}")
    for flag in report.flags:
        click.echo(f"flag: {flag}")
    click.echo("PASS" if verdict.passed else "FAIL: " + "; ".join(verdict.reasons))

    seeds = {'principles': settings.principles.seed}
    paths = emit_report(report, out, spec_hash(text), seeds)
    parameters = {'order': order, 'eps': eps_values, 'slack': slack, 'verdict': verdict.model_dump(),
                  'flags': report.flags, 'artifacts': {k: str(v) for k, v in paths.items()}}
    write_manifest_json(_manifest('verify', config, text, settings, parameters, runner.stage_seconds),
                        Path(out) / 'run_manifest.json')
    return EXIT_OK if verdict.passed else EXIT_FAIL


def dispatch(argv: Optional[List[str]] = None) -> int:
    """Run the CLI on argv and return the exit code instead of exiting."""
    args = list(sys.argv[1:] if argv is None else argv)
    try:
        result = cli.main(args, prog_name='asym-cli', standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.Abort:
        click.echo("Aborted!", err=True)
        return EXIT_FAIL
    return result if isinstance(result, int) else EXIT_OK


def main():
    sys.exit(dispatch())


if __name__ == '__main__':
    main()
