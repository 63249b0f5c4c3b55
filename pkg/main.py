"""
SpanLab - Spanning Regular Subgraph Threshold Laboratory

Main entry point for the application.
"""

import functools
import json
import sys
from pathlib import Path
from typing import Optional

import click

from src import __version__
from src.core.config import CONDITION_RULES, SCHEDULE_PRESETS, settings
from src.core.exceptions import SpanLabError
from src.core.logging import configure_logging


def _exit_on_error(command):
    """Print library errors the CLI way and exit with their code"""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except SpanLabError as e:
            click.echo(f"❌ Error: {e}", err=True)
            sys.exit(e.exit_code)

    return wrapper


def _say(message: str) -> None:
    click.echo(message, err=True)


def _write_or_echo(text: str, out: Optional[str]) -> None:
    if out:
        target = Path(out)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text)
        click.echo(f"✅ Wrote {target}", err=True)
    else:
        click.echo(text, nl=False)


@click.group()
@click.option('--log-level', default=None, help='Override SPANLAB_LOG_LEVEL')
@click.option('--json-logs/--console-logs', default=None, help='Render logs as JSON')
def cli(log_level: Optional[str], json_logs: Optional[bool]):
    """SpanLab CLI - thresholds of spanning regular subgraphs at desk scale"""
    configure_logging(level=log_level, json_logs=json_logs)


@cli.command()
@click.option('--family', default=None, help='Family spec, e.g. sq_cycle or toroidal_grid:3')
@click.option('--n', 'n', type=int, required=True, help='Number of vertices')
@click.option('--gnm', 'm', type=int, default=None, help='Uniform random graph with this many edges')
@click.option('--gnp', 'p', type=float, default=None, help='Binomial random graph with this edge probability')
@click.option('--seed', type=int, default=0, help='Master seed')
@click.option('--out', default=None, help='Edge-list output path (stdout when omitted)')
@_exit_on_error
def gen(family: Optional[str], n: int, m: Optional[int], p: Optional[float], seed: int, out: Optional[str]):
    """Generate a family member or a random graph as an edge list"""
    from src.core.exceptions import ParameterError
    from src.core.seeding import derive_seed
    from src.generators.families import build_family
    from src.generators.random_graphs import RandomGraphGenerator
    from src.io.edgelist import format_edgelist
    from src.models.graph import FamilySpec

    chosen = [x is not None for x in (family, m, p)]
    if sum(chosen) != 1:
        raise ParameterError("pass exactly one of --family, --gnm, --gnp")
    if family is not None:
        spec = FamilySpec.parse(family)
        graph = build_family(spec, n)
        comment = f"{spec.label} n={n}"
    else:
        generator = RandomGraphGenerator(derive_seed(seed, "gen"))
        graph = generator.gnm(n, m) if m is not None else generator.gnp(n, p)
        comment = f"G(n={n}, {'m=' + str(m) if m is not None else 'p=' + str(p)}) seed={seed}"
    _write_or_echo(format_edgelist(graph, comment), out)


@cli.command('check-expansion')
@click.option('--graph', 'graph_path', required=True, help='Edge-list file')
@click.option('--rule', type=click.Choice(sorted(CONDITION_RULES) + ['all', 'claims']), default='d+1', help='Boundary rule')
@click.option('--vmin', type=int, default=3, help='Smallest subgraph size checked')
@click.option('--vmax', type=int, required=True, help='Largest subgraph size checked')
@click.option('--w', type=float, default=None, help='w for the growing rule')
@click.option('--delta', type=float, default=None, help='delta for the growing rule')
@click.option('--budget', type=int, default=None, help='Enumeration budget')
@_exit_on_error
def check_expansion(graph_path: str, rule: str, vmin: int, vmax: int, w: Optional[float], delta: Optional[float], budget: Optional[int]):
    """Certify an edge-boundary condition; exit 1 when a witness violates it"""
    from src.analysis.expansion import ConditionParams, check_local_sparsity, classify_conditions, verify_closed_claims
    from src.io.edgelist import read_edgelist
    from src.io.results import build_artifact, to_json

    F = read_edgelist(graph_path)
    if rule == 'claims':
        report = verify_closed_claims(F, vmax, budget)
        click.echo(to_json(build_artifact(report, mode='exact')), nl=False)
        sys.exit(0 if report.passed else 1)
    if rule == 'all':
        verdicts = classify_conditions(F, ConditionParams(w=w, delta=delta or 0.25, v_cap=vmax), budget)
        click.echo(to_json(build_artifact(verdicts, mode='exact')), nl=False)
        sys.exit(0 if all(v.holds for v in verdicts) else 1)
    verdict = check_local_sparsity(F, rule, (vmin, vmax), w=w, delta=delta, budget=budget)
    click.echo(to_json(build_artifact(verdict, mode='exact')), nl=False)
    sys.exit(0 if verdict.holds else 1)


@cli.command()
@click.option('--graph', 'graph_path', required=True, help='Edge-list file')
@click.option('--lmax', type=int, default=None, help='Largest subgraph edge count')
@click.option('--window', type=int, default=None, help='Largest component vertex count')
@click.option('--budget', type=int, default=None, help='Enumeration budget')
@click.option('--out', default=None, help='CSV output path')
@_exit_on_error
def census(graph_path: str, lmax: Optional[int], window: Optional[int], budget: Optional[int], out: Optional[str]):
    """Count subgraphs by (l, x, c)"""
    from src.analysis.census import census as run_census
    from src.io.edgelist import read_edgelist
    from src.io.results import emit_results

    table = run_census(read_edgelist(graph_path), l_max=lmax, budget=budget, max_component_vertices=window)
    if not table.complete:
        click.echo(f"⚠️  Census truncated at l <= {table.l_max}", err=True)
    _write_or_echo(emit_results(table, 'csv'), out)


@cli.command()
@click.option('--graph', 'graph_path', required=True, help='Edge-list file')
@click.option('--family', default=None, help='Family the graph belongs to (enables |Aut| shortcuts and extension counts)')
@click.option('--consts', default='1,1,1,1', help='a1,a2,b1,b2')
@click.option('--calibrate', is_flag=True, help='Report the smallest constants for which the bounds hold')
@click.option('--lmax', type=int, default=None, help='Largest subgraph edge count')
@click.option('--out', default=None, help='CSV output path')
@_exit_on_error
def bounds(graph_path: str, family: Optional[str], consts: str, calibrate: bool, lmax: Optional[int], out: Optional[str]):
    """Compare census counts with the alpha, beta and jhc bounds; exit 1 on a failing row"""
    from src.analysis.automorphisms import automorphism_count
    from src.analysis.bounds import BoundConstants, bounds_table, calibrate_constants
    from src.analysis.census import census as run_census, extension_profile
    from src.analysis.expansion import host_degree
    from src.io.edgelist import read_edgelist
    from src.io.results import to_csv
    from src.models.graph import FamilySpec

    F = read_edgelist(graph_path)
    spec = FamilySpec.parse(family) if family else None
    aut = automorphism_count(F, spec=spec)
    profile = extension_profile(F, spec) if F.n <= settings.universe_limit else None
    table = run_census(F, l_max=lmax)
    constants = BoundConstants.parse(consts)
    if calibrate:
        report = calibrate_constants(table, profile, host_degree(F), F.n, aut)
        click.echo(f"📐 Calibrated constants: {report.constants.model_dump()}", err=True)
        constants = report.constants
    frame = bounds_table(table, constants, aut, profile)
    _write_or_echo(to_csv(frame), out)
    flags = frame[['alpha_pass', 'beta_pass', 'jhc_pass']].values.ravel().tolist() if len(frame) else []
    sys.exit(1 if any(flag is not None and not flag for flag in flags) else 0)


@cli.command()
@click.option('--graph', 'graph_path', required=True, help='Host edge-list file')
@click.option('--family', required=True, help='Family spec to look for')
@click.option('--budget', type=int, default=None, help='Search node budget')
@click.option('--seed', type=int, default=0, help='Seed of the branching order')
@_exit_on_error
def contain(graph_path: str, family: str, budget: Optional[int], seed: int):
    """Decide whether the host contains a spanning member of the family"""
    from src.io.edgelist import read_edgelist
    from src.models.fragment import SearchStatus
    from src.models.graph import FamilySpec
    from src.search.embedder import find_spanning_copy

    result = find_spanning_copy(read_edgelist(graph_path), FamilySpec.parse(family), budget=budget, seed=seed)
    click.echo(json.dumps(result.to_dict(), sort_keys=True, indent=2))
    if result.status == SearchStatus.INCONCLUSIVE:
        sys.exit(3)


@cli.command()
@click.option('--preset', type=click.Choice(sorted(SCHEDULE_PRESETS)), default='square_days')
@click.option('--family', default=None, help='Family spec (defaults to the preset family)')
@click.option('--n', 'n', type=int, required=True, help='Number of vertices')
@click.option('--eps', type=float, default=0.1)
@click.option('--B', 'B', type=float, default=1.0, help='Coarse schedule constant')
@click.option('--w', type=float, default=None)
@click.option('--C', 'C', type=float, default=4.0)
@click.option('--round-cap', type=int, default=5)
@click.option('--pop', 'population', type=int, default=10, help='Number of planted instances')
@click.option('--budget', type=int, default=None)
@click.option('--seed', type=int, required=True)
@click.option('--out', default=None, help='Trace JSON path')
@click.option('--hist', default=None, help='Fragment-size histogram CSV path')
@click.option('--config', 'config_path', default=None, help='YAML config; replaces every other option')
@_exit_on_error
def fragment(preset, family, n, eps, B, w, C, round_cap, population, budget, seed, out, hist, config_path):
    """Run a fragmentation schedule over a seeded population"""
    from src.models.experiment import ExperimentConfig, parse_config

    if config_path:
        config = parse_config(Path(config_path).read_text())
    else:
        config = ExperimentConfig(
            command='fragment', family=family or SCHEDULE_PRESETS[preset]['family'] or 'power_of_cycle:2',
            n=n, seed=seed, preset=preset, eps=eps, B=B, w=w, C=C, round_cap=round_cap,
            population=population, budget=budget, mode='heuristic', out=out,
        )
    _run_fragment(config, hist)


def _run_fragment(config, hist: Optional[str] = None) -> None:
    from src.fragmentation.schedules import run_schedule
    from src.io.results import emit_results

    _say(f"🧩 Running {config.preset} on {config.family} with n={config.n}, population {config.population}")
    trace = run_schedule(config)
    for record in trace.rounds:
        _say(f"   - {record.name}: median size {record.median_size}, trivial {record.trivial}, inconclusive {record.inconclusive}")
    if trace.covered_fraction is not None:
        _say(f"   - covered fraction: {trace.covered_fraction:.3f}")
    text = emit_results(trace, 'json', config.out, config=config, mode=config.mode)
    if not config.out:
        click.echo(text, nl=False)
    if hist:
        emit_results(trace, 'csv', hist)
    _say("✅ Fragmentation trace complete")


@cli.command()
@click.option('--family', default='sq_cycle', help='Family spec')
@click.option('--n', 'n', type=int, required=True)
@click.option('--trials', type=int, default=100, help='Trials per probe')
@click.option('--tol', type=float, default=0.02, help='Bracket width at which bisection stops')
@click.option('--grid', default=None, help='Comma-separated p values; evaluates the grid instead of bisecting')
@click.option('--budget', type=int, default=None)
@click.option('--seed', type=int, required=True)
@click.option('--out', default=None, help='Curve CSV path')
@click.option('--report', default=None, help='Threshold estimate JSON path')
@click.option('--config', 'config_path', default=None, help='YAML config; replaces every other option')
@_exit_on_error
def threshold(family, n, trials, tol, grid, budget, seed, out, report, config_path):
    """Monte Carlo containment curve and the finite-n median point"""
    from src.core.exceptions import ParameterError
    from src.io.results import emit_results
    from src.models.experiment import ExperimentConfig, parse_config
    from src.threshold.estimator import bisect_threshold, containment_curve

    if config_path:
        config = parse_config(Path(config_path).read_text())
    else:
        config = ExperimentConfig(command='threshold', family=family, n=n, seed=seed, trials=trials, tol=tol, budget=budget, out=out)
    spec = config.spec
    _say(f"🎯 Estimating the containment curve of {spec.label} at n={config.n}")
    if grid:
        try:
            values = [float(v) for v in grid.split(',') if v.strip()]
        except ValueError:
            raise ParameterError(f"grid must be comma-separated numbers, got '{grid}'")
        curve, violations = containment_curve(config.n, spec, values, config.trials, config.seed, config.budget)
        _say(f"   - coupling violations: {violations}")
        result = {"curve": curve, "coupling_violations": violations}
    else:
        estimate = bisect_threshold(config.n, spec, config.trials, config.tol, config.seed, config.budget)
        curve = estimate.curve
        _say(f"   - bracket: [{estimate.bracket[0]:.4f}, {estimate.bracket[1]:.4f}], p_hat: {estimate.p_hat}")
        if estimate.anomaly:
            _say("   ⚠️  Non-monotone probes, bisection aborted")
        result = estimate
    text = emit_results(curve, 'csv', config.out)
    if not config.out:
        click.echo(text, nl=False)
    if report:
        emit_results(result, 'json', report, config=config, mode='exact')
    _say("✅ Threshold estimation complete")


@cli.command()
def status():
    """Show SpanLab configuration"""

    print("🔬 SpanLab System Status")
    print("=" * 40)
    print(f"Version: {settings.app_version} (package {__version__})")
    print(f"Environment: {'Development' if settings.debug else 'Production'}")
    print(f"Workers: {settings.workers}")
    print(f"Search budget: {settings.search_budget}")
    print(f"Enumeration budget: {settings.enumeration_budget}")
    print(f"Universe limit: n <= {settings.universe_limit}")
    print(f"Confidence level: {settings.confidence_level}")
    print(f"Output directory: {settings.output_dir}")
    print("=" * 40)
    print("\n📋 Schedule presets:")
    for name, preset in SCHEDULE_PRESETS.items():
        print(f"  - {name}: {preset['description']}")
    print("\n📋 Boundary rules:")
    for name, description in CONDITION_RULES.items():
        print(f"  - {name}: {description}")


@cli.command()
def selftest():
    """Run basic system checks"""
    import math

    from src.analysis.automorphisms import automorphism_count
    from src.analysis.census import expectation_threshold
    from src.generators.families import build_family
    from src.models.graph import FamilySpec
    from src.search.embedder import find_spanning_copy

    print("🧪 Running SpanLab system checks...")
    print("=" * 40)
    failures = 0

    print("1. Square of C_8 automorphisms...")
    spec = FamilySpec.square_of_cycle()
    if automorphism_count(build_family(spec, 8)) == 16:
        print("   ✅ PASS: |Aut| = 16")
    else:
        print("   ❌ FAIL: wrong automorphism count")
        failures += 1

    print("2. Expectation threshold against sqrt(e/n)...")
    ratio = expectation_threshold(spec, 200) / math.sqrt(math.e / 200)
    if abs(ratio - 1) < 0.01:
        print(f"   ✅ PASS: ratio {ratio:.4f}")
    else:
        print(f"   ❌ FAIL: ratio {ratio:.4f}")
        failures += 1

    print("3. Containment search on the family itself...")
    result = find_spanning_copy(build_family(spec, 10), spec)
    if result.status.value == "found":
        print("   ✅ PASS: spanning copy found")
    else:
        print(f"   ❌ FAIL: search returned {result.status.value}")
        failures += 1

    print("\n🎉 Checks completed!" if not failures else f"\n❌ {failures} check(s) failed")
    sys.exit(1 if failures else 0)


if __name__ == "__main__":
    cli()
