"""
Main entry point for the localization toolkit

Runs seeded shot batches, analysis tables, pattern compilation and the
oracle sweep from the command line.
"""

import logging
import math
import sys
from pathlib import Path
from typing import Optional

import click
import numpy as np
from dotenv import load_dotenv
from pydantic import ValidationError

from src.analysis.correlators import bond_entropy_profile, correlation_decay, entropy_table
from src.analysis.spectrum import xi_table
from src.compiler.pattern import pattern_to_text
from src.compiler.rotations import compile_prep, compile_rotation
from src.errors import ConfigError, QCSError
from src.numerics.linalg import X, rz
from src.resource.canonical import make_cluster_wire, make_theta_wire

from .config import NAMED_GATES, ExperimentConfig, load_config, parse_vector
from .runner import oracle_sweep, run_batch, summarize, write_outputs

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

ORACLE_TV_TOL = 1e-9


def setup_logging(out_dir: Path, level: str) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.StreamHandler(sys.stdout),
            logging.FileHandler(out_dir / 'qcs_localization.log'),
        ],
        force=True,
    )


def _load(ctx: click.Context, config_path: str, **overrides: object) -> ExperimentConfig:
    try:
        config = load_config(config_path, **overrides)
    except (ConfigError, ValidationError) as e:
        click.echo(f"Configuration error: {e}", err=True)
        ctx.exit(EXIT_CONFIG)
    setup_logging(Path(config.output.dir), ctx.obj["log_level"])
    return config


def _run_experiment(ctx: click.Context, config: ExperimentConfig) -> None:
    try:
        reports = run_batch(config)
        summary, stats = summarize(config, reports)
        write_outputs(config.output.dir, reports, summary, stats)
    except QCSError as e:
        logger.error(f"Run {config.name} failed: {e}")
        ctx.exit(EXIT_RUNTIME)

    if summary["errors"]:
        logger.error(f"{summary['errors']} shot(s) ended in a protocol error")
        ctx.exit(EXIT_RUNTIME)
    if not summary["passed"]:
        failed = [name for name, ok in summary["checks"].items() if not ok]
        logger.error(f"Acceptance mismatch: {', '.join(failed)}")
        ctx.exit(EXIT_MISMATCH)
    logger.info(f"Run {config.name} passed all checks")
    ctx.exit(EXIT_OK)


def experiment_options(func):
    options = [
        click.option("--config", "config_path", required=True, type=click.Path(), help="Experiment YAML file"),
        click.option("--seed", type=int, default=None, help="Master seed (overrides the file)"),
        click.option("--shots", type=int, default=None, help="Number of shots"),
        click.option("--jobs", type=int, default=None, envvar="QCS_JOBS", help="Worker processes"),
        click.option("--out", type=click.Path(), default=None, envvar="QCS_OUT_DIR", help="Output directory"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


@click.group()
@click.option("--log-level", default="INFO", envvar="QCS_LOG_LEVEL", show_default=True)
@click.pass_context
def cli(ctx: click.Context, log_level: str) -> None:
    """Localizable entanglement toolkit for MPS resource states."""
    ctx.ensure_object(dict)
    ctx.obj["log_level"] = log_level


@cli.command()
@experiment_options
@click.pass_context
def run(ctx: click.Context, config_path: str, seed: Optional[int], shots: Optional[int],
        jobs: Optional[int], out: Optional[str]) -> None:
    """Run a shot batch and write report.jsonl, shots.csv, summary.yaml, metrics.prom."""
    config = _load(ctx, config_path, seed=seed, shots=shots, jobs=jobs, out=out)
    _run_experiment(ctx, config)


@cli.command()
@experiment_options
@click.pass_context
def localize(ctx: click.Context, config_path: str, seed: Optional[int], shots: Optional[int],
             jobs: Optional[int], out: Optional[str]) -> None:
    """Same as run."""
    ctx.invoke(run, config_path=config_path, seed=seed, shots=shots, jobs=jobs, out=out)


@cli.command()
@experiment_options
@click.pass_context
def simulate(ctx: click.Context, config_path: str, seed: Optional[int], shots: Optional[int],
             jobs: Optional[int], out: Optional[str]) -> None:
    """Run a shot batch keeping every shot's measurement transcript."""
    config = _load(ctx, config_path, seed=seed, shots=shots, jobs=jobs, out=out)
    config = config.model_copy(update={"output": config.output.model_copy(update={"transcripts": True})})
    _run_experiment(ctx, config)


@cli.command()
@click.option("--points", type=int, default=20, show_default=True, help="Theta grid points in (0, pi/4]")
@click.option("--theta", type=float, default=math.pi / 8, show_default=True, help="Wire for the correlator table")
@click.option("--n", "length", type=int, default=41, show_default=True, help="Wire length for correlators")
@click.option("--out", type=click.Path(), default="results/analysis", envvar="QCS_OUT_DIR")
@click.pass_context
def analyze(ctx: click.Context, points: int, theta: float, length: int, out: str) -> None:
    """Write correlation-length, correlator and entropy CSVs."""
    out_dir = Path(out)
    setup_logging(out_dir, ctx.obj["log_level"])
    thetas = np.linspace(math.pi / 4 / points, math.pi / 4, points)
    try:
        xi_table(thetas).to_csv(out_dir / "xi.csv", index=False)
        entropy_table(thetas).to_csv(out_dir / "entropy.csv", index=False)
        wire = make_theta_wire(theta, length)
        decay, rate = correlation_decay(wire, X)
        decay.to_csv(out_dir / "correlator.csv", index=False)
        bond_entropy_profile(make_theta_wire(theta, 10)).to_csv(out_dir / "bond_entropy.csv", index=False)
    except QCSError as e:
        logger.error(f"Analysis failed: {e}")
        ctx.exit(EXIT_RUNTIME)
    logger.info(f"Correlator decay rate at theta={theta:.6f}: {rate:.6f}; tables written to {out_dir}")
    ctx.exit(EXIT_OK)


@cli.command(name="compile")
@click.option("--family", type=click.Choice(["cluster", "theta"]), default="cluster", show_default=True)
@click.option("--theta", type=float, default=None, help="Wire angle for the theta family")
@click.option("--gate", default=None, help=f"Named gate ({', '.join(NAMED_GATES)}) or RZ")
@click.option("--angle", type=float, default=0.0, help="Angle of an RZ gate")
@click.option("--state", default=None, help="Target state 're,im;re,im' for a preparation pattern")
@click.option("--epsilon", type=float, default=1e-6, show_default=True)
@click.option("--out", type=click.Path(), required=True, help="Pattern file to write")
@click.pass_context
def compile_cmd(ctx: click.Context, family: str, theta: Optional[float], gate: Optional[str], angle: float,
                state: Optional[str], epsilon: float, out: str) -> None:
    """Compile a rotation or a state preparation into a pattern file."""
    setup_logging(Path(out).parent, ctx.obj["log_level"])
    if (gate is None) == (state is None):
        click.echo("Give exactly one of --gate and --state", err=True)
        ctx.exit(EXIT_CONFIG)
    if family == "theta" and (theta is None or not 0.0 < theta <= math.pi / 4):
        click.echo(f"--theta must lie in (0, pi/4] for the theta family, got {theta}", err=True)
        ctx.exit(EXIT_CONFIG)
    if not 0.0 < epsilon < 1.0:
        click.echo(f"--epsilon must lie in (0, 1), got {epsilon}", err=True)
        ctx.exit(EXIT_CONFIG)

    wire = make_cluster_wire(2) if family == "cluster" else make_theta_wire(float(theta), 2)  # type: ignore[arg-type]
    try:
        if state is not None:
            pattern = compile_prep(wire, parse_vector(state.split(";")), epsilon)
        elif gate.upper() == "RZ":  # type: ignore[union-attr]
            pattern = compile_rotation(wire, rz(angle), epsilon)
        elif gate in NAMED_GATES:
            pattern = compile_rotation(wire, NAMED_GATES[gate], epsilon, label=gate)
        else:
            click.echo(f"Unknown gate {gate!r}", err=True)
            ctx.exit(EXIT_CONFIG)
    except ValueError as e:
        click.echo(f"Invalid target: {e}", err=True)
        ctx.exit(EXIT_CONFIG)
    except QCSError as e:
        logger.error(f"Compilation failed: {e}")
        ctx.exit(EXIT_RUNTIME)

    Path(out).write_text(pattern_to_text(pattern))
    logger.info(f"Wrote {len(pattern.steps)}-step pattern ({pattern.declared_length} sites max) to {out}")
    ctx.exit(EXIT_OK)


@cli.command(name="oracle-check")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--transcripts", type=int, default=200, show_default=True)
@click.option("--jobs", type=int, default=1, envvar="QCS_JOBS")
@click.option("--out", type=click.Path(), default="results/oracle", envvar="QCS_OUT_DIR")
@click.pass_context
def oracle_check_cmd(ctx: click.Context, seed: int, transcripts: int, jobs: int, out: str) -> None:
    """Compare simulator and state-vector statistics along random transcripts."""
    out_dir = Path(out)
    setup_logging(out_dir, ctx.obj["log_level"])
    try:
        frame = oracle_sweep(seed, transcripts, jobs)
    except QCSError as e:
        logger.error(f"Oracle sweep failed: {e}")
        ctx.exit(EXIT_RUNTIME)
    frame.to_csv(out_dir / "oracle.csv", index=False)
    worst = float(frame["max_tv"].max())
    click.echo(f"max TV over {transcripts} transcripts: {worst:.3e}")
    ctx.exit(EXIT_OK if worst <= ORACLE_TV_TOL else EXIT_MISMATCH)


def main() -> None:
    load_dotenv()
    cli(obj={})


if __name__ == "__main__":
    main()
