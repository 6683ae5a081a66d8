"""
Shot runner

Builds the resource once per process, runs localization shots (optionally in
a joblib worker pool), aggregates statistics and writes the run artifacts.
"""

import json
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
import yaml
from joblib import Parallel, delayed
from pydantic import BaseModel, Field

from src.analysis.statistics import SuccessReport, success_stats
from src.compiler.rotations import compile_prep, max_rotation_length
from src.compiler.web import CouplingGate, LocalGate, WebCircuit, WebPreparation, compile_web_prep
from src.errors import IllegalStepError, QCSError
from src.numerics.linalg import random_state, random_unitary
from src.numerics.tolerances import TOL
from src.protocol.filter import build_filter
from src.protocol.localization import (
    LocalizationResult,
    localize_general,
    localize_simple,
    required_trials,
    required_wire_length,
)
from src.protocol.web import joint_output_fidelity, localize_web
from src.resource.canonical import CanonicalWire, make_cluster_wire, make_theta_wire
from src.resource.web import WebResource, make_web
from src.simulator.measurement import MeasurementOp
from src.simulator.oracle import oracle_check, oracle_site_density
from src.simulator.rng import shot_seed, stream
from src.simulator.state import SimState, apply_measurement, init_state, retain_site, site_density
from src.simulator.transcript import export_transcript

from .config import ExperimentConfig, parse_vector
from .metrics import RunMetrics

logger = logging.getLogger(__name__)

ORACLE_QUBITS = 14


class WireReport(BaseModel):
    wire: int
    host_column: Optional[int] = None
    filtered: bool
    phase1_attempted: bool = True
    phase1_trials: int
    phase1_success: bool
    phase3_attempted: bool
    phase3_trials: int
    phase3_success: bool
    frame_x: int = 0
    frame_z: int = 0
    fidelity: Optional[float] = None
    raw_fidelity: Optional[float] = None
    min_factorization: Optional[float] = None


class ShotReport(BaseModel):
    """Everything one shot produced, except the simulator state"""

    shot: int
    seed: int
    success: bool
    fidelity: Optional[float] = None
    sites_used: int = 0
    outcomes: List[str] = Field(default_factory=list)
    wires: List[WireReport] = Field(default_factory=list)
    oracle_deviation: Optional[float] = None
    error: Optional[str] = None
    transcript: Optional[str] = Field(None, exclude=True)


@dataclass(frozen=True, eq=False)
class Experiment:
    config: ExperimentConfig
    resource: Union[CanonicalWire, WebResource]
    wire: CanonicalWire
    trials: int
    web_prep: Optional[WebPreparation] = None

    @property
    def r1(self) -> float:
        return self.wire.r1


def _template(config: ExperimentConfig, n: int) -> CanonicalWire:
    spec = config.resource
    left = parse_vector(spec.left) if spec.left is not None else None
    right = parse_vector(spec.right) if spec.right is not None else None
    if spec.family == "cluster":
        return make_cluster_wire(n, left=left, right=right)
    return make_theta_wire(float(spec.theta), n, left=left, right=right)  # type: ignore[arg-type]


def _circuit(config: ExperimentConfig) -> WebCircuit:
    ops = []
    for gate in config.protocol.circuit:
        if gate.op == "coupling":
            ops.append(CouplingGate(gate.wire))
        else:
            ops.append(LocalGate(gate.wire, gate.unitary()))
    return WebCircuit.build(config.resource.wires, ops)


@lru_cache(maxsize=8)
def _build(config_json: str) -> Experiment:
    config = ExperimentConfig.model_validate_json(config_json)
    protocol = config.protocol
    template = _template(config, 2)
    trials = protocol.trials or required_trials(protocol.epsilon, template.r1)
    localization = required_wire_length(template, None, trials, protocol.epsilon, protocol.margin)
    prep_bound = max_rotation_length(template, protocol.epsilon)

    if protocol.kind != "web":
        n = config.resource.n or localization + prep_bound
        wire = _template(config, n)
        logger.info(f"Built {wire.family} wire with N={n}, r1={wire.r1:.6f}, {trials} trials per phase")
        return Experiment(config=config, resource=wire, wire=wire, trials=trials)

    last_coupling = max((c.column for c in config.resource.couplings), default=0)
    n = config.resource.n or last_coupling + prep_bound + localization
    wire = _template(config, n)
    web = make_web([wire] * config.resource.wires, [(c.upper, c.column) for c in config.resource.couplings])
    prep = compile_web_prep(web, _circuit(config), protocol.epsilon)
    logger.info(f"Built {web.M}-wire web with N={n} and {len(web.couplings)} couplings")
    return Experiment(config=config, resource=web, wire=wire, trials=trials, web_prep=prep)


def build_experiment(config: ExperimentConfig) -> Experiment:
    """Resource, trial budget and web preparation; cached per process"""
    return _build(config.model_dump_json())


def shot_target(config: ExperimentConfig, seed: int) -> np.ndarray:
    target = config.protocol.target
    if target.kind == "fixed":
        return parse_vector(target.state)  # type: ignore[arg-type]
    return random_state(stream(seed, 0, 1))


def _wire_report(result: LocalizationResult, filtered: bool) -> WireReport:
    first, second = result.trials_per_phase
    prepared = result.failed_phase != 0
    phase1 = result.succeeded or result.failed_phase == 3
    x, z = result.frame.get(0)
    return WireReport(
        wire=result.wire,
        host_column=result.host_site.column if result.host_site is not None else None,
        filtered=filtered,
        phase1_attempted=prepared,
        phase1_trials=first,
        phase1_success=phase1,
        phase3_attempted=phase1,
        phase3_trials=second,
        phase3_success=result.succeeded,
        frame_x=x,
        frame_z=z,
        fidelity=result.fidelity,
        raw_fidelity=result.raw_fidelity,
        min_factorization=min(result.factorization) if result.factorization else None,
    )


def _oracle_deviation(state: SimState, results: List[LocalizationResult]) -> Optional[float]:
    network = state.network
    if network.M * network.N > ORACLE_QUBITS:
        logger.debug("Skipping oracle cross-check: resource too large")
        return None
    hosts = [r.host_site for r in results if r.host_site is not None]
    worst = 0.0
    try:
        for host in hosts:
            worst = max(worst, float(np.max(np.abs(site_density(state, host) - oracle_site_density(state, [host])))))
    except IllegalStepError as e:
        logger.warning(f"Oracle cross-check failed: {e}")
        return None
    return worst


def run_shot(config: ExperimentConfig, shot: int) -> ShotReport:
    """Run one seeded shot; protocol errors are reported, not raised"""
    experiment = build_experiment(config)
    protocol = config.protocol
    seed = shot_seed(config.seed, shot)
    filtered = experiment.r1 > TOL.atol and protocol.kind != "simple"
    try:
        state = init_state(experiment.resource, seed)
        if protocol.kind == "web":
            results = localize_web(state, experiment.web_prep, protocol.epsilon, trials=experiment.trials)
            success = all(r.succeeded for r in results)
            fidelity = (
                joint_output_fidelity(results, experiment.web_prep.target_state)  # type: ignore[union-attr]
                if success
                else None
            )
        else:
            prep = compile_prep(experiment.wire, shot_target(config, seed), protocol.epsilon)
            if protocol.kind == "simple":
                result = localize_simple(state, prep, epsilon=protocol.epsilon)
            else:
                result = localize_general(state, prep, protocol.epsilon, trials=experiment.trials)
            results = [result]
            success = result.succeeded
            fidelity = result.fidelity
    except QCSError as e:
        logger.error(f"Shot {shot} (seed {seed}) failed: {e}")
        return ShotReport(shot=shot, seed=seed, success=False, error=f"{type(e).__name__}: {e}")

    final = results[-1].state
    deviation = _oracle_deviation(final, results) if protocol.oracle else None
    return ShotReport(
        shot=shot,
        seed=seed,
        success=success,
        fidelity=fidelity,
        sites_used=sum(r.sites_used for r in results),
        outcomes=final.outcomes(),
        wires=[_wire_report(r, filtered) for r in results],
        oracle_deviation=deviation,
        transcript=export_transcript(final) if config.output.transcripts else None,
    )


def run_batch(config: ExperimentConfig, jobs: Optional[int] = None) -> List[ShotReport]:
    """All shots of a config, ordered by shot index"""
    n_jobs = jobs or config.jobs
    build_experiment(config)
    logger.info(f"Running {config.shots} shots of {config.name} on {n_jobs} worker(s)")
    reports = Parallel(n_jobs=n_jobs)(delayed(run_shot)(config, shot) for shot in range(config.shots))
    return sorted(reports, key=lambda r: r.shot)


def summarize(config: ExperimentConfig, reports: List[ShotReport]) -> Tuple[Dict[str, Any], SuccessReport]:
    """Statistics plus pass/fail checks against the expected formulas"""
    experiment = build_experiment(config)
    protocol = config.protocol
    stats = success_stats(reports, r1=experiment.r1, trials=experiment.trials)
    threshold = 1.0 - protocol.fidelity_tolerance
    fidelities = [r.fidelity for r in reports if r.success and r.fidelity is not None]
    errors = [r for r in reports if r.error]
    unprepared = [r for r in reports if any(not w.phase1_attempted for w in r.wires)]

    checks = {
        "no_errors": not errors,
        "success_fidelity": all(f >= threshold for f in fidelities),
        "frequencies_in_ci": stats.consistent,
        "trial_distribution": all(
            p.chi2_pvalue is None or p.chi2_pvalue > protocol.chi2_alpha for p in stats.phases
        ),
    }
    deviations = [r.oracle_deviation for r in reports if r.oracle_deviation is not None]
    if deviations:
        checks["oracle_agreement"] = max(deviations) <= 1e-9
    summary = {
        "name": config.name,
        "seed": config.seed,
        "shots": config.shots,
        "family": experiment.wire.family,
        "wire_length": experiment.wire.N,
        "r1": float(experiment.r1),
        "trials_per_phase": experiment.trials,
        "errors": len(errors),
        "prep_failures": len(unprepared),
        "min_success_fidelity": float(min(fidelities)) if fidelities else None,
        "statistics": stats.model_dump(),
        "checks": checks,
        "passed": all(checks.values()),
    }
    return summary, stats


def _shots_frame(reports: List[ShotReport]) -> pd.DataFrame:
    rows = []
    for report in reports:
        base = {"shot": report.shot, "seed": report.seed, "success": report.success, "fidelity": report.fidelity}
        if not report.wires:
            rows.append({**base, "wire": None, "error": report.error})
        for wire in report.wires:
            rows.append({**base, **wire.model_dump(), "error": report.error})
    return pd.DataFrame(rows)


def write_outputs(
    out_dir: Union[str, Path],
    reports: List[ShotReport],
    summary: Dict[str, Any],
    stats: SuccessReport,
) -> Path:
    """report.jsonl, shots.csv, summary.yaml and metrics.prom (plus transcripts when kept)"""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "report.jsonl", "w") as f:
        for report in reports:
            f.write(json.dumps(report.model_dump(), sort_keys=True) + "\n")
    _shots_frame(reports).to_csv(out / "shots.csv", index=False)
    with open(out / "summary.yaml", "w") as f:
        yaml.safe_dump(summary, f, sort_keys=True)

    metrics = RunMetrics()
    metrics.record_shots(reports)
    metrics.record_stats(stats)
    metrics.write(out / "metrics.prom")

    kept = [r for r in reports if r.transcript is not None]
    if kept:
        (out / "transcripts").mkdir(exist_ok=True)
        for report in kept:
            (out / "transcripts" / f"shot_{report.shot:06d}.jsonl").write_text(report.transcript)  # type: ignore[arg-type]
    logger.info(f"Wrote {len(reports)} shot reports to {out}")
    return out


def _random_resource(rng: np.random.Generator) -> Union[CanonicalWire, WebResource]:
    kind = int(rng.integers(3))
    theta = float(rng.uniform(0.05, math.pi / 4))
    if kind == 0:
        return make_cluster_wire(int(rng.integers(4, 11)), left=random_state(rng))
    if kind == 1:
        return make_theta_wire(theta, int(rng.integers(4, 11)), left=random_state(rng))
    n = int(rng.integers(4, 7))
    wires = [make_theta_wire(theta, n, left=random_state(rng)) for _ in range(2)]
    return make_web(wires, [(0, int(rng.integers(1, n + 1)))])


def random_transcript_check(seed: int, index: int, max_steps: int = 12) -> float:
    """
    Worst simulator/oracle disagreement along one random transcript.

    Steps mix cursor measurements in random bases, retained sites, filters
    and measurements of retained sites; after each step every reachable site
    is checked.
    """
    rng = stream(seed, index)
    resource = _random_resource(rng)
    state = init_state(resource, seed=int(rng.integers(2**32)))
    worst = oracle_check(state)
    for _ in range(max_steps):
        wire = int(rng.integers(state.network.M))
        action = int(rng.integers(4))
        if action >= 2 and not state.retained:
            action = 0
        try:
            if action == 0:
                op = MeasurementOp.projective(random_unitary(rng), name="random-basis")
                state, _ = apply_measurement(state, op, state.cursor_site(wire))
            elif action == 1:
                state = retain_site(state, wire)
            else:
                site = state.retained[int(rng.integers(len(state.retained)))]
                if action == 2:
                    canonical = state.network.canonical_wire(site.wire)
                    op = build_filter(canonical.r1).measurement(canonical.m_basis)
                else:
                    op = MeasurementOp.projective(random_unitary(rng), name="random-basis")
                state, _ = apply_measurement(state, op, site, release=action == 3)
        except IllegalStepError as e:
            logger.debug(f"Transcript {index}: skipped illegal step ({e})")
            continue
        worst = max(worst, oracle_check(state))
    return worst


def oracle_sweep(seed: int, transcripts: int, jobs: int = 1) -> pd.DataFrame:
    """Run ``transcripts`` random transcripts and report each worst TV distance"""
    values = Parallel(n_jobs=jobs)(
        delayed(random_transcript_check)(seed, i) for i in range(transcripts)
    )
    frame = pd.DataFrame({"transcript": range(transcripts), "max_tv": values})
    logger.info(f"Oracle sweep over {transcripts} transcripts: max TV {frame['max_tv'].max():.3e}")
    return frame
