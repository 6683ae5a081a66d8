"""
Success statistics of localization shot batches

Per filtered phase: empirical success frequency with an exact binomial
confidence interval, the expected 1 - r1^l, and a chi-square test of the
trial-count histogram against the geometric law truncated at l.
"""

import logging
from typing import Any, Dict, List, Mapping, Optional, Sequence

import numpy as np
from pydantic import BaseModel
from scipy.stats import binomtest, chisquare

logger = logging.getLogger(__name__)

MIN_SHOTS = 100
MIN_EXPECTED = 5.0
PHASES = ("phase1", "phase3")


class PhaseStats(BaseModel):
    """Success frequency of one phase (or of whole shots)"""

    name: str
    attempts: int
    successes: int
    p_hat: float
    ci_low: float
    ci_high: float
    expected: Optional[float] = None
    consistent: Optional[bool] = None
    chi2: Optional[float] = None
    chi2_pvalue: Optional[float] = None
    chi2_bins: int = 0


class SuccessReport(BaseModel):
    shots: int
    r1: Optional[float] = None
    trials: Optional[int] = None
    confidence: float
    phases: List[PhaseStats]
    joint: PhaseStats

    @property
    def consistent(self) -> bool:
        checks = [p.consistent for p in self.phases + [self.joint] if p.consistent is not None]
        return all(checks)


def truncated_geometric(r1: float, trials: int) -> np.ndarray:
    """P(k successes on trial k | success within ``trials``), k = 1..trials"""
    k = np.arange(1, trials + 1)
    weights = (1.0 - r1) * r1 ** (k - 1)
    return weights / weights.sum()


def _merge_small_bins(observed: np.ndarray, expected: np.ndarray):
    obs, exp = list(observed), list(expected)
    while len(exp) > 1 and exp[-1] < MIN_EXPECTED:
        exp[-2] += exp.pop()
        obs[-2] += obs.pop()
    while len(exp) > 1 and exp[0] < MIN_EXPECTED:
        exp[1] += exp.pop(0)
        obs[1] += obs.pop(0)
    return np.array(obs, dtype=float), np.array(exp, dtype=float)


def _phase_stats(
    name: str,
    successes: int,
    attempts: int,
    confidence: float,
    expected: Optional[float],
    trial_counts: Optional[Sequence[int]] = None,
    r1: Optional[float] = None,
    trials: Optional[int] = None,
) -> PhaseStats:
    if attempts == 0:
        return PhaseStats(
            name=name, attempts=0, successes=0, p_hat=float("nan"), ci_low=0.0, ci_high=1.0, expected=expected
        )
    interval = binomtest(successes, attempts).proportion_ci(confidence_level=confidence, method="exact")
    stats = PhaseStats(
        name=name,
        attempts=attempts,
        successes=successes,
        p_hat=successes / attempts,
        ci_low=float(interval.low),
        ci_high=float(interval.high),
        expected=expected,
    )
    if expected is not None:
        stats.consistent = bool(stats.ci_low - 1e-12 <= expected <= stats.ci_high + 1e-12)

    if trial_counts and r1 is not None and trials is not None and trials > 1 and r1 > 0:
        histogram = np.bincount(np.asarray(trial_counts), minlength=trials + 1)[1 : trials + 1]
        observed, exp = _merge_small_bins(histogram, truncated_geometric(r1, trials) * len(trial_counts))
        stats.chi2_bins = len(observed)
        if len(observed) >= 2:
            result = chisquare(observed, exp)
            stats.chi2, stats.chi2_pvalue = float(result.statistic), float(result.pvalue)
    return stats


def _wire_records(shot: Mapping[str, Any]) -> List[Mapping[str, Any]]:
    return list(shot.get("wires") or [])


def success_stats(
    shots: Sequence[Any],
    r1: Optional[float] = None,
    trials: Optional[int] = None,
    confidence: float = 0.99,
) -> SuccessReport:
    """
    Aggregate per-shot localization records.

    Args:
        shots: Shot reports (pydantic models or dicts) with a ``success`` flag
            and a ``wires`` list of per-wire phase records
        r1: Wire overlap parameter, for the expected frequencies
        trials: Trial budget l per phase
        confidence: Confidence level of the binomial intervals

    Returns:
        SuccessReport with one entry per phase plus the whole-shot frequency

    Raises:
        ValueError: If no shots are given
    """
    records: List[Dict[str, Any]] = [s.model_dump() if hasattr(s, "model_dump") else dict(s) for s in shots]
    if not records:
        raise ValueError("success statistics need at least one shot")
    if len(records) < MIN_SHOTS:
        logger.warning(f"Only {len(records)} shots: intervals will be wide")

    per_phase = None
    if r1 is not None and trials is not None:
        per_phase = 1.0 if r1 <= 0.0 else 1.0 - r1**trials

    phases = []
    n_wires = max(1, max(len(_wire_records(s)) for s in records))
    for phase in PHASES:
        attempted = [w for s in records for w in _wire_records(s) if w.get(f"{phase}_attempted", True)]
        successes = [w for w in attempted if w.get(f"{phase}_success")]
        phases.append(
            _phase_stats(
                phase,
                len(successes),
                len(attempted),
                confidence,
                per_phase,
                [int(w[f"{phase}_trials"]) for w in successes],
                r1,
                trials,
            )
        )

    joint_expected = per_phase ** (len(PHASES) * n_wires) if per_phase is not None else None
    # shots whose preparation ran out of attempts never reached a filter
    prepared = [
        s for s in records if all(w.get("phase1_attempted", True) for w in _wire_records(s))
    ]
    joint = _phase_stats(
        "joint", sum(bool(s.get("success")) for s in prepared), len(prepared), confidence, joint_expected
    )
    report = SuccessReport(
        shots=len(records), r1=r1, trials=trials, confidence=confidence, phases=phases, joint=joint
    )
    logger.info(
        f"Success statistics over {len(records)} shots: "
        + ", ".join(f"{p.name} {p.p_hat:.4f} [{p.ci_low:.4f}, {p.ci_high:.4f}]" for p in phases + [joint])
    )
    return report
