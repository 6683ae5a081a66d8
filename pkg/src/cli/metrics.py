"""
Per-run Prometheus metrics, written to a text file at the end of a run
"""

import logging
from pathlib import Path
from typing import Iterable, Union

from prometheus_client import (
    CollectorRegistry,
    Counter,
    Gauge,
    Histogram,
    disable_created_metrics,
    write_to_textfile,
)

logger = logging.getLogger(__name__)

# created-timestamp series would make the file differ between identical runs
disable_created_metrics()

TRIAL_BUCKETS = (1, 2, 3, 4, 5, 8, 10, 15, 20, 30, 50)


class RunMetrics:
    """Counters and histograms of one batch, in a registry of its own"""

    def __init__(self) -> None:
        self.registry = CollectorRegistry()
        self.shots = Counter(
            "qcs_shots", "Shots by outcome", ["outcome"], registry=self.registry
        )
        self.filters = Counter(
            "qcs_filter_applications", "Filter applications by result", ["phase", "result"],
            registry=self.registry,
        )
        self.sites = Counter(
            "qcs_sites_consumed", "Physical sites passed by the protocol", registry=self.registry
        )
        self.trials = Histogram(
            "qcs_trials_per_phase", "Trials used per filtered phase", ["phase"],
            buckets=TRIAL_BUCKETS, registry=self.registry,
        )
        self.success_rate = Gauge(
            "qcs_phase_success_rate", "Empirical success frequency per phase", ["phase"],
            registry=self.registry,
        )

    def record_shots(self, reports: Iterable) -> None:
        for report in reports:
            outcome = "error" if report.error else ("success" if report.success else "failure")
            self.shots.labels(outcome=outcome).inc()
            self.sites.inc(report.sites_used)
            for wire in report.wires:
                for phase in ("phase1", "phase3"):
                    if not getattr(wire, f"{phase}_attempted"):
                        continue
                    trials = getattr(wire, f"{phase}_trials")
                    passed = getattr(wire, f"{phase}_success")
                    self.trials.labels(phase=phase).observe(trials)
                    if not wire.filtered:
                        continue
                    self.filters.labels(phase=phase, result="pass").inc(1 if passed else 0)
                    self.filters.labels(phase=phase, result="fail").inc(trials - (1 if passed else 0))

    def record_stats(self, stats) -> None:
        for phase in list(stats.phases) + [stats.joint]:
            if phase.attempts:
                self.success_rate.labels(phase=phase.name).set(phase.p_hat)

    def write(self, path: Union[str, Path]) -> None:
        write_to_textfile(str(path), self.registry)
        logger.debug(f"Wrote metrics to {path}")
