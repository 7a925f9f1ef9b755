"""Paired experiment driver: N baseline + N protocol trials, CSVs, report."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .config import BASELINE, PROTOCOL, SimConfig
from .metrics import (
    ComparisonReport,
    TrialMetrics,
    compare,
    render_csv,
    render_report,
)
from .trial import TrialDiagnostics, run_trial_with_diagnostics


class ExperimentError(Exception):
    pass


@dataclass
class ExperimentDiagnostics:
    dual_transmissions: int = 0
    corrupted_messages: int = 0
    corrupted_dual: int = 0
    degradations: int = 0

    @property
    def dual_coverage(self) -> float | None:
        """Fraction of corrupted-in-flight messages that carried two copies."""
        if self.corrupted_messages == 0:
            return None
        return self.corrupted_dual / self.corrupted_messages


@dataclass
class ExperimentResult:
    config: SimConfig
    baseline: list[TrialMetrics]
    protocol: list[TrialMetrics]
    report: ComparisonReport
    report_text: str
    diagnostics: ExperimentDiagnostics
    baseline_csv: str = ""
    protocol_csv: str = ""


def run_experiment(cfg: SimConfig, out_dir: str | Path | None = None,
                   ) -> ExperimentResult:
    """Run all trials in both modes against identical per-trial attack
    schedules, then render CSVs and the comparison report.

    Writes baseline.csv, protocol.csv, and report.txt into out_dir when given.
    """
    cfg.validate()
    baseline_rows: list[TrialMetrics] = []
    protocol_rows: list[TrialMetrics] = []
    diag = ExperimentDiagnostics()
    for trial_index in range(cfg.trials):
        b_metrics, b_diag = run_trial_with_diagnostics(cfg, BASELINE,
                                                       trial_index)
        p_metrics, p_diag = run_trial_with_diagnostics(cfg, PROTOCOL,
                                                       trial_index)
        if b_diag.schedule_digest != p_diag.schedule_digest:
            raise ExperimentError(
                f"trial {trial_index}: modes saw different attack schedules")
        if p_diag.disjoint_violations or b_diag.disjoint_violations:
            raise ExperimentError(
                f"trial {trial_index}: protected routes shared an edge")
        baseline_rows.append(b_metrics)
        protocol_rows.append(p_metrics)
        diag.dual_transmissions += p_diag.dual_transmissions
        diag.corrupted_messages += p_diag.corrupted_messages
        diag.corrupted_dual += p_diag.corrupted_dual
        diag.degradations += p_metrics.degradations

    report = compare(baseline_rows, protocol_rows)
    result = ExperimentResult(
        config=cfg,
        baseline=baseline_rows,
        protocol=protocol_rows,
        report=report,
        report_text=render_report(report),
        diagnostics=diag,
        baseline_csv=render_csv(baseline_rows),
        protocol_csv=render_csv(protocol_rows),
    )
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "baseline.csv").write_text(result.baseline_csv)
        (out / "protocol.csv").write_text(result.protocol_csv)
        (out / "report.txt").write_text(result.report_text)
    return result


def sweep_duplication_budget(cfg: SimConfig, target: float = 0.90,
                             tolerance: float = 0.02,
                             ) -> tuple[int, float, ExperimentResult]:
    """Find the smallest budget whose dual coverage of corrupted traffic hits
    target +/- tolerance; returns (budget, coverage, result at that budget).

    Coverage is monotone in the budget, so a bisection over [0, messages]
    suffices.
    """
    from dataclasses import replace

    lo, hi = 0, cfg.messages_per_trial
    best = None
    while lo <= hi:
        mid = (lo + hi) // 2
        trial_cfg = replace(cfg, duplication_budget=mid)
        result = run_experiment(trial_cfg)
        coverage = result.diagnostics.dual_coverage or 0.0
        if abs(coverage - target) <= tolerance:
            best = (mid, coverage, result)
            hi = mid - 1  # prefer the smallest budget inside the band
        elif coverage < target:
            lo = mid + 1
        else:
            hi = mid - 1
    if best is None:
        raise ExperimentError(
            f"no budget reaches dual coverage {target} +/- {tolerance}")
    return best
