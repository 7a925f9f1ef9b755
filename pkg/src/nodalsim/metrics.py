"""Per-trial counters, CSV persistence, and baseline-vs-protocol comparison."""
from __future__ import annotations

import math
from dataclasses import dataclass, fields
from pathlib import Path as FsPath
from typing import Optional

CSV_COLUMNS = ("trial_index", "mode", "messages_attempted", "delivered_clean",
               "corrupt_detected", "corrupt_undetected", "lost",
               "packet_loss_copies", "retransmissions", "availability",
               "mean_connectivity", "tapped_copies", "degradations")

_FRACTION_FIELDS = {"availability", "mean_connectivity"}


class MetricsError(Exception):
    pass


def quantize(x: float) -> float:
    """Fractions are stored at the 6-decimal precision the CSV format carries."""
    return round(x, 6)


@dataclass
class TrialMetrics:
    trial_index: int
    mode: str
    messages_attempted: int
    delivered_clean: int
    corrupt_detected: int
    corrupt_undetected: int
    lost: int
    packet_loss_copies: int
    retransmissions: int
    availability: float
    mean_connectivity: float
    tapped_copies: int
    degradations: int

    def validate(self):
        counts = (self.delivered_clean, self.corrupt_detected,
                  self.corrupt_undetected, self.lost, self.packet_loss_copies,
                  self.retransmissions, self.tapped_copies, self.degradations)
        if any(c < 0 for c in counts):
            raise MetricsError("negative counter")
        total = (self.delivered_clean + self.corrupt_detected
                 + self.corrupt_undetected + self.lost)
        if total != self.messages_attempted:
            raise MetricsError(
                f"classification sum {total} != attempted {self.messages_attempted}")
        expected = quantize(
            (self.messages_attempted - self.lost) / self.messages_attempted)
        if self.availability != expected:
            raise MetricsError(
                f"availability {self.availability} != {expected}")
        for frac in (self.availability, self.mean_connectivity):
            if not 0.0 <= frac <= 1.0:
                raise MetricsError(f"fraction {frac} out of range")

    def delivery_fields(self) -> dict[str, float]:
        """Protocol-visible metrics: everything except the exposure counter."""
        d = as_row(self)
        d.pop("tapped_copies")
        return d


def as_row(m: TrialMetrics) -> dict:
    return {f.name: getattr(m, f.name) for f in fields(TrialMetrics)}


def _format_value(name: str, value) -> str:
    if name in _FRACTION_FIELDS:
        return f"{value:.6f}"
    return str(value)


def render_csv(rows: list[TrialMetrics]) -> str:
    if not rows:
        raise MetricsError("no rows to write")
    lines = [",".join(CSV_COLUMNS)]
    for m in rows:
        m.validate()
        d = as_row(m)
        lines.append(",".join(_format_value(c, d[c]) for c in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def write_csv(rows: list[TrialMetrics], destination) -> None:
    FsPath(destination).write_text(render_csv(rows))


def parse_csv(text: str) -> list[TrialMetrics]:
    lines = text.strip().splitlines()
    if not lines or tuple(lines[0].split(",")) != CSV_COLUMNS:
        raise MetricsError("unexpected CSV header")
    rows = []
    for line in lines[1:]:
        parts = line.split(",")
        kwargs = {}
        for name, raw in zip(CSV_COLUMNS, parts):
            if name == "mode":
                kwargs[name] = raw
            elif name in _FRACTION_FIELDS:
                kwargs[name] = float(raw)
            else:
                kwargs[name] = int(raw)
        rows.append(TrialMetrics(**kwargs))
    return rows


def read_csv(source) -> list[TrialMetrics]:
    return parse_csv(FsPath(source).read_text())


# metrics where a smaller mean is the improvement
LOWER_BETTER = frozenset({"corrupt_undetected", "corrupt_detected", "lost",
                          "packet_loss_copies", "retransmissions",
                          "degradations", "tapped_copies"})
HIGHER_BETTER = frozenset({"delivered_clean", "availability",
                           "mean_connectivity"})
COMPARED_METRICS = ("delivered_clean", "corrupt_detected", "corrupt_undetected",
                    "lost", "packet_loss_copies", "retransmissions",
                    "availability", "mean_connectivity", "tapped_copies",
                    "degradations")


@dataclass
class MetricComparison:
    metric: str
    baseline_mean: float
    protocol_mean: float
    delta: float
    percent_change: Optional[float]  # positive = improvement; None if undefined
    inverted: bool = False  # improvement direction opposite to expectation


@dataclass
class ComparisonReport:
    baseline_n: int
    protocol_n: int
    metrics: dict[str, MetricComparison]


def _mean(values) -> float:
    return sum(values) / len(values)


def compare(baseline: list[TrialMetrics],
            protocol: list[TrialMetrics]) -> ComparisonReport:
    """Per-metric mean comparison; percent change is sign-normalized so that
    an improvement reads as a positive percentage of the baseline mean."""
    if not baseline or not protocol:
        raise MetricsError("comparison needs non-empty trial lists")
    out = {}
    for name in COMPARED_METRICS:
        b = _mean([getattr(m, name) for m in baseline])
        p = _mean([getattr(m, name) for m in protocol])
        delta = p - b
        if b == 0:
            pct = None
        elif name in LOWER_BETTER:
            pct = -delta / b * 100.0
        else:
            pct = delta / b * 100.0
        inverted = pct is not None and pct < 0
        out[name] = MetricComparison(name, b, p, delta, pct, inverted)
    return ComparisonReport(len(baseline), len(protocol), out)


def render_report(report: ComparisonReport) -> str:
    lines = [f"trials: baseline N={report.baseline_n} protocol N={report.protocol_n}"]
    for name in COMPARED_METRICS:
        mc = report.metrics[name]
        pct = "undefined" if mc.percent_change is None else f"{mc.percent_change:.1f}%"
        lines.append(f"{name}: baseline={mc.baseline_mean:.6f} "
                     f"protocol={mc.protocol_mean:.6f} "
                     f"delta={mc.delta:.6f} change={pct}")
        if mc.inverted:
            lines.append(f"WARNING: {name} moved against the expected direction")
    return "\n".join(lines) + "\n"


@dataclass
class BoxStats:
    min: float
    q1: float
    median: float
    q3: float
    max: float
    mean: float
    stddev: float


def _quantile(sorted_vals: list[float], q: float) -> float:
    """Linear interpolation between order statistics (zero-indexed q*(n-1))."""
    pos = q * (len(sorted_vals) - 1)
    lo = math.floor(pos)
    hi = math.ceil(pos)
    if lo == hi:
        return float(sorted_vals[lo])
    frac = pos - lo
    return sorted_vals[lo] * (1 - frac) + sorted_vals[hi] * frac


def box_stats(values: list[float]) -> BoxStats:
    if not values:
        raise MetricsError("box_stats needs a non-empty list")
    s = sorted(float(v) for v in values)
    n = len(s)
    mean = sum(s) / n
    if n > 1:
        stddev = math.sqrt(sum((v - mean) ** 2 for v in s) / (n - 1))
    else:
        stddev = 0.0
    return BoxStats(s[0], _quantile(s, 0.25), _quantile(s, 0.5),
                    _quantile(s, 0.75), s[-1], mean, stddev)
