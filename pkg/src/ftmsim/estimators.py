"""RSSI ranging baseline and summary statistics for ranging runs.

Standard deviations are population (ddof=0) statistics; the 90th percentile
of absolute error uses the nearest-rank rule.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass

from .errors import DegenerateComparison, EmptySample, InvalidExponent


@dataclass(frozen=True)
class RangingStats:
    n_samples: int
    mean_est_m: float
    std_est_m: float
    mean_abs_error_m: float
    p90_abs_error_m: float
    true_distance_m: float

    @property
    def mean_error_m(self) -> float:
        """Signed error of the mean estimate."""
        return self.mean_est_m - self.true_distance_m


@dataclass(frozen=True)
class Comparison:
    std_ratio: float
    mae_ratio: float


def rssi_distance_m(rssi_dbm: float, A_dbm: float, n: float) -> float:
    """Invert the log-distance model ``rssi = -10 n log10(d) + A``."""
    if not n > 0:
        raise InvalidExponent(f"path loss exponent must be > 0, got {n}")
    return 10.0 ** ((A_dbm - rssi_dbm) / (10.0 * n))


def nearest_rank(sorted_values, pct: float):
    rank = max(1, math.ceil(pct / 100.0 * len(sorted_values)))
    return sorted_values[rank - 1]


def summarize(estimates, true_distance_m: float) -> RangingStats:
    values = [float(x) for x in estimates]
    if not values:
        raise EmptySample("cannot summarize an empty sample")
    # sorting first makes the float sums independent of input order
    values.sort()
    errors = sorted(abs(x - true_distance_m) for x in values)
    return RangingStats(
        n_samples=len(values),
        mean_est_m=statistics.fmean(values),
        std_est_m=statistics.pstdev(values),
        mean_abs_error_m=statistics.fmean(errors),
        p90_abs_error_m=nearest_rank(errors, 90),
        true_distance_m=true_distance_m,
    )


def compare(a: RangingStats, b: RangingStats) -> Comparison:
    if b.std_est_m == 0 or b.mean_abs_error_m == 0:
        raise DegenerateComparison("reference statistics have zero spread or zero error")
    return Comparison(a.std_est_m / b.std_est_m, a.mean_abs_error_m / b.mean_abs_error_m)
