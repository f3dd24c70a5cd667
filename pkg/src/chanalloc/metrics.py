"""Evaluation metrics for a (scenario, assignment) pair and box-plot summaries.

Per-record quantities: total and minimum capacity/utility, the product
fairness measures, outage-event count (tenants left below their minimum
rate) and overcapacity (rate above the saturation point, wasted under the
utility).  Aggregation produces the box-plot statistics: median, quartiles
by linear interpolation, whiskers at 1.5 IQR clamped to data points, and
the outliers beyond them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from . import radio
from .assignment import Assignment
from .scenario import Scenario
from .valuation import tenant_utility

METRIC_FIELDS = (
    "tc_mbps",
    "tu",
    "f_c",
    "f_u",
    "mc_mbps",
    "mu",
    "n_outage",
    "overcapacity_mbps",
    "wall_time_s",
)

CSV_HEADER = (
    "scenario_seed,case,context,algorithm,"
    "tc_mbps,tu,f_c,f_u,mc_mbps,mu,n_outage,overcapacity_mbps,wall_time_s"
)

# Product fairness over capacities spans orders of magnitude; reports divide
# it by 1e6.  Records always store the raw product.
F_C_REPORT_SCALE = 1e6


@dataclass
class MetricRecord:
    scenario_seed: int
    case: str
    context: str
    algorithm: str
    tc_mbps: float
    tu: float
    f_c: float
    f_u: float
    mc_mbps: float
    mu: float
    n_outage: float
    overcapacity_mbps: float
    wall_time_s: float

    def csv_row(self) -> str:
        return ",".join(
            [
                str(self.scenario_seed),
                self.case,
                self.context,
                self.algorithm,
            ]
            + [repr(float(getattr(self, f))) for f in METRIC_FIELDS]
        )

    @staticmethod
    def from_csv_row(row: str) -> "MetricRecord":
        cells = row.split(",")
        return MetricRecord(
            scenario_seed=int(cells[0]),
            case=cells[1],
            context=cells[2],
            algorithm=cells[3],
            **{f: float(v) for f, v in zip(METRIC_FIELDS, cells[4:])},
        )


def evaluate(
    scenario: Scenario,
    assignment: Assignment,
    algorithm: str = "",
    context: str = "",
    wall_time_s: float = 0.0,
) -> MetricRecord:
    """All evaluation quantities of one allocation, context-independent.

    Both the capacity-side and utility-side measures are always computed;
    the context label only records which context drove the allocator.
    """
    assignment.validate()
    n_t = scenario.n_tenants
    caps = [radio.rho(k, assignment.channels_of(k), scenario) for k in range(n_t)]
    utils = [tenant_utility(scenario, k, caps[k]) for k in range(n_t)]
    tc = float(sum(caps))
    tu = float(sum(utils))
    f_c = float(math.prod(caps))
    f_u = float(math.prod(utils))
    mc = float(min(caps))
    mu = float(min(utils))
    n_outage = sum(1 for k in range(n_t) if caps[k] < scenario.tenants[k].c_min_mbps)
    overcap = float(
        sum(max(0.0, caps[k] - scenario.tenants[k].c_max_mbps) for k in range(n_t))
    )
    assert 0.0 <= tu <= n_t + 1e-9 and 0.0 <= f_u <= 1.0 + 1e-9
    return MetricRecord(
        scenario_seed=scenario.seed,
        case=scenario.case_label,
        context=context,
        algorithm=algorithm,
        tc_mbps=tc,
        tu=tu,
        f_c=f_c,
        f_u=f_u,
        mc_mbps=mc,
        mu=mu,
        n_outage=float(n_outage),
        overcapacity_mbps=overcap,
        wall_time_s=wall_time_s,
    )


def average_records(records: list[MetricRecord]) -> MetricRecord:
    """Field-wise mean of repeated runs of one stochastic algorithm."""
    if not records:
        raise ValueError("cannot average an empty record list")
    first = records[0]
    means = {
        f: float(np.mean([getattr(r, f) for r in records])) for f in METRIC_FIELDS
    }
    return MetricRecord(
        scenario_seed=first.scenario_seed,
        case=first.case,
        context=first.context,
        algorithm=first.algorithm,
        **means,
    )


def summarize(values: list[float] | np.ndarray) -> dict:
    """Box-plot statistics of one metric over one record group."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("cannot summarize an empty group")
    q1, med, q3 = np.percentile(v, [25.0, 50.0, 75.0])
    iqr = q3 - q1
    lo_lim = q1 - 1.5 * iqr
    hi_lim = q3 + 1.5 * iqr
    whisker_lo = float(v[v >= lo_lim].min())
    whisker_hi = float(v[v <= hi_lim].max())
    outliers = sorted(float(x) for x in v[(v < lo_lim) | (v > hi_lim)])
    return {
        "mean": float(v.mean()),
        "median": float(med),
        "q1": float(q1),
        "q3": float(q3),
        "whisker_lo": whisker_lo,
        "whisker_hi": whisker_hi,
        "outliers": outliers,
        "n": int(v.size),
    }


def aggregate(records: list[MetricRecord]) -> dict[tuple[str, str, str], dict[str, dict]]:
    """Per-(case, context, algorithm) summaries of every metric field.

    The capacity fairness product is scaled down by 1e6 here, at the
    reporting boundary; stored records remain raw.
    """
    groups: dict[tuple[str, str, str], list[MetricRecord]] = {}
    for r in records:
        groups.setdefault((r.case, r.context, r.algorithm), []).append(r)
    out: dict[tuple[str, str, str], dict[str, dict]] = {}
    for key, recs in groups.items():
        per_metric = {}
        for f in METRIC_FIELDS:
            vals = np.array([getattr(r, f) for r in recs], dtype=float)
            if f == "f_c":
                vals = vals / F_C_REPORT_SCALE
            per_metric[f] = summarize(vals)
        out[key] = per_metric
    return out
