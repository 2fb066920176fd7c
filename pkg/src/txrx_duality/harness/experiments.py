"""
Monte Carlo experiments over seeded channel draws.

Trial ``t`` of an experiment uses seed ``seed0 + t`` for both the channel
draw and the solver's random start (on separate generator streams). The
same seeds are reused at every sweep value, so curves compare identical
channel sets.
"""

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from ..errors import ConfigError
from ..model import SystemConfig, db_to_linear, draw_channels, linear_to_db, validate_config
from ..solver import SolveOptions, Status, solve
from .link import verify_link

log = logging.getLogger(__name__)

KINDS = ('single', 'sweep_gamma', 'sweep_weight', 'verify_link')


def paper_config(K=4, gamma_db=10.0, edge_weight=5.0, M=8, N=2, L=2, **kw):
    """The base-station setup of the reference study: 8 antennas, 2x2 users, user 1 weighted."""
    w = [edge_weight] * L + [1.0] * (L * (K - 1))
    return SystemConfig(M=M, K=K, N=N, L=L, gamma=db_to_linear(gamma_db), w=w, **kw)


def edge_weights(config, weight):
    """Weight vector ``[w, .., w, 1, .., 1]``: user 1's substreams get ``weight``."""
    w = np.ones(config.KL)
    w[:config.L] = weight
    return w


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str
    config: SystemConfig
    values: tuple = ()
    trials: int = 100
    seed0: int = 0
    backoff: float = 0.5
    max_retries: int = 0
    options: SolveOptions = None
    n_sym: int = 100_000
    mean_db: bool = False
    name: str = ''

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError("sweep values must be finite")
        if not 0 < self.backoff < 1:
            raise ValueError("backoff must lie in (0, 1)")
        if self.kind.startswith('sweep') and not self.values:
            raise ValueError(f"{self.kind} needs at least one sweep value")
        object.__setattr__(self, 'values', tuple(float(v) for v in self.values))
        if self.options is None:
            object.__setattr__(self, 'options', SolveOptions.from_config(self.config))
        if not self.name:
            object.__setattr__(self, 'name', self.kind)

    @property
    def seeds(self):
        return list(range(self.seed0, self.seed0 + self.trials))


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    seed: int
    sweep_value: float
    status: str
    total_power_db: float
    user_powers_db: tuple
    weighted_objective: float
    dual_objective: float
    duality_gap: float
    iterations: int
    empirical_sinr_db: tuple = ()

    @property
    def feasible(self):
        return self.status in (Status.CONVERGED.value, Status.MAX_ITERS.value) \
            and math.isfinite(self.total_power_db)


def _row(spec, seed, value, report, config, empirical=()):
    nan = float('nan')
    if report.feasible:
        p = report.state.p
        user = [p[k * config.L:(k + 1) * config.L].sum() for k in range(config.K)]
        audit = report.audit
        total_db = float(linear_to_db(p.sum()))
        user_db = tuple(float(linear_to_db(u)) for u in user)
        obj, dual, gap = audit.primal_objective, audit.dual_objective, audit.gap
    else:
        total_db, user_db, obj, dual, gap = nan, (), nan, nan, nan
    return ResultRow(experiment=spec.name, seed=seed, sweep_value=value,
                     status=str(report.status), total_power_db=total_db,
                     user_powers_db=user_db, weighted_objective=obj, dual_objective=dual,
                     duality_gap=gap, iterations=report.iterations,
                     empirical_sinr_db=tuple(float(x) for x in empirical))


def _run_points(spec, configs):
    rows = []
    for value, config in configs:
        for seed in spec.seeds:
            channels = draw_channels(config, seed)
            report = solve(config, channels, spec.options, seed=seed)
            rows.append(_row(spec, seed, value, report, config))
    return rows


def run_sweep_gamma(spec):
    """Total power versus a common SINR target; ``spec.values`` in dB."""
    configs = [(g, replace(spec.config, gamma=np.full((spec.config.K, spec.config.L),
                                                       float(db_to_linear(g)))))
               for g in spec.values]
    return _run_points(spec, configs)


def run_sweep_weight(spec):
    """User-1 and total power versus user 1's weight (others held at 1)."""
    configs = [(wv, replace(spec.config, w=edge_weights(spec.config, wv))) for wv in spec.values]
    return _run_points(spec, configs)


def run_single(spec):
    """
    One solve per seed, relaxing infeasible targets.

    An infeasible run is retried up to ``max_retries`` times with every
    target multiplied by ``backoff``. ``sweep_value`` records the total
    target change in dB (0 when the original targets were met).
    """
    rows = []
    for seed in spec.seeds:
        channels = draw_channels(spec.config, seed)
        config = spec.config
        for attempt in range(spec.max_retries + 1):
            report = solve(config, channels, spec.options, seed=seed)
            if report.status is not Status.INFEASIBLE or attempt == spec.max_retries:
                break
            config = replace(config, gamma=config.gamma * spec.backoff)
            log.info("seed %d infeasible, relaxing targets (attempt %d)", seed, attempt + 1)
        offset = float(linear_to_db(spec.backoff)) * attempt
        rows.append(_row(spec, seed, offset, report, config))
    return rows


def run_verify_link(spec):
    """Solve each seed and measure empirical SINRs with QPSK symbols."""
    rows = []
    for seed in spec.seeds:
        channels = draw_channels(spec.config, seed)
        report = solve(spec.config, channels, spec.options, seed=seed)
        empirical = ()
        if report.converged:
            res = verify_link(report, channels, spec.config, n_sym=spec.n_sym, seed=seed)
            empirical = res.sinr_db.ravel()
        rows.append(_row(spec, seed, 0.0, report, spec.config, empirical))
    return rows


def run_experiment(spec):
    runner = {'single': run_single, 'sweep_gamma': run_sweep_gamma,
              'sweep_weight': run_sweep_weight, 'verify_link': run_verify_link}[spec.kind]
    bad = validate_config(spec.config)
    if bad:
        raise ConfigError(bad)
    return runner(spec)


@dataclass(frozen=True)
class SweepSummary:
    value: float
    trials: int
    feasible: int
    infeasible: int
    failed: int
    mean_total_power_db: float
    mean_user1_power_db: float

    @property
    def infeasible_fraction(self):
        return self.infeasible / self.trials


def _mean_db(values_db, mean_db):
    values_db = np.asarray(values_db, dtype=float)
    if values_db.size == 0:
        return float('nan')
    if mean_db:
        return float(values_db.mean())
    return float(linear_to_db(np.mean(db_to_linear(values_db))))


def summarize(rows, mean_db=False):
    """
    Aggregate rows per sweep value.

    Power means cover feasible trials only. By default linear powers are
    averaged and then converted to dB; ``mean_db`` averages the dB values
    instead.
    """
    out = []
    for value in sorted({r.sweep_value for r in rows}):
        group = [r for r in rows if r.sweep_value == value]
        ok = [r for r in group if r.feasible]
        infeasible = sum(r.status == Status.INFEASIBLE.value for r in group)
        out.append(SweepSummary(
            value=value, trials=len(group), feasible=len(ok), infeasible=infeasible,
            failed=len(group) - len(ok) - infeasible,
            mean_total_power_db=_mean_db([r.total_power_db for r in ok], mean_db),
            mean_user1_power_db=_mean_db([r.user_powers_db[0] for r in ok], mean_db)))
    return out
