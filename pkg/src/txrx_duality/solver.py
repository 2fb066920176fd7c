"""
Alternating transmit/receive beamformer optimization.

One iteration performs, in order:

1. receive filters from the current transmit filters and downlink powers
   (dominant generalized eigenvector per substream);
2. virtual-uplink powers ``lam = -(C^T)^{-1} w`` for those filters;
3. transmit filters from the receive filters and uplink powers;
4. downlink powers ``p = -C^{-1} d`` for the new filter pair.

The loop stops once the summed Frobenius change of all filter matrices
drops to ``epsilon``.

Target continuation
-------------------
From a random start the first power solves are almost always infeasible
(negative entries), which would end the run before the filters had any
chance to adapt. With ``continuation=True`` an infeasible solve is
replaced by an exact solve against targets scaled down to
``relax_margin / rho`` of the requested ones, ``rho`` being the Perron
root of the normalized interference coupling. Those powers are positive
and finite; the filters keep improving and full targets take over as soon
as they become attainable. A run whose filters become stationary (or that
exhausts ``max_iters``) while still relaxed is reported as infeasible.
``continuation=False`` stops at the first negative power entry instead.
"""

import enum
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (ConfigError, DegenerateDenominator, DegenerateGain, Infeasible,
                     NotPositiveDefinite, Singular)
from .model import BeamformerState, init_state, validate_config
from .numerics import dominant_gen_eigvecs_rank_one, solve_linear
from .sinr import (constraint_system, downlink_terms, sinr_downlink, sinr_uplink,
                   spectral_radius, uplink_terms)

__all__ = ['Status', 'SolveOptions', 'IterationRecord', 'DualityAudit', 'SolveReport',
           'update_receive_filters', 'update_transmit_filters', 'solve_uplink_powers',
           'solve_downlink_powers', 'audit_duality', 'solve']

log = logging.getLogger(__name__)

_TINY = 1e-300


class Status(str, enum.Enum):
    CONVERGED = 'Converged'
    INFEASIBLE = 'Infeasible'
    MAX_ITERS = 'MaxItersExceeded'
    NUMERICAL_FAILURE = 'NumericalFailure'

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class SolveOptions:
    epsilon: float = 1e-4
    max_iters: int = 500
    audit_tolerance: float = 1e-6
    continuation: bool = True
    relax_margin: float = 0.9
    # systems worse conditioned than this sit on the feasibility boundary
    singular_rcond: float = 1e-12

    def __post_init__(self):
        for name in ('epsilon', 'audit_tolerance', 'singular_rcond'):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if not 0 < self.relax_margin < 1:
            raise ValueError("relax_margin must lie in (0, 1)")

    @classmethod
    def from_config(cls, config, **kw):
        return cls(epsilon=config.epsilon, max_iters=config.max_iters, **kw)


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    primal: float          # w^T p
    dual: float            # d^T lam
    step: float            # sum_k ||dA_k||_F + sum_k ||dB_k||_F
    min_power: float
    target_scale: float    # 1.0 unless targets were relaxed for this iterate
    identity_gap: float    # |w^T(-C^-1 d) - d^T(-C^-T w)| / |w^T p| on the same C

    @property
    def relaxed(self):
        return self.target_scale < 1.0


@dataclass(frozen=True)
class DualityAudit:
    primal_objective: float
    dual_objective: float
    gap: float
    max_dl_sinr_error: float
    max_ul_sinr_error: float

    def passed(self, tol):
        return (self.gap < tol and self.max_dl_sinr_error < tol
                and self.max_ul_sinr_error < tol)


@dataclass
class SolveReport:
    status: Status
    state: BeamformerState
    iterations: int
    trace: list = field(default_factory=list)
    audit: DualityAudit = None
    seed: int = None
    message: str = ''

    @property
    def converged(self):
        return self.status is Status.CONVERGED

    @property
    def feasible(self):
        """Final powers meet the full targets (converged or not)."""
        return (self.status in (Status.CONVERGED, Status.MAX_ITERS)
                and bool(np.all(self.state.p >= 0)))


def _check_signal(sig, offset, L):
    dead = np.flatnonzero(np.linalg.norm(sig, axis=-1) == 0)
    if dead.size:
        k, j = divmod(offset + int(dead[0]), L)
        raise DegenerateGain(k + 1, j + 1)


def update_receive_filters(state, channels, config):
    """Return a copy of ``state`` with every receive filter set to its max-SINR direction."""
    if np.any(state.p < 0):
        raise ValueError("downlink powers must be nonnegative")
    L = config.L
    if channels.stacked is not None:
        sig, Q = downlink_terms(state, channels, config)
        _check_signal(sig, 0, L)
        v, _ = dominant_gen_eigvecs_rank_one(sig, Q)
        return replace(state, A=[v[k * L:(k + 1) * L].T.copy() for k in range(config.K)])
    A = []
    for k in range(config.K):
        sig, Q = downlink_terms(state, channels, config, k)
        _check_signal(sig, k * L, L)
        v, _ = dominant_gen_eigvecs_rank_one(sig, Q)
        A.append(v.T.copy())
    return replace(state, A=A)


def update_transmit_filters(state, channels, config):
    """Return a copy of ``state`` with every transmit filter set to its uplink max-SINR direction."""
    if np.any(state.lam < 0):
        raise ValueError("uplink powers must be nonnegative")
    L = config.L
    sig, Q = uplink_terms(state, channels, config)
    _check_signal(sig, 0, L)
    v, _ = dominant_gen_eigvecs_rank_one(sig, Q)
    return replace(state, B=[v[k * L:(k + 1) * L].T.copy() for k in range(config.K)])


def _power_solve(system, rhs, transpose, min_rcond=1e-12):
    M = system.C.T if transpose else system.C
    return solve_linear(M, -rhs, min_rcond=min_rcond).x


def solve_uplink_powers(state, channels, config, min_rcond=1e-12):
    """
    Virtual-uplink powers meeting every target with equality.

    Raises
    ------
    Infeasible
        If the solution has a negative entry.
    Singular
        If the constraint matrix is (numerically) singular.
    """
    system = constraint_system(state, channels, config)
    lam = _power_solve(system, config.w, True, min_rcond)
    if np.any(lam < 0):
        raise Infeasible("targets unattainable with the current filters", lam)
    return lam


def solve_downlink_powers(state, channels, config, min_rcond=1e-12):
    """Downlink powers meeting every target with equality; see `solve_uplink_powers`."""
    system = constraint_system(state, channels, config)
    p = _power_solve(system, system.d, False, min_rcond)
    if np.any(p < 0):
        raise Infeasible("targets unattainable with the current filters", p)
    return p


def _relaxed_solve(system, gamma, rhs, transpose, options):
    """Exact solve, falling back to scaled targets when that one is infeasible.

    Returns the powers, the target scale used and the system actually solved.
    """
    x = _power_solve(system, rhs, transpose, options.singular_rcond)
    if np.all(x >= 0):
        return x, 1.0, system
    if not options.continuation:
        raise Infeasible("negative power entry", x)
    rho = spectral_radius(system, gamma)
    scale = options.relax_margin / max(rho, 1.0)
    direct = -np.diag(system.C) * gamma
    C = system.cross_gains
    np.fill_diagonal(C, -direct / (scale * gamma))
    relaxed = type(system)(C=C, d=system.d)
    x = _power_solve(relaxed, rhs, transpose, options.singular_rcond)
    if np.any(x < 0):
        raise Infeasible("relaxed targets still unattainable", x)
    return x, scale, relaxed


def _step_size(old, new):
    # Frobenius norm of each user's filter change, summed over users
    dA = sum(np.sqrt(np.sum(np.abs(a - b) ** 2)) for a, b in zip(old.A, new.A))
    dB = np.sqrt(np.sum(np.abs(np.stack(old.B) - np.stack(new.B)) ** 2, axis=(1, 2))).sum()
    return float(dA + dB)


def audit_duality(state, channels, config):
    """Compare primal and dual objectives and both links' SINRs with the targets."""
    system = constraint_system(state, channels, config)
    primal = float(config.w @ state.p)
    dual = float(system.d @ state.lam)
    gap = abs(primal - dual) / max(abs(primal), _TINY)
    gamma = config.gamma
    dl = sinr_downlink(state, channels, config)
    ul = sinr_uplink(state, channels, config)
    return DualityAudit(
        primal_objective=primal, dual_objective=dual, gap=gap,
        max_dl_sinr_error=float(np.max(np.abs(dl - gamma) / gamma)),
        max_ul_sinr_error=float(np.max(np.abs(ul - gamma) / gamma)))


def solve(config, channels, options=None, seed=0, state=None):
    """
    Minimize the weighted sum power subject to per-substream SINR targets.

    Parameters
    ----------
    config : SystemConfig
    channels : ChannelSet
    options : SolveOptions, optional
        Defaults take ``epsilon`` and ``max_iters`` from ``config``.
    seed : int
        Seed of the random initial transmit filters and powers.
    state : BeamformerState, optional
        Explicit starting point; overrides ``seed``.

    Returns
    -------
    SolveReport
    """
    violations = validate_config(config)
    if violations:
        raise ConfigError(violations)
    channels.check(config)
    if options is None:
        options = SolveOptions.from_config(config)
    gamma = config.gamma_flat
    w = config.w
    state = init_state(config, seed) if state is None else state.copy()

    trace = []
    status = None
    message = ''
    scale = 1.0
    n = 0
    for n in range(1, options.max_iters + 1):
        try:
            cur = update_receive_filters(state, channels, config)
            system = constraint_system(cur, channels, config)
            lam, _, _ = _relaxed_solve(system, gamma, w, True, options)
            cur = update_transmit_filters(replace(cur, lam=lam), channels, config)
            system = constraint_system(cur, channels, config)
            p, scale, solved = _relaxed_solve(system, gamma, system.d, False, options)
            lam_check = -np.linalg.solve(solved.C.T, w)
        except Infeasible as exc:
            status, message = Status.INFEASIBLE, str(exc)
            break
        except (Singular, NotPositiveDefinite, DegenerateGain, DegenerateDenominator) as exc:
            status, message = Status.NUMERICAL_FAILURE, f"{type(exc).__name__}: {exc}"
            break
        cur = replace(cur, p=p)
        step = _step_size(state, cur)
        primal = float(w @ p)
        trace.append(IterationRecord(
            iteration=n, primal=primal, dual=float(system.d @ lam), step=float(step),
            min_power=float(p.min()), target_scale=scale,
            identity_gap=abs(primal - float(solved.d @ lam_check)) / max(abs(primal), _TINY)))
        state = cur
        if step <= options.epsilon:
            if scale < 1.0:
                status = Status.INFEASIBLE
                message = f"filters stationary with targets scaled by {scale:.4g}"
            else:
                status = Status.CONVERGED
            break
    else:
        if scale < 1.0:
            status = Status.INFEASIBLE
            message = f"targets still scaled by {scale:.4g} after {n} iterations"
        else:
            status = Status.MAX_ITERS

    state.meta['seed'] = seed
    report = SolveReport(status=status, state=state, iterations=n, trace=trace,
                         seed=seed, message=message)
    if report.feasible:
        report.audit = audit_duality(state, channels, config)
    log.debug("seed %s: %s after %d iterations %s", seed, status, n, message)
    return report
