"""
System configuration, channel generation and the optimization state.

Indexing convention
-------------------
Substreams are flattened user-major, substream-minor. In the math
(1-based) the flat index of user ``k``, substream ``j`` is
``m = (k - 1) L + j``; the inverse map is ``k = ceil(m / L)``,
``j = m - (k - 1) L``. Arrays in code are 0-based; `flat_index` and
`user_substream` are the only places where the two conventions meet.

Random numbers
--------------
All randomness comes from numpy's PCG64 generator seeded through
``SeedSequence([seed, stream])``, with a separate stream for channels and
for the solver's initial point, so using one seed for both does not
correlate them. Complex Gaussians are built with the Box-Muller transform
from pairs of uniforms (`complex_gaussian`).
"""

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, DimensionMismatch
from .numerics import canonical_phase

__all__ = ['SystemConfig', 'ChannelSet', 'BeamformerState', 'flat_index',
           'user_substream', 'complex_gaussian', 'make_rng', 'draw_channels',
           'init_state', 'validate_config', 'load_config', 'config_from_dict',
           'db_to_linear', 'linear_to_db']

CHANNEL_STREAM = 0
INIT_STREAM = 1


def db_to_linear(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(np.asarray(x, dtype=float))


def flat_index(k, j, L):
    """Map 1-based (user ``k``, substream ``j``) to the 0-based flat array index."""
    return (k - 1) * L + j - 1


def user_substream(m, L):
    """Map a 1-based flat index ``m`` to 1-based (user, substream).

    Uses ``k = ceil(m / L)``, the rounding-up rule of the constraint layout.
    """
    k = math.ceil(m / L)
    return k, m - (k - 1) * L


@dataclass(frozen=True)
class SystemConfig:
    """
    Parameters of one downlink scenario.

    Attributes
    ----------
    M : int
        Transmit antennas at the base station.
    K : int
        Number of users.
    N : tuple of int
        Receive antennas of each user (length K).
    L : int
        Substreams per user.
    gamma : ndarray, shape (K, L)
        Post-SINR targets, linear scale.
    w : ndarray, shape (K*L,)
        Power weights, flat user-major order.
    sigma2 : float
        Receiver noise variance.
    epsilon : float
        Stopping threshold on the beamformer step size.
    max_iters : int
        Iteration cap.
    """
    M: int
    K: int
    N: tuple
    L: int
    gamma: np.ndarray
    w: np.ndarray
    sigma2: float = 1.0
    epsilon: float = 1e-4
    max_iters: int = 500

    def __post_init__(self):
        N = self.N
        if np.ndim(N) == 0:
            N = (int(N),) * int(self.K)
        object.__setattr__(self, 'N', tuple(int(n) for n in N))
        gamma = np.array(self.gamma, dtype=float)
        if gamma.ndim == 0:
            gamma = np.full((self.K, self.L), float(gamma))
        elif gamma.ndim == 1 and gamma.size == self.K * self.L:
            gamma = gamma.reshape(self.K, self.L)
        w = np.array(self.w, dtype=float)
        if w.ndim == 0:
            w = np.full(self.K * self.L, float(w))
        w = w.reshape(-1)
        gamma.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, 'gamma', gamma)
        object.__setattr__(self, 'w', w)

    @property
    def KL(self):
        return self.K * self.L

    @property
    def gamma_flat(self):
        return self.gamma.reshape(-1)

    def offsets(self):
        """Flat start index of each user's substreams (0-based)."""
        return [k * self.L for k in range(self.K)]

    def with_(self, **changes):
        return replace(self, **changes)

    def to_dict(self):
        return {
            'M': self.M, 'K': self.K, 'N': list(self.N), 'L': self.L,
            'gamma': self.gamma.tolist(), 'w': self.w.tolist(),
            'sigma2': self.sigma2, 'epsilon': self.epsilon,
            'max_iters': self.max_iters,
        }


def validate_config(config):
    """Return a list of violated invariants; empty means the config is valid."""
    v = []
    c = config
    if c.M < 1:
        v.append("M >= 1")
    if c.K < 1:
        v.append("K >= 1")
    if c.L < 1:
        v.append("L >= 1")
    if len(c.N) != c.K:
        v.append("len(N) == K")
    for k, n in enumerate(c.N, start=1):
        if n < c.L:
            v.append(f"N_k >= L (user {k} has N_k={n} < L={c.L})")
    if c.gamma.shape != (c.K, c.L):
        v.append(f"gamma shape == (K, L) (got {c.gamma.shape})")
    elif not np.all(np.isfinite(c.gamma)) or np.any(c.gamma <= 0):
        v.append("gamma > 0")
    if c.w.shape != (c.K * c.L,):
        v.append(f"len(w) == K*L (got {c.w.size})")
    elif not np.all(np.isfinite(c.w)) or np.any(c.w <= 0):
        v.append("w > 0")
    if not (np.isfinite(c.sigma2) and c.sigma2 > 0):
        v.append("sigma2 > 0")
    if not (np.isfinite(c.epsilon) and c.epsilon > 0):
        v.append("epsilon > 0")
    if c.max_iters < 1:
        v.append("max_iters >= 1")
    return v


def config_from_dict(d):
    """Build a `SystemConfig` from a JSON-style mapping.

    ``gamma`` is linear; ``gamma_db`` is accepted instead and converted.
    Scalars for ``N``, ``gamma``/``gamma_db`` and ``w`` are broadcast.
    """
    d = dict(d)
    known = {'M', 'K', 'N', 'L', 'gamma', 'gamma_db', 'w', 'sigma2',
             'epsilon', 'max_iters'}
    unknown = set(d) - known
    if unknown:
        raise ConfigError([f"unknown field {name!r}" for name in sorted(unknown)])
    missing = [f for f in ('M', 'K', 'N', 'L') if f not in d]
    if 'gamma' not in d and 'gamma_db' not in d:
        missing.append('gamma')
    if missing:
        raise ConfigError([f"missing field {name!r}" for name in missing])
    if 'gamma_db' in d:
        if 'gamma' in d:
            raise ConfigError(["give only one of 'gamma' and 'gamma_db'"])
        d['gamma'] = db_to_linear(d.pop('gamma_db'))
    d.setdefault('w', 1.0)
    try:
        return SystemConfig(**d)
    except (TypeError, ValueError) as exc:
        raise ConfigError([str(exc)]) from exc


def load_config(path):
    with open(Path(path)) as fh:
        return config_from_dict(json.load(fh))


def make_rng(seed, stream):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), stream])))


def complex_gaussian(rng, shape):
    """
    Circularly symmetric complex Gaussian samples with unit variance.

    Box-Muller: with ``u1`` uniform on (0, 1] and ``u2`` uniform on [0, 1),
    ``g1 + i g2 = sqrt(-2 ln u1) exp(2 pi i u2)`` gives two independent
    standard normals; dividing by sqrt(2) sets ``E|z|^2 = 1``.
    """
    n = int(np.prod(shape))
    u = rng.random((2, n))
    u1 = 1.0 - u[0]
    radius = np.sqrt(-2.0 * np.log(u1))
    z = radius * np.exp(2j * np.pi * u[1]) / np.sqrt(2.0)
    return z.reshape(shape)


@dataclass(frozen=True)
class ChannelSet:
    """The K downlink channel matrices, ``H[k]`` of shape (N_k, M)."""
    H: tuple

    def __post_init__(self):
        H = tuple(np.asarray(h, dtype=complex) for h in self.H)
        object.__setattr__(self, 'H', H)
        stacked = np.stack(H) if len({h.shape for h in H}) == 1 else None
        object.__setattr__(self, '_stacked', stacked)

    @property
    def K(self):
        return len(self.H)

    @property
    def stacked(self):
        """Channels as one (K, N, M) array, or None when antenna counts differ."""
        return self._stacked

    def check(self, config):
        if self.K != config.K:
            raise DimensionMismatch(f"{self.K} channels for K={config.K}")
        for k, h in enumerate(self.H):
            if h.shape != (config.N[k], config.M):
                raise DimensionMismatch(
                    f"H[{k}] has shape {h.shape}, expected {(config.N[k], config.M)}")


def draw_channels(config, seed):
    """I.i.d. unit-variance Rayleigh channels, deterministic in ``seed``."""
    rng = make_rng(seed, CHANNEL_STREAM)
    return ChannelSet(tuple(complex_gaussian(rng, (n, config.M)) for n in config.N))


@dataclass
class BeamformerState:
    """
    Beamformers and powers of one solver run.

    ``A[k]`` (N_k x L) holds user k's receive filters as columns, ``B[k]``
    (M x L) its transmit filters. ``p`` and ``lam`` are the downlink and
    virtual-uplink powers in flat user-major order.
    """
    A: list
    B: list
    p: np.ndarray
    lam: np.ndarray
    meta: dict = field(default_factory=dict)

    def copy(self):
        return BeamformerState([a.copy() for a in self.A], [b.copy() for b in self.B],
                               self.p.copy(), self.lam.copy(), dict(self.meta))

    def B_flat(self):
        """All transmit columns side by side, shape (M, K*L)."""
        return np.concatenate(self.B, axis=1)

    def user_power(self, k, L):
        return float(np.sum(self.p[k * L:(k + 1) * L]))


def normalize_columns(X):
    X = X / np.linalg.norm(X, axis=0, keepdims=True)
    return canonical_phase(X, axis=0)


def init_state(config, seed):
    """Random starting point: Gaussian unit-norm transmit filters, p uniform on (0, 1]."""
    rng = make_rng(seed, INIT_STREAM)
    B = [normalize_columns(complex_gaussian(rng, (config.M, config.L)))
         for _ in range(config.K)]
    p = 1.0 - rng.random(config.KL)
    A = [np.zeros((n, config.L), dtype=complex) for n in config.N]
    return BeamformerState(A=A, B=B, p=p, lam=np.zeros(config.KL))
