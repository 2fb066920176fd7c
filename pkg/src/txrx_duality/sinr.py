"""
Downlink and virtual-uplink post-SINRs and the linear constraint system.

Two independent evaluations of the downlink SINR exist on purpose: the
covariance form (`sinr_downlink`, quadratic forms of the receive filter
with signal and interference-plus-noise covariances) and the gain form
(`sinr_downlink_from_gains`, built from the link power gains that also
populate the constraint matrix). Tests hold them against each other.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDenominator, DegenerateGain, DimensionMismatch

__all__ = ['GainTensor', 'ConstraintSystem', 'gain_tensor', 'downlink_covariances',
           'downlink_covariances_all', 'downlink_terms', 'uplink_terms',
           'uplink_covariances', 'sinr_downlink', 'sinr_uplink',
           'sinr_downlink_from_gains', 'sinr_uplink_from_gains', 'constraint_system',
           'spectral_radius']


def _check_shapes(state, channels, config):
    channels.check(config)
    if len(state.A) != config.K or len(state.B) != config.K:
        raise DimensionMismatch("beamformer lists must have K entries")
    for k in range(config.K):
        if state.A[k].shape != (config.N[k], config.L):
            raise DimensionMismatch(f"A[{k}] has shape {state.A[k].shape}")
        if state.B[k].shape != (config.M, config.L):
            raise DimensionMismatch(f"B[{k}] has shape {state.B[k].shape}")


@dataclass(frozen=True)
class GainTensor:
    """``phi[k, j, m, n] = |a_{k,j}^H H_k b_{m,n}|^2`` (0-based indices)."""
    phi: np.ndarray

    def as_matrix(self):
        """Rows indexed by receiving substream, columns by transmitted substream."""
        K, L = self.phi.shape[:2]
        return self.phi.reshape(K * L, K * L)


@dataclass(frozen=True)
class ConstraintSystem:
    """SINR constraints written as ``C p + d <= 0``."""
    C: np.ndarray
    d: np.ndarray

    @property
    def cross_gains(self):
        """``C`` with its diagonal zeroed: the interference coupling."""
        F = self.C.copy()
        np.fill_diagonal(F, 0.0)
        return F


def gain_tensor(state, channels, config):
    _check_shapes(state, channels, config)
    Bf = state.B_flat()
    H = channels.stacked
    if H is not None:
        AH = np.einsum('knl,knm->klm', np.stack(state.A).conj(), H)
        rows = np.abs(AH @ Bf) ** 2
    else:
        rows = np.stack([np.abs(state.A[k].conj().T @ channels.H[k] @ Bf) ** 2
                         for k in range(config.K)])
    return GainTensor(rows.reshape(config.K, config.L, config.K, config.L))


def _outer(s):
    return s[:, :, None] * s[:, None, :].conj()


def downlink_terms(state, channels, config, k=None):
    """
    Rank-one signal vectors and interference-plus-noise covariances, downlink.

    The signal covariance of substream (k, j) is ``s s^H`` with
    ``s = sqrt(p_{k,j}) H_k b_{k,j}``; ``Q`` sums every other substream's
    contribution at user k plus ``sigma2 I``.

    Parameters
    ----------
    k : int, optional
        Restrict to user ``k`` (0-based). Without it all users are batched,
        which requires equal antenna counts.

    Returns
    -------
    s : ndarray, shape (n, N)
    Q : ndarray, shape (n, N, N)
        ``n`` is L for one user, K*L for all.
    """
    L = config.L
    if k is None:
        H = channels.stacked
        if H is None:
            raise DimensionMismatch("batched downlink terms need equal antenna counts")
        HB = H @ state.B_flat()                                     # (K, N, KL)
        total = np.einsum('knc,kmc->knm', HB * state.p, HB.conj())
        total += config.sigma2 * np.eye(H.shape[1])
        own = np.stack([HB[k_, :, k_ * L:(k_ + 1) * L] for k_ in range(config.K)])
        sig = np.swapaxes(own, 1, 2).reshape(config.KL, -1) * np.sqrt(state.p)[:, None]
        total = np.repeat(total, L, axis=0)
    else:
        HB = channels.H[k] @ state.B_flat()
        total = (HB * state.p) @ HB.conj().T + config.sigma2 * np.eye(config.N[k])
        sl = slice(k * L, (k + 1) * L)
        sig = HB[:, sl].T * np.sqrt(state.p[sl])[:, None]
        total = np.broadcast_to(total, (L,) + total.shape)
    return sig, total - _outer(sig)


def downlink_covariances(state, channels, config, k):
    """
    Signal and interference-plus-noise covariances seen by user ``k``.

    Returns
    -------
    S, Q : ndarray, shape (L, N_k, N_k)
        ``S[j] = p_{k,j} H_k b_{k,j} b_{k,j}^H H_k^H`` and ``Q[j]`` the sum of
        every other substream's contribution plus ``sigma2 I``.
    """
    sig, Q = downlink_terms(state, channels, config, k)
    return _outer(sig), Q


def downlink_covariances_all(state, channels, config):
    """Batched `downlink_covariances` for equal antenna counts, shape (K*L, N, N)."""
    sig, Q = downlink_terms(state, channels, config)
    return _outer(sig), Q


def uplink_terms(state, channels, config):
    """
    Rank-one signal vectors and covariances of the virtual uplink.

    The uplink transmit filter of substream (k, j) is ``a_{k,j}`` sent
    through ``H_k^H``; its receive filter is ``b_{k,j}``. The noise level
    of substream (k, j) is its weight ``w_{k,j}``.

    Returns
    -------
    s : ndarray, shape (K*L, M)
        ``sqrt(lam_{k,j}) H_k^H a_{k,j}``.
    Q : ndarray, shape (K*L, M, M)
    """
    H = channels.stacked
    if H is not None:
        AF = np.einsum('knm,knl->mkl', H.conj(), np.stack(state.A)).reshape(config.M, -1)
    else:
        AF = np.concatenate([channels.H[k].conj().T @ state.A[k] for k in range(config.K)],
                            axis=1)
    total = (AF * state.lam) @ AF.conj().T
    sig = AF.T * np.sqrt(state.lam)[:, None]
    Q = total[None] - _outer(sig) + config.w[:, None, None] * np.eye(config.M)[None]
    return sig, Q


def uplink_covariances(state, channels, config):
    """Virtual-uplink covariances ``S, Q`` for every substream, shape (K*L, M, M)."""
    sig, Q = uplink_terms(state, channels, config)
    return _outer(sig), Q


def _quotient(v, S, Q):
    num = np.einsum('...i,...ij,...j->...', v.conj(), S, v).real
    den = np.einsum('...i,...ij,...j->...', v.conj(), Q, v).real
    if np.any(den <= 0):
        raise DegenerateDenominator("interference-plus-noise power is not positive")
    return num / den


def sinr_downlink(state, channels, config):
    """Downlink post-SINR of every substream, shape (K, L), covariance form."""
    _check_shapes(state, channels, config)
    if channels.stacked is not None:
        S, Q = downlink_covariances_all(state, channels, config)
        a = np.swapaxes(np.stack(state.A), 1, 2).reshape(config.KL, -1)
        return _quotient(a, S, Q).reshape(config.K, config.L)
    out = np.empty((config.K, config.L))
    for k in range(config.K):
        S, Q = downlink_covariances(state, channels, config, k)
        out[k] = _quotient(state.A[k].T, S, Q)
    return out


def sinr_uplink(state, channels, config):
    """Virtual-uplink post-SINR of every substream, shape (K, L), covariance form."""
    _check_shapes(state, channels, config)
    S, Q = uplink_covariances(state, channels, config)
    return _quotient(state.B_flat().T, S, Q).reshape(config.K, config.L)


def sinr_downlink_from_gains(gains, p, a_norms2, sigma2):
    """Downlink SINRs from link gains: direct power over (cross power + noise)."""
    G = gains.as_matrix()
    direct = np.diag(G) * p
    den = G @ p - direct + sigma2 * a_norms2
    if np.any(den <= 0):
        raise DegenerateDenominator("interference-plus-noise power is not positive")
    K, L = gains.phi.shape[:2]
    return (direct / den).reshape(K, L)


def sinr_uplink_from_gains(gains, lam, w, b_norms2=1.0):
    """Virtual-uplink SINRs from the same link gains, read column-wise."""
    G = gains.as_matrix()
    direct = np.diag(G) * lam
    den = G.T @ lam - direct + w * b_norms2
    if np.any(den <= 0):
        raise DegenerateDenominator("interference-plus-noise power is not positive")
    K, L = gains.phi.shape[:2]
    return (direct / den).reshape(K, L)


def constraint_system(state, channels, config, gamma=None):
    """
    Assemble ``C`` and ``d`` of the SINR constraints ``C p + d <= 0``.

    Row (k, j) holds the cross gains ``phi[k, j, m, n]`` in column (m, n) and
    ``-phi[k, j, k, j] / gamma_{k,j}`` on the diagonal. ``d`` is
    ``sigma2 * ||a_{k,j}||^2``.

    Parameters
    ----------
    gamma : ndarray, optional
        Flat targets overriding ``config.gamma`` (used for relaxed targets).
    """
    G = gain_tensor(state, channels, config).as_matrix()
    a_norms2 = np.concatenate([np.sum(np.abs(a) ** 2, axis=0) for a in state.A])
    if np.any(a_norms2 == 0):
        raise DimensionMismatch("receive filters must be nonzero")
    gamma = config.gamma_flat if gamma is None else np.asarray(gamma, dtype=float)
    direct = np.diag(G).copy()
    bad = np.flatnonzero(direct <= 0)
    if bad.size:
        k, j = divmod(int(bad[0]), config.L)
        raise DegenerateGain(k + 1, j + 1)
    C = G.copy()
    np.fill_diagonal(C, -direct / gamma)
    return ConstraintSystem(C=C, d=config.sigma2 * a_norms2)


def spectral_radius(system, gamma):
    """
    Perron root of the normalized coupling ``diag(gamma / g) F``.

    Fixed beamformers can meet targets ``gamma`` with nonnegative finite
    powers iff this is below one.
    """
    direct = -np.diag(system.C) * gamma
    T = (gamma / direct)[:, None] * system.cross_gains
    return float(np.max(np.abs(np.linalg.eigvals(T))))
