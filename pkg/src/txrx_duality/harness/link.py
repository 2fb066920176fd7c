"""Symbol-level simulation of the downlink with converged beamformers."""

import math
from dataclasses import dataclass

import numpy as np

from ..errors import NotConverged
from ..model import make_rng, complex_gaussian

LINK_STREAM = 2

# Gray labelling: bit pair (b0, b1) -> ((1 - 2 b0) + 1j (1 - 2 b1)) / sqrt(2)
QPSK = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / np.sqrt(2)


def qfunc(x):
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def qpsk_ser_reference(sinr):
    """QPSK symbol error rate in Gaussian noise at the given linear SINR."""
    q = qfunc(math.sqrt(sinr))
    return 2.0 * q * (1.0 - 0.5 * q)


@dataclass(frozen=True)
class LinkVerification:
    sinr: np.ndarray       # empirical post-SINR, shape (K, L), linear
    ser: np.ndarray        # symbol error rate per substream
    target: np.ndarray     # configured targets, linear

    @property
    def sinr_db(self):
        return 10 * np.log10(self.sinr)

    @property
    def max_deviation_db(self):
        return float(np.max(np.abs(self.sinr_db - 10 * np.log10(self.target))))


def verify_link(report, channels, config, n_sym=100_000, seed=0, noise_scale=1.0):
    """
    Push QPSK symbols through the downlink and measure each substream's SINR.

    The recovered sample of substream (k, j) is modelled as ``g x + e``; the
    gain ``g`` is estimated as ``mean(y conj(x))`` (unit symbol energy) and
    the SINR as ``|g|^2 / mean|y - g x|^2``.

    Parameters
    ----------
    report : SolveReport
        Must be converged.
    n_sym : int
        Symbols per substream.
    seed : int
        Seeds symbols and noise (independent of the channel stream).
    noise_scale : float
        Multiplies the noise standard deviation; 0 gives an interference-only link.
    """
    if not report.converged:
        raise NotConverged(f"cannot verify a {report.status} solution")
    state = report.state
    rng = make_rng(seed, LINK_STREAM)
    K, L = config.K, config.L
    x = QPSK[rng.integers(0, 4, size=(config.KL, n_sym))]
    tx = state.B_flat() @ (np.sqrt(state.p)[:, None] * x)

    sinr = np.empty((K, L))
    ser = np.empty((K, L))
    for k in range(K):
        noise = complex_gaussian(rng, (config.N[k], n_sym)) * np.sqrt(config.sigma2)
        y = state.A[k].conj().T @ (channels.H[k] @ tx + noise_scale * noise)
        xk = x[k * L:(k + 1) * L]
        g = np.mean(y * xk.conj(), axis=1)
        resid = y - g[:, None] * xk
        sinr[k] = np.abs(g) ** 2 / np.mean(np.abs(resid) ** 2, axis=1)
        z = y / g[:, None]
        xhat = (np.sign(z.real) + 1j * np.sign(z.imag)) / np.sqrt(2)
        ser[k] = np.mean(np.abs(xhat - xk) > 1e-9, axis=1)
    return LinkVerification(sinr=sinr, ser=ser, target=config.gamma.copy())
