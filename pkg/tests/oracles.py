"""Reference computations kept independent of the package internals."""

import numpy as np


def gauss_jordan_solve(A, b):
    """Gauss-Jordan elimination with partial pivoting on the augmented matrix."""
    A = np.array(A, dtype=float)
    n = A.shape[0]
    aug = np.hstack([A, np.array(b, dtype=float).reshape(n, 1)])
    for col in range(n):
        piv = col + int(np.argmax(np.abs(aug[col:, col])))
        aug[[col, piv]] = aug[[piv, col]]
        aug[col] /= aug[col, col]
        for r in range(n):
            if r != col:
                aug[r] -= aug[r, col] * aug[col]
    return aug[:, n]


def max_gen_rayleigh(X, Y):
    """Largest eigenvalue of Y^{-1} X through a general (non-Hermitian) eigensolver."""
    vals, vecs = np.linalg.eig(np.linalg.solve(Y, X))
    i = int(np.argmax(vals.real))
    return vals[i].real, vecs[:, i]


def rayleigh(v, X, Y):
    return (np.vdot(v, X @ v) / np.vdot(v, Y @ v)).real


def link_gains(A, B, H):
    """g[(k,j), (m,n)] = |a_{k,j}^H H_k b_{m,n}|^2 by explicit loops."""
    K = len(H)
    L = A[0].shape[1]
    g = np.zeros((K * L, K * L))
    for k in range(K):
        for j in range(L):
            for m in range(K):
                for n in range(L):
                    g[k * L + j, m * L + n] = abs(np.vdot(A[k][:, j], H[k] @ B[m][:, n])) ** 2
    return g


def fixed_point_powers(g, gamma, noise, uplink=False, iters=2000, tol=1e-15):
    """
    Standard interference-function iteration
    ``p_i <- gamma_i (sum_{m != i} g_im p_m + noise_i) / g_ii``.

    The uplink uses the transposed coupling.
    """
    g = np.asarray(g, dtype=float)
    if uplink:
        g = g.T
    direct = np.diag(g).copy()
    cross = g - np.diag(direct)
    p = np.zeros(len(direct))
    for _ in range(iters):
        new = gamma * (cross @ p + noise) / direct
        if np.max(np.abs(new - p)) <= tol * max(1.0, np.max(np.abs(new))):
            return new
        p = new
    return p


def sinr_eq4(A, B, H, p, sigma2):
    """Downlink SINR by explicit covariance sums, one substream at a time."""
    K = len(H)
    L = A[0].shape[1]
    out = np.zeros((K, L))
    for k in range(K):
        N = H[k].shape[0]
        for j in range(L):
            hb = H[k] @ B[k][:, j]
            Rs = p[k * L + j] * np.outer(hb, hb.conj())
            Rin = sigma2 * np.eye(N, dtype=complex)
            for i in range(L):
                if i != j:
                    v = H[k] @ B[k][:, i]
                    Rin += p[k * L + i] * np.outer(v, v.conj())
            for m in range(K):
                if m != k:
                    HBm = H[k] @ B[m]
                    Rin += HBm @ np.diag(p[m * L:(m + 1) * L]) @ HBm.conj().T
            a = A[k][:, j]
            out[k, j] = rayleigh(a, Rs, Rin)
    return out


def sinr_eq16(A, B, H, lam, w):
    """Virtual-uplink SINR by explicit covariance sums."""
    K = len(H)
    L = A[0].shape[1]
    M = H[0].shape[1]
    out = np.zeros((K, L))
    for k in range(K):
        for j in range(L):
            ha = H[k].conj().T @ A[k][:, j]
            Rs = lam[k * L + j] * np.outer(ha, ha.conj())
            Rin = w[k * L + j] * np.eye(M, dtype=complex)
            for i in range(L):
                if i != j:
                    v = H[k].conj().T @ A[k][:, i]
                    Rin += lam[k * L + i] * np.outer(v, v.conj())
            for m in range(K):
                if m != k:
                    HA = H[m].conj().T @ A[m]
                    Rin += HA @ np.diag(lam[m * L:(m + 1) * L]) @ HA.conj().T
            out[k, j] = rayleigh(B[k][:, j], Rs, Rin)
    return out
