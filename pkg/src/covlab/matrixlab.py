"""Matrix construction, spectra and resolvent identities.

``Y`` below is always the scaled ``M x N`` data matrix ``(M N)^(-1/4) X``,
so that ``H = Y^T Y - sqrt(M/N) I``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = [
    "SpectralSample",
    "Resolvent",
    "scale_data",
    "build_H",
    "build_wigner",
    "eigenvalues_sym",
    "empirical_stieltjes",
    "resolvent",
    "green_diagonal",
    "reduced_green_diagonal",
    "resolvent_derivative_check",
    "interlacing_check",
    "linear_statistic",
]

MODEL_TAGS = ("sample_cov", "wigner", "reduced")


@dataclass
class SpectralSample:
    """Ascending eigenvalues of one realization."""

    eigenvalues: np.ndarray
    model_tag: str = "sample_cov"
    index: Optional[int] = None
    green_diagonals: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.model_tag not in MODEL_TAGS:
            raise ValueError(f"unknown model tag {self.model_tag!r}")

    @property
    def N(self):
        return len(self.eigenvalues)


@dataclass
class Resolvent:
    z: complex
    entries: np.ndarray


def _check_data(Y):
    Y = np.asarray(Y, dtype=float)
    if Y.ndim != 2:
        raise ValueError("data matrix must be two dimensional")
    M, N = Y.shape
    if not M >= N >= 1:
        raise ValueError(f"need M >= N >= 1, got shape {Y.shape}")
    if not np.all(np.isfinite(Y)):
        raise ValueError("data matrix has non-finite entries")
    return Y


def scale_data(X):
    """``Y = (M N)^(-1/4) X``."""
    X = np.asarray(X, dtype=float)
    M, N = X.shape
    return X / (M * N) ** 0.25


def build_H(Y):
    """Renormalized sample covariance ``Y^T Y - sqrt(M/N) I`` (exactly symmetric)."""
    Y = _check_data(Y)
    M, N = Y.shape
    H = Y.T @ Y
    H = 0.5 * (H + H.T)
    H[np.diag_indices(N)] -= math.sqrt(M / N)
    return H


def build_wigner(N, dist, rng):
    """Wigner matrix with off-diagonal variance ``1/N``.

    The diagonal is Gaussian with variance ``(omega_4 - 1)/N``, the
    Gaussian Wigner model whose CLT variance matches the sample covariance
    ensemble.
    """
    if N < 1:
        raise ValueError("N must be positive")
    A = np.triu(dist.draw(rng, (N, N)), 1)
    W = (A + A.T) / math.sqrt(N)
    diag_var = dist.omega(4) - 1.0
    W[np.diag_indices(N)] = math.sqrt(max(diag_var, 0.0) / N) * rng.standard_normal(N)
    return W


def _check_symmetric(A, tol=1e-10):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    if A.size and np.max(np.abs(A - A.T)) > tol * scale:
        raise ValueError("matrix is not symmetric")
    return A


def eigenvalues_sym(A, model_tag="sample_cov"):
    A = _check_symmetric(A)
    return SpectralSample(np.linalg.eigvalsh(A), model_tag)


def empirical_stieltjes(s, z):
    """``(1/N) sum 1/(lambda_i - z)``; accepts a sample or a raw array."""
    z = complex(z)
    if not z.imag > 0:
        raise ValueError("need Im z > 0")
    lam = s.eigenvalues if isinstance(s, SpectralSample) else np.asarray(s, dtype=float)
    return complex(np.mean(1.0 / (lam - z), axis=-1))


def resolvent(H, z):
    """Full Green function ``(H - z)^-1``."""
    z = complex(z)
    if not z.imag > 0:
        raise ValueError("need Im z > 0")
    H = np.asarray(H, dtype=float)
    N = H.shape[0]
    A = H - z * np.eye(N)
    G = np.linalg.solve(A, np.eye(N, dtype=complex))
    return Resolvent(z, G)


def green_diagonal(H, zs):
    """Diagonals ``G_kk(z)`` for each ``z`` from one eigendecomposition."""
    lam, V = np.linalg.eigh(H)
    V2 = V * V
    return lam, {complex(z): V2 @ (1.0 / (lam - complex(z))) for z in zs}


def reduced_green_diagonal(Y, z):
    """Diagonal of the companion resolvent ``(Y Y^T - sqrt(M/N) - z)^-1``.

    Built from the ``N`` nonzero singular values of ``Y``; the remaining
    ``M - N`` eigenvalues of ``Y Y^T - sqrt(M/N)`` all equal ``-sqrt(M/N)``.
    """
    Y = _check_data(Y)
    M, N = Y.shape
    c = math.sqrt(M / N)
    U, s, _ = np.linalg.svd(Y, full_matrices=False)
    U2 = U * U
    z = complex(z)
    diag = U2 @ (1.0 / (s * s - c - z))
    diag += (1.0 - U2.sum(axis=1)) / (-c - z)
    return diag


def _resolvent_products(Y, z):
    H = build_H(Y)
    G = resolvent(H, z).entries
    YG = Y @ G
    return G, YG, YG @ Y.T


def resolvent_derivative_check(Y, j, k, z, eps=1e-6, parts=False):
    """Compare central differences in ``Y_jk`` with the closed-form derivatives.

    Checks ``D G_ab``, ``D (YG)_ab`` and ``D [G_kk (Y G Y^T)_jj]`` over all
    index pairs and returns the largest absolute deviation (or the three
    deviations separately when ``parts`` is true).
    """
    Y = _check_data(Y)
    M, N = Y.shape
    if not (0 <= j < M and 0 <= k < N):
        raise IndexError(f"(j, k)=({j}, {k}) out of range for shape {Y.shape}")
    if not 1e-8 <= eps <= 1e-4:
        raise ValueError("eps must lie in [1e-8, 1e-4]")
    G, YG, YGY = _resolvent_products(Y, z)

    Yp, Ym = Y.copy(), Y.copy()
    Yp[j, k] += eps
    Ym[j, k] -= eps
    Gp, YGp, YGYp = _resolvent_products(Yp, z)
    Gm, YGm, YGYm = _resolvent_products(Ym, z)

    fd_G = (Gp - Gm) / (2 * eps)
    fd_YG = (YGp - YGm) / (2 * eps)
    fd_iii = (Gp[k, k] * YGYp[j, j] - Gm[k, k] * YGYm[j, j]) / (2 * eps)

    # (i)  -(YG)_{j a} G_{b k} - (YG)_{j b} G_{a k}
    pred_G = -np.outer(YG[j], G[:, k]) - np.outer(G[:, k], YG[j])
    # (ii) delta_{a j} G_{b k} - G_{b k} (YGY^T)_{j a} - (YG)_{j b} (YG)_{a k}
    pred_YG = -np.outer(YGY[j], G[:, k]) - np.outer(YG[:, k], YG[j])
    pred_YG[j] += G[:, k]
    # (iii)
    pred_iii = 2 * G[k, k] * YG[j, k] - 4 * G[k, k] * YG[j, k] * YGY[j, j]

    errs = (float(np.max(np.abs(fd_G - pred_G))),
            float(np.max(np.abs(fd_YG - pred_YG))),
            float(abs(fd_iii - pred_iii)))
    return errs if parts else max(errs)


def interlacing_check(Y, drop_col=0, tol=1e-9):
    """Eigenvalues of ``H`` and of ``H`` with one column of ``Y`` removed interlace."""
    Y = _check_data(Y)
    M, N = Y.shape
    if N < 2:
        raise ValueError("interlacing needs N >= 2")
    lam = np.linalg.eigvalsh(build_H(Y))
    B = np.delete(Y, drop_col, axis=1)
    # keep the full-matrix shift sqrt(M/N), not sqrt(M/(N-1))
    Hs = B.T @ B
    Hs = 0.5 * (Hs + Hs.T) - math.sqrt(M / N) * np.eye(N - 1)
    mu = np.linalg.eigvalsh(Hs)
    return bool(np.all(lam[:-1] <= mu + tol) and np.all(mu <= lam[1:] + tol))


def linear_statistic(s, phi):
    lam = s.eigenvalues if isinstance(s, SpectralSample) else np.asarray(s, dtype=float)
    return float(np.sum(phi(lam)))
