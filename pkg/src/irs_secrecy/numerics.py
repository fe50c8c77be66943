"""Complex dense matrix utilities shared by all solvers.

Log-determinants, Hermitian eigen-extraction, water-filling power allocation
and the 0/1 duplication maps used to vectorize Hermitian matrix variables.
All operations are pure functions on immutable inputs.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NotPositiveDefinite, RankTooHigh, ZeroChannel

LN2 = float(np.log(2.0))

HERMITIAN_TOL = 1e-10


def check_finite(a: np.ndarray, name: str = "matrix") -> np.ndarray:
    """Return ``a`` as a complex array, rejecting NaN/Inf entries."""
    a = np.asarray(a, dtype=complex)
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def check_hermitian(a: np.ndarray, name: str = "matrix") -> np.ndarray:
    """Validate max|A - A^H| <= tol * max(1, max|A|) and return A."""
    a = check_finite(a, name)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    scale = max(1.0, float(np.max(np.abs(a))) if a.size else 1.0)
    asym = float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0
    if asym > HERMITIAN_TOL * scale:
        raise ValueError(f"{name} is not Hermitian (asymmetry {asym:.3e})")
    return a


def hermitize(a: np.ndarray) -> np.ndarray:
    """Symmetrize away round-off: (A + A^H) / 2."""
    return 0.5 * (a + a.conj().T)


def log_det_pd(a: np.ndarray) -> float:
    """log2-determinant of a Hermitian positive definite matrix.

    Uses a Cholesky factorization; deterministic for identical input.
    Raises NotPositiveDefinite if the factorization encounters a
    non-positive pivot.
    """
    a = check_hermitian(a, "log_det_pd input")
    try:
        chol = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"matrix is not positive definite: {exc}") from exc
    diag = np.real(np.diag(chol))
    return float(2.0 * np.sum(np.log(diag)) / LN2)


def max_eigenvalue_herm(a: np.ndarray) -> float:
    """Largest real eigenvalue of a Hermitian matrix."""
    a = check_hermitian(a, "max_eigenvalue_herm input")
    return float(np.linalg.eigvalsh(a)[-1])


RANK1_REL_TOL = 1e-8


def rank1_eigenvalue(m: np.ndarray) -> complex:
    """Unique nonzero eigenvalue of a rank <= 1 matrix, i.e. its trace.

    The rank precondition is checked numerically: the second singular value
    must not exceed RANK1_REL_TOL times the first.
    """
    m = check_finite(m, "rank1_eigenvalue input")
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("rank1_eigenvalue expects a square matrix")
    if min(m.shape) >= 2:
        svals = np.linalg.svd(m, compute_uv=False)
        if svals[0] > 0 and svals[1] > RANK1_REL_TOL * svals[0]:
            raise RankTooHigh(
                f"second singular value {svals[1]:.3e} exceeds "
                f"{RANK1_REL_TOL:.0e} * {svals[0]:.3e}"
            )
    return complex(np.trace(m))


@dataclass(frozen=True)
class TransmitCovariance:
    """Hermitian PSD transmit covariance with its trace budget (watts)."""

    r: np.ndarray
    p: float

    def validate(self, tol_psd: float = 1e-10, tol_trace: float = 1e-9) -> None:
        check_hermitian(self.r, "transmit covariance")
        eigs = np.linalg.eigvalsh(hermitize(self.r))
        if eigs[0] < -tol_psd * max(1.0, eigs[-1]):
            raise ValueError(f"covariance not PSD (min eigenvalue {eigs[0]:.3e})")
        tr = float(np.real(np.trace(self.r)))
        if tr > self.p + tol_trace:
            raise ValueError(f"trace {tr:.12g} exceeds budget {self.p:.12g}")


ZERO_CHANNEL_TOL = 1e-14


def water_filling(h: np.ndarray, p: float) -> TransmitCovariance:
    """Capacity-achieving covariance for log2|I + h R h^H| under tr(R) <= p.

    The eigenbasis of R is the right-singular basis of h; power levels follow
    the water-filling rule with the water level located by bisection on the
    dual variable (robust to tied singular values).
    """
    h = check_finite(h, "channel")
    if p <= 0:
        raise ValueError("power budget must be positive")
    u, svals, vh = np.linalg.svd(h, full_matrices=False)
    if svals.size == 0 or svals[0] < ZERO_CHANNEL_TOL:
        raise ZeroChannel("all singular values below 1e-14")
    gains = svals**2
    active = gains > ZERO_CHANNEL_TOL**2
    inv_gain = np.where(active, 1.0 / np.where(active, gains, 1.0), np.inf)

    # total power allocated at water level w, non-decreasing in w
    def total(w: float) -> float:
        return float(np.sum(np.maximum(0.0, w - inv_gain[active])))

    lo = float(np.min(inv_gain[active]))
    hi = lo + p
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if total(mid) > p:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-12 * max(1.0, hi):
            break
    level = 0.5 * (lo + hi)
    powers = np.maximum(0.0, level - inv_gain)
    powers[~active] = 0.0
    # guard the trace budget against the residual bisection error
    tot = float(np.sum(powers))
    if tot > p:
        powers *= p / tot
    v = vh.conj().T
    r = (v * powers) @ v.conj().T
    return TransmitCovariance(r=hermitize(r), p=float(p))


def water_filling_capacity(h: np.ndarray, p: float) -> float:
    """Channel capacity (bits) achieved by the water-filling covariance."""
    cov = water_filling(h, p)
    m = h @ cov.r @ h.conj().T
    return log_det_pd(np.eye(m.shape[0]) + hermitize(m))


@dataclass(frozen=True)
class DuplicationMaps:
    """0/1 maps between vec(.) of the matrix variables and their free parts.

    d_r: m^2 x m^2, vec(R) = d_r @ r with r = [diag; lower; conj(lower)].
    d_n: (d+e)^2 x 2de, vec(K - I) = d_n @ n with n = [vec(N); conj(vec(N))].
    Both have orthonormal columns: d_r^T d_r = I, d_n^T d_n = I.
    """

    d_r: np.ndarray
    d_n: np.ndarray


def duplication_maps(m: int, d: int, e: int) -> DuplicationMaps:
    """Construct the duplication maps for given antenna counts.

    Ordering convention: diagonal entries of R in index order, then the
    strictly-lower-triangular entries in column-major order, then their
    conjugates.  vec(.) is column-major throughout.
    """
    if m < 1 or d < 1 or e < 1:
        raise ValueError("antenna counts must be >= 1")
    d_r = np.zeros((m * m, m * m))
    col = 0
    for i in range(m):  # diagonal block
        d_r[i * m + i, col] = 1.0
        col += 1
    lower = [(i, j) for j in range(m) for i in range(j + 1, m)]
    for i, j in lower:  # lower-triangular values R[i, j]
        d_r[j * m + i, col] = 1.0
        col += 1
    for i, j in lower:  # their conjugates live at the mirrored positions
        d_r[i * m + j, col] = 1.0
        col += 1

    k = d + e
    d_n = np.zeros((k * k, 2 * d * e))
    col = 0
    for b in range(d):  # vec(N): N occupies rows d..d+e-1, cols 0..d-1 of K
        for a in range(e):
            d_n[b * k + (d + a), col] = 1.0
            col += 1
    for b in range(d):  # conj(vec(N)) fills the mirrored N^H block
        for a in range(e):
            d_n[(d + a) * k + b, col] = 1.0
            col += 1
    return DuplicationMaps(d_r=d_r, d_n=d_n)


def vec(a: np.ndarray) -> np.ndarray:
    """Column-major vectorization."""
    return np.asarray(a).reshape(-1, order="F")


def unvec(v: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`vec`."""
    return np.asarray(v).reshape(rows, cols, order="F")
