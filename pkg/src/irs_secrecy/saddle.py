"""Barrier/Newton solver for the transmit-covariance subproblem.

For fixed phase shifts the secrecy-capacity problem in R is non-convex, but
it is equivalent to a convex-concave max-min problem over (R, K) whose saddle
point yields the optimal R.  The inequality constraints are folded into a
barrier objective

    f_t(R, K) = f(R, K) + t^-1 [log2(P - tr R) + log2|R| - log2|K|],
    f(R, K)   = log2|I + K^-1 H R H^H| - log2|I + H2 R H2^H|,

and the stationarity system r(z) = 0 in the vectorized variables
z = [r; n] (r = diag/lower/conjugate parts of R, n = vec(N) and conjugate)
is driven to zero by Newton steps with backtracking line search while t grows
geometrically.

Gradients and Hessians are closed-form in the lifted complex coordinates;
both carry a 1/ln(2) factor so they are exact derivatives of the base-2
objective above (the stationary points are unaffected by that scaling).
"""

from dataclasses import dataclass, field

import numpy as np

from .channel import RateTriple, rates_from_effective
from .errors import (
    InfeasiblePoint,
    IterationCap,
    LineSearchStalled,
    SingularSystem,
)
from .numerics import (
    LN2,
    DuplicationMaps,
    TransmitCovariance,
    duplication_maps,
    hermitize,
    log_det_pd,
    vec,
    unvec,
)


@dataclass(frozen=True)
class NoiseCov:
    """Auxiliary noise covariance K with identity diagonal blocks.

    Only the off-diagonal block N (e x d) is free:
    K = [[I_d, N^H], [N, I_e]].
    """

    n_block: np.ndarray

    @property
    def e(self) -> int:
        return self.n_block.shape[0]

    @property
    def d(self) -> int:
        return self.n_block.shape[1]

    @property
    def k(self) -> np.ndarray:
        d, e = self.d, self.e
        k = np.eye(d + e, dtype=complex)
        k[d:, :d] = self.n_block
        k[:d, d:] = self.n_block.conj().T
        return k


@dataclass(frozen=True)
class BarrierConfig:
    """Barrier-method parameters (defaults follow the reference experiments)."""

    alpha: float = 0.3
    beta: float = 0.5
    mu: float = 5.0
    t0: float = 1e2
    t_max: float = 1e5
    eps1: float = 1e-8
    max_newton: int = 200
    max_backtrack: int = 60

    def __post_init__(self):
        if not (0.0 < self.alpha < 0.5):
            raise ValueError("alpha must lie in (0, 0.5)")
        if not (0.0 < self.beta < 1.0):
            raise ValueError("beta must lie in (0, 1)")
        if self.mu <= 1.0:
            raise ValueError("mu must exceed 1")
        if self.t0 <= 0 or self.t_max <= self.t0:
            raise ValueError("need 0 < t0 < t_max")
        if self.eps1 <= 0:
            raise ValueError("eps1 must be positive")


@dataclass(frozen=True)
class SaddleState:
    """One interior iterate of the max-min solve."""

    r_cov: TransmitCovariance
    noise: NoiseCov
    t: float
    residual_norm: float = np.nan

    @property
    def z(self) -> np.ndarray:
        """Stacked parameter vector [r; n] (length m^2 + 2de)."""
        maps = duplication_maps(self.r_cov.r.shape[0], self.noise.d, self.noise.e)
        return pack_z(self.r_cov.r, self.noise.n_block, maps)


def pack_z(r: np.ndarray, n_block: np.ndarray, maps: DuplicationMaps) -> np.ndarray:
    """z = [D_r^T vec(R); D_n^T vec(K - I)]."""
    d, e = n_block.shape[1], n_block.shape[0]
    k_minus_i = np.zeros((d + e, d + e), dtype=complex)
    k_minus_i[d:, :d] = n_block
    k_minus_i[:d, d:] = n_block.conj().T
    return np.concatenate([maps.d_r.T @ vec(r), maps.d_n.T @ vec(k_minus_i)])


def unpack_z(
    z: np.ndarray, m: int, d: int, e: int, maps: DuplicationMaps
) -> tuple[np.ndarray, np.ndarray]:
    """Rebuild (R, N) from the stacked vector; R is re-Hermitized."""
    r = unvec(maps.d_r @ z[: m * m], m, m)
    k_minus_i = unvec(maps.d_n @ z[m * m :], d + e, d + e)
    return hermitize(r), k_minus_i[d:, :d]


def _chol_or_none(a: np.ndarray):
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        return None


def _logdet_from_chol(chol: np.ndarray) -> float:
    return float(2.0 * np.sum(np.log(np.real(np.diag(chol)))) / LN2)


def barrier_objective(
    state: SaddleState, h: np.ndarray, h2: np.ndarray, p: float
) -> float:
    """Barrier objective f_t(R, K) in bits at a strictly feasible point."""
    r = hermitize(state.r_cov.r)
    k = state.noise.k
    slack = p - float(np.real(np.trace(r)))
    chol_r = _chol_or_none(r)
    chol_k = _chol_or_none(k)
    if slack <= 0 or chol_r is None or chol_k is None:
        raise InfeasiblePoint("barrier argument is not strictly positive")
    m_big = hermitize(k + h @ r @ h.conj().T)
    eye_e = np.eye(h2.shape[0])
    gram2 = hermitize(eye_e + h2 @ r @ h2.conj().T)
    chol_big = _chol_or_none(m_big)
    chol_2 = _chol_or_none(gram2)
    if chol_big is None or chol_2 is None:
        raise InfeasiblePoint("rate determinant argument lost positivity")
    logdet_k = _logdet_from_chol(chol_k)
    f = _logdet_from_chol(chol_big) - logdet_k - _logdet_from_chol(chol_2)
    t_inv = 1.0 / state.t
    return f + t_inv * (np.log2(slack) + _logdet_from_chol(chol_r) - logdet_k)


def _gradient_matrices(
    r: np.ndarray, k: np.ndarray, h: np.ndarray, h2: np.ndarray, p: float, t: float
) -> tuple[np.ndarray, np.ndarray, dict]:
    """Matrix-valued gradients (G_R, G_N) of f_t and shared intermediates.

    G_R = Z1 - Z2 + t^-1 R^-1 - t^-1 (P - tr R)^-1 I
    G_N = Z3 - (1 + t^-1) K^-1
    with Z1 = H^H (K + H R H^H)^-1 H, Z2 = H2^H (I + H2 R H2^H)^-1 H2,
    Z3 = (K + H R H^H)^-1, Z4 = H^H Z3.  Everything scaled to bits.
    """
    slack = p - float(np.real(np.trace(r)))
    if slack <= 0:
        raise InfeasiblePoint("trace budget exhausted")
    m = r.shape[0]
    k_inv = np.linalg.inv(k)
    r_inv = np.linalg.inv(r)
    z3 = np.linalg.inv(hermitize(k + h @ r @ h.conj().T))
    z3 = hermitize(z3)
    z4 = h.conj().T @ z3
    z1 = hermitize(z4 @ h)
    m2 = h2.conj().T @ h2
    z2 = hermitize(np.linalg.solve(np.eye(m) + m2 @ r, m2))
    t_inv = 1.0 / t
    g_r = (z1 - z2 + t_inv * hermitize(r_inv) - (t_inv / slack) * np.eye(m)) / LN2
    g_n = (z3 - (1.0 + t_inv) * hermitize(k_inv)) / LN2
    aux = {"z1": z1, "z2": z2, "z3": z3, "z4": z4, "k_inv": k_inv,
           "r_inv": r_inv, "slack": slack}
    return hermitize(g_r), hermitize(g_n), aux


def _residual_from_grads(
    g_r: np.ndarray, g_n: np.ndarray, maps: DuplicationMaps
) -> np.ndarray:
    return np.concatenate([maps.d_r.T @ vec(g_r), maps.d_n.T @ vec(g_n)])


def kkt_system(
    state: SaddleState,
    h: np.ndarray,
    h2: np.ndarray,
    p: float,
    maps: DuplicationMaps,
) -> tuple[np.ndarray, np.ndarray]:
    """Stationarity residual r(z) and Hessian T of f_t at the current point.

    The Hessian is assembled from its three Kronecker-product blocks

        T_rr = -D_r^T (Z1^T x Z1 - Z2^T x Z2 + t^-1 R^-T x R^-1
                       + t^-1 (P - tr R)^-2 vec(I) vec(I)^T) D_r
        T_nn = -D_n^T (Z3^T x Z3 - (1 + t^-1) K^-T x K^-1) D_n
        T_rn = -D_r^T (conj(Z4) x Z4) D_n

    and is Hermitian overall.
    """
    r = hermitize(state.r_cov.r)
    k = state.noise.k
    if _chol_or_none(r) is None or _chol_or_none(k) is None:
        raise InfeasiblePoint("state is not strictly feasible")
    g_r, g_n, aux = _gradient_matrices(r, k, h, h2, p, float(state.t))
    residual = _residual_from_grads(g_r, g_n, maps)

    t_inv = 1.0 / float(state.t)
    z1, z2, z3, z4 = aux["z1"], aux["z2"], aux["z3"], aux["z4"]
    k_inv, r_inv, slack = aux["k_inv"], aux["r_inv"], aux["slack"]
    m = r.shape[0]
    vec_eye = vec(np.eye(m)).reshape(-1, 1)
    block_rr = (
        np.kron(z1.T, z1)
        - np.kron(z2.T, z2)
        + t_inv * np.kron(r_inv.T, r_inv)
        + (t_inv / slack**2) * (vec_eye @ vec_eye.T)
    )
    block_nn = np.kron(z3.T, z3) - (1.0 + t_inv) * np.kron(k_inv.T, k_inv)
    block_rn = np.kron(z4.conj(), z4)
    t_rr = -(maps.d_r.T @ block_rr @ maps.d_r) / LN2
    t_nn = -(maps.d_n.T @ block_nn @ maps.d_n) / LN2
    t_rn = -(maps.d_r.T @ block_rn @ maps.d_n) / LN2
    hess = np.block([[t_rr, t_rn], [t_rn.conj().T, t_nn]])
    return residual, hermitize(hess)


def _feasible_residual_norm(
    r: np.ndarray,
    n_block: np.ndarray,
    h: np.ndarray,
    h2: np.ndarray,
    p: float,
    t: float,
    maps: DuplicationMaps,
):
    """Residual norm at a candidate point, or None when outside the interior."""
    r = hermitize(r)
    if p - float(np.real(np.trace(r))) <= 0 or _chol_or_none(r) is None:
        return None
    noise = NoiseCov(n_block=n_block)
    if _chol_or_none(noise.k) is None:
        return None
    g_r, g_n, _ = _gradient_matrices(r, noise.k, h, h2, p, t)
    return float(np.linalg.norm(_residual_from_grads(g_r, g_n, maps)))


def backtracking_search(
    z0: np.ndarray,
    dz: np.ndarray,
    residual_norm_at,
    base_norm: float,
    alpha: float,
    beta: float,
    max_backtrack: int,
) -> tuple[np.ndarray, float, float]:
    """Shrink the step until |r(z + s dz)| <= (1 - alpha s) |r(z)| and feasible.

    ``residual_norm_at(z)`` must return the residual norm or None when the
    candidate is infeasible.  The full step s = 1 is tried first, so an exact
    Newton step on a linear residual is accepted unshrunk.
    """
    s = 1.0
    for _ in range(max_backtrack + 1):
        cand = z0 + s * dz
        norm = residual_norm_at(cand)
        if norm is not None and norm <= (1.0 - alpha * s) * base_norm:
            return cand, s, norm
        s *= beta
    raise LineSearchStalled(
        f"no acceptable step after {max_backtrack} contractions"
    )


def newton_iterate(
    state: SaddleState,
    h: np.ndarray,
    h2: np.ndarray,
    p: float,
    maps: DuplicationMaps,
    cfg: BarrierConfig,
) -> SaddleState:
    """One damped Newton step T dz = -r(z) with structure-preserving update."""
    m = state.r_cov.r.shape[0]
    d, e = state.noise.d, state.noise.e
    residual, hess = kkt_system(state, h, h2, p, maps)
    base_norm = float(np.linalg.norm(residual))
    try:
        dz = np.linalg.solve(hess, -residual)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"Newton system is singular: {exc}") from exc
    if not np.all(np.isfinite(dz)):
        raise SingularSystem("Newton update contains non-finite entries")
    # map back to matrix space; Hermitization enforces the conjugate pairing
    # of the lifted coordinates exactly
    dr, dn = unpack_z(dz, m, d, e, maps)
    dz = pack_z(dr, dn, maps)
    z0 = pack_z(state.r_cov.r, state.noise.n_block, maps)

    def norm_at(z: np.ndarray):
        r_cand, n_cand = unpack_z(z, m, d, e, maps)
        return _feasible_residual_norm(
            r_cand, n_cand, h, h2, p, float(state.t), maps
        )

    z_new, _, new_norm = backtracking_search(
        z0, dz, norm_at, base_norm, cfg.alpha, cfg.beta, cfg.max_backtrack
    )
    r_new, n_new = unpack_z(z_new, m, d, e, maps)
    return SaddleState(
        r_cov=TransmitCovariance(r=r_new, p=p),
        noise=NoiseCov(n_block=n_new),
        t=state.t,
        residual_norm=new_norm,
    )


@dataclass(frozen=True)
class SaddleTraceRow:
    """One Newton step of the barrier solve (for convergence reporting)."""

    t: float
    newton_step: int
    residual_norm: float
    f_value: float
    c_value: float


@dataclass(frozen=True)
class SaddleResult:
    r_opt: TransmitCovariance
    secrecy_rate: float
    rates: RateTriple
    trace: list[SaddleTraceRow] = field(default_factory=list)
    newton_steps: int = 0


def _f_and_c(
    r: np.ndarray, noise: NoiseCov, h: np.ndarray, h1: np.ndarray, h2: np.ndarray
) -> tuple[float, float]:
    """Saddle objective f(R, K) and secrecy objective C(R), both in bits."""
    k = noise.k
    f = (
        log_det_pd(hermitize(k + h @ r @ h.conj().T))
        - log_det_pd(k)
        - log_det_pd(hermitize(np.eye(h2.shape[0]) + h2 @ r @ h2.conj().T))
    )
    rates = rates_from_effective(h1, h2, r)
    return f, rates.c_s


def solve_saddle(
    h1: np.ndarray,
    h2: np.ndarray,
    p: float,
    cfg: BarrierConfig | None = None,
    r0: np.ndarray | None = None,
    n0: np.ndarray | None = None,
    collect_trace: bool = False,
) -> SaddleResult:
    """Solve the fixed-phase secrecy problem via the barrier method.

    Starts from the strictly feasible default R0 = (p / 2m) I, K0 = I unless
    a warm start is supplied, runs Newton to |r(z)| <= eps1 for each barrier
    value t = t0 * mu^k <= t_max, and reports the final covariance together
    with its secrecy rate C(R) = C_B - C_E.
    """
    cfg = cfg or BarrierConfig()
    d, m = h1.shape
    e = h2.shape[0]
    if h2.shape[1] != m:
        raise ValueError("h1 and h2 must share the transmit dimension")
    if p <= 0:
        raise ValueError("power budget must be positive")
    maps = duplication_maps(m, d, e)
    h = np.vstack([h1, h2])
    r = hermitize(np.asarray(r0, dtype=complex)) if r0 is not None else (
        (p / (2.0 * m)) * np.eye(m, dtype=complex)
    )
    n_block = (
        np.asarray(n0, dtype=complex) if n0 is not None
        else np.zeros((e, d), dtype=complex)
    )

    trace: list[SaddleTraceRow] = []
    steps_total = 0
    t = cfg.t0
    while True:
        state = SaddleState(
            r_cov=TransmitCovariance(r=r, p=p), noise=NoiseCov(n_block=n_block), t=t
        )
        norm = _feasible_residual_norm(r, n_block, h, h2, p, t, maps)
        if norm is None:
            raise InfeasiblePoint("starting point is not strictly feasible")
        state = SaddleState(state.r_cov, state.noise, t, residual_norm=norm)
        k_step = 0
        stalled = 0
        while state.residual_norm > cfg.eps1:
            if k_step >= cfg.max_newton:
                raise IterationCap(
                    f"Newton did not reach eps1={cfg.eps1:g} within "
                    f"{cfg.max_newton} steps at t={t:g}"
                )
            prev_norm = state.residual_norm
            state = newton_iterate(state, h, h2, p, maps, cfg)
            k_step += 1
            steps_total += 1
            if collect_trace:
                f_val, c_val = _f_and_c(state.r_cov.r, state.noise, h, h1, h2)
                trace.append(
                    SaddleTraceRow(
                        t=t,
                        newton_step=k_step,
                        residual_norm=state.residual_norm,
                        f_value=f_val,
                        c_value=c_val,
                    )
                )
            # when the minimizing K approaches the cone boundary, cancellation
            # in the gradient floors the attainable residual; stop the phase
            # once progress falls below double precision
            if prev_norm - state.residual_norm <= 1e-12 * prev_norm:
                stalled += 1
                if stalled >= 3:
                    break
            else:
                stalled = 0
        r, n_block = state.r_cov.r, state.noise.n_block
        t_next = cfg.mu * t
        if t_next > cfg.t_max:
            break
        t = t_next

    rates = rates_from_effective(h1, h2, r)
    return SaddleResult(
        r_opt=TransmitCovariance(r=r, p=p),
        secrecy_rate=rates.c_s,
        rates=rates,
        trace=trace,
        newton_steps=steps_total,
    )
