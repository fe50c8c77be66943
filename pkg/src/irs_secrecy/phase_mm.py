"""Minorization-maximization phase optimizer for the blocked-direct-link case.

Maximizes g(Q) = log2|I + H_IB Q L Q^H H_IB^H| with L = H_AI R H_AI^H over
unit-modulus phases by iterating a closed-form update of a touching lower
bound.  The bound is built from three successive relaxations: concavity of
log-det, convexity of the matrix fractional function, and an isotropic
quadratic upper bound on q^H Z q.  All scalars are kept in bits so the
surrogate touches g exactly at the expansion point.
"""

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet, check_phases
from .errors import IterationCap
from .numerics import (
    LN2,
    TransmitCovariance,
    check_hermitian,
    hermitize,
    log_det_pd,
    max_eigenvalue_herm,
)

MM_DEFAULT_TOL = 1e-4
MM_MAX_ITER = 500


@dataclass(frozen=True)
class MmState:
    """Surrogate data at the expansion point q_tilde."""

    q_tilde: np.ndarray
    l_half: np.ndarray  # n x n PSD square root of L
    p_tilde: np.ndarray  # d x n
    q_tilde_b: np.ndarray  # d x d, I - P (I + P^H P)^-1 P^H
    j_b: np.ndarray  # d x n, P (I + P^H P)^-1
    a1: np.ndarray  # d x n
    a2: np.ndarray  # n x n
    a3: np.ndarray  # n x d
    a4_diag: np.ndarray  # length n
    z: np.ndarray  # n x n Hermitian PSD
    lam1_z: float
    const_terms: float


def _psd_sqrt(a: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(hermitize(a))
    vals = np.clip(vals, 0.0, None)
    return hermitize((vecs * np.sqrt(vals)[np.newaxis, :]) @ vecs.conj().T)


def blocked_link_objective(
    q: np.ndarray, r: TransmitCovariance, ch: ChannelSet
) -> float:
    """g(Q) = log2|I + H_IB Q L Q^H H_IB^H| (direct link ignored)."""
    q = check_phases(q)
    l_mat = hermitize(ch.h_ai @ r.r @ ch.h_ai.conj().T)
    p = (ch.h_ib * q[np.newaxis, :]) @ _psd_sqrt(l_mat)
    gram = np.eye(ch.h_ib.shape[0]) + p @ p.conj().T
    return log_det_pd(hermitize(gram))


def build_mm_state(
    q_tilde: np.ndarray, r: TransmitCovariance, ch: ChannelSet
) -> MmState:
    """Assemble the surrogate quantities at the expansion point q_tilde."""
    q_tilde = check_phases(q_tilde).copy()
    n = q_tilde.shape[0]
    d = ch.h_ib.shape[0]
    l_half = _psd_sqrt(ch.h_ai @ r.r @ ch.h_ai.conj().T)
    p_tilde = (ch.h_ib * q_tilde[np.newaxis, :]) @ l_half
    gram = np.eye(n) + p_tilde.conj().T @ p_tilde
    j_b = np.linalg.solve(gram.conj().T, p_tilde.conj().T).conj().T  # P (I+P^H P)^-1
    q_tilde_b = hermitize(np.eye(d) - j_b @ p_tilde.conj().T)
    qb_inv = hermitize(np.linalg.inv(q_tilde_b))
    a1 = qb_inv @ j_b @ l_half
    a2 = hermitize(ch.h_ib.conj().T @ ch.h_ib)
    a3 = l_half @ j_b.conj().T
    a4_full = ch.h_ib.conj().T @ qb_inv @ j_b @ l_half
    z = hermitize(a2 * (a3 @ a1).T) / LN2
    # constant part pinning the surrogate to g at q = q_tilde (bits)
    jp = j_b @ p_tilde.conj().T
    const = (
        -log_det_pd(q_tilde_b) * LN2
        + 2.0 * d
        - 2.0 * float(np.real(np.trace(qb_inv)))
        + float(np.real(np.trace(qb_inv @ jp @ jp.conj().T)))
    ) / LN2
    return MmState(
        q_tilde=q_tilde,
        l_half=l_half,
        p_tilde=p_tilde,
        q_tilde_b=q_tilde_b,
        j_b=j_b,
        a1=a1,
        a2=a2,
        a3=a3,
        a4_diag=np.diag(a4_full) / LN2,
        z=z,
        lam1_z=max_eigenvalue_herm(z),
        const_terms=float(const),
    )


def surrogate_value(q: np.ndarray, state: MmState) -> float:
    """Touching lower bound of g at unit-modulus q, expanded at q_tilde."""
    q = check_phases(q)
    n = q.shape[0]
    qt = state.q_tilde
    lam = state.lam1_z
    shifted = lam * qt - state.z @ qt
    value = (
        -2.0 * n * lam
        + 2.0 * float(np.real(q.conj() @ shifted))
        + float(np.real(qt.conj() @ state.z @ qt))
        + 2.0 * float(np.real(q.conj() @ state.a4_diag))
        + state.const_terms
    )
    return value


def mm_update(state: MmState) -> np.ndarray:
    """Closed-form maximizer of the surrogate: align q with v.

    v = (lam1(Z) I - Z) q_tilde + a4; elements with v_i = 0 keep the
    incumbent phase (preserves the ascent property).
    """
    v = state.lam1_z * state.q_tilde - state.z @ state.q_tilde + state.a4_diag
    q = np.where(v == 0, state.q_tilde, np.exp(1j * np.angle(v)))
    return q.astype(complex)


def mm_solve(
    r: TransmitCovariance,
    ch: ChannelSet,
    tol: float = MM_DEFAULT_TOL,
    max_iter: int = MM_MAX_ITER,
) -> np.ndarray:
    """Iterate surrogate maximization from Q_tilde = I until the surrogate
    value stalls (relative change <= tol); returns a KKT point of the
    blocked-link phase problem."""
    n = ch.h_ai.shape[0]
    q_tilde = np.ones(n, dtype=complex)
    state = build_mm_state(q_tilde, r, ch)
    value_prev = surrogate_value(q_tilde, state)  # equals g(Q_tilde)
    for _ in range(max_iter):
        q = mm_update(state)
        value = surrogate_value(q, state)
        if abs(value - value_prev) <= tol * (1e-12 + abs(value_prev)):
            return q
        q_tilde = q
        state = build_mm_state(q_tilde, r, ch)
        value_prev = value
    raise IterationCap(f"MM did not converge within {max_iter} iterations")


def check_surrogate_state(state: MmState) -> None:
    """Sanity checks used by tests: Z Hermitian PSD, lam1 consistent."""
    check_hermitian(state.z, "mm Z")
    eigs = np.linalg.eigvalsh(state.z)
    if eigs[0] < -1e-9 * max(1.0, eigs[-1]):
        raise ValueError(f"Z is not PSD (min eigenvalue {eigs[0]:.3e})")
    if abs(eigs[-1] - state.lam1_z) > 1e-9 * max(1.0, abs(eigs[-1])):
        raise ValueError("cached lam1(Z) is stale")
