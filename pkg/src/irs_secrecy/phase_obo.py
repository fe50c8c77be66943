"""One-by-one phase-shift optimization.

Each reflecting coefficient q_i is optimized in closed form with the other
n - 1 held fixed.  For element i the Bob/Eve rates decompose as

    C_B = log2|I + q_i A_i^-1 B_i + q_i^* A_i^-1 B_i^H| + log2|A_i|

with B_i rank-1 (and likewise C_i, D_i on the Eve side), which collapses the
determinants to c + 2 Re{q lambda} scalars.  Four cases follow from which of
the two trace eigenvalues vanish; the mixed case is a unimodular fractional
program solved by bisection on the Dinkelbach parameter.
"""

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet, check_phases
from .errors import BracketFailure
from .numerics import TransmitCovariance, hermitize

TRACE_ZERO_TOL = 1e-10
DINKELBACH_U_TOL = 1e-10
DINKELBACH_U_MAX = 1e12


@dataclass(frozen=True)
class OboElementData:
    """Single-element subproblem data for reflecting coefficient i.

    lam_bar / lam_tilde are the unique nonzero eigenvalues of A^-1 B and
    C^-1 D; c_bar / c_tilde the constant parts of the scalarized
    determinants, recovered by evaluating at q = 1.
    """

    a_i: np.ndarray
    b_i: np.ndarray
    c_i: np.ndarray
    d_i: np.ndarray
    lam_bar: complex
    lam_tilde: complex
    c_bar: float
    c_tilde: float
    q_incumbent: complex


def _sqrt_factor(r: np.ndarray) -> np.ndarray:
    """U_R Sigma_R^(1/2) from the eigendecomposition of the PSD covariance."""
    vals, vecs = np.linalg.eigh(hermitize(r))
    vals = np.clip(vals, 0.0, None)
    return vecs * np.sqrt(vals)[np.newaxis, :]


def _det_constant(a: np.ndarray, b: np.ndarray, lam: complex) -> float:
    """c such that |I + q A^-1 B + q^* A^-1 B^H| = c + 2 Re{q lam}.

    Recovered by evaluating at q = 1: the determinant equals
    |A + B + B^H| / |A|, both Hermitian so real.
    """
    num = float(np.real(np.linalg.det(a + b + b.conj().T)))
    den = float(np.real(np.linalg.det(a)))
    return num / den - 2.0 * float(np.real(lam))


def element_data(
    i: int, q: np.ndarray, r: TransmitCovariance, ch: ChannelSet
) -> OboElementData:
    """Assemble the A/B/C/D matrices and scalarization for element i."""
    q = check_phases(q)
    n = q.shape[0]
    if not 0 <= i < n:
        raise IndexError(f"element index {i} out of range for n={n}")
    s = _sqrt_factor(r.r)  # m x m, R = s s^H
    hb = ch.h_ab @ s
    he = ch.h_ae @ s
    hai_bar = ch.h_ai @ s  # n x m; row j is t_bar_j^H
    d = ch.h_ib.shape[0]
    e = ch.h_ie.shape[0]

    # sum over j != i of q_j r_j t_bar_j^H, via the full product minus term i
    refl_b = (ch.h_ib * q[np.newaxis, :]) @ hai_bar
    refl_e = (ch.h_ie * q[np.newaxis, :]) @ hai_bar
    t_row = hai_bar[i : i + 1, :]  # t_bar_i^H (1 x m)
    r_col = ch.h_ib[:, i : i + 1]
    s_col = ch.h_ie[:, i : i + 1]
    m_b = hb + refl_b - q[i] * (r_col @ t_row)
    m_e = he + refl_e - q[i] * (s_col @ t_row)

    t_norm_sq = float(np.sum(np.abs(t_row) ** 2))
    a_i = hermitize(np.eye(d) + m_b @ m_b.conj().T + t_norm_sq * (r_col @ r_col.conj().T))
    c_i = hermitize(np.eye(e) + m_e @ m_e.conj().T + t_norm_sq * (s_col @ s_col.conj().T))
    b_i = r_col @ (m_b @ t_row.conj().T).conj().T  # r_i t_bar_i^H M_b^H, rank 1
    d_i = s_col @ (m_e @ t_row.conj().T).conj().T

    lam_bar = complex(np.trace(np.linalg.solve(a_i, b_i)))
    lam_tilde = complex(np.trace(np.linalg.solve(c_i, d_i)))
    return OboElementData(
        a_i=a_i,
        b_i=b_i,
        c_i=c_i,
        d_i=d_i,
        lam_bar=lam_bar,
        lam_tilde=lam_tilde,
        c_bar=_det_constant(a_i, b_i, lam_bar),
        c_tilde=_det_constant(c_i, d_i, lam_tilde),
        q_incumbent=complex(q[i]),
    )


def element_objective(data: OboElementData, q_i: complex) -> float:
    """C'_B(q_i) - C'_E(q_i) in bits for a unit-modulus candidate."""
    num = data.c_bar + 2.0 * np.real(q_i * data.lam_bar)
    den = data.c_tilde + 2.0 * np.real(q_i * data.lam_tilde)
    return float(np.log2(num) - np.log2(den))


def _is_zero(lam: complex, ref: np.ndarray) -> bool:
    scale = 1.0 + float(np.linalg.norm(ref))
    return abs(lam) <= TRACE_ZERO_TOL * scale


def optimize_element(data: OboElementData) -> complex:
    """Closed-form optimal q_i for the single-element subproblem.

    Case 1 (both eigenvalues zero): the objective does not depend on q_i,
    keep the incumbent.  Case 2/3: align with (or against) the single active
    eigenvalue.  Case 4: bisection on u >= 0 for the root of

        g(u) = c_bar - u c_tilde + 2 |lam_bar - u lam_tilde|

    (strictly decreasing), then q_i = exp(-j arg(lam_bar - u lam_tilde)).
    """
    bar_zero = _is_zero(data.lam_bar, data.b_i)
    tilde_zero = _is_zero(data.lam_tilde, data.d_i)
    if bar_zero and tilde_zero:
        return data.q_incumbent
    if not bar_zero and tilde_zero:
        return complex(np.exp(-1j * np.angle(data.lam_bar)))
    if bar_zero and not tilde_zero:
        return complex(np.exp(1j * (np.pi - np.angle(data.lam_tilde))))

    def g(u: float) -> float:
        return (
            data.c_bar
            - u * data.c_tilde
            + 2.0 * abs(data.lam_bar - u * data.lam_tilde)
        )

    lo, hi = 0.0, 1.0
    while g(hi) > 0.0:
        hi *= 2.0
        if hi > DINKELBACH_U_MAX:
            raise BracketFailure(
                "no sign change of the Dinkelbach function up to u = 1e12"
            )
    while hi - lo > DINKELBACH_U_TOL:
        mid = 0.5 * (lo + hi)
        if g(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    u = 0.5 * (lo + hi)
    direction = data.lam_bar - u * data.lam_tilde
    if direction == 0:
        return data.q_incumbent
    return complex(np.exp(-1j * np.angle(direction)))


def obo_sweep(
    q: np.ndarray,
    r: TransmitCovariance,
    ch: ChannelSet,
    mode: str = "wiretap",
) -> np.ndarray:
    """One ordered pass optimizing q_1, ..., q_n with the others fixed.

    mode="bob_only" zeroes the Eve-side links so only cases 1/2 arise and
    the sweep maximizes Bob's rate alone (the rate-feasibility subproblem of
    the power-minimization scheme).
    """
    if mode not in ("wiretap", "bob_only"):
        raise ValueError(f"unknown sweep mode {mode!r}")
    q = check_phases(q).copy()
    work_ch = ch.with_eve_removed() if mode == "bob_only" else ch
    for i in range(q.shape[0]):
        data = element_data(i, q, r, work_ch)
        q[i] = optimize_element(data)
    return q
