"""Channel model: fading generation, effective channels and rate evaluation.

All links are the product of large-scale path loss and i.i.d. unit-variance
circularly-symmetric complex Gaussian small-scale fading.  Receiver noise is
normalized to unit variance by folding the noise power into the receiver-side
channel matrices, so every rate below is relative to unit noise.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .numerics import TransmitCovariance, check_finite, hermitize, log_det_pd

UNIT_MODULUS_TOL = 1e-12


@dataclass(frozen=True)
class Dims:
    """Antenna counts at Alice/Bob/Eve and reflecting element count."""

    m: int
    d: int
    e: int
    n: int

    def __post_init__(self):
        if min(self.m, self.d, self.e, self.n) < 1:
            raise ValueError("all dimensions must be >= 1")


@dataclass(frozen=True)
class LinkDistances:
    """Link distances in meters (all >= 1 so the path-loss reference applies)."""

    alice_bob: float = 80.0
    alice_irs: float = 30.0
    alice_eve: float = 80.0
    irs_bob: float = 40.0
    irs_eve: float = 40.0

    def __post_init__(self):
        for name, v in self.__dict__.items():
            if v <= 0:
                raise ValueError(f"distance {name} must be positive")


@dataclass(frozen=True)
class ScenarioConfig:
    """Monte-Carlo scenario description.

    ``noise_power_dbm`` sets the receiver noise floor folded into the
    receiver-side links (30 dBm = unit noise power, leaving the raw path-loss
    convention untouched).
    """

    dims: Dims
    distances: LinkDistances = field(default_factory=LinkDistances)
    path_loss_ref_db: float = -30.0
    path_loss_exponent: float = 3.0
    power_dbm: float = 35.0
    qos_gamma: float = 3.0
    trials: int = 100
    rng_seed: int = 0
    noise_power_dbm: float = 30.0

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


@dataclass(frozen=True)
class ChannelSet:
    """The five complex channel matrices of the Alice/Bob/Eve/IRS geometry."""

    h_ab: np.ndarray  # d x m
    h_ae: np.ndarray  # e x m
    h_ai: np.ndarray  # n x m
    h_ib: np.ndarray  # d x n
    h_ie: np.ndarray  # e x n

    @property
    def dims(self) -> Dims:
        d, m = self.h_ab.shape
        e = self.h_ae.shape[0]
        n = self.h_ai.shape[0]
        return Dims(m=m, d=d, e=e, n=n)

    def validate(self) -> None:
        dims = self.dims
        shapes = {
            "h_ab": (dims.d, dims.m),
            "h_ae": (dims.e, dims.m),
            "h_ai": (dims.n, dims.m),
            "h_ib": (dims.d, dims.n),
            "h_ie": (dims.e, dims.n),
        }
        for name, shape in shapes.items():
            mat = check_finite(getattr(self, name), name)
            if mat.shape != shape:
                raise ValueError(f"{name} has shape {mat.shape}, expected {shape}")

    def with_blocked_direct(self) -> "ChannelSet":
        """Zero the Alice-Bob and Alice-Eve direct links."""
        return replace(
            self, h_ab=np.zeros_like(self.h_ab), h_ae=np.zeros_like(self.h_ae)
        )

    def with_eve_removed(self) -> "ChannelSet":
        """Zero every Eve-side link (used by the Bob-only phase updates)."""
        return replace(
            self, h_ae=np.zeros_like(self.h_ae), h_ie=np.zeros_like(self.h_ie)
        )


def identity_phases(n: int) -> np.ndarray:
    """Unit phase shifts q_i = 1 for all elements (the 'zero phase' baseline)."""
    return np.ones(n, dtype=complex)


def no_irs_phases(n: int) -> np.ndarray:
    """All-zero reflection vector encoding the 'no IRS' baseline."""
    return np.zeros(n, dtype=complex)


def check_phases(q: np.ndarray) -> np.ndarray:
    """Validate the unit-modulus constraint (or the all-zero no-IRS vector)."""
    q = np.asarray(q, dtype=complex)
    if q.ndim != 1:
        raise ValueError("phase shifts must be a vector")
    if np.all(q == 0):
        return q
    if np.max(np.abs(np.abs(q) - 1.0)) > UNIT_MODULUS_TOL:
        raise ValueError("phase shifts violate the unit modulus constraint")
    return q


def power_from_dbm(dbm: float) -> float:
    """Transmit power in watts from dBm."""
    return 10.0 ** ((dbm - 30.0) / 10.0)


def path_loss_gain(distance_m: float, ref_db: float, exponent: float) -> float:
    """Linear power gain 10^(ref_db/10) * distance^(-exponent)."""
    if distance_m < 1.0:
        raise ValueError("path-loss model is defined for distances >= 1 m")
    return 10.0 ** (ref_db / 10.0) * distance_m ** (-exponent)


def _cn_matrix(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """i.i.d. CN(0, 1) entries."""
    return (
        rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    ) / np.sqrt(2.0)


def generate_channels(cfg: ScenarioConfig, rng: np.random.Generator) -> ChannelSet:
    """Draw one channel realization: sqrt(link gain) times CN(0,1) fading.

    Receiver-side links (to Bob and Eve) are divided by the noise standard
    deviation so that downstream rate expressions can assume unit noise.
    """
    dims = cfg.dims
    gain = {
        "ab": path_loss_gain(
            cfg.distances.alice_bob, cfg.path_loss_ref_db, cfg.path_loss_exponent
        ),
        "ae": path_loss_gain(
            cfg.distances.alice_eve, cfg.path_loss_ref_db, cfg.path_loss_exponent
        ),
        "ai": path_loss_gain(
            cfg.distances.alice_irs, cfg.path_loss_ref_db, cfg.path_loss_exponent
        ),
        "ib": path_loss_gain(
            cfg.distances.irs_bob, cfg.path_loss_ref_db, cfg.path_loss_exponent
        ),
        "ie": path_loss_gain(
            cfg.distances.irs_eve, cfg.path_loss_ref_db, cfg.path_loss_exponent
        ),
    }
    noise_std = np.sqrt(power_from_dbm(cfg.noise_power_dbm))
    # draw order is fixed so a given rng state maps to a unique ChannelSet
    h_ab = np.sqrt(gain["ab"]) / noise_std * _cn_matrix(rng, dims.d, dims.m)
    h_ae = np.sqrt(gain["ae"]) / noise_std * _cn_matrix(rng, dims.e, dims.m)
    h_ai = np.sqrt(gain["ai"]) * _cn_matrix(rng, dims.n, dims.m)
    h_ib = np.sqrt(gain["ib"]) / noise_std * _cn_matrix(rng, dims.d, dims.n)
    h_ie = np.sqrt(gain["ie"]) / noise_std * _cn_matrix(rng, dims.e, dims.n)
    return ChannelSet(h_ab=h_ab, h_ae=h_ae, h_ai=h_ai, h_ib=h_ib, h_ie=h_ie)


def trial_rng(rng_seed: int, trial_index: int) -> np.random.Generator:
    """Independent per-trial stream derived from (seed, trial index)."""
    return np.random.default_rng([rng_seed, trial_index])


def effective_channels(ch: ChannelSet, q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """H1 = H_AB + H_IB diag(q) H_AI and H2 = H_AE + H_IE diag(q) H_AI."""
    q = check_phases(q)
    # h_ib * q scales column i of H_IB by q_i, i.e. H_IB diag(q)
    h1 = ch.h_ab + (ch.h_ib * q[np.newaxis, :]) @ ch.h_ai
    h2 = ch.h_ae + (ch.h_ie * q[np.newaxis, :]) @ ch.h_ai
    return h1, h2


@dataclass(frozen=True)
class RateTriple:
    """Bob rate, Eve rate and their difference, all in bits."""

    c_b: float
    c_e: float
    c_s: float


def capacity(h: np.ndarray, r: np.ndarray) -> float:
    """log2|I + h r h^H| for a PSD covariance r."""
    gram = h @ r @ h.conj().T
    return log_det_pd(np.eye(h.shape[0]) + hermitize(gram))


def rates_from_effective(
    h1: np.ndarray, h2: np.ndarray, r: np.ndarray
) -> RateTriple:
    """Rate triple for explicit effective channels."""
    c_b = capacity(h1, r)
    c_e = capacity(h2, r)
    return RateTriple(c_b=c_b, c_e=c_e, c_s=c_b - c_e)


def secrecy_rate(ch: ChannelSet, q: np.ndarray, r: TransmitCovariance) -> RateTriple:
    """Secrecy rate C_s = C_B - C_E at phase shifts q and covariance r."""
    h1, h2 = effective_channels(ch, q)
    return rates_from_effective(h1, h2, r.r)
