"""Pluggable neural-receiver stand-in exposing the R3 receive interface.

The surrogate injects configurable behavior regimes instead of running a
CNN: a true-CSI receiver with an estimation penalty (the in-distribution
regime), a silent-failure injector producing well-formed but sign-corrupted
LLRs, a miscalibrated variant, and a hard failure that yields no LLRs at
all.  Ground-truth knowledge (true channel, true bits) is quarantined here;
detectors downstream never see it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .channel import ChannelRealization
from .grid import ModulationScheme, ResourceGrid
from .rxchain import L_MAX, ChannelEstimate, LlrVector, mmse_equalize, soft_demap

# Reference estimation penalty used when building in-distribution magnitude
# profiles and as the sign baseline for the silent-failure injector.
DEFAULT_GENIE_ALPHA = 0.15
PROFILE_QUANTILES = 1024


@dataclass(frozen=True)
class GenieBoost:
    """True-CSI receive with noise variance inflated by (1 + alpha)."""

    alpha: float = DEFAULT_GENIE_ALPHA

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must be in [0, 1]")


@dataclass(frozen=True)
class SilentFailure:
    """Sign flips on a seeded fraction of bits.

    Flipped bits draw fresh magnitudes from the in-distribution profile so
    the corruption carries plausible confidence; the remaining bits keep
    their genuine LLRs, which are in-distribution by construction.
    """

    p_wrong: float
    magnitude_source: str = "profile"  # "profile" | "genie"

    def __post_init__(self):
        if not 0.0 <= self.p_wrong <= 1.0:
            raise ValueError("p_wrong must be in [0, 1]")
        if self.magnitude_source not in ("profile", "genie"):
            raise ValueError("magnitude_source must be 'profile' or 'genie'")


@dataclass(frozen=True)
class Miscalibrated:
    """Genie LLRs scaled down and perturbed with Gaussian noise."""

    scale: float = 0.5
    extra_noise: float = 0.5

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("scale must be > 0")
        if self.extra_noise < 0:
            raise ValueError("extra_noise must be >= 0")


@dataclass(frozen=True)
class HardFailureMode:
    """Architecturally incompatible configuration; produces no LLRs."""


SurrogateMode = Union[GenieBoost, SilentFailure, Miscalibrated, HardFailureMode]


@dataclass
class HardFailure:
    """Returned (never raised) when the surrogate cannot produce LLRs."""

    reason: str


def ks_statistic(sample: np.ndarray, reference: np.ndarray) -> float:
    """KS distance between a sample and a reference sample's step CDF.

    Tie-aware: the empirical CDF is compared at each distinct value from
    above and below, so atoms (e.g. mass at the clip value) are handled
    exactly.
    """
    sample = np.sort(np.asarray(sample, dtype=float))
    reference = np.sort(np.asarray(reference, dtype=float))
    n, m = sample.size, reference.size
    values, first = np.unique(sample, return_index=True)
    counts = np.diff(np.append(first, n))
    emp_hi = (first + counts) / n  # F_n(v)
    emp_lo = first / n  # F_n(v-)
    ref_hi = np.searchsorted(reference, values, side="right") / m  # F(v)
    ref_lo = np.searchsorted(reference, values, side="left") / m  # F(v-)
    return float(
        max(np.max(np.abs(emp_hi - ref_hi)), np.max(np.abs(emp_lo - ref_lo)))
    )


@dataclass
class MagnitudeProfile:
    """In-distribution |LLR| magnitudes at one operating point.

    `quantiles` is the pooled quantile table used for sampling; `references`
    holds one quantile table per reference slot, capturing the spread of
    per-slot magnitude distributions across fading realizations (the
    "normal operating range").
    """

    quantiles: np.ndarray
    references: np.ndarray | None = None  # (n_ref, n_q)

    def __post_init__(self):
        self.quantiles = np.sort(np.asarray(self.quantiles, dtype=float))
        if self.references is not None:
            self.references = np.sort(
                np.asarray(self.references, dtype=float), axis=1
            )

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Inverse-CDF draws; atoms (e.g. the clip value) keep their mass."""
        u = rng.uniform(0.0, 1.0, size=n)
        idx = np.minimum((u * self.quantiles.size).astype(int), self.quantiles.size - 1)
        return self.quantiles[idx]

    def cdf(self, x: np.ndarray) -> np.ndarray:
        """Right-continuous step CDF over the pooled quantile sample."""
        pos = np.searchsorted(self.quantiles, x, side="right")
        return pos / self.quantiles.size

    def distance(self, magnitudes: np.ndarray) -> float:
        """KS distance to the nearest in-distribution slot profile."""
        if self.references is None:
            return ks_statistic(magnitudes, self.quantiles)
        return min(ks_statistic(magnitudes, ref) for ref in self.references)


class MagnitudeProfileStore:
    """Cache of in-distribution magnitude profiles, built on demand.

    The builder runs genie-mode slots at the requested operating point and
    returns one |LLR| sample array per slot; computing a missing profile
    therefore costs a few extra slot simulations.
    """

    def __init__(self, builder: Callable[[ModulationScheme, float], list]):
        self._builder = builder
        self._cache: dict[tuple[str, float], MagnitudeProfile] = {}

    def get(self, scheme: ModulationScheme, snr_db: float) -> MagnitudeProfile:
        key = (scheme.name, round(float(snr_db), 6))
        if key not in self._cache:
            per_slot = [
                np.abs(np.asarray(m, dtype=float))
                for m in self._builder(scheme, snr_db)
            ]
            probs = np.linspace(0.0, 1.0, PROFILE_QUANTILES)
            pooled = np.quantile(np.concatenate(per_slot), probs)
            refs = np.stack([np.quantile(m, probs) for m in per_slot])
            self._cache[key] = MagnitudeProfile(pooled, references=refs)
        return self._cache[key]


def in_distribution_magnitude_profile(
    store: MagnitudeProfileStore, scheme: ModulationScheme, snr_db: float
) -> MagnitudeProfile:
    return store.get(scheme, snr_db)


def _genie_llrs(
    rx: ResourceGrid, true_channel: ChannelRealization, alpha: float
) -> np.ndarray:
    est = ChannelEstimate(
        h_hat=true_channel.h,
        noise_var_hat=true_channel.noise_var * (1.0 + alpha),
        method="perfect",
    )
    x_hat, post_sinr = mmse_equalize(rx, est)
    return soft_demap(x_hat, post_sinr, rx.config.modulation)


def receive_r3(
    rx: ResourceGrid,
    true_channel: ChannelRealization,
    true_bits: np.ndarray,
    mode: SurrogateMode,
    seed,
    profile: MagnitudeProfile | None = None,
) -> LlrVector | HardFailure:
    """Produce the surrogate's bit-LLR stream (or a hard failure) for one slot."""
    if isinstance(mode, HardFailureMode):
        qm = rx.config.modulation.bits_per_symbol
        return HardFailure(
            f"output tensor provides 4 bit channels per RE, modulation needs {qm}"
        )
    if isinstance(mode, GenieBoost):
        return LlrVector(_genie_llrs(rx, true_channel, mode.alpha), "R3")
    rng = np.random.default_rng(seed)
    if isinstance(mode, Miscalibrated):
        raw = _genie_llrs(rx, true_channel, 0.0)
        noisy = mode.scale * raw + mode.extra_noise * rng.standard_normal(raw.size)
        return LlrVector(np.clip(noisy, -L_MAX, L_MAX), "R3")
    if isinstance(mode, SilentFailure):
        raw = _genie_llrs(rx, true_channel, DEFAULT_GENIE_ALPHA)
        n = raw.size
        signs = np.where(raw < 0, -1.0, 1.0)
        mags = np.abs(raw)
        n_flip = int(round(mode.p_wrong * n))
        flip_idx = rng.choice(n, size=n_flip, replace=False)
        signs[flip_idx] *= -1.0
        if mode.magnitude_source == "profile":
            if profile is None:
                raise ValueError("silent_failure with magnitude_source='profile' needs a profile")
            mags[flip_idx] = profile.sample(rng, n_flip)
        return LlrVector(signs * mags, "R3")
    raise TypeError(f"unknown surrogate mode {mode!r}")
