"""SIMO fading channel: TDL profiles, Jakes-style Doppler, per-RE application.

The channel is applied entirely in the frequency domain (ideal CP assumed):
each tap carries an independent sum-of-sinusoids fading process per receive
antenna, and the per-RE response is the DFT of the tap line at each
subcarrier, evaluated at each OFDM symbol's time instant.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field, replace

import numpy as np

from .grid import ConfigError, ResourceGrid, SlotConfig

SUBCARRIER_SPACING_HZ = 15e3
SLOT_DURATION_S = 1e-3
N_SCATTERERS = 16
DEFAULT_RICIAN_K_DB = 10.0


@dataclass(frozen=True)
class TdlProfile:
    name: str
    delays_s: np.ndarray
    powers_db: np.ndarray
    los: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        if self.delays_s.size == 0:
            raise ConfigError(f"profile {self.name!r} has no taps")
        if np.any(self.delays_s < 0):
            raise ConfigError("tap delays must be non-negative")
        order = np.argsort(self.delays_s, kind="stable")
        for name_ in ("delays_s", "powers_db", "los"):
            object.__setattr__(self, name_, getattr(self, name_)[order])
        if not self.normalized:
            lin = 10.0 ** (self.powers_db / 10.0)
            object.__setattr__(
                self, "powers_db", 10.0 * np.log10(lin / lin.sum())
            )
            object.__setattr__(self, "normalized", True)

    @property
    def powers_lin(self) -> np.ndarray:
        return 10.0 ** (self.powers_db / 10.0)

    @property
    def n_taps(self) -> int:
        return self.delays_s.size


@dataclass(frozen=True)
class SnrSpec:
    """Per-rx-antenna Es/N0 with unit signal energy per resource element."""

    snr_db: float

    @property
    def noise_var(self) -> float:
        return 10.0 ** (-self.snr_db / 10.0)


@dataclass
class ChannelRealization:
    h: np.ndarray  # [subcarrier, symbol, rx_antenna]
    noise_var: float
    profile: TdlProfile
    doppler_hz: float
    delay_spread_s: float
    tap_gains: np.ndarray = field(repr=False, default=None)  # [tap, symbol, rx]
    tap_delays_s: np.ndarray = field(repr=False, default=None)


def rms_delay_spread(profile: TdlProfile) -> float:
    """Power-weighted RMS spread of the tap delays."""
    p = profile.powers_lin
    mean = float(np.sum(p * profile.delays_s))
    second = float(np.sum(p * profile.delays_s**2))
    return float(np.sqrt(max(second - mean**2, 0.0)))


def scale_delay_spread(profile: TdlProfile, target_rms: float) -> TdlProfile:
    """Rescale all tap delays by one scalar so the RMS delay spread hits target."""
    current = rms_delay_spread(profile)
    if target_rms == 0.0:
        if current > 0.0:
            raise ConfigError(
                f"cannot scale profile {profile.name!r} to zero delay spread"
            )
        return replace(profile, delays_s=profile.delays_s.copy())
    if current == 0.0:
        raise ConfigError(
            f"profile {profile.name!r} has zero delay spread; "
            f"target {target_rms} is unachievable by scaling"
        )
    return replace(profile, delays_s=profile.delays_s * (target_rms / current))


def load_tdl_profiles(path=None) -> dict[str, TdlProfile]:
    """Parse the bundled (or given) plain-text profile table."""
    if path is None:
        ref = importlib.resources.files("rollbackrx.data") / "tdl_profiles.txt"
        text = ref.read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    profiles: dict[str, TdlProfile] = {}
    name = None
    rows: list[tuple[float, float, int]] = []

    def flush():
        if name is not None:
            profiles[name] = TdlProfile(
                name=name,
                delays_s=np.array([r[0] for r in rows]) * 1e-9,
                powers_db=np.array([r[1] for r in rows]),
                los=np.array([bool(r[2]) for r in rows]),
            )

    aliases = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "profile":
            flush()
            name, rows = parts[1], []
        elif parts[0] == "alias":
            aliases.append((parts[1], parts[2]))
        else:
            if name is None:
                raise ConfigError(f"line {lineno}: tap row before any profile")
            try:
                rows.append((float(parts[0]), float(parts[1]), int(parts[2])))
            except (ValueError, IndexError) as exc:
                raise ConfigError(f"line {lineno}: bad tap row {raw!r}") from exc
    flush()
    for alias, target in aliases:
        profiles[alias] = replace(profiles[target], name=alias)
    return profiles


def _symbol_times(slot: SlotConfig) -> np.ndarray:
    return np.arange(slot.n_symbols) * (SLOT_DURATION_S / 14.0)


def realize_channel(
    profile: TdlProfile,
    delay_spread_s: float,
    doppler_hz: float,
    slot: SlotConfig,
    seed,
    rician_k_db: float = DEFAULT_RICIAN_K_DB,
) -> ChannelRealization:
    """Draw one slot's channel: Jakes sum-of-sinusoids per tap per antenna.

    Each tap uses N_SCATTERERS equal-power rays with seeded random arrival
    angles and phases; LOS-flagged taps split their power between a specular
    ray and the diffuse sum using the given K-factor.  E[|h|^2] = 1 per
    antenna by construction.
    """
    if doppler_hz < 0:
        raise ConfigError("doppler_hz must be non-negative")
    prof = scale_delay_spread(profile, delay_spread_s)
    rng = np.random.default_rng(seed)
    times = _symbol_times(slot)
    n_taps, n_rx = prof.n_taps, slot.n_rx
    k_lin = 10.0 ** (rician_k_db / 10.0)

    # Diffuse rays: angle -> Doppler frequency, phase uniform.
    angles = rng.uniform(0.0, 2.0 * np.pi, size=(n_taps, n_rx, N_SCATTERERS))
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(n_taps, n_rx, N_SCATTERERS))
    los_angle = rng.uniform(0.0, 2.0 * np.pi, size=(n_taps, n_rx))
    los_phase = rng.uniform(0.0, 2.0 * np.pi, size=(n_taps, n_rx))

    omega = 2.0 * np.pi * doppler_hz * np.cos(angles)  # rad/s per ray
    arg = omega[..., None] * times + phases[..., None]
    diffuse = np.exp(1j * arg).sum(axis=2) / np.sqrt(N_SCATTERERS)

    power = prof.powers_lin[:, None, None]
    los_mask = prof.los[:, None, None]
    diffuse_scale = np.where(los_mask, 1.0 / (k_lin + 1.0), 1.0)
    gains = np.sqrt(power * diffuse_scale) * diffuse
    if np.any(prof.los):
        w_los = 2.0 * np.pi * doppler_hz * np.cos(los_angle)
        specular = np.exp(1j * (w_los[..., None] * times + los_phase[..., None]))
        gains = gains + np.where(
            los_mask, np.sqrt(power * k_lin / (k_lin + 1.0)), 0.0
        ) * specular

    freqs = np.arange(slot.n_subcarriers) * SUBCARRIER_SPACING_HZ
    # H[k,l,r] = sum_t g[t,l,r] * exp(-2j*pi*f_k*tau_t)
    gains_tlr = np.transpose(gains, (0, 2, 1))  # (tap, symbol, rx)
    steering = np.exp(-2j * np.pi * freqs[:, None] * prof.delays_s[None, :])
    h = np.einsum("kt,tlr->klr", steering, gains_tlr)
    return ChannelRealization(
        h=h,
        noise_var=0.0,
        profile=prof,
        doppler_hz=doppler_hz,
        delay_spread_s=delay_spread_s,
        tap_gains=gains_tlr,
        tap_delays_s=prof.delays_s,
    )


def apply_channel(tx: ResourceGrid, ch: ChannelRealization, seed) -> ResourceGrid:
    """y[k,l,r] = h[k,l,r] * x[k,l] + CN(0, noise_var) per receive antenna."""
    if tx.samples.shape[2] != 1:
        raise ValueError("transmit grid must be single-antenna")
    if ch.h.shape[:2] != tx.samples.shape[:2]:
        raise ValueError(
            f"channel dims {ch.h.shape[:2]} do not match grid {tx.samples.shape[:2]}"
        )
    rng = np.random.default_rng(seed)
    y = ch.h * tx.samples  # broadcast over rx antennas
    if ch.noise_var > 0:
        scale = np.sqrt(ch.noise_var / 2.0)
        noise = rng.normal(0.0, scale, size=y.shape) + 1j * rng.normal(
            0.0, scale, size=y.shape
        )
        y = y + noise
    cfg = replace_rx(tx.config, ch.h.shape[2])
    return ResourceGrid(samples=y, config=cfg)


def replace_rx(slot: SlotConfig, n_rx: int) -> SlotConfig:
    from dataclasses import replace as dc_replace

    return dc_replace(slot, n_rx=n_rx) if slot.n_rx != n_rx else slot
