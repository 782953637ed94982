"""Conventional receivers: perfect-CSI MMSE (R0) and practical LS+MMSE (R1).

Both produce per-bit LLR vectors over the slot's data REs in the canonical
transmission order, positive LLR meaning bit 0.  Magnitudes are clipped to
L_MAX so downstream arbitration never sees infinities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization
from .grid import (
    ConfigError,
    ModulationScheme,
    PilotSet,
    ResourceGrid,
    constellation,
    data_re_order,
)

L_MAX = 30.0
POST_SINR_CAP = 1e6

STREAM_IDS = ("R0", "R1", "R3", "R5", "R5c", "R5or", "R5and")


@dataclass
class LlrVector:
    llrs: np.ndarray
    stream_id: str

    def __post_init__(self):
        self.llrs = np.asarray(self.llrs, dtype=float)
        if self.stream_id not in STREAM_IDS:
            raise ValueError(f"unknown stream id {self.stream_id!r}")
        if not np.all(np.isfinite(self.llrs)):
            raise ValueError("LLR vector contains NaN or Inf")

    def __len__(self) -> int:
        return self.llrs.size

    def hard_bits(self) -> np.ndarray:
        """Sign decisions with the sgn(0) = +1 convention (zero -> bit 0)."""
        return (self.llrs < 0).astype(np.int64)


@dataclass
class ChannelEstimate:
    h_hat: np.ndarray  # [subcarrier, symbol, rx_antenna]
    noise_var_hat: float
    method: str  # "perfect" | "ls_interp"

    def __post_init__(self):
        if self.noise_var_hat < 0:
            raise ValueError("noise_var_hat must be >= 0")


def _interp_complex(x_new: np.ndarray, x_known: np.ndarray, y: np.ndarray):
    return np.interp(x_new, x_known, y.real) + 1j * np.interp(x_new, x_known, y.imag)


def estimate_channel_ls(rx: ResourceGrid, pilots: PilotSet) -> ChannelEstimate:
    """LS at pilot REs, then bilinear interpolation to the full grid.

    Frequency first (per DMRS symbol), then linear in time between DMRS
    symbols, holding the edge value beyond the outermost pilots.  The noise
    variance is estimated from the deviation of the LS pilot estimates from
    their 3-tap frequency moving average, scaled by 3/2 to remove the
    averaging bias.
    """
    if not pilots.symbols:
        raise ConfigError("channel estimation requires at least one DMRS symbol")
    n_sc, n_sym, n_rx = rx.samples.shape
    n_dmrs = len(pilots.symbols)
    sc = pilots.subcarriers

    h_ls = np.empty((sc.size, n_dmrs, n_rx), dtype=complex)
    for j, sym in enumerate(pilots.symbols):
        h_ls[:, j, :] = rx.samples[sc, sym, :] / pilots.values[:, j, None]

    # Residual-based noise estimate over interior pilots.
    if sc.size >= 3:
        smooth = (h_ls[:-2] + h_ls[1:-1] + h_ls[2:]) / 3.0
        resid = h_ls[1:-1] - smooth
        noise_var_hat = 1.5 * float(np.mean(np.abs(resid) ** 2))
    else:
        noise_var_hat = 0.0

    all_sc = np.arange(n_sc)
    h_freq = np.empty((n_sc, n_dmrs, n_rx), dtype=complex)
    for j in range(n_dmrs):
        for r in range(n_rx):
            h_freq[:, j, r] = _interp_complex(all_sc, sc, h_ls[:, j, r])

    h_hat = np.empty((n_sc, n_sym, n_rx), dtype=complex)
    pilot_times = np.asarray(pilots.symbols, dtype=float)
    for sym in range(n_sym):
        if n_dmrs == 1:
            h_hat[:, sym, :] = h_freq[:, 0, :]
            continue
        t = float(sym)
        if t <= pilot_times[0]:
            h_hat[:, sym, :] = h_freq[:, 0, :]
        elif t >= pilot_times[-1]:
            h_hat[:, sym, :] = h_freq[:, -1, :]
        else:
            j = int(np.searchsorted(pilot_times, t, side="right")) - 1
            w = (t - pilot_times[j]) / (pilot_times[j + 1] - pilot_times[j])
            h_hat[:, sym, :] = (1 - w) * h_freq[:, j, :] + w * h_freq[:, j + 1, :]
    return ChannelEstimate(h_hat=h_hat, noise_var_hat=noise_var_hat, method="ls_interp")


def mmse_equalize(
    rx: ResourceGrid, est: ChannelEstimate
) -> tuple[np.ndarray, np.ndarray]:
    """Per-subcarrier MMSE combining over the data REs.

    Returns (x_hat, post_sinr) in canonical data-RE order.  With channel
    column h and noise variance s2: g = h^H h, x_hat = h^H y / (g + s2),
    post_sinr = g / s2 (capped).  Dead REs (g = 0, s2 = 0) become erasures
    with x_hat = 0 and post_sinr = 0.
    """
    if est.h_hat.shape != rx.samples.shape:
        raise ValueError("estimate dims do not match received grid")
    sc_idx, sym_idx = data_re_order(rx.config)
    h = est.h_hat[sc_idx, sym_idx, :]  # (n_data, n_rx)
    y = rx.samples[sc_idx, sym_idx, :]
    g = np.sum(np.abs(h) ** 2, axis=1)
    s2 = est.noise_var_hat
    denom = g + s2
    with np.errstate(divide="ignore", invalid="ignore"):
        x_hat = np.where(denom > 0, np.sum(np.conj(h) * y, axis=1) / denom, 0.0)
        post_sinr = np.where(g > 0, np.where(s2 > 0, g / s2, POST_SINR_CAP), 0.0)
    return x_hat, np.minimum(post_sinr, POST_SINR_CAP)


def soft_demap(
    x_hat: np.ndarray, post_sinr: np.ndarray, scheme: ModulationScheme
) -> np.ndarray:
    """Max-log LLRs from the bias-corrected Gaussian model.

    The MMSE output is x_hat = mu*x + n' with mu = sinr/(1+sinr); dividing
    by mu gives z = x + n'' where n'' has variance 1/sinr.  Erasure REs
    (post_sinr = 0) contribute all-zero LLRs.
    """
    x_hat = np.asarray(x_hat, dtype=complex).reshape(-1)
    post_sinr = np.asarray(post_sinr, dtype=float).reshape(-1)
    qm = scheme.bits_per_symbol
    points = constellation(scheme)
    labels = np.arange(points.size)
    llrs = np.zeros((x_hat.size, qm))
    live = post_sinr > 0
    if np.any(live):
        mu = post_sinr[live] / (1.0 + post_sinr[live])
        z = x_hat[live] / mu
        nu = 1.0 / post_sinr[live]
        d2 = np.abs(z[:, None] - points[None, :]) ** 2
        for b in range(qm):
            bit = (labels >> (qm - 1 - b)) & 1
            m0 = np.min(d2[:, bit == 0], axis=1)
            m1 = np.min(d2[:, bit == 1], axis=1)
            llrs[live, b] = (m1 - m0) / nu
    return np.clip(llrs.reshape(-1), -L_MAX, L_MAX)


def receive_r0(rx: ResourceGrid, true_channel: ChannelRealization) -> LlrVector:
    """Perfect-CSI MMSE receive chain using the realization's own h and s2."""
    est = ChannelEstimate(
        h_hat=true_channel.h, noise_var_hat=true_channel.noise_var, method="perfect"
    )
    x_hat, post_sinr = mmse_equalize(rx, est)
    return LlrVector(soft_demap(x_hat, post_sinr, rx.config.modulation), "R0")


def receive_r1(rx: ResourceGrid, pilots: PilotSet) -> LlrVector:
    """Practical chain: LS estimation + interpolation + MMSE + soft demap."""
    est = estimate_channel_ls(rx, pilots)
    x_hat, post_sinr = mmse_equalize(rx, est)
    return LlrVector(soft_demap(x_hat, post_sinr, rx.config.modulation), "R1")
