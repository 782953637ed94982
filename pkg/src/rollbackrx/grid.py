"""Transmit-side grid construction: QAM mapping, DMRS placement, slot assembly.

Constellations follow the canonical Gray formulas (unit average energy):

    QPSK : s = ((1-2*b0) + 1j*(1-2*b1)) / sqrt(2)
    16QAM: s = ((1-2*b0)*(2-(1-2*b2)) + 1j*(1-2*b1)*(2-(1-2*b3))) / sqrt(10)
    64QAM: s = ((1-2*b0)*(4-(1-2*b2)*(2-(1-2*b4)))
               + 1j*(1-2*b1)*(4-(1-2*b3)*(2-(1-2*b5)))) / sqrt(42)

so a positive LLR always means bit 0.  DMRS uses a type-1 comb-2 layout:
pilots occupy every other subcarrier of each DMRS symbol and the remaining
comb carries data.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

# DMRS symbol indices per number of additional positions (type-A-like layout).
DMRS_SYMBOLS = {0: (2,), 1: (2, 11), 2: (2, 7, 11)}


class ConfigError(ValueError):
    """Raised for invalid slot / channel / scenario configuration."""


class ModulationScheme(Enum):
    QPSK = 2
    QAM16 = 4
    QAM64 = 6

    @property
    def bits_per_symbol(self) -> int:
        return self.value


def _gray_levels(bits: np.ndarray) -> np.ndarray:
    """Map sign/offset bit columns to amplitude levels, one axis at a time.

    bits has shape (n, m): column 0 sets the sign, later columns successively
    refine the offset from the innermost term outward, reproducing the nested
    Gray structure above (e.g. 4 - (1-2*b_mid)*(2 - (1-2*b_last))).
    """
    m = bits.shape[1]
    level = np.ones(bits.shape[0])
    for col in range(m - 1, 0, -1):
        level = (1 << (m - col)) - (1 - 2 * bits[:, col]) * level
    return (1 - 2 * bits[:, 0]) * level


def constellation(scheme: ModulationScheme) -> np.ndarray:
    """All 2**Qm points indexed by the integer whose binary digits are the label."""
    qm = scheme.bits_per_symbol
    labels = np.arange(1 << qm)
    bits = (labels[:, None] >> np.arange(qm - 1, -1, -1)) & 1
    return _map_bits(bits, scheme)


def _map_bits(bits: np.ndarray, scheme: ModulationScheme) -> np.ndarray:
    qm = scheme.bits_per_symbol
    re_part = _gray_levels(bits[:, 0::2])
    im_part = _gray_levels(bits[:, 1::2])
    # Unit average energy: E|s|^2 = 2 * mean(level^2) / norm = 1 exactly.
    norm = {2: np.sqrt(2.0), 4: np.sqrt(10.0), 6: np.sqrt(42.0)}[qm]
    return (re_part + 1j * im_part) / norm


def qam_map(bits: np.ndarray, scheme: ModulationScheme) -> np.ndarray:
    """Gray-map a bit sequence onto constellation symbols."""
    bits = np.asarray(bits, dtype=np.int64).reshape(-1)
    qm = scheme.bits_per_symbol
    if bits.size % qm != 0:
        raise ValueError(f"bit count {bits.size} not divisible by Qm={qm}")
    return _map_bits(bits.reshape(-1, qm), scheme)


def qam_hard_demap(symbols: np.ndarray, scheme: ModulationScheme) -> np.ndarray:
    """Nearest-point demap back to bits; the noise-free inverse of qam_map."""
    points = constellation(scheme)
    symbols = np.asarray(symbols, dtype=complex).reshape(-1)
    idx = np.argmin(np.abs(symbols[:, None] - points[None, :]) ** 2, axis=1)
    qm = scheme.bits_per_symbol
    return ((idx[:, None] >> np.arange(qm - 1, -1, -1)) & 1).reshape(-1)


@dataclass(frozen=True)
class DmrsConfig:
    additional_positions: int = 1
    comb_offset: int = 0
    symbol_indices: tuple[int, ...] | None = None  # None -> standard placement

    def __post_init__(self):
        if self.additional_positions not in (0, 1, 2):
            raise ConfigError(
                f"additional_positions must be 0, 1 or 2, got {self.additional_positions}"
            )
        if self.comb_offset not in (0, 1):
            raise ConfigError("comb_offset must be 0 or 1")
        if self.symbol_indices is None:
            object.__setattr__(
                self, "symbol_indices", DMRS_SYMBOLS[self.additional_positions]
            )
        else:
            object.__setattr__(self, "symbol_indices", tuple(self.symbol_indices))
        if tuple(sorted(self.symbol_indices)) != tuple(self.symbol_indices):
            raise ConfigError("symbol_indices must be sorted")


@dataclass(frozen=True)
class SlotConfig:
    n_prb: int = 26
    n_symbols: int = 14
    n_tx: int = 1
    n_rx: int = 2
    modulation: ModulationScheme = ModulationScheme.QAM16
    dmrs: DmrsConfig = field(default_factory=DmrsConfig)

    def __post_init__(self):
        if self.n_tx != 1:
            raise ConfigError("only single-antenna transmit (SIMO) is supported")
        if any(s >= self.n_symbols for s in self.dmrs.symbol_indices):
            raise ConfigError("DMRS symbol index beyond slot length")

    @property
    def n_subcarriers(self) -> int:
        return 12 * self.n_prb

    @property
    def n_data_re(self) -> int:
        n_dmrs = len(self.dmrs.symbol_indices)
        full = (self.n_symbols - n_dmrs) * self.n_subcarriers
        # On DMRS symbols the non-pilot comb carries data.
        shared = n_dmrs * (self.n_subcarriers // 2)
        return full + shared

    @property
    def n_coded_bits(self) -> int:
        return self.n_data_re * self.modulation.bits_per_symbol


@dataclass
class ResourceGrid:
    """Complex per-RE samples indexed [subcarrier, symbol, antenna]."""

    samples: np.ndarray
    config: SlotConfig

    def __post_init__(self):
        expected = (self.config.n_subcarriers, self.config.n_symbols)
        if self.samples.shape[:2] != expected:
            raise ValueError(
                f"grid shape {self.samples.shape} does not match config {expected}"
            )

    @property
    def n_antennas(self) -> int:
        return self.samples.shape[2]


@dataclass
class PilotSet:
    """Known DMRS pilots: comb subcarriers x DMRS symbols, unit magnitude."""

    symbols: tuple[int, ...]
    subcarriers: np.ndarray
    values: np.ndarray  # shape (len(subcarriers), len(symbols))


@dataclass
class TransmitRecord:
    """Ground truth retained for scoring: coded bits and their RE placement."""

    coded_bits: np.ndarray
    data_sc: np.ndarray  # subcarrier index per data RE, transmission order
    data_sym: np.ndarray  # symbol index per data RE, transmission order
    pilots: PilotSet
    modulation: ModulationScheme


def build_dmrs_pattern(cfg: DmrsConfig, slot: SlotConfig) -> set[tuple[int, int]]:
    """Comb-2 pilot positions (subcarrier, symbol) for the configured DMRS."""
    if any(s >= slot.n_symbols for s in cfg.symbol_indices):
        raise ConfigError("DMRS symbol index beyond slot length")
    pattern = set()
    for sym in cfg.symbol_indices:
        for sc in range(cfg.comb_offset, slot.n_subcarriers, 2):
            pattern.add((sc, sym))
    return pattern


def data_re_order(slot: SlotConfig) -> tuple[np.ndarray, np.ndarray]:
    """Canonical data-RE ordering: symbol-major, ascending subcarrier.

    This fixes the bit-to-RE bijection; the receiver chain reads LLRs back in
    the same order.
    """
    dmrs_syms = set(slot.dmrs.symbol_indices)
    off = slot.dmrs.comb_offset
    sc_all = np.arange(slot.n_subcarriers)
    sc_list, sym_list = [], []
    for sym in range(slot.n_symbols):
        if sym in dmrs_syms:
            sc = sc_all[sc_all % 2 != off]  # the non-pilot comb
        else:
            sc = sc_all
        sc_list.append(sc)
        sym_list.append(np.full(sc.size, sym))
    if not sc_list:
        return np.zeros(0, dtype=int), np.zeros(0, dtype=int)
    return np.concatenate(sc_list), np.concatenate(sym_list)


def build_pilots(slot: SlotConfig, seed) -> PilotSet:
    """Seeded pseudo-random unit-magnitude QPSK pilots, one set per slot."""
    rng = np.random.default_rng(np.random.SeedSequence([_as_entropy(seed), 0x70]))
    syms = slot.dmrs.symbol_indices
    sc = np.arange(slot.dmrs.comb_offset, slot.n_subcarriers, 2)
    quad = rng.integers(0, 4, size=(sc.size, len(syms)))
    values = np.exp(1j * (np.pi / 4 + np.pi / 2 * quad))
    return PilotSet(symbols=tuple(syms), subcarriers=sc, values=values)


def _as_entropy(seed) -> int:
    if isinstance(seed, np.random.SeedSequence):
        return int(seed.generate_state(1, dtype=np.uint64)[0])
    return int(seed)


def assemble_tx_grid(
    coded_bits: np.ndarray, slot: SlotConfig, rng_seed
) -> tuple[ResourceGrid, TransmitRecord]:
    """Fill one slot: pilots on the DMRS comb, mapped data bits everywhere else."""
    coded_bits = np.asarray(coded_bits, dtype=np.int64).reshape(-1)
    if coded_bits.size != slot.n_coded_bits:
        raise ValueError(
            f"need exactly {slot.n_coded_bits} coded bits, got {coded_bits.size}"
        )
    samples = np.zeros((slot.n_subcarriers, slot.n_symbols, 1), dtype=complex)
    pilots = build_pilots(slot, rng_seed)
    for j, sym in enumerate(pilots.symbols):
        samples[pilots.subcarriers, sym, 0] = pilots.values[:, j]
    sc_idx, sym_idx = data_re_order(slot)
    if coded_bits.size:
        samples[sc_idx, sym_idx, 0] = qam_map(coded_bits, slot.modulation)
    record = TransmitRecord(
        coded_bits=coded_bits,
        data_sc=sc_idx,
        data_sym=sym_idx,
        pilots=pilots,
        modulation=slot.modulation,
    )
    return ResourceGrid(samples=samples, config=slot), record
