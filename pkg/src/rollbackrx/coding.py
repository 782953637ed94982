"""Quasi-cyclic LDPC coding and per-slot scoring.

The parity-check matrix is a lifted base matrix: entry -1 means no block,
entry s >= 0 a Z x Z identity rotated by s (row i checks column (i+s) mod Z).
The parity part of the shipped matrices is a zigzag accumulator (dual
diagonal with zero shifts), so encoding is linear-time forward substitution.
One base matrix serves every slot geometry: shifts apply modulo the lifting
size, which is chosen so n = n_b * Z equals the slot's coded-bit budget.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field

import numpy as np

from .grid import ConfigError, SlotConfig


@dataclass
class SlotScore:
    block_error: bool
    coded_bit_errors: int
    info_bit_errors: int
    decoder_iterations: int
    converged: bool


@dataclass
class DecodeResult:
    info_bits: np.ndarray
    codeword: np.ndarray
    iterations: int
    converged: bool


def load_base_matrices(path=None) -> dict[str, tuple[np.ndarray, int]]:
    """Parse the bundled base-matrix table: name -> (base, design lifting)."""
    if path is None:
        ref = importlib.resources.files("rollbackrx.data") / "base_matrices.txt"
        text = ref.read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    out: dict[str, tuple[np.ndarray, int]] = {}
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    i = 0
    while i < len(lines):
        parts = lines[i].split()
        if parts[0] != "code":
            raise ConfigError(f"expected 'code' header, got {lines[i]!r}")
        name, m_b, n_b, z_design = parts[1], int(parts[2]), int(parts[3]), int(parts[4])
        rows = []
        for r in range(m_b):
            row = [int(v) for v in lines[i + 1 + r].split()]
            if len(row) != n_b:
                raise ConfigError(f"code {name}: row {r} has {len(row)} != {n_b} entries")
            rows.append(row)
        out[name] = (np.array(rows, dtype=int), z_design)
        i += 1 + m_b
    return out


@dataclass
class LdpcCode:
    base: np.ndarray
    z: int
    name: str = "qc"
    max_iterations: int = 25
    min_sum_scale: float = 0.75
    _layers: list = field(init=False, repr=False)

    def __post_init__(self):
        m_b, n_b = self.base.shape
        if self.z < 1:
            raise ConfigError("lifting size must be >= 1")
        self.m_b, self.n_b = m_b, n_b
        self.k_b = n_b - m_b
        self.n = n_b * self.z
        self.k = self.k_b * self.z
        self.m = m_b * self.z
        arange = np.arange(self.z)
        # Per layer: column blocks, and flat gather indices (w, Z) into the
        # length-n variable array.
        self._layers = []
        for r in range(m_b):
            cols = np.flatnonzero(self.base[r] >= 0)
            shifts = self.base[r, cols] % self.z
            gather = np.stack(
                [c * self.z + ((arange + s) % self.z) for c, s in zip(cols, shifts)]
            )
            self._layers.append((cols, shifts, gather))

    @classmethod
    def for_slot(cls, slot: SlotConfig, name: str = "rate64_qc39", **kw) -> "LdpcCode":
        """Size the named base matrix to the slot's coded-bit budget."""
        base, _ = load_base_matrices()[name]
        n_b = base.shape[1]
        n_bits = slot.n_coded_bits
        if n_bits % n_b != 0:
            raise ConfigError(
                f"slot bit budget {n_bits} is not a multiple of n_b={n_b}; "
                "cannot size the code to this slot"
            )
        return cls(base=base, z=n_bits // n_b, name=name, **kw)

    # -- encoding ----------------------------------------------------------

    def encode(self, info_bits: np.ndarray) -> np.ndarray:
        """Systematic encode via the zigzag accumulator; H @ c = 0 over GF(2)."""
        info_bits = np.asarray(info_bits, dtype=np.uint8).reshape(-1)
        if info_bits.size != self.k:
            raise ValueError(f"need {self.k} info bits, got {info_bits.size}")
        u = info_bits.reshape(self.k_b, self.z)
        parity = np.zeros((self.m_b, self.z), dtype=np.uint8)
        prev = np.zeros(self.z, dtype=np.uint8)
        for r in range(self.m_b):
            s = np.zeros(self.z, dtype=np.uint8)
            cols = np.flatnonzero(self.base[r, : self.k_b] >= 0)
            for c in cols:
                s ^= np.roll(u[c], -(self.base[r, c] % self.z))
            parity[r] = s ^ prev
            prev = parity[r]
        return np.concatenate([info_bits, parity.reshape(-1)])

    def syndrome(self, codeword: np.ndarray) -> np.ndarray:
        """H @ c over GF(2), flattened per check."""
        c = np.asarray(codeword, dtype=np.uint8).reshape(-1)
        out = np.empty((self.m_b, self.z), dtype=np.uint8)
        for r, (_, _, gather) in enumerate(self._layers):
            out[r] = np.bitwise_xor.reduce(c[gather], axis=0)
        return out.reshape(-1)

    # -- decoding ----------------------------------------------------------

    def decode(self, llrs: np.ndarray) -> DecodeResult:
        """Layered normalized min-sum with early exit on zero syndrome.

        Positive LLR means bit 0; hard-decision ties (exact zero) resolve to
        bit 0.  An all-zero input returns the all-zero word with
        converged=False, since no information ever enters the decoder.
        """
        llrs = np.asarray(llrs, dtype=float).reshape(-1)
        if llrs.size != self.n:
            raise ValueError(f"need {self.n} LLRs, got {llrs.size}")
        lam = llrs.copy()
        alpha = self.min_sum_scale
        msgs = [np.zeros_like(g, dtype=float) for (_, _, g) in self._layers]
        informative = bool(np.any(llrs != 0.0))
        iterations = 0
        converged = False
        for it in range(1, self.max_iterations + 1):
            iterations = it
            for r, (_, _, gather) in enumerate(self._layers):
                q = lam[gather] - msgs[r]
                absq = np.abs(q)
                signs = np.where(q < 0, -1.0, 1.0)
                part = np.partition(absq, 1, axis=0) if absq.shape[0] > 1 else absq
                min1 = part[0]
                min2 = part[1] if absq.shape[0] > 1 else np.full_like(min1, np.inf)
                sign_prod = np.prod(signs, axis=0)
                mag = np.where(absq == min1[None, :], min2[None, :], min1[None, :])
                new = alpha * sign_prod[None, :] * signs * mag
                lam[gather] = q + new
                msgs[r] = new
            hard = (lam < 0).astype(np.uint8)
            if informative and not self.syndrome(hard).any():
                converged = True
                break
        hard = (lam < 0).astype(np.uint8)
        return DecodeResult(
            info_bits=hard[: self.k],
            codeword=hard,
            iterations=iterations,
            converged=converged,
        )


def ldpc_encode(info_bits: np.ndarray, code: LdpcCode) -> np.ndarray:
    return code.encode(info_bits)


def ldpc_decode(llrs: np.ndarray, code: LdpcCode) -> DecodeResult:
    return code.decode(llrs)


def score_slot(
    decoded: DecodeResult,
    true_info: np.ndarray,
    llrs_used: np.ndarray,
    true_coded: np.ndarray,
) -> SlotScore:
    """Per-slot scoring against ground truth.

    coded_bit_errors counts sign mismatches of the pre-decoder LLR stream
    against the transmitted coded bits (positive LLR means bit 0).
    """
    true_info = np.asarray(true_info).reshape(-1)
    true_coded = np.asarray(true_coded).reshape(-1)
    llrs_used = np.asarray(llrs_used, dtype=float).reshape(-1)
    if decoded.info_bits.size != true_info.size:
        raise ValueError("info length mismatch")
    if llrs_used.size != true_coded.size:
        raise ValueError("coded length mismatch")
    hard = (llrs_used < 0).astype(np.int64)
    coded_errors = int(np.count_nonzero(hard != true_coded))
    info_errors = int(np.count_nonzero(decoded.info_bits != true_info))
    return SlotScore(
        block_error=info_errors > 0,
        coded_bit_errors=coded_errors,
        info_bit_errors=info_errors,
        decoder_iterations=decoded.iterations,
        converged=decoded.converged,
    )
