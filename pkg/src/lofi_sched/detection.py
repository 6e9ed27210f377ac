"""LMMSE detection chain: equalizer, post-equalization SINR, QAM mapping, slot simulation.

Conventions: a slot serves M UEs through a B x M channel submatrix H. The
receive model per channel use is y = H s + n with symbol energy Es per UE and
CSCG noise of per-entry variance N0. The equalizer is the regularized-Gram
LMMSE matrix W = H_hat (H_hatᴴ H_hat + (N0/Es) I_M)^-1, applied as W ᴴ y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

__all__ = [
    "LinkParams",
    "Constellation",
    "TransmissionBatch",
    "make_qam16",
    "make_qpsk",
    "modulate",
    "demodulate",
    "lmmse_matrix",
    "post_eq_sinr",
    "simulate_slot",
]

_SIM_CHUNK = 65536  # channel uses per internal batch; fixed so results never depend on it


@dataclass(frozen=True)
class LinkParams:
    """Link operating point: symbol energy and noise variance (both linear)."""

    es: float
    n0: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.es) and self.es > 0.0):
            raise ValueError("es must be finite and > 0")
        if not (math.isfinite(self.n0) and self.n0 > 0.0):
            raise ValueError("n0 must be finite and > 0")

    @property
    def snr_db(self) -> float:
        return 10.0 * math.log10(self.es / self.n0)

    @property
    def n0_over_es(self) -> float:
        return self.n0 / self.es


@dataclass(frozen=True)
class Constellation:
    """Square Gray-mapped constellation described per axis.

    axis_levels are the per-axis amplitudes in ascending order;
    axis_bits[i] is the Gray label of axis_levels[i], ordered so adjacent
    levels differ in exactly one bit (00, 01, 11, 10 from negative to
    positive for 16-QAM). A symbol label concatenates the in-phase bits
    followed by the quadrature bits. points[label] is the complex symbol,
    and mean |point|^2 equals es.
    """

    name: str
    es: float
    axis_levels: np.ndarray
    axis_bits: tuple[tuple[int, ...], ...]
    points: np.ndarray

    def __post_init__(self) -> None:
        if not np.all(np.diff(self.axis_levels) > 0):
            raise ValueError("axis_levels must be strictly ascending")
        if len(self.axis_bits) != len(self.axis_levels):
            raise ValueError("one bit label per axis level required")
        mean_power = float(np.mean(np.abs(self.points) ** 2))
        if not math.isclose(mean_power, self.es, rel_tol=1e-12):
            raise ValueError("constellation points do not average to es")
        self.axis_levels.setflags(write=False)
        self.points.setflags(write=False)

    @property
    def bits_per_axis(self) -> int:
        return len(self.axis_bits[0])

    @property
    def bits_per_symbol(self) -> int:
        return 2 * self.bits_per_axis


def _build_square(name: str, es: float, pam: np.ndarray, axis_bits: tuple[tuple[int, ...], ...]) -> Constellation:
    # normalize the PAM grid so the full square constellation averages to es
    scale = math.sqrt(es / (2.0 * np.mean(pam**2)))
    levels = pam * scale
    bits_per_axis = len(axis_bits[0])
    n_axis = len(levels)
    points = np.empty(n_axis**2, dtype=np.complex128)
    for label in range(n_axis**2):
        bits = [(label >> (2 * bits_per_axis - 1 - i)) & 1 for i in range(2 * bits_per_axis)]
        i_idx = axis_bits.index(tuple(bits[:bits_per_axis]))
        q_idx = axis_bits.index(tuple(bits[bits_per_axis:]))
        points[label] = levels[i_idx] + 1j * levels[q_idx]
    return Constellation(name=name, es=es, axis_levels=levels, axis_bits=axis_bits, points=points)


def make_qam16(es: float = 1.0) -> Constellation:
    """Gray 16-QAM: per-axis levels {-3,-1,+1,+3}/sqrt(10)*sqrt(es), labels 00,01,11,10."""
    return _build_square("16qam", es, np.array([-3.0, -1.0, 1.0, 3.0]), ((0, 0), (0, 1), (1, 1), (1, 0)))


def make_qpsk(es: float = 1.0) -> Constellation:
    """Gray QPSK: per-axis levels {-1,+1}/sqrt(2)*sqrt(es), labels 0,1."""
    return _build_square("qpsk", es, np.array([-1.0, 1.0]), ((0,), (1,)))


def modulate(bits: np.ndarray, q: Constellation) -> np.ndarray:
    """Map a flat 0/1 array (length divisible by bits_per_symbol) to symbols."""
    bits = np.asarray(bits)
    if bits.ndim != 1 or bits.size % q.bits_per_symbol != 0:
        raise ValueError(
            f"bit count must be a multiple of {q.bits_per_symbol}, got {bits.size}"
        )
    if bits.size and not np.all((bits == 0) | (bits == 1)):
        raise ValueError("bits must be 0/1")
    groups = bits.reshape(-1, q.bits_per_symbol)
    weights = 1 << np.arange(q.bits_per_symbol - 1, -1, -1)
    labels = groups @ weights
    return q.points[labels]


def _axis_decision_tables(q: Constellation) -> tuple[np.ndarray, np.ndarray]:
    # decision thresholds are the midpoints of adjacent levels, evaluated in
    # float64, so the tie behavior below is exact and testable
    mids = (q.axis_levels[:-1] + q.axis_levels[1:]) / 2.0
    bits = np.array(q.axis_bits, dtype=np.int8)
    return mids, bits


def _slice_axis(x: np.ndarray, mids: np.ndarray, bits: np.ndarray) -> np.ndarray:
    # side="right" sends a sample exactly on a threshold to the upper level,
    # which is the smaller-magnitude one when the threshold is negative; on
    # non-negative thresholds the tie goes to the lower level instead (smaller
    # magnitude for a positive threshold, the negative level at zero)
    idx = np.searchsorted(mids, x, side="right")
    nonneg = mids[mids >= 0.0]
    if nonneg.size:
        idx[np.isin(x, nonneg)] -= 1
    return bits[idx]


def demodulate(symbols: np.ndarray, q: Constellation) -> np.ndarray:
    """Hard nearest-neighbor demapping, per axis; returns a flat 0/1 array.

    Decision thresholds are the float64 midpoints of adjacent axis levels.
    A sample exactly on a threshold goes to the smaller-magnitude level, and
    to the negative one when magnitudes are equal (a sample on the origin).
    """
    symbols = np.asarray(symbols, dtype=np.complex128).ravel()
    mids, bits = _axis_decision_tables(q)
    i_bits = _slice_axis(symbols.real, mids, bits)
    q_bits = _slice_axis(symbols.imag, mids, bits)
    out = np.concatenate([i_bits, q_bits], axis=1)
    return out.reshape(-1).astype(np.int8)


def lmmse_matrix(h_hat_slot: np.ndarray, n0_over_es: float) -> np.ndarray:
    """LMMSE equalizer W = H (HᴴH + rho I)^-1 for the slot estimate H (B x M)."""
    h = np.asarray(h_hat_slot, dtype=np.complex128)
    if h.ndim != 2:
        raise ValueError("slot channel must be a 2-D matrix")
    if not (math.isfinite(n0_over_es) and n0_over_es > 0.0):
        raise ValueError("n0_over_es must be finite and > 0")
    m = h.shape[1]
    gram = h.conj().T @ h
    gram[np.diag_indices(m)] += n0_over_es
    # W = H A^-1 with A Hermitian PD, i.e. Wᴴ = A^-1 Hᴴ
    return np.linalg.solve(gram, h.conj().T).conj().T


def post_eq_sinr(h_hat_slot: np.ndarray, w: np.ndarray, n0_over_es: float) -> np.ndarray:
    """Per-UE post-equalization SINR of equalizer columns w_u on the slot estimate.

    SINR_u = |w_uᴴ h_u|^2 / (sum_{u'!=u} |w_uᴴ h_u'|^2 + rho ||w_u||^2).
    """
    h = np.asarray(h_hat_slot, dtype=np.complex128)
    w = np.asarray(w, dtype=np.complex128)
    if h.shape != w.shape:
        raise ValueError("equalizer and slot channel shapes must match")
    w_norms = np.sum(np.abs(w) ** 2, axis=0)
    if np.any(w_norms == 0.0):
        raise ValueError("equalizer has an all-zero column")
    g = w.conj().T @ h  # g[u, u'] = w_uᴴ h_u'
    sig = np.abs(np.diag(g)) ** 2
    interference = np.sum(np.abs(g) ** 2, axis=1) - sig
    sinr = sig / (interference + n0_over_es * w_norms)
    if not np.all(np.isfinite(sinr)):
        raise ValueError("SINR evaluation produced non-finite values")
    return sinr


@dataclass
class TransmissionBatch:
    """Outcome of simulating one slot: bit counters, optionally the raw signals."""

    bits_transmitted: int
    bit_errors: int
    symbols: Optional[np.ndarray] = None  # (M, N) sent symbols
    noise: Optional[np.ndarray] = None  # (B, N)
    received: Optional[np.ndarray] = None  # (B, N)

    def __post_init__(self) -> None:
        if self.bit_errors < 0 or self.bit_errors > self.bits_transmitted:
            raise ValueError("bit_errors must lie in [0, bits_transmitted]")


def simulate_slot(
    h_true_slot: np.ndarray,
    h_hat_slot: np.ndarray,
    params: LinkParams,
    q: Constellation,
    num_symbols: int,
    seed: int,
    keep_signals: bool = False,
) -> TransmissionBatch:
    """Simulate num_symbols channel uses of one slot and count bit errors.

    Transmissions propagate through the true channel; the equalizer and the
    per-stream slicing gain come from the estimate. Each equalized stream is
    divided by its known signal gain (WᴴH_hat)_uu before hard demapping, so a
    stream at post-equalization SINR gamma behaves like an AWGN link at SNR
    gamma (biased slicing would not).

    Deterministic in `seed`; per fixed-size chunk the draw order is payload
    bits, then noise real parts, then noise imaginary parts.
    """
    h_true = np.asarray(h_true_slot, dtype=np.complex128)
    h_hat = np.asarray(h_hat_slot, dtype=np.complex128)
    if h_true.shape != h_hat.shape:
        raise ValueError("true and estimated slot shapes must match")
    if num_symbols < 0:
        raise ValueError("num_symbols must be >= 0")
    if not math.isclose(q.es, params.es, rel_tol=1e-12):
        raise ValueError("constellation energy must match params.es")
    b, m = h_true.shape
    bps = q.bits_per_symbol

    w = lmmse_matrix(h_hat, params.n0_over_es)
    stream_gain = np.einsum("bu,bu->u", w.conj(), h_hat)  # (WᴴH_hat)_uu
    if np.any(np.abs(stream_gain) == 0.0):
        raise ValueError("a stream has zero signal gain; cannot slice")

    rng = np.random.default_rng(np.random.SeedSequence(seed))
    errors = 0
    kept_s, kept_n, kept_y = [], [], []
    noise_scale = math.sqrt(params.n0 / 2.0)
    done = 0
    while done < num_symbols:
        n = min(_SIM_CHUNK, num_symbols - done)
        bits = rng.integers(0, 2, size=(m, n * bps), dtype=np.int8)
        s = np.empty((m, n), dtype=np.complex128)
        for u in range(m):
            s[u] = modulate(bits[u], q)
        noise = noise_scale * (
            rng.standard_normal((b, n)) + 1j * rng.standard_normal((b, n))
        )
        y = h_true @ s + noise
        z = (w.conj().T @ y) / stream_gain[:, None]
        for u in range(m):
            errors += int(np.count_nonzero(demodulate(z[u], q) != bits[u]))
        if keep_signals:
            kept_s.append(s)
            kept_n.append(noise)
            kept_y.append(y)
        done += n

    batch = TransmissionBatch(bits_transmitted=m * num_symbols * bps, bit_errors=errors)
    if keep_signals:
        batch.symbols = np.concatenate(kept_s, axis=1) if kept_s else np.empty((m, 0), complex)
        batch.noise = np.concatenate(kept_n, axis=1) if kept_n else np.empty((b, 0), complex)
        batch.received = np.concatenate(kept_y, axis=1) if kept_y else np.empty((b, 0), complex)
    return batch
