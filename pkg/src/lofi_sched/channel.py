"""Uplink channel matrices: synthesis, estimation error, power control, file IO.

A channel matrix H is B x U complex (B BS antennas, U single-antenna UEs,
U even); column u is UE u's channel. The synthetic model is a line-of-sight
ULA ray model with a Rician-style K-factor: each UE gets one LoS ray plus
`num_paths` scattered rays, every ray carrying a standard circularly-symmetric
complex gain, with the K-factor splitting power between the LoS ray and the
scattered cluster. Ray directions are drawn uniformly in beamspace (uniform
in sin(theta)), so average per-antenna gain is exactly 1 regardless of
geometry: E||h_u||^2 = B.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ChannelMatrix",
    "SynthChannelConfig",
    "EstimationErrorModel",
    "ChannelFormatError",
    "ula_steering",
    "synth_channel",
    "apply_power_control",
    "normalize_median_power",
    "estimate_channel",
    "save_channel",
    "load_channel",
]

_HEADER_RE = re.compile(r"^# cmat v1 B=(\d+) U=(\d+)$")


class ChannelFormatError(ValueError):
    """Raised on malformed channel files; message names the offending line."""


@dataclass(frozen=True)
class ChannelMatrix:
    """Validated B x U complex channel matrix.

    Entries are stored read-only; B >= 1, U >= 2 and even, all entries finite,
    no all-zero column (a zero column has no direction and breaks power
    control and equalization downstream).
    """

    entries: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.entries, dtype=np.complex128, copy=True)
        if arr.ndim != 2:
            raise ValueError(f"channel matrix must be 2-D, got shape {arr.shape}")
        b, u = arr.shape
        if b < 1:
            raise ValueError("channel matrix needs at least one antenna row")
        if u < 2:
            raise ValueError("channel matrix needs at least two UE columns")
        if u % 2 != 0:
            raise ValueError(f"U must be even, got U={u}")
        if not np.all(np.isfinite(arr.view(np.float64))):
            raise ValueError("channel matrix contains non-finite entries")
        if np.any(np.all(arr == 0, axis=0)):
            bad = int(np.flatnonzero(np.all(arr == 0, axis=0))[0])
            raise ValueError(f"channel matrix column {bad} is all-zero")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def b(self) -> int:
        return self.entries.shape[0]

    @property
    def u_count(self) -> int:
        return self.entries.shape[1]

    def receive_powers(self) -> np.ndarray:
        """Per-UE receive power ||h_u||^2."""
        return np.sum(np.abs(self.entries) ** 2, axis=0)


@dataclass(frozen=True)
class SynthChannelConfig:
    """Parameters of the synthetic ray channel.

    angle_spread is the beam-domain scatter window in radians: scattered rays
    of a UE sit within +-angle_spread/2 (measured in sin space via
    sin(angle_spread/2)) around that UE's LoS direction.
    """

    b: int
    u_count: int
    num_paths: int
    los_k_factor_db: float
    angle_spread: float
    seed: int

    def __post_init__(self) -> None:
        if self.b < 1:
            raise ValueError("b must be >= 1")
        if self.u_count < 2 or self.u_count % 2 != 0:
            raise ValueError("u_count must be even and >= 2")
        if self.num_paths < 1:
            raise ValueError("num_paths must be >= 1")
        if not 0.0 <= self.angle_spread <= math.pi:
            raise ValueError("angle_spread must lie in [0, pi] radians")
        if not math.isfinite(self.los_k_factor_db):
            raise ValueError("los_k_factor_db must be finite")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass(frozen=True)
class EstimationErrorModel:
    """Additive estimation error: each entry gets CSCG noise of this variance."""

    error_variance: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.error_variance) and self.error_variance >= 0.0):
            raise ValueError("error_variance must be finite and >= 0")


def ula_steering(b: int, sin_angle: float) -> np.ndarray:
    """Steering vector of a half-wavelength ULA toward beamspace coordinate sin_angle.

    Entry k is exp(i*pi*k*sin_angle); the vector has norm sqrt(b).
    """
    if b < 1:
        raise ValueError("b must be >= 1")
    if not math.isfinite(sin_angle):
        raise ValueError("sin_angle must be finite")
    return np.exp(1j * math.pi * np.arange(b) * sin_angle)


def synth_channel(cfg: SynthChannelConfig) -> ChannelMatrix:
    """Draw one synthetic channel realization.

    Per UE u:
        h_u = sqrt(k/(k+1)) * a_0 * s(d_0)
            + sqrt(1/((k+1)*L)) * sum_l a_l * s(d_l)
    with k the linear K-factor, L = num_paths scattered rays, a ~ CN(0,1)
    i.i.d. ray gains, s() the ULA steering vector, d_0 the LoS beamspace
    coordinate (uniform in [-1, 1]) and d_l uniform within
    +-sin(angle_spread/2) of d_0. Steering is 2-periodic in the beamspace
    coordinate, so offsets may leave [-1, 1] without harm.

    Deterministic in cfg.seed; draw order is fixed (LoS coords, scatter
    offsets, LoS gains, scatter gains).
    """
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
    b, u, paths = cfg.b, cfg.u_count, cfg.num_paths
    kappa = 10.0 ** (cfg.los_k_factor_db / 10.0)
    half_window = math.sin(cfg.angle_spread / 2.0)

    los_coord = rng.uniform(-1.0, 1.0, size=u)
    offsets = rng.uniform(-half_window, half_window, size=(u, paths))
    gain_los = (rng.standard_normal(u) + 1j * rng.standard_normal(u)) / math.sqrt(2.0)
    gain_sc = (
        rng.standard_normal((u, paths)) + 1j * rng.standard_normal((u, paths))
    ) / math.sqrt(2.0)

    k_idx = np.arange(b)[:, None]
    steer_los = np.exp(1j * math.pi * k_idx * los_coord[None, :])  # (b, u)
    sc_coords = los_coord[:, None] + offsets  # (u, paths)
    steer_sc = np.exp(1j * math.pi * k_idx[:, :, None] * sc_coords[None, :, :])

    c_los = math.sqrt(kappa / (kappa + 1.0))
    c_sc = math.sqrt(1.0 / ((kappa + 1.0) * paths))
    h = c_los * gain_los[None, :] * steer_los
    h += c_sc * np.einsum("bup,up->bu", steer_sc, gain_sc)
    return ChannelMatrix(h)


def apply_power_control(h: ChannelMatrix, dynamic_range_db: float) -> ChannelMatrix:
    """Scale UE columns so receive powers fit a BS-side dynamic-range window.

    With P_ref the median of the original receive powers ||h_u||^2 and
    d = dynamic_range_db, each power is projected onto the window
    [P_ref * 10^(-d/20), P_ref * 10^(+d/20)]: UEs already inside transmit
    unchanged, outside ones are scaled by a real positive gain just far enough
    to reach the edge. Post powers therefore sit within +-(d/2) dB of P_ref
    and their max/min ratio never exceeds 10^(d/10); d=0 equalizes exactly.
    Column directions are preserved.
    """
    if not (math.isfinite(dynamic_range_db) and dynamic_range_db >= 0.0):
        raise ValueError("dynamic_range_db must be finite and >= 0")
    powers = h.receive_powers()
    p_ref = float(np.median(powers))
    lo = p_ref * 10.0 ** (-dynamic_range_db / 20.0)
    hi = p_ref * 10.0 ** (+dynamic_range_db / 20.0)
    target = np.clip(powers, lo, hi)
    gains = np.sqrt(target / powers)
    return ChannelMatrix(h.entries * gains[None, :])


def normalize_median_power(h: ChannelMatrix) -> ChannelMatrix:
    """Common rescale so the median receive power is exactly 1.

    Applied by the simulator after power control so that Es/N0 is the
    operating SNR of the median UE; a common scalar changes neither
    directions nor relative powers.
    """
    med = float(np.median(h.receive_powers()))
    return ChannelMatrix(h.entries / math.sqrt(med))


def estimate_channel(h: ChannelMatrix, model: EstimationErrorModel, seed: int) -> ChannelMatrix:
    """BS-side channel estimate: truth plus CSCG per-entry error of the model variance."""
    if model.error_variance == 0.0:
        return ChannelMatrix(h.entries)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    scale = math.sqrt(model.error_variance / 2.0)
    err = scale * (
        rng.standard_normal(h.entries.shape) + 1j * rng.standard_normal(h.entries.shape)
    )
    return ChannelMatrix(h.entries + err)


def save_channel(h: ChannelMatrix, path: str) -> None:
    """Write the one-matrix text format: header line, then B*U '<re> <im>' lines column-major."""
    lines = [f"# cmat v1 B={h.b} U={h.u_count}"]
    for col in range(h.u_count):
        for row in range(h.b):
            z = h.entries[row, col]
            lines.append(f"{z.real:.17g} {z.imag:.17g}")
    with open(path, "w", encoding="ascii") as f:
        f.write("\n".join(lines) + "\n")


def load_channel(path: str) -> ChannelMatrix:
    """Parse the channel file format; errors name the offending line."""
    with open(path, "r", encoding="ascii") as f:
        raw = f.read()
    lines = raw.splitlines()
    if not lines:
        raise ChannelFormatError(f"{path}: line 1: empty file, expected '# cmat v1 B=<int> U=<int>'")
    m = _HEADER_RE.match(lines[0])
    if m is None:
        raise ChannelFormatError(
            f"{path}: line 1: bad header {lines[0]!r}, expected '# cmat v1 B=<int> U=<int>'"
        )
    b, u = int(m.group(1)), int(m.group(2))
    if b < 1:
        raise ChannelFormatError(f"{path}: line 1: B must be >= 1, got {b}")
    if u < 2 or u % 2 != 0:
        raise ChannelFormatError(f"{path}: line 1: U must be even and >= 2, got {u}")
    body = lines[1:]
    if len(body) != b * u:
        raise ChannelFormatError(
            f"{path}: expected {b * u} entry lines for B={b} U={u}, found {len(body)}"
        )
    entries = np.empty((b, u), dtype=np.complex128)
    for i, line in enumerate(body):
        parts = line.split()
        if len(parts) != 2:
            raise ChannelFormatError(
                f"{path}: line {i + 2}: expected '<re> <im>', got {line!r}"
            )
        try:
            re_part, im_part = float(parts[0]), float(parts[1])
        except ValueError:
            raise ChannelFormatError(
                f"{path}: line {i + 2}: non-numeric entry {line!r}"
            ) from None
        if not (math.isfinite(re_part) and math.isfinite(im_part)):
            raise ChannelFormatError(f"{path}: line {i + 2}: non-finite entry {line!r}")
        entries[i % b, i // b] = complex(re_part, im_part)
    try:
        return ChannelMatrix(entries)
    except ValueError as exc:
        raise ChannelFormatError(f"{path}: {exc}") from None
