"""Acoustic descriptors for room impulse responses.

Energy decay curves (Schroeder backward integration), reverberation time
fits, direct-path detection, direct-to-reverberant ratio, and early
reflection profiles. Everything operates on :class:`RIRecording` values,
is pure (inputs are never mutated), and works in float64 regardless of
the storage dtype of the samples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SPEED_OF_SOUND_M_S = 343.0   # propagation speed used for all distance math
DB_FLOOR = -120.0            # clamp for every log-domain quantity
DRR_CEILING_DB = 100.0       # reported when the reverberant energy vanishes

DIRECT_PEAK_FRACTION = 0.5   # direct path: first sample >= this fraction of the global peak
DRR_WINDOW_PRE_S = 0.0005    # direct window opens 0.5 ms before the direct sample
DRR_WINDOW_POST_S = 0.0025   # ... and closes 2.5 ms after it (closed interval)
ECHO_WINDOW_S = 0.005        # early reflection profile: ten 5 ms windows
ECHO_N_WINDOWS = 10
ECHO_PEAK_FRACTION = 0.1     # peaks must exceed this fraction of the direct sample

T60_FALLBACK_FLAG = "t60_fallback"
DRR_CEILING_FLAG = "drr_ceiling"
ECHO_TRUNCATED_FLAG = "echo_truncated"

_T20_SPAN_DB = (-5.0, -25.0)   # primary fit segment (T20, extrapolated x3)
_T10_SPAN_DB = (-5.0, -15.0)   # fallback segment (T10, extrapolated x6)
_MIN_FIT_POINTS = 8


class ZeroEnergyError(ValueError):
    """Raised when an operation needs a signal with nonzero energy."""


class InsufficientDecayError(ValueError):
    """Raised when a decay curve lacks the range needed for a reliable fit."""


@dataclass(frozen=True)
class RIRecording:
    """A sampled room impulse response plus its scene metadata.

    ``samples`` holds linear amplitudes as stored; multiplying them by
    ``norm_gain`` restores the physical (pre-normalization) amplitudes,
    so peak-normalized recordings lose no level information. Positions
    are cartesian coordinates in meters, or ``None`` when the recording
    has no scene attached (synthetic test signals).
    """

    samples: np.ndarray
    sample_rate: int = 32000
    source_pos: tuple[float, float, float] | None = None
    receiver_pos: tuple[float, float, float] | None = None
    room_id: int | str | None = None
    norm_gain: float = 1.0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("samples must be a non-empty 1-D array")
        object.__setattr__(self, "samples", samples)
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if not self.norm_gain > 0.0:
            raise ValueError(f"norm_gain must be positive, got {self.norm_gain}")
        for name in ("source_pos", "receiver_pos"):
            pos = getattr(self, name)
            if pos is not None:
                pos = tuple(float(v) for v in pos)
                if len(pos) != 3:
                    raise ValueError(f"{name} must have three coordinates")
                object.__setattr__(self, name, pos)

    @property
    def duration_samples(self) -> int:
        return int(self.samples.size)

    def metadata_distance(self) -> float | None:
        """Source-receiver distance implied by the stored positions."""
        if self.source_pos is None or self.receiver_pos is None:
            return None
        delta = np.asarray(self.source_pos) - np.asarray(self.receiver_pos)
        return float(np.linalg.norm(delta))


@dataclass(frozen=True)
class EnergyDecayCurve:
    """Schroeder decay curve in dB, one value per input sample.

    ``values_db[0]`` is exactly 0 and the curve is non-increasing;
    levels are clamped at the -120 dB floor. ``total_energy`` is the
    plain sum of squared samples in linear units.
    """

    values_db: np.ndarray
    total_energy: float


@dataclass(frozen=True)
class T60Estimate:
    t60_s: float
    fallback: bool = False   # True when the -5..-15 dB segment was used


@dataclass(frozen=True)
class DrrEstimate:
    drr_db: float
    at_ceiling: bool = False


@dataclass(frozen=True)
class EchoDensityProfile:
    counts: tuple[int, ...]      # peaks per 5 ms window, ECHO_N_WINDOWS entries
    truncated: bool = False      # True when the profile ran past the signal end


@dataclass(frozen=True)
class AcousticMetrics:
    """Summary descriptors extracted from a single RIR."""

    t60_s: float
    drr_db: float
    direct_index: int
    geometric_distance_m: float
    echo_density: tuple[int, ...]
    total_energy_db: float
    flags: frozenset[str] = frozenset()


def schroeder_edc(rir: RIRecording) -> EnergyDecayCurve:
    """Backward-integrated energy decay curve of an impulse response.

    ``values_db[n] = 10 log10(sum_{k>=n} x[k]^2 / total)``, clamped at
    the -120 dB floor. Raises :class:`ZeroEnergyError` for all-zero
    input.
    """
    power = rir.samples.astype(np.float64) ** 2
    tail_energy = np.cumsum(power[::-1])[::-1]
    total = float(tail_energy[0])
    if total <= 0.0:
        raise ZeroEnergyError("cannot integrate an all-zero impulse response")
    ratio = np.maximum(tail_energy / total, 10.0 ** (DB_FLOOR / 10.0))
    return EnergyDecayCurve(values_db=10.0 * np.log10(ratio), total_energy=total)


def estimate_t60(edc: EnergyDecayCurve, sample_rate: int) -> T60Estimate:
    """Reverberation time from a least-squares line through the EDC.

    The line is fitted to the -5..-25 dB segment and extrapolated to 60 dB
    of decay (T20 x 3). Curves with 15-30 dB of usable range fall back to
    the -5..-15 dB segment (T10 x 6) and are flagged. Under 15 dB of
    usable decay raises :class:`InsufficientDecayError`.
    """
    if sample_rate <= 0:
        raise ValueError(f"sample_rate must be positive, got {sample_rate}")
    values = edc.values_db
    usable = np.nonzero(values > DB_FLOOR + 1e-9)[0]
    dynamic_range_db = -float(values[usable[-1]]) if usable.size else 0.0
    if dynamic_range_db < 15.0:
        raise InsufficientDecayError(
            f"only {dynamic_range_db:.1f} dB of usable decay, need at least 15 dB"
        )
    fallback = dynamic_range_db < 30.0
    span = _T10_SPAN_DB if fallback else _T20_SPAN_DB
    segment = np.nonzero((values <= span[0]) & (values >= span[1]))[0]
    if segment.size < _MIN_FIT_POINTS:
        raise InsufficientDecayError(
            f"decay segment {span} dB holds {segment.size} samples, "
            f"need {_MIN_FIT_POINTS} for a fit"
        )
    times = segment / float(sample_rate)
    slope, _ = np.polyfit(times, values[segment], 1)
    if slope >= 0.0:
        raise InsufficientDecayError("decay segment is not decaying")
    return T60Estimate(t60_s=float(-60.0 / slope), fallback=fallback)


def detect_direct_path(rir: RIRecording) -> int:
    """Index of the direct arrival.

    First sample whose magnitude reaches half the global peak; robust to
    the direct path not being the tallest sample when a later reflection
    pair happens to add up.
    """
    magnitudes = np.abs(rir.samples)
    peak = float(magnitudes.max())
    if peak <= 0.0:
        raise ZeroEnergyError("all-zero impulse response has no direct path")
    return int(np.argmax(magnitudes >= DIRECT_PEAK_FRACTION * peak))


def geometric_distance(direct_index: int, sample_rate: int) -> float:
    """Source-receiver distance implied by the direct-path delay."""
    return direct_index / float(sample_rate) * SPEED_OF_SOUND_M_S


def compute_drr(rir: RIRecording, direct_index: int) -> DrrEstimate:
    """Direct-to-reverberant energy ratio in dB.

    The direct window is the closed interval from 0.5 ms before to
    2.5 ms after ``direct_index``, clamped to the signal bounds; all
    remaining energy counts as reverberant. A vanishing reverberant
    part yields the +100 dB ceiling with ``at_ceiling`` set instead of
    an error.
    """
    samples = rir.samples
    n = samples.size
    if not 0 <= direct_index < n:
        raise ValueError(f"direct_index {direct_index} outside [0, {n})")
    pre = round(DRR_WINDOW_PRE_S * rir.sample_rate)
    post = round(DRR_WINDOW_POST_S * rir.sample_rate)
    lo = max(0, direct_index - pre)
    hi = min(n, direct_index + post + 1)
    window = samples[lo:hi]
    direct_energy = float(window @ window)
    total_energy = float(samples @ samples)
    if total_energy <= 0.0:
        raise ZeroEnergyError("all-zero impulse response has no energy ratio")
    reverberant_energy = total_energy - direct_energy
    if reverberant_energy <= 0.0:
        return DrrEstimate(DRR_CEILING_DB, at_ceiling=True)
    floor = total_energy * 10.0 ** (DB_FLOOR / 10.0)
    drr = 10.0 * (np.log10(max(direct_energy, floor)) - np.log10(reverberant_energy))
    if drr >= DRR_CEILING_DB:
        return DrrEstimate(DRR_CEILING_DB, at_ceiling=True)
    return DrrEstimate(float(drr), at_ceiling=False)


def early_reflection_profile(rir: RIRecording, direct_index: int) -> EchoDensityProfile:
    """Per-window echo counts over the 50 ms following the direct path.

    The span is split into ten 5 ms windows (window 0 starts at the
    direct sample). A sample counts as an echo when it is a local
    magnitude maximum (strictly above its left neighbour, at least its
    right one, out-of-range neighbours read as zero) and exceeds 10% of
    the direct sample's magnitude. Profiles that run past the end of the
    signal keep their ten windows but are flagged truncated.
    """
    magnitudes = np.abs(rir.samples)
    n = magnitudes.size
    if not 0 <= direct_index < n:
        raise ValueError(f"direct_index {direct_index} outside [0, {n})")
    threshold = ECHO_PEAK_FRACTION * float(magnitudes[direct_index])
    window_len = round(ECHO_WINDOW_S * rir.sample_rate)
    span = ECHO_N_WINDOWS * window_len
    end = direct_index + span
    truncated = end > n
    end = min(end, n)

    segment = magnitudes[direct_index:end]
    left = np.empty_like(segment)
    left[0] = magnitudes[direct_index - 1] if direct_index > 0 else 0.0
    left[1:] = segment[:-1]
    right = np.empty_like(segment)
    right[-1] = magnitudes[end] if end < n else 0.0
    right[:-1] = segment[1:]
    is_echo = (segment > left) & (segment >= right) & (segment > threshold)

    counts = []
    for w in range(ECHO_N_WINDOWS):
        counts.append(int(np.count_nonzero(is_echo[w * window_len:(w + 1) * window_len])))
    return EchoDensityProfile(counts=tuple(counts), truncated=truncated)


def analyze_rir(rir: RIRecording) -> AcousticMetrics:
    """All acoustic descriptors of one RIR in a single pass.

    ``total_energy_db`` is the physical (pre-normalization) energy,
    i.e. it folds ``norm_gain`` back in, so it is invariant under
    amplitude normalization with honest gain bookkeeping.
    """
    edc = schroeder_edc(rir)
    t60 = estimate_t60(edc, rir.sample_rate)
    direct_index = detect_direct_path(rir)
    drr = compute_drr(rir, direct_index)
    echo = early_reflection_profile(rir, direct_index)

    physical_energy = rir.norm_gain ** 2 * edc.total_energy
    total_energy_db = max(10.0 * np.log10(physical_energy), DB_FLOOR)

    flags = set()
    if t60.fallback:
        flags.add(T60_FALLBACK_FLAG)
    if drr.at_ceiling:
        flags.add(DRR_CEILING_FLAG)
    if echo.truncated:
        flags.add(ECHO_TRUNCATED_FLAG)

    return AcousticMetrics(
        t60_s=t60.t60_s,
        drr_db=drr.drr_db,
        direct_index=direct_index,
        geometric_distance_m=geometric_distance(direct_index, rir.sample_rate),
        echo_density=echo.counts,
        total_energy_db=float(total_energy_db),
        flags=frozenset(flags),
    )
