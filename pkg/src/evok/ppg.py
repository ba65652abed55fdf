"""Pulse waveform synthesis, beat detection and heart-rate estimation.

The synthetic signal stands in for an optical pulse sensor: each beat is a
Gaussian bump (sigma 60 ms, amplitude 0.5) on a 0.25 baseline, plus
configurable white noise, slow baseline wander and sporadic motion
artifacts.  Two presets model sensor placement: EARLOBE (stable) and
FINGERTIP (movement-prone, more artifacts).

Detection is an adaptive-threshold rising-edge crossing in the style of
hobbyist pulse sensor firmware: the threshold is the midpoint of the
running min/max over a trailing 3 s window, a beat fires on an upward
crossing, and a 250 ms refractory period suppresses double counting.
Inter-beat intervals outside the physiological gate of [250, 2000] ms are
kept as events but rejected for rate purposes (ibi_ms is None).

The rate estimate is a rounded 60000 / median over the last five accepted
intervals, flagged unavailable until two intervals exist and whenever no
beat has been seen for five seconds (contact loss).
"""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from statistics import median
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

BPM_MIN = 30
BPM_MAX = 240

PULSE_SIGMA_MS = 60.0
PULSE_AMPLITUDE = 0.5
PULSE_BASELINE = 0.25
ARTIFACT_SIGMA_MS = 40.0


class InvalidProfile(ValueError):
    """Malformed bpm profile (non-monotone times or bpm out of range)."""


@dataclass(frozen=True)
class PpgSample:
    t_ms: int
    amplitude: float


@dataclass(frozen=True)
class NoiseProfile:
    white_noise_sigma: float = 0.0
    baseline_wander_amp: float = 0.0
    baseline_wander_freq_hz: float = 0.0
    artifact_rate_per_min: float = 0.0
    artifact_amp: float = 0.0

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if not np.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and non-negative, got {value}")


ZERO_NOISE = NoiseProfile()

# Stable placement: little movement, rare artifacts.
EARLOBE = NoiseProfile(
    white_noise_sigma=0.008,
    baseline_wander_amp=0.015,
    baseline_wander_freq_hz=0.25,
    artifact_rate_per_min=0.5,
    artifact_amp=0.15,
)

# Movement-prone placement: frequent hand-motion artifacts.
FINGERTIP = NoiseProfile(
    white_noise_sigma=0.015,
    baseline_wander_amp=0.03,
    baseline_wander_freq_hz=0.3,
    artifact_rate_per_min=10.0,
    artifact_amp=0.4,
)

NOISE_PRESETS = {"earlobe": EARLOBE, "fingertip": FINGERTIP, "zero": ZERO_NOISE}


@dataclass(frozen=True)
class BeatEvent:
    t_ms: int
    ibi_ms: Optional[int] = None  # None: first beat or interval outside the gate


@dataclass(frozen=True)
class HeartRateEstimate:
    bpm: Optional[int]  # None = unavailable
    warmed_up: bool
    contact_ok: bool


def _validate_profile(bpm_profile: Sequence[tuple[int, float]]) -> None:
    if not bpm_profile:
        raise InvalidProfile("empty bpm profile")
    last_t = None
    for t, bpm in bpm_profile:
        if last_t is not None and t <= last_t:
            raise InvalidProfile(f"profile t_ms must strictly increase (saw {t} after {last_t})")
        if not BPM_MIN <= bpm <= BPM_MAX:
            raise InvalidProfile(f"profile bpm {bpm} not in [{BPM_MIN}, {BPM_MAX}]")
        last_t = t


def _bpm_at(bpm_profile: Sequence[tuple[int, float]], t_ms: float) -> float:
    """Piecewise-linear interpolation, clamped to the profile's ends."""
    if t_ms <= bpm_profile[0][0]:
        return float(bpm_profile[0][1])
    if t_ms >= bpm_profile[-1][0]:
        return float(bpm_profile[-1][1])
    for (t0, b0), (t1, b1) in zip(bpm_profile, bpm_profile[1:]):
        if t0 <= t_ms <= t1:
            return b0 + (b1 - b0) * (t_ms - t0) / (t1 - t0)
    raise AssertionError("unreachable: profile covers the interval")


def generate_ppg(
    bpm_profile: Sequence[tuple[int, float]],
    duration_ms: int,
    sample_rate_hz: int = 50,
    noise: NoiseProfile = ZERO_NOISE,
    seed: int = 0,
) -> tuple[list[PpgSample], list[float]]:
    """Synthesize a pulse waveform plus its ground-truth beat times.

    The spacing between a beat at time t and the next one is
    60000 / bpm(t) ms, with bpm() interpolated along the profile; the
    first beat sits half a period in, so no bump is truncated at t=0.
    Deterministic for a fixed seed.  Returns (samples, beat_times_ms).
    """
    _validate_profile(bpm_profile)
    if duration_ms <= 0:
        raise ValueError("duration_ms must be positive")
    if not 25 <= sample_rate_hz <= 1000:  # t_ms is an integer grid
        raise ValueError("sample_rate_hz must be in 25..1000")

    beat_times: list[float] = []
    t_beat = 30000.0 / _bpm_at(bpm_profile, 0)
    while t_beat < duration_ms:
        beat_times.append(t_beat)
        t_beat += 60000.0 / _bpm_at(bpm_profile, t_beat)

    n = int(np.ceil(duration_ms * sample_rate_hz / 1000))
    # Sample clock on a 1 ms grid; exact spacing whenever the period is whole ms.
    t = np.rint(np.arange(n) * (1000.0 / sample_rate_hz)).astype(np.int64)
    amp = np.full(n, PULSE_BASELINE)

    two_sigma_sq = 2.0 * PULSE_SIGMA_MS**2
    reach = 4.0 * PULSE_SIGMA_MS
    for tb in beat_times:
        lo = int(np.searchsorted(t, tb - reach))
        hi = int(np.searchsorted(t, tb + reach))
        window = t[lo:hi] - tb
        amp[lo:hi] += PULSE_AMPLITUDE * np.exp(-(window**2) / two_sigma_sq)

    rng = np.random.default_rng(seed)
    phase = rng.uniform(0.0, 2.0 * np.pi)
    if noise.baseline_wander_amp > 0:
        amp += noise.baseline_wander_amp * np.sin(
            2.0 * np.pi * noise.baseline_wander_freq_hz * t / 1000.0 + phase
        )
    amp += rng.normal(0.0, noise.white_noise_sigma, n) if noise.white_noise_sigma > 0 else 0.0

    n_artifacts = rng.poisson(noise.artifact_rate_per_min * duration_ms / 60000.0)
    artifact_times = np.sort(rng.uniform(0, duration_ms, n_artifacts))
    signs = rng.choice([-1.0, 1.0], n_artifacts)
    art_two_sigma_sq = 2.0 * ARTIFACT_SIGMA_MS**2
    for ta, sign in zip(artifact_times, signs):
        lo = int(np.searchsorted(t, ta - 4 * ARTIFACT_SIGMA_MS))
        hi = int(np.searchsorted(t, ta + 4 * ARTIFACT_SIGMA_MS))
        window = t[lo:hi] - ta
        amp[lo:hi] += sign * noise.artifact_amp * np.exp(-(window**2) / art_two_sigma_sq)

    samples = [PpgSample(int(ti), float(ai)) for ti, ai in zip(t, amp)]
    return samples, beat_times


@dataclass(frozen=True)
class DetectorConfig:
    window_ms: int = 3000
    refractory_ms: int = 250
    min_span: float = 0.1  # window peak-to-trough needed before crossings arm
    ibi_min_ms: int = 250
    ibi_max_ms: int = 2000


class BeatDetector:
    """Streaming adaptive-threshold beat detector.

    The threshold for a sample is the midpoint of the min and max over the
    trailing window of *prior* samples, so a monotone first-ever rise can
    never self-trigger; the detector locks on from the second pulse of a
    fresh stream.  Feed samples in time order from a single thread.
    """

    def __init__(self, config: DetectorConfig = DetectorConfig()):
        self.config = config
        # Monotonic deques over the trailing window: O(1) amortized min/max.
        self._maxdq: deque[tuple[int, float]] = deque()
        self._mindq: deque[tuple[int, float]] = deque()
        self._prev: Optional[PpgSample] = None
        self._last_beat_ms: Optional[int] = None

    def process(self, sample: PpgSample) -> Optional[BeatEvent]:
        cfg = self.config
        t, a = sample.t_ms, sample.amplitude
        horizon = t - cfg.window_ms
        while self._maxdq and self._maxdq[0][0] < horizon:
            self._maxdq.popleft()
        while self._mindq and self._mindq[0][0] < horizon:
            self._mindq.popleft()

        event = None
        if self._maxdq and self._prev is not None:
            wmax = self._maxdq[0][1]
            wmin = self._mindq[0][1]
            threshold = 0.5 * (wmin + wmax)
            armed = (wmax - wmin) >= cfg.min_span
            crossed = self._prev.amplitude < threshold <= a
            clear = self._last_beat_ms is None or t - self._last_beat_ms >= cfg.refractory_ms
            if armed and crossed and clear:
                ibi = None
                if self._last_beat_ms is not None:
                    gap = t - self._last_beat_ms
                    if cfg.ibi_min_ms <= gap <= cfg.ibi_max_ms:
                        ibi = gap
                event = BeatEvent(t_ms=t, ibi_ms=ibi)
                self._last_beat_ms = t

        while self._maxdq and self._maxdq[-1][1] <= a:
            self._maxdq.pop()
        self._maxdq.append((t, a))
        while self._mindq and self._mindq[-1][1] >= a:
            self._mindq.pop()
        self._mindq.append((t, a))
        self._prev = sample
        return event


def detect_beats(
    samples: Iterable[PpgSample], config: DetectorConfig = DetectorConfig()
) -> Iterator[BeatEvent]:
    """Run the streaming detector over samples, yielding beat events."""
    detector = BeatDetector(config)
    for sample in samples:
        event = detector.process(sample)
        if event is not None:
            yield event


@dataclass(frozen=True)
class WarmupPolicy:
    min_elapsed_ms: int = 60000
    min_ibis: int = 10


class RateEstimator:
    """Median-smoothed BPM from accepted inter-beat intervals.

    warmed_up latches true once min_ibis intervals have been accepted and
    min_elapsed_ms of stream time has passed; contact_ok drops when no
    beat (of any kind) has been seen for contact_timeout_ms.
    """

    MEDIAN_WINDOW = 5
    CONTACT_TIMEOUT_MS = 5000

    def __init__(self, warmup: WarmupPolicy = WarmupPolicy()):
        self.warmup = warmup
        self._recent: deque[int] = deque(maxlen=self.MEDIAN_WINDOW)
        self._accepted_count = 0
        self._last_beat_ms: Optional[int] = None
        self._warmed = False

    def push(self, beat: BeatEvent) -> None:
        self._last_beat_ms = beat.t_ms
        if beat.ibi_ms is not None:
            self._recent.append(beat.ibi_ms)
            self._accepted_count += 1

    def estimate(self, now_ms: int) -> HeartRateEstimate:
        if (
            not self._warmed
            and self._accepted_count >= self.warmup.min_ibis
            and now_ms >= self.warmup.min_elapsed_ms
        ):
            self._warmed = True
        contact_ok = (
            self._last_beat_ms is not None
            and now_ms - self._last_beat_ms <= self.CONTACT_TIMEOUT_MS
        )
        bpm = None
        if contact_ok and self._accepted_count >= 2:
            bpm = round(60000.0 / median(self._recent))
        return HeartRateEstimate(bpm=bpm, warmed_up=self._warmed, contact_ok=contact_ok)


def estimate_rate(
    beats: Iterable[BeatEvent], now_ms: int, warmup: WarmupPolicy = WarmupPolicy()
) -> HeartRateEstimate:
    """Fold a finite beat stream into the estimate as of now_ms."""
    estimator = RateEstimator(warmup)
    for beat in beats:
        estimator.push(beat)
    return estimator.estimate(now_ms)


# ---------------------------------------------------------------------------
# CSV exchange format: `t_ms,amplitude` rows plus optional `t_ms` beat sidecar.


def write_samples_csv(samples: Iterable[PpgSample], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t_ms", "amplitude"])
        for s in samples:
            writer.writerow([s.t_ms, repr(s.amplitude)])


def read_samples_csv(path: str | Path) -> list[PpgSample]:
    samples: list[PpgSample] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["t_ms", "amplitude"]:
            raise ValueError(f"{path}: expected header 't_ms,amplitude'")
        last_t = None
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                t, amp = int(row[0]), float(row[1])
            except (ValueError, IndexError) as exc:
                raise ValueError(f"{path}:{lineno}: bad sample row {row!r}") from exc
            if last_t is not None and t <= last_t:
                raise ValueError(f"{path}:{lineno}: t_ms must strictly increase")
            samples.append(PpgSample(t, amp))
            last_t = t
    return samples


def write_beats_csv(beat_times_ms: Iterable[float], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t_ms"])
        for t in beat_times_ms:
            writer.writerow([repr(float(t))])


def read_beats_csv(path: str | Path) -> list[float]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["t_ms"]:
            raise ValueError(f"{path}: expected header 't_ms'")
        return [float(row[0]) for row in reader if row]
