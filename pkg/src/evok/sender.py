"""Sender daemon: pulse source -> beat detection -> rate estimate -> frames.

Drives a synthetic or file-based sample stream through the detector and
estimator, and transmits one HR_DATA frame per cadence interval (default
1 s), preceded by a single HELLO.  Sequence numbers start at 0 with the
HELLO and increment by one per frame.  Until the estimator warms up the
frames carry bpm=0 with the WARMUP flag; on contact loss, bpm=0 with
CONTACT_LOST.  Clock and transport are injected so the whole daemon runs
under test without wall time or sockets.
"""

from __future__ import annotations

import argparse
import json
import logging
import signal
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

from . import ppg
from .clock import Clock, SystemClock
from .protocol import FLAG_CONTACT_LOST, FLAG_WARMUP, Frame, MsgType, encode
from .transport import DatagramSink, TransportError, UdpSink, parse_hostport

log = logging.getLogger(__name__)

_U32 = 1 << 32


class SourceError(Exception):
    """Sample source missing or unparsable; fatal at startup."""


class ParseError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def parse_bpm_profile(text: str) -> list[tuple[int, int]]:
    """Parse `t_ms,bpm` lines into a profile.

    Requires strictly increasing t_ms and bpm within [30, 240]; blank
    lines and `#` comments are skipped.
    """
    profile: list[tuple[int, int]] = []
    last_t = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ParseError(lineno, f"expected 't_ms,bpm', got {raw!r}")
        try:
            t, bpm = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(lineno, f"non-integer field in {raw!r}") from None
        if last_t is not None and t <= last_t:
            raise ParseError(lineno, f"t_ms {t} not greater than previous {last_t}")
        if not ppg.BPM_MIN <= bpm <= ppg.BPM_MAX:
            raise ParseError(lineno, f"bpm {bpm} out of range [{ppg.BPM_MIN}, {ppg.BPM_MAX}]")
        profile.append((t, bpm))
        last_t = t
    if not profile:
        raise ParseError(1, "profile has no data lines")
    return profile


@dataclass(frozen=True)
class SyntheticSource:
    bpm_profile: Sequence[tuple[int, int]]
    noise: ppg.NoiseProfile = ppg.EARLOBE
    seed: int = 0
    duration_ms: int = 180000


@dataclass(frozen=True)
class FileSource:
    path: Union[str, Path]


@dataclass(frozen=True)
class SenderConfig:
    source: Union[SyntheticSource, FileSource]
    group_id: int
    sender_id: int = 1
    sample_rate_hz: int = 50
    destination: tuple[str, int] = ("127.0.0.1", 45450)
    cadence_ms: int = 1000
    log_path: Optional[Path] = None
    warmup: ppg.WarmupPolicy = field(default_factory=ppg.WarmupPolicy)

    def __post_init__(self):
        if self.cadence_ms < 200:
            raise ValueError("cadence_ms must be >= 200")
        if self.sample_rate_hz < 25:
            raise ValueError("sample_rate_hz must be >= 25")
        if not 0 <= self.group_id <= 255:
            raise ValueError("group_id must be in 0..255")


@dataclass
class SenderStats:
    frames_sent: int = 0
    hr_frames: int = 0
    last_seq: Optional[int] = None
    end_ms: int = 0


def _load_samples(config: SenderConfig) -> tuple[list[ppg.PpgSample], int]:
    """Materialize the sample stream; returns (samples, stream end in ms)."""
    src = config.source
    if isinstance(src, SyntheticSource):
        try:
            samples, _ = ppg.generate_ppg(
                src.bpm_profile,
                duration_ms=src.duration_ms,
                sample_rate_hz=config.sample_rate_hz,
                noise=src.noise,
                seed=src.seed,
            )
        except (ppg.InvalidProfile, ValueError) as exc:
            raise SourceError(str(exc)) from exc
        return samples, src.duration_ms
    try:
        samples = ppg.read_samples_csv(src.path)
    except OSError as exc:
        raise SourceError(f"cannot read {src.path}: {exc}") from exc
    except ValueError as exc:
        raise SourceError(str(exc)) from exc
    if not samples:
        raise SourceError(f"{src.path}: no samples")
    period = samples[1].t_ms - samples[0].t_ms if len(samples) > 1 else 1000 // config.sample_rate_hz
    return samples, samples[-1].t_ms + period


def run_sender(
    config: SenderConfig,
    clock: Clock,
    sink: DatagramSink,
    stop: Optional[Callable[[], bool]] = None,
) -> SenderStats:
    """Run the pipeline until the source is exhausted or stop() turns true.

    Raises SourceError before any frame is sent if the source is bad;
    TransportError is raised by sink construction and handled by the CLI.
    """
    samples, end_ms = _load_samples(config)
    detector = ppg.BeatDetector()
    estimator = ppg.RateEstimator(config.warmup)
    stats = SenderStats(end_ms=end_ms)
    logf = open(config.log_path, "a") if config.log_path else None

    def emit(t_ms: int, msg_type: MsgType) -> None:
        clock.sleep_until_ms(t_ms)
        est = estimator.estimate(t_ms)
        flags = 0
        if msg_type is MsgType.HR_DATA:
            if not est.warmed_up:
                flags |= FLAG_WARMUP
            if not est.contact_ok:
                flags |= FLAG_CONTACT_LOST
            if flags == 0 and est.bpm is None:  # defensive; cannot occur post-warmup
                flags |= FLAG_CONTACT_LOST
        bpm = est.bpm if (msg_type is MsgType.HR_DATA and flags == 0 and est.bpm) else 0
        seq = stats.frames_sent % _U32
        frame = Frame(
            msg_type=msg_type,
            group_id=config.group_id,
            sender_id=config.sender_id,
            seq=seq,
            timestamp_ms=clock.now_ms(),
            bpm=bpm,
            flags=flags,
        )
        sink.send(encode(frame))
        stats.frames_sent += 1
        stats.last_seq = seq
        if msg_type is MsgType.HR_DATA:
            stats.hr_frames += 1
        if logf:
            record = {"t_ms": t_ms, "type": msg_type.name.lower(), "seq": seq,
                      "bpm": bpm, "flags": flags}
            logf.write(json.dumps(record) + "\n")
            logf.flush()

    try:
        emit(0, MsgType.HELLO)
        next_tx = config.cadence_ms
        for sample in samples:
            if stop is not None and stop():
                return stats
            while next_tx <= sample.t_ms:
                emit(next_tx, MsgType.HR_DATA)
                next_tx += config.cadence_ms
            beat = detector.process(sample)
            if beat is not None:
                estimator.push(beat)
        while next_tx <= end_ms:
            if stop is not None and stop():
                return stats
            emit(next_tx, MsgType.HR_DATA)
            next_tx += config.cadence_ms
    finally:
        if logf:
            logf.close()
    return stats


def _build_config(args: argparse.Namespace) -> SenderConfig:
    if args.source == "synthetic":
        if args.profile:
            try:
                profile = parse_bpm_profile(Path(args.profile).read_text())
            except OSError as exc:
                raise SourceError(f"cannot read profile {args.profile}: {exc}") from exc
        else:
            profile = [(0, 75)]
        duration = args.duration_ms if args.duration_ms else profile[-1][0] + 120000
        source: Union[SyntheticSource, FileSource] = SyntheticSource(
            bpm_profile=profile,
            noise=ppg.NOISE_PRESETS[args.noise],
            seed=args.seed,
            duration_ms=duration,
        )
    else:
        if not args.file:
            raise SourceError("--source file requires --file <samples.csv>")
        source = FileSource(args.file)
    return SenderConfig(
        source=source,
        group_id=args.group,
        sender_id=args.id,
        sample_rate_hz=args.rate,
        destination=args.dest,
        cadence_ms=args.cadence_ms,
        log_path=Path(args.log) if args.log else None,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(prog="evok-sender", description=__doc__)
    parser.add_argument("--source", choices=["synthetic", "file"], default="synthetic")
    parser.add_argument("--profile", help="bpm profile file (t_ms,bpm lines) for synthetic source")
    parser.add_argument("--file", help="PPG samples CSV for the file source")
    parser.add_argument("--noise", choices=sorted(ppg.NOISE_PRESETS), default="earlobe")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--rate", type=int, default=50, help="sample rate in Hz")
    parser.add_argument("--duration-ms", type=int, default=0,
                        help="synthetic stream length (default: profile end + 120 s)")
    parser.add_argument("--dest", type=parse_hostport, default=("127.0.0.1", 45450))
    parser.add_argument("--group", type=int, default=0)
    parser.add_argument("--id", type=int, default=1)
    parser.add_argument("--cadence-ms", type=int, default=1000)
    parser.add_argument("--log", help="session log path (ndjson)")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(levelname)s %(message)s")

    stopping = False

    def _on_signal(signum, _frame):
        nonlocal stopping
        stopping = True
        log.info("signal %d, shutting down", signum)

    signal.signal(signal.SIGINT, _on_signal)
    signal.signal(signal.SIGTERM, _on_signal)

    try:
        config = _build_config(args)
        sink = UdpSink(*config.destination)
    except (SourceError, TransportError, ValueError) as exc:
        log.error("%s", exc)
        return 1
    try:
        stats = run_sender(config, SystemClock(), sink, stop=lambda: stopping)
    except SourceError as exc:
        log.error("%s", exc)
        return 1
    finally:
        sink.close()
    log.info("sent %d frames (%d HR_DATA)", stats.frames_sent, stats.hr_frames)
    return 0


if __name__ == "__main__":
    sys.exit(main())
