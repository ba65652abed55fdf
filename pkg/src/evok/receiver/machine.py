"""Receiver notification state machine.

Pure transition function over a frozen state: every input (decoded frame,
timer tick, pause toggle, range change) is an event, and ``step`` returns
the next state plus the effects a renderer should perform (LED color,
entry beep, sustained-high alarm start/stop, display digit).

Zone rules against the configured normal range [low, high]:

    LOW     bpm < low          blue LED
    NORMAL  low <= bpm <= high green LED
    HIGH    bpm > high         red LED, beep on entry, alarm when
                               continuously HIGH for alarm_after_ms
    WARMUP  sender estimate not usable yet (flagged frames)   white LED
    STALE   no frame for stale_after_ms                       LED off
    PAUSED  receiving toggled off by the wearer               LED off

Precedence: PAUSED > STALE > WARMUP > data zones.  While paused, frames
are discarded (liveness bookkeeping still runs) and resuming shows STALE
until the next accepted frame.  The BPM readout scrolls one digit at a
time, most significant first, advancing every digit_tick_ms.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Union

from ..protocol import FLAG_CONTACT_LOST, FLAG_WARMUP, Frame, MsgType, accepts

BPM_DOMAIN = (30, 240)


class InvalidRangeError(ValueError):
    """Rejected normal-range update; receiver state is left unchanged."""


class Zone(Enum):
    LOW = "low"
    NORMAL = "normal"
    HIGH = "high"
    WARMUP = "warmup"
    STALE = "stale"
    PAUSED_DISPLAY = "paused"


DATA_ZONES = (Zone.LOW, Zone.NORMAL, Zone.HIGH)

LED_FOR_ZONE = {
    Zone.LOW: "blue",
    Zone.NORMAL: "green",
    Zone.HIGH: "red",
    Zone.WARMUP: "white",
    Zone.STALE: "off",
    Zone.PAUSED_DISPLAY: "off",
}


@dataclass(frozen=True)
class NormalRange:
    low: int = 60
    high: int = 100

    def __post_init__(self):
        if not (30 <= self.low < self.high <= 220):
            raise InvalidRangeError(
                f"need 30 <= low < high <= 220, got {self.low}:{self.high}"
            )


# -- effects ---------------------------------------------------------------


@dataclass(frozen=True)
class LedColor:
    color: str  # blue | green | red | white | off


@dataclass(frozen=True)
class BeepOnce:
    pass


@dataclass(frozen=True)
class AlarmStart:
    pass


@dataclass(frozen=True)
class AlarmStop:
    pass


@dataclass(frozen=True)
class DisplayDigit:
    digit: int


Effect = Union[LedColor, BeepOnce, AlarmStart, AlarmStop, DisplayDigit]


def effect_json(effect: Effect) -> dict:
    if isinstance(effect, LedColor):
        return {"effect": "led", "color": effect.color}
    if isinstance(effect, BeepOnce):
        return {"effect": "beep"}
    if isinstance(effect, AlarmStart):
        return {"effect": "alarm_start"}
    if isinstance(effect, AlarmStop):
        return {"effect": "alarm_stop"}
    return {"effect": "digit", "digit": effect.digit}


# -- events ----------------------------------------------------------------


@dataclass(frozen=True)
class FrameArrived:
    frame: Frame
    now_ms: int


@dataclass(frozen=True)
class Tick:
    now_ms: int


@dataclass(frozen=True)
class TogglePause:
    now_ms: int


@dataclass(frozen=True)
class SetRange:
    low: int
    high: int
    now_ms: int


Event = Union[FrameArrived, Tick, TogglePause, SetRange]


@dataclass(frozen=True)
class ReceiverState:
    group_id: int = 0
    range: NormalRange = field(default_factory=NormalRange)
    alarm_after_ms: int = 15000
    stale_after_ms: int = 5000
    digit_tick_ms: int = 500

    zone: Zone = Zone.STALE
    last_bpm: Optional[int] = None
    paused: bool = False
    high_since_ms: Optional[int] = None
    alarm_active: bool = False
    last_frame_ms: Optional[int] = None
    last_seq: Optional[int] = None
    t_ms: int = 0

    # scrolling readout: digit currently shown, the rest of the number, and
    # which bpm value the scroll belongs to
    current_digit: Optional[int] = None
    display_queue: tuple[int, ...] = ()
    displayed_bpm: Optional[int] = None
    last_digit_ms: Optional[int] = None


def initial_state(
    group_id: int = 0,
    range: NormalRange = NormalRange(),
    alarm_after_ms: int = 15000,
    stale_after_ms: int = 5000,
    digit_tick_ms: int = 500,
) -> ReceiverState:
    return ReceiverState(
        group_id=group_id,
        range=range,
        alarm_after_ms=alarm_after_ms,
        stale_after_ms=stale_after_ms,
        digit_tick_ms=digit_tick_ms,
    )


def classify_zone(bpm: int, range: NormalRange) -> Zone:
    """LOW below the range, NORMAL inside it (inclusive), HIGH above it."""
    if not BPM_DOMAIN[0] <= bpm <= BPM_DOMAIN[1]:
        raise ValueError(f"bpm {bpm} outside {BPM_DOMAIN}")
    if bpm < range.low:
        return Zone.LOW
    if bpm > range.high:
        return Zone.HIGH
    return Zone.NORMAL


def display_sequence(bpm: int) -> list[int]:
    """Decimal digits of bpm, most significant first (scroll order)."""
    if not BPM_DOMAIN[0] <= bpm <= BPM_DOMAIN[1]:
        raise ValueError(f"bpm {bpm} outside {BPM_DOMAIN}")
    return [int(c) for c in str(bpm)]


def state_json(state: ReceiverState) -> dict:
    """The state message pushed to UIs (and printed in headless mode)."""
    bpm = state.last_bpm if state.zone in DATA_ZONES else None
    return {
        "type": "state",
        "bpm": bpm,
        "zone": state.zone.value,
        "paused": state.paused,
        "alarm": state.alarm_active,
        "digit": state.current_digit,
        "range": {"low": state.range.low, "high": state.range.high},
        "t_ms": state.t_ms,
    }


def step(state: ReceiverState, event: Event) -> tuple[ReceiverState, list[Effect]]:
    """Apply one event; pure, so identical inputs give identical outputs."""
    if isinstance(event, FrameArrived):
        return _on_frame(state, event.frame, event.now_ms)
    if isinstance(event, Tick):
        return _on_tick(state, event.now_ms)
    if isinstance(event, TogglePause):
        return _on_toggle_pause(state, event.now_ms)
    if isinstance(event, SetRange):
        return _on_set_range(state, event.low, event.high, event.now_ms)
    raise TypeError(f"unknown event {event!r}")


def _clear_display(state: ReceiverState) -> ReceiverState:
    return replace(
        state, current_digit=None, display_queue=(), displayed_bpm=None, last_digit_ms=None
    )


def _transition(
    state: ReceiverState, new_zone: Zone, now_ms: int, led_always: bool
) -> tuple[ReceiverState, list[Effect]]:
    """Shared zone bookkeeping: beep on HIGH entry, sustained-high alarm,
    alarm stop on leaving HIGH, LED effect.  Also called with the current
    zone to advance the alarm timer."""
    prev = state.zone
    effects: list[Effect] = []
    alarm = state.alarm_active
    high_since = state.high_since_ms

    if new_zone is Zone.HIGH:
        if high_since is None:
            high_since = now_ms
    else:
        high_since = None
        if alarm:
            effects.append(AlarmStop())
            alarm = False

    if led_always or new_zone is not prev:
        effects.append(LedColor(LED_FOR_ZONE[new_zone]))
    if new_zone is Zone.HIGH and prev in (Zone.LOW, Zone.NORMAL):
        effects.append(BeepOnce())
    if (
        new_zone is Zone.HIGH
        and not alarm
        and now_ms - high_since >= state.alarm_after_ms
    ):
        effects.append(AlarmStart())
        alarm = True

    state = replace(state, zone=new_zone, high_since_ms=high_since, alarm_active=alarm)
    if new_zone not in DATA_ZONES:
        state = _clear_display(state)
    return state, effects


def _on_frame(state: ReceiverState, frame: Frame, now_ms: int) -> tuple[ReceiverState, list[Effect]]:
    # Liveness updates on any structurally valid frame, even ignored ones.
    state = replace(state, last_frame_ms=now_ms, t_ms=now_ms)
    if state.paused:
        return state, []
    if frame.msg_type is MsgType.HELLO:
        return state, []
    if not accepts(state.group_id, state.last_seq, frame):
        return state, []
    state = replace(state, last_seq=frame.seq)

    if frame.flags & (FLAG_WARMUP | FLAG_CONTACT_LOST) or frame.bpm == 0:
        state = replace(state, last_bpm=None)
        return _transition(state, Zone.WARMUP, now_ms, led_always=True)

    zone = classify_zone(frame.bpm, state.range)
    state = replace(state, last_bpm=frame.bpm)
    state, effects = _transition(state, zone, now_ms, led_always=True)
    if frame.bpm != state.displayed_bpm:
        digits = display_sequence(frame.bpm)
        state = replace(
            state,
            displayed_bpm=frame.bpm,
            current_digit=digits[0],
            display_queue=tuple(digits[1:]),
            last_digit_ms=now_ms,
        )
        effects.append(DisplayDigit(digits[0]))
    return state, effects


def _on_tick(state: ReceiverState, now_ms: int) -> tuple[ReceiverState, list[Effect]]:
    state = replace(state, t_ms=now_ms)
    if state.paused:
        return state, []
    stale = state.last_frame_ms is None or now_ms - state.last_frame_ms > state.stale_after_ms
    if stale:
        if state.zone is Zone.STALE:
            return state, []
        return _transition(state, Zone.STALE, now_ms, led_always=False)

    effects: list[Effect] = []
    if state.zone is Zone.HIGH:
        state, effects = _transition(state, Zone.HIGH, now_ms, led_always=False)
    if (
        state.current_digit is not None
        and state.last_digit_ms is not None
        and now_ms - state.last_digit_ms >= state.digit_tick_ms
    ):
        if state.display_queue:
            digit, rest = state.display_queue[0], state.display_queue[1:]
        else:  # number fully shown: loop the scroll
            digits = display_sequence(state.displayed_bpm)
            digit, rest = digits[0], tuple(digits[1:])
        state = replace(
            state, current_digit=digit, display_queue=tuple(rest), last_digit_ms=now_ms
        )
        effects.append(DisplayDigit(digit))
    return state, effects


def _on_toggle_pause(state: ReceiverState, now_ms: int) -> tuple[ReceiverState, list[Effect]]:
    if not state.paused:
        effects: list[Effect] = [AlarmStop()] if state.alarm_active else []
        state = replace(
            state,
            paused=True,
            zone=Zone.PAUSED_DISPLAY,
            alarm_active=False,
            high_since_ms=None,
            t_ms=now_ms,
        )
        state = _clear_display(state)
        effects.append(LedColor(LED_FOR_ZONE[Zone.PAUSED_DISPLAY]))
        return state, effects
    state = replace(state, paused=False, zone=Zone.STALE, t_ms=now_ms)
    return state, [LedColor(LED_FOR_ZONE[Zone.STALE])]


def _on_set_range(
    state: ReceiverState, low: int, high: int, now_ms: int
) -> tuple[ReceiverState, list[Effect]]:
    new_range = NormalRange(low, high)  # raises InvalidRangeError, state untouched
    state = replace(state, range=new_range, t_ms=now_ms)
    if state.paused or state.zone not in DATA_ZONES or state.last_bpm is None:
        return state, []
    new_zone = classify_zone(state.last_bpm, new_range)
    if new_zone is state.zone:
        return state, []
    return _transition(state, new_zone, now_ms, led_always=False)
