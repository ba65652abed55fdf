"""Receiver: notification state machine, daemon and UI bridge."""

from .machine import (
    AlarmStart,
    AlarmStop,
    BeepOnce,
    DisplayDigit,
    FrameArrived,
    InvalidRangeError,
    LedColor,
    NormalRange,
    ReceiverState,
    SetRange,
    Tick,
    TogglePause,
    Zone,
    classify_zone,
    display_sequence,
    initial_state,
    state_json,
    step,
)

__all__ = [
    "AlarmStart",
    "AlarmStop",
    "BeepOnce",
    "DisplayDigit",
    "FrameArrived",
    "InvalidRangeError",
    "LedColor",
    "NormalRange",
    "ReceiverState",
    "SetRange",
    "Tick",
    "TogglePause",
    "Zone",
    "classify_zone",
    "display_sequence",
    "initial_state",
    "state_json",
    "step",
]
