"""Gesture vocabulary and acquisition protocol description.

These types are shared by the session generator, the recording container
and the classification pipeline, so they live in their own module.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum


class GestureLabel(IntEnum):
    """Hand states used throughout the toolkit.

    NEUTRAL is the rest class; the remaining five are the classified
    gestures. The integer value doubles as the label-track byte in
    recording files.
    """

    NEUTRAL = 0
    THUMB = 1
    INDEX = 2
    MIDDLE = 3
    RING = 4
    HAND_CLOSURE = 5

    @property
    def display_name(self) -> str:
        return _DISPLAY[self]


_DISPLAY = {
    GestureLabel.NEUTRAL: "Neutral",
    GestureLabel.THUMB: "Thumb",
    GestureLabel.INDEX: "Index",
    GestureLabel.MIDDLE: "Middle",
    GestureLabel.RING: "Ring",
    GestureLabel.HAND_CLOSURE: "Hand",
}

#: The five classified gestures, in report row order. NEUTRAL is excluded.
FIVE_GESTURES: tuple[GestureLabel, ...] = (
    GestureLabel.THUMB,
    GestureLabel.INDEX,
    GestureLabel.MIDDLE,
    GestureLabel.RING,
    GestureLabel.HAND_CLOSURE,
)


@dataclass(frozen=True)
class ProtocolSpec:
    """Acquisition protocol: what one recording session looks like.

    Defaults: 250 Hz, 4 channels, 20 repetitions per gesture, each a 5 s
    hold followed by a 5 s neutral rest.
    """

    sample_rate: float = 250.0
    channels: int = 4
    hold_s: float = 5.0
    rest_s: float = 5.0
    reps_per_gesture: int = 20
    gestures: tuple[GestureLabel, ...] = FIVE_GESTURES

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be > 0, got {self.sample_rate}")
        if self.channels < 1:
            raise ValueError(f"channels must be >= 1, got {self.channels}")
        if self.hold_s <= 0:
            raise ValueError(f"hold_s must be > 0, got {self.hold_s}")
        if self.rest_s < 0:
            raise ValueError(f"rest_s must be >= 0, got {self.rest_s}")
        if self.reps_per_gesture < 1:
            raise ValueError(
                f"reps_per_gesture must be >= 1, got {self.reps_per_gesture}")
        if not self.gestures:
            raise ValueError("gestures must be a nonempty sequence")
        if GestureLabel.NEUTRAL in self.gestures:
            raise ValueError("NEUTRAL is the rest class, not a held gesture")
        object.__setattr__(self, "gestures", tuple(GestureLabel(g) for g in self.gestures))

    @property
    def hold_samples(self) -> int:
        return int(round(self.hold_s * self.sample_rate))

    @property
    def rest_samples(self) -> int:
        return int(round(self.rest_s * self.sample_rate))

    @property
    def rep_samples(self) -> int:
        return self.hold_samples + self.rest_samples

    @property
    def session_samples(self) -> int:
        return self.rep_samples * self.reps_per_gesture * len(self.gestures)

    @property
    def duration_s(self) -> float:
        return self.session_samples / self.sample_rate

    def to_dict(self) -> dict:
        return {
            "sample_rate": self.sample_rate,
            "channels": self.channels,
            "hold_s": self.hold_s,
            "rest_s": self.rest_s,
            "reps_per_gesture": self.reps_per_gesture,
            "gestures": [g.name for g in self.gestures],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ProtocolSpec":
        return cls(
            sample_rate=float(d["sample_rate"]),
            channels=int(d["channels"]),
            hold_s=float(d["hold_s"]),
            rest_s=float(d["rest_s"]),
            reps_per_gesture=int(d["reps_per_gesture"]),
            gestures=tuple(GestureLabel[name] for name in d["gestures"]),
        )
