"""Gaze record parsing and frame assignment.

Record format, one sample per line, whitespace separated::

    t x y LABEL

``t`` is the tracker sample index, ``x``/``y`` are pixel coordinates with
(0, 0) at the top-left corner. Lines starting with ``#`` and blank lines are
ignored. Recognised labels: ``FIX``, ``SP``/``SMP``, ``SAC``, ``BLINK``,
``LOST``; anything else is kept as :attr:`Label.OTHER` with its raw tag.
"""
from __future__ import annotations

import enum
import io
import logging
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import IO, Iterable, Sequence

log = logging.getLogger(__name__)


class GazeParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class Label(enum.Enum):
    FIXATION = "FIX"
    SMOOTH_PURSUIT = "SP"
    SACCADE = "SAC"
    BLINK = "BLINK"
    LOSS_OF_TRACKING = "LOST"
    OTHER = "OTHER"


_TOKENS = {
    "FIX": Label.FIXATION,
    "SP": Label.SMOOTH_PURSUIT,
    "SMP": Label.SMOOTH_PURSUIT,
    "SAC": Label.SACCADE,
    "BLINK": Label.BLINK,
    "LOST": Label.LOSS_OF_TRACKING,
}

ATTENTIVE = frozenset({Label.FIXATION, Label.SMOOTH_PURSUIT})


@dataclass(frozen=True)
class GazeSample:
    t: int
    x: int
    y: int
    label: Label
    tag: str | None = None  # raw token, only for Label.OTHER

    @property
    def token(self) -> str:
        return self.tag if self.label is Label.OTHER else self.label.value


@dataclass(frozen=True)
class RecordingMeta:
    frame_width: int = 640
    frame_height: int = 480
    frame_rate: Fraction = Fraction(30)
    sample_rate: Fraction = Fraction(240)
    subject_id: str = ""

    def __post_init__(self):
        object.__setattr__(self, "frame_rate", Fraction(self.frame_rate))
        object.__setattr__(self, "sample_rate", Fraction(self.sample_rate))
        if self.frame_width <= 0 or self.frame_height <= 0:
            raise ValueError("frame dimensions must be positive")
        if self.frame_rate <= 0 or self.sample_rate <= 0:
            raise ValueError("rates must be positive")
        if self.sample_rate < self.frame_rate:
            raise ValueError("sample_rate must be >= frame_rate")

    def in_bounds(self, s: GazeSample) -> bool:
        return 0 <= s.x < self.frame_width and 0 <= s.y < self.frame_height

    @classmethod
    def parse(cls, text: str) -> "RecordingMeta":
        """Read a ``key=value`` sidecar, e.g. ``width=640 height=480 fps=30 hz=240``."""
        keys = {"width": "frame_width", "height": "frame_height", "fps": "frame_rate",
                "hz": "sample_rate", "subject": "subject_id"}
        kwargs: dict = {}
        for line in text.splitlines():
            line = line.split("#", 1)[0]
            for item in line.split():
                key, sep, value = item.partition("=")
                if not sep or key not in keys:
                    raise ValueError(f"bad metadata entry {item!r}")
                if key in ("width", "height"):
                    kwargs[keys[key]] = int(value)
                elif key in ("fps", "hz"):
                    kwargs[keys[key]] = Fraction(value)
                else:
                    kwargs[keys[key]] = value
        return cls(**kwargs)

    def dumps(self) -> str:
        out = (f"width={self.frame_width} height={self.frame_height} "
               f"fps={self.frame_rate} hz={self.sample_rate}")
        if self.subject_id:
            out += f" subject={self.subject_id}"
        return out + "\n"


def parse_gaze_file(stream: IO | str | bytes, meta: RecordingMeta,
                    tally: Counter | None = None) -> list[GazeSample]:
    """Parse a gaze record stream.

    Unknown labels become ``Label.OTHER`` and are counted in ``tally`` under
    ``"unknown:<TAG>"``; samples outside the meta frame bounds are kept and
    counted under ``"out_of_bounds"``. Raises :class:`GazeParseError` on
    malformed lines, negative coordinates or a decreasing sample index.
    """
    if isinstance(stream, bytes):
        stream = stream.decode("utf-8")
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    if tally is None:
        tally = Counter()

    samples: list[GazeSample] = []
    last_t = -1
    for lineno, raw in enumerate(stream, start=1):
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) < 4:
            raise GazeParseError(f"expected 4 fields, got {len(fields)}", lineno)
        try:
            t, x, y = (int(f) for f in fields[:3])
        except ValueError:
            raise GazeParseError(f"non-integer field in {line!r}", lineno) from None
        if t < 0:
            raise GazeParseError(f"negative sample index {t}", lineno)
        if x < 0 or y < 0:
            raise GazeParseError(f"negative coordinate ({x}, {y})", lineno)
        if t < last_t:
            raise GazeParseError(f"sample index {t} decreases (previous {last_t})", lineno)
        last_t = t

        token = fields[3]
        label = _TOKENS.get(token.upper())
        tag = None
        if label is None:
            label, tag = Label.OTHER, token
            tally[f"unknown:{token}"] += 1
        sample = GazeSample(t, x, y, label, tag)
        if not meta.in_bounds(sample):
            tally["out_of_bounds"] += 1
        samples.append(sample)

    unknown = sum(v for k, v in tally.items() if k.startswith("unknown:"))
    if unknown:
        log.warning("%d samples with unrecognised labels kept as OTHER", unknown)
    if tally["out_of_bounds"]:
        log.warning("%d samples outside %dx%d frame", tally["out_of_bounds"],
                    meta.frame_width, meta.frame_height)
    return samples


def format_gaze(samples: Iterable[GazeSample]) -> str:
    return "".join(f"{s.t} {s.x} {s.y} {s.token}\n" for s in samples)


def sample_to_frame(t: int, meta: RecordingMeta) -> int:
    """Frame index of tracker sample ``t``: ``floor(t * fps / hz)``."""
    ratio = meta.frame_rate / meta.sample_rate
    return (t * ratio.numerator) // ratio.denominator


def filter_attentive(samples: Sequence[GazeSample]) -> list[GazeSample]:
    return [s for s in samples if s.label in ATTENTIVE]
