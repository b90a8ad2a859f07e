"""Standard MIDI File reading and per-bar pitch-class binning.

Only what bar binning needs is decoded: note-on onsets and time signatures.
Tempo is ignored because bars are metric, not temporal.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from jsseg.core import Alphabet, WeightedSequence

PITCH_CLASSES = ("C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B")
PERCUSSION_CHANNEL = 9  # channel 10, 1-based

# data bytes following each channel-voice status nibble
_DATA_LEN = {0x8: 2, 0x9: 2, 0xA: 2, 0xB: 2, 0xC: 1, 0xD: 1, 0xE: 2}


class MidiFormatError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class NoteEvent:
    tick: int
    pitch: int
    channel: int = 0
    track: int = 0

    def __post_init__(self):
        if self.tick < 0:
            raise ValueError("tick must be nonnegative")
        if not 0 <= self.pitch <= 127:
            raise ValueError("pitch must be in 0..127")
        if not 0 <= self.channel <= 15:
            raise ValueError("channel must be in 0..15")
        if self.track < 0:
            raise ValueError("track must be nonnegative")


@dataclass(frozen=True)
class TimeGrid:
    """Ticks per quarter note plus ``(tick, numerator, denominator_power)`` entries."""

    ticks_per_quarter: int
    signatures: tuple[tuple[int, int, int], ...] = ((0, 4, 2),)

    def __post_init__(self):
        if self.ticks_per_quarter <= 0:
            raise ValueError("ticks_per_quarter must be positive")
        sigs = tuple(tuple(s) for s in self.signatures)
        if not sigs or sigs[0][0] != 0:
            sigs = ((0, 4, 2),) + sigs
        prev = -1
        for tick, num, dpow in sigs:
            if tick <= prev:
                raise ValueError("signature ticks must be strictly increasing")
            if num < 1 or dpow < 0:
                raise ValueError("invalid time signature")
            prev = tick
        object.__setattr__(self, "signatures", sigs)

    def bar_length(self, numerator: int, denominator_power: int) -> int:
        num = numerator * self.ticks_per_quarter * 4
        den = 1 << denominator_power
        if num % den:
            raise MidiFormatError("unrepresentable bar length")
        return num // den

    def bar_starts(self, until_tick: int) -> list[int]:
        """Start ticks of every bar up to and including the one holding ``until_tick``.

        A signature change that falls inside a bar cuts that bar short.
        """
        starts = []
        sigs = self.signatures
        for i, (tick, num, dpow) in enumerate(sigs):
            if tick > until_tick:
                break
            length = self.bar_length(num, dpow)
            stop = sigs[i + 1][0] if i + 1 < len(sigs) else None
            t = tick
            while (stop is None or t < stop) and t <= until_tick:
                starts.append(t)
                t += length
        return starts


class _Reader:
    def __init__(self, data: bytes, base: int = 0):
        self.data = data
        self.pos = 0
        self.base = base

    def _need(self, n):
        if self.pos + n > len(self.data):
            raise MidiFormatError(
                f"truncated data at byte offset {self.base + self.pos}"
            )

    def byte(self) -> int:
        self._need(1)
        b = self.data[self.pos]
        self.pos += 1
        return b

    def take(self, n: int) -> bytes:
        self._need(n)
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def varlen(self) -> int:
        value = 0
        for _ in range(4):
            b = self.byte()
            value = (value << 7) | (b & 0x7F)
            if not b & 0x80:
                return value
        raise MidiFormatError(
            f"variable-length quantity too long at byte offset {self.base + self.pos}"
        )

    def done(self) -> bool:
        return self.pos >= len(self.data)


def _chunks(data: bytes):
    pos = 0
    while pos < len(data):
        if pos + 8 > len(data):
            raise MidiFormatError(f"truncated chunk header at byte offset {pos}")
        kind = data[pos : pos + 4]
        (length,) = struct.unpack(">I", data[pos + 4 : pos + 8])
        body_start = pos + 8
        if body_start + length > len(data):
            raise MidiFormatError(
                f"truncated {kind.decode('latin-1')!r} chunk at byte offset {pos}: "
                f"declares {length} bytes, {len(data) - body_start} available"
            )
        yield kind, body_start, data[body_start : body_start + length]
        pos = body_start + length


def _parse_track(body: bytes, base: int, track: int):
    r = _Reader(body, base)
    tick = 0
    status = None
    notes = []
    sigs = []
    while not r.done():
        tick += r.varlen()
        b = r.byte()
        if b == 0xFF:
            meta_type = r.byte()
            payload = r.take(r.varlen())
            if meta_type == 0x2F:
                break
            if meta_type == 0x58 and len(payload) >= 2:
                sigs.append((tick, payload[0], payload[1]))
            continue
        if b in (0xF0, 0xF7):
            r.take(r.varlen())
            continue
        if b & 0x80:
            if b >= 0xF0:
                raise MidiFormatError(
                    f"unexpected system message 0x{b:02X} at byte offset {base + r.pos - 1}"
                )
            status = b
            first = r.byte()
        else:
            if status is None:
                raise MidiFormatError(
                    f"running status without prior status at byte offset {base + r.pos - 1}"
                )
            first = b
        kind, channel = status >> 4, status & 0x0F
        second = r.byte() if _DATA_LEN[kind] == 2 else None
        if kind == 0x9 and second > 0:
            notes.append(NoteEvent(tick, first & 0x7F, channel, track))
    return notes, sigs


def parse_smf(data: bytes) -> tuple[list[NoteEvent], TimeGrid]:
    """Decode note-on onsets and time signatures from a format 0/1 SMF.

    Tracks are merged by absolute tick; ties keep track order, then file order.
    """
    chunks = _chunks(bytes(data))
    try:
        kind, _, header = next(chunks)
    except StopIteration:
        raise MidiFormatError("empty file") from None
    if kind != b"MThd" or len(header) < 6:
        raise MidiFormatError("missing MThd header chunk")
    fmt, ntracks, division = struct.unpack(">HHH", header[:6])
    if fmt not in (0, 1):
        raise MidiFormatError(f"unsupported SMF format {fmt}")
    if division & 0x8000:
        raise MidiFormatError("SMPTE timing unsupported")
    if division == 0:
        raise MidiFormatError("division of zero ticks per quarter note")

    notes: list[NoteEvent] = []
    sigs: list[tuple[int, int, int]] = []
    track = 0
    for kind, start, body in chunks:
        if kind != b"MTrk":
            continue
        t_notes, t_sigs = _parse_track(body, start, track)
        notes.extend(t_notes)
        sigs.extend(t_sigs)
        track += 1

    # stable sort keeps per-track file order on equal (tick, track)
    notes.sort(key=lambda e: (e.tick, e.track))
    sigs.sort(key=lambda s: s[0])
    merged: dict[int, tuple[int, int, int]] = {}
    for s in sigs:
        merged[s[0]] = s  # last signature at a tick wins
    return notes, TimeGrid(division, tuple(merged[t] for t in sorted(merged)))


def bin_to_bars(
    events: Iterable[NoteEvent],
    grid: TimeGrid,
    channel_filter: Optional[set] = None,
    include_percussion: bool = False,
    bar_offset: int = 0,
) -> WeightedSequence:
    """Count note onsets per bar and pitch class.

    ``channel_filter`` restricts to the given 0-based channels; otherwise all
    channels except percussion are kept. Position labels are 1-based bar
    numbers shifted by ``bar_offset``.
    """
    kept = []
    for e in events:
        if channel_filter is not None:
            if e.channel not in channel_filter:
                continue
        elif e.channel == PERCUSSION_CHANNEL and not include_percussion:
            continue
        kept.append(e)
    if not kept:
        raise MidiFormatError("no note onsets after filtering")

    last = max(e.tick for e in kept)
    starts = np.asarray(grid.bar_starts(last), dtype=np.int64)
    ticks = np.fromiter((e.tick for e in kept), dtype=np.int64, count=len(kept))
    pcs = np.fromiter((e.pitch % 12 for e in kept), dtype=np.int64, count=len(kept))
    bars = np.searchsorted(starts, ticks, side="right") - 1
    counts = np.zeros((len(starts), 12), dtype=np.int64)
    np.add.at(counts, (bars, pcs), 1)
    labels = [str(i + 1 + bar_offset) for i in range(len(starts))]
    return WeightedSequence(Alphabet(PITCH_CLASSES), counts, labels)


# -- writing, for fixtures and round trips ------------------------------------


def _varlen_bytes(value: int) -> bytes:
    out = [value & 0x7F]
    value >>= 7
    while value:
        out.append(0x80 | (value & 0x7F))
        value >>= 7
    return bytes(reversed(out))


def track_bytes(events: list[tuple[int, bytes]], end_of_track: bool = True) -> bytes:
    """Build an ``MTrk`` chunk from ``(delta_ticks, raw_event_bytes)`` pairs."""
    body = b"".join(_varlen_bytes(d) + ev for d, ev in events)
    if end_of_track:
        body += b"\x00\xff\x2f\x00"
    return b"MTrk" + struct.pack(">I", len(body)) + body


def smf_bytes(tracks: list[bytes], fmt: int = 1, division: int = 480) -> bytes:
    header = b"MThd" + struct.pack(">IHHH", 6, fmt, len(tracks), division)
    return header + b"".join(tracks)


def write_smf(
    notes: Iterable[NoteEvent],
    grid: TimeGrid,
    duration: int = 1,
) -> bytes:
    """Format 0 file with the given onsets (velocity 64) and signatures.

    Each note is released ``duration`` ticks after its onset.
    """
    timeline = []
    for tick, num, dpow in grid.signatures:
        timeline.append((tick, 0, bytes([0xFF, 0x58, 4, num, dpow, 24, 8])))
    for n in notes:
        timeline.append((n.tick, 1, bytes([0x90 | n.channel, n.pitch, 64])))
        timeline.append((n.tick + duration, 2, bytes([0x80 | n.channel, n.pitch, 0])))
    timeline.sort(key=lambda x: (x[0], x[1]))
    events, prev = [], 0
    for tick, _, raw in timeline:
        events.append((tick - prev, raw))
        prev = tick
    return smf_bytes([track_bytes(events)], fmt=0, division=grid.ticks_per_quarter)
