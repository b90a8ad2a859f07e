import struct

import numpy as np
import pytest

from jsseg.ingest.midi import (
    PITCH_CLASSES,
    MidiFormatError,
    NoteEvent,
    TimeGrid,
    bin_to_bars,
    parse_smf,
    smf_bytes,
    track_bytes,
    write_smf,
)

NOTE_ON = 0x90
META_TS = lambda n, p: bytes([0xFF, 0x58, 4, n, p, 24, 8])


def raw_header(fmt=0, ntracks=1, division=480):
    return b"MThd" + struct.pack(">IHHH", 6, fmt, ntracks, division)


def test_minimal_single_note():
    body = b"\x00\x90\x3c\x40" + b"\x00\xff\x2f\x00"
    data = raw_header() + b"MTrk" + struct.pack(">I", len(body)) + body
    events, grid = parse_smf(data)
    assert events == [NoteEvent(0, 60, 0, 0)]
    assert grid.ticks_per_quarter == 480 and grid.signatures == ((0, 4, 2),)


def test_running_status():
    body = b"\x00\x90\x3c\x40" + b"\x60\x3e\x40" + b"\x60\x3c\x00" + b"\x00\xff\x2f\x00"
    data = raw_header() + b"MTrk" + struct.pack(">I", len(body)) + body
    events, _ = parse_smf(data)
    # third event is a note-on with velocity 0 (a release)
    assert [(e.tick, e.pitch) for e in events] == [(0, 60), (96, 62)]


def test_running_status_across_other_channel_messages():
    trk = track_bytes([
        (0, bytes([0xC0, 5])),          # program change, 1 data byte
        (0, bytes([0x91, 64, 100])),
        (10, bytes([67, 100])),          # running status on channel 1
        (0, bytes([0xB1, 7, 100])),     # control change
        (10, bytes([0xF0, 2, 1, 0xF7])),  # sysex
        (0, bytes([0x91, 72, 1])),
    ])
    events, _ = parse_smf(smf_bytes([trk], fmt=0))
    assert [(e.tick, e.pitch, e.channel) for e in events] == [(0, 64, 1), (10, 67, 1), (20, 72, 1)]


def test_format1_merge_and_signatures():
    conductor = track_bytes([(0, META_TS(3, 2)), (1440 * 2, META_TS(2, 2)),
                             (0, bytes([0xFF, 0x51, 3, 7, 161, 32]))])
    t1 = track_bytes([(0, bytes([0x90, 60, 90])), (1440, bytes([0x90, 64, 90]))])
    t2 = track_bytes([(0, bytes([0x90, 48, 90])), (2880, bytes([0x90, 50, 90]))])
    events, grid = parse_smf(smf_bytes([conductor, t1, t2], fmt=1))
    assert [(e.tick, e.pitch, e.track) for e in events] == [
        (0, 60, 1), (0, 48, 2), (1440, 64, 1), (2880, 50, 2)
    ]
    assert grid.signatures == ((0, 3, 2), (2880, 2, 2))


def test_unknown_chunks_skipped():
    trk = track_bytes([(0, bytes([0x90, 61, 10]))])
    junk = b"XFIH" + struct.pack(">I", 3) + b"abc"
    events, _ = parse_smf(smf_bytes([junk, trk]))
    assert len(events) == 1


def test_smpte_rejected():
    with pytest.raises(MidiFormatError, match="SMPTE timing unsupported"):
        parse_smf(raw_header(division=0xE728))


def test_truncated_chunk_reports_offset():
    trk = track_bytes([(0, bytes([0x90, 61, 10]))])
    data = smf_bytes([trk])[:-3]
    with pytest.raises(MidiFormatError, match=r"byte offset 14"):
        parse_smf(data)


def test_truncated_event_reports_offset():
    body = b"\x00\x90\x3c"
    data = raw_header() + b"MTrk" + struct.pack(">I", len(body)) + body
    with pytest.raises(MidiFormatError, match=r"byte offset 25"):
        parse_smf(data)


def test_not_midi():
    with pytest.raises(MidiFormatError):
        parse_smf(b"RIFF\x00\x00\x00\x04abcd")
    with pytest.raises(MidiFormatError):
        parse_smf(b"")


def test_bin_first_bar_and_second_bar():
    grid = TimeGrid(480)
    seq = bin_to_bars([NoteEvent(0, 60), NoteEvent(1920, 61)], grid)
    assert seq.alphabet.labels == PITCH_CLASSES
    assert seq.position_labels == ("1", "2")
    assert seq.counts[0].tolist() == [1] + [0] * 11
    assert seq.counts[1].tolist() == [0, 1] + [0] * 10


def test_bin_empty_bars_and_offset():
    seq = bin_to_bars([NoteEvent(0, 60), NoteEvent(1920 * 3, 67)], TimeGrid(480), bar_offset=-1)
    assert len(seq) == 4
    assert seq.counts[1:3].sum() == 0
    assert seq.position_labels == ("0", "1", "2", "3")


def test_bin_piecewise_signatures():
    # 2 bars of 3/4 (1440 ticks) then 6/8 (1440 ticks) then 2/2 (1920)
    grid = TimeGrid(480, ((0, 3, 2), (2880, 6, 3), (5760, 2, 1)))
    ticks = [0, 1439, 1440, 2880, 4319, 4320, 5760, 7679, 7680]
    seq = bin_to_bars([NoteEvent(t, 60) for t in ticks], grid)
    assert seq.counts[:, 0].tolist() == [2, 1, 2, 1, 2, 1]


def test_signature_change_mid_bar_cuts_bar():
    grid = TimeGrid(480, ((0, 4, 2), (960, 3, 2)))
    assert grid.bar_starts(5000) == [0, 960, 2400, 3840]


def test_unrepresentable_bar_length():
    with pytest.raises(MidiFormatError, match="unrepresentable bar length"):
        bin_to_bars([NoteEvent(0, 60)], TimeGrid(3, ((0, 3, 3),)))


def test_percussion_excluded_by_default():
    events = [NoteEvent(0, 60, 0), NoteEvent(0, 36, 9), NoteEvent(10, 38, 9)]
    assert bin_to_bars(events, TimeGrid(480)).mass == 1
    assert bin_to_bars(events, TimeGrid(480), include_percussion=True).mass == 3
    assert bin_to_bars(events, TimeGrid(480), channel_filter={9}).mass == 2


def test_mass_equals_onsets_and_transposition_invariance():
    rng = np.random.default_rng(0)
    notes = [NoteEvent(int(t), int(p)) for t, p in zip(rng.integers(0, 30000, 300), rng.integers(20, 100, 300))]
    grid = TimeGrid(480, ((0, 4, 2), (9600, 3, 2)))
    events, g2 = parse_smf(write_smf(notes, grid))
    assert len(events) == 300
    seq = bin_to_bars(events, g2)
    assert seq.mass == 300
    up = bin_to_bars([NoteEvent(e.tick, e.pitch + 12) for e in events], g2)
    assert up == seq
    bars = np.searchsorted(np.array(g2.bar_starts(30000)), [e.tick for e in events], side="right")
    assert np.all(np.diff(bars) >= 0)


def test_fixture_file(data_dir):
    events, grid = parse_smf((data_dir / "modulating.mid").read_bytes())
    seq = bin_to_bars(events, grid)
    assert len(seq) == 73 and seq.mass == 73 * 8 == len(events)
