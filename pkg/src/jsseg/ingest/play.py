"""Speaker-turn symbolization of a play script.

Expected layout (one item per line)::

    ACT I
    SCENE I. Venice. A street.
    RODERIGO.
    Tush! Never tell me; ...
    [Exit.]
    IAGO.
    'Sblood, but you will not hear me.

Speaker headings are whole lines of capitals, spaces and apostrophes ending in
a period. ``ACT <roman>`` and ``SCENE <roman>`` lines become markers placed at
the index of the next speech. Bracketed stage directions, possibly spanning
several lines, are dropped. Anything else is speech text.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from jsseg.core import WeightedSequence, build_alphabet, one_hot

_ROMAN = r"[IVXLCDM]+"
_ACT_RE = re.compile(rf"^ACT\s+({_ROMAN})\.?\s*$")
_SCENE_RE = re.compile(rf"^SCENE\s+({_ROMAN})(?:\.(?:\s.*)?)?\s*$")
_SPEAKER_RE = re.compile(r"^([A-Z][A-Z' ]*)\.$")


class PlayFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Marker:
    kind: str  # "act" | "scene"
    label: str
    position: int


@dataclass(frozen=True)
class PlayScript:
    speeches: tuple[tuple[str, str], ...]
    markers: tuple[Marker, ...]

    @property
    def speakers(self) -> list[str]:
        return [s for s, _ in self.speeches]


def normalize_speaker(name: str) -> str:
    return " ".join(name.upper().split())


def _strip_inline_directions(line: str) -> str:
    return re.sub(r"\[[^\]]*\]", "", line).strip()


def parse_play(text: str) -> PlayScript:
    """Split a play text into speeches and act/scene markers."""
    speeches: list[tuple[str, list[str]]] = []
    markers: list[Marker] = []
    in_direction = False

    for raw in text.splitlines():
        line = raw.strip()
        if in_direction:
            if "]" in line:
                in_direction = False
                line = line.split("]", 1)[1].strip()
            else:
                continue
        if not line:
            continue
        if line.startswith("[") and "]" not in line:
            in_direction = True
            continue
        line = _strip_inline_directions(line)
        if not line:
            continue

        m = _ACT_RE.match(line)
        if m:
            markers.append(Marker("act", m.group(1), len(speeches)))
            continue
        m = _SCENE_RE.match(line)
        if m:
            markers.append(Marker("scene", m.group(1), len(speeches)))
            continue
        m = _SPEAKER_RE.match(line)
        if m and m.group(1).strip():
            speeches.append((normalize_speaker(m.group(1)), []))
            continue
        if speeches:
            speeches[-1][1].append(line)
        # text before the first heading (title, dramatis personae) is ignored

    if not speeches:
        raise PlayFormatError("no speeches found")
    return PlayScript(
        speeches=tuple((who, "\n".join(body)) for who, body in speeches),
        markers=tuple(markers),
    )


def play_to_sequence(script: PlayScript) -> tuple[WeightedSequence, tuple[Marker, ...]]:
    """One-hot speaker sequence (one position per speech) plus markers."""
    tokens = script.speakers
    if not tokens:
        raise PlayFormatError("no speeches found")
    seq = one_hot(tokens, build_alphabet(tokens))
    return seq, script.markers


def format_markers(markers) -> str:
    return "".join(f"{m.kind}\t{m.label}\t{m.position}\n" for m in markers)


def parse_markers(text: str) -> tuple[Marker, ...]:
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.rstrip("\r\n").split("\t")
        if len(parts) != 3 or parts[0] not in ("act", "scene"):
            raise PlayFormatError(f"markers line {lineno}: expected kind<TAB>label<TAB>position")
        try:
            pos = int(parts[2])
        except ValueError:
            raise PlayFormatError(f"markers line {lineno}: bad position {parts[2]!r}") from None
        out.append(Marker(parts[0], parts[1], pos))
    return tuple(out)
