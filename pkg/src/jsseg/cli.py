"""Command-line driver: ``jsseg <subcommand> --input PATH [options]``.

Exit status is 0 on success, 1 for unreadable or malformed input and 2 for
usage errors. Diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from jsseg.core import (
    format_counts,
    format_tokens,
    one_hot,
    parse_counts,
    parse_tokens,
    sequence_to_tokens,
)
from jsseg.divergence import WEIGHT_MODES, split_profile
from jsseg.ingest.midi import bin_to_bars, parse_smf
from jsseg.ingest.play import format_markers, parse_markers, parse_play, play_to_sequence
from jsseg.report import (
    RunMetadata,
    emit_baseline,
    emit_profile,
    emit_tally,
    emit_tree,
    sequence_digest,
)
from jsseg.segmentation import SegmentationConfig, segment, shuffle_baseline

log = logging.getLogger("jsseg")

FORMATS = ("tokens", "counts", "play", "midi")
_SUFFIX_FORMATS = {
    ".tokens": "tokens",
    ".counts": "counts",
    ".tsv": "counts",
    ".txt": "play",
    ".mid": "midi",
    ".midi": "midi",
}


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _add_input(p, formats=FORMATS):
    p.add_argument("--input", "-i", required=True, help="input file")
    p.add_argument("--format", "-f", choices=formats, help="input format (default: from suffix)")


def _add_output(p, required=False):
    p.add_argument("--output", "-o", required=required, help="output file (default: stdout)")


def _add_ingest_flags(p):
    p.add_argument("--bar-offset", type=int, default=None,
                   help="shift 1-based bar labels (counts/midi only)")
    p.add_argument("--include-percussion", action="store_true",
                   help="keep MIDI channel 10 (midi only)")
    p.add_argument("--markers", help="markers sidecar TSV for tokens input")


def _add_config(p):
    d = SegmentationConfig()
    p.add_argument("--weight-mode", choices=WEIGHT_MODES, default=d.weight_mode)
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--shuffles", type=_positive_int, default=d.shuffle_replicates,
                   help="shuffle replicates pooled per node")
    p.add_argument("--threshold-multiplier", type=float, default=d.threshold_multiplier)
    p.add_argument("--min-split-length", type=int, default=d.min_split_length)
    p.add_argument("--max-depth", type=_positive_int, default=d.max_depth)
    p.add_argument("--jobs", type=_positive_int, default=1,
                   help="worker threads (results do not depend on this)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jsseg",
        description="Jensen-Shannon divergence segmentation of symbolic sequences.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="recursive segmentation to tree JSON")
    _add_input(p)
    _add_output(p)
    _add_ingest_flags(p)
    _add_config(p)
    p.add_argument("--levels", type=_positive_int, help="cap reported split levels")
    p.add_argument("--emit-profiles", metavar="DIR",
                   help="write one profile CSV per evaluated node into DIR")

    p = sub.add_parser("profile", help="top-level split profile as CSV")
    _add_input(p)
    _add_output(p)
    _add_ingest_flags(p)
    _add_config(p)

    p = sub.add_parser("baseline", help="shuffle baseline of the whole sequence as JSON")
    _add_input(p)
    _add_output(p)
    _add_ingest_flags(p)
    _add_config(p)

    p = sub.add_parser("ingest-play", help="play text to tokens + markers sidecar")
    p.add_argument("--input", "-i", required=True)
    _add_output(p, required=True)
    p.add_argument("--markers-output", help="markers TSV (default: OUTPUT.markers.tsv)")

    p = sub.add_parser("ingest-midi", help="MIDI file to per-bar pitch-class counts")
    p.add_argument("--input", "-i", required=True)
    _add_output(p, required=True)
    p.add_argument("--bar-offset", type=int, default=None)
    p.add_argument("--include-percussion", action="store_true")

    p = sub.add_parser("tally", help="symbol frequency table")
    _add_input(p)
    _add_output(p)
    _add_ingest_flags(p)
    return parser


def _resolve_format(args) -> str:
    fmt = args.format
    if fmt is None:
        fmt = _SUFFIX_FORMATS.get(Path(args.input).suffix.lower())
        if fmt is None:
            raise UsageError(f"cannot infer format of {args.input}; pass --format")
    if getattr(args, "bar_offset", None) is not None and fmt not in ("counts", "midi"):
        raise UsageError(f"--bar-offset does not apply to {fmt} input")
    if getattr(args, "include_percussion", False) and fmt != "midi":
        raise UsageError(f"--include-percussion does not apply to {fmt} input")
    if getattr(args, "markers", None) and fmt != "tokens":
        raise UsageError(f"--markers only applies to tokens input")
    return fmt


def _read(path, binary=False):
    try:
        if binary:
            return Path(path).read_bytes()
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from None


def load_sequence(args):
    """Sequence and markers for ``args.input`` in the resolved format."""
    fmt = _resolve_format(args)
    offset = getattr(args, "bar_offset", None) or 0
    markers = ()
    try:
        if fmt == "tokens":
            seq = one_hot(parse_tokens(_read(args.input)))
            if getattr(args, "markers", None):
                markers = parse_markers(_read(args.markers))
        elif fmt == "counts":
            text = _read(args.input)
            n_rows = sum(1 for line in text.splitlines()[1:] if line.strip())
            labels = [str(i + 1 + offset) for i in range(n_rows)]
            seq = parse_counts(text, labels)
        elif fmt == "play":
            seq, markers = play_to_sequence(parse_play(_read(args.input)))
        else:
            events, grid = parse_smf(_read(args.input, binary=True))
            seq = bin_to_bars(
                events, grid,
                include_percussion=getattr(args, "include_percussion", False),
                bar_offset=offset,
            )
    except ValueError as exc:
        raise InputError(f"{args.input}: {exc}") from None
    if any(m.position > len(seq) for m in markers):
        raise InputError("marker position beyond sequence length")
    return seq, markers


def _config(args) -> SegmentationConfig:
    try:
        return SegmentationConfig(
            min_split_length=args.min_split_length,
            threshold_multiplier=args.threshold_multiplier,
            shuffle_replicates=args.shuffles,
            seed=args.seed,
            max_depth=args.max_depth,
            weight_mode=args.weight_mode,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _write(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    Path(path).write_text(text, encoding="utf-8")


def cmd_segment(args):
    config = _config(args)
    seq, markers = load_sequence(args)
    meta = RunMetadata(config=config, input_digest=sequence_digest(seq))
    root = segment(seq, None, config, n_jobs=args.jobs)
    _write(args.output, emit_tree(root, meta, markers, args.levels, seq.position_labels))
    if args.emit_profiles:
        outdir = Path(args.emit_profiles)
        outdir.mkdir(parents=True, exist_ok=True)
        for depth, node in root.walk():
            if node.baseline is None or (args.levels and depth >= args.levels):
                continue
            prof = split_profile(seq, node.span, config.weight_mode)
            name = f"node_{node.span.start}_{node.span.end}.csv"
            (outdir / name).write_text(emit_profile(prof, node.baseline), encoding="utf-8")
    log.info("segmented %d positions into %d segments", len(seq), len(root.leaves()))


def cmd_profile(args):
    config = _config(args)
    seq, _ = load_sequence(args)
    if len(seq) < 2:
        raise InputError("span too short to split")
    prof = split_profile(seq, None, config.weight_mode)
    base = shuffle_baseline(seq, None, config)
    _write(args.output, emit_profile(prof, base))


def cmd_baseline(args):
    config = _config(args)
    seq, _ = load_sequence(args)
    if len(seq) < 2:
        raise InputError("span too short to split")
    base = shuffle_baseline(seq, None, config)
    meta = RunMetadata(config=config, input_digest=sequence_digest(seq))
    _write(args.output, emit_baseline(base, seq.full_span, meta))


def cmd_ingest_play(args):
    try:
        seq, markers = play_to_sequence(parse_play(_read(args.input)))
    except ValueError as exc:
        raise InputError(f"{args.input}: {exc}") from None
    _write(args.output, format_tokens(sequence_to_tokens(seq)))
    sidecar = args.markers_output or f"{args.output}.markers.tsv"
    _write(sidecar, format_markers(markers))
    log.info("%d speeches, %d speakers, %d markers", len(seq), seq.alphabet.k, len(markers))


def cmd_ingest_midi(args):
    args.format = "midi"
    seq, _ = load_sequence(args)
    _write(args.output, format_counts(seq))
    log.info("%d bars, %d onsets", len(seq), seq.mass)


def cmd_tally(args):
    seq, _ = load_sequence(args)
    _write(args.output, emit_tally(seq))


COMMANDS = {
    "segment": cmd_segment,
    "profile": cmd_profile,
    "baseline": cmd_baseline,
    "ingest-play": cmd_ingest_play,
    "ingest-midi": cmd_ingest_midi,
    "tally": cmd_tally,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="jsseg: %(message)s",
        stream=sys.stderr,
    )
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"jsseg: error: {exc}", file=sys.stderr)
        return 2
    except InputError as exc:
        print(f"jsseg: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"jsseg: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
