"""Serialization of segment trees, profiles, baselines and tallies.

Floats are written with Python's shortest round-trip representation, so every
value survives a parse/emit cycle bit for bit.
"""

from __future__ import annotations

import hashlib
import io
import json
from dataclasses import dataclass, field
from typing import Optional

from jsseg.core import SegmentNode, Span, WeightedSequence, format_counts
from jsseg.ingest.play import Marker
from jsseg.segmentation import GENERATOR_NAME, BaselineStats, SegmentationConfig

TOOL_NAME = "jsseg"


class SchemaError(ValueError):
    pass


def sequence_digest(seq: WeightedSequence) -> str:
    """SHA-256 of the canonical ``counts`` serialization of ``seq``."""
    return "sha256:" + hashlib.sha256(format_counts(seq).encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class RunMetadata:
    config: SegmentationConfig
    input_digest: str
    tool_version: str = field(default_factory=lambda: _version())
    generator: str = GENERATOR_NAME

    def to_dict(self) -> dict:
        return {
            "tool": TOOL_NAME,
            "tool_version": self.tool_version,
            "config": self.config.to_dict(),
            "input_digest": self.input_digest,
            "generator": self.generator,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunMetadata":
        try:
            return cls(
                config=SegmentationConfig.from_dict(d["config"]),
                input_digest=d["input_digest"],
                tool_version=d["tool_version"],
                generator=d["generator"],
            )
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"bad meta block: {exc}") from None


def _version() -> str:
    from jsseg import __version__

    return __version__


def _label_at(labels, cut: int):
    if labels is None:
        return None
    if isinstance(labels, dict):
        return labels.get(cut)
    return labels[cut - 1]


def _node_dict(node: SegmentNode, depth: int, levels: Optional[int], labels) -> dict:
    out: dict = {"start": node.span.start, "end": node.span.end}
    if node.split_after is not None:
        out["split_after"] = node.split_after
        label = _label_at(labels, node.span.start + node.split_after)
        if label is not None:
            out["split_label"] = label
    if node.d_max is not None:
        out["d_max"] = float(node.d_max)
    if node.baseline is not None:
        out["baseline"] = {
            "mean": float(node.baseline.mean),
            "sigma": float(node.baseline.sigma),
            "replicates": int(node.baseline.replicates),
        }
    out["significant"] = bool(node.significant)
    if node.children and (levels is None or depth < levels):
        out["children"] = [
            _node_dict(c, depth + 1, levels, labels) for c in node.children
        ]
    return out


def tree_to_dict(
    root: SegmentNode,
    metadata: RunMetadata,
    markers=(),
    levels: Optional[int] = None,
    position_labels=None,
) -> dict:
    return {
        "meta": metadata.to_dict(),
        "markers": [
            {"kind": m.kind, "label": m.label, "position": int(m.position)}
            for m in markers
        ],
        "node": _node_dict(root, 0, levels, position_labels),
    }


def emit_tree(
    root: SegmentNode,
    metadata: RunMetadata,
    markers=(),
    levels: Optional[int] = None,
    position_labels=None,
) -> str:
    """Tree JSON document.

    ``levels`` caps how many split levels are written: nodes deeper than
    ``levels`` are dropped, and the deepest written nodes keep their own
    ``split_after`` but lose their children. ``position_labels`` (a per-position
    sequence, or a mapping from cut position to label) adds a ``split_label``
    naming the last position of each left part.
    """
    doc = tree_to_dict(root, metadata, markers, levels, position_labels)
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


_NODE_KEYS = {"start", "end", "split_after", "split_label", "d_max", "baseline",
              "significant", "children"}


def _node_from_dict(d, seed: int) -> SegmentNode:
    if not isinstance(d, dict):
        raise SchemaError("node must be an object")
    unknown = set(d) - _NODE_KEYS
    if unknown:
        raise SchemaError(f"unknown node keys {sorted(unknown)}")
    for key in ("start", "end", "significant"):
        if key not in d:
            raise SchemaError(f"node missing {key!r}")
    baseline = None
    if "baseline" in d:
        b = d["baseline"]
        try:
            baseline = BaselineStats(b["mean"], b["sigma"], b["replicates"], seed)
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"bad baseline: {exc}") from None
    children = d.get("children", [])
    if not isinstance(children, list) or len(children) not in (0, 2):
        raise SchemaError("children must be absent or a list of two nodes")
    try:
        return SegmentNode(
            span=Span(int(d["start"]), int(d["end"])),
            d_max=d.get("d_max"),
            split_after=d.get("split_after"),
            baseline=baseline,
            significant=bool(d["significant"]),
            children=tuple(_node_from_dict(c, seed) for c in children),
        )
    except SchemaError:
        raise
    except ValueError as exc:
        raise SchemaError(str(exc)) from None


def parse_tree(text: str):
    """Inverse of :func:`emit_tree`: ``(root, metadata, markers, split_labels)``.

    ``split_labels`` maps absolute cut position to its label when present.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict) or set(doc) != {"meta", "markers", "node"}:
        raise SchemaError("document must have exactly meta, markers, node")
    meta = RunMetadata.from_dict(doc["meta"])
    try:
        markers = tuple(
            Marker(m["kind"], m["label"], m["position"]) for m in doc["markers"]
        )
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"bad marker: {exc}") from None
    root = _node_from_dict(doc["node"], meta.config.seed)
    labels = {}
    stack = [doc["node"]]
    while stack:
        d = stack.pop()
        if "split_label" in d:
            labels[d["start"] + d["split_after"]] = d["split_label"]
        stack.extend(d.get("children", []))
    return root, meta, markers, labels


def emit_profile(profile, baseline: BaselineStats) -> str:
    """CSV of the split profile with the baseline band repeated on every row."""
    mean, sigma = float(baseline.mean), float(baseline.sigma)
    hi, lo = mean + sigma, mean - sigma
    buf = io.StringIO()
    buf.write("n,d,mean,mean_plus_sigma,mean_minus_sigma\n")
    for n, d in zip(profile.n, profile.d):
        buf.write(f"{int(n)},{float(d)!r},{mean!r},{hi!r},{lo!r}\n")
    return buf.getvalue()


def parse_profile(text: str) -> list[tuple[int, float, float, float, float]]:
    lines = text.splitlines()
    if not lines or lines[0] != "n,d,mean,mean_plus_sigma,mean_minus_sigma":
        raise SchemaError("bad profile header")
    rows = []
    for line in lines[1:]:
        n, d, m, hi, lo = line.split(",")
        rows.append((int(n), float(d), float(m), float(hi), float(lo)))
    return rows


def emit_baseline(baseline: BaselineStats, span: Span, metadata: RunMetadata) -> str:
    doc = {
        "meta": metadata.to_dict(),
        "span": {"start": span.start, "end": span.end},
        "baseline": {
            "mean": float(baseline.mean),
            "sigma": float(baseline.sigma),
            "replicates": int(baseline.replicates),
            "seed": int(baseline.seed),
        },
    }
    return json.dumps(doc, indent=2) + "\n"


def emit_tally(seq: WeightedSequence) -> str:
    totals = seq.counts.sum(axis=0)
    lines = ["symbol\tcount"]
    lines += [f"{lab}\t{int(c)}" for lab, c in zip(seq.alphabet.labels, totals)]
    return "\n".join(lines) + "\n"
