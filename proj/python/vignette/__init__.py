"""Python access to the vignette engine: spec codec, trace replay, ranking statistics."""
import json
from pathlib import Path

from . import _core
from ._core import DatasetError, ScriptError, SpecError

__all__ = [
    "DatasetError", "ScriptError", "SpecError", "Rankings",
    "canonicalize_spec", "validate_spec", "generate_spec", "run_trace", "random_trace",
]


def _text(doc):
    if isinstance(doc, (str, bytes)):
        return doc.decode() if isinstance(doc, bytes) else doc
    if isinstance(doc, Path):
        return doc.read_text()
    return json.dumps(doc)


def canonicalize_spec(spec):
    """Canonical bytes of a valid spec. Raises SpecError (with .violations on invalid specs)."""
    return _core.canonicalize_spec(_text(spec))


def validate_spec(spec):
    return json.loads(_core.validate_spec(_text(spec)))["violations"]


def generate_spec(seed):
    return json.loads(_core.generate_spec(seed))


def run_trace(spec, trace, mock, mode="cd", seed=1, activity_ticks=80, ms_per_tick=100.0):
    """Replay a viewer trace. Returns the summary dict with the log records under "log"."""
    summary, ndjson = _core.run_trace(_text(spec), _text(trace), _text(mock), mode, seed, activity_ticks, ms_per_tick)
    out = json.loads(summary)
    out["log_ndjson"] = ndjson
    out["log"] = [json.loads(line) for line in ndjson.splitlines() if line]
    return out


def random_trace(spec, mock, trace_seed, mode="cd", seed=1):
    return json.loads(_core.random_trace(_text(spec), _text(mock), trace_seed, mode, seed))


class Rankings:
    """Per-evaluator rankings: one permutation of 1..k per row."""

    def __init__(self, conditions, ranks):
        self.conditions = list(conditions)
        self.ranks = [list(r) for r in ranks]

    @classmethod
    def from_csv(cls, path_or_text):
        text = Path(path_or_text).read_text() if isinstance(path_or_text, Path) else path_or_text
        return cls(*_core.parse_rankings(text))

    def friedman(self):
        return _core.friedman(self.conditions, self.ranks)

    def mean_rankings(self):
        return dict(zip(self.conditions, _core.mean_rankings(self.conditions, self.ranks)))

    def nemenyi(self):
        return _core.nemenyi(self.conditions, self.ranks)

    def critical_difference(self, alpha=0.05):
        return _core.critical_difference(len(self.conditions), len(self.ranks), alpha)

    def table(self, alpha=0.01):
        return _core.pairwise_table(self.conditions, self.ranks, alpha)
