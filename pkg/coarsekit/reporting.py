"""
reporting.py

Run manifests and deterministic JSON rendering of results.

Reports are {"manifest": ..., "result": ...} dumped with sorted keys, so
two runs with the same manifest print byte-identical output. Rationals are
written "p/q", point references [component, point], dictionaries with
non-string keys as sorted [key, value] pairs.
"""

import dataclasses
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Optional

import numpy as np

from coarsekit import __version__
from coarsekit.coarse_maps import CoarseMapTable
from coarsekit.fileio import map_to_doc, space_to_doc
from coarsekit.metric_core import CoarseUnion, FiniteSpace, GraphSpace, PointRef
from coarsekit.uf_homology import Chain0, Chain1


@dataclass(frozen=True)
class RunManifest:
    command: str
    inputs: Dict[str, str] = field(default_factory=dict)
    seed: Optional[int] = None
    exact_cap: Optional[int] = None
    truncation: Optional[int] = None
    options: Dict[str, Any] = field(default_factory=dict)
    version: str = __version__


def rational(value: Fraction) -> str:
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def _sort_key(item):
    key = item[0]
    return (0, key) if isinstance(key, (int, tuple)) else (1, str(key))


def to_jsonable(value: Any) -> Any:
    """Recursively convert results into plain JSON values."""
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, float):
        return value
    if isinstance(value, Fraction):
        return rational(value)
    if isinstance(value, PointRef):
        return [value.component, value.point]
    if isinstance(value, CoarseMapTable):
        return map_to_doc(value)
    if isinstance(value, Chain0):
        return [[list(p), c] for p, c in value.coefficients.items()]
    if isinstance(value, Chain1):
        return [[list(x), list(z), c] for (x, z), c in sorted(value.coefficients.items())]
    if isinstance(value, CoarseUnion):
        return space_to_doc(value)
    if isinstance(value, GraphSpace):
        return {"name": value.name, "n": value.n, "edges": [list(e) for e in value.edges]}
    if isinstance(value, FiniteSpace):
        return {"name": value.name, "dist": value.dist.tolist()}
    if isinstance(value, np.ndarray):
        return value.tolist()
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {f.name: to_jsonable(getattr(value, f.name)) for f in dataclasses.fields(value)}
    if isinstance(value, dict):
        if all(isinstance(k, str) for k in value):
            return {k: to_jsonable(v) for k, v in value.items()}
        return [[to_jsonable(k), to_jsonable(v)] for k, v in sorted(value.items(), key=_sort_key)]
    if isinstance(value, (frozenset, set)):
        return [to_jsonable(v) for v in sorted(value)]
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    raise TypeError(f"cannot serialize {type(value).__name__}")


def render(manifest: RunManifest, result: Any) -> str:
    document = {"manifest": to_jsonable(manifest), "result": to_jsonable(result)}
    return json.dumps(document, sort_keys=True, indent=2, ensure_ascii=False)


def render_error(error: BaseException) -> str:
    document = {"error": {"type": type(error).__name__, "message": str(error)}}
    return json.dumps(document, sort_keys=True, indent=2, ensure_ascii=False)
