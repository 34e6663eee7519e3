"""
fileio.py

JSON documents for spaces, maps and chains.

Space:  {"components": [{"name", "n", "edges"} | {"name", "dist"}, ...],
         "base_gap": int, "basepoints": [int, ...]?}
Map:    {"domain": ref, "codomain": ref, "image": [[comp, pt], ...]}
Chain:  {"ambient": ref, "coefficients": [[[comp, pt], int], ...]}

A ref is either a path, relative to the directory of the document that
mentions it, or the referenced document inlined. A DocumentLoader records the
SHA-256 of every file it reads so reports can name their inputs exactly.
"""

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from coarsekit.coarse_maps import CoarseMapTable
from coarsekit.errors import SchemaError
from coarsekit.metric_core import CoarseUnion, FiniteSpace, GraphSpace, PointRef, assemble_union
from coarsekit.uf_homology import Chain0


@dataclass(frozen=True)
class SpaceDocument:
    union: CoarseUnion
    graphs: Tuple[Optional[GraphSpace], ...]

    def metric(self, component: int = 0) -> FiniteSpace:
        if not 0 <= component < len(self.graphs):
            raise SchemaError(f"space has no component {component}")
        return self.union.components[component]

    def graph(self, component: int = 0) -> GraphSpace:
        self.metric(component)
        graph = self.graphs[component]
        if graph is None:
            raise SchemaError(f"component {component} is a distance matrix, not a graph")
        return graph


@dataclass(frozen=True)
class PartialMap:
    domain: CoarseUnion
    codomain: CoarseUnion
    mapping: Dict[PointRef, PointRef]


def _expect(doc: Any, key: str, kind, where: str):
    if not isinstance(doc, dict):
        raise SchemaError(f"{where}: expected an object, got {type(doc).__name__}")
    if key not in doc:
        raise SchemaError(f"{where}: missing '{key}'")
    value = doc[key]
    if not isinstance(value, kind) or isinstance(value, bool):
        raise SchemaError(f"{where}: '{key}' has type {type(value).__name__}")
    return value


def _point(value: Any, where: str) -> PointRef:
    if (
        not isinstance(value, list)
        or len(value) != 2
        or not all(isinstance(v, int) and not isinstance(v, bool) for v in value)
    ):
        raise SchemaError(f"{where}: point reference must be [component, point], got {value!r}")
    return PointRef(value[0], value[1])


def parse_space(doc: Any, where: str = "space") -> SpaceDocument:
    raw = _expect(doc, "components", list, where)
    if not raw:
        raise SchemaError(f"{where}: no components")
    components: List[FiniteSpace] = []
    graphs: List[Optional[GraphSpace]] = []
    for i, comp in enumerate(raw):
        label = f"{where}.components[{i}]"
        if not isinstance(comp, dict):
            raise SchemaError(f"{label}: expected an object")
        name = comp.get("name", "")
        if "dist" in comp:
            rows = _expect(comp, "dist", list, label)
            if not all(isinstance(row, list) and len(row) == len(rows) for row in rows):
                raise SchemaError(f"{label}: 'dist' must be a square matrix")
            components.append(FiniteSpace(np.asarray(rows), name))
            graphs.append(None)
        elif "edges" in comp:
            n = _expect(comp, "n", int, label)
            edges = _expect(comp, "edges", list, label)
            graph = GraphSpace.from_edges(n, edges, name)
            components.append(graph.metric)
            graphs.append(graph)
        else:
            raise SchemaError(f"{label}: needs 'dist' or 'n' and 'edges'")
    base_gap = doc.get("base_gap", 1)
    if not isinstance(base_gap, int) or isinstance(base_gap, bool):
        raise SchemaError(f"{where}: 'base_gap' must be an integer")
    basepoints = doc.get("basepoints")
    if basepoints is not None and not isinstance(basepoints, list):
        raise SchemaError(f"{where}: 'basepoints' must be a list")
    union = assemble_union(components, base_gap, basepoints)
    return SpaceDocument(union, tuple(graphs))


def space_to_doc(union: CoarseUnion, graphs: Optional[Tuple[Optional[GraphSpace], ...]] = None) -> Dict:
    components = []
    for i, space in enumerate(union.components):
        graph = graphs[i] if graphs is not None else None
        if graph is not None:
            components.append({"name": graph.name, "n": graph.n, "edges": [list(e) for e in graph.edges]})
        else:
            components.append({"name": space.name, "dist": space.dist.tolist()})
    return {"components": components, "base_gap": union.base_gap, "basepoints": list(union.basepoints)}


def map_to_doc(f: CoarseMapTable, domain_doc: Any = None, codomain_doc: Any = None) -> Dict:
    return {
        "domain": domain_doc if domain_doc is not None else space_to_doc(f.domain),
        "codomain": codomain_doc if codomain_doc is not None else space_to_doc(f.codomain),
        "image": [list(y) for y in f.image],
    }


def chain_to_doc(a: Chain0, ambient_doc: Any = None) -> Dict:
    return {
        "ambient": ambient_doc if ambient_doc is not None else space_to_doc(a.ambient),
        "coefficients": [[list(p), v] for p, v in a.coefficients.items()],
    }


@dataclass
class DocumentLoader:
    """Reads documents from disk, resolving refs and hashing every file read."""

    hashes: Dict[str, str] = field(default_factory=dict)

    def read(self, path: Union[str, Path]) -> Any:
        path = Path(path)
        data = path.read_bytes()
        self.hashes[str(path)] = hashlib.sha256(data).hexdigest()
        return json.loads(data.decode("utf-8"))

    def _resolve(self, ref: Any, base: Path, where: str) -> Any:
        if isinstance(ref, str):
            target = base / ref
            return self.read(target), target.parent
        if isinstance(ref, dict):
            return ref, base
        raise SchemaError(f"{where}: reference must be a path or an inline document")

    def space_doc(self, ref: Any, base: Path = Path("."), where: str = "space") -> SpaceDocument:
        doc, _ = self._resolve(ref, base, where)
        return parse_space(doc, where)

    def space(self, path: Union[str, Path]) -> SpaceDocument:
        return self.space_doc(str(Path(path).name), Path(path).parent)

    def _map_parts(self, path: Union[str, Path]):
        path = Path(path)
        doc = self.read(path)
        base = path.parent
        domain = self.space_doc(_expect(doc, "domain", (str, dict), "map"), base, "map.domain")
        codomain = self.space_doc(_expect(doc, "codomain", (str, dict), "map"), base, "map.codomain")
        image = _expect(doc, "image", list, "map")
        if len(image) != domain.union.size:
            raise SchemaError(f"map: {len(image)} images for {domain.union.size} domain points")
        return domain, codomain, image

    def map(self, path: Union[str, Path]) -> CoarseMapTable:
        domain, codomain, image = self._map_parts(path)
        points = tuple(_point(y, f"map.image[{i}]") for i, y in enumerate(image))
        return CoarseMapTable(domain.union, codomain.union, points)

    def partial_map(self, path: Union[str, Path]) -> PartialMap:
        """A map document whose image entries may be null (undefined points)."""
        domain, codomain, image = self._map_parts(path)
        mapping = {}
        for x, y in zip(domain.union.points(), image):
            if y is None:
                continue
            ref = _point(y, f"map.image[{domain.union.index(x)}]")
            codomain.union.index(ref)
            mapping[x] = ref
        return PartialMap(domain.union, codomain.union, mapping)

    def chain(self, path: Union[str, Path]) -> Chain0:
        path = Path(path)
        doc = self.read(path)
        ambient = self.space_doc(_expect(doc, "ambient", (str, dict), "chain"), path.parent, "chain.ambient")
        raw = _expect(doc, "coefficients", list, "chain")
        coefficients: Dict[PointRef, int] = {}
        for i, entry in enumerate(raw):
            where = f"chain.coefficients[{i}]"
            if not isinstance(entry, list) or len(entry) != 2:
                raise SchemaError(f"{where}: expected [[comp, pt], value]")
            point = _point(entry[0], where)
            value = entry[1]
            if not isinstance(value, int) or isinstance(value, bool):
                raise SchemaError(f"{where}: coefficient must be an integer")
            ambient.union.index(point)
            coefficients[point] = coefficients.get(point, 0) + value
        return Chain0(ambient.union, coefficients)

    def points(self, path: Union[str, Path]) -> List[PointRef]:
        """A JSON list of [comp, pt] pairs."""
        doc = self.read(path)
        if not isinstance(doc, list):
            raise SchemaError("point list: expected a JSON array")
        return [_point(p, f"points[{i}]") for i, p in enumerate(doc)]
