import hashlib
import json

import pytest

from coarsekit.coarse_maps import CoarseMapTable
from coarsekit.errors import InvalidMetric, PointOutOfRange, SchemaError
from coarsekit.fileio import DocumentLoader, chain_to_doc, map_to_doc, parse_space, space_to_doc
from coarsekit.metric_core import PointRef
from coarsekit.uf_homology import Chain0


def _write(path, doc):
    path.write_text(json.dumps(doc))
    return path


def test_parse_graph_space(data_dir):
    space = DocumentLoader().space(data_dir / "three_c4.json")
    assert space.union.sizes == [4, 4, 4]
    assert space.union.base_gap == 3
    assert space.graph(1).name == "C4-b"


def test_parse_dist_space_has_no_graph():
    space = parse_space({"components": [{"dist": [[0, 2], [2, 0]]}]})
    assert space.union.size == 2
    with pytest.raises(SchemaError):
        space.graph(0)
    with pytest.raises(SchemaError):
        space.graph(3)


@pytest.mark.parametrize(
    "doc",
    [
        {},
        {"components": []},
        {"components": [{"dist": [[0, 1]]}]},
        {"components": [{"n": 2}]},
        {"components": [{"n": "2", "edges": []}]},
        {"components": [{"dist": [[0]]}], "base_gap": "1"},
        {"components": [{"dist": [[0]]}], "basepoints": 0},
        [],
    ],
)
def test_parse_space_schema_errors(doc):
    with pytest.raises(SchemaError):
        parse_space(doc)


def test_parse_space_keeps_fractional_distances_visible():
    with pytest.raises(InvalidMetric):
        parse_space({"components": [{"dist": [[0, 0.5], [0.5, 0]]}]})


def test_loader_hashes_every_file(data_dir):
    loader = DocumentLoader()
    f = loader.map(data_dir / "collapse_map.json")
    assert f.image[5] == PointRef(1, 0)
    digest = hashlib.sha256((data_dir / "three_c4.json").read_bytes()).hexdigest()
    assert loader.hashes[str(data_dir / "three_c4.json")] == digest
    assert str(data_dir / "collapse_map.json") in loader.hashes


def test_map_with_wrong_image_count(tmp_path, data_dir):
    c8 = str(data_dir / "c8.json")
    path = _write(tmp_path / "m.json", {"domain": c8, "codomain": c8, "image": [[0, 0]]})
    with pytest.raises(SchemaError):
        DocumentLoader().map(path)


def test_map_with_bad_point(tmp_path, data_dir):
    space = json.loads((data_dir / "k6.json").read_text())
    image = [[0, i] for i in range(5)] + [[0, 9]]
    path = _write(tmp_path / "m.json", {"domain": space, "codomain": space, "image": image})
    with pytest.raises(PointOutOfRange):
        DocumentLoader().map(path)
    image[-1] = [0, True]
    _write(path, {"domain": space, "codomain": space, "image": image})
    with pytest.raises(SchemaError):
        DocumentLoader().map(path)


def test_partial_map_allows_null(tmp_path):
    edge = {"components": [{"n": 2, "edges": [[0, 1]]}]}
    path = _write(tmp_path / "p.json", {"domain": edge, "codomain": edge, "image": [[0, 1], None]})
    partial = DocumentLoader().partial_map(path)
    assert partial.mapping == {PointRef(0, 0): PointRef(0, 1)}


def test_chain_document(data_dir):
    a = DocumentLoader().chain(data_dir / "c8_chain.json")
    assert a[(0, 0)] == 1 and a[(0, 4)] == -1
    assert a.ambient.size == 8


def test_chain_rejects_float_coefficients(tmp_path, data_dir):
    path = _write(tmp_path / "a.json", {"ambient": str(data_dir / "c8.json"), "coefficients": [[[0, 0], 1.5]]})
    with pytest.raises(SchemaError):
        DocumentLoader().chain(path)


def test_point_list(tmp_path):
    loader = DocumentLoader()
    assert loader.points(_write(tmp_path / "z.json", [[0, 1], [2, 3]])) == [PointRef(0, 1), PointRef(2, 3)]
    with pytest.raises(SchemaError):
        loader.points(_write(tmp_path / "bad.json", {"points": []}))


def test_documents_read_back(tmp_path, three_c4):
    f = CoarseMapTable.from_function(three_c4, three_c4, lambda ref: (ref.component, 0))
    path = _write(tmp_path / "f.json", map_to_doc(f))
    assert DocumentLoader().map(path) == f
    a = Chain0(three_c4, {(0, 1): 2, (2, 3): -2})
    path = _write(tmp_path / "a.json", chain_to_doc(a, space_to_doc(three_c4)))
    assert DocumentLoader().chain(path) == a
