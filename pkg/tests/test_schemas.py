"""
tests/test_schemas.py
=====================
Reading and writing tree and rearrangement documents.
"""

import json

import pytest

from errors import NotATree, ParseError
from rearrange import rearrange
from schemas import (
    RearrangementDocument,
    TreeDocument,
    parse_document,
    read_document,
    read_tree,
    write_document,
    write_tree,
)
from tree_model import UniformDistribution, generate_tree


def test_fixture_trees_load(trees_dir):
    assert read_tree(trees_dir / "chain3.json").freqs.tolist() == [0.0, 0.0, 1.0]
    organisation = read_tree(trees_dir / "organisation.json")
    assert organisation.n == 22
    assert organisation.labels[0] == "director"


@pytest.mark.parametrize("kind", ["random_uniform", "binary", "tadpole(8)"])
def test_rewrite_is_byte_identical(tmp_path, kind):
    tree = generate_tree(kind, 20, UniformDistribution(), seed=3)
    first = write_tree(tree, tmp_path / "a.json")
    second = write_tree(read_tree(first), tmp_path / "b.json")
    assert first.read_bytes() == second.read_bytes()
    assert read_tree(second).freqs.tolist() == tree.freqs.tolist()


def test_labels_survive_a_rewrite(tmp_path, trees_dir):
    tree = read_tree(trees_dir / "organisation.json")
    again = read_tree(write_tree(tree, tmp_path / "org.json"))
    assert again.labels == tree.labels
    assert again.edges == tree.edges


def test_unlabelled_documents_omit_labels(two_vertex):
    assert "labels" not in json.loads(TreeDocument.from_tree(two_vertex).to_json())


# ------------------ Malformed input ------------------


def test_syntax_error_names_the_line():
    with pytest.raises(ParseError, match="line 3"):
        parse_document('{\n  "n": 2,\n  "edges": [[0, 1]]]\n}')


@pytest.mark.parametrize(
    "document",
    [
        {"n": 2, "edges": [[0, 1]]},
        {"n": 2, "edges": [[0, 1]], "freqs": [0.0, 1.0], "colour": "red"},
        {"n": 2, "edges": [[0, 1, 2]], "freqs": [0.0, 1.0]},
        {"n": "two", "edges": [[0, 1]], "freqs": [0.0, 1.0]},
    ],
)
def test_schema_mismatch_is_a_parse_error(document):
    with pytest.raises(ParseError):
        parse_document(json.dumps(document))


def test_missing_file_is_a_parse_error(tmp_path):
    with pytest.raises(ParseError, match="cannot read"):
        read_tree(tmp_path / "absent.json")


def test_cyclic_document_parses_but_is_not_a_tree(tmp_path):
    path = tmp_path / "cycle.json"
    path.write_text(json.dumps({"n": 3, "edges": [[0, 1], [1, 2], [2, 0]], "freqs": [0, 0.5, 1]}))
    assert read_document(path).n == 3
    with pytest.raises(NotATree):
        read_tree(path)


# ------------------ Rearrangement documents ------------------


def test_rearrangement_document_round_trip(tmp_path):
    tree = generate_tree("binary", 15, UniformDistribution(), seed=0)
    document = RearrangementDocument.from_result(tree, rearrange(tree, 2), root=2)
    path = write_document(document, tmp_path / "out" / "rearranged.json")
    again = read_document(path, RearrangementDocument)
    assert again == document
    assert again.root == 2
    assert again.to_tree().edges == tree.edges


def test_assignment_must_be_a_permutation(two_vertex):
    data = RearrangementDocument.from_result(two_vertex, rearrange(two_vertex)).model_dump()
    data["assignment"] = [0, 0]
    with pytest.raises(ParseError, match="permutation"):
        parse_document(json.dumps(data), RearrangementDocument)
