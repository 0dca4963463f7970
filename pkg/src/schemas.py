"""
JSON documents exchanged through the command line.

Tree file:
    {"n": 3, "edges": [[0, 1], [1, 2]], "freqs": [0.0, 0.0, 1.0], "labels": [...]}

labels is optional. Field order is fixed and floats are written in their
shortest round-trip form, so reading and rewriting a document reproduces
it byte for byte.
"""
import json
from pathlib import Path
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from errors import ParseError
from rearrange import RearrangementResult
from tree_model import KuramotoTree, build_tree


class TreeDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n: int
    edges: List[Tuple[int, int]]
    freqs: List[float]
    labels: Optional[List[str]] = None

    @classmethod
    def from_tree(cls, tree: KuramotoTree) -> "TreeDocument":
        return cls(
            n=tree.n,
            edges=list(tree.edges),
            freqs=tree.freqs.tolist(),
            labels=list(tree.labels) if tree.labels is not None else None,
        )

    def to_tree(self) -> KuramotoTree:
        return build_tree(self.n, self.edges, self.freqs, self.labels)

    def to_json(self) -> str:
        return self.model_dump_json(indent=2, exclude_none=True) + "\n"


class RearrangementDocument(TreeDocument):
    """The original tree plus the rearrangement applied to it."""

    root: int = 0
    assignment: List[int]
    dfs_order: List[int]
    k_c_before: float
    k_c_after: float
    bound: float
    rearranged_freqs: List[float]
    f_values: List[float]

    @model_validator(mode="after")
    def _check_permutations(self) -> "RearrangementDocument":
        for name in ("assignment", "dfs_order"):
            if sorted(getattr(self, name)) != list(range(self.n)):
                raise ValueError(f"{name} is not a permutation of 0..{self.n - 1}")
        return self

    @classmethod
    def from_result(
        cls, tree: KuramotoTree, result: RearrangementResult, root: int = 0
    ) -> "RearrangementDocument":
        return cls(
            **TreeDocument.from_tree(tree).model_dump(),
            root=root,
            **result.model_dump(),
        )


def _describe(exc: ValidationError) -> str:
    first = exc.errors()[0]
    location = ".".join(str(part) for part in first["loc"]) or "document"
    return f"{location}: {first['msg']}"


def parse_document(text: str, model=TreeDocument, source: str = "<input>"):
    """
    Parse JSON text into a document model.

    Raises:
        ParseError: JSON syntax error (with line and column) or schema mismatch
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    try:
        return model.model_validate(data)
    except ValidationError as exc:
        raise ParseError(f"{source}: {_describe(exc)}") from exc


def read_document(path, model=TreeDocument):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: cannot read file ({exc.strerror})") from exc
    return parse_document(text, model, source=str(path))


def read_tree(path) -> KuramotoTree:
    return read_document(path).to_tree()


def write_document(document: TreeDocument, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(document.to_json(), encoding="utf-8")
    return path


def write_tree(tree: KuramotoTree, path) -> Path:
    return write_document(TreeDocument.from_tree(tree), path)
