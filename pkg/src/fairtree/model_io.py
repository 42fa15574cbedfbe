"""Model documents: schema "fairtree-model/1".

serialize() produces a plain dict mirroring the node structure; save/load
wrap it in JSON with full round-trip float precision. deserialize() checks
invariants and reports the path of the offending node on failure.
"""

from __future__ import annotations

import json
import math

from .errors import ModelFormatError
from .tree import DecisionTree, Forest, InternalNode, LeafNode

SCHEMA = "fairtree-model/1"


def _node_doc(node):
    if isinstance(node, LeafNode):
        return {
            "kind": "leaf",
            "class_counts": list(node.class_counts),
            "predicted_class": node.predicted_class,
        }
    return {
        "kind": "internal",
        "feature_index": node.feature_index,
        "threshold": node.threshold,
        "scale": node.scale,
        "uniform_distance": node.uniform_distance,
        "left_majority": node.left_majority,
        "right_majority": node.right_majority,
        "left": _node_doc(node.left),
        "right": _node_doc(node.right),
    }


def _tree_doc(tree: DecisionTree) -> dict:
    return {
        "n_features": tree.n_features,
        "class_labels": list(tree.class_labels),
        "training_meta": dict(tree.training_meta),
        "root": _node_doc(tree.root),
    }


def serialize(model) -> dict:
    if isinstance(model, Forest):
        return {
            "schema": SCHEMA,
            "kind": "forest",
            "n_trees": model.n_trees,
            "bagging_meta": dict(model.bagging_meta),
            "trees": [_tree_doc(t) for t in model.trees],
        }
    if isinstance(model, DecisionTree):
        doc = {"schema": SCHEMA, "kind": "tree"}
        doc.update(_tree_doc(model))
        return doc
    raise TypeError(f"cannot serialize {type(model).__name__}")


def _expect_dict(value, path):
    if not isinstance(value, dict):
        raise ModelFormatError(path, "expected an object")
    return value


def _get(doc, key, path):
    if key not in doc:
        raise ModelFormatError(path, f"missing field {key!r}")
    return doc[key]


def _as_int(value, path, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ModelFormatError(path, "expected an integer")
    if minimum is not None and value < minimum:
        raise ModelFormatError(path, f"must be >= {minimum}")
    return value


def _as_number(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ModelFormatError(path, "expected a number")
    value = float(value)
    if not math.isfinite(value):
        raise ModelFormatError(path, "must be finite")
    return value


def _as_class_id(value, path):
    v = _as_int(value, path)
    if v not in (0, 1):
        raise ModelFormatError(path, "class id must be 0 or 1")
    return v


def _parse_node(doc, path, n_features):
    doc = _expect_dict(doc, path)
    kind = _get(doc, "kind", path)
    if kind == "leaf":
        counts = _get(doc, "class_counts", path)
        if not isinstance(counts, list) or len(counts) != 2:
            raise ModelFormatError(f"{path}.class_counts", "expected [count0, count1]")
        c0 = _as_int(counts[0], f"{path}.class_counts", minimum=0)
        c1 = _as_int(counts[1], f"{path}.class_counts", minimum=0)
        predicted = _as_class_id(_get(doc, "predicted_class", path), f"{path}.predicted_class")
        expected = 1 if c1 > c0 else 0
        if predicted != expected:
            raise ModelFormatError(
                f"{path}.predicted_class",
                f"must equal the majority class {expected} (ties go to 0)",
            )
        return LeafNode(class_counts=(c0, c1), predicted_class=predicted)
    if kind == "internal":
        feature = _as_int(_get(doc, "feature_index", path), f"{path}.feature_index", minimum=0)
        if feature >= n_features:
            raise ModelFormatError(
                f"{path}.feature_index", f"must be < n_features ({n_features})"
            )
        threshold = _as_number(_get(doc, "threshold", path), f"{path}.threshold")
        scale = _as_number(_get(doc, "scale", path), f"{path}.scale")
        if scale < 0:
            raise ModelFormatError(f"{path}.scale", "must be >= 0")
        uniform = doc.get("uniform_distance", False)
        if not isinstance(uniform, bool):
            raise ModelFormatError(f"{path}.uniform_distance", "expected a boolean")
        lmaj = _as_class_id(_get(doc, "left_majority", path), f"{path}.left_majority")
        rmaj = _as_class_id(_get(doc, "right_majority", path), f"{path}.right_majority")
        return InternalNode(
            feature_index=feature,
            threshold=threshold,
            scale=scale,
            uniform_distance=uniform,
            left_majority=lmaj,
            right_majority=rmaj,
            left=_parse_node(_get(doc, "left", path), f"{path}.left", n_features),
            right=_parse_node(_get(doc, "right", path), f"{path}.right", n_features),
        )
    raise ModelFormatError(f"{path}.kind", "expected 'leaf' or 'internal'")


def _parse_tree(doc, path) -> DecisionTree:
    doc = _expect_dict(doc, path)
    n_features = _as_int(_get(doc, "n_features", path), f"{path}.n_features", minimum=1)
    labels = doc.get("class_labels", [0, 1])
    if labels != [0, 1]:
        raise ModelFormatError(f"{path}.class_labels", "must be [0, 1]")
    meta = doc.get("training_meta", {})
    if not isinstance(meta, dict):
        raise ModelFormatError(f"{path}.training_meta", "expected an object")
    root = _parse_node(_get(doc, "root", path), f"{path}.root", n_features)
    return DecisionTree(root=root, n_features=n_features, training_meta=dict(meta))


def deserialize(doc) -> "DecisionTree | Forest":
    doc = _expect_dict(doc, "document")
    schema = _get(doc, "schema", "document")
    if schema != SCHEMA:
        raise ModelFormatError("document.schema", f"expected {SCHEMA!r}, got {schema!r}")
    kind = _get(doc, "kind", "document")
    if kind == "tree":
        return _parse_tree(doc, "document")
    if kind == "forest":
        trees_doc = _get(doc, "trees", "document")
        if not isinstance(trees_doc, list) or not trees_doc:
            raise ModelFormatError("document.trees", "expected a non-empty list")
        n_trees = _as_int(_get(doc, "n_trees", "document"), "document.n_trees", minimum=1)
        if n_trees != len(trees_doc):
            raise ModelFormatError("document.n_trees", "must equal len(trees)")
        meta = doc.get("bagging_meta", {})
        if not isinstance(meta, dict):
            raise ModelFormatError("document.bagging_meta", "expected an object")
        trees = [
            _parse_tree(t, f"document.trees[{i}]") for i, t in enumerate(trees_doc)
        ]
        widths = {t.n_features for t in trees}
        if len(widths) != 1:
            raise ModelFormatError("document.trees", "trees disagree on n_features")
        return Forest(trees=trees, n_trees=n_trees, bagging_meta=dict(meta))
    raise ModelFormatError("document.kind", "expected 'tree' or 'forest'")


def dumps(model) -> str:
    return json.dumps(serialize(model), indent=2, sort_keys=True) + "\n"


def loads(text: str) -> "DecisionTree | Forest":
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError("document", f"invalid JSON: {exc}") from exc
    return deserialize(doc)


def save_model(model, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(model))


def load_model(path) -> "DecisionTree | Forest":
    with open(path, "r", encoding="utf-8") as fh:
        return loads(fh.read())
