"""JSON serialization for triples, points, data sets, and models.

Two schemas: "tetrakit/io/v1" wraps inputs (points, triples), and
"tetrakit/model/v1" wraps derived objects (data sets, models).  Complex
numbers serialize as [re, im] pairs and matrices as
{"rows": r, "cols": c, "data": [[re, im], ...]} in row-major order, which
is lossless for finite doubles; non-finite entries are rejected on both
directions.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .classify import OperatorTriple
from .errors import SchemaError
from .geometry import Point3
from .matkernel import SubspaceBasis
from .models import DouglasModel, ResidualTriple, TetrablockDataSet

IO_SCHEMA = "tetrakit/io/v1"
MODEL_SCHEMA = "tetrakit/model/v1"

__all__ = [
    "IO_SCHEMA",
    "MODEL_SCHEMA",
    "matrix_to_json",
    "matrix_from_json",
    "point_to_json",
    "point_from_json",
    "triple_to_json",
    "triple_from_json",
    "dataset_to_json",
    "dataset_from_json",
    "model_to_json",
    "wrap_document",
    "parse_document",
    "load_document",
    "dump_document",
    "roundtrip_io",
    "sanitize_report",
]


def _pair(z: complex) -> list[float]:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise SchemaError("non-finite complex value cannot be serialized")
    return [z.real, z.imag]


def _unpair(obj) -> complex:
    if (
        not isinstance(obj, (list, tuple))
        or len(obj) != 2
        or not all(isinstance(x, (int, float)) for x in obj)
    ):
        raise SchemaError(f"expected [re, im] pair, got {obj!r}")
    z = complex(obj[0], obj[1])
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise SchemaError("non-finite complex value rejected")
    return z


def matrix_to_json(m) -> dict:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise SchemaError("matrix must be two-dimensional")
    return {
        "rows": int(a.shape[0]),
        "cols": int(a.shape[1]),
        "data": [_pair(z) for z in a.ravel()],
    }


def matrix_from_json(obj) -> np.ndarray:
    if not isinstance(obj, dict) or not {"rows", "cols", "data"} <= set(obj):
        raise SchemaError("matrix object must have rows, cols, data")
    rows, cols = obj["rows"], obj["cols"]
    if not (isinstance(rows, int) and isinstance(cols, int)) or rows < 0 or cols < 0:
        raise SchemaError("rows and cols must be nonnegative integers")
    data = obj["data"]
    if len(data) != rows * cols:
        raise SchemaError(f"expected {rows * cols} entries, found {len(data)}")
    flat = [_unpair(p) for p in data]
    return np.array(flat, dtype=complex).reshape(rows, cols)


def point_to_json(p: Point3) -> list:
    return [_pair(p.a), _pair(p.b), _pair(p.t)]


def point_from_json(obj) -> Point3:
    if not isinstance(obj, (list, tuple)) or len(obj) != 3:
        raise SchemaError("point must be [[re,im],[re,im],[re,im]]")
    return Point3(*(_unpair(x) for x in obj))


def triple_to_json(t: OperatorTriple) -> dict:
    return {"a": matrix_to_json(t.a), "b": matrix_to_json(t.b), "t": matrix_to_json(t.t)}


def triple_from_json(obj) -> OperatorTriple:
    if not isinstance(obj, dict) or not {"a", "b", "t"} <= set(obj):
        raise SchemaError("triple object must have a, b, t")
    return OperatorTriple(
        matrix_from_json(obj["a"]),
        matrix_from_json(obj["b"]),
        matrix_from_json(obj["t"]),
    )


def _residual_to_json(rt: ResidualTriple) -> dict:
    return {
        "r": matrix_to_json(rt.r),
        "s": matrix_to_json(rt.s),
        "w": matrix_to_json(rt.w),
        "carrier": matrix_to_json(rt.carrier.basis),
        "ambient_dim": rt.carrier.ambient_dim,
        "strict": bool(rt.strict),
    }


def _residual_from_json(obj) -> ResidualTriple:
    if not isinstance(obj, dict) or not {"r", "s", "w", "carrier"} <= set(obj):
        raise SchemaError("residual object must have r, s, w, carrier")
    basis = matrix_from_json(obj["carrier"])
    ambient = obj.get("ambient_dim", basis.shape[0])
    return ResidualTriple(
        matrix_from_json(obj["r"]),
        matrix_from_json(obj["s"]),
        matrix_from_json(obj["w"]),
        SubspaceBasis(int(ambient), basis),
        bool(obj.get("strict", False)),
        {},
    )


def dataset_to_json(d: TetrablockDataSet) -> dict:
    return {
        "theta_samples": [
            {"z": _pair(z), "matrix": matrix_to_json(m)} for z, m in d.theta_samples
        ],
        "g1": matrix_to_json(d.g1),
        "g2": matrix_to_json(d.g2),
        "residual": _residual_to_json(d.residual),
        "pure_flag": bool(d.pure_flag),
    }


def dataset_from_json(obj) -> TetrablockDataSet:
    keys = {"theta_samples", "g1", "g2", "residual", "pure_flag"}
    if not isinstance(obj, dict) or not keys <= set(obj):
        raise SchemaError(f"dataset object must have {sorted(keys)}")
    samples = []
    for item in obj["theta_samples"]:
        if not isinstance(item, dict) or not {"z", "matrix"} <= set(item):
            raise SchemaError("theta sample must have z and matrix")
        samples.append((_unpair(item["z"]), matrix_from_json(item["matrix"])))
    return TetrablockDataSet(
        samples,
        matrix_from_json(obj["g1"]),
        matrix_from_json(obj["g2"]),
        _residual_from_json(obj["residual"]),
        bool(obj["pure_flag"]),
    )


def model_to_json(m: DouglasModel) -> dict:
    return {
        "order_n": m.order_n,
        "defect_dim": m.defect_dim,
        "g1": matrix_to_json(m.g1),
        "g2": matrix_to_json(m.g2),
        "embedding": matrix_to_json(m.embedding),
        "v1": matrix_to_json(m.v1),
        "v2": matrix_to_json(m.v2),
        "v3": matrix_to_json(m.v3),
        "residual": _residual_to_json(m.residual),
        "tail": m.tail,
        "deficiency": m.deficiency,
        "warnings": list(m.warnings),
    }


_KIND_SCHEMA = {
    "point": IO_SCHEMA,
    "triple": IO_SCHEMA,
    "dataset": MODEL_SCHEMA,
    "model": MODEL_SCHEMA,
    "report": MODEL_SCHEMA,
}


def wrap_document(kind: str, payload) -> dict:
    if kind not in _KIND_SCHEMA:
        raise SchemaError(f"unknown document kind {kind!r}")
    return {"schema": _KIND_SCHEMA[kind], "kind": kind, "payload": payload}


def parse_document(obj):
    """Parse a wrapped document into (kind, value)."""
    if not isinstance(obj, dict):
        raise SchemaError("document must be a JSON object")
    schema = obj.get("schema")
    if schema not in (IO_SCHEMA, MODEL_SCHEMA):
        hint = ""
        if isinstance(schema, str) and schema.startswith("tetrakit/") and (
            schema.endswith("/v0") or "/v0" in schema
        ):
            hint = "; v0 documents are not supported, regenerate with this tool"
        raise SchemaError(f"unsupported schema {schema!r}{hint}")
    kind = obj.get("kind")
    payload = obj.get("payload")
    if kind == "point":
        return kind, point_from_json(payload)
    if kind == "triple":
        return kind, triple_from_json(payload)
    if kind == "dataset":
        return kind, dataset_from_json(payload)
    raise SchemaError(f"cannot parse documents of kind {kind!r}")


def load_document(path):
    """Load and parse a wrapped JSON document from disk."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed JSON at line {exc.lineno} column {exc.colno}") from exc
    return parse_document(obj)


def dump_document(kind: str, payload, path) -> None:
    Path(path).write_text(
        json.dumps(wrap_document(kind, payload), indent=2, allow_nan=False) + "\n",
        encoding="utf-8",
    )


def _serialize_value(kind: str, value) -> dict:
    if kind == "point":
        return wrap_document(kind, point_to_json(value))
    if kind == "triple":
        return wrap_document(kind, triple_to_json(value))
    if kind == "dataset":
        return wrap_document(kind, dataset_to_json(value))
    raise SchemaError(f"cannot serialize documents of kind {kind!r}")


def roundtrip_io(path):
    """Parse a document and verify parse -> serialize -> parse is identity."""
    kind, value = load_document(path)
    text = json.dumps(_serialize_value(kind, value), allow_nan=False)
    kind2, value2 = parse_document(json.loads(text))
    if kind2 != kind:
        raise SchemaError("round trip changed the document kind")
    return value


def sanitize_report(obj):
    """Make a report JSON-safe: numpy scalars to floats, non-finite to strings."""
    if isinstance(obj, dict):
        return {k: sanitize_report(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize_report(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, complex):
        return _pair(obj)
    if isinstance(obj, np.ndarray):
        return matrix_to_json(obj if obj.ndim == 2 else obj.reshape(1, -1))
    return obj
