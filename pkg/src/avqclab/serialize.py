"""JSON documents for every object kind, with exact float round-trips.

Every document is a JSON object with a top-level ``"kind"`` discriminator.
Complex numbers serialize as two-element arrays ``[re, im]`` and matrices as
nested row-major arrays of those pairs. Floats are emitted through Python's
shortest round-trip repr, so dump/load is bit-exact at double precision.
Decode errors raise :class:`SchemaError` carrying the JSON path of the
offending field.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from .avqc import AvCqc, Avqc, ClassicalAvc, CqChannel
from .codes import CorrelatedCode, DeterministicCode, RandomCode
from .correlation import BipartiteSource
from .errors import SchemaError, ValidationError
from .quantum import DensityMatrix, Povm, PureState, QuantumChannel

__all__ = [
    "to_document",
    "from_document",
    "probes_to_document",
    "dumps_document",
    "loads_document",
    "read_document",
    "write_document",
]


def _complex_pair(z: complex) -> list:
    return [float(z.real), float(z.imag)]


def _matrix_to_json(mat: np.ndarray) -> list:
    return [[_complex_pair(complex(v)) for v in row] for row in np.asarray(mat)]


def _real_vector(vec) -> list:
    return [float(v) for v in vec]


def _expect(doc: Any, key: str, path: str) -> Any:
    if not isinstance(doc, dict):
        raise SchemaError(f"expected an object", path=path)
    if key not in doc:
        raise SchemaError(f"missing field {key!r}", path=path)
    return doc[key]


def _as_complex(entry: Any, path: str) -> complex:
    if isinstance(entry, (int, float)):
        return complex(float(entry), 0.0)
    if (
        isinstance(entry, (list, tuple))
        and len(entry) == 2
        and all(isinstance(v, (int, float)) for v in entry)
    ):
        return complex(float(entry[0]), float(entry[1]))
    raise SchemaError("expected a number or an [re, im] pair", path=path)


def _matrix_from_json(rows: Any, path: str) -> np.ndarray:
    if not isinstance(rows, list) or not rows:
        raise SchemaError("expected a non-empty array of rows", path=path)
    width = None
    data = []
    for i, row in enumerate(rows):
        if not isinstance(row, list) or not row:
            raise SchemaError("expected a non-empty row array", path=f"{path}[{i}]")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise SchemaError(
                f"row has {len(row)} entries, expected {width}", path=f"{path}[{i}]"
            )
        data.append([_as_complex(v, f"{path}[{i}][{j}]") for j, v in enumerate(row)])
    return np.array(data, dtype=complex)


def _real_matrix_from_json(rows: Any, path: str) -> np.ndarray:
    mat = _matrix_from_json(rows, path)
    if np.any(mat.imag != 0.0):
        raise SchemaError("expected real entries", path=path)
    return mat.real


def _vector_from_json(entries: Any, path: str) -> np.ndarray:
    if not isinstance(entries, list) or not entries:
        raise SchemaError("expected a non-empty array", path=path)
    out = []
    for i, v in enumerate(entries):
        if not isinstance(v, (int, float)):
            raise SchemaError("expected a number", path=f"{path}[{i}]")
        out.append(float(v))
    return np.array(out)


# ---------------------------------------------------------------- encoding


def _encode(obj: Any) -> dict:
    if isinstance(obj, DensityMatrix):
        return {"kind": "density_matrix", "matrix": _matrix_to_json(obj.matrix)}
    if isinstance(obj, PureState):
        return {
            "kind": "pure_state",
            "amplitudes": [_complex_pair(complex(a)) for a in obj.amplitudes],
        }
    if isinstance(obj, QuantumChannel):
        return {
            "kind": "channel",
            "dim_in": obj.dim_in,
            "dim_out": obj.dim_out,
            "kraus": [_matrix_to_json(op) for op in obj.kraus],
        }
    if isinstance(obj, Povm):
        return {
            "kind": "povm",
            "elements": [_matrix_to_json(el) for el in obj.elements],
        }
    if isinstance(obj, Avqc):
        return {
            "kind": "avqc",
            "states": [str(s) for s in obj.states],
            "channels": {str(s): _encode(obj.channels[s]) for s in obj.states},
        }
    if isinstance(obj, AvCqc):
        return {
            "kind": "av_cqc",
            "states": [str(s) for s in obj.states],
            "alphabet": [str(x) for x in obj.alphabet],
            "branches": {
                str(s): [
                    _matrix_to_json(obj.branches[s].outputs[x].matrix)
                    for x in obj.alphabet
                ]
                for s in obj.states
            },
        }
    if isinstance(obj, ClassicalAvc):
        return {
            "kind": "classical_avc",
            "states": [str(s) for s in obj.states],
            "kernels": {
                str(s): [[float(v) for v in row] for row in obj.kernels[s]]
                for s in obj.states
            },
        }
    if isinstance(obj, BipartiteSource):
        return {
            "kind": "bipartite_source",
            "x_alphabet": list(obj.x_alphabet),
            "y_alphabet": list(obj.y_alphabet),
            "joint": [[float(v) for v in row] for row in obj.joint],
        }
    if isinstance(obj, DeterministicCode):
        return {
            "kind": "deterministic_code",
            "l": obj.l,
            "encoder": [_matrix_to_json(rho.matrix) for rho in obj.encoder],
            "decoder": _encode(obj.decoder),
        }
    if isinstance(obj, RandomCode):
        return {
            "kind": "random_code",
            "support": [_encode(det) for det in obj.support],
            "weights": _real_vector(obj.weights),
        }
    if isinstance(obj, CorrelatedCode):
        return {
            "kind": "correlated_code",
            "l": obj.l,
            "r": obj.r,
            "source": _encode(obj.source),
            "encoders": [
                {
                    "x": list(x),
                    "states": [_matrix_to_json(rho.matrix) for rho in enc],
                }
                for x, enc in sorted(obj.encoders.items(), key=lambda kv: repr(kv[0]))
            ],
            "decoders": [
                {"y": list(y), "povm": _encode(povm)}
                for y, povm in sorted(obj.decoders.items(), key=lambda kv: repr(kv[0]))
            ],
        }
    raise ValidationError(f"no JSON encoding for {type(obj).__name__}")


def to_document(obj: Any) -> dict:
    """Encode a library object as a self-describing JSON document."""
    return _encode(obj)


# ---------------------------------------------------------------- decoding


def _decode_channel(doc: Any, path: str) -> QuantumChannel:
    kraus_doc = _expect(doc, "kraus", path)
    if not isinstance(kraus_doc, list) or not kraus_doc:
        raise SchemaError("expected a non-empty array", path=f"{path}.kraus")
    ops = [
        _matrix_from_json(op, f"{path}.kraus[{i}]") for i, op in enumerate(kraus_doc)
    ]
    channel = QuantumChannel(tuple(ops))
    for key, value in (("dim_in", channel.dim_in), ("dim_out", channel.dim_out)):
        if key in doc and doc[key] != value:
            raise SchemaError(
                f"declared {key}={doc[key]} but kraus operators give {value}",
                path=f"{path}.{key}",
            )
    return channel


def _decode_povm(doc: Any, path: str) -> Povm:
    elements_doc = _expect(doc, "elements", path)
    if not isinstance(elements_doc, list) or not elements_doc:
        raise SchemaError("expected a non-empty array", path=f"{path}.elements")
    return Povm(
        tuple(
            _matrix_from_json(el, f"{path}.elements[{i}]")
            for i, el in enumerate(elements_doc)
        )
    )


def _decode_density(doc: Any, path: str) -> DensityMatrix:
    return DensityMatrix(_matrix_from_json(_expect(doc, "matrix", path), f"{path}.matrix"))


def _decode_labels(doc: Any, key: str, path: str) -> list:
    labels = _expect(doc, key, path)
    if not isinstance(labels, list) or not labels:
        raise SchemaError("expected a non-empty array", path=f"{path}.{key}")
    return labels


def _decode_avqc(doc: Any, path: str) -> Avqc:
    states = _decode_labels(doc, "states", path)
    channels_doc = _expect(doc, "channels", path)
    if not isinstance(channels_doc, dict):
        raise SchemaError("expected an object", path=f"{path}.channels")
    channels = {}
    for s in states:
        key = str(s)
        if key not in channels_doc:
            raise SchemaError(f"missing channel for state {key!r}", path=f"{path}.channels")
        channels[key] = _decode_channel(channels_doc[key], f"{path}.channels.{key}")
    return Avqc(tuple(str(s) for s in states), channels)


def _decode_av_cqc(doc: Any, path: str) -> AvCqc:
    states = _decode_labels(doc, "states", path)
    alphabet = _decode_labels(doc, "alphabet", path)
    branches_doc = _expect(doc, "branches", path)
    if not isinstance(branches_doc, dict):
        raise SchemaError("expected an object", path=f"{path}.branches")
    branches = {}
    for s in states:
        key = str(s)
        if key not in branches_doc:
            raise SchemaError(f"missing branch for state {key!r}", path=f"{path}.branches")
        row = branches_doc[key]
        if not isinstance(row, list) or len(row) != len(alphabet):
            raise SchemaError(
                f"expected {len(alphabet)} output states", path=f"{path}.branches.{key}"
            )
        letters = tuple(str(x) for x in alphabet)
        outputs = {
            letters[i]: DensityMatrix(
                _matrix_from_json(row[i], f"{path}.branches.{key}[{i}]")
            )
            for i in range(len(letters))
        }
        branches[key] = CqChannel(letters, outputs)
    return AvCqc(tuple(str(s) for s in states), branches)


def _decode_classical_avc(doc: Any, path: str) -> ClassicalAvc:
    states = _decode_labels(doc, "states", path)
    kernels_doc = _expect(doc, "kernels", path)
    if not isinstance(kernels_doc, dict):
        raise SchemaError("expected an object", path=f"{path}.kernels")
    kernels = {}
    for s in states:
        key = str(s)
        if key not in kernels_doc:
            raise SchemaError(f"missing kernel for state {key!r}", path=f"{path}.kernels")
        kernels[key] = _real_matrix_from_json(kernels_doc[key], f"{path}.kernels.{key}")
    return ClassicalAvc(tuple(str(s) for s in states), kernels)


def _decode_source(doc: Any, path: str) -> BipartiteSource:
    x_alphabet = _decode_labels(doc, "x_alphabet", path)
    y_alphabet = _decode_labels(doc, "y_alphabet", path)
    joint = _real_matrix_from_json(_expect(doc, "joint", path), f"{path}.joint")
    if joint.shape != (len(x_alphabet), len(y_alphabet)):
        raise SchemaError(
            f"joint table shape {joint.shape} does not match the alphabets",
            path=f"{path}.joint",
        )
    return BipartiteSource(tuple(x_alphabet), tuple(y_alphabet), joint)


def _decode_det_code(doc: Any, path: str) -> DeterministicCode:
    l = _expect(doc, "l", path)
    if not isinstance(l, int) or l < 1:
        raise SchemaError("expected a positive integer", path=f"{path}.l")
    encoder_doc = _expect(doc, "encoder", path)
    if not isinstance(encoder_doc, list) or not encoder_doc:
        raise SchemaError("expected a non-empty array", path=f"{path}.encoder")
    encoder = tuple(
        DensityMatrix(_matrix_from_json(m, f"{path}.encoder[{i}]"))
        for i, m in enumerate(encoder_doc)
    )
    decoder = _decode_povm(_expect(doc, "decoder", path), f"{path}.decoder")
    return DeterministicCode(l, encoder, decoder)


def _decode_random_code(doc: Any, path: str) -> RandomCode:
    support_doc = _expect(doc, "support", path)
    if not isinstance(support_doc, list) or not support_doc:
        raise SchemaError("expected a non-empty array", path=f"{path}.support")
    support = tuple(
        _decode_det_code(d, f"{path}.support[{i}]") for i, d in enumerate(support_doc)
    )
    weights = _vector_from_json(_expect(doc, "weights", path), f"{path}.weights")
    return RandomCode(support, weights)


def _decode_correlated_code(doc: Any, path: str) -> CorrelatedCode:
    l = _expect(doc, "l", path)
    r = _expect(doc, "r", path)
    for key, value in (("l", l), ("r", r)):
        if not isinstance(value, int) or value < 1:
            raise SchemaError("expected a positive integer", path=f"{path}.{key}")
    source = _decode_source(_expect(doc, "source", path), f"{path}.source")
    encoders_doc = _expect(doc, "encoders", path)
    decoders_doc = _expect(doc, "decoders", path)
    if not isinstance(encoders_doc, list) or not isinstance(decoders_doc, list):
        raise SchemaError("expected arrays of entries", path=path)
    encoders = {}
    for i, entry in enumerate(encoders_doc):
        x = _expect(entry, "x", f"{path}.encoders[{i}]")
        states_doc = _expect(entry, "states", f"{path}.encoders[{i}]")
        encoders[tuple(x)] = tuple(
            DensityMatrix(_matrix_from_json(m, f"{path}.encoders[{i}].states[{j}]"))
            for j, m in enumerate(states_doc)
        )
    decoders = {}
    for i, entry in enumerate(decoders_doc):
        y = _expect(entry, "y", f"{path}.decoders[{i}]")
        decoders[tuple(y)] = _decode_povm(
            _expect(entry, "povm", f"{path}.decoders[{i}]"), f"{path}.decoders[{i}].povm"
        )
    return CorrelatedCode(l, r, source, encoders, decoders)


def _decode_probe_set(doc: Any, path: str) -> tuple:
    states_doc = _expect(doc, "states", path)
    if not isinstance(states_doc, list) or not states_doc:
        raise SchemaError("expected a non-empty array", path=f"{path}.states")
    return tuple(
        DensityMatrix(_matrix_from_json(m, f"{path}.states[{i}]"))
        for i, m in enumerate(states_doc)
    )


def probes_to_document(probes) -> dict:
    """Encode a sequence of probe density matrices as a probe_set document."""
    return {
        "kind": "probe_set",
        "states": [_matrix_to_json(p.matrix) for p in probes],
    }


_DECODERS = {
    "density_matrix": _decode_density,
    "probe_set": _decode_probe_set,
    "pure_state": lambda doc, path: PureState(
        np.array(
            [
                _as_complex(a, f"{path}.amplitudes[{i}]")
                for i, a in enumerate(_expect(doc, "amplitudes", path))
            ]
        )
    ),
    "channel": _decode_channel,
    "povm": _decode_povm,
    "avqc": _decode_avqc,
    "av_cqc": _decode_av_cqc,
    "classical_avc": _decode_classical_avc,
    "bipartite_source": _decode_source,
    "deterministic_code": _decode_det_code,
    "random_code": _decode_random_code,
    "correlated_code": _decode_correlated_code,
}


def from_document(doc: Any, path: str = "$"):
    """Decode a JSON document into the library object its kind names.

    Raises :class:`SchemaError` with the offending JSON path for structural
    problems; semantic validation errors come from the object constructors.
    """
    kind = _expect(doc, "kind", path)
    decoder = _DECODERS.get(kind)
    if decoder is None:
        raise SchemaError(
            f"unknown kind {kind!r} (expected one of {sorted(_DECODERS)})",
            path=f"{path}.kind",
        )
    return decoder(doc, path)


def dumps_document(doc: dict) -> str:
    """Serialize a document with sorted keys; floats round-trip bit-exactly."""
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def loads_document(text: str, origin: str = "<string>") -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(
            f"malformed JSON: {exc.msg}", path=f"{origin}:{exc.lineno}:{exc.colno}"
        ) from exc


def read_document(filename: str) -> Any:
    with open(filename, "r", encoding="utf-8") as handle:
        text = handle.read()
    return loads_document(text, origin=filename)


def write_document(doc: dict, filename: str) -> None:
    with open(filename, "w", encoding="utf-8") as handle:
        handle.write(dumps_document(doc))
