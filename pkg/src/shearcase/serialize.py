"""Deterministic JSON/CSV serialization and input schemas.

All floating-point numbers are written as decimals with 17 significant
digits, which round-trips IEEE doubles exactly and keeps re-runs
byte-identical.  Input documents are validated against strict jsonschema
schemas (unknown keys rejected).
"""

from __future__ import annotations

import hashlib
import json
import math

import jsonschema
import numpy as np

from .errors import ConfigError
from .torus_dynamics.fourier import FourierField, FourierTerm, TimeField
from .torus_dynamics.shearing import ProgramStep, ShearingMap, ShearingProfile, ShearingProgram


def format_float(x):
    """Decimal text with 17 significant digits; integers keep a trailing .0."""
    if math.isnan(x) or math.isinf(x):
        raise ValueError("non-finite float in output document")
    text = format(float(x), ".17g")
    if "e" not in text and "." not in text:
        text += ".0"
    return text


def dumps(obj, indent=0):
    """Deterministic JSON text: insertion-ordered keys, 17-digit floats."""
    pieces = []
    _write_json(obj, pieces, indent, 0)
    return "".join(pieces) + "\n"


def _write_json(obj, out, indent, level):
    pad = " " * (indent * (level + 1)) if indent else ""
    closepad = " " * (indent * level) if indent else ""
    nl = "\n" if indent else ""
    sep = "," + nl
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{" + nl)
        for i, (k, v) in enumerate(obj.items()):
            if not isinstance(k, str):
                raise TypeError(f"JSON keys must be strings, got {k!r}")
            out.append(pad + json.dumps(k) + ": ")
            _write_json(v, out, indent, level + 1)
            if i != len(obj) - 1:
                out.append(sep)
            else:
                out.append(nl)
        out.append(closepad + "}")
    elif isinstance(obj, (list, tuple)):
        seq = list(obj)
        if not seq:
            out.append("[]")
            return
        out.append("[" + nl)
        for i, v in enumerate(seq):
            out.append(pad)
            _write_json(v, out, indent, level + 1)
            if i != len(seq) - 1:
                out.append(sep)
            else:
                out.append(nl)
        out.append(closepad + "]")
    elif isinstance(obj, (bool, np.bool_)) or obj is None:
        out.append(json.dumps(bool(obj) if obj is not None else None))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(format_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, np.ndarray):
        _write_json(obj.tolist(), out, indent, level)
    else:
        raise TypeError(f"cannot serialize {type(obj)}")


def write_json(path, obj, indent=1):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj, indent=indent))


def read_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def write_csv(path, header, rows):
    """Plain CSV with 17-digit floats; no quoting is ever needed for our data."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            cells = []
            for cell in row:
                if isinstance(cell, (float, np.floating)):
                    cells.append(format_float(float(cell)))
                elif isinstance(cell, (int, np.integer)):
                    cells.append(str(int(cell)))
                else:
                    cells.append(str(cell))
            fh.write(",".join(cells) + "\n")


def sha256_of_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def validate(document, schema, what="document"):
    try:
        jsonschema.validate(document, schema)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid {what}: {exc.message}") from exc


# ---------------------------------------------------------------------------
# schemas

FOURIER_FIELD_SCHEMA = {
    "type": "object",
    "properties": {
        "type": {"const": "fourier"},
        "equivariant": {"type": "boolean"},
        "constant": {"type": "array", "items": {"type": "number"},
                     "minItems": 2, "maxItems": 2},
        "terms": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "k": {"type": "array", "items": {"type": "integer"},
                          "minItems": 2, "maxItems": 2},
                    "u_sin": {"type": "array", "items": {"type": "number"},
                              "minItems": 2, "maxItems": 2},
                    "u_cos": {"type": "array", "items": {"type": "number"},
                              "minItems": 2, "maxItems": 2},
                },
                "required": ["k", "u_sin"],
                "additionalProperties": False,
            },
        },
    },
    "required": ["type", "terms"],
    "additionalProperties": False,
}

TIME_FIELD_SCHEMA = {
    "oneOf": [
        FOURIER_FIELD_SCHEMA,
        {
            "type": "object",
            "properties": {
                "type": {"const": "blend"},
                "start": FOURIER_FIELD_SCHEMA,
                "end": FOURIER_FIELD_SCHEMA,
            },
            "required": ["type", "start", "end"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "type": {"const": "grid"},
                "times": {"type": "array", "items": {"type": "number"}, "minItems": 2},
                "samples": {"type": "array"},
                "equivariant": {"type": "boolean"},
            },
            "required": ["type", "times", "samples"],
            "additionalProperties": False,
        },
    ]
}

KNOT_SPEC_SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["unknot", "torus", "custom"]},
        "p": {"type": "integer"},
        "q": {"type": "integer"},
        "generators": {"type": "integer", "minimum": 1},
        "relators": {"type": "array", "items": {"type": "array",
                                                "items": {"type": "integer"}}},
        "meridian": {"type": "array", "items": {"type": "integer"}},
        "longitude": {"type": "array", "items": {"type": "integer"}},
    },
    "required": ["kind"],
    "additionalProperties": False,
}

PRESENTATION_SCHEMA = {
    "type": "object",
    "properties": {
        "generators": {"type": "integer", "minimum": 1},
        "relators": {"type": "array",
                     "items": {"type": "array", "items": {"type": "integer"}}},
        "name": {"type": "string"},
    },
    "required": ["generators", "relators"],
    "additionalProperties": False,
}

CERTIFICATE_SCHEMA = {
    "type": "object",
    "properties": {
        "presentation_id": {"type": "string"},
        "p": {"type": "string", "pattern": "^[0-9]+$"},
        "images": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "integer"},
                      "minItems": 4, "maxItems": 4},
        },
    },
    "required": ["presentation_id", "p", "images"],
    "additionalProperties": False,
}

PROGRAM_SCHEMA = {
    "type": "object",
    "properties": {
        "steps": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "v": {"type": "array", "items": {"type": "integer"},
                          "minItems": 2, "maxItems": 2},
                    "w": {"type": "array", "items": {"type": "integer"},
                          "minItems": 2, "maxItems": 2},
                    "sine": {"type": "array",
                             "items": {"type": "array", "minItems": 2, "maxItems": 2}},
                    "cosine": {"type": "array",
                               "items": {"type": "array", "minItems": 2, "maxItems": 2}},
                    "duration": {"type": "number"},
                    "speed": {"type": "number"},
                },
                "required": ["v", "w", "sine", "cosine", "duration", "speed"],
                "additionalProperties": False,
            },
        },
        "schedule": {"type": "array", "items": {"type": "number"}},
    },
    "required": ["steps", "schedule"],
    "additionalProperties": False,
}


# ---------------------------------------------------------------------------
# converters

def fourier_field_from_json(doc) -> FourierField:
    validate(doc, FOURIER_FIELD_SCHEMA, "fourier field")
    terms = tuple(
        FourierTerm(tuple(t["k"]), tuple(t["u_sin"]),
                    tuple(t.get("u_cos", (0.0, 0.0))))
        for t in doc["terms"]
    )
    return FourierField(terms, tuple(doc.get("constant", (0.0, 0.0))),
                        bool(doc.get("equivariant", False)))


def fourier_field_to_json(field: FourierField):
    return {
        "type": "fourier",
        "equivariant": field.equivariant,
        "constant": list(field.constant),
        "terms": [
            {"k": list(t.k), "u_sin": list(t.u_sin), "u_cos": list(t.u_cos)}
            for t in field.terms
        ],
    }


def time_field_from_json(doc, grid_n=64) -> TimeField:
    validate(doc, TIME_FIELD_SCHEMA, "time field")
    kind = doc["type"]
    if kind == "fourier":
        return TimeField.from_fourier(fourier_field_from_json(doc), grid_n=grid_n)
    if kind == "blend":
        return TimeField.blend(fourier_field_from_json(doc["start"]),
                               fourier_field_from_json(doc["end"]), grid_n=grid_n)
    times = np.asarray(doc["times"], dtype=float)
    samples = np.asarray(doc["samples"], dtype=float)
    if samples.shape[0] != len(times) or samples.shape[-1] != 2:
        raise ConfigError("grid samples must have shape (times, n, n, 2)")
    n = samples.shape[1]

    def evaluator(t, pts):
        # linear interpolation in t of the sampled frames, nearest-grid lookup
        idx = np.searchsorted(times, t, side="right") - 1
        idx = np.clip(idx, 0, len(times) - 2)
        w = (t - times[idx]) / (times[idx + 1] - times[idx])
        frame = (1 - w) * samples[idx] + w * samples[idx + 1]
        ii = np.mod(np.rint(np.asarray(pts)[..., 0] / (2 * np.pi / n)).astype(int), n)
        jj = np.mod(np.rint(np.asarray(pts)[..., 1] / (2 * np.pi / n)).astype(int), n)
        return frame[ii, jj]

    return TimeField(evaluator, grid_n=n, equivariant=bool(doc.get("equivariant", False)))


def program_to_json(program: ShearingProgram):
    return {
        "steps": [
            {
                "v": list(step.mapping.v),
                "w": list(step.mapping.w),
                "sine": [[m, c] for m, c in step.mapping.profile.sine],
                "cosine": [[m, c] for m, c in step.mapping.profile.cosine],
                "duration": step.duration,
                "speed": step.speed,
            }
            for step in program.steps
        ],
        "schedule": list(program.schedule),
    }


def program_from_json(doc) -> ShearingProgram:
    validate(doc, PROGRAM_SCHEMA, "shearing program")
    steps = [
        ProgramStep(
            ShearingMap(
                tuple(s["v"]), tuple(s["w"]),
                ShearingProfile(
                    sine=tuple((int(m), float(c)) for m, c in s["sine"]),
                    cosine=tuple((int(m), float(c)) for m, c in s["cosine"]),
                ),
            ),
            float(s["duration"]),
            float(s["speed"]),
        )
        for s in doc["steps"]
    ]
    return ShearingProgram(steps, schedule=np.asarray(doc["schedule"], dtype=float))


def certificate_to_json(cert):
    return {
        "presentation_id": cert.presentation_id,
        "p": str(cert.p),
        "images": [list(entries) for entries in cert.images],
    }


def certificate_from_json(doc):
    from .cert import Certificate

    validate(doc, CERTIFICATE_SCHEMA, "certificate")
    return Certificate(doc["presentation_id"], int(doc["p"]),
                       tuple(tuple(int(x) for x in e) for e in doc["images"]))


def presentation_from_json(doc):
    from .cert import GroupPresentation

    validate(doc, PRESENTATION_SCHEMA, "presentation")
    return GroupPresentation(int(doc["generators"]),
                             tuple(tuple(r) for r in doc["relators"]),
                             doc.get("name", ""))


def knot_spec_from_json(doc):
    from .knot_reps import KnotSpec

    validate(doc, KNOT_SPEC_SCHEMA, "knot spec")
    kind = doc["kind"]
    if kind == "unknot":
        return KnotSpec.unknot()
    if kind == "torus":
        if "p" not in doc or "q" not in doc:
            raise ConfigError("torus knot spec needs p and q")
        return KnotSpec.torus(doc["p"], doc["q"])
    for key in ("generators", "relators", "meridian", "longitude"):
        if key not in doc:
            raise ConfigError(f"custom knot spec needs {key}")
    return KnotSpec.custom(doc["generators"], doc["relators"],
                           doc["meridian"], doc["longitude"])


def rep_assignment_to_json(assignment):
    return {
        "images": [list(q) for q in assignment.images],
        "residual": assignment.residual,
        "alpha": assignment.alpha,
        "beta": assignment.beta,
        "irreducible": assignment.is_irreducible(),
    }
