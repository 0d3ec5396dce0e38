"""
JSON codecs for complex numbers, matrices and reports
Complex numbers travel as [re, im]; matrices as row-major nested lists
"""

import json
from dataclasses import asdict, is_dataclass
from enum import Enum

import numpy as np

from errors import InvalidInput
from run_config import SCHEMA


def encode_complex(z):
    z = complex(z)
    return [z.real, z.imag]


def decode_complex(obj):
    """Accept a plain number or an [re, im] pair"""
    if isinstance(obj, bool):
        raise InvalidInput(f"expected a number, got {obj!r}")
    if isinstance(obj, (int, float)):
        return complex(obj)
    if isinstance(obj, (list, tuple)) and len(obj) == 2 and all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in obj):
        return complex(obj[0], obj[1])
    raise InvalidInput(f"expected a number or [re, im] pair, got {obj!r}")


def encode_vector(v):
    return [encode_complex(x) for x in np.asarray(v).ravel()]


def decode_vector(obj):
    if not isinstance(obj, list):
        raise InvalidInput("expected a list of numbers")
    return np.array([decode_complex(x) for x in obj], dtype=complex)


def encode_matrix(A):
    A = np.asarray(A, dtype=complex)
    return [[encode_complex(x) for x in row] for row in A]


def decode_matrix(obj, name="matrix"):
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise InvalidInput(f"{name} must be a non-empty list of rows")
    width = len(obj[0])
    if width == 0 or any(len(r) != width for r in obj):
        raise InvalidInput(f"{name} rows must be non-empty and of equal length")
    return np.array([[decode_complex(x) for x in row] for row in obj], dtype=complex)


def to_jsonable(obj):
    """Recursively convert numpy, complex, Enum and dataclass values"""
    if isinstance(obj, Enum):
        return obj.value
    if is_dataclass(obj) and not isinstance(obj, type):
        return to_jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            if obj.ndim == 2:
                return encode_matrix(obj)
            return encode_vector(obj)
        return obj.tolist()
    if isinstance(obj, (complex, np.complexfloating)):
        return encode_complex(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        value = float(obj)
        return value if np.isfinite(value) else None
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def dumps(payload):
    """Serialize a report with the schema tag first; deterministic key order"""
    body = {"schema": SCHEMA}
    body.update(to_jsonable(payload))
    return json.dumps(body, indent=2, sort_keys=False, allow_nan=False)


def write_report(payload, path=None):
    text = dumps(payload)
    if path is None:
        print(text)
    else:
        with open(path, "w", encoding="utf-8") as f:
            f.write(text + "\n")
    return text


def load(path):
    """
    Read a JSON input file, checking the schema tag when present

    Raises:
        InvalidInput: unreadable file, malformed JSON or a foreign schema
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except OSError as e:
        raise InvalidInput(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise InvalidInput(f"malformed JSON in {path}: {e}") from e
    if isinstance(data, dict) and "schema" in data and data["schema"] != SCHEMA:
        raise InvalidInput(f"unsupported schema {data['schema']!r}, expected {SCHEMA!r}")
    return data


def matrix_from_input(data, key="matrix"):
    """A matrix given either bare or under `key` in an object"""
    if isinstance(data, dict):
        if key not in data:
            raise InvalidInput(f"input object has no {key!r} field")
        data = data[key]
    return decode_matrix(data, key)
