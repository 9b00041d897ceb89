"""Problem-file serialization.

Problems travel as a single self-describing JSON document with a fixed
field order and every real written as a 17-significant-digit decimal, so
parse(write(x)) reproduces each float64 bit-for-bit. Matrices are flat
row-major arrays; the four-index tensor is flattened with index
((u*N + v)*N + l)*N + s.
"""

import json

import numpy as np

from .exceptions import DimensionMismatch, ParseError
from .problem import ProblemInstance, validate_problem

__all__ = ["parse_problem", "write_problem", "FORMAT_NAME", "FORMAT_VERSION"]

FORMAT_NAME = "sceig-problem"
FORMAT_VERSION = 1

_VALUES_PER_LINE = 16


def _format_real(x: float) -> str:
    return format(float(x), ".17g")


def _format_array(values: np.ndarray, indent: str) -> str:
    flat = np.asarray(values, dtype=float).ravel(order="C")
    lines = []
    for start in range(0, flat.size, _VALUES_PER_LINE):
        chunk = ", ".join(_format_real(v) for v in flat[start : start + _VALUES_PER_LINE])
        lines.append(indent + chunk)
    body = ",\n".join(lines) if lines else ""
    return "[\n" + body + "\n" + indent[:-2] + "]" if lines else "[]"


def write_problem(instance: ProblemInstance) -> bytes:
    """Canonical serialization of a validated instance."""
    instance = validate_problem(instance)
    parts = ["{"]
    parts.append(f'  "format": {json.dumps(FORMAT_NAME)},')
    parts.append(f'  "version": {FORMAT_VERSION},')
    if instance.label is not None:
        parts.append(f'  "label": {json.dumps(instance.label)},')
    parts.append(f'  "n_basis": {instance.n_basis},')
    parts.append(f'  "k": {instance.k},')
    parts.append(f'  "nuclear_repulsion": {_format_real(instance.nuclear_repulsion)},')
    if instance.reference_energy is not None:
        parts.append(f'  "reference_energy": {_format_real(instance.reference_energy)},')
    parts.append(f'  "s": {_format_array(instance.overlap, "    ")},')
    parts.append(f'  "h": {_format_array(instance.core_hamiltonian, "    ")},')
    parts.append(f'  "eri": {_format_array(instance.eri, "    ")}')
    parts.append("}")
    return ("\n".join(parts) + "\n").encode("ascii")


def parse_problem(data: bytes | str) -> ProblemInstance:
    """Parse and validate a problem document."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid problem document at line {exc.lineno}, "
                         f"column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ParseError("problem document must be a JSON object")
    if doc.get("format") != FORMAT_NAME:
        raise ParseError(f"unrecognized document format {doc.get('format')!r}")
    if doc.get("version") != FORMAT_VERSION:
        raise ParseError(f"unrecognized format version {doc.get('version')!r}")
    for key in ("n_basis", "k", "s", "h", "eri"):
        if key not in doc:
            raise ParseError(f"missing required field {key!r}")
    try:
        n = int(doc["n_basis"])
        k = int(doc["k"])
    except (TypeError, ValueError) as exc:
        raise ParseError(f"n_basis and k must be integers: {exc}") from exc

    def load_array(key: str, length: int, shape: tuple) -> np.ndarray:
        raw = doc[key]
        if not isinstance(raw, list):
            raise ParseError(f"field {key!r} must be an array of reals")
        if len(raw) != length:
            raise DimensionMismatch(key, length, len(raw))
        return np.asarray(raw, dtype=float).reshape(shape, order="C")

    s = load_array("s", n * n, (n, n))
    h = load_array("h", n * n, (n, n))
    eri = load_array("eri", n**4, (n, n, n, n))
    ref = doc.get("reference_energy")
    return validate_problem(
        ProblemInstance(
            n_basis=n,
            k=k,
            overlap=s,
            core_hamiltonian=h,
            eri=eri,
            nuclear_repulsion=float(doc.get("nuclear_repulsion", 0.0)),
            reference_energy=None if ref is None else float(ref),
            label=doc.get("label"),
        )
    )
