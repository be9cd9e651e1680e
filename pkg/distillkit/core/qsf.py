"""
qsf-1 Codec

Reads and writes BipartiteState as qsf-1 JSON. Floats are written with
Python's shortest round-trip repr (17 significant digits at most), so a
dump followed by a load reproduces the matrix bit for bit.
"""

import json
from pathlib import Path
from typing import Optional, Union

import numpy as np
from pydantic import ValidationError

from ..errors import FormatError
from ..models.qsf import FactorDocument, QSFDocument
from ..models.settings import TolerancePolicy
from .state import BipartiteState, BlockFactor, decode_matrix, encode_matrix


def load_state(data: Union[bytes, str], normalize: bool = False,
               pol: Optional[TolerancePolicy] = None) -> BipartiteState:
    """
    Parse a qsf-1 document

    Args:
        data: UTF-8 bytes or text of the document
        normalize: Scale the matrix to unit trace
        pol: Tolerance policy for validation

    Returns:
        Validated BipartiteState

    Raises:
        FormatError: Malformed JSON, schema violation or dimension mismatch
        PSDViolationError: Matrix negative beyond tolerance
    """
    if isinstance(data, bytes):
        try:
            data = data.decode('utf-8')
        except UnicodeDecodeError as e:
            raise FormatError(f"qsf-1 input is not UTF-8: {e}")
    try:
        raw = json.loads(data)
    except json.JSONDecodeError as e:
        raise FormatError(f"qsf-1 input is not valid JSON: {e}")
    if not isinstance(raw, dict):
        raise FormatError("qsf-1 root must be a JSON object")
    try:
        doc = QSFDocument(**raw)
    except ValidationError as e:
        first = e.errors()[0]
        loc = ".".join(str(p) for p in first['loc']) or "<root>"
        raise FormatError(f"qsf-1 field {loc}: {first['msg']}")

    d = doc.dimA * doc.dimB
    pairs = np.asarray(doc.matrix, dtype=float)
    mat = (pairs[:, 0] + 1j * pairs[:, 1]).reshape(d, d)

    factor = None
    if doc.factor is not None:
        r = doc.factor.R
        blocks = tuple(decode_matrix(b) if r else np.zeros((0, doc.dimB), dtype=complex)
                       for b in doc.factor.blocks)
        factor = BlockFactor(blocks)

    state = BipartiteState(mat, doc.dimA, doc.dimB, pol, normalize=normalize, factor=factor, meta=doc.meta)
    if factor is not None:
        residual = np.linalg.norm(factor.reconstruct() - state.mat)
        if residual > max(state.pol.zero_atol, 1e-9) * max(1.0, state.norm) * 10:
            raise FormatError(f"Attached factor does not reconstruct the matrix (residual {residual:.3e})")
    return state


def dump_state(state: BipartiteState, include_factor: bool = False) -> str:
    """Serialize to qsf-1 JSON text (deterministic key order)"""
    doc = QSFDocument(
        dimA=state.dim_a,
        dimB=state.dim_b,
        matrix=[[float(z.real), float(z.imag)] for z in state.mat.ravel()],
        factor=FactorDocument(**state.factor.to_dict()) if include_factor and state.factor is not None else None,
        meta=state.meta,
    )
    return json.dumps(doc.model_dump(exclude_none=True), sort_keys=True, default=_json_default)


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return encode_matrix(obj) if obj.ndim == 2 else obj.tolist()
    raise TypeError(f"Object of type {type(obj).__name__} is not JSON serializable")


def read_state_file(path: Union[str, Path], normalize: bool = False,
                    pol: Optional[TolerancePolicy] = None) -> BipartiteState:
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise FormatError(f"Cannot read {path}: {e}")
    return load_state(data, normalize=normalize, pol=pol)


def write_state_file(state: BipartiteState, path: Union[str, Path], include_factor: bool = False) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_state(state, include_factor) + "\n")
    return path
