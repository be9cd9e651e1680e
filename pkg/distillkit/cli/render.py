"""
Report Rendering

JSON serialization of reports (stable key order, numpy scalars unwrapped)
and the --human text view rendered from a Jinja2 template.
"""

import json
from pathlib import Path
from typing import Any, Dict

import numpy as np
from jinja2 import Environment, FileSystemLoader, TemplateError

from ..core.state import encode_matrix
from ..errors import ContractViolation

TEMPLATE_DIR = Path(__file__).parent / "templates"
HUMAN_TEMPLATE = "report.txt.j2"


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return encode_matrix(obj) if obj.ndim == 2 else [[float(z.real), float(z.imag)] for z in obj]
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    raise TypeError(f"Object of type {type(obj).__name__} is not JSON serializable")


def to_json(document: Dict[str, Any]) -> str:
    return json.dumps(document, sort_keys=True, indent=2, default=_json_default)


def to_plain(document: Dict[str, Any]) -> Dict[str, Any]:
    """Round-trip through JSON so templates only see plain values"""
    return json.loads(to_json(document))


_env = Environment(
    loader=FileSystemLoader(str(TEMPLATE_DIR)),
    autoescape=False,
    trim_blocks=True,
    lstrip_blocks=True,
)


def render_human(document: Dict[str, Any]) -> str:
    """
    Raises:
        ContractViolation: If the template fails to render
    """
    try:
        return _env.get_template(HUMAN_TEMPLATE).render(report=to_plain(document))
    except TemplateError as e:
        raise ContractViolation(f"Cannot render human report: {e}")
