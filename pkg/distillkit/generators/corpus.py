"""
Fixture Corpus

Family registry used by `distillkit generate` and the writer for the fixture
corpus layout corpus/<family>/<params>-<seed>.qsf.json plus a per-family
labels.json. Labels are re-computed by the analysis modules and compared with
the generator's ground truth before anything is written.
"""

import json
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Tuple

import structlog

from ..core.qsf import write_state_file
from ..core.state import BipartiteState
from ..errors import ContractViolation, GenerationError, InputError
from ..models.settings import TolerancePolicy
from ..analysis.schmidt import schmidt_rank
from ..analysis.structure import is_b_irreducible
from ..analysis.witness import is_npt
from .families import gen_b_reducible, gen_ppt_rank_n, gen_random, gen_schmidt_rank
from .templates import gen_b_irreducible_template

logger = structlog.get_logger(__name__)

LABELS_FILE = "labels.json"


def _random(params, seed, pol):
    return gen_random(params["M"], params["N"], params["rank"], seed, pol)


def _schmidt(params, seed, pol):
    return gen_schmidt_rank(params["M"], params["N"], params["sr"], seed,
                            npt_wanted=params.get("npt"), pol=pol)


def _reducible(params, seed, pol):
    first = gen_random(params["M"], params["N1"], params.get("rank", 1), seed, pol)
    second = gen_random(params["M"], params["N2"], params.get("rank", 1), seed + 1, pol)
    state = gen_b_reducible(first, second, params.get("weight", 0.5))
    state.meta["seed"] = seed
    return state


def _template(params, seed, pol):
    return gen_b_irreducible_template(None, params["M"], params["N"], seed,
                                      kind=params.get("kind", "irreducible"),
                                      zero_column=bool(params.get("zero_column", False)), pol=pol)


def _ppt_rank_n(params, seed, pol):
    return gen_ppt_rank_n(params["M"], params["N"], seed, pol)


# family -> (builder, required parameters)
FAMILIES: Dict[str, Tuple[Callable[..., BipartiteState], Tuple[str, ...]]] = {
    "random": (_random, ("M", "N", "rank")),
    "schmidt-rank": (_schmidt, ("M", "N", "sr")),
    "b-reducible": (_reducible, ("M", "N1", "N2")),
    "b-irreducible-template": (_template, ("M", "N")),
    "ppt-rank-n": (_ppt_rank_n, ("M", "N")),
}


def generate(family: str, params: Dict[str, Any], seed: int,
             pol: Optional[TolerancePolicy] = None) -> BipartiteState:
    """
    Raises:
        InputError: unknown family or missing parameter
    """
    if family not in FAMILIES:
        raise InputError(f"Unknown family '{family}', expected one of {sorted(FAMILIES)}")
    builder, required = FAMILIES[family]
    missing = [p for p in required if params.get(p) is None]
    if missing:
        raise InputError(f"Family '{family}' needs parameters {missing}")
    return builder(params, seed, pol)


def verify_labels(state: BipartiteState) -> Dict[str, Any]:
    """
    Re-derive the labels of a generated state and compare with its meta

    Raises:
        GenerationError: a recorded label disagrees with the analysis
    """
    irreducible, _ = is_b_irreducible(state)
    measured = {
        "rank": state.rank,
        "local_ranks": list(state.local_ranks),
        "schmidt_rank": schmidt_rank(state),
        "npt": bool(is_npt(state)[0]),
        "b_irreducible": bool(irreducible),
    }
    mismatches = {
        key: {"recorded": state.meta[key], "measured": value}
        for key, value in measured.items()
        if key in state.meta and _normalize(state.meta[key]) != _normalize(value)
    }
    if mismatches:
        logger.error("corpus.label_mismatch", family=state.meta.get("family"), mismatches=mismatches)
        raise GenerationError(f"Generated labels disagree with analysis: {mismatches}")
    return {**state.meta, **measured}


def _normalize(value):
    return list(value) if isinstance(value, tuple) else value


def fixture_name(params: Dict[str, Any], seed: int) -> str:
    parts = [f"{key}{params[key]}" for key in sorted(params) if params[key] is not None]
    return f"{'-'.join(parts)}-{seed}.qsf.json" if parts else f"{seed}.qsf.json"


def write_fixture(state: BipartiteState, family: str, params: Dict[str, Any], seed: int,
                  out_dir) -> Path:
    """
    Write one verified fixture and merge its labels into labels.json

    Returns:
        Path of the written qsf-1 file
    """
    if family not in FAMILIES:
        raise ContractViolation(f"Unknown family '{family}'")
    labels = verify_labels(state)
    family_dir = Path(out_dir) / family
    path = write_state_file(state, family_dir / fixture_name(params, seed),
                            include_factor=state.factor is not None)

    labels_path = family_dir / LABELS_FILE
    existing: Dict[str, Any] = {}
    if labels_path.exists():
        try:
            existing = json.loads(labels_path.read_text())
        except json.JSONDecodeError:
            logger.warning("corpus.labels_unreadable", path=str(labels_path))
    existing[path.name] = labels
    labels_path.write_text(json.dumps(existing, sort_keys=True, indent=2) + "\n")

    logger.info("corpus.fixture_written", family=family, path=str(path))
    return path
