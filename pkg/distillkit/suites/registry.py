"""
Suite Registry

Named verification suites run by `distillkit verify`. Each suite generates
seeded fixtures, checks one family of properties on every fixture and
records the outcome in a SuiteResult. Any failed check makes run_suite
raise SuiteFailure carrying the summary.

Usage:
    @register("two-by-n", "exact 2 x n distillation", default_trials=100)
    def two_by_n(result, settings):
        ...

    summary = run_suite("two-by-n", trials=10, seed=7)
"""

import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

import structlog

from ..core import numkernel as nk
from ..core.state import BipartiteState
from ..errors import DistillError, InputError, SuiteFailure
from ..generators.families import gen_random
from ..models.settings import Settings
from ..analysis.witness import is_npt

logger = structlog.get_logger(__name__)

ALL_SUITES = "all"
NPT_RESAMPLES = 20


@dataclass
class SuiteResult:
    """Counters and failure records of one suite run"""
    name: str
    trials: int
    seed: int
    checks: int = 0
    passed: int = 0
    failures: List[Dict[str, Any]] = field(default_factory=list)
    skipped: Dict[str, int] = field(default_factory=dict)
    stats: Dict[str, Any] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures

    def check(self, condition: bool, label: str, **details) -> bool:
        """Record one property check"""
        self.checks += 1
        if condition:
            self.passed += 1
        else:
            self.failures.append({"check": label, **details})
            logger.warning("suite.check_failed", suite=self.name, check=label, **details)
        return bool(condition)

    def error(self, trial: int, error: DistillError):
        self.checks += 1
        self.failures.append({"check": "exception", "trial": trial,
                              "type": type(error).__name__, "message": str(error)})
        logger.warning("suite.trial_error", suite=self.name, trial=trial, error=str(error))

    def skip(self, reason: str):
        self.skipped[reason] = self.skipped.get(reason, 0) + 1

    def worst(self, key: str, value: Optional[float], largest: bool = True):
        """Keep the worst observed value of a metric"""
        if value is None:
            return
        current = self.stats.get(key)
        if current is None or (value > current if largest else value < current):
            self.stats[key] = float(value)

    def count(self, key: str, amount: int = 1):
        self.stats[key] = self.stats.get(key, 0) + amount

    def to_dict(self) -> Dict[str, Any]:
        return {
            "suite": self.name,
            "ok": self.ok,
            "trials": self.trials,
            "seed": self.seed,
            "checks": self.checks,
            "passed": self.passed,
            "failed": len(self.failures),
            "failures": self.failures,
            "skipped": dict(sorted(self.skipped.items())),
            "stats": dict(sorted(self.stats.items())),
        }


@dataclass(frozen=True)
class SuiteInfo:
    name: str
    description: str
    default_trials: int
    runner: Callable[[SuiteResult, Settings], None]


SUITES: Dict[str, SuiteInfo] = {}


def register(name: str, description: str, default_trials: int):
    """Decorator adding a suite runner to the registry"""
    def wrap(fn: Callable[[SuiteResult, Settings], None]):
        SUITES[name] = SuiteInfo(name, description, default_trials, fn)
        return fn
    return wrap


def trial_seed(seed: int, trial: int) -> int:
    """Independent generator seed for one trial of a suite"""
    return int(nk.rng_for(seed, trial).integers(2 ** 31))


def sample_npt_random(dim_a: int, dim_b: int, rank: int, seed: int,
                      settings: Settings) -> Optional[BipartiteState]:
    """gen_random resampled until NPT, or None"""
    for k in range(NPT_RESAMPLES):
        rho = gen_random(dim_a, dim_b, rank, trial_seed(seed, k), settings.tolerance)
        if is_npt(rho)[0]:
            return rho
    return None


def _run_one(info: SuiteInfo, trials: Optional[int], seed: int, settings: Settings) -> SuiteResult:
    result = SuiteResult(info.name, trials if trials is not None else info.default_trials, seed)
    started = time.perf_counter()
    info.runner(result, settings)
    logger.info("suite.finished", suite=info.name, checks=result.checks, failed=len(result.failures),
                elapsed_seconds=round(time.perf_counter() - started, 3))
    return result


def run_suite(name: str, trials: Optional[int] = None, seed: int = 0,
              settings: Optional[Settings] = None) -> Dict[str, Any]:
    """
    Run one suite, or every suite for name 'all'

    Returns:
        Summary dict (deterministic for identical arguments)

    Raises:
        InputError: Unknown suite name
        SuiteFailure: Any property check failed
    """
    settings = settings or Settings()
    if name == ALL_SUITES:
        results = [_run_one(info, trials, seed, settings) for info in SUITES.values()]
        summary = {
            "suite": ALL_SUITES,
            "ok": all(r.ok for r in results),
            "results": [r.to_dict() for r in results],
        }
    elif name in SUITES:
        result = _run_one(SUITES[name], trials, seed, settings)
        summary = result.to_dict()
    else:
        raise InputError(f"Unknown suite '{name}', expected one of {sorted(SUITES) + [ALL_SUITES]}")

    if not summary["ok"]:
        raise SuiteFailure(f"Suite '{name}' recorded property violations", summary)
    return summary
