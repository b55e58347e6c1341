import json
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np


class EnumerationBudgetError(ValueError):
    """Exact enumeration (subsets, maximum paths) requested beyond its size cap."""


class ConfigError(ValueError):
    """Invalid experiment configuration, raised before any run starts."""


@dataclass
class DegreeProfile:
    # δ and Δ are taken on the simplified graph
    min_degree: int = 0
    max_degree: int = 0
    degrees: np.ndarray = field(default_factory=lambda: np.zeros(1, dtype=np.int64))
    simple_degrees: np.ndarray = field(default_factory=lambda: np.zeros(1, dtype=np.int64))


@dataclass
class VisitStats:
    horizon: int = 0
    mu: np.ndarray = field(default_factory=lambda: np.zeros(1, dtype=np.int64))
    nu: np.ndarray = field(default_factory=lambda: np.zeros(1, dtype=np.int64))
    # -1 marks "not visited within the horizon"
    first_visit_time: np.ndarray = field(default_factory=lambda: np.zeros(1, dtype=np.int64))
    kth_visit_time: Dict[int, np.ndarray] = field(default_factory=lambda: {})

    def __post_init__(self):
        self.n = len(self.mu) - 1


@dataclass
class HittingRecord:
    """Hitting times of the monotone trace properties of one walk.

    Lists are 1-based through the accessor methods: ``tau_C(k)`` for
    k = 1..K and ``tau_delta(m)``, ``tau_kappa(m)`` for m = 1..2K. Absent
    values (walk too short) are None.
    """

    n: int = 0
    K: int = 1
    length: int = 0
    cover: List[Optional[int]] = field(default_factory=lambda: [])
    min_degree: List[Optional[int]] = field(default_factory=lambda: [])
    connectivity: List[Optional[int]] = field(default_factory=lambda: [])
    tau_H: Optional[int] = None
    tau_PM: Optional[int] = None
    tau_H_exact: bool = True
    max_multiplicity: int = 0
    audits: Dict[str, Any] = field(default_factory=lambda: {})

    def tau_C(self, k: int = 1) -> Optional[int]:
        return self.cover[k - 1]

    def tau_delta(self, m: int) -> Optional[int]:
        return self.min_degree[m - 1]

    def tau_kappa(self, m: int) -> Optional[int]:
        return self.connectivity[m - 1]

    def violations(self) -> List[str]:
        """Deterministic inequalities that fail on this record (should always be empty)."""
        bad = []

        def ge(a, b, label):
            if a is not None and b is not None and a < b:
                bad.append(f"{label}: {a} < {b}")

        for k in range(1, self.K + 1):
            C = self.tau_C(k)
            ge(self.tau_delta(2 * k - 1), C, f"tau_delta({2 * k - 1}) >= tau_C({k})")
            ge(self.tau_delta(2 * k), None if C is None else C + 1, f"tau_delta({2 * k}) >= tau_C({k})+1")
        for m in range(1, 2 * self.K + 1):
            ge(self.tau_kappa(m), self.tau_delta(m), f"tau_kappa({m}) >= tau_delta({m})")
        if self.n >= 3:
            ge(self.tau_H, self.tau_delta(2), "tau_H >= tau_delta(2)")
        ge(self.tau_PM, self.tau_delta(1), "tau_PM >= tau_delta(1)")
        return bad

    def to_dict(self) -> Dict[str, Any]:
        d = asdict(self)
        d["audits"] = dict(self.audits)
        return d


@dataclass
class PropertyCheck:
    name: str = ""
    passed: bool = True
    # exact: the verdict is a proof; otherwise sampled and one-sided ("no violation found")
    exact: bool = True
    statistic: Optional[float] = None
    threshold: Optional[float] = None
    witness: Any = None
    samples: int = 0
    note: str = ""

    def to_dict(self) -> Dict[str, Any]:
        d = asdict(self)
        if isinstance(self.witness, (set, frozenset)):
            d["witness"] = sorted(self.witness)
        elif isinstance(self.witness, tuple) and all(isinstance(x, (set, frozenset)) for x in self.witness):
            d["witness"] = [sorted(x) for x in self.witness]
        return d


@dataclass
class AuditReport:
    checks: Dict[str, PropertyCheck] = field(default_factory=lambda: {})

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def add(self, check: PropertyCheck) -> PropertyCheck:
        self.checks[check.name] = check
        return check

    def merge(self, other: "AuditReport", prefix: str = "") -> "AuditReport":
        for name, c in other.checks.items():
            self.checks[prefix + name] = c
        return self

    def failed(self) -> List[str]:
        return [name for name, c in self.checks.items() if not c.passed]

    def __getitem__(self, name: str) -> PropertyCheck:
        return self.checks[name]

    def __contains__(self, name: str) -> bool:
        return name in self.checks

    def to_dict(self) -> Dict[str, Any]:
        return {name: c.to_dict() for name, c in self.checks.items()}


@dataclass
class ExpanderCert:
    R: int = 0
    c: float = 0.0
    mode: str = "exact"
    passed: bool = True
    witness: Optional[frozenset] = None
    sets_checked: int = 0

    @property
    def exact(self) -> bool:
        return self.mode == "exact"


@dataclass
class HamiltonVerdict:
    hamiltonian: bool = False
    cycle: Optional[List[int]] = None
    # False when the heuristic failed beyond the exact cap ("unknown treated as false")
    exact: bool = True

    def __bool__(self) -> bool:
        return self.hamiltonian


@dataclass
class CompletionResult:
    success: bool = False
    cycle: Optional[List[int]] = None
    added: List[Tuple[int, int]] = field(default_factory=lambda: [])
    path_lengths: List[int] = field(default_factory=lambda: [])
    # number of edges of H_i outside the pool after each addition
    foreign_edges: List[int] = field(default_factory=lambda: [])
    graph: Any = None


@dataclass
class PipelineParams:
    n: int = 0
    k: int = 1
    delta0: float = 0.25
    rho: float = 0.2
    d0: int = 0
    t_minus: int = 0
    t_plus: int = 0


@dataclass
class RunRecord:
    run_index: int = 0
    seed: int = 0
    kind: str = "hitting"
    params: Dict[str, Any] = field(default_factory=lambda: {})
    hitting: Dict[str, Any] = field(default_factory=lambda: {})
    audits: Dict[str, Any] = field(default_factory=lambda: {})
    elapsed: float = 0.0

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, default=_json_default)

    @classmethod
    def from_json(cls, line: str) -> "RunRecord":
        return cls(**json.loads(line))


def _json_default(obj):
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    raise TypeError(f"Object of type {type(obj).__name__} is not JSON serializable")


@dataclass
class ExperimentConfig:
    command: str = "hitting"
    model: str = "complete"
    n: int = 100
    p: Optional[float] = None
    alpha: Optional[float] = None
    # walk length (1+epsilon) n ln n; None means adaptive-to-tau
    epsilon: Optional[float] = None
    k: int = 1
    # None: inverse_n (stays recorded as loops) for the pipeline, none otherwise
    laziness: Optional[str] = None
    runs: int = 1
    seed: int = 0
    out: Optional[str] = None
    workers: int = 1
    delta0: float = 0.25
    rho: float = 0.2
    samples: int = 200
    audits: List[str] = field(default_factory=lambda: [])
    kappa_target: Optional[int] = None
    record_stays: Optional[bool] = None

    def __post_init__(self):
        if self.runs < 1:
            raise ConfigError(f"runs must be at least 1, got {self.runs}.")
        if self.n < 1:
            raise ConfigError(f"n must be at least 1, got {self.n}.")
        if self.k < 1:
            raise ConfigError(f"k must be at least 1, got {self.k}.")
        if self.workers < 1:
            raise ConfigError(f"workers must be at least 1, got {self.workers}.")
        if self.epsilon is not None and self.epsilon <= -1:
            raise ConfigError(f"epsilon must exceed -1 for a positive length, got {self.epsilon}.")
        if self.model not in ("complete", "gnp"):
            raise ConfigError(f"Unknown model '{self.model}', expected 'complete' or 'gnp'.")
        if self.model == "gnp":
            if (self.p is None) == (self.alpha is None):
                raise ConfigError("gnp model needs exactly one of p or alpha.")
            if self.p is not None and not 0 <= self.p <= 1:
                raise ConfigError(f"p must lie in [0,1], got {self.p}.")
        if self.laziness is None:
            self.laziness = "inverse_n" if self.command == "pipeline" else "none"
        self.laziness = self.laziness.replace("-", "_")
        if self.laziness not in ("none", "half", "inverse_n"):
            raise ConfigError(f"Unknown laziness '{self.laziness}'.")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class MixingTime:
    steps: Optional[int] = None
    xi: float = 0.25
    # "exact" when every start was evolved, "sampled" otherwise
    regime: str = "exact"
    starts: int = 0
    worst_start: Optional[int] = None
    tv_history: List[float] = field(default_factory=lambda: [])

    @property
    def monotone(self) -> bool:
        return all(b <= a + 1e-12 for a, b in zip(self.tv_history, self.tv_history[1:]))
