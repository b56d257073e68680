"""Factored MINLP: linear rows plus isolated trigonometric and bilinear terms.

Variables are referred to by integer index into ``FactoredModel.variables``.
Models are immutable; transformations return new instances.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .functions import Sinusoid, UserFunction

CONTINUOUS, INTEGER, BINARY = "continuous", "integer", "binary"
SENSES = ("<=", "=", ">=")


@dataclass(frozen=True)
class VarDomain:
    name: str
    lower: float = -math.inf
    upper: float = math.inf
    integrality: str = CONTINUOUS

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def is_integer(self) -> bool:
        return self.integrality in (INTEGER, BINARY)

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.lower) and math.isfinite(self.upper)


@dataclass(frozen=True)
class LinearConstraint:
    coefficients: Mapping[int, float]
    sense: str
    rhs: float
    name: str = ""

    def activity(self, x: Sequence[float]) -> float:
        return sum(c * x[j] for j, c in self.coefficients.items())

    def violation(self, x: Sequence[float]) -> float:
        a = self.activity(x)
        if self.sense == "<=":
            return max(0.0, a - self.rhs)
        if self.sense == ">=":
            return max(0.0, self.rhs - a)
        return abs(a - self.rhs)


@dataclass(frozen=True)
class LinearForm:
    coefficients: Mapping[int, float] = field(default_factory=dict)
    constant: float = 0.0

    def evaluate(self, x: Sequence[float]) -> float:
        return self.constant + sum(c * x[j] for j, c in self.coefficients.items())


@dataclass(frozen=True)
class TrigTerm:
    """``output = amplitude * kind(frequency * input + phase)``."""

    output: int
    input: int
    kind: str = "sin"
    amplitude: float = 1.0
    phase: float = 0.0
    frequency: float = 1.0
    user: Optional[UserFunction] = None

    @property
    def function(self):
        if self.kind == "user":
            if self.user is None:
                raise ValueError("user trig term without a function")
            return self.user
        return Sinusoid(self.kind, self.amplitude, self.phase, self.frequency)


@dataclass(frozen=True)
class BilinearTerm:
    output: int
    left: int
    right: int
    partitioned_side: Optional[str] = None  # "left" | "right" | None (auto)


@dataclass(frozen=True)
class AngleLink:
    """Declares ``target = source + coefficient * step`` for a pair of periodic inputs.

    Used to emit integer bounds between the offset variables of the principal
    domain reformulation; the linking row itself must be among the constraints.
    """

    source: int
    target: int
    step: int
    coefficient: float


@dataclass(frozen=True)
class FactoredModel:
    variables: Tuple[VarDomain, ...]
    objective: LinearForm = field(default_factory=LinearForm)
    constraints: Tuple[LinearConstraint, ...] = ()
    trig_terms: Tuple[TrigTerm, ...] = ()
    bilinear_terms: Tuple[BilinearTerm, ...] = ()
    angle_links: Tuple[AngleLink, ...] = ()
    name: str = "model"

    @property
    def n(self) -> int:
        return len(self.variables)

    def index(self, name: str) -> int:
        for i, v in enumerate(self.variables):
            if v.name == name:
                return i
        raise KeyError(name)

    def bounds(self) -> List[Tuple[float, float]]:
        return [(v.lower, v.upper) for v in self.variables]

    def with_bounds(self, bounds: Sequence[Tuple[float, float]]) -> "FactoredModel":
        vs = tuple(replace(v, lower=lo, upper=hi) for v, (lo, hi) in zip(self.variables, bounds))
        return replace(self, variables=vs)

    def term_values(self, x: Sequence[float]) -> List[float]:
        """Copy of ``x`` with every term output replaced by its exact value."""
        y = list(x)
        for t in self.trig_terms:
            y[t.output] = t.function.value(y[t.input])
        for b in self.bilinear_terms:
            y[b.output] = y[b.left] * y[b.right]
        return y

    def max_violation(self, x: Sequence[float]) -> float:
        worst = 0.0
        for v, xi in zip(self.variables, x):
            worst = max(worst, v.lower - xi, xi - v.upper)
            if v.is_integer:
                worst = max(worst, abs(xi - round(xi)))
        for c in self.constraints:
            worst = max(worst, c.violation(x))
        for t in self.trig_terms:
            worst = max(worst, abs(x[t.output] - t.function.value(x[t.input])))
        for b in self.bilinear_terms:
            worst = max(worst, abs(x[b.output] - x[b.left] * x[b.right]))
        return worst


class ModelBuilder:
    """Incremental construction of a :class:`FactoredModel`."""

    def __init__(self, name: str = "model"):
        self.name = name
        self.variables: List[VarDomain] = []
        self.constraints: List[LinearConstraint] = []
        self.trig_terms: List[TrigTerm] = []
        self.bilinear_terms: List[BilinearTerm] = []
        self.angle_links: List[AngleLink] = []
        self.objective: Dict[int, float] = {}
        self.objective_constant = 0.0

    def var(self, name: str, lower: float = -math.inf, upper: float = math.inf,
            integrality: str = CONTINUOUS) -> int:
        if integrality == BINARY:
            lower, upper = max(lower, 0.0), min(upper, 1.0)
        self.variables.append(VarDomain(name, float(lower), float(upper), integrality))
        return len(self.variables) - 1

    def constrain(self, coefficients: Mapping[int, float], sense: str, rhs: float,
                  name: str = "") -> int:
        coeffs: Dict[int, float] = {}
        for j, c in coefficients.items():
            coeffs[j] = coeffs.get(j, 0.0) + float(c)
        coeffs = {j: c for j, c in coeffs.items() if c != 0.0}
        self.constraints.append(LinearConstraint(coeffs, sense, float(rhs),
                                                 name or f"c{len(self.constraints)}"))
        return len(self.constraints) - 1

    def trig(self, output: int, input: int, kind: str = "sin", **kw) -> int:
        self.trig_terms.append(TrigTerm(output, input, kind, **kw))
        return len(self.trig_terms) - 1

    def bilinear(self, output: int, left: int, right: int,
                 partitioned_side: Optional[str] = None) -> int:
        self.bilinear_terms.append(BilinearTerm(output, left, right, partitioned_side))
        return len(self.bilinear_terms) - 1

    def link(self, source: int, target: int, step: int, coefficient: float) -> None:
        self.angle_links.append(AngleLink(source, target, step, coefficient))

    def minimize(self, coefficients: Mapping[int, float], constant: float = 0.0) -> None:
        self.objective = dict(coefficients)
        self.objective_constant = constant

    def build(self) -> FactoredModel:
        return FactoredModel(
            variables=tuple(self.variables),
            objective=LinearForm(dict(self.objective), self.objective_constant),
            constraints=tuple(self.constraints),
            trig_terms=tuple(self.trig_terms),
            bilinear_terms=tuple(self.bilinear_terms),
            angle_links=tuple(self.angle_links),
            name=self.name,
        )


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str

    def __str__(self):
        return f"{self.kind}: {self.detail}"


def validate_model(model: FactoredModel) -> List[Violation]:
    """Return every broken invariant of ``model``; empty means well formed."""
    out: List[Violation] = []
    n = model.n

    def known(j) -> bool:
        return isinstance(j, int) and 0 <= j < n

    for i, v in enumerate(model.variables):
        if not v.lower <= v.upper:
            out.append(Violation("empty domain", f"variable {i} ({v.name}) [{v.lower}, {v.upper}]"))
        if v.integrality == BINARY and (v.lower < 0 or v.upper > 1):
            out.append(Violation("binary bounds", f"variable {i} ({v.name})"))
        if v.integrality not in (CONTINUOUS, INTEGER, BINARY):
            out.append(Violation("integrality", f"variable {i} has {v.integrality!r}"))

    for k, c in enumerate(model.constraints):
        if c.sense not in SENSES:
            out.append(Violation("sense", f"constraint {k} has sense {c.sense!r}"))
        if not any(val != 0.0 for val in c.coefficients.values()):
            out.append(Violation("empty constraint", f"constraint {k} ({c.name})"))
        for j in c.coefficients:
            if not known(j):
                out.append(Violation("unknown variable", f"constraint {k} references {j}"))
    for j in model.objective.coefficients:
        if not known(j):
            out.append(Violation("unknown variable", f"objective references {j}"))

    defined: Dict[int, str] = {}

    def define(j, tag):
        if j in defined:
            out.append(Violation("duplicate definition",
                                 f"variable {j} defined by {defined[j]} and {tag}"))
        defined[j] = tag

    for k, t in enumerate(model.trig_terms):
        tag = f"trig term t{k}"
        if not (known(t.output) and known(t.input)):
            out.append(Violation("unknown variable", tag))
            continue
        define(t.output, tag)
        if not model.variables[t.input].bounded:
            out.append(Violation("unbounded trig input", f"{tag} input {t.input}"))
        try:
            t.function
        except ValueError as exc:
            out.append(Violation("bad trig term", f"{tag}: {exc}"))
    for k, b in enumerate(model.bilinear_terms):
        tag = f"bilinear term b{k}"
        if not all(known(j) for j in (b.output, b.left, b.right)):
            out.append(Violation("unknown variable", tag))
            continue
        define(b.output, tag)
        for j in (b.left, b.right):
            if not model.variables[j].bounded:
                out.append(Violation("unbounded bilinear input", f"{tag} input {j}"))
        if b.partitioned_side not in (None, "left", "right"):
            out.append(Violation("bad partitioned side", tag))
    for k, link in enumerate(model.angle_links):
        if not all(known(j) for j in (link.source, link.target, link.step)):
            out.append(Violation("unknown variable", f"angle link {k}"))
    return out


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def _num(x: float):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _unnum(x) -> float:
    return float(x)


def model_to_dict(model: FactoredModel) -> dict:
    def lin(coeffs):
        return [[j, c] for j, c in sorted(coeffs.items())]

    trig = []
    for t in model.trig_terms:
        if t.kind == "user":
            raise TypeError("models with user trig terms cannot be serialized")
        trig.append({"output": t.output, "input": t.input, "kind": t.kind,
                     "amplitude": t.amplitude, "phase": t.phase, "frequency": t.frequency})
    return {
        "name": model.name,
        "variables": [{"name": v.name, "lower": _num(v.lower), "upper": _num(v.upper),
                       "integrality": v.integrality} for v in model.variables],
        "objective": {"coefficients": lin(model.objective.coefficients),
                      "constant": model.objective.constant},
        "constraints": [{"name": c.name, "coefficients": lin(c.coefficients),
                         "sense": c.sense, "rhs": c.rhs} for c in model.constraints],
        "trig_terms": trig,
        "bilinear_terms": [{"output": b.output, "left": b.left, "right": b.right,
                            "partitioned_side": b.partitioned_side}
                           for b in model.bilinear_terms],
        "angle_links": [{"source": a.source, "target": a.target, "step": a.step,
                         "coefficient": a.coefficient} for a in model.angle_links],
    }


def model_from_dict(data: dict) -> FactoredModel:
    def lin(pairs):
        return {int(j): float(c) for j, c in pairs}

    return FactoredModel(
        variables=tuple(VarDomain(v["name"], _unnum(v["lower"]), _unnum(v["upper"]),
                                  v.get("integrality", CONTINUOUS))
                        for v in data["variables"]),
        objective=LinearForm(lin(data.get("objective", {}).get("coefficients", [])),
                             float(data.get("objective", {}).get("constant", 0.0))),
        constraints=tuple(LinearConstraint(lin(c["coefficients"]), c["sense"], float(c["rhs"]),
                                           c.get("name", ""))
                          for c in data.get("constraints", [])),
        trig_terms=tuple(TrigTerm(t["output"], t["input"], t.get("kind", "sin"),
                                  float(t.get("amplitude", 1.0)), float(t.get("phase", 0.0)),
                                  float(t.get("frequency", 1.0)))
                         for t in data.get("trig_terms", [])),
        bilinear_terms=tuple(BilinearTerm(b["output"], b["left"], b["right"],
                                          b.get("partitioned_side"))
                             for b in data.get("bilinear_terms", [])),
        angle_links=tuple(AngleLink(a["source"], a["target"], a["step"], float(a["coefficient"]))
                          for a in data.get("angle_links", [])),
        name=data.get("name", "model"),
    )


def dump_model(model: FactoredModel, path) -> None:
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh, indent=1)


def load_model(path) -> FactoredModel:
    with open(path) as fh:
        return model_from_dict(json.load(fh))
