"""World generation and serialization: action/concept sets, relevance models, priors.

A relevance model holds one independent Bernoulli parameter per (action,
concept) pair: the probability that the concept is relevant to the action.
Rows are deliberately *not* normalized.  Generated entries are independent
Beta draws (the two-parameter Dirichlet restricted to a binary indicator).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidParamsError, InvalidStepError, WorldFormatError
from .probs import Dist, Rng

WORLD_FORMAT_VERSION = 1


@dataclass(frozen=True, eq=False)
class RelevanceModel:
    """Matrix of per-(action, concept) relevance probabilities."""

    p_true: np.ndarray

    def __post_init__(self):
        p = np.array(self.p_true, dtype=float, copy=True)
        if p.ndim != 2 or p.size == 0:
            raise InvalidParamsError("relevance model needs a nonempty 2-D matrix")
        if (p < 0).any() or (p > 1).any():
            raise InvalidParamsError("relevance entries must lie in [0, 1]")
        if (p.max(axis=1) <= 0).any():
            raise InvalidParamsError("every action row needs at least one positive entry")
        p.setflags(write=False)
        object.__setattr__(self, "p_true", p)

    @property
    def num_actions(self) -> int:
        return self.p_true.shape[0]

    @property
    def num_concepts(self) -> int:
        return self.p_true.shape[1]


@dataclass(frozen=True)
class SymbolTable:
    """Bijection between concept ids and symbol ids."""

    to_symbol: tuple[int, ...]

    def __post_init__(self):
        syms = tuple(int(s) for s in self.to_symbol)
        if len(set(syms)) != len(syms):
            raise InvalidParamsError("symbol table must be a bijection")
        object.__setattr__(self, "to_symbol", syms)

    @classmethod
    def identity(cls, n: int) -> "SymbolTable":
        return cls(tuple(range(n)))

    def symbol(self, concept: int) -> int:
        return self.to_symbol[concept]

    def concept(self, symbol: int) -> int:
        return self.to_symbol.index(symbol)

    def __len__(self) -> int:
        return len(self.to_symbol)


@dataclass(frozen=True)
class AgentProfile:
    """One agent's conceptualization, keyed by an opaque task id."""

    task_id: str
    relevance: RelevanceModel


@dataclass(frozen=True)
class World:
    """Shared ground truth: set sizes, priors, and the concept-symbol mapping."""

    num_actions: int
    num_concepts: int
    prior_actions: Dist
    prior_concepts: Dist
    symbol_table: SymbolTable

    def __post_init__(self):
        if self.num_actions < 1 or self.num_concepts < 1:
            raise InvalidParamsError("world needs at least one action and one concept")
        if len(self.prior_actions) != self.num_actions:
            raise InvalidParamsError("action prior dimension mismatch")
        if len(self.prior_concepts) != self.num_concepts:
            raise InvalidParamsError("concept prior dimension mismatch")
        if len(self.symbol_table) != self.num_concepts:
            raise InvalidParamsError("symbol table dimension mismatch")


def gen_world(num_actions: int, num_concepts: int,
              dirichlet_pair: tuple[float, float], rng: Rng,
              task_id: str = "t0") -> tuple[World, AgentProfile]:
    """Generate a world with uniform priors and an iid Beta relevance model.

    Each relevance entry is drawn from Beta(a, b) where (a, b) is the
    two-parameter concentration pair; rows that come out all-zero (possible
    only through floating-point underflow of extreme draws) are redrawn.
    """
    if num_actions < 1 or num_concepts < 1:
        raise InvalidParamsError("counts must be >= 1")
    a, b = dirichlet_pair
    if a <= 0 or b <= 0:
        raise InvalidParamsError("concentration parameters must be positive")
    gen = rng.generator
    p = gen.beta(a, b, size=(num_actions, num_concepts))
    for i in range(num_actions):
        while p[i].max() <= 0:
            p[i] = gen.beta(a, b, size=num_concepts)
    world = World(
        num_actions=num_actions,
        num_concepts=num_concepts,
        prior_actions=Dist.uniform(num_actions),
        prior_concepts=Dist.uniform(num_concepts),
        symbol_table=SymbolTable.identity(num_concepts),
    )
    return world, AgentProfile(task_id=task_id, relevance=RelevanceModel(p))


# The three-action referential game: an image of a rabbit sitting, a rabbit
# jumping, and a rabbit jumping into a ring, described by the atomic concepts
# rabbit / jumping / ring.
RABBIT_CONCEPTS = ("rabbit", "jumping", "ring")
RABBIT_ACTIONS = ("rabbit_sitting", "rabbit_jumping", "rabbit_jumping_into_ring")


def rabbit_fixture() -> tuple[World, AgentProfile]:
    """Three actions, three concepts, deterministic nested relevance."""
    p = np.array([
        [1.0, 0.0, 0.0],
        [1.0, 1.0, 0.0],
        [1.0, 1.0, 1.0],
    ])
    world = World(
        num_actions=3,
        num_concepts=3,
        prior_actions=Dist.uniform(3),
        prior_concepts=Dist.uniform(3),
        symbol_table=SymbolTable.identity(3),
    )
    return world, AgentProfile(task_id="rabbit", relevance=RelevanceModel(p))


def perturb_model(model: RelevanceModel, epsilon: float, rng: Rng) -> RelevanceModel:
    """Add an independent uniform [-epsilon, +epsilon] offset per entry, clamped to [0, 1].

    Rows whose perturbation lands them at all-zero are redrawn so the model
    invariants survive.
    """
    if epsilon < 0:
        raise InvalidParamsError("epsilon must be >= 0")
    p = model.p_true
    if epsilon == 0:
        return RelevanceModel(p.copy())
    gen = rng.generator
    q = np.clip(p + gen.uniform(-epsilon, epsilon, size=p.shape), 0.0, 1.0)
    for i in range(q.shape[0]):
        while q[i].max() <= 0:
            q[i] = np.clip(p[i] + gen.uniform(-epsilon, epsilon, size=p.shape[1]), 0.0, 1.0)
    return RelevanceModel(q)


def quantize_model(model: RelevanceModel, step: float = 0.1) -> RelevanceModel:
    """Round every entry to the nearest multiple of ``step`` (ties round up).

    A row rounded to all-zero gets its pre-quantization maximum entry restored
    to one step (lowest concept id on ties).
    """
    if step <= 0 or step > 1:
        raise InvalidStepError("step must lie in (0, 1]")
    p = model.p_true
    q = np.clip(np.floor(p / step + 0.5) * step, 0.0, 1.0)
    for i in range(q.shape[0]):
        if q[i].max() <= 0:
            q[i, int(p[i].argmax())] = step
    return RelevanceModel(q)


def _require(cond: bool, field: str, why: str):
    if not cond:
        raise WorldFormatError(f"{field}: {why}")


def save_world(path, world: World, profiles: Sequence[AgentProfile]) -> None:
    """Write a world and its agent profiles as a versioned JSON document.

    Floats are serialized with shortest round-trip precision, so a load of a
    save reproduces every field bit-exactly.
    """
    doc = {
        "version": WORLD_FORMAT_VERSION,
        "num_actions": world.num_actions,
        "num_concepts": world.num_concepts,
        "prior_actions": list(world.prior_actions.p),
        "prior_concepts": list(world.prior_concepts.p),
        "symbol_table": list(world.symbol_table.to_symbol),
        "agents": [
            {"task_id": prof.task_id, "p_true": list(prof.relevance.p_true.ravel())}
            for prof in profiles
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_world(path) -> tuple[World, list[AgentProfile]]:
    """Load a world file, validating the schema with field-level messages."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise WorldFormatError(f"document: not valid JSON ({exc})") from exc
    _require(isinstance(doc, dict), "document", "expected a JSON object")
    _require(doc.get("version") == WORLD_FORMAT_VERSION, "version",
             f"expected {WORLD_FORMAT_VERSION}, got {doc.get('version')!r}")
    for field in ("num_actions", "num_concepts", "prior_actions", "prior_concepts",
                  "symbol_table", "agents"):
        _require(field in doc, field, "missing")
    na, nc = doc["num_actions"], doc["num_concepts"]
    _require(isinstance(na, int) and na >= 1, "num_actions", "expected a positive integer")
    _require(isinstance(nc, int) and nc >= 1, "num_concepts", "expected a positive integer")
    pa, pc = doc["prior_actions"], doc["prior_concepts"]
    _require(isinstance(pa, list) and len(pa) == na, "prior_actions", f"expected {na} entries")
    _require(isinstance(pc, list) and len(pc) == nc, "prior_concepts", f"expected {nc} entries")
    _require(abs(sum(pa) - 1.0) <= 1e-9, "prior_actions", "entries must sum to 1")
    _require(abs(sum(pc) - 1.0) <= 1e-9, "prior_concepts", "entries must sum to 1")
    table = doc["symbol_table"]
    _require(isinstance(table, list) and len(table) == nc, "symbol_table",
             f"expected {nc} entries")
    _require(isinstance(doc["agents"], list) and len(doc["agents"]) >= 1,
             "agents", "expected at least one agent")
    world = World(
        num_actions=na,
        num_concepts=nc,
        prior_actions=Dist(pa),
        prior_concepts=Dist(pc),
        symbol_table=SymbolTable(tuple(table)),
    )
    profiles = []
    for i, agent in enumerate(doc["agents"]):
        _require(isinstance(agent, dict), f"agents[{i}]", "expected an object")
        _require("task_id" in agent and "p_true" in agent, f"agents[{i}]",
                 "needs task_id and p_true")
        flat = agent["p_true"]
        _require(isinstance(flat, list) and len(flat) == na * nc, f"agents[{i}].p_true",
                 f"expected {na * nc} row-major entries")
        arr = np.asarray(flat, dtype=float).reshape(na, nc)
        _require(bool((arr >= 0).all() and (arr <= 1).all()), f"agents[{i}].p_true",
                 "entries must lie in [0, 1]")
        bad_rows = np.flatnonzero(arr.max(axis=1) <= 0)
        _require(bad_rows.size == 0, f"agents[{i}].p_true",
                 f"row {bad_rows[0] if bad_rows.size else ''} has no positive entry")
        profiles.append(AgentProfile(task_id=str(agent["task_id"]),
                                     relevance=RelevanceModel(arr)))
    return world, profiles
