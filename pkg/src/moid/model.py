"""The multi-objective influence diagram data model and its file format.

A diagram holds chance variables with conditional probability tables, decision
variables with informational parents, vector-valued utility functions, a
temporal block order, and the list of objectives with their senses. Utilities
are stored internally in the maximize-all convention; minimized objectives are
negated by the loader and restored by the saver and by reporting code.

Flat tables use one fixed indexing convention throughout: row-major with the
LAST scope variable fastest, scope order = parents then target for CPTs.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .vectors import UtilityVector

CPT_ROW_TOL = 1e-9


class DiagramValidationError(ValueError):
    """Carries the full list of validation violations, not just the first."""

    def __init__(self, errors: Sequence[str]):
        self.errors = list(errors)
        super().__init__("invalid influence diagram:\n" + "\n".join(f"- {e}" for e in self.errors))


class PolicyError(ValueError):
    """A policy does not cover the diagram's decisions."""


@dataclass(frozen=True)
class Variable:
    id: str
    kind: str  # "chance" | "decision"
    domain: tuple[str, ...]

    @property
    def size(self) -> int:
        return len(self.domain)


@dataclass(frozen=True)
class ProbabilityTable:
    """CPT for a chance variable, flat over (parents..., target), last fastest."""

    target: str
    parents: tuple[str, ...]
    entries: tuple[float, ...]

    def as_array(self, shape: tuple[int, ...]) -> np.ndarray:
        return np.array(self.entries, dtype=np.float64).reshape(shape)


@dataclass(frozen=True)
class UtilityFunction:
    """A vector-valued utility over a variable scope, one p-vector per config."""

    scope: tuple[str, ...]
    entries: tuple[tuple[float, ...], ...]

    @property
    def dimension(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    def as_array(self, shape: tuple[int, ...]) -> np.ndarray:
        return np.array(self.entries, dtype=np.float64).reshape(shape + (self.dimension,))


#: A temporal block is ("chance", (ids...)) or ("decision", id).
Block = tuple[str, object]


@dataclass(frozen=True)
class TemporalOrder:
    """Alternating observation/decision blocks I0, D1, I1, ..., Dm, Im."""

    blocks: tuple[Block, ...]

    def positions(self) -> dict[str, int]:
        """Map each variable to its block index."""
        pos: dict[str, int] = {}
        for i, (kind, payload) in enumerate(self.blocks):
            if kind == "decision":
                pos[payload] = i
            else:
                for vid in payload:
                    pos[vid] = i
        return pos

    def decisions(self) -> tuple[str, ...]:
        return tuple(p for k, p in self.blocks if k == "decision")


@dataclass(frozen=True)
class InfluenceDiagram:
    name: str
    objectives: tuple[tuple[str, str], ...]  # (name, "max"|"min")
    variables: tuple[Variable, ...]
    cpts: tuple[ProbabilityTable, ...]
    utilities: tuple[UtilityFunction, ...]  # internal maximize-all values
    temporal: TemporalOrder
    #: informational parents per decision variable
    decision_arcs: tuple[tuple[str, tuple[str, ...]], ...] = ()

    @property
    def p(self) -> int:
        return len(self.objectives)

    @property
    def sense_signs(self) -> np.ndarray:
        return np.array([1.0 if s == "max" else -1.0 for _, s in self.objectives])

    def var(self, vid: str) -> Variable:
        for v in self.variables:
            if v.id == vid:
                return v
        raise KeyError(vid)

    @property
    def chance_ids(self) -> tuple[str, ...]:
        return tuple(v.id for v in self.variables if v.kind == "chance")

    @property
    def decision_ids(self) -> tuple[str, ...]:
        return self.temporal.decisions()

    def decision_parents(self, vid: str) -> tuple[str, ...]:
        for dec, parents in self.decision_arcs:
            if dec == vid:
                return parents
        return ()

    def to_user_sense(self, coords: Iterable[float]) -> tuple[float, ...]:
        # + 0.0 normalizes the -0.0 produced by negating a zero coordinate
        return tuple(float(s * c + 0.0) for s, c in zip(self.sense_signs, coords))

    def arcs(self) -> list[tuple[str, str]]:
        out = []
        for cpt in self.cpts:
            out.extend((p, cpt.target) for p in cpt.parents)
        for dec, parents in self.decision_arcs:
            out.extend((p, dec) for p in parents)
        return out


@dataclass(frozen=True)
class DecisionRule:
    """Total map from configurations of a decision's parents to a domain value."""

    decision: str
    parents: tuple[str, ...]
    table: Mapping[tuple[str, ...], str]

    def choose(self, parent_values: tuple[str, ...]) -> str:
        return self.table[parent_values]


@dataclass(frozen=True)
class Policy:
    rules: Mapping[str, DecisionRule]

    def __iter__(self):
        return iter(self.rules.values())


# ---------------------------------------------------------------------------
# Loading / saving
# ---------------------------------------------------------------------------


def load_diagram(document: str | dict) -> InfluenceDiagram:
    """Parse and fully validate a diagram document.

    Collects every violation before failing. Minimized objectives are negated
    into the internal maximize-all convention.
    """
    doc = json.loads(document) if isinstance(document, str) else document
    errors: list[str] = []

    objectives = tuple((o["name"], o["sense"]) for o in doc.get("objectives", ()))
    if not objectives:
        errors.append("diagram declares no objectives")
    for name, sense in objectives:
        if sense not in ("max", "min"):
            errors.append(f"objective {name!r} has sense {sense!r}; expected 'max' or 'min'")

    variables = []
    seen = set()
    for v in doc.get("variables", ()):
        vid, kind, domain = v["id"], v["kind"], tuple(v["domain"])
        if vid in seen:
            errors.append(f"duplicate variable id {vid!r}")
        seen.add(vid)
        if kind not in ("chance", "decision"):
            errors.append(f"variable {vid!r} has kind {kind!r}")
        if not domain:
            errors.append(f"variable {vid!r} has an empty domain")
        variables.append(Variable(vid, kind, domain))
    by_id = {v.id: v for v in variables}

    def check_scope(scope, owner):
        missing = [s for s in scope if s not in by_id]
        if missing:
            errors.append(f"{owner} references unknown variables {missing}")
        return not missing

    cpts = []
    cpt_targets = set()
    for c in doc.get("cpts", ()):
        target, parents = c["target"], tuple(c["parents"])
        entries = tuple(float(x) for x in c["table"])
        cpt = ProbabilityTable(target, parents, entries)
        cpts.append(cpt)
        if target in cpt_targets:
            errors.append(f"multiple CPTs for chance variable {target!r}")
        cpt_targets.add(target)
        if not check_scope((target, *parents), f"CPT for {target!r}"):
            continue
        if by_id[target].kind != "chance":
            errors.append(f"CPT target {target!r} is not a chance variable")
            continue
        shape = tuple(by_id[s].size for s in parents) + (by_id[target].size,)
        if len(entries) != int(np.prod(shape)):
            errors.append(
                f"CPT for {target!r} has {len(entries)} entries; expected {int(np.prod(shape))}"
            )
            continue
        arr = cpt.as_array(shape)
        if (arr < 0).any():
            errors.append(f"CPT for {target!r} has negative entries")
        sums = arr.sum(axis=-1)
        bad = np.argwhere(np.abs(sums - 1.0) > CPT_ROW_TOL)
        for row in bad:
            errors.append(
                f"CPT row for {target!r} at parent config {tuple(int(i) for i in row)} "
                f"sums to {sums[tuple(row)]:.6g}, expected 1"
            )

    missing_cpts = [
        v.id for v in variables if v.kind == "chance" and v.id not in cpt_targets
    ]
    for vid in missing_cpts:
        errors.append(f"chance variable {vid!r} has no CPT")

    signs = np.array([1.0 if s == "max" else -1.0 for _, s in objectives]) if objectives else None
    utilities = []
    for u in doc.get("utilities", ()):
        scope = tuple(u["scope"])
        if not check_scope(scope, f"utility over {scope}"):
            continue
        shape = tuple(by_id[s].size for s in scope)
        rows = [tuple(float(x) for x in row) for row in u["table"]]
        if len(rows) != int(np.prod(shape)):
            errors.append(
                f"utility over {scope} has {len(rows)} rows; expected {int(np.prod(shape))}"
            )
            continue
        if objectives and any(len(r) != len(objectives) for r in rows):
            errors.append(f"utility over {scope} has rows not matching {len(objectives)} objectives")
            continue
        if any(not all(math.isfinite(x) for x in r) for r in rows):
            errors.append(f"utility over {scope} has non-finite entries")
            continue
        internal = tuple(tuple(signs * np.array(r)) for r in rows) if objectives else tuple(rows)
        utilities.append(UtilityFunction(scope, internal))

    blocks: list[Block] = []
    placed: list[str] = []
    for b in doc.get("temporal_order", ()):
        if "chance" in b:
            ids = tuple(b["chance"])
            blocks.append(("chance", ids))
            placed.extend(ids)
        elif "decision" in b:
            blocks.append(("decision", b["decision"]))
            placed.append(b["decision"])
        else:
            errors.append(f"temporal block {b} is neither a chance nor a decision block")
    temporal = TemporalOrder(tuple(blocks))
    if sorted(placed) != sorted(by_id):
        missing = sorted(set(by_id) - set(placed))
        extra = sorted(set(placed) - set(by_id))
        dupes = sorted({x for x in placed if placed.count(x) > 1})
        if missing:
            errors.append(f"temporal order is missing variables {missing}")
        if extra:
            errors.append(f"temporal order lists unknown variables {extra}")
        if dupes:
            errors.append(f"temporal order lists variables more than once: {dupes}")
    for kind, payload in blocks:
        if kind == "decision" and payload in by_id and by_id[payload].kind != "decision":
            errors.append(f"temporal decision block names non-decision variable {payload!r}")
        if kind == "chance":
            for vid in payload:
                if vid in by_id and by_id[vid].kind != "chance":
                    errors.append(f"temporal chance block contains decision variable {vid!r}")

    decision_arcs = []
    for d in doc.get("decision_parents", ()):
        dec, parents = d["decision"], tuple(d["parents"])
        check_scope((dec, *parents), f"decision parents of {dec!r}")
        decision_arcs.append((dec, parents))
    declared = {d for d, _ in decision_arcs}
    for v in variables:
        if v.kind == "decision" and v.id not in declared:
            decision_arcs.append((v.id, ()))

    diagram = InfluenceDiagram(
        name=doc.get("name", "diagram"),
        objectives=objectives,
        variables=tuple(variables),
        cpts=tuple(cpts),
        utilities=tuple(utilities),
        temporal=temporal,
        decision_arcs=tuple(decision_arcs),
    )

    if not errors:
        errors.extend(_structural_errors(diagram))
    if errors:
        raise DiagramValidationError(errors)
    return diagram


def _structural_errors(d: InfluenceDiagram, strict_non_forgetting: bool = False) -> list[str]:
    errors: list[str] = []
    pos = d.temporal.positions()
    for dec, parents in d.decision_arcs:
        for parent in parents:
            if pos.get(parent, -1) >= pos.get(dec, 10**9):
                errors.append(
                    f"decision {dec!r} has parent {parent!r} that does not precede it "
                    "in the temporal order"
                )
    # Cycle check over parent arcs (utility nodes are sinks and cannot cycle).
    adj: dict[str, list[str]] = {v.id: [] for v in d.variables}
    for a, b in d.arcs():
        if a in adj and b in adj:
            adj[a].append(b)
    state: dict[str, int] = {}

    def dfs(u: str) -> bool:
        state[u] = 1
        for w in adj[u]:
            if state.get(w, 0) == 1 or (state.get(w, 0) == 0 and dfs(w)):
                return True
        state[u] = 2
        return False

    if any(state.get(v.id, 0) == 0 and dfs(v.id) for v in d.variables):
        errors.append("the arc graph contains a directed cycle")

    if strict_non_forgetting:
        history: list[str] = []
        for kind, payload in d.temporal.blocks:
            if kind == "decision":
                missing = [h for h in history if h not in d.decision_parents(payload)]
                if missing:
                    errors.append(
                        f"non-forgetting violated: decision {payload!r} does not observe {missing}"
                    )
                history.append(payload)
            else:
                history.extend(payload)
    return errors


def validate_diagram(d: InfluenceDiagram, strict_non_forgetting: bool = False) -> list[str]:
    """Structural validation; returns the list of violations (empty when valid)."""
    return _structural_errors(d, strict_non_forgetting)


def save_diagram(d: InfluenceDiagram) -> str:
    """Serialize a diagram; utilities are re-expressed in the user's senses."""
    signs = d.sense_signs
    doc = {
        "name": d.name,
        "objectives": [{"name": n, "sense": s} for n, s in d.objectives],
        "variables": [
            {"id": v.id, "kind": v.kind, "domain": list(v.domain)} for v in d.variables
        ],
        "cpts": [
            {"target": c.target, "parents": list(c.parents), "table": list(c.entries)}
            for c in d.cpts
        ],
        "utilities": [
            {
                "scope": list(u.scope),
                "table": [list(signs * np.array(row)) for row in u.entries],
            }
            for u in d.utilities
        ],
        "decision_parents": [
            {"decision": dec, "parents": list(parents)} for dec, parents in d.decision_arcs
        ],
        "temporal_order": [
            {"chance": list(payload)} if kind == "chance" else {"decision": payload}
            for kind, payload in d.temporal.blocks
        ],
    }
    return json.dumps(doc, indent=2)


# ---------------------------------------------------------------------------
# Expected utility of a fixed policy
# ---------------------------------------------------------------------------


class PolicyEvaluator:
    """Vectorized exact expected-utility evaluation over all chance configs.

    Built once per diagram; policies are then scored by filling in decision
    columns and gathering CPT/utility entries. Intended for exact oracles and
    small diagrams (the chance configuration space is enumerated in full).
    """

    def __init__(self, d: InfluenceDiagram):
        self.d = d
        self.chance = list(d.chance_ids)
        self.domains = {v.id: v.domain for v in d.variables}
        self.sizes = {v.id: v.size for v in d.variables}
        sizes = [self.sizes[v] for v in self.chance]
        grids = np.meshgrid(*[np.arange(s) for s in sizes], indexing="ij") if sizes else []
        self.n = int(np.prod(sizes)) if sizes else 1
        self.cols = {v: g.reshape(-1) for v, g in zip(self.chance, grids)}
        self.dec_order = list(d.decision_ids)
        self._cpt_tables = [np.asarray(c.entries, dtype=np.float64) for c in d.cpts]
        self._util_tables = [np.asarray(u.entries, dtype=np.float64) for u in d.utilities]

    def _decision_cols(self, rule_arrays: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
        cols = dict(self.cols)
        for dec in self.dec_order:
            parents = self.d.decision_parents(dec)
            if parents:
                flat = np.ravel_multi_index(
                    [cols[p] for p in parents], [self.sizes[p] for p in parents]
                )
            else:
                flat = np.zeros(self.n, dtype=np.int64)
            cols[dec] = rule_arrays[dec].reshape(-1)[flat]
        return cols

    def evaluate_arrays(self, rule_arrays: dict[str, np.ndarray]) -> tuple[np.ndarray, float]:
        """Internal-sense EU vector and total probability mass for index rules."""
        cols = self._decision_cols(rule_arrays)
        probs = np.ones(self.n)
        for cpt, table in zip(self.d.cpts, self._cpt_tables):
            scope = (*cpt.parents, cpt.target)
            flat = np.ravel_multi_index([cols[s] for s in scope], [self.sizes[s] for s in scope])
            probs = probs * table[flat]
        total = np.zeros((self.n, self.d.p))
        for u, table in zip(self.d.utilities, self._util_tables):
            if u.scope:
                flat = np.ravel_multi_index(
                    [cols[s] for s in u.scope], [self.sizes[s] for s in u.scope]
                )
            else:
                flat = np.zeros(self.n, dtype=np.int64)
            total = total + table[flat]
        return probs @ total, float(probs.sum())

    def rule_arrays_from_policy(self, policy: Policy) -> dict[str, np.ndarray]:
        arrays = {}
        for dec in self.dec_order:
            if dec not in policy.rules:
                raise PolicyError(f"policy is missing a rule for decision {dec!r}")
            rule = policy.rules[dec]
            parents = self.d.decision_parents(dec)
            if tuple(rule.parents) != tuple(parents):
                raise PolicyError(
                    f"rule for {dec!r} is over parents {rule.parents}, expected {parents}"
                )
            sizes = tuple(self.sizes[p] for p in parents)
            arr = np.empty(sizes if sizes else (1,), dtype=np.int64)
            dom = self.domains[dec]
            for config in itertools.product(*[self.domains[p] for p in parents]):
                idx = tuple(self.domains[p].index(val) for p, val in zip(parents, config))
                try:
                    choice = rule.table[config]
                except KeyError:
                    raise PolicyError(f"rule for {dec!r} is missing config {config}") from None
                arr[idx if idx else (0,)] = dom.index(choice)
            arrays[dec] = arr
        return arrays


def policy_expected_utility(d: InfluenceDiagram, policy: Policy) -> UtilityVector:
    """Exact expected utility of a total policy, in the user's declared senses."""
    ev = PolicyEvaluator(d)
    eu, _mass = ev.evaluate_arrays(ev.rule_arrays_from_policy(policy))
    return UtilityVector(d.to_user_sense(eu))
