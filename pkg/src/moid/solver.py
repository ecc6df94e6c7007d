"""Variable elimination for multi-objective influence diagrams.

The solver runs bucket elimination along a legal ordering (the reverse of the
elimination sequence extends the temporal order). Probability factors combine
by pointwise product; utility factors are tables of utility SETS combined by
Minkowski sum and pruned under the active dominance relation. Chance variables
are eliminated by probability-weighted summation, decisions by pruned union
over their values.

Pruning regimes:

* pareto    - exact Pareto pruning everywhere.
* epsilon   - exact Pareto pruning inside a bucket, then one grid covering
              per outgoing message with a per-step budget lambda = 1/t, so the
              per-step losses compose to a single (1+epsilon) factor overall.
* tradeoff  - cone dominance everywhere, via the dual-ray transform.

Every set element carries a provenance id. Decision buckets wrap their
surviving elements with (decision, configuration, chosen value) tags, so any
final vector can be traced back to the decision choices that produced it;
that trace is how policies are extracted.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .dominance import (
    CoveringParams,
    EpsilonCovering,
    EpsilonDomainError,
    TradeoffDominance,
    check_consistency,
    covering_indices,
    tradeoff_dominates,
)
from .model import DecisionRule, InfluenceDiagram, PolicyEvaluator, Policy, PolicyError
from .vectors import (
    DominanceRelation,
    PARETO,
    UtilitySet,
    UtilityVector,
    dedup_rows,
    maximal_rows,
    minkowski_sum_rows,
)

#: Tolerance for the requirement that the probability product in a decision
#: bucket is constant in the decision variable.
DECISION_CONSTANT_TOL = 1e-9

#: Pairwise-sum row count above which Minkowski sums are pruned in chunks.
_SUM_CHUNK_ROWS = 1_500_000


class DecisionInvariantError(RuntimeError):
    """The probability product in a decision bucket varied with the decision."""


class PolicyCountError(ValueError):
    """Brute-force enumeration refused: the policy space exceeds the cap."""

    def __init__(self, count: int, cap: int):
        self.count = count
        self.cap = cap
        super().__init__(f"policy space has {count} policies, above the cap of {cap}")


class _LimitExceeded(Exception):
    def __init__(self, reason: str):
        self.reason = reason


@dataclass(frozen=True)
class SolverLimits:
    """Wall-clock and memory budgets for a single solve call."""

    time_limit: float | None = None  # seconds
    memory_limit: int | None = None  # bytes of live utility tables

    def __post_init__(self):
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValueError("time_limit must be positive")
        if self.memory_limit is not None and self.memory_limit <= 0:
            raise ValueError("memory_limit must be positive")


@dataclass(frozen=True)
class EliminationOrder:
    """Variable ids in elimination sequence (first entry eliminated first).

    The reverse of the sequence extends the temporal order to a total order;
    ``block_index`` records which temporal block each position came from.
    """

    order: tuple[str, ...]
    block_index: tuple[int, ...]


@dataclass
class SolveReport:
    maximal_utilities: UtilitySet | None
    policy: Policy | None
    induced_width: int
    wall_time: float
    set_size_trace: tuple[int, ...]
    mode: str
    seed: int
    solved: bool = True
    failure_reason: str | None = None


# ---------------------------------------------------------------------------
# Legal ordering and induced width
# ---------------------------------------------------------------------------


def _interaction_graph(d: InfluenceDiagram) -> dict[str, set[str]]:
    """Cliques over the scopes of all CPTs and utility functions."""
    adj: dict[str, set[str]] = {v.id: set() for v in d.variables}
    scopes = [(*c.parents, c.target) for c in d.cpts] + [u.scope for u in d.utilities]
    for scope in scopes:
        for a, b in itertools.combinations(scope, 2):
            adj[a].add(b)
            adj[b].add(a)
    return adj


def legal_elimination_order(d: InfluenceDiagram) -> EliminationOrder:
    """Deterministic legal elimination sequence.

    Temporal blocks are processed in reverse (latest observations first).
    Within a chance block, variables are picked by the min-fill heuristic on
    the current interaction graph, ties broken by lowest variable id.
    """
    adj = {v: set(n) for v, n in _interaction_graph(d).items()}

    def fill_cost(v: str) -> int:
        nbrs = list(adj[v])
        return sum(
            1
            for i in range(len(nbrs))
            for j in range(i + 1, len(nbrs))
            if nbrs[j] not in adj[nbrs[i]]
        )

    def eliminate(v: str) -> None:
        for a, b in itertools.combinations(adj[v], 2):
            adj[a].add(b)
            adj[b].add(a)
        for n in adj[v]:
            n_set = adj[n]
            n_set.discard(v)
        del adj[v]

    order: list[str] = []
    blocks: list[int] = []
    for bi in range(len(d.temporal.blocks) - 1, -1, -1):
        kind, payload = d.temporal.blocks[bi]
        if kind == "decision":
            order.append(payload)
            blocks.append(bi)
            eliminate(payload)
        else:
            remaining = set(payload)
            while remaining:
                best = min(remaining, key=lambda v: (fill_cost(v), v))
                order.append(best)
                blocks.append(bi)
                eliminate(best)
                remaining.remove(best)
    return EliminationOrder(tuple(order), tuple(blocks))


def induced_width(d: InfluenceDiagram, tau: EliminationOrder) -> int:
    """Width of the induced interaction graph along the elimination sequence."""
    adj = {v: set(n) for v, n in _interaction_graph(d).items()}
    width = 0
    for v in tau.order:
        width = max(width, len(adj[v]))
        for a, b in itertools.combinations(adj[v], 2):
            adj[a].add(b)
            adj[b].add(a)
        for n in adj[v]:
            adj[n].discard(v)
        del adj[v]
    return width


# ---------------------------------------------------------------------------
# Internal factor machinery
# ---------------------------------------------------------------------------


@dataclass
class _Cell:
    vals: np.ndarray  # (n, p)
    ids: np.ndarray  # (n,) provenance ids

    def nbytes(self) -> int:
        return self.vals.nbytes + self.ids.nbytes


@dataclass
class _ProbFactor:
    scope: tuple[int, ...]  # variable indices, ascending elimination position
    table: np.ndarray  # one axis per scope variable


@dataclass
class _SetFactor:
    scope: tuple[int, ...]
    shape: tuple[int, ...]
    cells: dict[tuple[int, ...], _Cell]

    def nbytes(self) -> int:
        return sum(c.nbytes() for c in self.cells.values())


class _Provenance:
    """Append-only derivation DAG over set-element ids.

    Elements are created by leaves (original utility entries and zero
    placeholders), pairwise sums, and decision wraps. Scaling and pruning
    reuse ids, so the DAG stays proportional to the number of genuinely new
    vectors.
    """

    def __init__(self):
        self.chunks: list[np.ndarray] = []  # (n, 2) parent ids, -1 for none
        self.count = 0
        self.decision_meta: dict[int, tuple[int, int, int]] = {}  # id -> (dec, cell, choice)
        self._parents: np.ndarray | None = None

    def _alloc(self, parents: np.ndarray) -> np.ndarray:
        ids = np.arange(self.count, self.count + len(parents), dtype=np.int64)
        self.chunks.append(parents)
        self.count += len(parents)
        self._parents = None
        return ids

    def leaves(self, n: int) -> np.ndarray:
        return self._alloc(np.full((n, 2), -1, dtype=np.int64))

    def pairs(self, left: np.ndarray, right: np.ndarray) -> np.ndarray:
        return self._alloc(np.column_stack([left, right]).astype(np.int64))

    def wraps(self, parents: np.ndarray, dec: int, cell_code: int, choices: np.ndarray) -> np.ndarray:
        stacked = np.column_stack([parents, np.full(len(parents), -1)]).astype(np.int64)
        ids = self._alloc(stacked)
        for i, choice in zip(ids, choices):
            self.decision_meta[int(i)] = (dec, cell_code, int(choice))
        return ids

    def nbytes(self) -> int:
        return sum(c.nbytes for c in self.chunks)

    def ancestors_meta(self, root: int) -> list[tuple[int, int, int]]:
        """Decision tags reachable from ``root`` through the derivation DAG."""
        if self._parents is None:
            self._parents = (
                np.concatenate(self.chunks) if self.chunks else np.zeros((0, 2), dtype=np.int64)
            )
        parents = self._parents
        seen = np.zeros(self.count, dtype=bool)
        stack = [root]
        seen[root] = True
        metas = []
        while stack:
            node = stack.pop()
            meta = self.decision_meta.get(node)
            if meta is not None:
                metas.append(meta)
            for parent in parents[node]:
                if parent >= 0 and not seen[parent]:
                    seen[parent] = True
                    stack.append(int(parent))
        return metas


class _PruneContext:
    """Mode-dependent pruning callbacks for intra-bucket and message sets."""

    def __init__(self, rel: DominanceRelation, lam: float | None):
        self.rel = rel
        if isinstance(rel, EpsilonCovering):
            # Intra-bucket combinations stay exact; the epsilon budget is
            # spent once per outgoing message.
            self.intra = PARETO
            self.cover = CoveringParams(rel.epsilon, lam if lam is not None else rel.lam)
        else:
            self.intra = rel
            self.cover = None

    def prune(self, vals: np.ndarray, ids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        keep = dedup_rows(vals)
        if len(keep) < len(vals):
            vals, ids = vals[keep], ids[keep]
        keep = maximal_rows(self.intra.transform(vals))
        if len(keep) < len(vals):
            vals, ids = vals[keep], ids[keep]
        return vals, ids

    def finalize(self, cell: _Cell) -> _Cell:
        if self.cover is None:
            return cell
        keep = covering_indices(cell.vals, self.cover)
        if len(keep) == len(cell.vals):
            return cell
        return _Cell(cell.vals[keep], cell.ids[keep])


def _mink_prune(a: _Cell, b: _Cell, ctx: _PruneContext, prov: _Provenance) -> _Cell:
    """Minkowski sum of two cells, pruned, with pair provenance for survivors."""
    n, m = len(a.vals), len(b.vals)
    if n * m <= _SUM_CHUNK_ROWS:
        sums = minkowski_sum_rows(a.vals, b.vals)
        keep = dedup_rows(sums)
        keep = keep[maximal_rows(ctx.intra.transform(sums[keep]))]
        vals = sums[keep]
        ids = prov.pairs(a.ids[keep // m], b.ids[keep % m])
        return _Cell(vals, ids)
    # Chunked variant for oversized products: prune per chunk, then merge.
    step = max(1, _SUM_CHUNK_ROWS // m)
    parts: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []
    for start in range(0, n, step):
        sub = a.vals[start : start + step]
        sums = minkowski_sum_rows(sub, b.vals)
        keep = dedup_rows(sums)
        keep = keep[maximal_rows(ctx.intra.transform(sums[keep]))]
        parts.append((sums[keep], a.ids[start + keep // m], b.ids[keep % m]))
    vals = np.concatenate([p[0] for p in parts])
    left = np.concatenate([p[1] for p in parts])
    right = np.concatenate([p[2] for p in parts])
    keep = dedup_rows(vals)
    keep = keep[maximal_rows(ctx.intra.transform(vals[keep]))]
    ids = prov.pairs(left[keep], right[keep])
    return _Cell(vals[keep], ids)


# ---------------------------------------------------------------------------
# The elimination engine
# ---------------------------------------------------------------------------


class _Elimination:
    def __init__(
        self,
        d: InfluenceDiagram,
        rel: DominanceRelation,
        limits: SolverLimits | None,
        seed: int,
    ):
        self.d = d
        self.rel = rel
        self.limits = limits or SolverLimits()
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.tau = legal_elimination_order(d)
        self.width = induced_width(d, self.tau)
        self.pos = {v: i for i, v in enumerate(self.tau.order)}
        self.var_ids = list(self.tau.order)
        self.sizes = [d.var(v).size for v in self.var_ids]
        self.kinds = [d.var(v).kind for v in self.var_ids]
        self.p = d.p
        self.prov = _Provenance()
        lam = 1.0 / max(1, len(self.var_ids)) if isinstance(rel, EpsilonCovering) else None
        self.ctx = _PruneContext(rel, lam)
        self.trace: list[int] = []
        # Per decision: message scope/shape, and admissible values per cell.
        self.decision_scopes: dict[int, tuple[tuple[int, ...], tuple[int, ...]]] = {}
        self.decision_admissible: dict[int, dict[int, tuple[int, ...]]] = {}
        self.deadline = (
            time.perf_counter() + self.limits.time_limit if self.limits.time_limit else None
        )

    # -- setup ------------------------------------------------------------

    def _check_time(self):
        if self.deadline is not None and time.perf_counter() > self.deadline:
            raise _LimitExceeded("time_limit")

    def _check_memory(self, buckets):
        if self.limits.memory_limit is None:
            return
        live = self.prov.nbytes()
        for bucket_probs, bucket_utils in buckets:
            live += sum(f.table.nbytes for f in bucket_probs)
            live += sum(f.nbytes() for f in bucket_utils)
        if live > self.limits.memory_limit:
            raise _LimitExceeded("memory_limit")

    def _initial_buckets(self):
        buckets = [([], []) for _ in self.var_ids]
        for cpt in self.d.cpts:
            scope_ids = (*cpt.parents, cpt.target)
            scope = tuple(sorted(self.pos[v] for v in scope_ids))
            shape_orig = tuple(self.d.var(v).size for v in scope_ids)
            table = cpt.as_array(shape_orig)
            perm = sorted(range(len(scope_ids)), key=lambda i: self.pos[scope_ids[i]])
            table = np.transpose(table, perm)
            buckets[scope[0]][0].append(_ProbFactor(scope, table))
        for util in self.d.utilities:
            if not util.scope:
                continue
            scope = tuple(sorted(self.pos[v] for v in util.scope))
            shape_orig = tuple(self.d.var(v).size for v in util.scope)
            table = util.as_array(shape_orig)
            perm = sorted(range(len(util.scope)), key=lambda i: self.pos[util.scope[i]])
            table = np.transpose(table, tuple(perm) + (len(util.scope),))
            shape = tuple(self.sizes[i] for i in scope)
            cells = {}
            for config in np.ndindex(shape):
                vec = table[config].reshape(1, self.p)
                cells[config] = _Cell(vec.astype(np.float64), self.prov.leaves(1))
            buckets[scope[0]][1].append(_SetFactor(scope, shape, cells))
        self.root_utils: list[_Cell] = []
        for util in self.d.utilities:
            if util.scope:
                continue
            vec = np.array(util.entries, dtype=np.float64).reshape(1, self.p)
            self.root_utils.append(_Cell(vec, self.prov.leaves(1)))
        self.root_prob = 1.0
        return buckets

    # -- per-bucket computation --------------------------------------------

    def _zero_cell(self) -> _Cell:
        return _Cell(np.zeros((1, self.p)), self.prov.leaves(1))

    def _combine_utils(
        self, factors: Sequence[_SetFactor], config_of: dict[int, int]
    ) -> _Cell | None:
        cells = []
        for f in factors:
            cfg = tuple(config_of[i] for i in f.scope)
            cells.append(f.cells[cfg])
        if not cells:
            return None
        cells.sort(key=lambda c: len(c.vals))
        out = cells[0]
        for other in cells[1:]:
            out = _mink_prune(out, other, self.ctx, self.prov)
        return out

    def _prob_product(self, factors: Sequence[_ProbFactor], scope: tuple[int, ...]) -> np.ndarray:
        """Product of probability factors, broadcast over the combined scope."""
        shape = tuple(self.sizes[i] for i in scope)
        out = np.ones(shape)
        for f in factors:
            # Factor scopes are ascending like the combined scope, so axes
            # already line up; stretch with singleton axes for missing vars.
            full = [1] * len(scope)
            for axis, i in enumerate(f.scope):
                full[scope.index(i)] = f.table.shape[axis]
            out = out * f.table.reshape(full)
        return out

    def _process(self):
        buckets = self._initial_buckets()
        for l, var in enumerate(self.var_ids):
            probs, utils = buckets[l]
            if not probs and not utils:
                self.trace.append(0)
                continue
            scope_all = tuple(
                sorted(set().union(*[f.scope for f in probs + utils]))
            )
            msg_scope = tuple(i for i in scope_all if i != l)
            msg_shape = tuple(self.sizes[i] for i in msg_scope)
            k = self.sizes[l]

            prob_scope = tuple(sorted(set().union(*[f.scope for f in probs]))) if probs else ()
            prob_table = self._prob_product(probs, prob_scope) if probs else None

            if self.kinds[l] == "decision":
                phi_msg, psi = self._decision_bucket(
                    l, probs, utils, prob_scope, prob_table, msg_scope, msg_shape, k
                )
            else:
                phi_msg, psi = self._chance_bucket(
                    l, probs, utils, prob_scope, prob_table, msg_scope, msg_shape, k
                )

            self.trace.append(max((len(c.vals) for c in psi.values()), default=0) if psi is not None else 0)

            if phi_msg is not None:
                phi_scope = tuple(i for i in prob_scope if i != l)
                self._place_prob(buckets, phi_scope, phi_msg)
            if psi is not None:
                self._place_util(buckets, msg_scope, msg_shape, psi)
            buckets[l] = ([], [])
            self._check_time()
            self._check_memory(buckets)

    def _chance_bucket(self, l, probs, utils, prob_scope, prob_table, msg_scope, msg_shape, k):
        # phi message: sum the probability product over the owner's axis.
        phi_msg = None
        phi_reduced = None
        if prob_table is not None:
            axis = prob_scope.index(l)
            phi_reduced = prob_table.sum(axis=axis)
            phi_msg = phi_reduced
        psi = None
        if utils:
            psi = {}
            prob_positions = [msg_scope.index(i) for i in prob_scope if i != l] if probs else []
            for config in np.ndindex(msg_shape):
                self._check_time()
                config_of = dict(zip(msg_scope, config))
                acc = None
                norm = 0.0
                for y in range(k):
                    config_of[l] = y
                    w = 1.0
                    if prob_table is not None:
                        w = float(prob_table[tuple(config_of[i] for i in prob_scope)])
                    if w == 0.0:
                        continue
                    norm += w
                    combined = self._combine_utils(utils, config_of)
                    cell = _Cell(combined.vals * w, combined.ids)
                    acc = cell if acc is None else _mink_prune(acc, cell, self.ctx, self.prov)
                if acc is None:
                    # Unreachable configuration: contributes the zero vector.
                    psi[config] = self._zero_cell()
                    continue
                if prob_table is not None and norm > 0:
                    acc = _Cell(acc.vals / norm, acc.ids)
                psi[config] = self.ctx.finalize(acc)
        return phi_msg, psi

    def _decision_bucket(self, l, probs, utils, prob_scope, prob_table, msg_scope, msg_shape, k):
        phi_msg = None
        if prob_table is not None:
            axis = prob_scope.index(l)
            moved = np.moveaxis(prob_table, axis, -1)
            spread = moved.max(axis=-1) - moved.min(axis=-1)
            if spread.size and float(spread.max()) > DECISION_CONSTANT_TOL:
                raise DecisionInvariantError(
                    f"probability product in the bucket of {self.var_ids[l]!r} varies with "
                    f"the decision by {float(spread.max()):.3g}"
                )
            phi_msg = moved.max(axis=-1)
        psi = None
        admissible: dict[int, tuple[int, ...]] = {}
        if utils:
            psi = {}
            for config in np.ndindex(msg_shape):
                self._check_time()
                config_of = dict(zip(msg_scope, config))
                branch_vals = []
                branch_ids = []
                branch_choice = []
                for y in range(k):
                    config_of[l] = y
                    combined = self._combine_utils(utils, config_of)
                    branch_vals.append(combined.vals)
                    branch_ids.append(combined.ids)
                    branch_choice.append(np.full(len(combined.vals), y, dtype=np.int64))
                vals = np.concatenate(branch_vals)
                ids = np.concatenate(branch_ids)
                choices = np.concatenate(branch_choice)
                keep = dedup_rows(vals)
                keep = keep[maximal_rows(self.ctx.intra.transform(vals[keep]))]
                cell_code = int(np.ravel_multi_index(config, msg_shape)) if msg_scope else 0
                wrapped = self.prov.wraps(ids[keep], l, cell_code, choices[keep])
                cell = _Cell(vals[keep], wrapped)
                admissible[cell_code] = tuple(sorted(set(int(c) for c in choices[keep])))
                psi[config] = self.ctx.finalize(cell)
        self.decision_scopes[l] = (msg_scope, msg_shape)
        self.decision_admissible[l] = admissible
        return phi_msg, psi

    def _place_prob(self, buckets, scope, table):
        if not scope:
            self.root_prob *= float(table)
            return
        buckets[scope[0]][0].append(_ProbFactor(scope, table))

    def _place_util(self, buckets, scope, shape, cells):
        factor = _SetFactor(scope, shape, cells)
        if not scope:
            self.root_utils.append(cells[()])
            return
        buckets[scope[0]][1].append(factor)

    def _root_set(self) -> _Cell:
        if not self.root_utils:
            return self._zero_cell()
        cells = sorted(self.root_utils, key=lambda c: len(c.vals))
        out = cells[0]
        for other in cells[1:]:
            out = _mink_prune(out, other, self.ctx, self.prov)
        if self.root_prob != 1.0:
            out = _Cell(out.vals * self.root_prob, out.ids)
        return out

    # -- public entry ------------------------------------------------------

    def run(self) -> "_Elimination":
        self._process()
        root = self._root_set()
        # Canonical descending order keeps reports deterministic.
        order = np.lexsort(tuple(root.vals[:, j] for j in range(self.p - 1, -1, -1)))[::-1]
        self.final = _Cell(root.vals[order], root.ids[order])
        return self

    # -- policy extraction ---------------------------------------------------

    def policy_for(self, root_id: int) -> Policy:
        """Trace one final vector's derivation into a total policy."""
        metas = self.prov.ancestors_meta(int(root_id))
        chosen: dict[int, dict[int, int]] = {}
        for dec, cell_code, choice in metas:
            chosen.setdefault(dec, {})[cell_code] = choice
        rules = {}
        for l, var in enumerate(self.var_ids):
            if self.kinds[l] != "decision":
                continue
            rules[var] = self._build_rule(l, var, chosen.get(l, {}))
        return Policy(rules)

    def _build_rule(self, l: int, var: str, cell_choices: dict[int, int]) -> DecisionRule:
        d = self.d
        parents = d.decision_parents(var)
        parent_domains = [d.var(p).domain for p in parents]
        dom = d.var(var).domain
        msg_scope, msg_shape = self.decision_scopes.get(l, ((), ()))
        admissible = self.decision_admissible.get(l, {})
        scope_vars = [self.var_ids[i] for i in msg_scope]
        # Fill cells not visited by this derivation with a seeded choice among
        # the values that contribute to the cell's undominated set.
        fill_cache: dict[int, int] = {}

        def cell_value(code: int) -> int:
            if code in cell_choices:
                return cell_choices[code]
            if code not in fill_cache:
                options = admissible.get(code, tuple(range(len(dom))))
                fill_cache[code] = int(self.rng.choice(list(options)))
            return fill_cache[code]

        table = {}
        for config in itertools.product(*parent_domains):
            value_of = dict(zip(parents, config))
            idx = []
            for v in scope_vars:
                if v in value_of:
                    idx.append(d.var(v).domain.index(value_of[v]))
                else:
                    # Rule scope outside the declared parents (possible when
                    # information sets do not match the temporal order): fall
                    # back to the first domain value deterministically.
                    idx.append(0)
            code = int(np.ravel_multi_index(tuple(idx), msg_shape)) if msg_scope else 0
            table[config] = dom[cell_value(code)]
        return DecisionRule(var, tuple(parents), table)


# ---------------------------------------------------------------------------
# Public solver API
# ---------------------------------------------------------------------------


def _mode_string(rel: DominanceRelation) -> str:
    if isinstance(rel, EpsilonCovering):
        return f"epsilon({rel.epsilon:g})"
    if isinstance(rel, TradeoffDominance):
        return f"tradeoff(k={len(rel.theta)})"
    return rel.kind


def _check_mode_preconditions(d: InfluenceDiagram, rel: DominanceRelation) -> None:
    rel.validate_dimension(d.p)
    if isinstance(rel, EpsilonCovering):
        entries = [x for u in d.utilities for row in u.entries for x in row]
        low = min(entries) if entries else 0.0
        if low <= 0:
            raise EpsilonDomainError(
                "epsilon mode requires strictly positive utility entries; "
                f"the minimum entry is {low:g}. Rescale the utilities to a positive "
                "range before solving (an automatic shift would change what the "
                "multiplicative guarantee means)."
            )
    if isinstance(rel, TradeoffDominance) and not check_consistency(rel.theta):
        raise ValueError("tradeoff set is inconsistent: its cone contains a strictly negative vector")


def solve(
    d: InfluenceDiagram,
    rel: DominanceRelation = PARETO,
    limits: SolverLimits | None = None,
    seed: int = 0,
) -> SolveReport:
    """Compute the maximal expected-utility set and one optimal policy.

    Returns a report with utilities in the user's declared senses. On hitting
    a time or memory limit the report is marked unsolved and carries no
    utilities or policy.
    """
    _check_mode_preconditions(d, rel)
    start = time.perf_counter()
    engine = _Elimination(d, rel, limits, seed)
    try:
        engine.run()
    except _LimitExceeded as exc:
        return SolveReport(
            maximal_utilities=None,
            policy=None,
            induced_width=engine.width,
            wall_time=time.perf_counter() - start,
            set_size_trace=tuple(engine.trace),
            mode=_mode_string(rel),
            seed=seed,
            solved=False,
            failure_reason=exc.reason,
        )
    vectors = tuple(UtilityVector(d.to_user_sense(row)) for row in engine.final.vals)
    utilities = UtilitySet(vectors, dominance_tag=rel.tag)
    policy = engine.policy_for(engine.final.ids[0])
    return SolveReport(
        maximal_utilities=utilities,
        policy=policy,
        induced_width=engine.width,
        wall_time=time.perf_counter() - start,
        set_size_trace=tuple(engine.trace),
        mode=_mode_string(rel),
        seed=seed,
    )


def extract_all_optimal_policies(
    d: InfluenceDiagram,
    rel: DominanceRelation = PARETO,
    limits: SolverLimits | None = None,
    seed: int = 0,
) -> list[tuple[UtilityVector, Policy]]:
    """One witness policy per element of the maximal expected-utility set.

    Each witness is recovered by tracing that vector's derivation through the
    decision buckets. Intended for small diagrams.
    """
    _check_mode_preconditions(d, rel)
    engine = _Elimination(d, rel, limits, seed).run()
    out = []
    for row, rid in zip(engine.final.vals, engine.final.ids):
        vec = UtilityVector(d.to_user_sense(row))
        out.append((vec, engine.policy_for(int(rid))))
    return out


# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------


def policy_count(d: InfluenceDiagram) -> int:
    """Number of distinct policies over the declared informational parents."""
    total = 1
    for dec in d.decision_ids:
        parents = d.decision_parents(dec)
        configs = 1
        for p_ in parents:
            configs *= d.var(p_).size
        total *= d.var(dec).size ** configs
    return total


@dataclass
class BruteForceResult:
    utilities: UtilitySet
    witnesses: tuple[tuple[UtilityVector, Policy], ...]
    policies_enumerated: int


def brute_force_solve(
    d: InfluenceDiagram,
    rel: DominanceRelation = PARETO,
    policy_cap: int = 10**6,
) -> BruteForceResult:
    """Enumerate every policy, score it exactly, and prune under ``rel``.

    Refuses (with the computed count) when the policy space exceeds the cap.
    The maximal set is computed directly from the scored vectors, so this is
    an oracle fully independent of the elimination engine.
    """
    rel.validate_dimension(d.p)
    count = policy_count(d)
    if count > policy_cap:
        raise PolicyCountError(count, policy_cap)

    ev = PolicyEvaluator(d)
    dec_meta = []
    for dec in d.decision_ids:
        parents = d.decision_parents(dec)
        configs = 1
        for p_ in parents:
            configs *= d.var(p_).size
        dec_meta.append((dec, parents, configs, d.var(dec).size))

    eus = np.empty((count, d.p))
    assignments: list[tuple[tuple[int, ...], ...]] = []
    spaces = [
        itertools.product(range(size), repeat=configs) for _, _, configs, size in dec_meta
    ]
    for i, combo in enumerate(itertools.product(*spaces)):
        arrays = {}
        for (dec, parents, _configs, _size), flat in zip(dec_meta, combo):
            shape = tuple(d.var(p_).size for p_ in parents)
            arrays[dec] = np.array(flat, dtype=np.int64).reshape(shape if shape else (1,))
        eu, _ = ev.evaluate_arrays(arrays)
        eus[i] = eu
        assignments.append(combo)

    internal = maximal_indices_for(eus, rel)
    vectors = []
    witnesses = []
    seen = set()
    for idx in internal:
        coords = tuple(eus[idx])
        if coords in seen:
            continue
        seen.add(coords)
        vec = UtilityVector(d.to_user_sense(coords))
        vectors.append(vec)
        witnesses.append((vec, _policy_from_combo(d, dec_meta, assignments[idx])))
    return BruteForceResult(
        utilities=UtilitySet(tuple(vectors), dominance_tag=rel.tag),
        witnesses=tuple(witnesses),
        policies_enumerated=count,
    )


def maximal_indices_for(vals: np.ndarray, rel: DominanceRelation) -> np.ndarray:
    """Maximal-set indices under ``rel``, decided by the per-pair linear program
    in tradeoff mode so the oracle does not share the solver's dual-ray
    pruning shortcut.

    The Pareto pre-prune keeps the pairwise pass affordable. Under a cone that
    collapses two objectives it can swap a survivor for a cone-equivalent one;
    oracle comparisons are made up to convex equivalence, where that is
    immaterial.
    """
    if isinstance(rel, TradeoffDominance):
        keep = dedup_rows(vals)
        keep = keep[maximal_rows(vals[keep])]
        survivors = []
        for i in keep:
            u = UtilityVector(tuple(vals[i]))
            dominated = False
            for j in keep:
                if i == j:
                    continue
                v = UtilityVector(tuple(vals[j]))
                if tradeoff_dominates(v, u, rel.theta) and not tradeoff_dominates(u, v, rel.theta):
                    dominated = True
                    break
            if not dominated:
                survivors.append(i)
        return np.array(survivors, dtype=np.int64)
    return rel.maximal_indices(vals)


def _policy_from_combo(d: InfluenceDiagram, dec_meta, combo) -> Policy:
    rules = {}
    for (dec, parents, _configs, _size), flat in zip(dec_meta, combo):
        domains = [d.var(p_).domain for p_ in parents]
        dom = d.var(dec).domain
        table = {}
        for idx, config in enumerate(itertools.product(*domains)):
            table[config] = dom[flat[idx]]
        rules[dec] = DecisionRule(dec, tuple(parents), table)
    return Policy(rules)
