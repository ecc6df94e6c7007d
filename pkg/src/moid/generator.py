"""Random instance generation: diagrams and tradeoff sets.

Two diagram families are produced:

* ``generate_moid`` builds benchmark instances: a random total variable
  order, r roots, each remaining variable drawing its parents uniformly from
  its predecessors, decisions connected along a directed path, one utility
  function per decision, and temporal blocks read off the variable order.

* ``generate_recall_moid`` builds instances whose declared information sets
  match the temporal order exactly (every decision observes the full earlier
  history). Only on such instances does the elimination solver optimize over
  the same policy space the brute-force oracle enumerates, which makes them
  the right family for oracle-equivalence checking. The observed-history
  budget is chosen so the policy space stays below the brute-force cap.

  Each decision also carries a utility function over its full history. That
  keeps the decision's bucket conditioned on everything it observes, so the
  computed maximal sets contain every maximal policy value elementwise rather
  than only up to convex equivalence: without it, a decision whose factors
  never mention an observed variable is collapsed to one unconditional
  choice, and the mixtures obtained by varying the choice across observation
  branches survive only as convex combinations of the output.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .dominance import TradeoffSet, check_consistency
from .model import (
    InfluenceDiagram,
    ProbabilityTable,
    TemporalOrder,
    UtilityFunction,
    Variable,
    validate_diagram,
)
from .vectors import UtilityVector

#: Fraction of chance variables given deterministic (0/1) tables, rounded down.
DETERMINISTIC_CPT_FRACTION = 0.25

#: Utility entries are integers drawn uniformly from this inclusive range.
UTILITY_RANGE = (1, 30)


class InfeasibleParamsError(ValueError):
    pass


class TradeoffGenerationError(RuntimeError):
    """100 consecutive draws produced inconsistent tradeoff sets."""


@dataclass(frozen=True)
class MoidParams:
    """Benchmark family parameters <C, D, k, p, r, a, O>."""

    chance: int  # C
    decisions: int  # D
    max_domain: int  # k
    parents: int  # p
    roots: int  # r
    utility_arity: int  # a
    objectives: int  # O
    seed: int = 0

    def __post_init__(self):
        if self.chance < 0 or self.decisions < 0 or self.chance + self.decisions == 0:
            raise InfeasibleParamsError("need at least one variable")
        if self.roots > self.chance + self.decisions:
            raise InfeasibleParamsError(
                f"r={self.roots} exceeds the {self.chance + self.decisions} variables"
            )
        if self.max_domain < 2:
            raise InfeasibleParamsError("max domain size k must be at least 2")
        if self.parents < 1:
            raise InfeasibleParamsError("parent count p must be at least 1")
        if self.objectives < 1:
            raise InfeasibleParamsError("objective count O must be at least 1")

    @classmethod
    def from_string(cls, text: str, seed: int = 0) -> "MoidParams":
        parts = [int(x) for x in text.split(",")]
        if len(parts) != 7:
            raise InfeasibleParamsError(f"expected 'C,D,k,p,r,a,O', got {text!r}")
        return cls(*parts, seed=seed)

    def label(self) -> str:
        return (
            f"{self.chance},{self.decisions},{self.max_domain},{self.parents},"
            f"{self.roots},{self.utility_arity},{self.objectives}"
        )


def _reachable(arcs: dict[str, list[str]], src: str, dst: str) -> bool:
    stack, seen = [src], {src}
    while stack:
        u = stack.pop()
        if u == dst:
            return True
        for w in arcs.get(u, ()):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return False


def _build_diagram(
    name: str,
    rng: np.random.Generator,
    order: list[tuple[str, str]],  # (id, kind) in temporal order
    parent_map: dict[str, list[str]],
    domains: dict[str, tuple[str, ...]],
    utility_scopes: list[list[str]],
    objectives: int,
) -> InfluenceDiagram:
    chance_ids = [vid for vid, kind in order if kind == "chance"]

    n_det = int(DETERMINISTIC_CPT_FRACTION * len(chance_ids))
    det_ids = set(rng.choice(chance_ids, size=n_det, replace=False)) if n_det else set()

    cpts = []
    for vid in chance_ids:
        parents = parent_map[vid]
        tsize = len(domains[vid])
        n_rows = int(np.prod([len(domains[q]) for q in parents])) if parents else 1
        if vid in det_ids:
            table = np.zeros((n_rows, tsize))
            hot = rng.integers(0, tsize, size=n_rows)
            table[np.arange(n_rows), hot] = 1.0
        else:
            table = rng.uniform(size=(n_rows, tsize))
            table /= table.sum(axis=1, keepdims=True)
        cpts.append(ProbabilityTable(vid, tuple(parents), tuple(table.reshape(-1))))

    lo, hi = UTILITY_RANGE
    utilities = []
    for scope in utility_scopes:
        n_rows = int(np.prod([len(domains[q]) for q in scope])) if scope else 1
        entries = rng.integers(lo, hi + 1, size=(n_rows, objectives)).astype(float)
        utilities.append(UtilityFunction(tuple(scope), tuple(map(tuple, entries))))

    blocks: list[tuple[str, object]] = []
    pending: list[str] = []
    for vid, kind in order:
        if kind == "decision":
            blocks.append(("chance", tuple(pending)))
            pending = []
            blocks.append(("decision", vid))
        else:
            pending.append(vid)
    blocks.append(("chance", tuple(pending)))

    variables = tuple(Variable(vid, kind, domains[vid]) for vid, kind in order)
    decision_arcs = tuple(
        (vid, tuple(parent_map[vid])) for vid, kind in order if kind == "decision"
    )
    diagram = InfluenceDiagram(
        name=name,
        objectives=tuple((f"obj{i}", "max") for i in range(objectives)),
        variables=variables,
        cpts=tuple(cpts),
        utilities=tuple(utilities),
        temporal=TemporalOrder(tuple(blocks)),
        decision_arcs=decision_arcs,
    )
    problems = validate_diagram(diagram)
    if problems:
        raise AssertionError(f"generator produced an invalid diagram: {problems}")
    return diagram


def generate_moid(params: MoidParams) -> InfluenceDiagram:
    """A random benchmark instance; deterministic for a fixed seed."""
    rng = np.random.default_rng(params.seed)
    n = params.chance + params.decisions
    kinds = ["chance"] * params.chance + ["decision"] * params.decisions
    rng.shuffle(kinds)
    order = [(f"v{i:03d}", kinds[i]) for i in range(n)]
    ids = [vid for vid, _ in order]

    domains = {
        vid: tuple(f"s{j}" for j in range(int(rng.integers(2, params.max_domain + 1))))
        for vid in ids
    }

    non_roots = set(rng.choice(ids, size=n - params.roots, replace=False)) if n > params.roots else set()
    parent_map: dict[str, list[str]] = {vid: [] for vid in ids}
    for i, vid in enumerate(ids):
        if vid not in non_roots or i == 0:
            continue
        n_parents = min(params.parents, i)
        picks = rng.choice(i, size=n_parents, replace=False)
        parent_map[vid] = [ids[j] for j in sorted(picks)]

    # Connect consecutive decisions by a directed path, adding an arc when the
    # random parent draws left a pair unconnected. The added arc occupies a
    # free parent slot when one exists and exceeds the budget otherwise.
    decisions = [vid for vid, kind in order if kind == "decision"]
    arcs = {vid: [] for vid in ids}
    for child, parents in parent_map.items():
        for q in parents:
            arcs[q].append(child)
    for a, b in zip(decisions, decisions[1:]):
        if not _reachable(arcs, a, b):
            parent_map[b].append(a)
            arcs[a].append(b)

    pool = ids
    utility_scopes = []
    for _ in range(params.decisions):
        arity = min(params.utility_arity, len(pool))
        picks = rng.choice(len(pool), size=arity, replace=False)
        utility_scopes.append([pool[j] for j in sorted(picks)])

    return _build_diagram(
        f"moid-{params.label()}-seed{params.seed}",
        rng,
        order,
        parent_map,
        domains,
        utility_scopes,
        params.objectives,
    )


def generate_recall_moid(params: MoidParams, policy_cap: int = 10**6) -> InfluenceDiagram:
    """A random instance with perfect-recall information sets.

    Decisions observe the complete earlier history (all earlier decisions and
    every observed chance variable); the number of observed chance variables
    is the largest that keeps the policy space within ``policy_cap``. All
    remaining chance variables are unobserved and sit in the final temporal
    block. Utility entries stay strictly positive, so these instances are
    valid in every solve mode.
    """
    rng = np.random.default_rng(params.seed)
    n = params.chance + params.decisions

    def layout(n_obs: int) -> list[str]:
        # One observation directly before each decision while they last;
        # any extra observed variables open the order (all decisions see them).
        kinds = ["chance"] * max(0, n_obs - params.decisions)
        left = min(n_obs, params.decisions)
        for j in range(params.decisions):
            if j < left:
                kinds.append("chance")
            kinds.append("decision")
        return kinds

    def space(n_obs: int) -> int:
        total, history = 1, 0
        for kind in layout(n_obs):
            if kind == "chance":
                history += 1
                continue
            total *= params.max_domain ** (params.max_domain**history)
            history += 1
            if total > policy_cap:
                return total
        return total

    n_obs = 0
    while n_obs < params.chance and space(n_obs + 1) <= policy_cap:
        n_obs += 1

    order: list[tuple[str, str]] = []
    obs_ids = []
    for i, kind in enumerate(layout(n_obs) + ["chance"] * (params.chance - n_obs)):
        vid = f"v{i:03d}"
        order.append((vid, kind))
        if kind == "chance" and len(obs_ids) < n_obs:
            obs_ids.append(vid)
    ids = [vid for vid, _ in order]

    domains = {
        vid: tuple(f"s{j}" for j in range(int(rng.integers(2, params.max_domain + 1))))
        for vid in ids
    }

    parent_map: dict[str, list[str]] = {vid: [] for vid in ids}
    history: list[str] = []
    dec_history: dict[str, list[str]] = {}
    for vid, kind in order:
        if kind == "decision":
            parent_map[vid] = list(history)
            dec_history[vid] = list(history)
            history.append(vid)
        elif vid in obs_ids:
            history.append(vid)
    # Chance parents: uniform draws from predecessors, as in the benchmark family.
    n_roots = min(params.roots, n)
    non_roots = set(rng.choice(ids, size=n - n_roots, replace=False)) if n > n_roots else set()
    for i, (vid, kind) in enumerate(order):
        if kind != "chance" or vid not in non_roots or i == 0:
            continue
        n_parents = min(params.parents, i)
        picks = rng.choice(i, size=n_parents, replace=False)
        parent_map[vid] = [ids[j] for j in sorted(picks)]

    # One full-history utility per decision (see the module docstring), plus a
    # random latent-chance utility so the unobserved structure matters too.
    utility_scopes = [hist + [dec] for dec, hist in dec_history.items()]
    latent = [vid for vid, kind in order if kind == "chance" and vid not in obs_ids]
    if latent:
        arity = min(params.utility_arity, len(latent))
        picks = rng.choice(len(latent), size=arity, replace=False)
        utility_scopes.append([latent[j] for j in sorted(picks)])
    if not utility_scopes:
        utility_scopes.append(list(ids[: min(params.utility_arity, len(ids))]))

    return _build_diagram(
        f"recall-moid-{params.label()}-seed{params.seed}",
        rng,
        order,
        parent_map,
        domains,
        utility_scopes,
        params.objectives,
    )


# ---------------------------------------------------------------------------
# Random tradeoffs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TradeoffParams:
    """Random tradeoff generation parameters (K pairs, T triplets).

    For each pair of objectives (i, j): a forward preference of a*e_i over
    b*e_j, and, when the strength draw c is positive, a reverse preference of
    b*e_j over c*a*e_i. At c = 1 the two collapse objectives i and j into a
    precise exchange rate; at c = 0 the reverse preference is already implied
    by the ordering and is omitted. Each triplet (i, j, k) contributes a
    preference of a*e_i + b*e_j over c*e_k.
    """

    pairs: int  # K
    triplets: int  # T
    coeff_range: tuple[float, float] = (0.1, 1.0)
    strength_range: tuple[float, float] | None = None  # defaults to coeff_range
    seed: int = 0

    def __post_init__(self):
        if self.pairs < 0 or self.triplets < 0:
            raise ValueError("pair and triplet counts must be nonnegative")
        for rng_ in (self.coeff_range, self.strength_range or self.coeff_range):
            lo, hi = rng_
            if not (0 <= lo <= hi <= 1):
                raise ValueError(f"coefficient range {rng_} must lie within [0, 1]")


def _unit(i: int, scale: float, p: int) -> UtilityVector:
    coords = [0.0] * p
    coords[i] = scale
    return UtilityVector(tuple(coords))


def generate_tradeoffs(params: TradeoffParams, p: int, max_attempts: int = 100) -> TradeoffSet:
    """A consistent random tradeoff set over p objectives.

    Draws are repeated (fresh coefficients and objective picks) until the
    consistency check passes, up to ``max_attempts``.
    """
    if params.pairs > 0 and p < 2:
        raise ValueError("pairwise tradeoffs need at least 2 objectives")
    if params.triplets > 0 and p < 3:
        raise ValueError("3-way tradeoffs need at least 3 objectives")
    rng = np.random.default_rng(params.seed)
    lo, hi = params.coeff_range
    slo, shi = params.strength_range if params.strength_range is not None else params.coeff_range

    for _ in range(max_attempts):
        pairs: list[tuple[UtilityVector, UtilityVector]] = []
        for _ in range(params.pairs):
            i, j = rng.choice(p, size=2, replace=False)
            a = float(rng.uniform(lo, hi))
            b = float(rng.uniform(lo, hi))
            c = float(rng.uniform(slo, shi))
            pairs.append((_unit(i, a, p), _unit(j, b, p)))
            if c > 0:
                pairs.append((_unit(j, b, p), _unit(i, c * a, p)))
        for _ in range(params.triplets):
            i, j, k = rng.choice(p, size=3, replace=False)
            a = float(rng.uniform(lo, hi))
            b = float(rng.uniform(lo, hi))
            c = float(rng.uniform(lo, hi))
            better = np.zeros(p)
            better[i] = a
            better[j] = b
            pairs.append((UtilityVector(tuple(better)), _unit(k, c, p)))
        theta = TradeoffSet(tuple(pairs))
        if check_consistency(theta):
            return theta
    raise TradeoffGenerationError(
        f"no consistent tradeoff set found in {max_attempts} attempts"
    )
