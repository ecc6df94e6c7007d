"""Built-in example diagrams used by tests, demos, and documentation."""

from __future__ import annotations

from .model import InfluenceDiagram, load_diagram

# Classic oil wildcatter numbers: prior over oil content, seismic-test
# reliability per content, test cost/damage, and drilling payoff/damage.
_OIL_PRIOR = {"dry": 0.5, "wet": 0.3, "soaking": 0.2}
_SEISMIC = {  # P(S | O, T=yes); T=no routes all mass to "notest"
    "dry": {"closed": 0.1, "open": 0.3, "diffuse": 0.6},
    "wet": {"closed": 0.3, "open": 0.4, "diffuse": 0.3},
    "soaking": {"closed": 0.5, "open": 0.4, "diffuse": 0.1},
}
_TEST_UTILITY = {"yes": (-10.0, 10.0), "no": (0.0, 0.0)}
_DRILL_UTILITY = {"dry": (-70.0, 18.0), "wet": (50.0, 12.0), "soaking": (200.0, 8.0)}

_S_DOMAIN = ("closed", "open", "diffuse", "notest")
_O_DOMAIN = ("dry", "wet", "soaking")


def oil_wildcatter_document(objectives: tuple[str, ...] = ("payoff", "damage")) -> dict:
    """The oil wildcatter as a diagram document (user senses).

    Two decisions (test, drill), seismic result observed between them, oil
    content never observed. ``objectives`` selects payoff (maximized), damage
    (minimized), or both.
    """
    senses = {"payoff": "max", "damage": "min"}
    pick = [("payoff", 0), ("damage", 1)]
    pick = [(name, i) for name, i in pick if name in objectives]
    if not pick:
        raise ValueError(f"unknown objective selection {objectives}")

    seismic_rows = []
    for o in _O_DOMAIN:
        for t in ("yes", "no"):
            if t == "yes":
                row = [_SEISMIC[o]["closed"], _SEISMIC[o]["open"], _SEISMIC[o]["diffuse"], 0.0]
            else:
                row = [0.0, 0.0, 0.0, 1.0]
            seismic_rows.extend(row)

    def project(vec):
        return [vec[i] for _, i in pick]

    test_rows = [project(_TEST_UTILITY["yes"]), project(_TEST_UTILITY["no"])]
    drill_rows = []
    for o in _O_DOMAIN:
        drill_rows.append(project(_DRILL_UTILITY[o]))  # drill = yes
        drill_rows.append(project((0.0, 0.0)))  # drill = no

    return {
        "name": "oil-wildcatter" if len(pick) == 2 else "oil-wildcatter-payoff",
        "objectives": [{"name": n, "sense": senses[n]} for n, _ in pick],
        "variables": [
            {"id": "T", "kind": "decision", "domain": ["yes", "no"]},
            {"id": "S", "kind": "chance", "domain": list(_S_DOMAIN)},
            {"id": "D", "kind": "decision", "domain": ["yes", "no"]},
            {"id": "O", "kind": "chance", "domain": list(_O_DOMAIN)},
        ],
        "cpts": [
            {"target": "O", "parents": [], "table": [_OIL_PRIOR[o] for o in _O_DOMAIN]},
            {"target": "S", "parents": ["O", "T"], "table": seismic_rows},
        ],
        "utilities": [
            {"scope": ["T"], "table": test_rows},
            {"scope": ["O", "D"], "table": drill_rows},
        ],
        "decision_parents": [
            {"decision": "T", "parents": []},
            {"decision": "D", "parents": ["T", "S"]},
        ],
        "temporal_order": [
            {"chance": []},
            {"decision": "T"},
            {"chance": ["S"]},
            {"decision": "D"},
            {"chance": ["O"]},
        ],
    }


def oil_wildcatter() -> InfluenceDiagram:
    """Bi-objective oil wildcatter (maximize payoff, minimize damage)."""
    return load_diagram(oil_wildcatter_document())


def oil_wildcatter_payoff() -> InfluenceDiagram:
    """Single-objective oil wildcatter (payoff only)."""
    return load_diagram(oil_wildcatter_document(("payoff",)))


def oil_tradeoffs_document() -> dict:
    """The drilling-preference tradeoff: (50, 12) preferred to (0, 0) in user senses."""
    return {
        "senses": ["max", "min"],
        "pairs": [{"better": [50.0, 12.0], "worse": [0.0, 0.0]}],
    }
