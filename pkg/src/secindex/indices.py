"""Security indices: how many measurements an attacker must touch.

The index of a measurement is the least total measurement cost of an
unobservable corruption whose support includes that measurement. For a flow
measurement this maps onto a costly-node cut between the line's endpoints
(every line carries its meter count as an undirected cost, every metered bus
a unit charge); for an injection measurement it is the minimum over the
bus's incident lines of the same edge-constrained problem, a decomposition
that is exact whenever the binary restriction is (full measurement, or any
placement whose node charges never exceed the incident line costs). In the
remaining cases the answer is an upper approximation and the reported error
bound caps its distance from the true continuous optimum.

Two published heuristics are kept as baselines: dropping node charges from
the cut, and folding them into incident edge costs. Both report the true
objective of whatever partition they select.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import costly_cut
from .costly_cut import CostlyCutInstance, CostlyCutSolution, as_cost
from .errors import InputError, InvariantError
from .oracle import attack_cost
from .power_model import (
    FLOW_FROM,
    FLOW_TO,
    INJECTION,
    ZERO_TOL,
    AttackVector,
    MeasurementPlacement,
    ModelMatrix,
    PowerNetwork,
    attack_from_partition,
    build_h,
    check_placement,
    meter_counts,
)

METHOD_EXACT = "exact"
METHOD_IGNORE_NODES = "ignore-nodes"
METHOD_FOLD_NODES = "fold-nodes"
METHODS = (METHOD_EXACT, METHOD_IGNORE_NODES, METHOD_FOLD_NODES)


@dataclass(frozen=True)
class WeightAssignment:
    """Attack cost per line and per bus.

    Derived weights (meter count per line, indicator per metered bus) make
    the weighted objective coincide with support cardinality; custom weights
    price tampering effort instead.
    """

    edge_costs: tuple[Fraction, ...]
    node_costs: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "edge_costs", tuple(as_cost(c) for c in self.edge_costs))
        object.__setattr__(self, "node_costs", tuple(as_cost(p) for p in self.node_costs))

    @classmethod
    def from_placement(cls, net: PowerNetwork, meas: MeasurementPlacement) -> "WeightAssignment":
        c, p = meter_counts(net, meas)
        return cls(edge_costs=tuple(Fraction(x) for x in c), node_costs=tuple(Fraction(x) for x in p))

    def check(self, net: PowerNetwork) -> None:
        if len(self.edge_costs) != net.line_count or len(self.node_costs) != net.bus_count:
            raise InputError("weight vectors must match line and bus counts")


@dataclass(frozen=True)
class IndexEntry:
    """One measurement's security index with its certified attack."""

    measurement: int  # position in the global measurement order
    kind: str
    target: int  # line id for flows, bus id for injections
    index: Fraction
    exact: bool
    exact_reason: str
    error_bound: Fraction | None
    method: str
    attack: AttackVector


@dataclass(frozen=True)
class IndexReport:
    entries: tuple[IndexEntry, ...]

    def indices(self) -> tuple[Fraction, ...]:
        return tuple(e.index for e in self.entries)

    def by_measurement(self) -> dict:
        return {(e.kind, e.target): e.index for e in self.entries}


def cut_instance_for_line(
    net: PowerNetwork, weights: WeightAssignment, line: int
) -> CostlyCutInstance:
    """Symmetric costly-cut instance whose terminals are the line's endpoints.

    Every line appears in both directions with its full cost (cutting it
    pays the cost once); unmetered lines stay in the graph with cost zero
    because cutting them still charges their endpoints.
    """
    if not (0 <= line < net.line_count):
        raise InputError(f"line id {line} out of range")
    edges = []
    for (u, v, _), c in zip(net.lines, weights.edge_costs):
        edges.append((u, v, c))
        edges.append((v, u, c))
    u, v, _ = net.lines[line]
    return CostlyCutInstance(
        node_count=net.bus_count,
        edges=tuple(edges),
        node_costs=weights.node_costs,
        source=u,
        sink=v,
        symmetric=True,
    )


def binary_gap_bound(net: PowerNetwork, weights: WeightAssignment) -> Fraction:
    """Upper bound on the binary-minus-continuous optimum gap: per bus, the
    worst node charge left uncovered by some incident line cost."""
    weights.check(net)
    total = Fraction(0)
    for bus in range(net.bus_count):
        incident = net.incident_lines(bus)
        if not incident:
            continue
        worst = max(weights.node_costs[bus] - weights.edge_costs[ln] for ln in incident)
        if worst > 0:
            total += worst
    return total


def exactness_condition(
    net: PowerNetwork, meas: MeasurementPlacement, weights: WeightAssignment
):
    """Whether the binary restriction (and hence the cut pipeline) is exact,
    and which sufficient condition certifies it.

    Each clause is a property of the weights; the placement shortcuts only
    apply while the weights are the ones the placement derives, since a
    custom assignment can reopen the gap on a fully metered system.
    """
    check_placement(net, meas)
    weights.check(net)
    all_lines = set(range(net.line_count))
    derived = weights == WeightAssignment.from_placement(net, meas)
    if (
        derived
        and set(meas.flow_from) == all_lines
        and set(meas.flow_to) == all_lines
        and set(meas.injection) == set(range(net.bus_count))
    ):
        return True, "full measurement"
    metered = set(meas.flow_from) | set(meas.flow_to)
    if metered == all_lines and all(p <= 1 for p in weights.node_costs) and all(
        c >= 1 for c in weights.edge_costs
    ):
        return True, "meter on every line, node costs at most one"
    if binary_gap_bound(net, weights) == 0:
        return True, "node costs never exceed incident edge costs"
    return False, "approximation bound applies"


def _solve_line_cut(inst: CostlyCutInstance, method: str) -> CostlyCutSolution:
    if method == METHOD_EXACT:
        return costly_cut.solve(inst)
    if method == METHOD_IGNORE_NODES:
        return costly_cut.solve_ignore_nodes(inst)
    if method == METHOD_FOLD_NODES:
        return costly_cut.solve_fold_nodes(inst)
    raise InputError(f"unknown method {method!r}; expected one of {METHODS}")


class _Engine:
    """Shared state for one (network, placement, weights, method) run."""

    def __init__(self, net, meas, weights, method, model=None):
        check_placement(net, meas)
        if weights is None:
            weights = WeightAssignment.from_placement(net, meas)
        weights.check(net)
        if method not in METHODS:
            raise InputError(f"unknown method {method!r}; expected one of {METHODS}")
        self.net = net
        self.meas = meas
        self.weights = weights
        self.method = method
        self.model = model if model is not None else build_h(net, meas)
        self.exact, self.reason = exactness_condition(net, meas, weights)
        if method != METHOD_EXACT:
            self.exact, self.reason = False, "heuristic method"
        self.bound = Fraction(0) if self.exact else binary_gap_bound(net, weights)
        self._derived = weights == WeightAssignment.from_placement(net, meas)
        self._line_cache: dict[int, tuple[Fraction, AttackVector]] = {}

    def line_value(self, line: int):
        """Index value and attack for separating the endpoints of a line."""
        hit = self._line_cache.get(line)
        if hit is not None:
            return hit
        inst = cut_instance_for_line(self.net, self.weights, line)
        sol = _solve_line_cut(inst, self.method)
        dtheta = np.zeros(self.net.bus_count)
        for bus in sol.source_side:
            dtheta[bus] = 1.0
        attack = attack_from_partition(self.net, self.meas, dtheta, model=self.model)
        structural = attack_cost(
            self.net, self.weights.edge_costs, self.weights.node_costs, dtheta
        )
        if structural != sol.objective:
            raise InvariantError(
                f"cut objective {sol.objective} disagrees with attack cost {structural}"
            )
        self._line_cache[line] = (sol.objective, attack)
        return self._line_cache[line]

    def entry_for(self, kind: str, target: int) -> IndexEntry:
        if kind in (FLOW_FROM, FLOW_TO):
            value, attack = self.line_value(target)
        elif kind == INJECTION:
            value, attack = self.node_value(target)
        else:
            raise InputError(f"unknown measurement kind {kind!r}")
        k = self.meas.index_of(kind, target)
        if abs(attack.delta_z[k]) <= ZERO_TOL:
            raise InvariantError(
                f"attack for measurement {k} does not touch its own target"
            )
        if self._derived and value < 1:
            raise InvariantError("index below 1 under derived weights")
        return IndexEntry(
            measurement=k,
            kind=kind,
            target=target,
            index=value,
            exact=self.exact,
            exact_reason=self.reason,
            error_bound=(Fraction(0) if self.exact else self.bound)
            if self.method == METHOD_EXACT
            else None,
            method=self.method,
            attack=attack,
        )

    def node_value(self, bus: int):
        """Minimum over the bus's incident lines of the edge-constrained
        problem; any cut separating an incident line's endpoints flips the
        bus's injection, so the target constraint holds automatically."""
        if bus not in self.meas.injection:
            raise InputError(f"bus {bus} has no injection measurement")
        incident = self.net.incident_lines(bus)
        if not incident:
            raise InputError(f"bus {bus} has no incident lines")
        best = None
        for line in incident:
            value, attack = self.line_value(line)
            if best is None or value < best[0]:
                best = (value, attack)
        return best


def index_edge_target(
    net: PowerNetwork,
    meas: MeasurementPlacement,
    weights: WeightAssignment | None,
    line: int,
    end: str = FLOW_FROM,
    method: str = METHOD_EXACT,
    model: ModelMatrix | None = None,
) -> IndexEntry:
    """Security index of a single flow measurement (given line and end)."""
    if end not in (FLOW_FROM, FLOW_TO):
        raise InputError(f"end must be {FLOW_FROM!r} or {FLOW_TO!r}")
    metered = meas.flow_from if end == FLOW_FROM else meas.flow_to
    if line not in metered:
        raise InputError(f"line {line} is not metered at the {end} end")
    engine = _Engine(net, meas, weights, method, model)
    return engine.entry_for(end, line)


def index_node_target(
    net: PowerNetwork,
    meas: MeasurementPlacement,
    weights: WeightAssignment | None,
    bus: int,
    method: str = METHOD_EXACT,
    model: ModelMatrix | None = None,
) -> IndexEntry:
    """Security index of a single injection measurement."""
    engine = _Engine(net, meas, weights, method, model)
    return engine.entry_for(INJECTION, bus)


def index_all(
    net: PowerNetwork,
    meas: MeasurementPlacement,
    weights: WeightAssignment | None = None,
    method: str = METHOD_EXACT,
    model: ModelMatrix | None = None,
) -> IndexReport:
    """One index per measurement, in the global measurement order."""
    engine = _Engine(net, meas, weights, method, model)
    entries = tuple(engine.entry_for(kind, target) for kind, target in meas.ordering())
    return IndexReport(entries=entries)


def baseline_ignore_nodes(net, meas, weights=None, model=None) -> IndexReport:
    return index_all(net, meas, weights, method=METHOD_IGNORE_NODES, model=model)


def baseline_fold_nodes(net, meas, weights=None, model=None) -> IndexReport:
    return index_all(net, meas, weights, method=METHOD_FOLD_NODES, model=model)
