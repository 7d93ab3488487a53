"""Shared generators for randomized cross-checks."""

from __future__ import annotations

import random

from secindex import DiGraph, MeasurementPlacement, PowerNetwork, build_h, is_observable

REACTANCE_CHOICES = (0.25, 0.5, 1.0, 1.0, 2.0)


def random_digraph(rng: random.Random, nodes=8, edges=16, max_cap=10) -> DiGraph:
    out = []
    for _ in range(edges):
        u = rng.randrange(nodes)
        v = rng.randrange(nodes)
        while v == u:
            v = rng.randrange(nodes)
        out.append((u, v, rng.randint(0, max_cap)))
    return DiGraph(node_count=nodes, edges=tuple(out))


def brute_force_min_cut_value(g: DiGraph, source: int, sink: int) -> int:
    free = [i for i in range(g.node_count) if i not in (source, sink)]
    best = None
    for mask in range(1 << len(free)):
        side = {source}
        for j, node in enumerate(free):
            if (mask >> j) & 1:
                side.add(node)
        value = sum(c for (u, v, c) in g.edges if u in side and v not in side)
        if best is None or value < best:
            best = value
    return best


def random_network(rng: random.Random, min_buses=4, max_buses=10, max_lines=15) -> PowerNetwork:
    n = rng.randint(min_buses, max_buses)
    lines = []
    order = list(range(n))
    rng.shuffle(order)
    for i in range(1, n):
        lines.append((order[i], order[rng.randrange(i)], rng.choice(REACTANCE_CHOICES)))
    budget = min(max_lines - (n - 1), n)
    extra = rng.randint(0, max(budget, 0))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    rng.shuffle(pairs)
    for u, v in pairs[:extra]:
        lines.append((u, v, rng.choice(REACTANCE_CHOICES)))
    return PowerNetwork(bus_count=n, lines=tuple(lines))


def random_placement(rng: random.Random, net: PowerNetwork, density=0.5) -> MeasurementPlacement:
    m = net.line_count
    return MeasurementPlacement(
        flow_from=tuple(i for i in range(m) if rng.random() < density),
        flow_to=tuple(i for i in range(m) if rng.random() < density),
        injection=tuple(b for b in range(net.bus_count) if rng.random() < density),
    )


def random_observable_case(rng: random.Random, **kwargs):
    """Keep drawing (network, placement) pairs until observable."""
    while True:
        net = random_network(rng, **kwargs)
        meas = random_placement(rng, net)
        if meas.measurement_count == 0:
            continue
        model = build_h(net, meas)
        if is_observable(model):
            return net, meas, model
