"""Labelled control-flow graphs, slice graphs and least slices.

Atomic instructions are single nodes.  A branch, choice or loop contributes an
opening and a closing node (``bif``/``fib``, ``pif``/``fip``, ``don``/``od``)
with its sub-regions embedded between them; loops have no back edge, so the
graph is a DAG.  An edge is labelled with the tuple of expectations that hold
at that point, one per local specification of its region.

A slice graph adds one shortcut edge per removable span, and a fresh ``skip``
node for each region that may be removed as a whole.  ``min_slice`` collapses
each innermost opening/closing pair into an edge of weight ``1 + l + r``
(``l``, ``r`` the cheapest paths through the two branches; a loop has one),
then takes the cheapest start-to-end path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import networkx as nx

from .expectation import ZERO, format_expectation
from .lang.exprs import format_bool, format_fraction
from .lang.parser import Mode
from .lang.printer import format_inst
from .lang.syntax import SKIP, Cond, PChoice, Prog, While
from .slicing import (
    Removal,
    SliceResult,
    _branch,
    _mode,
    admissible,
    format_path,
    region_candidates,
    regions,
)
from .vcgen import EntailmentChecker, suffix_wpres

DEFAULT_SKIP_WEIGHT = Fraction(1, 2)

_PAIRS = {Cond: ("bif", "fib"), PChoice: ("pif", "fip"), While: ("don", "od")}
_SUBS = {Cond: ("then", "else"), PChoice: ("left", "right"), While: ("body",)}


@dataclass
class RegionInfo:
    path: tuple
    prog: Prog
    specs: tuple
    entry: int
    exit: int
    ins: list = field(default_factory=list)  # in-node per instruction
    outs: list = field(default_factory=list)  # out-node per instruction
    skip: int | None = None
    loop_body: bool = False


class LCFG:
    """Graph over integer nodes numbered in creation order."""

    def __init__(self, p: Prog, mode: Mode):
        self.prog = p
        self.mode = mode
        self.graph = nx.DiGraph()
        self.regions: dict = {}
        self.in_node: dict = {}
        self.out_node: dict = {}
        self.start = self._node("start", "start")
        self.end = self._node("end", "end")

    def _node(self, kind, text, **attrs) -> int:
        n = self.graph.number_of_nodes()
        self.graph.add_node(n, kind=kind, text=text, **attrs)
        return n

    def _edge(self, u, v, label, weight=Fraction(1), shortcut=False, **attrs):
        self.graph.add_edge(u, v, label=tuple(label), weight=Fraction(weight), shortcut=shortcut, **attrs)

    def edges(self):
        """Edges in a deterministic order."""
        return sorted(self.graph.edges(data=True), key=lambda e: (e[0], e[1]))

    def nodes(self):
        return sorted(self.graph.nodes(data=True))

    def label(self, u, v) -> tuple:
        return self.graph.edges[u, v]["label"]


class SliceGraph(LCFG):
    def __init__(self, p, mode, skip_weight):
        super().__init__(p, mode)
        self.skip_weight = Fraction(skip_weight)

    def shortcuts(self):
        return [e for e in self.edges() if e[2]["shortcut"]]


def _build(graph: LCFG, p: Prog, f, g):
    for r in regions(p, f, g, graph.mode):
        if r.path == ():
            entry, exit_ = graph.start, graph.end
        else:
            owner = r.path[:-1]
            entry, exit_ = graph.in_node[owner], graph.out_node[owner]
        info = RegionInfo(r.path, r.prog, r.specs, entry, exit_, loop_body=r.loop_body)
        graph.regions[r.path] = info
        for j, inst in enumerate(r.prog, 1):
            here = r.path + (j,)
            pair = _PAIRS.get(type(inst))
            if pair is None:
                n = graph._node("atomic", format_inst(inst), path=here, region=r.path)
                a = b = n
            else:
                text = _head(inst)
                a = graph._node(pair[0], text, path=here, region=r.path)
                b = graph._node(pair[1], "", path=here, region=r.path)
            graph.in_node[here], graph.out_node[here] = a, b
            info.ins.append(a)
            info.outs.append(b)
        Ws = [suffix_wpres(r.prog, s.post, s.total) for s in r.specs]
        n = len(r.prog)
        chain = [entry] + [x for pair in zip(info.ins, info.outs) for x in pair] + [exit_]
        # chain = entry, in1, out1, ..., inN, outN, exit; edges out(i_{j-1}) -> in(i_j)
        for j in range(1, n + 2):
            graph._edge(chain[2 * j - 2], chain[2 * j - 1], [W[j - 1] for W in Ws], region=r.path)


def _head(inst) -> str:
    if isinstance(inst, Cond):
        return f"if ({format_bool(inst.guard)})"
    if isinstance(inst, PChoice):
        return f"[{format_fraction(inst.prob)}]"
    return f"while ({format_bool(inst.guard)})"


def build_lcfg(p: Prog, g, mode) -> LCFG:
    graph = LCFG(p, _mode(mode))
    _build(graph, p, ZERO, g)
    return graph


def build_slice_graph(
    p: Prog,
    f,
    g,
    mode,
    space,
    skip_weight=DEFAULT_SKIP_WEIGHT,
    allow_trivial_loop_slices: bool = False,
    checker=None,
) -> SliceGraph:
    mode = _mode(mode)
    graph = SliceGraph(p, mode, skip_weight)
    _build(graph, p, f, g)
    check = checker or EntailmentChecker(space)
    for path, info in graph.regions.items():
        region = _as_region(info)
        n = len(info.prog)
        Ws = [suffix_wpres(info.prog, s.post, s.total) for s in info.specs]
        for c in admissible(region, region_candidates(region, check), mode, allow_trivial_loop_slices):
            meta = dict(region=path, rule=c.rule, span=(c.j, c.k), entailments=c.entailments)
            if (c.j, c.k) == (1, n):
                post = [W[n] for W in Ws]
                info.skip = graph._node("skip", "skip", region=path)
                w = graph.skip_weight
                graph._edge(info.entry, info.skip, post, w, True, **meta)
                graph._edge(info.skip, info.exit, post, w, True, **meta)
                continue
            u = info.entry if c.j == 1 else info.outs[c.j - 2]
            v = info.exit if c.k == n else info.ins[c.k]
            graph._edge(u, v, [W[c.k] for W in Ws], 1, True, **meta)
    return graph


def _as_region(info: RegionInfo):
    from .slicing import Region

    return Region(info.path, info.prog, info.specs, info.loop_body)


# ------------------------------------------------------------------ least slice


@dataclass
class Collapse:
    """One opening/closing pair replaced by a single edge."""

    path: tuple
    branches: tuple  # cheapest weight through each sub-region
    weight: Fraction


@dataclass
class _Best:
    weight: Fraction
    nodes: tuple  # path from the region entry to its exit


def min_slice(sg: SliceGraph) -> SliceResult:
    """Least-weight slice; unpacks as ``(prog, weight)``."""
    best: dict = {}
    collapses: list = []
    # deepest regions first, so every pair inside a region is collapsed
    # before the region itself is searched
    for path in sorted(sg.regions, key=lambda q: (-len(q), q)):
        best[path] = _shortest(sg, sg.regions[path], best, collapses)
    root = best[()]
    removals: list = []
    prog = _rebuild(sg, (), best, removals)
    return SliceResult(prog, removals, root.weight, collapses=collapses)


def _pair_weight(sg, here, best):
    inst = sg.regions[here[:-1]].prog.inst(here[-1])
    subs = [best[here + (name,)].weight for name in _SUBS[type(inst)]]
    return subs, 1 + sum(subs)


def _shortest(sg: SliceGraph, info: RegionInfo, best, collapses) -> _Best:
    G = sg.graph
    # edges usable inside this region: its own CFG and shortcut edges, the
    # collapsed pairs of its compound instructions, and its skip node
    out: dict = {}
    for u, v, d in G.edges(data=True):
        if d.get("region") == info.path:
            out.setdefault(u, []).append((v, d["weight"]))
    for j, inst in enumerate(info.prog, 1):
        if type(inst) in _PAIRS:
            here = info.path + (j,)
            subs, w = _pair_weight(sg, here, best)
            collapses.append(Collapse(here, tuple(subs), w))
            out.setdefault(sg.in_node[here], []).append((sg.out_node[here], w))
    order = list(nx.topological_sort(nx.DiGraph([(u, v) for u, vs in out.items() for v, _ in vs])))
    dist: dict = {info.exit: (Fraction(0), (info.exit,))}
    for u in reversed(order):
        for v, w in out.get(u, ()):
            if v not in dist:
                continue
            cand = (w + dist[v][0], (u,) + dist[v][1])
            if u not in dist or cand < dist[u]:
                dist[u] = cand
    weight, nodes = dist[info.entry]
    return _Best(weight, nodes)


def _rebuild(sg: SliceGraph, path, best, removals) -> Prog:
    info = sg.regions[path]
    nodes = best[path].nodes
    kept = []
    insts = []
    i = 0
    while i < len(nodes) - 1:
        u, v = nodes[i], nodes[i + 1]
        data = sg.graph.nodes[v]
        edge = sg.graph.get_edge_data(u, v)
        if edge is not None and edge["shortcut"] and edge.get("region") == path:
            j, k = edge["span"]
            removed = info.prog.insts[j - 1 : k]
            removals.append(
                Removal(
                    tuple(path + (x,) for x in range(j, k + 1)),
                    path,
                    edge["rule"],
                    edge["entailments"],
                    tuple(format_inst(x) for x in removed),
                )
            )
        if data["kind"] == "skip":
            return SKIP
        if v == info.exit:
            break
        here = data["path"]
        inst = info.prog.inst(here[-1])
        kept.append(here[-1])
        if type(inst) in _PAIRS:
            subs = [_rebuild(sg, here + (name,), best, removals) for name in _SUBS[type(inst)]]
            insts.append(_with_subs(inst, subs))
            i = nodes.index(sg.out_node[here], i + 1)
        else:
            insts.append(inst)
            i += 1
    return Prog(tuple(insts)) if insts else SKIP


def _with_subs(inst, subs):
    if isinstance(inst, Cond):
        return Cond(inst.guard, subs[0], subs[1])
    if isinstance(inst, PChoice):
        return PChoice(subs[0], inst.prob, subs[1])
    return While(inst.guard, inst.invariant, inst.total, subs[0])


# ------------------------------------------------------------------ export


def _fmt_label(label: tuple) -> str:
    parts = [format_expectation(e) for e in label]
    return parts[0] if len(parts) == 1 else "(" + ", ".join(parts) + ")"


def _dot_str(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def export_dot(g: LCFG) -> str:
    lines = ["digraph slice {", "  node [shape=box, fontname=monospace];"]
    for n, d in g.nodes():
        text = d["text"] or d["kind"]
        shape = ", shape=ellipse" if d["kind"] in ("start", "end", "skip") else ""
        lines.append(f"  n{n} [label={_dot_str(text)}{shape}];")
    for u, v, d in g.edges():
        attrs = [f"label={_dot_str(_fmt_label(d['label']))}"]
        if d["weight"] != 1:
            attrs.append(f"comment={_dot_str('w=' + format_fraction(d['weight']))}")
        if d["shortcut"]:
            attrs.append("style=bold")
        lines.append(f"  n{u} -> n{v} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


JSON_VERSION = 1


def graph_json(g: LCFG) -> dict:
    nodes = []
    for n, d in g.nodes():
        item = {"id": n, "kind": d["kind"], "text": d["text"]}
        if "path" in d:
            item["path"] = format_path(d["path"])
        if "region" in d:
            item["region"] = format_path(d["region"])
        nodes.append(item)
    edges = []
    for u, v, d in g.edges():
        item = {
            "source": u,
            "target": v,
            "label": [format_expectation(e) for e in d["label"]],
            "weight": format_fraction(d["weight"]),
            "shortcut": d["shortcut"],
        }
        if d["shortcut"]:
            item["rule"] = d["rule"]
            item["removes"] = [format_path(d["region"] + (x,)) for x in range(d["span"][0], d["span"][1] + 1)]
        edges.append(item)
    return {"version": JSON_VERSION, "mode": g.mode.value, "nodes": nodes, "edges": edges}


def export_json(g: LCFG) -> str:
    return json.dumps(graph_json(g), indent=2)


__all__ = [
    "Collapse",
    "DEFAULT_SKIP_WEIGHT",
    "JSON_VERSION",
    "LCFG",
    "RegionInfo",
    "SliceGraph",
    "build_lcfg",
    "build_slice_graph",
    "export_dot",
    "export_json",
    "graph_json",
    "min_slice",
]
