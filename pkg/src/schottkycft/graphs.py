"""Stable graphs, half-edges, rigidifications and the fusing surgery.

A graph has vertices, oriented edges (loops allowed) and tails.  Every edge
``e`` carries two half-edges ``+e`` and ``-e``; ``+e`` *ends* at the head of
``e`` and ``-e`` ends at its tail vertex; ``terminal(h)`` returns that vertex.
A tail ``t`` is a single half-edge ending at its boundary vertex.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import permutations
from typing import Iterable, Mapping, Sequence

from .errors import GraphError, NotComposable, NotReduced, ParseError, SurgeryError, Unsatisfiable

#: Rigidification slots, in the order used for enumeration.
SLOTS = ("0", "1", "inf")


@dataclass(frozen=True, order=True)
class HalfEdge:
    label: str
    sign: int = 1
    is_tail: bool = False

    def __neg__(self):
        if self.is_tail:
            raise GraphError(f"tail {self.label} has no opposite half-edge")
        return HalfEdge(self.label, -self.sign)

    def __str__(self):
        return self.label if self.sign > 0 else f"-{self.label}"

    @property
    def edge(self) -> str:
        return self.label


def he(token: str, graph: "StableGraph | None" = None) -> HalfEdge:
    """Parse ``"e"``, ``"-e"`` or a tail name into a :class:`HalfEdge`."""
    token = token.strip()
    if graph is not None and token in graph.tails:
        return HalfEdge(token, 1, True)
    if token.startswith("-"):
        return HalfEdge(token[1:], -1)
    return HalfEdge(token, 1)


@dataclass(frozen=True)
class StableGraph:
    """``(V, E, T)`` with orientation and numbering.

    ``edges[e] = (u, w)`` orients ``e`` from ``u`` to ``w``;
    ``tails[t] = (v, nu)``.  ``rigid`` optionally stores a rigidification as
    ``{v: {"0": h, "1": h, "inf": h}}``.
    """

    vertices: tuple
    edges: Mapping[str, tuple]
    tails: Mapping[str, tuple] = field(default_factory=dict)
    rigid: Mapping[str, Mapping[str, HalfEdge]] | None = None

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", dict(self.edges))
        object.__setattr__(self, "tails", dict(self.tails))
        labels = list(self.edges) + list(self.tails)
        if len(set(labels)) != len(labels):
            raise GraphError("edge and tail labels must be distinct")
        vs = set(self.vertices)
        for e, (u, w) in self.edges.items():
            if u not in vs or w not in vs:
                raise GraphError(f"edge {e} has unknown endpoint")
        for t, (v, _) in self.tails.items():
            if v not in vs:
                raise GraphError(f"tail {t} has unknown vertex {v}")

    # basic combinatorics --------------------------------------------------
    def half_edges(self, include_tails: bool = True) -> list:
        out = []
        for e in self.edges:
            out += [HalfEdge(e, 1), HalfEdge(e, -1)]
        if include_tails:
            out += [HalfEdge(t, 1, True) for t in self.tails]
        return out

    def terminal(self, h: HalfEdge):
        if h.is_tail:
            return self.tails[h.label][0]
        u, w = self.edges[h.label]
        return w if h.sign > 0 else u

    def start(self, h: HalfEdge):
        return self.terminal(-h)

    def is_loop(self, e) -> bool:
        if isinstance(e, HalfEdge):
            if e.is_tail:
                return False
            e = e.label
        u, w = self.edges[e]
        return u == w

    def branches(self, v) -> list:
        return [h for h in self.half_edges() if self.terminal(h) == v]

    def degree(self, v) -> int:
        return len(self.branches(v))

    def genus(self) -> int:
        if not self.is_connected():
            raise GraphError("genus is defined for connected graphs")
        return len(self.edges) - len(self.vertices) + 1

    def is_connected(self) -> bool:
        if not self.vertices:
            return False
        adj = {v: set() for v in self.vertices}
        for u, w in self.edges.values():
            adj[u].add(w)
            adj[w].add(u)
        seen = {self.vertices[0]}
        todo = [self.vertices[0]]
        while todo:
            v = todo.pop()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    todo.append(w)
        return len(seen) == len(self.vertices)

    def is_stable(self) -> bool:
        return all(self.degree(v) >= 3 for v in self.vertices)

    def is_trivalent(self) -> bool:
        return all(self.degree(v) == 3 for v in self.vertices)

    def validate(self):
        if not self.is_connected():
            raise GraphError("graph is not connected")
        bad = [v for v in self.vertices if self.degree(v) < 3]
        if bad:
            raise GraphError(f"unstable vertices {bad}")
        if self.rigid is not None:
            validate_rigidification(self, self.rigid)
        return self

    def numbering(self) -> dict:
        return {t: nu for t, (_, nu) in self.tails.items()}

    def replace(self, **kw) -> "StableGraph":
        data = dict(vertices=self.vertices, edges=self.edges, tails=self.tails, rigid=self.rigid)
        data.update(kw)
        return StableGraph(**data)

    # paths ----------------------------------------------------------------
    def is_reduced(self, path: Sequence[HalfEdge]) -> bool:
        try:
            check_path(self, path)
        except (NotReduced, NotComposable):
            return False
        return True

    def __str__(self):
        return format_graph(self)


def check_path(graph: StableGraph, path: Sequence[HalfEdge]):
    """Raise unless ``path`` is a reduced edge path."""
    for h in path:
        if h.is_tail:
            raise NotComposable(f"tail {h} cannot appear in a path")
    for a, b in zip(path, path[1:]):
        if b == -a:
            raise NotReduced(f"backtracking {a} . {b}")
        if graph.terminal(a) != graph.start(b):
            raise NotComposable(f"{a} ends at {graph.terminal(a)} but {b} starts at {graph.start(b)}")


def invert_path(path):
    return tuple(-h for h in reversed(path))


def reduce_path(path):
    out = []
    for h in path:
        if out and out[-1] == -h:
            out.pop()
        else:
            out.append(h)
    return tuple(out)


def path_str(path) -> str:
    return ".".join(str(h) for h in path) if path else "()"


# --------------------------------------------------------------------------
# Text format
# --------------------------------------------------------------------------


def parse_graph(text: str) -> StableGraph:
    """Parse the line-oriented graph format; see :func:`format_graph`."""
    vertices, edges, tails = [], {}, {}
    orient, rigid_lines = {}, []
    header = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        kind = tok[0]
        try:
            if kind == "graph":
                header = (int(tok[1]), int(tok[2]), lineno)
            elif kind == "vertex":
                if tok[1] in vertices:
                    raise ParseError(f"duplicate vertex {tok[1]}", lineno)
                vertices.append(tok[1])
            elif kind == "edge":
                if tok[1] in edges or tok[1] in tails:
                    raise ParseError(f"duplicate label {tok[1]}", lineno)
                edges[tok[1]] = (tok[2], tok[3], lineno)
            elif kind == "tail":
                if tok[1] in edges or tok[1] in tails:
                    raise ParseError(f"duplicate label {tok[1]}", lineno)
                tails[tok[1]] = (tok[2], int(tok[3]), lineno)
            elif kind == "orient":
                orient[tok[1]] = (tok[2], lineno)
            elif kind == "rigid":
                if tok[2] not in SLOTS:
                    raise ParseError(f"rigid slot must be one of {SLOTS}", lineno)
                rigid_lines.append((tok[1], tok[2], tok[3], lineno))
            else:
                raise ParseError(f"unknown directive {kind!r}", lineno)
        except (IndexError, ValueError) as exc:
            raise ParseError(f"malformed line {raw.strip()!r}", lineno) from exc
    if header is None:
        raise ParseError("missing 'graph g n' header", 1)
    vs = set(vertices)
    for name, (u, w, lineno) in edges.items():
        if u not in vs or w not in vs:
            raise ParseError(f"edge {name} has unknown endpoint", lineno)
    for name, (v, _, lineno) in tails.items():
        if v not in vs:
            raise ParseError(f"tail {name} attached to unknown vertex {v}", lineno)
    oriented = {}
    for name, (u, w, lineno) in edges.items():
        oriented[name] = (u, w)
        if name in orient:
            src, ol = orient[name]
            if u == w:
                if src not in ("first", "second"):
                    raise ParseError("loop orientation must be 'first' or 'second'", ol)
            elif src == w:
                oriented[name] = (w, u)
            elif src != u:
                raise ParseError(f"orientation vertex {src} is not an endpoint of {name}", ol)
    tails_clean = {t: (v, nu) for t, (v, nu, _) in tails.items()}
    nus = sorted(nu for _, nu in tails_clean.values())
    if nus != list(range(1, len(nus) + 1)):
        raise ParseError("tail numbering must be a bijection onto 1..n", header[2])
    graph = StableGraph(vertices, oriented, tails_clean)
    if not graph.is_connected():
        raise ParseError("graph is disconnected", header[2])
    for v in vertices:
        if graph.degree(v) < 3:
            raise ParseError(f"vertex {v} has degree {graph.degree(v)} < 3 (unstable)", header[2])
    g, n = header[0], header[1]
    if graph.genus() != g or len(tails_clean) != n:
        raise ParseError(f"header says (g, n) = ({g}, {n}) but graph has ({graph.genus()}, {len(tails_clean)})", header[2])
    if rigid_lines:
        rigid = {}
        for v, slot, token, lineno in rigid_lines:
            if v not in vs:
                raise ParseError(f"unknown vertex {v}", lineno)
            h = he(token, graph)
            if not h.is_tail and h.label not in edges:
                raise ParseError(f"unknown half-edge {token}", lineno)
            rigid.setdefault(v, {})[slot] = h
        try:
            validate_rigidification(graph, rigid, partial=True)
        except GraphError as exc:
            raise ParseError(str(exc), rigid_lines[0][3]) from exc
        graph = graph.replace(rigid=rigid)
    return graph


def format_graph(graph: StableGraph) -> str:
    lines = [f"graph {graph.genus()} {len(graph.tails)}"]
    lines += [f"vertex {v}" for v in graph.vertices]
    for e, (u, w) in graph.edges.items():
        lines.append(f"edge {e} {u} {w}")
    for t, (v, nu) in graph.tails.items():
        lines.append(f"tail {t} {v} {nu}")
    for e, (u, w) in graph.edges.items():
        lines.append(f"orient {e} {'first' if u == w else u}")
    if graph.rigid:
        for v in graph.vertices:
            for slot in SLOTS:
                h = graph.rigid.get(v, {}).get(slot)
                if h is not None:
                    lines.append(f"rigid {v} {slot} {h}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# Constructions
# --------------------------------------------------------------------------


def extension_vertex(tail: str) -> str:
    return f"{tail}~"


def extension_loop(tail: str) -> str:
    return f"{tail}~loop"


def extend_tails(graph: StableGraph) -> StableGraph:
    """Replace each tail by a bridge to a new vertex carrying a loop.

    The bridge keeps the tail's label and is oriented towards the old vertex,
    so the half-edge ``+t`` still ends where the tail did.  A rigidification
    is carried along when present.
    """
    if not graph.tails:
        return graph
    vertices = list(graph.vertices)
    edges = dict(graph.edges)
    for t, (v, _) in graph.tails.items():
        w = extension_vertex(t)
        vertices.append(w)
        edges[t] = (w, v)
        edges[extension_loop(t)] = (w, w)
    rigid = None
    if graph.rigid is not None:
        rigid = {}
        for v, tau in graph.rigid.items():
            rigid[v] = {a: HalfEdge(h.label, h.sign) for a, h in tau.items()}
        for t, (v, _) in graph.tails.items():
            taken = next((a for a, h in graph.rigid.get(v, {}).items() if h.label == t), None)
            slots = [a for a in SLOTS if a != taken] + ([taken] if taken else [])
            loop = extension_loop(t)
            rigid[extension_vertex(t)] = {
                slots[0]: HalfEdge(t, -1),
                slots[1]: HalfEdge(loop, 1),
                slots[2]: HalfEdge(loop, -1),
            }
    return StableGraph(vertices, edges, {}, rigid)


def extension_edges(graph: StableGraph) -> set:
    """Edges of ``extend_tails(graph)`` that are not edges of ``graph``."""
    out = set()
    for t in graph.tails:
        out |= {t, extension_loop(t)}
    return out


def validate_rigidification(graph: StableGraph, tau, partial: bool = False):
    """Check injectivity at each vertex and the global sign condition."""
    for v, m in tau.items():
        if v not in graph.vertices:
            raise GraphError(f"rigidification names unknown vertex {v}")
        vals = list(m.values())
        if len(set(vals)) != len(vals):
            raise GraphError(f"tau_{v} is not injective")
        for a, h in m.items():
            if a not in SLOTS:
                raise GraphError(f"bad slot {a}")
            if graph.terminal(h) != v:
                raise GraphError(f"tau_{v}({a}) = {h} does not end at {v}")
        if not partial and set(m) != set(SLOTS):
            raise GraphError(f"tau_{v} is not defined on all of 0, 1, inf")
    if not partial and set(tau) != set(graph.vertices):
        raise GraphError("rigidification must cover every vertex")
    for a in SLOTS:
        seen = {}
        for v, m in tau.items():
            h = m.get(a)
            if h is None or h.is_tail:
                continue
            if -h in seen and seen[-h] != v:
                raise GraphError(f"tau_{v}({a}) = {h} and tau_{seen[-h]}({a}) = {-h}")
            seen[h] = v
    return True


def find_rigidification(graph: StableGraph, constraints: Mapping | None = None,
                        avoid: Mapping | None = None) -> dict:
    """Complete ``constraints`` (``{v: {slot: h}}``) to a rigidification.

    ``avoid`` maps half-edges to a slot (or collection of slots) they must
    not occupy.  Depth-first
    over vertices in order; at each vertex the injective maps are tried in
    half-edge enumeration order, so the result is deterministic.
    """
    avoid = {h: {a} if isinstance(a, str) else set(a) for h, a in (avoid or {}).items()}
    constraints = {v: dict(m) for v, m in (constraints or {}).items()}
    try:
        validate_rigidification(graph, constraints, partial=True)
    except GraphError as exc:
        raise Unsatisfiable(f"constraints are inconsistent: {exc}") from exc
    order = list(graph.vertices)
    used = {a: {} for a in SLOTS}  # slot -> {half-edge: vertex}
    tau = {}

    def clashes(v, a, h):
        if a in avoid.get(h, ()):
            return True
        return not h.is_tail and -h in used[a] and used[a][-h] != v

    def assign(i):
        if i == len(order):
            return True
        v = order[i]
        fixed = constraints.get(v, {})
        br = graph.branches(v)
        free = [a for a in SLOTS if a not in fixed]
        avail = [h for h in br if h not in fixed.values()]
        for choice in permutations(avail, len(free)):
            m = dict(fixed)
            m.update(zip(free, choice))
            if any(clashes(v, a, h) for a, h in m.items()):
                continue
            for a, h in m.items():
                used[a][h] = v
            tau[v] = m
            if assign(i + 1):
                return True
            for a, h in m.items():
                del used[a][h]
            del tau[v]
        return False

    if any(graph.degree(v) < 3 for v in graph.vertices):
        raise Unsatisfiable("graph is not stable")
    if not assign(0):
        raise Unsatisfiable("no rigidification extends the constraints")
    return {v: {a: tau[v][a] for a in SLOTS} for v in order}


@dataclass(frozen=True)
class Surgery:
    """Result of resolving a 4-valent vertex."""

    prime: StableGraph
    double_prime: StableGraph
    branches: tuple  # h1..h4 as given
    new_edge: str
    invariant_edges: tuple  # E^inv
    prime_vertices: tuple  # (vertex carrying h1,h2 ; vertex carrying h3,h4)
    double_prime_vertices: tuple  # (h1,h3 ; h2,h4)


def _split_vertex(graph, v0, groups, names, new_edge):
    """Split ``v0``; ``groups[k]`` are the branches moved to ``names[k]``.

    The new edge runs from ``names[1]`` to ``names[0]``.
    """
    vertices = [v for v in graph.vertices if v != v0]
    pos = graph.vertices.index(v0)
    vertices[pos:pos] = list(names)
    edges = {}
    target = {}
    for k, grp in enumerate(groups):
        for h in grp:
            target[h] = names[k]
    for e, (u, w) in graph.edges.items():
        nu, nw = u, w
        if HalfEdge(e, 1) in target:
            nw = target[HalfEdge(e, 1)]
        if HalfEdge(e, -1) in target:
            nu = target[HalfEdge(e, -1)]
        edges[e] = (nu, nw)
    edges[new_edge] = (names[1], names[0])
    tails = {}
    for t, (v, nu) in graph.tails.items():
        h = HalfEdge(t, 1, True)
        tails[t] = (target.get(h, v), nu)
    return StableGraph(vertices, edges, tails)


def fuse_surgery(graph: StableGraph, v0, branches: Sequence[HalfEdge], new_edge: str = "e0") -> Surgery:
    """Resolve the 4-valent vertex ``v0`` in the two ways.

    ``prime`` separates ``{h1, h2}`` from ``{h3, h4}``; ``double_prime``
    separates ``{h1, h3}`` from ``{h2, h4}``.  In both the new edge is oriented
    towards the vertex carrying ``h1``.
    """
    branches = tuple(branches)
    if len(branches) != 4 or len(set(branches)) != 4:
        raise SurgeryError("need four distinct branches h1..h4")
    br = graph.branches(v0)
    if len(br) != 4:
        raise SurgeryError(f"vertex {v0} has valence {len(br)}, expected 4")
    if set(br) != set(branches):
        raise SurgeryError(f"branches {[str(h) for h in branches]} do not match those at {v0}")
    for v in graph.vertices:
        if v != v0 and graph.degree(v) != 3:
            raise SurgeryError(f"vertex {v} has valence {graph.degree(v)}, expected 3")
    if new_edge in graph.edges or new_edge in graph.tails:
        raise SurgeryError(f"label {new_edge} already used")
    h1, h2, h3, h4 = branches
    p_names = (f"{v0}:12", f"{v0}:34")
    d_names = (f"{v0}:13", f"{v0}:24")
    prime = _split_vertex(graph, v0, [(h1, h2), (h3, h4)], p_names, new_edge)
    dprime = _split_vertex(graph, v0, [(h1, h3), (h2, h4)], d_names, new_edge)
    touched = {h.label for h in branches if not h.is_tail}
    inv = tuple(e for e in graph.edges if e not in touched)
    return Surgery(prime, dprime, branches, new_edge, inv, p_names, d_names)


def contract_edge(graph: StableGraph, e: str, name=None) -> tuple:
    """Contract a non-loop edge; returns ``(graph, merged_vertex)``."""
    u, w = graph.edges[e]
    if u == w:
        raise GraphError(f"cannot contract loop {e}")
    name = name or w
    vertices = [v for v in graph.vertices if v not in (u, w)]
    pos = min(graph.vertices.index(u), graph.vertices.index(w))
    vertices.insert(pos, name)
    ren = {u: name, w: name}
    edges = {k: (ren.get(a, a), ren.get(b, b)) for k, (a, b) in graph.edges.items() if k != e}
    tails = {t: (ren.get(v, v), nu) for t, (v, nu) in graph.tails.items()}
    return StableGraph(vertices, edges, tails), name


# --------------------------------------------------------------------------
# Fundamental group
# --------------------------------------------------------------------------


def spanning_tree(graph: StableGraph, root) -> dict:
    """BFS tree: ``parent[v] = half-edge h with terminal(h) == v`` (root maps to None)."""
    parent = {root: None}
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for h in graph.half_edges(include_tails=False):
            if graph.start(h) == v and graph.terminal(h) not in parent:
                parent[graph.terminal(h)] = h
                queue.append(graph.terminal(h))
    return parent


def tree_path(parent, graph, v) -> tuple:
    """Path from the root to ``v`` inside the tree."""
    out = []
    while parent[v] is not None:
        h = parent[v]
        out.append(h)
        v = graph.start(h)
    return tuple(reversed(out))


def fundamental_group_generators(graph: StableGraph, base) -> list:
    """Free generators of ``pi_1(graph, base)``, one per non-tree edge."""
    if graph.tails:
        raise GraphError("fundamental_group_generators expects a tailless graph")
    parent = spanning_tree(graph, base)
    tree = {h.label for h in parent.values() if h is not None}
    gens = []
    for e in graph.edges:
        if e in tree:
            continue
        h = HalfEdge(e, 1)
        p = tree_path(parent, graph, graph.start(h)) + (h,) + invert_path(tree_path(parent, graph, graph.terminal(h)))
        gens.append(reduce_path(p))
    return gens


def abelianization(graph: StableGraph, path) -> list:
    vec = {e: 0 for e in graph.edges}
    for h in path:
        vec[h.label] += h.sign
    return [vec[e] for e in graph.edges]


def closed_walk(graph: StableGraph, base, suffix: Sequence[HalfEdge], prefer_cyclic: bool = False) -> tuple:
    """Shortest reduced closed walk at ``base`` ending with ``suffix``.

    With ``prefer_cyclic`` a cyclically reduced walk is returned when one
    exists.
    """
    suffix = tuple(suffix)
    check_path(graph, suffix)
    if graph.terminal(suffix[-1]) != base:
        raise NotComposable(f"suffix ends at {graph.terminal(suffix[-1])}, not at {base}")
    target = graph.start(suffix[0])
    for cyclic in ((True, False) if prefer_cyclic else (False,)):
        forbidden_first = -suffix[-1] if cyclic else None
        if target == base and (not cyclic or suffix[0] != -suffix[-1]):
            return suffix
        parent = {(base, None): None}
        queue = deque([(base, None)])
        found = None
        while queue and found is None:
            v, last = queue.popleft()
            for h in graph.half_edges(include_tails=False):
                if graph.start(h) != v or (last is not None and h == -last):
                    continue
                if last is None and h == forbidden_first:
                    continue
                state = (graph.terminal(h), h)
                if state in parent:
                    continue
                parent[state] = (v, last)
                if state[0] == target and h != -suffix[0]:
                    found = state
                    break
                queue.append(state)
        if found is not None:
            path = []
            s = found
            while parent[s] is not None:
                path.append(s[1])
                s = parent[s]
            return tuple(reversed(path)) + suffix
    raise NotComposable(f"no reduced closed walk at {base} ends with {path_str(suffix)}")


# --------------------------------------------------------------------------
# Canonical form (isomorphism testing)
# --------------------------------------------------------------------------


def _vertex_invariants(graph):
    inv = {}
    for v in graph.vertices:
        loops = sum(1 for u, w in graph.edges.values() if u == w == v)
        tails = sum(1 for (t, _) in graph.tails.values() if t == v)
        inv[v] = (graph.degree(v), loops, tails)
    return inv


def _refine(graph, colors):
    adj = {v: [] for v in graph.vertices}
    for u, w in graph.edges.values():
        if u != w:
            adj[u].append(w)
            adj[w].append(u)
    while True:
        sig = {v: (colors[v], tuple(sorted(colors[w] for w in adj[v]))) for v in graph.vertices}
        keys = sorted(set(sig.values()))
        new = {v: keys.index(sig[v]) for v in graph.vertices}
        if len(set(new.values())) == len(set(colors.values())):
            return new
        colors = new


def canonical_form(graph: StableGraph, use_numbering: bool = True) -> tuple:
    """Isomorphism invariant of ``(V, E, T)`` ignoring labels and orientation.

    Colour refinement followed by exhaustive search over orderings within the
    colour classes; fine for the small graphs handled here.
    """
    inv = _vertex_invariants(graph)
    if use_numbering:
        for v in graph.vertices:
            inv[v] = inv[v] + (tuple(sorted(nu for (t, nu) in graph.tails.values() if t == v)),)
    keys = sorted(set(inv.values()))
    colors = _refine(graph, {v: keys.index(inv[v]) for v in graph.vertices})
    classes = {}
    for v in graph.vertices:
        classes.setdefault(colors[v], []).append(v)
    groups = [classes[c] for c in sorted(classes)]

    def encode(order):
        idx = {v: i for i, v in enumerate(order)}
        edges = sorted(tuple(sorted((idx[u], idx[w]))) for u, w in graph.edges.values())
        return (tuple(inv[v] for v in order), tuple(edges))

    best = None

    def rec(k, prefix):
        nonlocal best
        if k == len(groups):
            code = encode(prefix)
            if best is None or code < best:
                best = code
            return
        for perm in permutations(groups[k]):
            rec(k + 1, prefix + list(perm))

    rec(0, [])
    return best


def is_isomorphic(a: StableGraph, b: StableGraph, use_numbering: bool = True) -> bool:
    return canonical_form(a, use_numbering) == canonical_form(b, use_numbering)


# --------------------------------------------------------------------------
# Small constructors used in tests, demos and the CLI
# --------------------------------------------------------------------------


def build_graph(vertices: Iterable, edges: Mapping, tails: Mapping | None = None) -> StableGraph:
    tails = {t: (v[0], v[1]) if isinstance(v, tuple) else (v, i + 1) for i, (t, v) in enumerate((tails or {}).items())}
    return StableGraph(tuple(vertices), dict(edges), tails)


def sphere_four_tails() -> StableGraph:
    return build_graph(["v"], {}, {"t1": "v", "t2": "v", "t3": "v", "t4": "v"})


def two_loops() -> StableGraph:
    """One vertex with two loops (genus 2, 4-valent)."""
    return build_graph(["v"], {"a": ("v", "v"), "b": ("v", "v")})


def dumbbell() -> StableGraph:
    return build_graph(["v1", "v2"], {"a": ("v1", "v1"), "c": ("v1", "v2"), "b": ("v2", "v2")})


def theta() -> StableGraph:
    return build_graph(["v1", "v2"], {"a": ("v1", "v2"), "b": ("v1", "v2"), "c": ("v1", "v2")})


def four_point_channel() -> StableGraph:
    """Trivalent 4-point sphere (s-channel): two vertices, one edge."""
    return build_graph(["v1", "v2"], {"e": ("v2", "v1")}, {"t1": "v1", "t2": "v1", "t3": "v2", "t4": "v2"})


def torus_one_point() -> StableGraph:
    return build_graph(["v"], {"a": ("v", "v")}, {"t1": "v"})
