"""Random stable graphs for property tests."""

from hypothesis import strategies as st

from schottkycft.graphs import StableGraph


@st.composite
def stable_graphs(draw, max_vertices=4, max_extra=3, allow_tails=True):
    """Connected graphs; tails are added until every vertex has degree >= 3."""
    n = draw(st.integers(1, max_vertices))
    vs = [f"v{i}" for i in range(n)]
    edges = {}
    for i in range(1, n):
        j = draw(st.integers(0, i - 1))
        u, w = (vs[i], vs[j]) if draw(st.booleans()) else (vs[j], vs[i])
        edges[f"e{len(edges)}"] = (u, w)
    for _ in range(draw(st.integers(0, max_extra))):
        u, w = draw(st.sampled_from(vs)), draw(st.sampled_from(vs))
        edges[f"e{len(edges)}"] = (u, w)
    deg = {v: 0 for v in vs}
    for u, w in edges.values():
        deg[u] += 1
        deg[w] += 1
    tails = {}
    for v in vs:
        extra = draw(st.integers(0, 1)) if allow_tails else 0
        while deg[v] < 3:
            if not allow_tails:
                edges[f"e{len(edges)}"] = (v, v)
                deg[v] += 2
                continue
            tails[f"t{len(tails) + 1}"] = (v, len(tails) + 1)
            deg[v] += 1
        for _ in range(extra):
            tails[f"t{len(tails) + 1}"] = (v, len(tails) + 1)
    return StableGraph(vs, edges, tails)


def relabel(graph: StableGraph, perm_vertices, prefix="w") -> StableGraph:
    """Rename vertices along ``perm_vertices`` and reverse the vertex order."""
    ren = {v: f"{prefix}{perm_vertices[i]}" for i, v in enumerate(graph.vertices)}
    return StableGraph(tuple(ren[v] for v in reversed(graph.vertices)),
                       {e: (ren[a], ren[b]) for e, (a, b) in reversed(list(graph.edges.items()))},
                       {t: (ren[v], nu) for t, (v, nu) in graph.tails.items()})
