"""Basic moves between pants decompositions and their action on blocks.

Three kinds of move are modelled:

* half-Dehn twist ``HD:e`` acts exactly: ``q_e -> -q_e`` on the body and a
  phase ``exp(i pi Delta_e)`` on the prefactor;
* fusing move ``F:e:13`` / ``F:e:14`` replaces the edge ``e`` by the other
  resolution of the 4-valent vertex obtained by contracting it;
* simple move ``S:a`` on a handle is recorded as an opaque change of
  marking.

Blocks cannot be carried across fusing or simple moves without analytic
kernels; :func:`compose` stops there and returns
:class:`AnalyticContinuationRequired` with the data needed to go on.
"""

from __future__ import annotations

import cmath
import logging
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .blocks import BlockSeries, PantsDecomposition
from .errors import MoveError, SchottkyCFTError
from .graphs import HalfEdge, StableGraph, contract_edge, fuse_surgery, is_isomorphic
from .virasoro import VirasoroParams

log = logging.getLogger(__name__)

FUSING_CHOICES = ("13", "14")


@dataclass(frozen=True)
class HalfDehn:
    edge: str

    def token(self) -> str:
        return f"HD:{self.edge}"


@dataclass(frozen=True)
class Fusing:
    edge: str
    pairing: str = "13"

    def token(self) -> str:
        return f"F:{self.edge}:{self.pairing}"


@dataclass(frozen=True)
class Simple:
    handle: str

    def token(self) -> str:
        return f"S:{self.handle}"


def parse_move(token: str):
    parts = token.split(":")
    kind = parts[0]
    if kind == "HD" and len(parts) == 2 and parts[1]:
        return HalfDehn(parts[1])
    if kind == "F" and len(parts) in (2, 3) and parts[1]:
        pairing = parts[2] if len(parts) == 3 else "13"
        if pairing not in FUSING_CHOICES:
            raise MoveError(f"fusing pairing must be one of {FUSING_CHOICES}, got {pairing!r}")
        return Fusing(parts[1], pairing)
    if kind == "S" and len(parts) == 2 and parts[1]:
        return Simple(parts[1])
    raise MoveError(f"cannot parse move token {token!r}")


# --------------------------------------------------------------------------
# Fusing
# --------------------------------------------------------------------------


def fusing_branches(pants: PantsDecomposition, edge: str) -> tuple:
    """``(h1, h2, h3, h4)``: legs at the head of ``edge`` then at its tail.

    Raises :class:`MoveError` when ``edge`` is a loop.
    """
    g = pants.graph
    if edge not in g.edges:
        raise MoveError(f"unknown edge {edge}")
    u, w = g.edges[edge]
    if u == w:
        raise MoveError(f"edge {edge} is a loop; fusing needs two distinct pairs of pants")
    head = [h for h in pants.legs[w] if h != HalfEdge(edge, 1)]
    tail = [h for h in pants.legs[u] if h != HalfEdge(edge, -1)]
    return tuple(head + tail)


@dataclass
class FusingState:
    """Companion decomposition and the coordinate dictionary of a fusing move."""

    before: PantsDecomposition
    after: PantsDecomposition
    edge: str
    branches: tuple  # h1..h4 with ``before`` pairing {h1,h2}|{h3,h4}
    dictionary: Mapping[str, tuple] = field(default_factory=dict)

    def table(self) -> str:
        lines = [f"fusing {self.edge}: ({', '.join(map(str, self.branches))})"]
        for k, v in self.dictionary.items():
            before, after = v[1] or "-", v[2] or "-"
            lines.append(f"  {k:<6} = {v[0]:<24} before ~ {before:<8} after ~ {after}")
        return "\n".join(lines)


def _rename(graph: StableGraph, names: Mapping[str, str]) -> StableGraph:
    ren = lambda v: names.get(v, v)  # noqa: E731
    return StableGraph(tuple(ren(v) for v in graph.vertices),
                       {e: (ren(a), ren(b)) for e, (a, b) in graph.edges.items()},
                       {t: (ren(v), nu) for t, (v, nu) in graph.tails.items()})


def fusing_state(pants: PantsDecomposition, edge: str, pairing: str = "13", beta: VirasoroParams | None = None,
                 dictionary: bool = True, order: int = 1) -> FusingState:
    """Apply the fusing move along ``edge``.

    With branches ``h1, h2`` (head of ``edge``) and ``h3, h4`` (tail), the
    result pairs ``{h1, h3}`` (``pairing="13"``) or ``{h1, h4}`` (``"14"``).
    The new edge keeps the label ``edge`` and the weight ``beta`` (default:
    the old weight; the true weight is integrated over by the fusing
    kernel).  With ``dictionary=True`` the coordinates ``x, u_i`` of the
    contracted family are matched with the parameters on both sides.
    """
    if pairing not in FUSING_CHOICES:
        raise MoveError(f"fusing pairing must be one of {FUSING_CHOICES}")
    g = pants.graph
    h1, h2, h3, h4 = fusing_branches(pants, edge)
    u, w = g.edges[edge]
    delta, v0 = contract_edge(g, edge, name=w)
    branches = (h1, h2, h3, h4) if pairing == "13" else (h1, h2, h4, h3)
    surgery = fuse_surgery(delta, v0, branches, edge)
    names = dict(zip(surgery.double_prime_vertices, (w, u)))
    new_graph = _rename(surgery.double_prime, names)
    b1, b2, b3, b4 = branches
    legs = {v: pants.legs[v] for v in g.vertices if v not in (u, w)}
    legs[w] = (b1, b3, HalfEdge(edge, 1))
    legs[u] = (HalfEdge(edge, -1), b2, b4)
    internal = dict(pants.internal)
    if beta is not None:
        internal[edge] = beta
    after = PantsDecomposition(new_graph, dict(pants.external), internal, legs)
    state = FusingState(pants, after, edge, branches)
    if dictionary:
        state.dictionary = coordinate_dictionary(delta, v0, branches, edge, order)
    return state


def coordinate_dictionary(delta: StableGraph, v0: str, branches: Sequence[HalfEdge], edge: str,
                          order: int = 1) -> dict:
    """``{name: (formula, parameter before, parameter after)}``.

    ``x`` is a parameter for ``edge`` before the move (``x -> 0``) and
    ``1 - x`` after it (``x -> 1``); ``None`` marks the side where a
    coordinate is not a parameter.  Each ``u_i`` matches the parameter of
    its edge on both sides, with the sign making the ratio to the parameter
    before the move start with ``+1``.
    """
    from .compare import ComparisonCase, u_parameters

    case = ComparisonCase(delta, v0, tuple(branches), "prime", edge)
    out = {"x": ("x", f"s_{edge}", None)}
    out["1-x"] = ("1-x", None, f"t_{edge}")
    for up in u_parameters(case, order):
        out[up.name] = (up.formula(), f"s_{up.edge}", f"t_{up.edge}")
    return out


# --------------------------------------------------------------------------
# Words and their action
# --------------------------------------------------------------------------


@dataclass
class MoveWord:
    """A sequence of moves validated against the decompositions it visits."""

    moves: tuple
    start: PantsDecomposition
    states: list = field(default_factory=list)  # decomposition before each move, then the final one

    def __post_init__(self):
        self.moves = tuple(parse_move(m) if isinstance(m, str) else m for m in self.moves)
        cur = self.start
        self.states = [cur]
        for i, m in enumerate(self.moves):
            try:
                cur = _step(cur, m)
            except (MoveError, SchottkyCFTError) as exc:
                raise MoveError(f"move {i + 1} ({m.token()}): {exc}") from None
            self.states.append(cur)

    @classmethod
    def parse(cls, text: str, start: PantsDecomposition) -> "MoveWord":
        return cls(tuple(text.split()), start)

    @property
    def final(self) -> PantsDecomposition:
        return self.states[-1]

    def text(self) -> str:
        return " ".join(m.token() for m in self.moves)


def _step(pants: PantsDecomposition, move) -> PantsDecomposition:
    g = pants.graph
    if isinstance(move, HalfDehn):
        if move.edge not in g.edges:
            raise MoveError(f"unknown edge {move.edge}")
        return pants
    if isinstance(move, Fusing):
        return fusing_state(pants, move.edge, move.pairing, dictionary=False).after
    if isinstance(move, Simple):
        if move.handle not in g.edges or not g.is_loop(move.handle):
            raise MoveError(f"simple moves act on a handle; {move.handle} is not a loop")
        return pants
    raise MoveError(f"unknown move {move!r}")


@dataclass
class TwistedBlock:
    """Block together with the number of half-twists applied per edge."""

    block: BlockSeries
    twists: Mapping[str, int] = field(default_factory=dict)

    def phase(self, weights: Mapping[str, object] | None = None) -> complex:
        """``prod exp(i pi n_e Delta_e)`` evaluated numerically."""
        weights = weights if weights is not None else self.block.shifts
        tot = 0
        for e, n in self.twists.items():
            tot += n * complex(weights[e])
        return cmath.exp(1j * cmath.pi * tot)

    def formal_phase(self) -> str:
        """Exact bookkeeping: ``exp(i pi (n_e Delta_e + ...))``."""
        parts = [f"{n}*Delta_{e}" for e, n in self.twists.items() if n]
        return f"exp(i*pi*({' + '.join(parts)}))" if parts else "1"


def half_dehn(block, edge: str) -> TwistedBlock:
    """``q_edge -> -q_edge`` on the body, one more half-twist recorded."""
    tb = block if isinstance(block, TwistedBlock) else TwistedBlock(block)
    if edge not in tb.block.edges:
        raise MoveError(f"unknown edge {edge}")
    tw = dict(tb.twists)
    tw[edge] = tw.get(edge, 0) + 1
    return TwistedBlock(tb.block.twist(edge), tw)


@dataclass
class AnalyticContinuationRequired:
    """Boundary of the formal theory: a fusing or simple move was reached.

    ``partial`` is the block after the moves before ``position``; ``state``
    holds the fusing data (``None`` for a simple move).
    """

    position: int
    move: object
    partial: TwistedBlock
    state: FusingState | None = None

    def __str__(self):
        what = "fusing kernel" if isinstance(self.move, Fusing) else "simple-move kernel"
        return f"analytic continuation required at move {self.position + 1} ({self.move.token()}): {what}"


def compose(word: MoveWord, block: BlockSeries, dictionary: bool = True):
    """Apply ``word`` to ``block`` (a block of ``word.start``)."""
    if sorted(block.edges) != sorted(word.start.graph.edges):
        raise MoveError("block and word start from different decompositions")
    cur = TwistedBlock(block)
    for i, m in enumerate(word.moves):
        if isinstance(m, HalfDehn):
            cur = half_dehn(cur, m.edge)
            continue
        state = None
        if isinstance(m, Fusing):
            state = fusing_state(word.states[i], m.edge, m.pairing, dictionary=dictionary)
        return AnalyticContinuationRequired(i, m, cur, state)
    return cur


# --------------------------------------------------------------------------
# Relations, combinatorial level
# --------------------------------------------------------------------------

#: Named relation words; each returns to an isomorphic decomposition.  The
#: pentagon needs two adjacent edges ``e1, e2`` (a five-holed sphere); the
#: others need a single non-loop edge ``e``.
RELATIONS = {
    "fusing-involution": "F:{e}:13 F:{e}:13",
    "fusing-triangle": "F:{e}:14 F:{e}:14 F:{e}:14",
    "pentagon": "F:{e1}:13 F:{e2}:13 F:{e1}:14 F:{e2}:13 F:{e1}:13",
}


def relation_word(name: str, start: PantsDecomposition, **edges) -> MoveWord:
    """Instantiate a relation from :data:`RELATIONS` on ``start``."""
    if name not in RELATIONS:
        raise MoveError(f"unknown relation {name!r}; known: {sorted(RELATIONS)}")
    try:
        text = RELATIONS[name].format(**edges)
    except KeyError as exc:
        raise MoveError(f"relation {name} needs edge {exc.args[0]}") from None
    return MoveWord.parse(text, start)


def returns_to_start(word: MoveWord) -> bool:
    """Whether the final decomposition is isomorphic to the start."""
    return is_isomorphic(word.start.graph, word.final.graph)
