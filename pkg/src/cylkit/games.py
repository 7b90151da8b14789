"""Atomic networks and exact solving of truncated witness games.

A network labels every tuple of its nodes with an atom of a fixed atom
structure; validity means the labelling respects the diagonal sets, the
cylindrifier relations and (when present) the transpositions.  Over such
networks two players fight: the challenger demands a new labelled node,
the responder must extend the network legally.  Three variants:

* ``fresh``    -- every demanded node is brand new; play is bounded by the
                  round count alone (the node set grows by one per round).
* ``reuse``    -- a fixed supply of node names; the challenger may tear an
                  existing node down and demand it back with new labels.
                  Requires strictly more names than the dimension.
* ``triangle`` -- the edge game over a relation-algebra atom structure:
                  the challenger picks an edge, two atoms composing above
                  its label and a (new or reused) node; the responder must
                  label both new edges accordingly.

The solver performs exact alternating reachability on positions
``(network, rounds left)``: demands aimed at earlier networks are
subsumed because a responder who survives r rounds from a position also
survives r' < r rounds from it, so rewinding never helps the challenger.
Positions are canonicalized up to node renaming before memoization, move
exploration follows a fixed canonical order, an explicit state budget
turns runaway searches into refusals, and the returned strategy is
replayed as a structural self-check before the result is handed back.
"""

from __future__ import annotations

import ast
import itertools
import json
import os
from collections.abc import Callable, Iterator, Mapping, Sequence
from dataclasses import dataclass
from concurrent.futures import ThreadPoolExecutor

from .bao import BudgetExceededError, CaAtomStructure
from .ra import RaAtomStructure

VARIANT_FRESH = "fresh"
VARIANT_REUSE = "reuse"
VARIANT_TRIANGLE = "triangle"
VARIANTS = (VARIANT_FRESH, VARIANT_REUSE, VARIANT_TRIANGLE)

EXISTS = "Exists"
FORALL = "Forall"

MAX_ROUNDS = 6
MAX_PEBBLES = 5
MAX_GAME_ATOMS = 4096
DEFAULT_BUDGET = 20_000_000
_CANON_TIE_CAP = 720


def search_budget(default: int = DEFAULT_BUDGET) -> int:
    """Default state budget; the CYLKIT_BUDGET env var overrides it.

    The numeric semantics: the maximum number of search states the solver
    may explore, counting every candidate label placement and every
    position evaluation.
    """
    raw = os.environ.get("CYLKIT_BUDGET")
    if raw is None:
        return default
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(f"CYLKIT_BUDGET must be an integer, got {raw!r}") from exc
    if value <= 0:
        raise ValueError("CYLKIT_BUDGET must be positive")
    return value


# ---------------------------------------------------------------------------
# networks


def _tuple_index(positions: Sequence[int], s: int) -> int:
    idx = 0
    for p in positions:
        idx = idx * s + p
    return idx


def _position_tuples(s: int, arity: int) -> list[tuple[int, ...]]:
    return list(itertools.product(range(s), repeat=arity))


@dataclass(frozen=True)
class CaNetwork:
    """Total map from dim-tuples over a finite node set to atom indices.

    ``nodes`` is strictly increasing; ``labels`` is row-major over
    ``product(nodes, repeat=dim)`` in lexicographic order.
    """

    structure: CaAtomStructure
    nodes: tuple[int, ...]
    labels: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.nodes:
            raise ValueError("a network needs at least one node")
        if list(self.nodes) != sorted(set(self.nodes)):
            raise ValueError("nodes must be strictly increasing")
        if any(v < 0 for v in self.nodes):
            raise ValueError("nodes must be naturals")
        s = len(self.nodes)
        if len(self.labels) != s ** self.structure.dim:
            raise ValueError("labels must cover every node tuple exactly once")
        if any(not 0 <= a < self.structure.natoms for a in self.labels):
            raise ValueError("label out of range")
        object.__setattr__(
            self, "_pos", {v: p for p, v in enumerate(self.nodes)}
        )

    @property
    def arity(self) -> int:
        return self.structure.dim

    def label(self, tup: Sequence[int]) -> int:
        pos = self._pos  # type: ignore[attr-defined]
        return self.labels[_tuple_index([pos[v] for v in tup], len(self.nodes))]

    def tuples(self) -> Iterator[tuple[int, ...]]:
        return itertools.product(self.nodes, repeat=self.arity)

    def mapping(self) -> dict[tuple[int, ...], int]:
        return {t: self.labels[i] for i, t in enumerate(self.tuples())}

    @classmethod
    def from_map(
        cls, structure: CaAtomStructure, mapping: Mapping[Sequence[int], int]
    ) -> "CaNetwork":
        nodes = tuple(sorted({v for t in mapping for v in t}))
        s = len(nodes)
        pos = {v: p for p, v in enumerate(nodes)}
        labels = [-1] * (s ** structure.dim)
        for t, a in mapping.items():
            labels[_tuple_index([pos[v] for v in t], s)] = a
        if any(a < 0 for a in labels):
            raise ValueError("mapping does not label every node tuple")
        return cls(structure, nodes, tuple(labels))


@dataclass(frozen=True)
class RaNetwork:
    """Total map from ordered node pairs to relation-algebra atom indices."""

    structure: RaAtomStructure
    nodes: tuple[int, ...]
    labels: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.nodes:
            raise ValueError("a network needs at least one node")
        if list(self.nodes) != sorted(set(self.nodes)):
            raise ValueError("nodes must be strictly increasing")
        if any(v < 0 for v in self.nodes):
            raise ValueError("nodes must be naturals")
        s = len(self.nodes)
        if len(self.labels) != s * s:
            raise ValueError("labels must cover every ordered node pair")
        if any(not 0 <= a < self.structure.natoms for a in self.labels):
            raise ValueError("label out of range")
        object.__setattr__(
            self, "_pos", {v: p for p, v in enumerate(self.nodes)}
        )

    @property
    def arity(self) -> int:
        return 2

    def label(self, tup: Sequence[int]) -> int:
        pos = self._pos  # type: ignore[attr-defined]
        return self.labels[_tuple_index([pos[v] for v in tup], len(self.nodes))]

    def tuples(self) -> Iterator[tuple[int, ...]]:
        return itertools.product(self.nodes, repeat=2)

    def mapping(self) -> dict[tuple[int, ...], int]:
        return {t: self.labels[i] for i, t in enumerate(self.tuples())}

    @classmethod
    def from_map(
        cls, structure: RaAtomStructure, mapping: Mapping[Sequence[int], int]
    ) -> "RaNetwork":
        nodes = tuple(sorted({v for t in mapping for v in t}))
        s = len(nodes)
        pos = {v: p for p, v in enumerate(nodes)}
        labels = [-1] * (s * s)
        for t, a in mapping.items():
            labels[_tuple_index([pos[v] for v in t], s)] = a
        if any(a < 0 for a in labels):
            raise ValueError("mapping does not label every ordered pair")
        return cls(structure, nodes, tuple(labels))


Network = CaNetwork | RaNetwork


@dataclass(frozen=True)
class NetworkReport:
    passed: bool
    violations: tuple[str, ...]


def validate_network(net: Network) -> NetworkReport:
    """Check the network bullets; every violation is reported with the
    offending tuple (pair) spelled out."""
    if isinstance(net, CaNetwork):
        return _validate_ca(net)
    if isinstance(net, RaNetwork):
        return _validate_ra(net)
    raise TypeError(f"not a network: {type(net).__name__}")


def _validate_ca(net: CaNetwork) -> NetworkReport:
    st = net.structure
    dim = st.dim
    s = len(net.nodes)
    tuples = _position_tuples(s, dim)
    labels = net.labels
    nodes = net.nodes
    out: list[str] = []

    for idx, t in enumerate(tuples):
        a = labels[idx]
        for i in range(dim):
            for j in range(i + 1, dim):
                if t[i] == t[j] and not (st.diag_mask(i, j) >> a) & 1:
                    real = tuple(nodes[p] for p in t)
                    out.append(
                        f"diagonal: tuple {real} repeats a node at positions "
                        f"({i},{j}) but its label {st.atoms[a]!r} lies outside E_{i}{j}"
                    )

    for i in range(dim):
        cols = st.cyl_image_masks(i)
        for idx, t in enumerate(tuples):
            a = labels[idx]
            for d in range(s):
                if d == t[i]:
                    continue
                u = t[:i] + (d,) + t[i + 1 :]
                b = labels[_tuple_index(u, s)]
                # the moved tuple's label must sit below c_i of the original's
                if not (cols[a] >> b) & 1:
                    real_t = tuple(nodes[p] for p in t)
                    real_u = tuple(nodes[p] for p in u)
                    out.append(
                        f"cylindrifier: tuples {real_u} and {real_t} differ only "
                        f"at position {i} but label {st.atoms[b]!r} is not below "
                        f"c_{i} of {st.atoms[a]!r}"
                    )

    if st.transp is not None:
        for i in range(dim):
            for j in range(i + 1, dim):
                timg = st.transp_image_masks(i, j)
                for idx, t in enumerate(tuples):
                    a = labels[idx]
                    u = list(t)
                    u[i], u[j] = u[j], u[i]
                    b = labels[_tuple_index(u, s)]
                    if not (timg[a] >> b) & 1:
                        real = tuple(nodes[p] for p in t)
                        out.append(
                            f"transposition ({i},{j}): tuple {real} carries "
                            f"{st.atoms[a]!r} but its swap carries {st.atoms[b]!r}, "
                            f"not the transposition image"
                        )

    return NetworkReport(not out, tuple(out))


def _validate_ra(net: RaNetwork) -> NetworkReport:
    st = net.structure
    s = len(net.nodes)
    labels = net.labels
    nodes = net.nodes
    out: list[str] = []

    def lab(p: int, q: int) -> int:
        return labels[p * s + q]

    for p in range(s):
        if lab(p, p) not in st.identity:
            out.append(
                f"identity: edge ({nodes[p]},{nodes[p]}) carries "
                f"{st.atoms[lab(p, p)]!r}, which is not an identity atom"
            )
    for p in range(s):
        for q in range(s):
            if lab(q, p) != st.converse[lab(p, q)]:
                out.append(
                    f"converse: edge ({nodes[q]},{nodes[p]}) carries "
                    f"{st.atoms[lab(q, p)]!r}, not the converse of "
                    f"{st.atoms[lab(p, q)]!r} on ({nodes[p]},{nodes[q]})"
                )
    for p in range(s):
        for q in range(s):
            for w in range(s):
                if not st.consistent(lab(p, q), lab(p, w), lab(w, q)):
                    out.append(
                        f"triangle: ({nodes[p]},{nodes[q]}) = {st.atoms[lab(p, q)]!r} "
                        f"is forbidden over ({nodes[p]},{nodes[w]}) = "
                        f"{st.atoms[lab(p, w)]!r} and ({nodes[w]},{nodes[q]}) = "
                        f"{st.atoms[lab(w, q)]!r}"
                    )
    return NetworkReport(not out, tuple(out))


def semantic_network(
    structure: CaAtomStructure, assignment: Mapping[int, int]
) -> CaNetwork:
    """Network induced by mapping nodes to points of a concrete base.

    The structure must label its atoms with reprs of point tuples (as the
    full set algebras do); the tuple of assigned points under each node
    tuple is looked up as an atom label.
    """
    try:
        atom_of = {ast.literal_eval(lbl): i for i, lbl in enumerate(structure.atoms)}
    except (ValueError, SyntaxError) as exc:
        raise ValueError(
            "structure atoms do not encode point tuples; build it with "
            "full_set_algebra"
        ) from exc
    nodes = tuple(sorted(assignment))
    if not nodes:
        raise ValueError("assignment must cover at least one node")
    mapping = {}
    for t in itertools.product(nodes, repeat=structure.dim):
        point = tuple(assignment[v] for v in t)
        if point not in atom_of:
            raise ValueError(f"no atom labels the point tuple {point}")
        mapping[t] = atom_of[point]
    return CaNetwork.from_map(structure, mapping)


def drop_cyl_pair(
    structure: CaAtomStructure, i: int, a: int, b: int
) -> CaAtomStructure:
    """Remove one pair from one cylindrifier relation.

    A surgical corruption for adversarial tests: the result generally
    fails check_ca_frame and shrinks the responder's options in games.
    """
    structure._check_index(i)
    rel = structure.cyl[i]
    if (a, b) not in rel:
        raise ValueError(f"({a},{b}) is not in cylindrifier relation {i}")
    new_cyl = list(structure.cyl)
    new_cyl[i] = rel - {(a, b)}
    return CaAtomStructure(
        dim=structure.dim,
        atoms=structure.atoms,
        cyl=tuple(new_cyl),
        diag=structure.diag,
        transp=structure.transp,
    )


# ---------------------------------------------------------------------------
# game specification


@dataclass(frozen=True)
class GameSpec:
    """Which game to play, over which structure, for how long.

    ``pebbles`` is the node-name budget for the reuse and triangle
    variants (must exceed the dimension for reuse); the fresh variant
    derives its node budget from the round count and takes no pebbles.
    """

    variant: str
    structure: CaAtomStructure | RaAtomStructure
    rounds: int
    pebbles: int | None = None

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if not 0 <= self.rounds <= MAX_ROUNDS:
            raise ValueError(f"rounds must be in 0..{MAX_ROUNDS}, got {self.rounds}")
        if self.variant == VARIANT_TRIANGLE:
            if not isinstance(self.structure, RaAtomStructure):
                raise TypeError(
                    "the triangle variant runs over a relation-algebra atom structure"
                )
            if self.pebbles is None:
                raise ValueError("the triangle variant needs an explicit pebble budget")
            if not 2 <= self.pebbles <= MAX_PEBBLES:
                raise ValueError(f"pebbles must be in 2..{MAX_PEBBLES}")
        else:
            if not isinstance(self.structure, CaAtomStructure):
                raise TypeError(f"the {self.variant} variant runs over a CaAtomStructure")
            if self.variant == VARIANT_REUSE:
                if self.pebbles is None:
                    raise ValueError("the reuse variant needs an explicit pebble budget")
                if self.pebbles > MAX_PEBBLES:
                    raise ValueError(f"pebbles must be at most {MAX_PEBBLES}")
                if self.pebbles <= self.structure.dim:
                    raise ValueError(
                        "the reuse variant needs more pebbles than the dimension"
                    )
            elif self.pebbles is not None:
                raise ValueError(
                    "the fresh variant derives its node budget from the round "
                    "count; leave pebbles unset"
                )

    @property
    def arity(self) -> int:
        return 2 if self.variant == VARIANT_TRIANGLE else self.structure.dim

    @property
    def node_budget(self) -> int:
        if self.variant == VARIANT_FRESH:
            return self.structure.dim + self.rounds
        assert self.pebbles is not None
        return self.pebbles


def state_space_bound(spec: GameSpec) -> int:
    """Loose exact upper bound on distinct networks: atoms ** (tuple count)."""
    return spec.structure.natoms ** (spec.node_budget ** spec.arity)


# ---------------------------------------------------------------------------
# moves


@dataclass(frozen=True)
class CaMove:
    """Challenger demand: insert node k at position l of the face; the
    responder must label that tuple with atom b."""

    face: tuple[int, ...]
    l: int
    k: int
    b: int

    def demanded(self) -> tuple[int, ...]:
        return self.face[: self.l] + (self.k,) + self.face[self.l :]

    def encode(self) -> str:
        face = ",".join(map(str, self.face))
        return f"f({face});l{self.l};k{self.k};b{self.b}"

    @classmethod
    def decode(cls, text: str) -> "CaMove":
        try:
            fpart, lpart, kpart, bpart = text.split(";")
            face = tuple(int(v) for v in fpart[2:-1].split(",")) if fpart[2:-1] else ()
            return cls(face, int(lpart[1:]), int(kpart[1:]), int(bpart[1:]))
        except (ValueError, IndexError) as exc:
            raise ValueError(f"bad move encoding {text!r}") from exc


@dataclass(frozen=True)
class RaMove:
    """Challenger demand on edge (x,y): the responder must bring node z
    with M(x,z) = a and M(z,y) = b."""

    x: int
    y: int
    z: int
    a: int
    b: int

    def encode(self) -> str:
        return f"x{self.x};y{self.y};z{self.z};a{self.a};b{self.b}"

    @classmethod
    def decode(cls, text: str) -> "RaMove":
        try:
            parts = text.split(";")
            return cls(*(int(p[1:]) for p in parts))
        except (ValueError, IndexError, TypeError) as exc:
            raise ValueError(f"bad move encoding {text!r}") from exc


Move = CaMove | RaMove


class _Counter:
    __slots__ = ("states", "budget", "bound")

    def __init__(self, budget: int, bound: int) -> None:
        self.states = 0
        self.budget = budget
        self.bound = bound

    def tick(self, n: int = 1) -> None:
        self.states += n
        if self.states > self.budget:
            raise BudgetExceededError(
                f"search budget exhausted after {self.states} states "
                f"(budget {self.budget}, state-space bound {self.bound})"
            )


def _least_fresh(nodes: Sequence[int]) -> int:
    used = set(nodes)
    k = 0
    while k in used:
        k += 1
    return k


def _k_choices(spec: GameSpec, net: Network, excluded: frozenset[int] | set[int]) -> list[int]:
    """Candidate nodes the challenger may demand, in canonical order."""
    nodes = net.nodes
    if spec.variant == VARIANT_FRESH:
        return [_least_fresh(nodes)]
    out = sorted(set(nodes) - set(excluded))
    if len(nodes) < spec.node_budget:
        fresh = _least_fresh(nodes)
        if fresh not in excluded:
            out.append(fresh)
    return out


def _ca_moves(spec: GameSpec, net: CaNetwork, counter: _Counter) -> tuple[list[CaMove], int]:
    """Challenger demands in canonical order, plus the number of
    (face, index) pairs whose legality mask depended on the choice of
    representative (a corruption symptom; the union of the masks is used)."""
    st = net.structure
    dim = st.dim
    nodes = net.nodes
    moves: list[CaMove] = []
    disagreements = 0
    for face in itertools.product(nodes, repeat=dim - 1):
        k_choices = _k_choices(spec, net, set(face))
        for l in range(dim):
            counter.tick(len(nodes))
            union, differed = _legal_mask(net, face, l)
            if differed:
                disagreements += 1
            if not union:
                continue
            for k in k_choices:
                mask = union
                while mask:
                    b = (mask & -mask).bit_length() - 1
                    mask &= mask - 1
                    moves.append(CaMove(face, l, k, b))
    return moves, disagreements


def _legal_mask(net: CaNetwork, face: tuple[int, ...], l: int) -> tuple[int, bool]:
    """Union over representatives of the cylindrified label mask, and
    whether the representatives disagreed (they cannot on a genuine frame)."""
    cols = net.structure.cyl_image_masks(l)
    union = 0
    first = None
    differed = False
    for x in net.nodes:
        mask = cols[net.label(face[:l] + (x,) + face[l:])]
        if first is None:
            first = mask
        elif mask != first:
            differed = True
        union |= mask
    return union, differed


def _ra_moves(spec: GameSpec, net: RaNetwork, counter: _Counter) -> tuple[list[RaMove], int]:
    st = net.structure
    nodes = net.nodes
    moves: list[RaMove] = []
    for x in nodes:
        for y in nodes:
            lab = net.label((x, y))
            z_choices = _k_choices(spec, net, {x, y})
            for z in z_choices:
                counter.tick(st.natoms)
                for a in range(st.natoms):
                    for b in range(st.natoms):
                        if st.consistent(lab, a, b):
                            moves.append(RaMove(x, y, z, a, b))
    return moves, 0


# ---------------------------------------------------------------------------
# completion enumeration (responder choices and opening networks)


def _ca_completions(
    structure: CaAtomStructure,
    nodes: tuple[int, ...],
    fixed: Mapping[int, int],
    counter: _Counter,
) -> Iterator[CaNetwork]:
    """All valid total labellings over ``nodes`` extending ``fixed``
    (slot index -> atom), in lexicographic label order.

    Candidate atoms per free slot are narrowed by mask intersection
    against all already-labelled neighbours.  Fixed slots are assumed
    mutually valid (they come from a valid network); slots listed in
    ``fixed`` that conflict with each other are caught because every free
    slot still checks against all of them, and a demanded fixed slot is
    re-checked by the caller via _check_fixed_slot when needed.
    """
    dim = structure.dim
    s = len(nodes)
    tuples = _position_tuples(s, dim)
    total = len(tuples)
    full = structure.full_mask
    diag_masks = [[structure.diag_mask(i, j) for j in range(dim)] for i in range(dim)]
    cyl_cols = [structure.cyl_image_masks(i) for i in range(dim)]
    cyl_rows = [_row_masks(structure, i) for i in range(dim)]
    if structure.transp is not None:
        transp_cols = [
            ((i, j), structure.transp_image_masks(i, j))
            for i in range(dim)
            for j in range(i + 1, dim)
        ]
    else:
        transp_cols = []
    assign: dict[int, int] = dict(fixed)
    free = [idx for idx in range(total) if idx not in fixed]
    tick = counter.tick

    def candidates(idx: int) -> int:
        t = tuples[idx]
        cand = full
        for i in range(dim):
            ti = t[i]
            for j in range(i + 1, dim):
                if ti == t[j]:
                    cand &= diag_masks[i][j]
                    if not cand:
                        return 0
        for i in range(dim):
            cols = cyl_cols[i]
            rows = cyl_rows[i]
            ti = t[i]
            for d in range(s):
                if d == ti:
                    continue
                other = assign.get(_tuple_index(t[:i] + (d,) + t[i + 1 :], s))
                if other is None:
                    continue
                cand &= cols[other] & rows[other]
                if not cand:
                    return 0
        for (i, j), timg in transp_cols:
            u = list(t)
            u[i], u[j] = u[j], u[i]
            other = assign.get(_tuple_index(u, s))
            if other is not None:
                cand &= timg[other]
                if not cand:
                    return 0
        return cand

    def backtrack(at: int) -> Iterator[CaNetwork]:
        if at == len(free):
            yield CaNetwork(structure, nodes, tuple(assign[i] for i in range(total)))
            return
        idx = free[at]
        tick()
        mask = candidates(idx)
        while mask:
            a = (mask & -mask).bit_length() - 1
            mask &= mask - 1
            tick()
            assign[idx] = a
            yield from backtrack(at + 1)
            del assign[idx]

    yield from backtrack(0)


def _row_masks(structure: CaAtomStructure, i: int) -> tuple[int, ...]:
    """Per atom b, the mask of {a : (b,a) in T_i} (the transpose of the
    column images); cached on the structure."""
    cache = getattr(structure, "_game_row_masks", None)
    if cache is None:
        cache = {}
        object.__setattr__(structure, "_game_row_masks", cache)
    got = cache.get(i)
    if got is None:
        n = structure.natoms
        rows = [0] * n
        for a, b in structure.cyl[i]:
            rows[a] |= 1 << b
        got = tuple(rows)
        cache[i] = got
    return got


def _check_fixed_slot(
    structure: CaAtomStructure,
    nodes: tuple[int, ...],
    fixed: Mapping[int, int],
    idx: int,
) -> bool:
    """Whether the fixed label at slot ``idx`` is compatible with the rest
    of ``fixed`` (used to pre-validate a demanded slot)."""
    dim = structure.dim
    s = len(nodes)
    t = _position_tuples(s, dim)[idx]
    a = fixed[idx]
    for i in range(dim):
        for j in range(i + 1, dim):
            if t[i] == t[j] and not (structure.diag_mask(i, j) >> a) & 1:
                return False
    for i in range(dim):
        cols = structure.cyl_image_masks(i)
        rows = _row_masks(structure, i)
        for d in range(s):
            if d == t[i]:
                continue
            other = fixed.get(_tuple_index(t[:i] + (d,) + t[i + 1 :], s))
            if other is None:
                continue
            if not (cols[other] >> a) & 1 or not (rows[other] >> a) & 1:
                return False
    if structure.transp is not None:
        for i in range(dim):
            for j in range(i + 1, dim):
                u = list(t)
                u[i], u[j] = u[j], u[i]
                other = fixed.get(_tuple_index(u, s))
                if other is not None:
                    timg = structure.transp_image_masks(i, j)
                    if not (timg[other] >> a) & 1:
                        return False
    return True


def _ra_completions(
    structure: RaAtomStructure,
    nodes: tuple[int, ...],
    fixed: Mapping[int, int],
    counter: _Counter,
) -> Iterator[RaNetwork]:
    """All valid edge labellings over ``nodes`` extending ``fixed``;
    assigning (p,q) forces (q,p) to the converse label, and candidates
    are narrowed through the composition rows of every labelled triangle."""
    s = len(nodes)
    full = structure.full_mask
    identity_mask = 0
    for a in structure.identity:
        identity_mask |= 1 << a
    conv = structure.converse
    slots = [(p, q) for p in range(s) for q in range(p, s)]
    assign: dict[int, int] = {}
    for idx, a in fixed.items():
        p, q = divmod(idx, s)
        ridx = q * s + p
        mirror = fixed.get(ridx)
        if mirror is not None and mirror != conv[a]:
            return
        assign[idx] = a
        assign[ridx] = conv[a]
    decide = [
        (p, q) for (p, q) in slots if p * s + q not in assign
    ]
    tick = counter.tick

    def candidates(p: int, q: int) -> int:
        cand = identity_mask if p == q else full
        for w in range(s):
            e2 = assign.get(p * s + w)
            e3 = assign.get(w * s + q)
            if e2 is not None and e3 is not None:
                cand &= structure.comp_row(e2, e3)
                if not cand:
                    return 0
            e1 = assign.get(p * s + w)
            e3b = assign.get(q * s + w)
            if e1 is not None and e3b is not None:
                # (p,w) over (p,q),(q,w): the middle side must keep
                # (e1, x, e3b) consistent
                cand &= structure.comp_row(e1, conv[e3b])
                if not cand:
                    return 0
            e1b = assign.get(w * s + q)
            e2b = assign.get(w * s + p)
            if e1b is not None and e2b is not None:
                # (w,q) over (w,p),(p,q): the right side must keep
                # (e1b, e2b, x) consistent
                cand &= structure.comp_row(conv[e2b], e1b)
                if not cand:
                    return 0
        return cand

    def backtrack(at: int) -> Iterator[RaNetwork]:
        if at == len(decide):
            yield RaNetwork(structure, nodes, tuple(assign[i] for i in range(s * s)))
            return
        p, q = decide[at]
        tick()
        mask = candidates(p, q)
        while mask:
            a = (mask & -mask).bit_length() - 1
            mask &= mask - 1
            tick()
            idx = p * s + q
            ridx = q * s + p
            assign[idx] = a
            assign[ridx] = conv[a]
            yield from backtrack(at + 1)
            del assign[idx]
            if ridx != idx:
                del assign[ridx]

    yield from backtrack(0)


def _check_fixed_ra(
    structure: RaAtomStructure,
    s: int,
    fixed: Mapping[int, int],
) -> bool:
    """Whether the fixed edges of a responder task are mutually valid
    (identity diagonal, converse mirrors, labelled triangles)."""
    conv = structure.converse
    for idx, a in fixed.items():
        p, q = divmod(idx, s)
        if p == q and a not in structure.identity:
            return False
        mirror = fixed.get(q * s + p)
        if mirror is not None and mirror != conv[a]:
            return False
    for idx, a in fixed.items():
        p, q = divmod(idx, s)
        for w in range(s):
            e2 = fixed.get(p * s + w)
            e3 = fixed.get(w * s + q)
            if e2 is not None and e3 is not None:
                if not structure.consistent(a, e2, e3):
                    return False
    return True


def _ca_response_task(
    net: CaNetwork, move: CaMove
) -> tuple[tuple[int, ...], dict[int, int]]:
    """Node set and fixed slots of the responder's completion problem.

    The demanded tuple always contains k, and every tuple containing k is
    either brand new (fresh k) or cleared (reused k), so the demand can
    only conflict with retained labels through the validity checks, which
    the enumerator applies.
    """
    reused = move.k in net.nodes
    new_nodes = net.nodes if reused else tuple(sorted(net.nodes + (move.k,)))
    s_new = len(new_nodes)
    pos = {v: p for p, v in enumerate(new_nodes)}
    fixed: dict[int, int] = {}
    for t, a in net.mapping().items():
        if reused and move.k in t:
            continue
        fixed[_tuple_index([pos[v] for v in t], s_new)] = a
    fixed[_tuple_index([pos[v] for v in move.demanded()], s_new)] = move.b
    return new_nodes, fixed


def _ca_responses(
    net: CaNetwork, move: CaMove, counter: _Counter
) -> Iterator[CaNetwork]:
    new_nodes, fixed = _ca_response_task(net, move)
    didx = _tuple_index(
        [new_nodes.index(v) for v in move.demanded()], len(new_nodes)
    )
    if not _check_fixed_slot(net.structure, new_nodes, fixed, didx):
        return
    yield from _ca_completions(net.structure, new_nodes, fixed, counter)


def _ra_response_task(
    net: RaNetwork, move: RaMove
) -> tuple[tuple[int, ...], dict[int, int]]:
    reused = move.z in net.nodes
    new_nodes = net.nodes if reused else tuple(sorted(net.nodes + (move.z,)))
    s_new = len(new_nodes)
    pos = {v: p for p, v in enumerate(new_nodes)}
    fixed: dict[int, int] = {}
    for (u, v), a in net.mapping().items():
        if reused and move.z in (u, v):
            continue
        fixed[pos[u] * s_new + pos[v]] = a
    fixed[pos[move.x] * s_new + pos[move.z]] = move.a
    fixed[pos[move.z] * s_new + pos[move.y]] = move.b
    return new_nodes, fixed


def _ra_responses(
    net: RaNetwork, move: RaMove, counter: _Counter
) -> Iterator[RaNetwork]:
    new_nodes, fixed = _ra_response_task(net, move)
    if not _check_fixed_ra(net.structure, len(new_nodes), fixed):
        return
    yield from _ra_completions(net.structure, new_nodes, fixed, counter)


def _moves(spec: GameSpec, net: Network, counter: _Counter) -> tuple[list[Move], int]:
    if spec.variant == VARIANT_TRIANGLE:
        assert isinstance(net, RaNetwork)
        return _ra_moves(spec, net, counter)
    assert isinstance(net, CaNetwork)
    return _ca_moves(spec, net, counter)


def _responses(net: Network, move: Move, counter: _Counter) -> Iterator[Network]:
    if isinstance(net, RaNetwork):
        assert isinstance(move, RaMove)
        return _ra_responses(net, move, counter)
    assert isinstance(move, CaMove)
    return _ca_responses(net, move, counter)


def _openings(
    spec: GameSpec, initial_atom: int, counter: _Counter
) -> list[Network]:
    """Legal opening networks on prefix node sets of size 1..arity, in
    canonical (size-then-lexicographic) order, containing the demanded atom."""
    out: list[Network] = []
    max_s = min(spec.arity, spec.node_budget)
    for s in range(1, max_s + 1):
        nodes = tuple(range(s))
        if spec.variant == VARIANT_TRIANGLE:
            assert isinstance(spec.structure, RaAtomStructure)
            nets: Iterator[Network] = _ra_completions(spec.structure, nodes, {}, counter)
        else:
            assert isinstance(spec.structure, CaAtomStructure)
            nets = _ca_completions(spec.structure, nodes, {}, counter)
        for net in nets:
            if initial_atom in net.labels:
                out.append(net)
    return out


# ---------------------------------------------------------------------------
# canonicalization


def _canon_encoding(
    nodes: tuple[int, ...], labels: tuple[int, ...], arity: int
) -> tuple[str, dict[int, int]]:
    """Deterministic renaming of the nodes to 0..s-1 plus the resulting
    label string.  Colour refinement orders the nodes; remaining ties are
    resolved by minimizing the encoding when the tie group is small, else
    by stable order.  Equal encodings imply isomorphic networks either way.
    """
    s = len(nodes)
    tuples = _position_tuples(s, arity)
    if s == 1:
        return f"1:{','.join(map(str, labels))}", {nodes[0]: 0}

    colour = [0] * s
    for _ in range(s):
        sigs = []
        for p in range(s):
            sig = []
            for idx, t in enumerate(tuples):
                if p in t:
                    sig.append(
                        (
                            tuple(colour[q] for q in t),
                            tuple(i for i, q in enumerate(t) if q == p),
                            labels[idx],
                        )
                    )
            sig.sort()
            sigs.append((colour[p], tuple(sig)))
        ranked = sorted(set(sigs))
        new_colour = [ranked.index(sigs[p]) for p in range(s)]
        if new_colour == colour:
            break
        colour = new_colour

    order = sorted(range(s), key=lambda p: (colour[p], p))
    groups: list[list[int]] = []
    for p in order:
        if groups and colour[groups[-1][0]] == colour[p]:
            groups[-1].append(p)
        else:
            groups.append([p])

    def encode_for(sigma_pos: Sequence[int]) -> tuple[int, ...]:
        # sigma_pos[old position] = new position
        inv = [0] * s
        for old, new in enumerate(sigma_pos):
            inv[new] = old
        enc = []
        for t in tuples:
            old_t = tuple(inv[q] for q in t)
            enc.append(labels[_tuple_index(old_t, s)])
        return tuple(enc)

    tie_size = 1
    for g in groups:
        for f in range(2, len(g) + 1):
            tie_size *= f
    base_sigma = [0] * s
    for new, old in enumerate(order):
        base_sigma[old] = new
    if tie_size == 1 or tie_size > _CANON_TIE_CAP:
        best_sigma = base_sigma
        best_enc = encode_for(base_sigma)
    else:
        best_sigma = None
        best_enc = None
        offsets = []
        at = 0
        for g in groups:
            offsets.append((at, g))
            at += len(g)
        for perms in itertools.product(
            *(itertools.permutations(g) for g in groups)
        ):
            sigma = [0] * s
            for (start, _g), perm in zip(offsets, perms):
                for off, old in enumerate(perm):
                    sigma[old] = start + off
            enc = encode_for(sigma)
            if best_enc is None or enc < best_enc:
                best_enc = enc
                best_sigma = sigma
        assert best_sigma is not None and best_enc is not None

    pi = {nodes[p]: best_sigma[p] for p in range(s)}
    return f"{s}:{','.join(map(str, best_enc))}", pi


def _decode_labels(enc: str) -> tuple[int, tuple[int, ...]]:
    head, _, rest = enc.partition(":")
    return int(head), tuple(int(v) for v in rest.split(","))


def _rename_move(move: Move, pi: Mapping[int, int], s: int) -> Move:
    def node(v: int) -> int:
        return pi[v] if v in pi else s

    if isinstance(move, CaMove):
        return CaMove(tuple(node(f) for f in move.face), move.l, node(move.k), move.b)
    return RaMove(node(move.x), node(move.y), node(move.z), move.a, move.b)


def _unrename_move(move: Move, pi: Mapping[int, int], nodes: Sequence[int]) -> Move:
    inv = {new: old for old, new in pi.items()}
    fresh = _least_fresh(nodes)

    def node(v: int) -> int:
        return inv[v] if v in inv else fresh

    if isinstance(move, CaMove):
        return CaMove(tuple(node(f) for f in move.face), move.l, node(move.k), move.b)
    return RaMove(node(move.x), node(move.y), node(move.z), move.a, move.b)


def _encode_response(net: Network, response: Network, pi: Mapping[int, int]) -> str:
    """Labels of the response in the coordinates of the parent's canonical
    renaming, extended to any fresh node."""
    ext = dict(pi)
    for v in response.nodes:
        if v not in ext:
            ext[v] = len(ext)
    s_new = len(response.nodes)
    order = sorted(response.nodes, key=lambda v: ext[v])
    pos = {v: p for p, v in enumerate(response.nodes)}
    enc = []
    for t in itertools.product(order, repeat=response.arity):
        enc.append(response.labels[_tuple_index([pos[v] for v in t], s_new)])
    return f"{s_new}:{','.join(map(str, enc))}"


def _decode_response(
    net: Network, enc: str, pi: Mapping[int, int]
) -> Network:
    """Rebuild the responder's network in real node names from a response
    encoding taken relative to the parent's canonical renaming."""
    s_new, labels = _decode_labels(enc)
    ext = dict(pi)
    if s_new == len(ext) + 1:
        ext[_least_fresh(net.nodes)] = len(ext)
    if len(ext) != s_new:
        raise ValueError("response encoding does not fit the position")
    order = sorted(ext, key=lambda v: ext[v])
    real_nodes = tuple(sorted(order))
    pos_real = {v: p for p, v in enumerate(real_nodes)}
    new_labels = [0] * (s_new ** net.arity)
    for abstract_t, a in zip(itertools.product(order, repeat=net.arity), labels):
        new_labels[_tuple_index([pos_real[v] for v in abstract_t], s_new)] = a
    if isinstance(net, RaNetwork):
        return RaNetwork(net.structure, real_nodes, tuple(new_labels))
    return CaNetwork(net.structure, real_nodes, tuple(new_labels))


# ---------------------------------------------------------------------------
# solver


@dataclass(frozen=True)
class SolveStats:
    states_explored: int
    memo_hits: int
    openings: int
    representative_disagreements: int
    state_space_bound: str


@dataclass(frozen=True)
class SolveResult:
    winner: str
    rounds_used: int
    strategy: dict[str, str]
    stats: SolveStats

    def to_dict(self) -> dict:
        return {
            "winner": self.winner,
            "rounds_used": self.rounds_used,
            "strategy": dict(sorted(self.strategy.items())),
            "stats": {
                "states_explored": self.stats.states_explored,
                "memo_hits": self.stats.memo_hits,
                "openings": self.stats.openings,
                "representative_disagreements": self.stats.representative_disagreements,
                "state_space_bound": self.stats.state_space_bound,
            },
        }


@dataclass
class _MoveClass:
    """All demands sharing one target slot: the move head in canonical
    order, the legal atom mask, and the responder's completions bucketed
    by the label they give the demanded slot."""

    head: Move  # with b (CaMove) or a/b (RaMove) zeroed; kept for ordering
    legal: tuple[int, ...] | int
    buckets: dict


class _BranchSolver:
    """Exact value search under one opening; owns its memo and counters so
    sibling branches are schedule-independent."""

    def __init__(self, spec: GameSpec, budget: int, bound: int, canonical: bool) -> None:
        self.spec = spec
        self.counter = _Counter(budget, bound)
        self.canonical = canonical
        self.memo: dict[tuple[object, int], int] = {}
        self.succ: dict[object, list[_MoveClass]] = {}
        self.canon_cache: dict[
            tuple[tuple[int, ...], tuple[int, ...]], tuple[str, dict[int, int]]
        ] = {}
        self.memo_hits = 0
        self.disagreements = 0

    def canon(self, net: Network) -> tuple[str, dict[int, int]]:
        key = (net.nodes, net.labels)
        got = self.canon_cache.get(key)
        if got is None:
            got = _canon_encoding(net.nodes, net.labels, net.arity)
            self.canon_cache[key] = got
        return got

    def position_key(self, net: Network) -> object:
        if self.canonical:
            return self.canon(net)[0]
        return (net.nodes, net.labels)

    def moves(self, net: Network) -> list[Move]:
        moves, disagreed = _moves(self.spec, net, self.counter)
        self.disagreements += disagreed
        return moves

    def move_classes(self, net: Network) -> list[_MoveClass]:
        """Per demanded slot: legality and bucketed responses, cached per
        raw position (independent of rounds left)."""
        key = (net.nodes, net.labels)
        got = self.succ.get(key)
        if got is not None:
            return got
        out: list[_MoveClass] = []
        if isinstance(net, CaNetwork):
            dim = net.structure.dim
            for face in itertools.product(net.nodes, repeat=dim - 1):
                k_choices = _k_choices(self.spec, net, set(face))
                for l in range(dim):
                    self.counter.tick(len(net.nodes))
                    legal, differed = _legal_mask(net, face, l)
                    if differed:
                        self.disagreements += 1
                    if not legal:
                        continue
                    for k in k_choices:
                        move = CaMove(face, l, k, -1)
                        new_nodes, fixed = _ca_response_task(
                            net, CaMove(face, l, k, 0)
                        )
                        didx = _tuple_index(
                            [new_nodes.index(v) for v in move.demanded()],
                            len(new_nodes),
                        )
                        del fixed[didx]
                        buckets: dict[int, list[Network]] = {}
                        for m in _ca_completions(
                            net.structure, new_nodes, fixed, self.counter
                        ):
                            buckets.setdefault(m.labels[didx], []).append(m)
                        out.append(_MoveClass(move, legal, buckets))
        else:
            st = net.structure
            for x in net.nodes:
                for y in net.nodes:
                    lab = net.label((x, y))
                    pairs = tuple(
                        (a, b)
                        for a in range(st.natoms)
                        for b in range(st.natoms)
                        if st.consistent(lab, a, b)
                    )
                    if not pairs:
                        continue
                    for z in _k_choices(self.spec, net, {x, y}):
                        self.counter.tick(st.natoms)
                        move = RaMove(x, y, z, -1, -1)
                        new_nodes, fixed = _ra_response_task(
                            net, RaMove(x, y, z, 0, 0)
                        )
                        s_new = len(new_nodes)
                        pos = {v: p for p, v in enumerate(new_nodes)}
                        i1 = pos[x] * s_new + pos[z]
                        i2 = pos[z] * s_new + pos[y]
                        del fixed[i1], fixed[i2]
                        buckets = {}
                        for m in _ra_completions(st, new_nodes, fixed, self.counter):
                            buckets.setdefault(
                                (m.labels[i1], m.labels[i2]), []
                            ).append(m)
                        out.append(_MoveClass(move, pairs, buckets))
        self.succ[key] = out
        return out

    def value(self, net: Network, r: int) -> int:
        """Rounds the responder can still survive from this position, in 0..r."""
        if r == 0:
            return 0
        key = (self.position_key(net), r)
        got = self.memo.get(key)
        if got is not None:
            self.memo_hits += 1
            return got
        self.counter.tick()
        best = r
        for cls in self.move_classes(net):
            if isinstance(cls.head, CaMove):
                assert isinstance(cls.legal, int)
                mask = cls.legal
                while mask and best > 0:
                    b = (mask & -mask).bit_length() - 1
                    mask &= mask - 1
                    contrib = self._class_contrib(cls.buckets.get(b), r)
                    if contrib < best:
                        best = contrib
            else:
                for pair in cls.legal:
                    if best == 0:
                        break
                    contrib = self._class_contrib(cls.buckets.get(pair), r)
                    if contrib < best:
                        best = contrib
            if best == 0:
                break
        self.memo[key] = best
        return best

    def _class_contrib(self, responses: list[Network] | None, r: int) -> int:
        if not responses:
            return 0
        sub_best = -1
        for m in responses:
            v = self.value(m, r - 1)
            if v > sub_best:
                sub_best = v
            if sub_best == r - 1:
                break
        return 1 + sub_best


def _extract_exists(
    solver: _BranchSolver, opening: Network, rounds: int
) -> dict[str, str]:
    strategy: dict[str, str] = {}
    enc0, _pi0 = solver.canon(opening)
    strategy["open"] = enc0
    visited: set[tuple[str, int]] = set()

    def walk(net: Network, r: int) -> None:
        if r == 0:
            return
        enc, pi = solver.canon(net)
        if (enc, r) in visited:
            return
        visited.add((enc, r))
        s = len(net.nodes)
        for move in solver.moves(net):
            key = f"{enc}|r{r}|{_rename_move(move, pi, s).encode()}"
            chosen = None
            for response in _responses(net, move, solver.counter):
                if solver.value(response, r - 1) == r - 1:
                    chosen = response
                    break
            if chosen is None:
                raise RuntimeError(
                    "strategy extraction found a demand with no surviving response"
                )
            strategy[key] = _encode_response(net, chosen, pi)
            walk(chosen, r - 1)

    walk(opening, rounds)
    return strategy


def _extract_forall(
    solver: _BranchSolver, opening: Network, rounds: int, strategy: dict[str, str]
) -> None:
    """Record an optimal demand at every position the challenger can
    reach from this opening.  Keys are canonical, so sibling branches can
    share positions; an already-recorded demand is reused rather than
    overwritten, keeping the merged strategy self-consistent."""
    visited: set[tuple[str, int]] = set()

    def walk(net: Network, r: int) -> None:
        enc, pi = solver.canon(net)
        if (enc, r) in visited:
            return
        visited.add((enc, r))
        val = solver.value(net, r)
        if val >= r:
            raise RuntimeError("challenger extraction reached a surviving position")
        key = f"{enc}|r{r}"
        recorded = strategy.get(key)
        if recorded is not None:
            abstract: Move
            if isinstance(net, RaNetwork):
                abstract = RaMove.decode(recorded)
            else:
                abstract = CaMove.decode(recorded)
            move = _unrename_move(abstract, pi, net.nodes)
            for response in _responses(net, move, solver.counter):
                walk(response, r - 1)
            return
        s = len(net.nodes)
        for move in solver.moves(net):
            sub_best = -1
            responses = []
            for response in _responses(net, move, solver.counter):
                responses.append(response)
                v = solver.value(response, r - 1)
                if v > sub_best:
                    sub_best = v
            contrib = 0 if sub_best < 0 else 1 + sub_best
            if contrib == val:
                strategy[key] = _rename_move(move, pi, s).encode()
                for response in responses:
                    walk(response, r - 1)
                return
        raise RuntimeError("challenger extraction found no move achieving the value")

    walk(opening, rounds)


def _verify_exists(
    spec: GameSpec,
    solver: _BranchSolver,
    strategy: Mapping[str, str],
    initial_atom: int,
    rounds: int,
) -> None:
    enc0 = strategy.get("open")
    if enc0 is None:
        raise RuntimeError("responder strategy lacks an opening")
    s0, labels0 = _decode_labels(enc0)
    if spec.variant == VARIANT_TRIANGLE:
        assert isinstance(spec.structure, RaAtomStructure)
        opening: Network = RaNetwork(spec.structure, tuple(range(s0)), labels0)
    else:
        assert isinstance(spec.structure, CaAtomStructure)
        opening = CaNetwork(spec.structure, tuple(range(s0)), labels0)
    report = validate_network(opening)
    if not report.passed:
        raise RuntimeError(f"strategy opening is invalid: {report.violations[0]}")
    if initial_atom not in opening.labels:
        raise RuntimeError("strategy opening does not witness the demanded atom")
    visited: set[tuple[str, int]] = set()

    def walk(net: Network, r: int) -> None:
        if r == 0:
            return
        enc, pi = solver.canon(net)
        if (enc, r) in visited:
            return
        visited.add((enc, r))
        s = len(net.nodes)
        for move in solver.moves(net):
            key = f"{enc}|r{r}|{_rename_move(move, pi, s).encode()}"
            resp_enc = strategy.get(key)
            if resp_enc is None:
                raise RuntimeError(f"responder strategy has no answer at {key}")
            response = _decode_response(net, resp_enc, pi)
            report = validate_network(response)
            if not report.passed:
                raise RuntimeError(
                    f"strategy response is invalid: {report.violations[0]}"
                )
            _check_response_matches(net, move, response)
            walk(response, r - 1)

    walk(opening, rounds)


def _check_response_matches(net: Network, move: Move, response: Network) -> None:
    if isinstance(move, CaMove):
        reused = move.k in net.nodes
        expect_nodes = net.nodes if reused else tuple(sorted(net.nodes + (move.k,)))
        if response.nodes != expect_nodes:
            raise RuntimeError("response changes the node set beyond the demand")
        for t, a in net.mapping().items():
            if reused and move.k in t:
                continue
            if response.label(t) != a:
                raise RuntimeError("response rewrites a retained label")
        if response.label(move.demanded()) != move.b:
            raise RuntimeError("response does not deliver the demanded label")
    else:
        reused = move.z in net.nodes
        expect_nodes = net.nodes if reused else tuple(sorted(net.nodes + (move.z,)))
        if response.nodes != expect_nodes:
            raise RuntimeError("response changes the node set beyond the demand")
        for (u, v), a in net.mapping().items():
            if reused and move.z in (u, v):
                continue
            if response.label((u, v)) != a:
                raise RuntimeError("response rewrites a retained label")
        if response.label((move.x, move.z)) != move.a or response.label(
            (move.z, move.y)
        ) != move.b:
            raise RuntimeError("response does not deliver the demanded labels")


def _verify_forall(
    spec: GameSpec,
    solvers: Sequence[_BranchSolver],
    openings: Sequence[Network],
    strategy: Mapping[str, str],
    rounds: int,
) -> None:
    for solver, opening in zip(solvers, openings):
        visited: set[tuple[str, int]] = set()

        def walk(net: Network, r: int) -> None:
            enc, pi = solver.canon(net)
            if (enc, r) in visited:
                return
            visited.add((enc, r))
            move_enc = strategy.get(f"{enc}|r{r}")
            if move_enc is None:
                raise RuntimeError(
                    f"challenger strategy has no demand at {enc}|r{r}"
                )
            if spec.variant == VARIANT_TRIANGLE:
                abstract: Move = RaMove.decode(move_enc)
            else:
                abstract = CaMove.decode(move_enc)
            move = _unrename_move(abstract, pi, net.nodes)
            _check_move_legal(spec, net, move)
            any_response = False
            for response in _responses(net, move, solver.counter):
                any_response = True
                if r - 1 == 0:
                    raise RuntimeError(
                        "responder still alive when the round bound was reached"
                    )
                walk(response, r - 1)
            if not any_response:
                return

        walk(opening, rounds)


def _check_move_legal(spec: GameSpec, net: Network, move: Move) -> None:
    if isinstance(move, CaMove):
        assert isinstance(net, CaNetwork)
        st = net.structure
        if any(f not in net.nodes for f in move.face):
            raise RuntimeError("demand uses a face outside the network")
        if move.k in move.face:
            raise RuntimeError("demanded node collides with the face")
        if not 0 <= move.l < st.dim:
            raise RuntimeError("demand position out of range")
        union, _ = _legal_mask(net, move.face, move.l)
        if not (union >> move.b) & 1:
            raise RuntimeError("demanded atom is not below the cylindrified label")
        if spec.variant == VARIANT_FRESH:
            if move.k != _least_fresh(net.nodes):
                raise RuntimeError("fresh variant must demand the least fresh node")
        else:
            if move.k not in net.nodes and (
                move.k != _least_fresh(net.nodes)
                or len(net.nodes) >= spec.node_budget
            ):
                raise RuntimeError("demanded node exceeds the pebble budget")
    else:
        assert isinstance(net, RaNetwork)
        st = net.structure
        if move.x not in net.nodes or move.y not in net.nodes:
            raise RuntimeError("demand uses an edge outside the network")
        if move.z in (move.x, move.y):
            raise RuntimeError("demanded node collides with the edge")
        if not st.consistent(net.label((move.x, move.y)), move.a, move.b):
            raise RuntimeError("demanded atoms do not compose above the edge label")
        if move.z not in net.nodes and (
            move.z != _least_fresh(net.nodes) or len(net.nodes) >= spec.node_budget
        ):
            raise RuntimeError("demanded node exceeds the pebble budget")


def solve(
    spec: GameSpec,
    initial_atom: int,
    *,
    budget: int | None = None,
    workers: int = 1,
    canonical_memo: bool = True,
) -> SolveResult:
    """Exact winner of the truncated game opened on ``initial_atom``.

    Opening candidates are deduplicated up to node renaming and evaluated
    as independent branches (optionally in parallel); each branch owns its
    memo, so results and statistics are identical at every worker count.
    The returned strategy is replayed as a structural self-check before
    the result is handed back.
    """
    if not 0 <= initial_atom < spec.structure.natoms:
        raise ValueError(
            f"initial atom {initial_atom} out of range for "
            f"{spec.structure.natoms} atoms"
        )
    if workers < 1:
        raise ValueError("workers must be at least 1")
    if budget is None:
        budget = search_budget()
    bound = state_space_bound(spec)
    if spec.structure.natoms > MAX_GAME_ATOMS:
        raise BudgetExceededError(
            f"structure has {spec.structure.natoms} atoms, beyond the solver's "
            f"limit of {MAX_GAME_ATOMS}; state-space bound {bound}"
        )

    base = _Counter(budget, bound)
    all_openings = _openings(spec, initial_atom, base)
    openings: list[Network] = []
    seen_classes: set[str] = set()
    for net in all_openings:
        enc, _ = _canon_encoding(net.nodes, net.labels, net.arity)
        if enc not in seen_classes:
            seen_classes.add(enc)
            openings.append(net)

    if not openings:
        stats = SolveStats(
            states_explored=base.states,
            memo_hits=0,
            openings=0,
            representative_disagreements=0,
            state_space_bound=str(bound),
        )
        return SolveResult(FORALL, 0, {}, stats)

    solvers = [_BranchSolver(spec, budget, bound, canonical_memo) for _ in openings]

    def run_branch(i: int) -> int:
        return solvers[i].value(openings[i], spec.rounds)

    if workers == 1 or len(openings) == 1:
        values = [run_branch(i) for i in range(len(openings))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(run_branch, range(len(openings))))

    best = max(values)
    strategy: dict[str, str] = {}
    if best == spec.rounds:
        winner = EXISTS
        rounds_used = spec.rounds
        pick = values.index(best)
        strategy = _extract_exists(solvers[pick], openings[pick], spec.rounds)
        _verify_exists(spec, solvers[pick], strategy, initial_atom, spec.rounds)
    else:
        winner = FORALL
        rounds_used = best + 1
        for solver, opening in zip(solvers, openings):
            _extract_forall(solver, opening, spec.rounds, strategy)
        _verify_forall(spec, solvers, openings, strategy, spec.rounds)

    total_states = base.states + sum(s.counter.states for s in solvers)
    if total_states > budget:
        raise BudgetExceededError(
            f"search budget exhausted after {total_states} states "
            f"(budget {budget}, state-space bound {bound})"
        )
    stats = SolveStats(
        states_explored=total_states,
        memo_hits=sum(s.memo_hits for s in solvers),
        openings=len(openings),
        representative_disagreements=sum(s.disagreements for s in solvers),
        state_space_bound=str(bound),
    )
    return SolveResult(winner, rounds_used, strategy, stats)


# ---------------------------------------------------------------------------
# interactive play and transcripts


@dataclass(frozen=True)
class Transcript:
    """Serializable record of one play: who played which side, every
    event in order, and the outcome."""

    variant: str
    rounds: int
    pebbles: int | None
    human_side: str
    initial_atom: int
    events: tuple[dict, ...]
    winner: str | None
    resigned: bool
    final_nodes: tuple[int, ...] | None
    final_labels: tuple[int, ...] | None


def transcript_to_json(transcript: Transcript) -> str:
    data = {
        "variant": transcript.variant,
        "rounds": transcript.rounds,
        "pebbles": transcript.pebbles,
        "human_side": transcript.human_side,
        "initial_atom": transcript.initial_atom,
        "events": list(transcript.events),
        "winner": transcript.winner,
        "resigned": transcript.resigned,
        "final_nodes": list(transcript.final_nodes)
        if transcript.final_nodes is not None
        else None,
        "final_labels": list(transcript.final_labels)
        if transcript.final_labels is not None
        else None,
    }
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def transcript_from_json(text: str) -> Transcript:
    data = json.loads(text)
    return Transcript(
        variant=data["variant"],
        rounds=data["rounds"],
        pebbles=data["pebbles"],
        human_side=data["human_side"],
        initial_atom=data["initial_atom"],
        events=tuple(data["events"]),
        winner=data["winner"],
        resigned=data["resigned"],
        final_nodes=tuple(data["final_nodes"])
        if data["final_nodes"] is not None
        else None,
        final_labels=tuple(data["final_labels"])
        if data["final_labels"] is not None
        else None,
    )


class _Resigned(Exception):
    pass


class _Session:
    """Drives one play; the non-engine side's choices come from an agent
    callable so interactive and replay use the same engine path."""

    def __init__(
        self,
        spec: GameSpec,
        human_side: str,
        initial_atom: int,
        agent: Callable[[str, list], int],
        emit: Callable[[str], None],
        budget: int,
    ) -> None:
        self.spec = spec
        self.human_side = human_side
        self.initial_atom = initial_atom
        self.agent = agent
        self.emit = emit
        bound = state_space_bound(spec)
        self.solver = _BranchSolver(spec, budget, bound, True)
        self.events: list[dict] = []
        self.net: Network | None = None
        self.winner: str | None = None
        self.resigned = False

    def describe(self, net: Network) -> str:
        st = net.structure
        lines = [f"nodes: {list(net.nodes)}"]
        for t, a in net.mapping().items():
            lines.append(f"  {t} -> {st.atoms[a]}")
        return "\n".join(lines)

    def choose(self, kind: str, options: list) -> int:
        idx = self.agent(kind, options)
        if not 0 <= idx < len(options):
            raise ValueError(f"choice {idx} out of range")
        return idx

    def run(self) -> Transcript:
        try:
            self._run()
        except _Resigned:
            self.resigned = True
            self.winner = FORALL if self.human_side == EXISTS else EXISTS
            self.events.append({"kind": "resign", "actor": self.human_side})
        final_nodes = self.net.nodes if self.net is not None else None
        final_labels = self.net.labels if self.net is not None else None
        return Transcript(
            variant=self.spec.variant,
            rounds=self.spec.rounds,
            pebbles=self.spec.pebbles,
            human_side=self.human_side,
            initial_atom=self.initial_atom,
            events=tuple(self.events),
            winner=self.winner,
            resigned=self.resigned,
            final_nodes=final_nodes,
            final_labels=final_labels,
        )

    def _run(self) -> None:
        spec = self.spec
        openings = _openings(spec, self.initial_atom, self.solver.counter)
        if not openings:
            self.emit("no legal opening network exists")
            self.winner = FORALL
            self.events.append({"kind": "stuck", "actor": EXISTS, "round": 0})
            return
        if self.human_side == EXISTS:
            self.emit(f"pick an opening network for atom {self.initial_atom}:")
            for i, net in enumerate(openings[:50]):
                self.emit(f"[{i}] {self.describe(net)}")
            if len(openings) > 50:
                self.emit(
                    f"... {len(openings) - 50} more "
                    f"(any index up to {len(openings) - 1} accepted)"
                )
            idx = self.choose("open", openings)
            self.net = openings[idx]
            self.events.append(
                {"kind": "open", "actor": EXISTS, "choice": idx,
                 "labels": list(self.net.labels), "nodes": list(self.net.nodes)}
            )
        else:
            values = [self.solver.value(net, spec.rounds) for net in openings]
            best = max(values)
            idx = values.index(best)
            self.net = openings[idx]
            self.events.append(
                {"kind": "open", "actor": EXISTS, "choice": idx,
                 "labels": list(self.net.labels), "nodes": list(self.net.nodes)}
            )
            self.emit(f"engine opens with:\n{self.describe(self.net)}")
        for r in range(spec.rounds, 0, -1):
            self.emit(f"--- {r} round(s) left ---")
            self.emit(self.describe(self.net))
            moves = self.solver.moves(self.net)
            if not moves:
                self.emit("no demand is available; the responder survives")
                self.winner = EXISTS
                return
            if self.human_side == FORALL:
                self.emit("pick a demand:")
                for i, m in enumerate(moves[:50]):
                    self.emit(f"[{i}] {m.encode()}")
                if len(moves) > 50:
                    self.emit(
                        f"... {len(moves) - 50} more "
                        f"(any index up to {len(moves) - 1} accepted)"
                    )
                midx = self.choose("demand", moves)
                move = moves[midx]
            else:
                scored = []
                for m in moves:
                    sub = -1
                    for response in _responses(self.net, m, self.solver.counter):
                        sub = max(sub, self.solver.value(response, r - 1))
                        if sub == r - 1:
                            break
                    scored.append(0 if sub < 0 else 1 + sub)
                best = min(scored)
                midx = scored.index(best)
                move = moves[midx]
                self.emit(f"engine demands {move.encode()}")
            self.events.append(
                {"kind": "demand", "actor": FORALL, "choice": midx,
                 "move": move.encode()}
            )
            responses = list(_responses(self.net, move, self.solver.counter))
            if not responses:
                self.emit("no legal response exists; the challenger wins")
                self.winner = FORALL
                self.events.append(
                    {"kind": "stuck", "actor": EXISTS, "round": spec.rounds - r + 1}
                )
                return
            if self.human_side == EXISTS:
                self.emit("pick a response:")
                for i, net in enumerate(responses[:50]):
                    self.emit(f"[{i}] {self.describe(net)}")
                if len(responses) > 50:
                    self.emit(
                        f"... {len(responses) - 50} more "
                        f"(any index up to {len(responses) - 1} accepted)"
                    )
                ridx = self.choose("respond", responses)
            else:
                values = [self.solver.value(n, r - 1) for n in responses]
                best = max(values)
                ridx = values.index(best)
                self.emit(f"engine responds:\n{self.describe(responses[ridx])}")
            self.net = responses[ridx]
            self.events.append(
                {"kind": "respond", "actor": EXISTS, "choice": ridx,
                 "labels": list(self.net.labels), "nodes": list(self.net.nodes)}
            )
        self.emit("all rounds survived; the responder wins")
        self.winner = EXISTS


def play_interactive(
    spec: GameSpec,
    side: str,
    initial_atom: int,
    *,
    input_stream=None,
    output_stream=None,
    budget: int | None = None,
) -> Transcript:
    """Text-mode play against the engine; ``side`` is the human's side.

    The engine answers with an optimal move within the remaining-round
    horizon.  Moves are picked by index from printed legal lists; the
    word ``resign`` concedes; illegal input re-prompts.
    """
    import sys

    if side not in (EXISTS, FORALL):
        raise ValueError(f"side must be {EXISTS} or {FORALL}")
    inp = sys.stdin if input_stream is None else input_stream
    outp = sys.stdout if output_stream is None else output_stream
    if budget is None:
        budget = search_budget()

    def emit(text: str) -> None:
        print(text, file=outp)

    def agent(kind: str, options: list) -> int:
        while True:
            emit(f"your choice (0..{len(options) - 1}, or resign):")
            line = inp.readline()
            if not line:
                raise _Resigned()
            line = line.strip()
            if line == "resign":
                raise _Resigned()
            try:
                idx = int(line)
            except ValueError:
                emit("not a number; try again")
                continue
            if 0 <= idx < len(options):
                return idx
            emit("index out of range; try again")

    session = _Session(spec, side, initial_atom, agent, emit, budget)
    transcript = session.run()
    emit(f"winner: {transcript.winner}")
    return transcript


def replay_transcript(
    spec: GameSpec, transcript: Transcript, *, budget: int | None = None
) -> Network | None:
    """Re-run a recorded play: the human's recorded choices are replayed
    and the engine's moves are recomputed; any divergence from the record
    raises.  Returns the final network (None when no opening existed)."""
    if budget is None:
        budget = search_budget()
    if (
        transcript.variant != spec.variant
        or transcript.rounds != spec.rounds
        or transcript.pebbles != spec.pebbles
    ):
        raise ValueError("transcript does not match the game specification")
    human_events = [
        e
        for e in transcript.events
        if e["kind"] in ("open", "demand", "respond", "resign")
        and e["actor"] == transcript.human_side
    ]
    cursor = iter(human_events)

    def agent(kind: str, options: list) -> int:
        try:
            event = next(cursor)
        except StopIteration as exc:
            raise ValueError("transcript ended before the play did") from exc
        if event["kind"] == "resign":
            raise _Resigned()
        if event["kind"] != kind:
            raise ValueError(
                f"transcript event {event['kind']!r} does not match the "
                f"expected {kind!r} choice"
            )
        return event["choice"]

    session = _Session(
        spec,
        transcript.human_side,
        transcript.initial_atom,
        agent,
        lambda _t: None,
        budget,
    )
    replayed = session.run()
    if replayed.events != transcript.events:
        raise RuntimeError("replay diverged from the recorded events")
    if (
        replayed.final_nodes != transcript.final_nodes
        or replayed.final_labels != transcript.final_labels
    ):
        raise RuntimeError("replay produced a different final network")
    return session.net


# ---------------------------------------------------------------------------
# DOT export


def network_to_dot(net: Network) -> str:
    """Graphviz rendering: nodes, pair edges with their labels, and for
    wider arities a comment block listing every tuple's label."""
    st = net.structure
    lines = ["graph network {"]
    for v in net.nodes:
        lines.append(f'  n{v} [label="{v}"];')
    if net.arity == 2:
        for u in net.nodes:
            for v in net.nodes:
                if u <= v:
                    lines.append(
                        f'  n{u} -- n{v} [label="{st.atoms[net.label((u, v))]}"];'
                    )
    else:
        for u in net.nodes:
            for v in net.nodes:
                if u < v:
                    pad = (v,) * (net.arity - 2)
                    lines.append(
                        f'  n{u} -- n{v} [label="{st.atoms[net.label((u, v) + pad)]}"];'
                    )
        lines.append("  // full labelling:")
        for t, a in net.mapping().items():
            lines.append(f"  // {t} -> {st.atoms[a]}")
    lines.append("}")
    return "\n".join(lines) + "\n"
