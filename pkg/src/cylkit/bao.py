"""Finite cylindric/polyadic atom structures and their complex algebras.

A structure of dimension n carries, for each index i < n, a cylindrifier
accessibility relation T_i on atoms, for each ordered pair (i, j) a diagonal
atom set E_ij, and optionally, for each unordered pair, a transposition
relation P_ij.  The complex algebra lives on subsets of the atom set:
cylindrification is the T_i-preimage operator, diagonals are constants,
and transpositions act through P_ij.

Elements are dense bitmasks over atom indices.  Everything is immutable
after construction; operations are pure and freely shareable across tasks.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

MAX_DIM = 8
MAX_ATOMS = 1 << 16

Pair = tuple[int, int]


class StructureMismatchError(ValueError):
    """Raised when an operation mixes Elements of different structures."""


class SignatureError(ValueError):
    """Raised when a transposition operation hits a structure without P_ij."""


class BudgetExceededError(RuntimeError):
    """Raised when an exhaustive procedure would exceed its stated budget."""


def _pair_rank(i: int, j: int, dim: int) -> int:
    """Rank of the unordered pair {i, j}, i < j, in lexicographic order."""
    if not 0 <= i < j < dim:
        raise ValueError(f"need 0 <= i < j < dim, got ({i},{j}) at dim {dim}")
    return i * (2 * dim - i - 1) // 2 + (j - i - 1)


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True)
class CaAtomStructure:
    """Dimension-n atom frame: atoms, T_i relations, E_ij sets, optional P_ij.

    Fields are canonical immutable containers; `transp` is None for a pure
    cylindric signature, otherwise one relation per unordered index pair in
    lexicographic order.  Construction enforces only the type invariants
    (index ranges, E_ii full, P_ij a functional bijective involution);
    the genuine frame conditions live in check_ca_frame.
    """

    dim: int
    atoms: tuple[str, ...]
    cyl: tuple[frozenset[Pair], ...]
    diag: tuple[tuple[frozenset[int], ...], ...]
    transp: tuple[frozenset[Pair], ...] | None = None

    def __post_init__(self) -> None:
        if not 2 <= self.dim <= MAX_DIM:
            raise ValueError(f"dimension must be in 2..{MAX_DIM}, got {self.dim}")
        n = len(self.atoms)
        if not 0 < n <= MAX_ATOMS:
            raise ValueError(f"atom count must be in 1..{MAX_ATOMS}, got {n}")
        if len(set(self.atoms)) != n:
            raise ValueError("atom labels must be unique")
        if len(self.cyl) != self.dim:
            raise ValueError("need one cylindrifier relation per index")
        for rel in self.cyl:
            for a, b in rel:
                if not (0 <= a < n and 0 <= b < n):
                    raise ValueError(f"cylindrifier pair ({a},{b}) out of range")
        if len(self.diag) != self.dim or any(len(row) != self.dim for row in self.diag):
            raise ValueError("diagonal sets must form a dim x dim grid")
        full = frozenset(range(n))
        for i in range(self.dim):
            for j in range(self.dim):
                if not self.diag[i][j] <= full:
                    raise ValueError(f"diagonal set E_{i}{j} out of range")
            if self.diag[i][i] != full:
                raise ValueError(f"E_{i}{i} must be the full atom set")
        if self.transp is not None:
            npairs = self.dim * (self.dim - 1) // 2
            if len(self.transp) != npairs:
                raise ValueError("need one transposition relation per unordered pair")
            for rel in self.transp:
                img = {}
                for a, b in rel:
                    if not (0 <= a < n and 0 <= b < n):
                        raise ValueError(f"transposition pair ({a},{b}) out of range")
                    if a in img:
                        raise ValueError("transposition relation is not functional")
                    img[a] = b
                if len(img) != n or set(img.values()) != set(range(n)):
                    raise ValueError("transposition relation is not a bijection on atoms")
                if any(img[img[a]] != a for a in img):
                    raise ValueError("transposition relation is not an involution")
        object.__setattr__(self, "_full_mask", (1 << n) - 1)
        # column images: _cyl_img[i][b] = mask of {a : (a,b) in T_i}
        cyl_img = []
        for rel in self.cyl:
            col = [0] * n
            for a, b in rel:
                col[b] |= 1 << a
            cyl_img.append(tuple(col))
        object.__setattr__(self, "_cyl_img", tuple(cyl_img))
        diag_mask = tuple(
            tuple(sum(1 << a for a in self.diag[i][j]) for j in range(self.dim))
            for i in range(self.dim)
        )
        object.__setattr__(self, "_diag_mask", diag_mask)
        if self.transp is None:
            object.__setattr__(self, "_transp_img", None)
        else:
            timg = []
            for rel in self.transp:
                col = [0] * n
                for a, b in rel:
                    col[b] |= 1 << a
                timg.append(tuple(col))
            object.__setattr__(self, "_transp_img", tuple(timg))

    @property
    def natoms(self) -> int:
        return len(self.atoms)

    @property
    def full_mask(self) -> int:
        return self._full_mask  # type: ignore[attr-defined]

    def cyl_image_masks(self, i: int) -> tuple[int, ...]:
        """Per atom b, the mask of {a : (a,b) in T_i}."""
        self._check_index(i)
        return self._cyl_img[i]  # type: ignore[attr-defined]

    def diag_mask(self, i: int, j: int) -> int:
        self._check_index(i)
        self._check_index(j)
        return self._diag_mask[i][j]  # type: ignore[attr-defined]

    def transp_image_masks(self, i: int, j: int) -> tuple[int, ...]:
        if self.transp is None:
            raise SignatureError("structure carries no transposition relations")
        return self._transp_img[_pair_rank(min(i, j), max(i, j), self.dim)]  # type: ignore[attr-defined]

    def transp_rel(self, i: int, j: int) -> frozenset[Pair]:
        if self.transp is None:
            raise SignatureError("structure carries no transposition relations")
        return self.transp[_pair_rank(min(i, j), max(i, j), self.dim)]

    def _check_index(self, i: int) -> None:
        if not 0 <= i < self.dim:
            raise ValueError(f"index {i} out of range for dimension {self.dim}")

    @classmethod
    def build(
        cls,
        dim: int,
        atoms: Sequence[str],
        cyl: Sequence[Iterable[Pair]],
        diag: Sequence[Sequence[Iterable[int]]],
        transp: Sequence[Iterable[Pair]] | None = None,
    ) -> "CaAtomStructure":
        """Normalize arbitrary iterables into the canonical frozen form."""
        return cls(
            dim=dim,
            atoms=tuple(atoms),
            cyl=tuple(frozenset((a, b) for a, b in rel) for rel in cyl),
            diag=tuple(tuple(frozenset(row_j) for row_j in row) for row in diag),
            transp=None if transp is None else tuple(
                frozenset((a, b) for a, b in rel) for rel in transp
            ),
        )


@dataclass(frozen=True)
class Element:
    """A set of atom indices over a fixed structure, stored as a bitmask."""

    structure: object
    mask: int

    def __post_init__(self) -> None:
        full = self.structure.full_mask  # type: ignore[union-attr]
        if self.mask & ~full:
            raise ValueError("element mask contains out-of-range atom indices")

    def _join(self, other: "Element") -> object:
        if self.structure is other.structure or self.structure == other.structure:
            return self.structure
        raise StructureMismatchError("elements belong to different structures")

    def __and__(self, other: "Element") -> "Element":
        return Element(self._join(other), self.mask & other.mask)

    def __or__(self, other: "Element") -> "Element":
        return Element(self._join(other), self.mask | other.mask)

    def __sub__(self, other: "Element") -> "Element":
        return Element(self._join(other), self.mask & ~other.mask)

    def __invert__(self) -> "Element":
        return Element(self.structure, self.mask ^ self.structure.full_mask)  # type: ignore[union-attr]

    def __le__(self, other: "Element") -> bool:
        self._join(other)
        return self.mask & ~other.mask == 0

    def __contains__(self, atom_index: int) -> bool:
        return bool(self.mask >> atom_index & 1)

    def __iter__(self) -> Iterator[int]:
        return _bits(self.mask)

    def __len__(self) -> int:
        return self.mask.bit_count()

    @property
    def is_empty(self) -> bool:
        return self.mask == 0

    def atom_indices(self) -> tuple[int, ...]:
        return tuple(_bits(self.mask))

    def labels(self) -> tuple[str, ...]:
        return tuple(self.structure.atoms[a] for a in self)  # type: ignore[union-attr]


def element(structure: object, indices: Iterable[int]) -> Element:
    mask = 0
    for a in indices:
        mask |= 1 << a
    return Element(structure, mask)


def singleton(structure: object, atom_index: int) -> Element:
    return Element(structure, 1 << atom_index)


def empty(structure: object) -> Element:
    return Element(structure, 0)


def top(structure: object) -> Element:
    return Element(structure, structure.full_mask)  # type: ignore[union-attr]


def _owned(structure: CaAtomStructure, x: Element) -> None:
    if x.structure is structure or x.structure == structure:
        return
    raise StructureMismatchError("element does not belong to this structure")


def cyl(structure: CaAtomStructure, i: int, x: Element) -> Element:
    """T_i-preimage: {a : exists b in x with (a,b) in T_i}."""
    _owned(structure, x)
    tables = structure.cyl_image_masks(i)
    out = 0
    for b in _bits(x.mask):
        out |= tables[b]
    return Element(structure, out)


def diag(structure: CaAtomStructure, i: int, j: int) -> Element:
    """The diagonal set E_ij as an element."""
    return Element(structure, structure.diag_mask(i, j))


def subst_repl(structure: CaAtomStructure, i: int, j: int, x: Element) -> Element:
    """Replacement substitution: x when i = j, else cyl(i, x meet E_ij)."""
    _owned(structure, x)
    structure._check_index(i)
    structure._check_index(j)
    if i == j:
        return x
    return cyl(structure, i, Element(structure, x.mask & structure.diag_mask(i, j)))


def subst_transp(structure: CaAtomStructure, i: int, j: int, x: Element) -> Element:
    """Transposition substitution: {a : exists b in x with (a,b) in P_ij}."""
    _owned(structure, x)
    structure._check_index(i)
    structure._check_index(j)
    if i == j:
        return x
    tables = structure.transp_image_masks(i, j)
    out = 0
    for b in _bits(x.mask):
        out |= tables[b]
    return Element(structure, out)


def dual_cyl(structure: CaAtomStructure, i: int, x: Element) -> Element:
    """The dual cylindrifier: complement of cyl of complement."""
    return ~cyl(structure, i, ~x)


def delta(structure: CaAtomStructure, x: Element) -> frozenset[int]:
    """Support: the set of indices whose cylindrifier moves x."""
    _owned(structure, x)
    return frozenset(
        i for i in range(structure.dim) if cyl(structure, i, x).mask != x.mask
    )


# ---------------------------------------------------------------------------
# frame conditions


@dataclass(frozen=True)
class FrameCondition:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class FrameReport:
    passed: bool
    conditions: tuple[FrameCondition, ...]

    def failing(self) -> tuple[FrameCondition, ...]:
        return tuple(c for c in self.conditions if not c.passed)

    def condition(self, name: str) -> FrameCondition:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)


def _compose_cols(outer: Sequence[int], inner: Sequence[int]) -> list[int]:
    """Column masks of the relational composite outer after inner.

    col[b] of the result is {a : exists c with a in outer-col[c], c in inner-col[b]}.
    """
    out = []
    for col_b in inner:
        acc = 0
        for c in _bits(col_b):
            acc |= outer[c]
        out.append(acc)
    return out


def check_ca_frame(structure: CaAtomStructure) -> FrameReport:
    """Evaluate the fixed frame-condition list for the cylindric signature.

    Conditions: each T_i an equivalence; pairwise commuting composition;
    E_ii full; the diagonal chain rule E_ij = T_k-image of (E_ik meet E_kj)
    for every k outside {i,j}; T_i-uniqueness inside E_ij for i != j; and,
    when transpositions are present, P_ij compatibility with T and E under
    the index swap.  Exhaustive equational checking is the ground truth this
    list is validated against.
    """
    n = structure.natoms
    dim = structure.dim
    conds: list[FrameCondition] = []

    for i in range(dim):
        rel = structure.cyl[i]
        refl = all((a, a) in rel for a in range(n))
        conds.append(FrameCondition(f"T{i}_reflexive", refl))
        sym = all((b, a) in rel for a, b in rel)
        conds.append(FrameCondition(f"T{i}_symmetric", sym))
        cols = structure.cyl_image_masks(i)
        trans = all(cols[a] & ~cols[b] == 0 for a, b in rel)
        conds.append(FrameCondition(f"T{i}_transitive", trans))

    for i in range(dim):
        for j in range(i + 1, dim):
            ij = _compose_cols(structure.cyl_image_masks(i), structure.cyl_image_masks(j))
            ji = _compose_cols(structure.cyl_image_masks(j), structure.cyl_image_masks(i))
            conds.append(FrameCondition(f"commute_T{i}_T{j}", ij == ji))

    for i in range(dim):
        conds.append(
            FrameCondition(f"E{i}{i}_full", structure.diag_mask(i, i) == structure.full_mask)
        )

    for i in range(dim):
        for j in range(dim):
            for k in range(dim):
                if k in (i, j):
                    continue
                meet = structure.diag_mask(i, k) & structure.diag_mask(k, j)
                image = 0
                cols = structure.cyl_image_masks(k)
                for b in _bits(meet):
                    image |= cols[b]
                ok = image == structure.diag_mask(i, j)
                conds.append(FrameCondition(f"diag_chain_E{i}{j}_via_{k}", ok))

    for i in range(dim):
        for j in range(dim):
            if i == j:
                continue
            dm = structure.diag_mask(i, j)
            ok = True
            for a, b in structure.cyl[i]:
                if a != b and dm >> a & 1 and dm >> b & 1:
                    ok = False
                    break
            conds.append(FrameCondition(f"diag_unique_E{i}{j}_in_T{i}", ok))

    if structure.transp is not None:
        for i in range(dim):
            for j in range(i + 1, dim):
                rel = structure.transp_rel(i, j)
                img = dict(rel)
                inv = len(img) == n and all(img.get(img[a]) == a for a in img)
                conds.append(FrameCondition(f"P{i}{j}_involution", inv))
                swap = {i: j, j: i}
                pcols = structure.transp_image_masks(i, j)
                ok = True
                for k in range(dim):
                    lhs = _compose_cols(pcols, structure.cyl_image_masks(k))
                    rhs = _compose_cols(structure.cyl_image_masks(swap.get(k, k)), pcols)
                    if lhs != rhs:
                        ok = False
                        break
                conds.append(FrameCondition(f"P{i}{j}_cyl_compat", ok))
                ok = True
                for k in range(dim):
                    for l in range(dim):
                        image = 0
                        for b in _bits(structure.diag_mask(k, l)):
                            image |= pcols[b]
                        if image != structure.diag_mask(swap.get(k, k), swap.get(l, l)):
                            ok = False
                conds.append(FrameCondition(f"P{i}{j}_diag_compat", ok))

    return FrameReport(all(c.passed for c in conds), tuple(conds))


# ---------------------------------------------------------------------------
# JSON serialization


def structure_to_dict(structure: CaAtomStructure) -> dict:
    out: dict = {
        "dim": structure.dim,
        "atoms": list(structure.atoms),
        "cyl": [sorted([a, b] for a, b in rel) for rel in structure.cyl],
        "diag": [
            [sorted(structure.diag[i][j]) for j in range(structure.dim)]
            for i in range(structure.dim)
        ],
    }
    if structure.transp is not None:
        pairs = [
            (i, j)
            for i in range(structure.dim)
            for j in range(i + 1, structure.dim)
        ]
        out["transp"] = [
            [i, j, sorted([a, b] for a, b in structure.transp_rel(i, j))]
            for i, j in pairs
        ]
    return out


def structure_to_json(structure: CaAtomStructure) -> str:
    return json.dumps(structure_to_dict(structure), sort_keys=True, indent=2) + "\n"


def structure_from_dict(data: Mapping) -> CaAtomStructure:
    transp = None
    if "transp" in data:
        dim = data["dim"]
        npairs = dim * (dim - 1) // 2
        rels: list[frozenset[Pair]] = [frozenset()] * npairs
        for i, j, pairs in data["transp"]:
            rels[_pair_rank(i, j, dim)] = frozenset((a, b) for a, b in pairs)
        transp = rels
    return CaAtomStructure.build(
        dim=data["dim"],
        atoms=[str(s) for s in data["atoms"]],
        cyl=[[(a, b) for a, b in rel] for rel in data["cyl"]],
        diag=data["diag"],
        transp=transp,
    )


def structure_from_json(text: str) -> CaAtomStructure:
    return structure_from_dict(json.loads(text))
