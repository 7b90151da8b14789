"""Term AST over the cylindric/polyadic signature, evaluation, and checking.

Terms are frozen dataclass trees with integer-indexed variables.  The
evaluator interprets them in the complex algebra of a structure.  The
equation checker decides equations and inequalities in three modes:
exhaustive (all element assignments, a decision procedure for the finite
complex algebra), atoms (singleton assignments), and seeded sampling.

The sc-word calculus turns a string of replacement-substitution and
cylindrifier tokens into the partial self-map of indices it induces.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence, Union

import numpy as np

from .bao import (
    CaAtomStructure,
    Element,
    cyl,
    diag,
    subst_repl,
    subst_transp,
)


class Term:
    """Base class for AST nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Zero(Term):
    pass


@dataclass(frozen=True)
class One(Term):
    pass


@dataclass(frozen=True)
class Var(Term):
    k: int


@dataclass(frozen=True)
class Complement(Term):
    arg: Term


@dataclass(frozen=True)
class Meet(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Join(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Cyl(Term):
    i: int
    arg: Term


@dataclass(frozen=True)
class Diag(Term):
    i: int
    j: int


@dataclass(frozen=True)
class SubstRepl(Term):
    i: int
    j: int
    arg: Term


@dataclass(frozen=True)
class SubstTransp(Term):
    i: int
    j: int
    arg: Term


@dataclass(frozen=True)
class SwapMacro(Term):
    """Coordinate swap of i and j routed through a spare index k."""

    k: int
    i: int
    j: int
    arg: Term


@dataclass(frozen=True)
class DualCyl(Term):
    i: int
    arg: Term


def expand_swap(t: SwapMacro) -> Term:
    """Expansion of the swap macro as a chain of replacement substitutions.

    The chain parks coordinate j's value at the spare index k, overwrites j
    from i, then overwrites i from k; on elements not depending on index k
    the net effect is the (i,j) coordinate swap.
    """
    return SubstRepl(t.k, t.i, SubstRepl(t.i, t.j, SubstRepl(t.j, t.k, t.arg)))


def variables(t: Term) -> frozenset[int]:
    if isinstance(t, Var):
        return frozenset({t.k})
    if isinstance(t, (Zero, One, Diag)):
        return frozenset()
    if isinstance(t, (Meet, Join)):
        return variables(t.left) | variables(t.right)
    return variables(t.arg)  # type: ignore[union-attr]


def eval_term(structure: CaAtomStructure, t: Term, env: Mapping[int, Element]) -> Element:
    """Denotation of t under env in the complex algebra of the structure."""
    if isinstance(t, Zero):
        return Element(structure, 0)
    if isinstance(t, One):
        return Element(structure, structure.full_mask)
    if isinstance(t, Var):
        if t.k not in env:
            raise ValueError(f"unbound variable {t.k}")
        x = env[t.k]
        if not (x.structure is structure or x.structure == structure):
            raise ValueError("environment element belongs to a different structure")
        return x
    if isinstance(t, Complement):
        return ~eval_term(structure, t.arg, env)
    if isinstance(t, Meet):
        return eval_term(structure, t.left, env) & eval_term(structure, t.right, env)
    if isinstance(t, Join):
        return eval_term(structure, t.left, env) | eval_term(structure, t.right, env)
    if isinstance(t, Cyl):
        return cyl(structure, t.i, eval_term(structure, t.arg, env))
    if isinstance(t, Diag):
        return diag(structure, t.i, t.j)
    if isinstance(t, SubstRepl):
        return subst_repl(structure, t.i, t.j, eval_term(structure, t.arg, env))
    if isinstance(t, SubstTransp):
        return subst_transp(structure, t.i, t.j, eval_term(structure, t.arg, env))
    if isinstance(t, SwapMacro):
        return eval_term(structure, expand_swap(t), env)
    if isinstance(t, DualCyl):
        return ~cyl(structure, t.i, ~eval_term(structure, t.arg, env))
    raise TypeError(f"unknown term node {t!r}")


# ---------------------------------------------------------------------------
# vectorized evaluation over arrays of masks (exhaustive checking)


def _apply_tables(tables: Sequence[int], arr: np.ndarray, natoms: int) -> np.ndarray:
    out = np.zeros_like(arr)
    for a in range(natoms):
        out |= np.where((arr >> np.uint32(a)) & 1, np.uint32(tables[a]), np.uint32(0))
    return out


def _eval_vec(
    structure: CaAtomStructure, t: Term, env: Mapping[int, np.ndarray | int]
) -> np.ndarray | int:
    """Evaluate t where variables map to scalar masks or arrays of masks."""
    n = structure.natoms
    full = structure.full_mask
    if isinstance(t, Zero):
        return 0
    if isinstance(t, One):
        return full
    if isinstance(t, Var):
        if t.k not in env:
            raise ValueError(f"unbound variable {t.k}")
        return env[t.k]
    if isinstance(t, Complement):
        return _eval_vec(structure, t.arg, env) ^ np.uint32(full)
    if isinstance(t, Meet):
        return _eval_vec(structure, t.left, env) & _eval_vec(structure, t.right, env)
    if isinstance(t, Join):
        return _eval_vec(structure, t.left, env) | _eval_vec(structure, t.right, env)
    if isinstance(t, Diag):
        return structure.diag_mask(t.i, t.j)
    if isinstance(t, SwapMacro):
        return _eval_vec(structure, expand_swap(t), env)
    if isinstance(t, (Cyl, DualCyl, SubstRepl, SubstTransp)):
        inner = _eval_vec(structure, t.arg, env)
        if isinstance(t, DualCyl):
            inner = inner ^ np.uint32(full)
        elif isinstance(t, SubstRepl):
            if t.i == t.j:
                return inner
            inner = inner & np.uint32(structure.diag_mask(t.i, t.j))
        if isinstance(inner, (int, np.integer)):
            inner = np.array([inner], dtype=np.uint32)
            scalar = True
        else:
            scalar = False
        if isinstance(t, SubstTransp):
            if t.i == t.j:
                out = inner
            else:
                out = _apply_tables(structure.transp_image_masks(t.i, t.j), inner, n)
        else:
            out = _apply_tables(structure.cyl_image_masks(t.i), inner, n)
        if isinstance(t, DualCyl):
            out = out ^ np.uint32(full)
        return int(out[0]) if scalar else out
    raise TypeError(f"unknown term node {t!r}")


# ---------------------------------------------------------------------------
# equation checking


@dataclass(frozen=True)
class Exhaustive:
    """Try every element assignment; decision procedure for the structure."""


@dataclass(frozen=True)
class AtomsMode:
    """Try every singleton (atom) assignment."""


@dataclass(frozen=True)
class Sample:
    """Try `count` assignments drawn from a seeded pseudo-random generator."""

    seed: int
    count: int


CheckMode = Union[Exhaustive, AtomsMode, Sample]


@dataclass(frozen=True)
class EquationReport:
    holds: bool
    counterexample: tuple[tuple[int, Element], ...] | None
    assignments: int
    mode: str
    relation: str

    def counterexample_env(self) -> dict[int, Element] | None:
        return None if self.counterexample is None else dict(self.counterexample)


def _violates(relation: str, lv: int, rv: int) -> bool:
    if relation == "eq":
        return lv != rv
    if relation == "leq":
        return lv & ~rv != 0
    raise ValueError(f"unknown relation {relation!r}")


def check_equation(
    structure: CaAtomStructure,
    lhs: Term,
    rhs: Term,
    mode: CheckMode = Exhaustive(),
    relation: str = "eq",
) -> EquationReport:
    """Check lhs = rhs (or lhs <= rhs) under the given assignment mode."""
    if relation not in ("eq", "leq"):
        raise ValueError(f"unknown relation {relation!r}")
    vs = sorted(variables(lhs) | variables(rhs))
    n = structure.natoms

    if isinstance(mode, Exhaustive):
        if len(vs) > 2:
            raise ValueError("exhaustive mode supports at most 2 variables")
        if n > 16:
            raise ValueError("exhaustive mode requires at most 2^16 elements per variable")
        return _check_exhaustive(structure, lhs, rhs, relation, vs)

    if isinstance(mode, AtomsMode):
        if n ** max(len(vs), 1) > 1 << 20:
            raise ValueError("atoms mode bound exceeded")
        count = 0
        for combo in _product_indices(n, len(vs)):
            env = {v: Element(structure, 1 << a) for v, a in zip(vs, combo)}
            count += 1
            lv = eval_term(structure, lhs, env).mask
            rv = eval_term(structure, rhs, env).mask
            if _violates(relation, lv, rv):
                return EquationReport(False, tuple(sorted(env.items())), count, "atoms", relation)
        return EquationReport(True, None, count, "atoms", relation)

    if isinstance(mode, Sample):
        rng = random.Random(mode.seed)
        for trial in range(mode.count):
            env = {v: Element(structure, rng.getrandbits(n)) for v in vs}
            lv = eval_term(structure, lhs, env).mask
            rv = eval_term(structure, rhs, env).mask
            if _violates(relation, lv, rv):
                return EquationReport(
                    False, tuple(sorted(env.items())), trial + 1, "sample", relation
                )
        return EquationReport(True, None, mode.count, "sample", relation)

    raise TypeError(f"unknown mode {mode!r}")


def _product_indices(n: int, arity: int) -> Iterator[tuple[int, ...]]:
    if arity == 0:
        yield ()
        return
    for head in range(n):
        for tail in _product_indices(n, arity - 1):
            yield (head, *tail)


def _check_exhaustive(
    structure: CaAtomStructure,
    lhs: Term,
    rhs: Term,
    relation: str,
    vs: list[int],
) -> EquationReport:
    n = structure.natoms
    total = 1 << n
    if not vs:
        lv = eval_term(structure, lhs, {}).mask
        rv = eval_term(structure, rhs, {}).mask
        bad = _violates(relation, lv, rv)
        return EquationReport(not bad, () if bad else None, 1, "exhaustive", relation)

    all_masks = np.arange(total, dtype=np.uint32)
    if len(vs) == 1:
        lv = _eval_vec(structure, lhs, {vs[0]: all_masks})
        rv = _eval_vec(structure, rhs, {vs[0]: all_masks})
        lv = np.broadcast_to(np.asarray(lv, dtype=np.uint32), (total,))
        rv = np.broadcast_to(np.asarray(rv, dtype=np.uint32), (total,))
        viol = (lv != rv) if relation == "eq" else (lv & ~rv & np.uint32(structure.full_mask)) != 0
        idx = np.nonzero(viol)[0]
        if idx.size:
            env = ((vs[0], Element(structure, int(idx[0]))),)
            return EquationReport(False, env, total, "exhaustive", relation)
        return EquationReport(True, None, total, "exhaustive", relation)

    # two variables: outer scalar loop, inner vectorized sweep
    full = np.uint32(structure.full_mask)
    for xmask in range(total):
        env = {vs[0]: xmask, vs[1]: all_masks}
        lv = _eval_vec(structure, lhs, env)
        rv = _eval_vec(structure, rhs, env)
        lv = np.broadcast_to(np.asarray(lv, dtype=np.uint32), (total,))
        rv = np.broadcast_to(np.asarray(rv, dtype=np.uint32), (total,))
        viol = (lv != rv) if relation == "eq" else (lv & ~rv & full) != 0
        idx = np.nonzero(viol)[0]
        if idx.size:
            env_out = (
                (vs[0], Element(structure, xmask)),
                (vs[1], Element(structure, int(idx[0]))),
            )
            return EquationReport(
                False, env_out, (xmask + 1) * total, "exhaustive", relation
            )
    return EquationReport(True, None, total * total, "exhaustive", relation)


# ---------------------------------------------------------------------------
# axiom library


@dataclass(frozen=True)
class NamedEquation:
    name: str
    lhs: Term
    rhs: Term
    relation: str = "eq"


def ca_axioms(dim: int) -> tuple[NamedEquation, ...]:
    """All instances of the cylindric axioms C1-C7 at the given dimension."""
    x, y = Var(0), Var(1)
    out: list[NamedEquation] = []
    for i in range(dim):
        out.append(NamedEquation(f"C1_c{i}_zero", Cyl(i, Zero()), Zero()))
        out.append(NamedEquation(f"C2_x_leq_c{i}x", x, Cyl(i, x), "leq"))
        out.append(
            NamedEquation(
                f"C3_c{i}_meet",
                Cyl(i, Meet(x, Cyl(i, y))),
                Meet(Cyl(i, x), Cyl(i, y)),
            )
        )
    for i in range(dim):
        for j in range(i + 1, dim):
            out.append(
                NamedEquation(f"C4_c{i}c{j}_commute", Cyl(i, Cyl(j, x)), Cyl(j, Cyl(i, x)))
            )
    for i in range(dim):
        out.append(NamedEquation(f"C5_d{i}{i}_one", Diag(i, i), One()))
    for i in range(dim):
        for j in range(dim):
            for k in range(dim):
                if k in (i, j):
                    continue
                out.append(
                    NamedEquation(
                        f"C6_d{i}{j}_via_{k}",
                        Diag(i, j),
                        Cyl(k, Meet(Diag(i, k), Diag(k, j))),
                    )
                )
    for i in range(dim):
        for j in range(dim):
            if i == j:
                continue
            out.append(
                NamedEquation(
                    f"C7_d{i}{j}_discrete",
                    Meet(
                        Cyl(i, Meet(Diag(i, j), x)),
                        Cyl(i, Meet(Diag(i, j), Complement(x))),
                    ),
                    Zero(),
                )
            )
    return tuple(out)


def pea_axioms(dim: int) -> tuple[NamedEquation, ...]:
    """Transposition-substitution laws for polyadic-equality signatures."""
    x = Var(0)
    out: list[NamedEquation] = []
    for i in range(dim):
        for j in range(i + 1, dim):
            swap = {i: j, j: i}
            out.append(
                NamedEquation(
                    f"P{i}{j}_involution", SubstTransp(i, j, SubstTransp(i, j, x)), x
                )
            )
            out.append(
                NamedEquation(
                    f"P{i}{j}_complement",
                    SubstTransp(i, j, Complement(x)),
                    Complement(SubstTransp(i, j, x)),
                )
            )
            for k in range(dim):
                out.append(
                    NamedEquation(
                        f"P{i}{j}_cyl{k}",
                        SubstTransp(i, j, Cyl(k, x)),
                        Cyl(swap.get(k, k), SubstTransp(i, j, x)),
                    )
                )
            for k in range(dim):
                for l in range(dim):
                    out.append(
                        NamedEquation(
                            f"P{i}{j}_diag{k}{l}",
                            SubstTransp(i, j, Diag(k, l)),
                            Diag(swap.get(k, k), swap.get(l, l)),
                        )
                    )
    return tuple(out)


# ---------------------------------------------------------------------------
# witness terms: coordinate swap and relational composition, with and
# without a spare dimension


def swap01_lowdim() -> Term:
    """Three-dimensional upper bound for the (0,1) coordinate swap of Var(0)."""
    x = Var(0)
    return Meet(SubstRepl(0, 1, Cyl(1, x)), SubstRepl(1, 0, Cyl(0, x)))


def swap01_spare() -> Term:
    """Exact (0,1) coordinate swap of Var(0) routed through spare index 3."""
    return SwapMacro(3, 0, 1, Var(0))


def relcomp01_lowdim() -> Term:
    """Three-dimensional upper bound for relational composition of Var(0), Var(1)."""
    x, y = Var(0), Var(1)
    return Meet(
        Cyl(1, Meet(Cyl(0, x), SubstRepl(0, 1, Cyl(1, y)))),
        Meet(Cyl(1, x), Cyl(0, y)),
    )


def relcomp01_spare() -> Term:
    """Relational composition on coordinates (0,1) routed through spare index 3."""
    x, y = Var(0), Var(1)
    return Cyl(3, Meet(SubstRepl(1, 3, Cyl(3, x)), SubstRepl(0, 3, Cyl(3, y))))


# ---------------------------------------------------------------------------
# sc-words


@dataclass(frozen=True)
class TokenSubst:
    i: int
    j: int


@dataclass(frozen=True)
class TokenCyl:
    i: int


ScToken = Union[TokenSubst, TokenCyl]


@dataclass(frozen=True)
class PartialMap:
    """Partial self-map of {0..n-1}; None marks an undefined image."""

    n: int
    images: tuple[int | None, ...]

    def __post_init__(self) -> None:
        if len(self.images) != self.n:
            raise ValueError("image tuple length must equal n")
        for v in self.images:
            if v is not None and not 0 <= v < self.n:
                raise ValueError(f"image {v} out of range")

    @classmethod
    def identity(cls, n: int) -> "PartialMap":
        return cls(n, tuple(range(n)))

    def defined_at(self, k: int) -> bool:
        return self.images[k] is not None

    def domain(self) -> tuple[int, ...]:
        return tuple(k for k in range(self.n) if self.images[k] is not None)

    def __call__(self, k: int) -> int:
        v = self.images[k]
        if v is None:
            raise KeyError(f"map undefined at {k}")
        return v


def sc_word_to_map(word: Sequence[ScToken], n: int) -> PartialMap:
    """Fold the word, left to right, into its induced partial self-map.

    The empty word is the identity.  A replacement token (i, j) updates the
    image of i to the current image of j; a cylindrifier token removes i
    from the domain.  The leftmost token of the word is the outermost
    operator of the corresponding composite.
    """
    images: list[int | None] = list(range(n))
    for tok in word:
        if isinstance(tok, TokenSubst):
            if not (0 <= tok.i < n and 0 <= tok.j < n):
                raise ValueError(f"token index out of range in {tok}")
            images[tok.i] = images[tok.j]
        elif isinstance(tok, TokenCyl):
            if not 0 <= tok.i < n:
                raise ValueError(f"token index out of range in {tok}")
            images[tok.i] = None
        else:
            raise TypeError(f"unknown token {tok!r}")
    return PartialMap(n, tuple(images))


def sc_word_term(word: Sequence[ScToken], body: Term) -> Term:
    """The composite term of a word applied to body, leftmost token outermost."""
    out = body
    for tok in reversed(word):
        if isinstance(tok, TokenSubst):
            out = SubstRepl(tok.i, tok.j, out)
        else:
            out = Cyl(tok.i, out)
    return out
