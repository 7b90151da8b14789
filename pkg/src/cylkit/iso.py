"""Isomorphism search between finite atom structures.

Backtracking over atom bijections, pruned by cheap per-atom invariants.
Works for both cylindric-style structures (relations, diagonal sets,
optional transpositions) and relation-algebra atom structures.
"""
from __future__ import annotations

from .bao import CaAtomStructure
from .ra import RaAtomStructure


def ca_is_isomorphism(a: CaAtomStructure, b: CaAtomStructure, mapping) -> bool:
    """Does the atom map preserve every relation in both directions?"""
    mapping = tuple(mapping)
    if a.dim != b.dim or a.natoms != b.natoms:
        return False
    if sorted(mapping) != list(range(a.natoms)):
        return False
    if (a.transp is None) != (b.transp is None):
        return False
    for i in range(a.dim):
        if {(mapping[x], mapping[y]) for x, y in a.cyl[i]} != set(b.cyl[i]):
            return False
        for j in range(a.dim):
            if {mapping[x] for x in a.diag[i][j]} != set(b.diag[i][j]):
                return False
    if a.transp is not None:
        for rel_a, rel_b in zip(a.transp, b.transp):
            if {(mapping[x], mapping[y]) for x, y in rel_a} != set(rel_b):
                return False
    return True


def _ca_profile(s: CaAtomStructure, atom: int) -> tuple:
    prof = []
    for i in range(s.dim):
        outs = sum(1 for x, y in s.cyl[i] if x == atom)
        ins = sum(1 for x, y in s.cyl[i] if y == atom)
        prof.append((outs, ins))
    for i in range(s.dim):
        for j in range(s.dim):
            prof.append(atom in s.diag[i][j])
    if s.transp is not None:
        for rel in s.transp:
            img = dict(rel)
            prof.append(img.get(atom) == atom)
    return tuple(prof)


def ca_find_isomorphism(a: CaAtomStructure, b: CaAtomStructure):
    """An atom bijection preserving all relations, or None."""
    if a.dim != b.dim or a.natoms != b.natoms:
        return None
    if (a.transp is None) != (b.transp is None):
        return None
    n = a.natoms
    prof_a = [_ca_profile(a, x) for x in range(n)]
    prof_b = [_ca_profile(b, x) for x in range(n)]
    if sorted(prof_a) != sorted(prof_b):
        return None
    cands = [
        [y for y in range(n) if prof_b[y] == prof_a[x]] for x in range(n)
    ]
    cyl_a = [set(rel) for rel in a.cyl]
    cyl_b = [set(rel) for rel in b.cyl]
    transp_a = [dict(rel) for rel in a.transp] if a.transp is not None else []
    transp_b = [dict(rel) for rel in b.transp] if b.transp is not None else []
    order = sorted(range(n), key=lambda x: len(cands[x]))
    mapping: dict[int, int] = {}
    used = set()

    def consistent(x: int, y: int) -> bool:
        for i in range(a.dim):
            for x2, y2 in mapping.items():
                if ((x, x2) in cyl_a[i]) != ((y, y2) in cyl_b[i]):
                    return False
                if ((x2, x) in cyl_a[i]) != ((y2, y) in cyl_b[i]):
                    return False
        for rel_a, rel_b in zip(transp_a, transp_b):
            ia = rel_a.get(x)
            if ia is not None and ia in mapping and rel_b.get(y) != mapping[ia]:
                return False
        return True

    def rec(pos: int) -> bool:
        if pos == n:
            return True
        x = order[pos]
        for y in cands[x]:
            if y in used or not consistent(x, y):
                continue
            mapping[x] = y
            used.add(y)
            if rec(pos + 1):
                return True
            del mapping[x]
            used.remove(y)
        return False

    if not rec(0):
        return None
    out = tuple(mapping[x] for x in range(n))
    assert ca_is_isomorphism(a, b, out)
    return out


def ra_is_isomorphism(a: RaAtomStructure, b: RaAtomStructure, mapping) -> bool:
    mapping = tuple(mapping)
    if a.natoms != b.natoms or sorted(mapping) != list(range(a.natoms)):
        return False
    if {mapping[x] for x in a.identity} != set(b.identity):
        return False
    for x in range(a.natoms):
        if mapping[a.converse[x]] != b.converse[mapping[x]]:
            return False
    mapped = {(mapping[x], mapping[y], mapping[z]) for x, y, z in a.forbidden}
    return mapped == set(b.forbidden)


def _ra_profile(s: RaAtomStructure, atom: int) -> tuple:
    in_each = [sum(1 for t in s.forbidden if t[i] == atom) for i in range(3)]
    return (atom in s.identity, s.converse[atom] == atom, tuple(in_each))


def ra_find_isomorphism(a: RaAtomStructure, b: RaAtomStructure):
    if a.natoms != b.natoms or len(a.identity) != len(b.identity):
        return None
    n = a.natoms
    prof_a = [_ra_profile(a, x) for x in range(n)]
    prof_b = [_ra_profile(b, x) for x in range(n)]
    if sorted(prof_a) != sorted(prof_b):
        return None
    cands = [[y for y in range(n) if prof_b[y] == prof_a[x]] for x in range(n)]
    forb_a, forb_b = set(a.forbidden), set(b.forbidden)
    order = sorted(range(n), key=lambda x: len(cands[x]))
    mapping: dict[int, int] = {}
    used = set()

    def consistent(x: int, y: int) -> bool:
        ca = a.converse[x]
        if ca in mapping and mapping[ca] != b.converse[y]:
            return False
        keys = list(mapping.items()) + [(x, y)]
        # only triples that involve the new pair need checking
        for x1, y1 in keys:
            for x2, y2 in keys:
                for ta, tb in (
                    ((x, x1, x2), (y, y1, y2)),
                    ((x1, x, x2), (y1, y, y2)),
                    ((x1, x2, x), (y1, y2, y)),
                ):
                    if (ta in forb_a) != (tb in forb_b):
                        return False
        return True

    def rec(pos: int) -> bool:
        if pos == n:
            return True
        x = order[pos]
        for y in cands[x]:
            if y in used or not consistent(x, y):
                continue
            mapping[x] = y
            used.add(y)
            if rec(pos + 1):
                return True
            del mapping[x]
            used.remove(y)
        return False

    if not rec(0):
        return None
    out = tuple(mapping[x] for x in range(n))
    assert ra_is_isomorphism(a, b, out)
    return out
