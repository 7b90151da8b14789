"""Hypernetworks, hyperbasis checking, and the induced structure."""

import pytest

from cylkit import (
    BudgetExceededError,
    RaAtomStructure,
    check_ca_frame,
    enumerate_hypernetworks,
    is_hyperbasis,
    validate_hypernetwork,
)
from cylkit.hyper import HyperNetwork, ca_over_hyperbasis


def group_z4() -> RaAtomStructure:
    forbidden = [
        (a, b, c)
        for a in range(4)
        for b in range(4)
        for c in range(4)
        if a != (b + c) % 4
    ]
    return RaAtomStructure.build(
        ("e", "g1", "g2", "g3"), [0], (0, 3, 2, 1), forbidden
    )


def pair_algebra() -> RaAtomStructure:
    return RaAtomStructure.build(
        ("Id", "d"), [0], (0, 1), [(1, 0, 0), (1, 1, 1)]
    )


@pytest.fixture(scope="module")
def z4():
    return group_z4()


@pytest.fixture(scope="module")
def z4_nets(z4):
    return enumerate_hypernetworks(z4, 3, 3, 1)


# ---------------------------------------------------------------------------
# network accessors


def test_accessors(z4_nets):
    h = z4_nets[0]
    assert h.m == 3 and h.n_wide == 3
    assert h.label((0, 1)) == ("atom", h.pair(0, 1))
    assert h.label((0,))[0] == "sym"
    with pytest.raises(KeyError):
        h.hyper_label((9, 9, 9))


def test_rename_identity_is_noop(z4_nets):
    for h in z4_nets[:4]:
        assert h.rename((0, 1, 2)) == h


def test_rename_composes(z4_nets):
    h = z4_nets[-1]
    s1 = (1, 2, 0)
    s2 = (2, 0, 1)
    composed = tuple(s1[s2[k]] for k in range(3))
    assert h.rename(composed) == h.rename(s1).rename(s2)


def test_rename_swaps_pair_labels(z4_nets):
    for h in z4_nets[:6]:
        g = h.rename((1, 0, 2))
        assert g.pair(0, 1) == h.pair(1, 0)
        assert g.pair(0, 2) == h.pair(1, 2)


# ---------------------------------------------------------------------------
# validation


def test_valid_members(z4, z4_nets):
    for h in z4_nets:
        ok, why = validate_hypernetwork(z4, h)
        assert ok, why


def test_non_identity_diagonal_rejected(z4, z4_nets):
    h = z4_nets[0]
    pairs = list(h.pairs)
    pairs[0] = 1  # label (0,0) with a non-identity atom
    bad = HyperNetwork(3, 3, tuple(pairs), h.hyper)
    ok, why = validate_hypernetwork(z4, bad)
    assert not ok
    assert "identity" in why


def test_inconsistent_triangle_rejected(z4, z4_nets):
    # pick a labelled network and break one edge so some triangle fails
    h = next(g for g in z4_nets if g.pair(0, 1) == 1)
    pairs = list(h.pairs)
    pairs[0 * 3 + 1] = 2  # now (0,1)+(1,0) no longer compose through (0,0)
    bad = HyperNetwork(3, 3, tuple(pairs), h.hyper)
    ok, why = validate_hypernetwork(z4, bad)
    assert not ok
    assert "triangle" in why


def test_substitution_coherence_rejected():
    pa = pair_algebra()
    # all-identity pair labelling links the two nodes, so the length-one
    # tuples (0,) and (1,) must carry the same symbol
    nets = enumerate_hypernetworks(pa, 2, 3, 2)
    linked = next(h for h in nets if h.pair(0, 1) == 0)
    entries = dict(linked.hyper)
    entries[(0,)] = 0
    entries[(1,)] = 1
    bad = HyperNetwork(2, 3, linked.pairs, tuple(sorted(entries.items())))
    ok, why = validate_hypernetwork(pa, bad)
    assert not ok
    assert "substitution" in why


# ---------------------------------------------------------------------------
# enumeration


def test_enumeration_counts(z4, z4_nets):
    assert len(z4_nets) == 16
    assert len(enumerate_hypernetworks(z4, 2, 2, 1)) == 4


def test_enumeration_is_duplicate_free_and_complete(z4, z4_nets):
    assert len(set(z4_nets)) == len(z4_nets)
    # independent completeness route on the two-node case: try every pair
    # labelling directly
    nets2 = set(enumerate_hypernetworks(z4, 2, 2, 1))
    hyper_keys = nets2 and sorted(next(iter(nets2)).hyper)
    found = set()
    for p01 in range(4):
        for p10 in range(4):
            for d in (0,):
                cand = HyperNetwork(
                    2,
                    2,
                    (d, p01, p10, d),
                    tuple((t, 0) for t, _ in hyper_keys),
                )
                if validate_hypernetwork(z4, cand)[0]:
                    found.add(cand)
    assert found == nets2


def test_symbol_classes_scale_the_count():
    # with two symbols the count splits by substitution classes: the
    # identity-linked two-node network has three label classes (empty,
    # length-1, length-3 tuples all merged), the diversity-linked one
    # eleven singleton classes
    pa = pair_algebra()
    nets = enumerate_hypernetworks(pa, 2, 3, 2)
    by_pairs = {}
    for h in nets:
        by_pairs.setdefault(h.pairs, []).append(h)
    assert sorted(len(v) for v in by_pairs.values()) == [8, 2048]
    assert len(nets) == 2056


def test_enumeration_parameter_checks(z4):
    with pytest.raises(ValueError):
        enumerate_hypernetworks(z4, 5, 3, 1)
    with pytest.raises(ValueError):
        enumerate_hypernetworks(z4, 3, 5, 1)
    with pytest.raises(ValueError):
        enumerate_hypernetworks(z4, 3, 3, 9)


def test_enumeration_budget(z4):
    with pytest.raises(BudgetExceededError):
        enumerate_hypernetworks(z4, 3, 3, 1, budget=3)


# ---------------------------------------------------------------------------
# hyperbasis checking


def test_full_set_is_a_hyperbasis(z4, z4_nets):
    rep = is_hyperbasis(z4, z4_nets)
    assert rep.passed
    assert rep.violations == ()


def test_single_deletions_break(z4, z4_nets):
    for drop in (0, 7, 15):
        rest = [h for i, h in enumerate(z4_nets) if i != drop]
        rep = is_hyperbasis(z4, rest)
        assert not rep.passed
        rules = {r for r, _ in rep.violations}
        assert rules & {"witness", "cylindrifier", "amalgamation", "symmetry"}


def test_missing_atom_breaks_witness(z4, z4_nets):
    rest = [h for h in z4_nets if h.pair(0, 1) != 2]
    rep = is_hyperbasis(z4, rest)
    assert not rep.passed
    assert rep.violation("witness") is not None
    assert "atom 2" in rep.violation("witness")


def test_empty_and_mixed_sets_rejected(z4, z4_nets):
    assert not is_hyperbasis(z4, []).passed
    other = enumerate_hypernetworks(z4, 2, 2, 1)
    rep = is_hyperbasis(z4, list(z4_nets) + list(other))
    assert not rep.passed
    assert rep.violation("member") == "mixed shapes"


def test_violation_lookup(z4, z4_nets):
    rep = is_hyperbasis(z4, z4_nets)
    assert rep.violation("witness") is None


# ---------------------------------------------------------------------------
# the induced structure


def test_induced_structure(z4, z4_nets):
    ca = ca_over_hyperbasis(z4, z4_nets)
    assert ca.dim == 3
    assert ca.natoms == 16
    assert ca.transp is not None
    assert check_ca_frame(ca).passed


def test_induced_structure_diagonals_match_identity_labels(z4, z4_nets):
    ca = ca_over_hyperbasis(z4, z4_nets)
    nets = sorted(z4_nets, key=lambda h: (h.pairs, h.hyper))
    for i in range(3):
        for j in range(3):
            expected = frozenset(
                a for a, h in enumerate(nets) if h.pair(i, j) in z4.identity
            )
            assert ca.diag[i][j] == expected


def test_induced_structure_refuses_non_basis(z4, z4_nets):
    with pytest.raises(ValueError):
        ca_over_hyperbasis(z4, list(z4_nets)[:-1])
