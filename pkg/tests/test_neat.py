"""Reducts and relativizations: index quotients, renamings, restriction to
an element, the relation-algebra view, and the matrix correspondences."""

import pytest

from cylkit import (
    bin_forb,
    ca_find_isomorphism,
    check_ca_frame,
    check_ra_axioms,
    diag,
    drop_cyl_pair,
    element,
    full_set_algebra,
    monk_atoms,
    nr,
    ra_reduct,
    rd_rho,
    restriction_iso,
    rl_x,
    rl_x_witness,
    singleton,
    three_cube,
    top,
)
from cylkit.ra import compose


@pytest.fixture(scope="module")
def fs42():
    return full_set_algebra(4, 2)


@pytest.fixture(scope="module")
def cube():
    return three_cube()


# ---------------------------------------------------------------------------
# index quotients


def test_nr_quotient_of_full_set_is_smaller_full_set(fs42):
    frame, cert = nr(fs42, (0, 1))
    assert cert.passed
    assert cert.certificate_level == "exhaustive"
    assert cert.counterexample is None
    assert len(frame.classes) == 4
    # the quotient is the two-dimensional full tuple algebra in disguise
    assert ca_find_isomorphism(frame.structure, full_set_algebra(2, 2)) is not None


def test_nr_class_structure(fs42):
    frame, _ = nr(fs42, (2, 3))
    # dropping relations 0 and 1 groups tuples by their last two coordinates
    import ast

    for cls in frame.classes:
        tails = {ast.literal_eval(fs42.atoms[a])[2:] for a in cls}
        assert len(tails) == 1
    # lift and closure are inverse-ish on closed elements
    x = frame.class_element(0)
    assert frame.closure(x).mask == x.mask
    assert frame.lift(x) == frozenset({0})


def test_nr_single_kept_index_has_no_quotient_structure(fs42):
    frame, cert = nr(fs42, (0,))
    assert frame.structure is None
    assert cert.passed


def test_nr_gamma_validation(fs42):
    with pytest.raises(ValueError):
        nr(fs42, (0, 9))


def test_nr_refuses_non_equivalence_unless_forced(cube):
    # removing one directed pair breaks symmetry of the dropped relation
    broken = drop_cyl_pair(cube, 2, 0, 1)
    with pytest.raises(ValueError):
        nr(broken, (0, 1))
    frame, cert = nr(broken, (0, 1), force=True)
    assert any("forced past non-equivalence" in d for d in cert.details)


# ---------------------------------------------------------------------------
# index renamings


def test_rd_rho_relabels_relations(fs42):
    r = rd_rho(fs42, (3, 1, 0))
    assert r.dim == 3
    assert r.atoms == fs42.atoms
    assert r.cyl[0] == fs42.cyl[3]
    assert r.cyl[1] == fs42.cyl[1]
    assert r.cyl[2] == fs42.cyl[0]
    for p, i in enumerate((3, 1, 0)):
        for q, j in enumerate((3, 1, 0)):
            assert r.diag[p][q] == fs42.diag[i][j]


def test_rd_rho_transpositions_follow(fs42):
    r = rd_rho(fs42, (2, 3))
    assert r.transp is not None
    assert r.transp_rel(0, 1) == fs42.transp_rel(2, 3)


def test_rd_rho_order_two_permutation_is_involutive(cube):
    rho = (1, 0, 2)
    assert rd_rho(rd_rho(cube, rho), rho) == cube


def test_rd_rho_validation(fs42):
    with pytest.raises(ValueError):
        rd_rho(fs42, (0, 0, 1))
    with pytest.raises(ValueError):
        rd_rho(fs42, (0, 7))
    with pytest.raises(ValueError):
        rd_rho(fs42, (2,))


# ---------------------------------------------------------------------------
# relativization


def test_rl_to_top_is_identity(cube):
    r = rl_x(cube, top(cube))
    assert r.structure == cube
    assert r.commutes
    assert r.kept == tuple(range(27))


def test_rl_to_diagonal_keeps_commutation_but_breaks_frame(cube):
    r = rl_x(cube, diag(cube, 0, 1))
    assert r.structure.natoms == 9
    assert r.commutes  # every probe pair still commutes
    assert all(ok for _, _, ok in r.probe)
    # transpositions do not restrict: moved atoms leave the subframe
    assert r.structure.transp is None
    assert any("transpositions" in d for d in r.details)
    # the subframe is not a frame: diagonal conditions fail inside
    assert not check_ca_frame(r.structure).passed


def test_rl_to_constant_triples_keeps_transpositions(cube):
    # constant tuples are fixed by every coordinate swap
    x = element(cube, [0, 13, 26])
    r = rl_x(cube, x)
    assert r.structure.natoms == 3
    assert r.structure.transp is not None
    assert r.details == ()


def test_rl_validation(cube, fs42):
    from cylkit.bao import empty

    with pytest.raises(ValueError):
        rl_x(cube, empty(cube))
    with pytest.raises(ValueError):
        rl_x(cube, top(fs42))


# ---------------------------------------------------------------------------
# relation-algebra view


def test_ra_reduct_of_four_dim_full_set(fs42):
    red = ra_reduct(fs42)
    assert red.passed
    assert red.associativity_required
    assert red.axioms.passed
    assert red.ra.natoms == 4
    assert len(red.ra.identity) == 2


def test_ra_reduct_composition_matches_relational_composition(fs42):
    import ast

    red = ra_reduct(fs42)
    frame = red.frame

    def rel_of(ci):
        # each class is determined by the last two coordinates
        tails = {
            tuple(ast.literal_eval(fs42.atoms[a])[2:]) for a in frame.classes[ci]
        }
        assert len(tails) == 1
        return next(iter(tails))

    pairs = [rel_of(ci) for ci in range(red.ra.natoms)]
    for cb in range(4):
        for cc in range(4):
            got = compose(
                red.ra, singleton(red.ra, cb), singleton(red.ra, cc)
            )
            b, c = pairs[cb], pairs[cc]
            expected = {
                ca
                for ca, a in enumerate(pairs)
                if a[1] == c[1] and a[0] == b[0] and b[1] == c[0]
            }
            assert set(got.atom_indices()) == expected


def test_ra_reduct_element_ops_round_trip(fs42):
    red = ra_reduct(fs42)
    ident = red.identity_element()
    # identity is fixed by converse and neutral under composition of itself
    assert red.converse_element(ident) == ident
    assert red.compose_elements(ident, ident) == ident
    x = red.class_element(1)
    assert red.converse_element(red.converse_element(x)) == x


def test_ra_reduct_low_dimension_relaxes_associativity():
    red = ra_reduct(full_set_algebra(3, 2))
    assert not red.associativity_required
    assert red.passed


def test_ra_reduct_needs_three_dimensions():
    with pytest.raises(ValueError):
        ra_reduct(full_set_algebra(2, 2))


# ---------------------------------------------------------------------------
# matrix restriction and the relativization witness


def test_restriction_iso_exhaustive_pass():
    rep = restriction_iso(3, 4, bin_forb(3, 1, 2))
    assert rep.passed
    assert rep.certificate_level == "exhaustive"
    assert rep.counterexample is None
    assert rep.mapping is not None
    assert sorted(rep.mapping) == list(range(61))  # bijective onto the 61 classes


def test_restriction_iso_parameter_checks():
    with pytest.raises(ValueError):
        restriction_iso(4, 3, bin_forb(3, 1, 2))


def test_rl_witness_reports_honest_failure():
    """The relativized structure genuinely outnumbers the small matrices:
    the restriction map is a surjection with fibres up to size three, the
    meet identity fails, and the report says so rather than papering over."""
    rep = rl_x_witness(4, 3, 1, bin_forb(3, 1, 2))
    assert len(rep.x) == 169
    assert rep.small.natoms == 61
    assert sorted(set(rep.fibre_sizes)) == [1, 2, 3]
    assert sum(rep.fibre_sizes) == 169
    assert not rep.meet_ok
    assert not rep.embedding_ok
    assert not rep.passed


def test_rl_witness_parameter_checks():
    with pytest.raises(ValueError):
        rl_x_witness(4, 3, 2, bin_forb(3, 1, 2))
    with pytest.raises(ValueError):
        rl_x_witness(5, 4, 1, bin_forb(3, 1, 2))


# ---------------------------------------------------------------------------
# interplay: reducts of reducts


def test_nr_then_rd_consistency(fs42):
    frame, _ = nr(fs42, (1, 2))
    q = frame.structure
    assert q is not None and q.dim == 2
    flipped = rd_rho(q, (1, 0))
    assert flipped.cyl[0] == q.cyl[1]
    assert flipped.diag[0][1] == q.diag[1][0]


def test_monk_nr_certificate():
    s = monk_atoms(3, 3)
    frame, cert = nr(s, (0, 1))
    assert cert.passed
    assert frame.structure is not None
    assert frame.structure.dim == 2
