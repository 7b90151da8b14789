"""Tests for the truncated atomic-game layer: specs, networks, the exact
solver on known-good and deliberately damaged structures, interactive play,
transcripts, and replay."""

from __future__ import annotations

import dataclasses
import io
import json

import pytest

from cylkit.bao import BudgetExceededError, CaAtomStructure
from cylkit.constructions import bin_forb, full_set_algebra, hh_ra, monk_atoms
from cylkit.games import (
    DEFAULT_BUDGET,
    EXISTS,
    FORALL,
    MAX_PEBBLES,
    MAX_ROUNDS,
    VARIANT_FRESH,
    VARIANT_REUSE,
    VARIANT_TRIANGLE,
    VARIANTS,
    CaMove,
    CaNetwork,
    GameSpec,
    RaMove,
    RaNetwork,
    drop_cyl_pair,
    network_to_dot,
    play_interactive,
    replay_transcript,
    search_budget,
    semantic_network,
    solve,
    state_space_bound,
    transcript_from_json,
    transcript_to_json,
    validate_network,
)

CS3 = full_set_algebra(3, 2)
BIN312 = bin_forb(3, 1, 2)
HH313 = hh_ra(3, 1, 3)


# ---------------------------------------------------------------------------
# game specifications


def test_variants_are_the_three_documented_games():
    assert VARIANTS == (VARIANT_FRESH, VARIANT_REUSE, VARIANT_TRIANGLE)


def test_game_spec_rejects_unknown_variant():
    with pytest.raises(ValueError, match="variant must be one of"):
        GameSpec("marathon", CS3, 1)


@pytest.mark.parametrize("rounds", [-1, MAX_ROUNDS + 1])
def test_game_spec_round_bounds(rounds):
    with pytest.raises(ValueError, match="rounds must be in 0.."):
        GameSpec(VARIANT_FRESH, CS3, rounds)


def test_triangle_variant_needs_a_relation_algebra():
    with pytest.raises(TypeError, match="relation-algebra"):
        GameSpec(VARIANT_TRIANGLE, CS3, 1, pebbles=3)


def test_triangle_variant_pebble_rules():
    with pytest.raises(ValueError, match="explicit pebble budget"):
        GameSpec(VARIANT_TRIANGLE, BIN312, 1)
    for bad in (1, MAX_PEBBLES + 1):
        with pytest.raises(ValueError, match="pebbles must be in 2.."):
            GameSpec(VARIANT_TRIANGLE, BIN312, 1, pebbles=bad)


def test_reuse_variant_pebble_rules():
    with pytest.raises(ValueError, match="explicit pebble budget"):
        GameSpec(VARIANT_REUSE, CS3, 1)
    with pytest.raises(ValueError, match="more pebbles than the dimension"):
        GameSpec(VARIANT_REUSE, CS3, 1, pebbles=CS3.dim)
    with pytest.raises(ValueError, match="at most"):
        GameSpec(VARIANT_REUSE, CS3, 1, pebbles=MAX_PEBBLES + 1)


def test_fresh_variant_refuses_pebbles_and_ra_structures():
    with pytest.raises(ValueError, match="leave pebbles unset"):
        GameSpec(VARIANT_FRESH, CS3, 1, pebbles=4)
    with pytest.raises(TypeError, match="CaAtomStructure"):
        GameSpec(VARIANT_FRESH, BIN312, 1)


def test_arity_and_node_budget():
    fresh = GameSpec(VARIANT_FRESH, CS3, 2)
    assert fresh.arity == CS3.dim == 3
    assert fresh.node_budget == CS3.dim + 2
    reuse = GameSpec(VARIANT_REUSE, CS3, 1, pebbles=4)
    assert reuse.arity == 3
    assert reuse.node_budget == 4
    tri = GameSpec(VARIANT_TRIANGLE, BIN312, 1, pebbles=3)
    assert tri.arity == 2
    assert tri.node_budget == 3


def test_state_space_bound_formula():
    fresh = GameSpec(VARIANT_FRESH, CS3, 1)
    assert state_space_bound(fresh) == CS3.natoms ** ((CS3.dim + 1) ** CS3.dim)
    tri = GameSpec(VARIANT_TRIANGLE, BIN312, 2, pebbles=2)
    assert state_space_bound(tri) == BIN312.natoms ** 4


def test_search_budget_reads_the_environment(monkeypatch):
    monkeypatch.delenv("CYLKIT_BUDGET", raising=False)
    assert search_budget() == DEFAULT_BUDGET
    monkeypatch.setenv("CYLKIT_BUDGET", "123")
    assert search_budget() == 123
    monkeypatch.setenv("CYLKIT_BUDGET", "lots")
    with pytest.raises(ValueError, match="must be an integer"):
        search_budget()
    monkeypatch.setenv("CYLKIT_BUDGET", "0")
    with pytest.raises(ValueError, match="must be positive"):
        search_budget()


# ---------------------------------------------------------------------------
# networks


def test_ca_network_construction_rules():
    good = semantic_network(CS3, {0: 0, 1: 1})
    with pytest.raises(ValueError, match="at least one node"):
        CaNetwork(CS3, (), ())
    with pytest.raises(ValueError, match="strictly increasing"):
        CaNetwork(CS3, (1, 0), good.labels)
    with pytest.raises(ValueError, match="naturals"):
        CaNetwork(CS3, (-1, 0), good.labels)
    with pytest.raises(ValueError, match="cover every node tuple"):
        CaNetwork(CS3, (0, 1), good.labels[:-1])
    with pytest.raises(ValueError, match="label out of range"):
        CaNetwork(CS3, (0, 1), (CS3.natoms,) + good.labels[1:])


def test_ca_network_accessors_and_from_map():
    net = semantic_network(CS3, {0: 0, 1: 1})
    tuples = list(net.tuples())
    assert len(tuples) == 2 ** CS3.dim
    assert tuples[0] == (0, 0, 0)
    mapping = net.mapping()
    assert set(mapping) == set(tuples)
    for t in tuples:
        assert net.label(t) == mapping[t]
    assert CaNetwork.from_map(CS3, mapping) == net
    partial = dict(mapping)
    partial.pop(tuples[0])
    with pytest.raises(ValueError, match="does not label every node tuple"):
        CaNetwork.from_map(CS3, partial)


def test_ra_network_rules_and_from_map():
    idx = BIN312.atoms.index
    ident = idx("Id")
    div = idx("a^0(0,0)")
    net = RaNetwork(BIN312, (0, 2), (ident, div, div, ident))
    assert net.label((0, 2)) == div
    assert net.mapping() == {
        (0, 0): ident,
        (0, 2): div,
        (2, 0): div,
        (2, 2): ident,
    }
    assert RaNetwork.from_map(BIN312, net.mapping()) == net
    with pytest.raises(ValueError, match="cover every ordered node pair"):
        RaNetwork(BIN312, (0, 2), (ident, div, div))
    with pytest.raises(ValueError, match="does not label every ordered pair"):
        RaNetwork.from_map(
            BIN312, {(0, 0): ident, (0, 2): div, (2, 2): ident}
        )


def test_validate_network_accepts_point_induced_networks():
    for assignment in ({0: 0}, {0: 0, 1: 1}, {0: 0, 1: 1, 2: 0}):
        report = validate_network(semantic_network(CS3, assignment))
        assert report.passed and report.violations == ()


def test_validate_network_flags_diagonal_damage():
    net = semantic_network(CS3, {0: 0, 1: 1})
    off_diag = CS3.atoms.index(repr((0, 1, 0)))
    labels = list(net.labels)
    labels[0] = off_diag  # the all-repeats tuple must stay sub-diagonal
    report = validate_network(CaNetwork(CS3, net.nodes, tuple(labels)))
    assert not report.passed
    assert any(v.startswith("diagonal:") for v in report.violations)


def test_validate_network_flags_cylindrifier_damage():
    net = semantic_network(CS3, {0: 0, 1: 1})
    labels = list(net.labels)
    # relabel the tuple (1,0,0) with the point (1,1,1): still sub-diagonal
    # where required, but no longer reachable from its neighbours along T_0
    target = list(net.tuples()).index((1, 0, 0))
    labels[target] = CS3.atoms.index(repr((1, 1, 1)))
    report = validate_network(CaNetwork(CS3, net.nodes, tuple(labels)))
    assert not report.passed
    assert any(v.startswith("cylindrifier:") for v in report.violations)


def test_validate_network_flags_ra_damage():
    idx = BIN312.atoms.index
    ident, div, other = idx("Id"), idx("a^0(0,0)"), idx("a^1(0,0)")
    bad_identity = RaNetwork(BIN312, (0, 1), (div, div, div, ident))
    report = validate_network(bad_identity)
    assert any(v.startswith("identity:") for v in report.violations)
    bad_converse = RaNetwork(BIN312, (0, 1), (ident, div, other, ident))
    report = validate_network(bad_converse)
    assert any(v.startswith("converse:") for v in report.violations)
    # three nodes, every diversity edge carrying the same column atom:
    # the same-column triangle rule forbids it
    labels = [ident if p == q else div for p in range(3) for q in range(3)]
    report = validate_network(RaNetwork(BIN312, (0, 1, 2), tuple(labels)))
    assert not report.passed
    assert any(v.startswith("triangle:") for v in report.violations)


def test_validate_network_rejects_non_networks():
    with pytest.raises(TypeError, match="not a network"):
        validate_network(CS3)


def test_semantic_network_error_paths():
    with pytest.raises(ValueError, match="at least one node"):
        semantic_network(CS3, {})
    with pytest.raises(ValueError, match="no atom labels the point tuple"):
        semantic_network(CS3, {0: 0, 1: 5})
    plain = CaAtomStructure(
        dim=2,
        atoms=("x",),
        cyl=(frozenset({(0, 0)}), frozenset({(0, 0)})),
        diag=(
            (frozenset({0}), frozenset({0})),
            (frozenset({0}), frozenset({0})),
        ),
    )
    with pytest.raises(ValueError, match="do not encode point tuples"):
        semantic_network(plain, {0: 0})


def test_drop_cyl_pair_removes_one_directed_pair():
    damaged = drop_cyl_pair(CS3, 0, 0, 4)
    assert damaged.cyl[0] == CS3.cyl[0] - {(0, 4)}
    assert (4, 0) in damaged.cyl[0]
    for i in range(1, CS3.dim):
        assert damaged.cyl[i] == CS3.cyl[i]
    assert damaged.atoms == CS3.atoms and damaged.diag == CS3.diag
    with pytest.raises(ValueError, match="is not in cylindrifier relation"):
        drop_cyl_pair(damaged, 0, 0, 4)


# ---------------------------------------------------------------------------
# move encodings


def test_ca_move_encoding_round_trip():
    move = CaMove(face=(0, 2), l=1, k=3, b=5)
    assert move.demanded() == (0, 3, 2)
    assert move.encode() == "f(0,2);l1;k3;b5"
    assert CaMove.decode(move.encode()) == move
    with pytest.raises(ValueError, match="bad move encoding"):
        CaMove.decode("nonsense")


def test_ra_move_encoding_round_trip():
    move = RaMove(x=0, y=1, z=2, a=3, b=4)
    assert move.encode() == "x0;y1;z2;a3;b4"
    assert RaMove.decode(move.encode()) == move
    with pytest.raises(ValueError, match="bad move encoding"):
        RaMove.decode("x0;y1")


# ---------------------------------------------------------------------------
# the exact solver


def test_fresh_game_on_full_set_algebra_is_existential():
    expected_states = {0: 465, 1: 14631, 2: 105719}
    for rounds, states in expected_states.items():
        res = solve(GameSpec(VARIANT_FRESH, CS3, rounds), 0)
        assert res.winner == EXISTS
        assert res.rounds_used == rounds
        assert res.stats.states_explored == states
        assert res.stats.openings >= 1


def test_reuse_game_on_full_set_algebra_is_existential():
    expected_states = {0: 465, 1: 24255, 2: 206904}
    for rounds, states in expected_states.items():
        res = solve(GameSpec(VARIANT_REUSE, CS3, rounds, pebbles=4), 0)
        assert res.winner == EXISTS
        assert res.rounds_used == rounds
        assert res.stats.states_explored == states


def test_dropped_cylindrifier_pair_hands_the_game_to_the_challenger():
    damaged = drop_cyl_pair(CS3, 0, 0, 4)
    for rounds in (1, 2):
        res = solve(GameSpec(VARIANT_FRESH, damaged, rounds), 0)
        assert res.winner == FORALL
        assert res.rounds_used == 1  # one round suffices regardless of horizon
    reuse = solve(GameSpec(VARIANT_REUSE, damaged, 2, pebbles=4), 0)
    assert reuse.winner == FORALL and reuse.rounds_used == 1


def test_subtler_damage_needs_a_longer_horizon():
    damaged = drop_cyl_pair(CS3, 0, 1, 1)
    winners = [
        solve(GameSpec(VARIANT_FRESH, damaged, r), 0).winner for r in range(3)
    ]
    assert winners == [EXISTS, EXISTS, FORALL]
    res = solve(GameSpec(VARIANT_FRESH, damaged, 2), 0)
    assert res.rounds_used == 2


def test_triangle_games_are_existential_on_genuine_algebras():
    expected = {
        (id(BIN312), 2): 1317,
        (id(BIN312), 3): 26794,
        (id(HH313), 2): 3115,
        (id(HH313), 3): 180102,
    }
    for structure in (BIN312, HH313):
        for pebbles in (2, 3):
            res = solve(GameSpec(VARIANT_TRIANGLE, structure, 2, pebbles=pebbles), 0)
            assert res.winner == EXISTS and res.rounds_used == 2
            assert res.stats.states_explored == expected[(id(structure), pebbles)]


def test_worker_count_does_not_change_results():
    spec = GameSpec(VARIANT_FRESH, CS3, 2)
    base = solve(spec, 0, workers=1)
    assert solve(spec, 0, workers=2) == base
    assert solve(spec, 0, workers=3) == base
    reuse = GameSpec(VARIANT_REUSE, CS3, 1, pebbles=4)
    assert solve(reuse, 0, workers=1) == solve(reuse, 0, workers=2)


def test_plain_memo_agrees_with_the_canonical_memo():
    spec = GameSpec(VARIANT_FRESH, CS3, 2)
    canonical = solve(spec, 0)
    plain = solve(spec, 0, canonical_memo=False)
    assert plain.winner == canonical.winner
    assert plain.rounds_used == canonical.rounds_used


def test_solver_refuses_to_blow_the_budget():
    with pytest.raises(BudgetExceededError, match="budget"):
        solve(GameSpec(VARIANT_FRESH, CS3, 2), 0, budget=100)


def test_solver_argument_validation():
    spec = GameSpec(VARIANT_FRESH, CS3, 1)
    with pytest.raises(ValueError, match="out of range"):
        solve(spec, CS3.natoms)
    with pytest.raises(ValueError, match="out of range"):
        solve(spec, -1)
    with pytest.raises(ValueError, match="workers must be at least 1"):
        solve(spec, 0, workers=0)


def test_solve_result_serializes_to_json():
    res = solve(GameSpec(VARIANT_FRESH, CS3, 1), 0)
    payload = res.to_dict()
    text = json.dumps(payload)
    assert set(payload) == {"winner", "rounds_used", "strategy", "stats"}
    assert json.loads(text)["winner"] == EXISTS
    assert payload["stats"]["state_space_bound"] == str(
        state_space_bound(GameSpec(VARIANT_FRESH, CS3, 1))
    )


def test_winning_responder_strategy_has_an_opening_entry():
    res = solve(GameSpec(VARIANT_FRESH, CS3, 1), 0)
    assert res.winner == EXISTS
    assert "open" in res.strategy
    # every other key is a position/demand pair answered by a position
    assert all("|" in key for key in res.strategy if key != "open")


# ---------------------------------------------------------------------------
# interactive play, transcripts, replay


def play_forall_with_scripted_indices() -> tuple:
    spec = GameSpec(VARIANT_FRESH, CS3, 1)
    inp = io.StringIO("zz\n99\n0\n" + "0\n" * 10)
    out = io.StringIO()
    transcript = play_interactive(
        spec, FORALL, 0, input_stream=inp, output_stream=out
    )
    return spec, transcript, out.getvalue()


def test_interactive_play_reprompts_and_lets_the_engine_win():
    _, transcript, printed = play_forall_with_scripted_indices()
    assert "not a number; try again" in printed
    assert "index out of range; try again" in printed
    assert transcript.winner == EXISTS
    assert not transcript.resigned
    kinds = [(e["kind"], e["actor"]) for e in transcript.events]
    assert kinds == [
        ("open", EXISTS),
        ("demand", FORALL),
        ("respond", EXISTS),
    ]
    assert f"winner: {EXISTS}" in printed


def test_interactive_play_resignation_concedes():
    spec = GameSpec(VARIANT_FRESH, CS3, 1)
    transcript = play_interactive(
        spec,
        EXISTS,
        0,
        input_stream=io.StringIO("resign\n"),
        output_stream=io.StringIO(),
    )
    assert transcript.winner == FORALL
    assert transcript.resigned
    assert transcript.events[-1]["kind"] == "resign"


def test_interactive_play_validates_the_side():
    with pytest.raises(ValueError, match="side must be"):
        play_interactive(
            GameSpec(VARIANT_FRESH, CS3, 1),
            "Referee",
            0,
            input_stream=io.StringIO(""),
            output_stream=io.StringIO(),
        )


def test_transcript_json_round_trip():
    _, transcript, _ = play_forall_with_scripted_indices()
    text = transcript_to_json(transcript)
    assert transcript_from_json(text) == transcript
    assert json.loads(text)["winner"] == EXISTS


def test_replay_reproduces_the_recorded_play():
    spec, transcript, _ = play_forall_with_scripted_indices()
    net = replay_transcript(spec, transcript)
    assert net is not None
    assert net.nodes == transcript.final_nodes
    assert net.labels == transcript.final_labels
    assert validate_network(net).passed


def test_replay_rejects_a_mismatched_spec():
    spec, transcript, _ = play_forall_with_scripted_indices()
    other = GameSpec(VARIANT_FRESH, CS3, 2)
    with pytest.raises(ValueError, match="does not match the game specification"):
        replay_transcript(other, transcript)


def test_replay_detects_a_tampered_record():
    spec, transcript, _ = play_forall_with_scripted_indices()
    wrong_atom = (CS3.natoms - 1,) * len(transcript.final_labels)
    forged = dataclasses.replace(transcript, final_labels=wrong_atom)
    with pytest.raises(RuntimeError, match="replay"):
        replay_transcript(spec, forged)
    truncated = dataclasses.replace(
        transcript,
        events=tuple(e for e in transcript.events if e["actor"] != FORALL),
    )
    with pytest.raises(ValueError, match="transcript ended before the play did"):
        replay_transcript(spec, truncated)


def test_network_to_dot_renders_nodes_and_edges():
    net = semantic_network(CS3, {0: 0, 1: 1})
    dot = network_to_dot(net)
    assert dot.startswith("graph network {")
    assert dot.rstrip().endswith("}")
    assert 'n0 [label="0"];' in dot
    assert "n0 -- n1" in dot
    assert "// full labelling:" in dot  # arity three lists every tuple
    idx = BIN312.atoms.index
    ra_net = RaNetwork(
        BIN312, (0, 1), (idx("Id"), idx("a^0(0,0)"), idx("a^0(0,0)"), idx("Id"))
    )
    ra_dot = network_to_dot(ra_net)
    assert "a^0(0,0)" in ra_dot and "// full labelling:" not in ra_dot
