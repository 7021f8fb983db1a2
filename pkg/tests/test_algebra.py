import itertools
import random

import pytest

from strel import algebra as A
from strel.algebra import (
    Assignment,
    Inconsistent,
    NETWORK_VOCAB,
    PropertyRule,
    QualitativeNetwork,
    RuleTable,
    apply_property_rules,
    candidate_rules,
    default_rule_table,
    derive_rule_table,
    enumerate_scenarios,
    held_relations,
    network_from_atoms,
    path_consistency,
    sample_scene,
    verify_rules,
)
from strel.spacetime import DeriveConfig


@pytest.fixture(scope="module")
def table():
    return default_rule_table()


# --- rule table -------------------------------------------------------------


def test_embedded_table_contains_expected_rules(table):
    lines = {r.line() for r in table.rules}
    assert "irreflexive dc" in lines
    assert "transitivelyInconsistent pp pp dc" in lines
    assert "symmetric ec" in lines
    assert "asymmetric ntpp" in lines
    assert "converse ntpp ntppi" in lines
    assert "converse tpp tppi" in lines
    assert "implies dc dr" in lines
    assert "mutuallyInconsistent dr pp" in lines


def test_embedded_table_matches_symbolic_candidates(table):
    # nothing was refuted during the build, so the shipped table is exactly
    # the symbolically derived candidate set
    assert table.rules == frozenset(candidate_rules())


def test_table_round_trip(table):
    text = table.to_text()
    again = RuleTable.from_text(text)
    assert again.rules == table.rules
    assert RuleTable.from_text(again.to_text()).to_text() == again.to_text()


def test_table_rejects_contradictions():
    with pytest.raises(ValueError):
        RuleTable([PropertyRule("reflexive", ("eq",)), PropertyRule("irreflexive", ("eq",))])
    with pytest.raises(ValueError):
        RuleTable([PropertyRule("symmetric", ("dc",)), PropertyRule("asymmetric", ("dc",))])
    with pytest.raises(ValueError):
        RuleTable([
            PropertyRule("converse", ("tpp", "tppi")),
            PropertyRule("converse", ("tpp", "ntppi")),
        ])


def test_rule_validation():
    with pytest.raises(ValueError):
        PropertyRule("implies", ("dc",))
    with pytest.raises(ValueError):
        PropertyRule("weird", ("dc",))
    with pytest.raises(ValueError):
        PropertyRule("implies", ("dc", "bogus"))


def test_rule_soundness_sampling(table):
    # small-budget spot check; the full run is part of the acceptance suite
    violations = verify_rules(table.rules, scenes=1500, seed=99)
    assert violations == {}


def test_candidate_derivation_deterministic():
    assert candidate_rules() == candidate_rules()


def test_sampling_budget_floor():
    with pytest.raises(ValueError):
        derive_rule_table(sampling_budget=100)


# --- apply_property_rules ----------------------------------------------------


def test_converse_added(table):
    net = network_from_atoms([("a", "b", "ntpp")], table)
    closed = apply_property_rules(net, table)
    assert closed.constraints[("b", "a")] == frozenset({"ntppi"})


def test_irreflexive_diagonal(table):
    net = QualitativeNetwork()
    net.constrain("a", "a", {"dc"})
    assert isinstance(apply_property_rules(net, table), Inconsistent)


def test_reflexive_diagonal_kept(table):
    net = QualitativeNetwork()
    net.constrain("a", "a", {"eq"})
    closed = apply_property_rules(net, table)
    assert closed.constraints[("a", "a")] == frozenset({"eq"})


def test_mutually_inconsistent_assertions(table):
    assert isinstance(network_from_atoms([("a", "b", "pp"), ("a", "b", "dr")], table), Inconsistent)
    # compatible conjunction is fine
    net = network_from_atoms([("a", "b", "ntpp"), ("a", "b", "o")], table)
    assert not isinstance(net, Inconsistent)


def test_cross_direction_conflict(table):
    net = network_from_atoms([("a", "b", "ntpp"), ("b", "a", "ntpp")], table)
    assert isinstance(net, Inconsistent)


def test_closure_preserves_ground_scenes(table):
    # relations observed on real geometry must survive closure
    rng = random.Random(5)
    cfg = DeriveConfig(near_threshold=1.0)
    for _ in range(25):
        scene = sample_scene(rng)
        held = held_relations(scene, cfg)
        net = QualitativeNetwork(scene.keys())
        picks = {}
        for (a, b), rels in sorted(held.items()):
            if a == b or not rels:
                continue
            pick = sorted(rels)[rng.randrange(len(rels))]
            picks[(a, b)] = pick
            net.constrain(a, b, {pick})
        result = path_consistency(net, table)
        assert not isinstance(result, Inconsistent), (picks, result)
        for pair, rel in picks.items():
            assert rel in result.constraints[pair]


# --- path consistency ---------------------------------------------------------


def test_transitive_inconsistency_detected(table):
    net = network_from_atoms(
        [("a", "b", "pp"), ("b", "c", "pp"), ("a", "c", "dc")], table
    )
    assert isinstance(path_consistency(net, table), Inconsistent)


def test_dropping_any_atom_restores_consistency(table):
    atoms = [("a", "b", "pp"), ("b", "c", "pp"), ("a", "c", "dc")]
    for i in range(3):
        sub = atoms[:i] + atoms[i + 1:]
        result = path_consistency(network_from_atoms(sub, table), table)
        assert not isinstance(result, Inconsistent)


def test_dc_chain_not_overpruned(table):
    net = network_from_atoms([("a", "b", "dc"), ("b", "c", "dc")], table)
    net.constrain("a", "c", NETWORK_VOCAB)
    result = path_consistency(net, table)
    assert not isinstance(result, Inconsistent)
    # composing disconnection with disconnection constrains nothing
    assert result.constraints[("a", "c")] == frozenset(NETWORK_VOCAB)


def test_singleton_network_unchanged(table):
    net = QualitativeNetwork({"a"})
    result = path_consistency(net, table)
    assert result == net


def test_path_consistency_monotone_and_idempotent(table):
    net = network_from_atoms([("a", "b", "p"), ("b", "c", "ntpp")], table)
    net.constrain("a", "c", NETWORK_VOCAB)
    once = path_consistency(net, table)
    for pair, rels in once.constraints.items():
        assert rels <= net.get(*pair)
    twice = path_consistency(once, table)
    assert twice.constraints == once.constraints


def test_path_consistency_order_independent(table):
    # renaming nodes permutes every processing order; fixpoints must agree
    rng = random.Random(11)
    atoms = [("a", "b", "p"), ("b", "c", "po"), ("c", "d", "ntpp"), ("a", "d", "c")]
    base = path_consistency(network_from_atoms(atoms, table), table)
    for _ in range(4):
        names = ["a", "b", "c", "d"]
        perm = dict(zip(names, rng.sample(["w", "x", "y", "z"], 4)))
        renamed = [(perm[a], perm[b], r) for a, b, r in atoms]
        result = path_consistency(network_from_atoms(renamed, table), table)
        assert not isinstance(result, Inconsistent)
        for (a, b), rels in base.constraints.items():
            assert result.constraints[(perm[a], perm[b])] == rels


# --- enumeration ---------------------------------------------------------------


def test_enumerate_unique_forced(table):
    net = QualitativeNetwork()
    net.constrain("a", "b", {"ntpp"})
    got = enumerate_scenarios(net, table, 10)
    assert len(got) == 1
    assert got[0].as_dict()[("a", "b")] == "ntpp"


def test_enumerate_inconsistent_empty(table):
    net = network_from_atoms([("a", "b", "pp"), ("b", "c", "pp"), ("a", "c", "dc")], table)
    assert enumerate_scenarios(net, table, 10) == []


def test_enumerate_respects_limit_and_order(table):
    net = QualitativeNetwork()
    net.constrain("a", "b", {"dc", "po", "ntpp"})
    full = enumerate_scenarios(net, table, 10)
    assert [a.as_dict()[("a", "b")] for a in full] == ["dc", "po", "ntpp"]
    assert len(enumerate_scenarios(net, table, 2)) == 2


def brute_force_models(constraints, table):
    """Independent enumeration: try every atomic combination and check all
    rule patterns directly on the converse-closed atom set."""
    pairs = sorted(constraints)
    options = [sorted(constraints[p]) for p in pairs]
    count = 0
    for combo in itertools.product(*options):
        atoms: dict[tuple[str, str], set[str]] = {}
        ok = True
        for pair, rel in zip(pairs, combo):
            atoms.setdefault(pair, set()).add(rel)
        for (a, b), rels in list(atoms.items()):
            for r in list(rels):
                conv = table.converse.get(r)
                if conv is not None:
                    atoms.setdefault((b, a), set()).add(conv)
        for (a, b), rels in atoms.items():
            if a == b and rels & table.irreflexive:
                ok = False
            for r1, r2 in itertools.combinations(sorted(rels), 2):
                if table.pair_incompatible(r1, r2):
                    ok = False
            for r in rels:
                if r in table.asymmetric and r in atoms.get((b, a), ()):
                    ok = False
        if ok:
            nodes = sorted({x for pair in atoms for x in pair})
            for a, b, c in itertools.permutations(nodes, 3):
                for r1 in atoms.get((a, b), ()):
                    for r2 in atoms.get((b, c), ()):
                        for r3 in atoms.get((a, c), ()):
                            if (r1, r2, r3) in table.bad_triples:
                                ok = False
        if ok:
            count += 1
    return count


def test_enumerate_matches_brute_force(table):
    rng = random.Random(31)
    for trial in range(8):
        n = rng.randint(3, 4)
        nodes = [f"n{i}" for i in range(n)]
        net = QualitativeNetwork(nodes)
        constraints = {}
        node_pairs = list(itertools.combinations(nodes, 2))
        rng.shuffle(node_pairs)
        for a, b in node_pairs[: rng.randint(2, len(node_pairs))]:
            if rng.random() < 0.5:
                a, b = b, a
            rels = frozenset(rng.sample(NETWORK_VOCAB, 4))
            constraints[(a, b)] = rels
            net.constrain(a, b, rels)
        expected = brute_force_models(constraints, table)
        got = enumerate_scenarios(net, table, 100_000)
        assert len(got) == expected, (trial, constraints)


def test_every_assignment_is_path_consistent(table):
    rng = random.Random(77)
    net = QualitativeNetwork(["x", "y", "z"])
    for a, b in [("x", "y"), ("y", "z"), ("x", "z")]:
        net.constrain(a, b, frozenset(rng.sample(NETWORK_VOCAB, 4)))
    for assignment in enumerate_scenarios(net, table, 1000):
        atomic = QualitativeNetwork(["x", "y", "z"])
        for (a, b), rel in assignment.choices:
            atomic.constrain(a, b, {rel})
        assert not isinstance(path_consistency(atomic, table), Inconsistent)
