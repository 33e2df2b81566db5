import itertools

import pytest

import focq


def star(n):
    names = [f"v{i}" for i in range(n)]
    return {
        "universe": names,
        "relations": {
            "E": {"arity": 2, "tuples": [[a, b] for i in range(1, n) for a, b in ((names[0], names[i]), (names[i], names[0]))]},
            "P": {"arity": 1, "tuples": [[names[i]] for i in range(0, n, 2)]},
        },
    }


def test_term_matches_hand_count():
    a = star(7)
    # ordered edges of a star on 7 vertices
    assert focq.run("#(x,y).E(x,y)", a, "naive") == 12
    assert focq.run("#(x,y).E(x,y)", a, "local") == 12


def test_sentence_and_query_agree_between_modes():
    a = focq.generate("random-tree", 30, seed=4, unary=["P", "Q"])
    s = "exists x. (P(x) & prime(#(y).(E(x,y) & Q(y))))"
    assert focq.run(s, a, "local") == focq.run(s, a, "naive")
    q = "(x, #(y).(E(x,y) & P(y))). Q(x)"
    rows = focq.run(q, a, "local", threshold=4)
    assert rows == focq.run(q, a, "naive")
    expected = []
    edges = {tuple(t) for t in a["relations"]["E"]["tuples"]}
    p = {t[0] for t in a["relations"]["P"]["tuples"]}
    for x in [t[0] for t in a["relations"]["Q"]["tuples"]]:
        expected.append((x, sum(1 for y in a["universe"] if (x, y) in edges and y in p)))
    assert sorted(rows) == sorted(expected)


def test_large_counts_are_python_ints():
    a = focq.generate("path", 40)
    # 40^12 does not fit in 32 bits
    v = focq.run("((#(a,b,c,d).true * #(a,b,c,d).true) * #(a,b,c,d).true)", a, "naive")
    assert v == 40 ** 12


def test_cover_is_valid():
    c = focq.cover(focq.generate("grid", 100), 1)
    assert c["valid"]
    assert c["violations"] == []
    covered = set(itertools.chain.from_iterable(cl["members"] for cl in c["clusters"]))
    assert len(covered) == 100


def test_splitter_game_on_path():
    g = focq.splitter_game(4, [(0, 1), (1, 2), (2, 3)], 1)
    assert g["splitter_wins"]
    assert g["value"] == 2


def test_decompose_and_transform():
    d = focq.decompose("exists x. prime(#(y).E(x,y))", {"E": 2})
    assert d["kind"] == "sentence"
    assert d["depth"] == 1
    assert focq.transform("exists y. E(x,y)", {"E": 2}, ["x"], 1) == "(E$1_2() | exists y. E$1(y))"


def test_remove_and_tree_encoding():
    r = focq.remove(focq.generate("path", 4), "v1", 1)
    assert "S1$d" in r["relations"]
    tree, height = focq.encode_tree(4, [(0, 1), (1, 2), (2, 3)])
    assert height == 3
    assert len(tree["universe"]) == 60
    assert focq.rewrite_tree_formula("exists x. exists y. E(x,y)").startswith("exists x.")


def test_errors_are_value_errors():
    with pytest.raises(focq.InputError):
        focq.run("exists x. (", star(3))
    with pytest.raises(ValueError):
        focq.run("#(x).E(x,x)", "{not json")
