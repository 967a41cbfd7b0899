import json
from fractions import Fraction

import pytest

from sofickit import io
from sofickit.cli import main
from sofickit.embed import exact_embedding
from sofickit.measured import WeightedSpace
from sofickit.pbij import PartialBijection as P
from sofickit.relation import make_relation
from sofickit.sampling import random_element, random_relation, rng_from


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr()


def load(path):
    return json.loads(path.read_text())


def without_timestamp(obj):
    return {k: v for k, v in obj.items() if k != "timestamp"}


def test_json_roundtrips():
    f = P.from_dict(4, {0: 2, 3: 3})
    assert io.pbij_to_json(f) == {"n": 4, "map": [[0, 2], [3, 3]]}
    assert io.pbij_from_json(io.pbij_to_json(f)) == f
    R = random_relation(rng_from(0), 8, 60)
    obj = io.relation_to_json(R)
    assert all(isinstance(a["weight"], str) and "/" in a["weight"] for a in obj["space"]["atoms"])
    assert io.relation_from_json(json.loads(json.dumps(obj))) == R
    g = random_element(rng_from(1), R)
    assert io.localiso_from_json(io.localiso_to_json(g), R) == g
    m = exact_embedding(R, [g])
    back = io.morphism_from_json(json.loads(json.dumps(io.morphism_to_json(m))), R)
    assert back.carrier == m.carrier and back.table == m.table


def test_rationals_render_as_p_over_q():
    assert io.rat(0) == "0/1" and io.rat(Fraction(6, 8)) == "3/4" and io.rat(1) == "1/1"


def test_schema_errors():
    with pytest.raises(io.SchemaError):
        io.pbij_from_json({"map": []})
    with pytest.raises(io.SchemaError):
        io.space_from_json({"atoms": [{"id": "a", "weight": 0.5}]})
    R = make_relation(WeightedSpace.uniform(2), [[0, 1]])
    with pytest.raises(io.SchemaError):
        io.localiso_from_json({"map": [["0", "zz"]]}, R)


def test_embed_then_check(tmp_path, capsys):
    r, m = tmp_path / "r.json", tmp_path / "m.json"
    assert run(capsys, "gen-relation", "--seed", 3, "--out", r)[0] == 0
    assert run(capsys, "embed", "--relation", r, "--out", m, "--seed", 1)[0] == 0
    code, out = run(capsys, "check", "--relation", r, "--morphism", m)
    rep = json.loads(out.out)
    assert code == 0 and rep["eps_mult"] == "0/1" and rep["eps_trace"] == "0/1"


def test_perturb_then_check(tmp_path, capsys):
    r, m, p = tmp_path / "r.json", tmp_path / "m.json", tmp_path / "p.json"
    run(capsys, "gen-relation", "--seed", 5, "--atoms", 10, "--out", r)
    run(capsys, "embed", "--relation", r, "--out", m)
    # widen the target so a 1/20 perturbation actually moves points
    R = io.relation_from_json(load(r))
    mm = io.morphism_from_json(load(m), R)
    from sofickit.suites import inflate
    io.write_json(m, io.morphism_to_json(inflate(mm, 10)))
    assert run(capsys, "perturb", "--relation", r, "--morphism", m, "--delta", "1/20", "--out", p, "--seed", 2)[0] == 0
    code, out = run(capsys, "check", "--relation", r, "--morphism", p, "--delta", "1/20")
    rep = json.loads(out.out)
    assert code == 0 and Fraction(rep["eps_mult"]) <= Fraction(3, 20)


def test_props_prop1_exhaustive(tmp_path, capsys):
    out = tmp_path / "rep.json"
    code, _ = run(capsys, "props", "--suite", "prop1", "--n", 3, "--exhaustive", "--trials", 50, "--out", out)
    rep = load(out)
    assert rep["extra"]["pairs_checked"] == 34 ** 2
    # inverse invariance is false for partial maps, so the suite reports a violation
    assert code == 1
    assert {v["check"] for v in rep["violations"]} == {"inverse invariance: d(g,h) = d(g^-1,h^-1)"}


def test_props_clean_suite_exits_zero(capsys):
    code, out = run(capsys, "props", "--suite", "monoid", "--n", 3, "--trials", 1000)
    assert code == 0 and json.loads(out.out)["ok"]


def test_determinism(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert run(capsys, "props", "--suite", "perturb", "--trials", 3, "--seed", 11, "--out", path)[0] == 0
    assert without_timestamp(load(a)) == without_timestamp(load(b))
    r = tmp_path / "r.json"
    run(capsys, "gen-relation", "--seed", 4, "--out", r)
    outs = []
    for path in (a, b):
        run(capsys, "embed", "--relation", r, "--seed", 9, "--out", path)
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_combine_commands(tmp_path, capsys):
    r = tmp_path / "r.json"
    io.write_json(r, io.relation_to_json(make_relation(WeightedSpace.uniform(6), [[0, 1, 2], [3, 4, 5]])))
    R = io.relation_from_json(load(r))
    m = tmp_path / "m.json"
    rng = rng_from(0)
    K = [R.partial_identity([0, 1, 2])] + [random_element(rng, R) for _ in range(8)]
    io.write_json(m, io.morphism_to_json(exact_embedding(R, K)))
    out = tmp_path / "o.json"
    for argv in (["mix", "--relation", r, "--relation", r, "--morphism", m, "--morphism", m, "--weights", "1,2"],
                 ["restrict", "--relation", r, "--morphism", m, "--subset", "0,1,2"],
                 ["product", "--relation", r, "--relation", r, "--trials", 5],
                 ["trim", "--relation", r, "--subset", "0,1,2"]):
        code, res = run(capsys, "combine", *argv, "--out", out)
        assert code == 0, res.err
        assert json.loads(res.out)["eps_mult"] == "0/1"
    fine = tmp_path / "fine.json"
    io.write_json(fine, io.relation_to_json(make_relation(WeightedSpace.uniform(6), [[0], [1], [2], [3], [4], [5]])))
    code, res = run(capsys, "combine", "extend", "--relation", fine, "--relation", r, "--out", out)
    assert code == 0 and json.loads(res.out)["index"] == 3 and len(json.loads(res.out)["psi"]) == 3
    code, res = run(capsys, "combine", "reconstruct", "--relation", r, "--subset", "0,1")
    assert code == 0 and json.loads(res.out)["mu_image"] == "1/3"


def test_input_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "check", "--relation", bad, "--morphism", bad)[0] == 2
    assert run(capsys, "check", "--relation", tmp_path / "missing.json", "--morphism", bad)[0] == 2
    r = tmp_path / "r.json"
    io.write_json(r, io.relation_to_json(make_relation(WeightedSpace.uniform(2), [[0, 1]])))
    code, res = run(capsys, "combine", "reconstruct", "--relation", r, "--subset", "0")
    assert code == 2 and "Inadmissible" in res.err
    assert run(capsys, "props", "--suite", "nope")[0] == 2
    m = tmp_path / "m.json"
    io.write_json(m, io.morphism_to_json(exact_embedding(io.relation_from_json(load(r)))))
    code, res = run(capsys, "combine", "restrict", "--relation", r, "--morphism", m, "--subset", "0", "--out", m)
    assert code == 2 and "MissingImage" in res.err
