import json

import pytest

from artifact.cli import DEFAULT_SEED, load_surface, main, parse_skeleton, parse_word
from artifact.errors import NonClosedWord, ParseError
from artifact.loops import CIRCLE, format_word
from artifact.surface import builtin

TORUS_JSON = json.dumps(
    {
        "vertices": [{"id": "v0", "halfedges": ["a+", "b+", "a-", "b-"]}],
        "edges": [{"id": "a", "tail": "a+", "head": "a-", "rot2": 0}, {"id": "b", "tail": "b+", "head": "b-"}],
    }
)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out.strip(), err.strip()


def test_parse_skeleton():
    sk = parse_skeleton(TORUS_JSON)
    assert sk == builtin("torus")
    assert sk.rot2("b") == 0
    dup = TORUS_JSON.replace('"b+", "a-"', '"a+", "a-"')
    with pytest.raises(ParseError):
        parse_skeleton(dup)
    with pytest.raises(ParseError) as exc:
        parse_skeleton('{"vertices": [}')
    assert exc.value.position is not None


def test_parse_word_modes():
    t = builtin("torus")
    assert str(parse_word("a b a' b'", t)) == "a b a' b'"
    assert parse_word("a a^-1", t) == CIRCLE
    with pytest.raises(ParseError):
        parse_word("a c", t)
    with pytest.raises(NonClosedWord):
        parse_word("e", builtin("annulus2"))
    assert parse_word("e", builtin("annulus2"), cyclic=False).letters == (("e", 1),)


def test_word_round_trip():
    t = builtin("genus2")
    for text in ("a b a' b'", "c d' c'", "a b' c d"):
        canon = format_word(parse_word(text, t).letters)
        assert format_word(parse_word(canon, t).letters) == canon
    assert format_word(parse_word("a b a' b'", t).letters) == "a b a' b'"


def test_bracket_commands(capsys):
    code, out, _ = run(capsys, "bracket", "a", "a")
    assert (code, out) == (0, "0")
    code, out, _ = run(capsys, "bracket", "--surface", "torus", "a", "b")
    assert code == 0 and out.lstrip("-") == "|a b|"
    code, out, _ = run(capsys, "bracket", "a", "b", "--json")
    data = json.loads(out)
    assert data["terms"][0]["coeff"] in ("1", "-1")


def test_surface_file_input(tmp_path, capsys):
    p = tmp_path / "torus.json"
    p.write_text(TORUS_JSON)
    code, out, _ = run(capsys, "bracket", "--surface", str(p), "a", "b")
    assert code == 0 and "a b" in out
    code, out, _ = run(capsys, "surface", "info", "--surface", str(p), "--json")
    assert json.loads(out) == {"boundary_components": 1, "edges": 2, "genus": 1, "vertices": 1}
    assert load_surface(str(p)) == builtin("torus")


def test_surface_new_round_trips(capsys):
    code, out, _ = run(capsys, "surface", "new", "pants", "--rot2", "a=3")
    sk = parse_skeleton(out)
    assert code == 0 and sk.rot2("a") == 3


def test_errors_exit_two(capsys):
    code, _, err = run(capsys, "bracket", "a c", "b")
    assert code == 2 and "unknown edge" in err
    code, _, err = run(capsys, "bvdelta", "otr(a)", "--group", "gl")
    assert code == 2
    with pytest.raises(SystemExit) as exc:
        main(["verify", "NOT_A_SUITE"])
    assert exc.value.code == 2


def test_eval_and_bvdelta(capsys):
    code, out, _ = run(capsys, "eval", "tr(a b) * tr(a)", "--json")
    data = json.loads(out)
    assert code == 0 and data["seed"] == DEFAULT_SEED
    code, out, _ = run(capsys, "bvdelta", "entry[x,0,0](a) * entry[y,0,0](b)", "--group", "q")
    assert code == 0 and out


def test_verify_is_reproducible(capsys):
    code, out1, _ = run(capsys, "verify", "GT_AXIOMS", "--trials", "25")
    _, out2, _ = run(capsys, "verify", "GT_AXIOMS", "--trials", "25")
    assert code == 0 and out1 == out2
    data = json.loads(out1)
    assert list(data) == sorted(data)
    assert len(data["trials"]) == 25
