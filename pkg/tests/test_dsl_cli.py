import json
import os
import subprocess
import sys

import pytest
from hypothesis import given, settings, strategies as st

from conftest import FIXTURES
from reebring.cli import EXIT_CHECK_FAILED, EXIT_OK, EXIT_PARSE, EXIT_PRECONDITION, main
from reebring.distinguisher import InvariantsAgree, distinguish
from reebring.dsl import MissingBase, ParseError, evaluate, parse, print_script
from reebring.errors import StepError
from reebring.exact_algebra import CoefficientRing
from reebring.report import SCHEMA, emit_report, load_report, report_dict, state_from_report

CORPUS = sorted(f for f in os.listdir(FIXTURES) if f.endswith(".rbs"))
EXAMPLE5 = "coeff Z; base sg n=6 [product(S2,D4 as collar)]; step thm2 k=1 kp=2 r0=2"


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


# --- parsing ----------------------------------------------------------------------------

@pytest.mark.paper
def test_example5_one_liner():
    s = parse(EXAMPLE5)
    assert s.base.kind == "sg" and [st.op for st in s.steps] == ["thm2"]
    assert evaluate(s).state.betti() == [1, 0, 1, 1, 1, 1, 1]


@pytest.mark.trivial
@pytest.mark.parametrize("text", ["", "# only a comment\n", "coeff Z\n"])
def test_missing_base(text):
    with pytest.raises(MissingBase):
        parse(text)


@pytest.mark.trivial
def test_errors_carry_line_and_column():
    with pytest.raises(ParseError) as info:
        parse("coeff Z\nbase sg n=6 [S2]\nstep thm2 k=1 kp=2 r0=2 @\n")
    assert (info.value.line, info.value.col) == (3, 25)


@pytest.mark.trivial
@pytest.mark.parametrize("text", [
    "coeff Z; base sg n=6 [product(S2)]",  # arity
    "coeff Z; base sg n=6 [foo]",  # unknown manifold
    "coeff Z; base sg n=6 [S2]; step frobnicate",  # unknown step
    "coeff Z; base sg n=6 [S2]; step thm2 k=1 kp=2",  # missing argument
    "coeff Z; base sg n=6 [S2]; step thm2 k=1 kp=2 r0=2 bogus=1",  # unknown argument
    "coeff Z; base sg n=6 [S2]; step distinguish a=f0 b=f1",  # undefined names
    "coeff Z; base sg n=6 [S2] name=f0; step thm2 k=1 kp=2 r0=2 name=f0",  # duplicate name
    "coeff Z; base sg n=6 [S2]; base disc n=6",  # two bases
    "coeff W; base disc n=3",  # bad ring
    "coeff Z; base sg n=6 [S2",  # unclosed bracket
])
def test_syntax_errors(text):
    with pytest.raises(ParseError):
        parse(text)


@pytest.mark.derived
@pytest.mark.parametrize("name", CORPUS)
def test_corpus_round_trip(name, fixture_text):
    script = parse(fixture_text(name))
    printed = print_script(script)
    assert parse(printed) == script
    assert print_script(parse(printed)) == printed


def _script_texts():
    manifolds = st.sampled_from(["S1", "S2", "pt", "product(S1,S1)", "product(S2,S1)"])
    item = st.tuples(manifolds, st.sampled_from(["", " {k=1}", " {k=0 a=(1)}", " {k=1 c=\"(S1,1)\"}"])).map(
        "".join)
    bubble = st.lists(item, min_size=1, max_size=2).map(lambda xs: f"step bubble [{', '.join(xs)}]")
    thm2 = st.tuples(st.integers(1, 2), st.integers(-3, 3)).map(
        lambda t: f"step thm2 k={t[0]} kp=2 r0={t[1]}")
    window = st.integers(7, 14).map(lambda m: f"step window m={m}")
    steps = st.lists(st.one_of(bubble, thm2, window, st.just("step rank-doubling")), max_size=4)
    base = st.sampled_from(["base sg n=6 [S2]", "base disc n=6", "base concentric n=6 l=2",
                            "base sg n=6 [S2, product(S1,S1)] name=b"])
    coeff = st.sampled_from(["Z", "Q", "Zmod:4"])
    sep = st.sampled_from(["\n", "; "])
    return st.tuples(coeff, base, steps, sep).map(
        lambda t: t[3].join([f"coeff {t[0]}", t[1]] + t[2]))


@pytest.mark.trivial
@given(_script_texts())
@settings(max_examples=200)
def test_generated_scripts_round_trip(text):
    script = parse(text)
    assert parse(print_script(script)) == script


# --- evaluation and reports ----------------------------------------------------------------

@pytest.mark.paper
def test_thm41_torsion_in_report(fixture_text):
    report = json.loads(emit_report(evaluate(fixture_text("twisted_e6.rbs")).state))
    assert report["homology"]["4"] == ["6"]


@pytest.mark.trivial
def test_disc_report(fixture_text):
    report = json.loads(emit_report(evaluate(fixture_text("disc.rbs")).state))
    assert report["schema"] == SCHEMA
    assert report["betti"][0] == 1 and set(report["betti"][1:]) == {0}


@pytest.mark.derived
@pytest.mark.parametrize("name", CORPUS)
def test_reports_are_canonical_and_reload(name, fixture_text):
    ev = evaluate(fixture_text(name))
    text = emit_report(ev.state, ev.verdicts)
    assert json.dumps(json.loads(text), sort_keys=True, indent=2) + "\n" == text
    assert emit_report(evaluate(fixture_text(name)).state, ev.verdicts) == text
    back = state_from_report(load_report(text))
    assert isinstance(distinguish(back, ev.state), InvariantsAgree)


@pytest.mark.trivial
def test_report_flags_module_only(fixture_text):
    ev = evaluate(fixture_text("concentric.rbs"))
    flags = report_dict(ev.state, ev.verdicts)["flags"]
    assert set(flags) == {"ring_certified", "module_only", "special_generic", "degrade_reason"}


@pytest.mark.trivial
def test_engine_errors_carry_step_index():
    with pytest.raises(StepError) as info:
        evaluate("coeff Z\nbase disc n=6\nstep bubble [pt]\nstep thm2 k=1 kp=2 r0=2\n")
    assert info.value.step_index == 2
    assert info.value.error.hypothesis == "NoEligibleC0"


@pytest.mark.trivial
def test_coefficient_override(fixture_text):
    ev = evaluate(fixture_text("example5.rbs"), coeff=CoefficientRing.Q())
    assert ev.state.ring == CoefficientRing.Q()


@pytest.mark.paper
def test_sphere_chain_verdicts(fixture_text):
    ev = evaluate(fixture_text("sphere_chain.rbs"))
    kinds = [v["verdict"] for v in ev.verdicts]
    assert kinds[-1] == "Certified"


# --- command line ------------------------------------------------------------------------------

@pytest.mark.trivial
def test_cli_eval_success(tmp_path, capsys):
    path = write(tmp_path, "e5.rbs", EXAMPLE5)
    assert main(["eval", path]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["betti"] == [1, 0, 1, 1, 1, 1, 1]


@pytest.mark.trivial
def test_cli_eval_json_file(tmp_path, capsys):
    path = write(tmp_path, "e5.rbs", EXAMPLE5)
    target = tmp_path / "out.json"
    assert main(["eval", path, "--json", str(target)]) == EXIT_OK
    assert json.loads(target.read_text())["schema"] == SCHEMA


@pytest.mark.parametrize("argv_tail, text, code", [
    (["eval"], "coeff Z; base sg n=6 [S2", EXIT_PARSE),
    (["eval"], "", EXIT_PARSE),
    (["eval"], "coeff Z; base sg n=6 [S7]", EXIT_PRECONDITION),
    (["eval"], "coeff Z; base disc n=6; step thm2 k=1 kp=2 r0=2", EXIT_PRECONDITION),
    (["eval", "--coeff", "Zmod:x"], "coeff Z; base disc n=3", EXIT_PARSE),
    (["roundtrip"], EXAMPLE5, EXIT_OK),
    (["certify-thm3"], EXAMPLE5, EXIT_OK),
    (["certify-thm3"], "coeff Z; base disc n=3; step bubble [S1", EXIT_PARSE),
])
@pytest.mark.trivial
def test_cli_exit_codes(tmp_path, capsys, argv_tail, text, code):
    path = write(tmp_path, "s.rbs", text)
    cmd = argv_tail[:1] + [path] + argv_tail[1:]
    assert main(cmd) == code


@pytest.mark.trivial
def test_cli_step_error_message(tmp_path, capsys):
    path = write(tmp_path, "s.rbs", "coeff Z; base disc n=6; step thm2 k=1 kp=2 r0=2")
    assert main(["eval", path]) == EXIT_PRECONDITION
    err = capsys.readouterr().err
    assert err.startswith("error at step 1:") and "NoEligibleC0" in err


@pytest.mark.trivial
def test_cli_usage_error_is_parse_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["eval"])
    assert info.value.code == EXIT_PARSE


@pytest.mark.trivial
def test_cli_missing_file(tmp_path, capsys):
    assert main(["eval", str(tmp_path / "nope.rbs")]) == EXIT_PARSE


@pytest.mark.trivial
def test_cli_verify_prop3(capsys):
    assert main(["oracle", "verify-prop3", "--n", "4", "--S", "S1", "--S", "S1"]) == EXIT_OK
    assert "agree" in capsys.readouterr().out
    assert main(["oracle", "verify-prop3", "--n", "3", "--S", "bogus"]) == EXIT_PARSE
    assert main(["oracle", "verify-prop3", "--n", "7", "--S", "pt"]) == EXIT_PRECONDITION


@pytest.mark.trivial
def test_cli_distinguish_reports(tmp_path, capsys, fixture_text):
    a = write(tmp_path, "a.json", emit_report(evaluate(fixture_text("example5.rbs")).state))
    b = write(tmp_path, "b.json", emit_report(evaluate(fixture_text("example5_r1.rbs")).state))
    assert main(["distinguish", a, b]) == EXIT_OK
    assert capsys.readouterr().out.startswith("Distinguished by product_profile")
    bad = write(tmp_path, "bad.json", "{}")
    assert main(["distinguish", a, bad]) == EXIT_PARSE


@pytest.mark.trivial
def test_cli_roundtrip_prints_canonical_form(tmp_path, capsys, fixture_text):
    path = os.path.join(FIXTURES, "window.rbs")
    assert main(["roundtrip", path]) == EXIT_OK
    assert parse(capsys.readouterr().out) == parse(fixture_text("window.rbs"))


@pytest.mark.trivial
def test_module_entry_point(tmp_path):
    path = write(tmp_path, "e5.rbs", EXAMPLE5)
    proc = subprocess.run([sys.executable, "-m", "reebring", "roundtrip", path], capture_output=True, text=True)
    assert proc.returncode == EXIT_OK
    proc = subprocess.run([sys.executable, "-m", "reebring", "frob"], capture_output=True, text=True)
    assert proc.returncode == EXIT_PARSE


@pytest.mark.trivial
def test_cli_roundtrip_difference_exits_three(tmp_path, monkeypatch):
    import reebring.cli as cli
    path = write(tmp_path, "e5.rbs", EXAMPLE5)
    monkeypatch.setattr(cli, "print_script", lambda s: "coeff Q; base disc n=2\n")
    assert main(["roundtrip", path]) == EXIT_CHECK_FAILED
