import re

import pytest

from chorc import cli

from conftest import CORPUS, GOLDEN


def run_cli(*argv):
    return cli.main(list(argv))


def test_check_ok(capsys):
    assert run_cli("check", str(CORPUS / "auth.chor")) == 0
    captured = capsys.readouterr()
    assert captured.err == ""


def test_check_validation_failure(tmp_path, capsys):
    f = tmp_path / "bad.chor"
    f.write_text("main { a.x -> a.y; }")
    assert run_cli("check", str(f)) == 1
    captured = capsys.readouterr()
    assert "self_communication" in captured.err
    assert "bad.chor:1:8" in captured.err


def test_check_parse_failure(tmp_path, capsys):
    f = tmp_path / "syntax.chor"
    f.write_text("main { p.1 -> q.x }")
    assert run_cli("check", str(f)) == 1
    assert "expected" in capsys.readouterr().err


def test_check_missing_file(capsys):
    assert run_cli("check", "/nonexistent.chor") == 1
    assert "cannot read" in capsys.readouterr().err


def test_project_stdout_matches_golden(capsys):
    assert run_cli("project", str(CORPUS / "auth.chor")) == 0
    out = capsys.readouterr().out
    assert out == (GOLDEN / "auth.ir.json").read_text()


def test_project_ir_out(tmp_path):
    target = tmp_path / "auth.ir.json"
    assert run_cli("project", str(CORPUS / "auth.chor"),
                   "--ir-out", str(target)) == 0
    assert target.read_text() == (GOLDEN / "auth.ir.json").read_text()


def test_project_unprojectable_exit_2(capsys):
    f = CORPUS / "unprojectable" / "u1_com_vs_end.chor"
    assert run_cli("project", str(f)) == 2
    err = capsys.readouterr().err
    assert "merge_conflict" in err
    assert "u1_com_vs_end.chor:3:3-6:4" in err


def test_run_exhaustive_sorted(capsys):
    assert run_cli("run", str(CORPUS / "two_coms_indep.chor")) == 0
    out = capsys.readouterr().out
    assert out == (
        "trace 1 (completed):\n"
        "  p -[int:1]-> q.x\n"
        "  r -[int:2]-> s.y\n"
        "trace 2 (completed):\n"
        "  r -[int:2]-> s.y\n"
        "  p -[int:1]-> q.x\n")


def test_run_seed_reproducible(capsys):
    args = ("run", str(CORPUS / "parallel3.chor"), "--seed", "7")
    assert run_cli(*args) == 0
    first = capsys.readouterr().out
    assert run_cli(*args) == 0
    assert capsys.readouterr().out == first
    assert first.count("trace 1") == 1


def test_run_with_memory(capsys):
    assert run_cli("run", str(CORPUS / "auth_exec.chor"),
                   "--mem", "Client.credentials=str:ok") == 0
    out = capsys.readouterr().out
    assert "Ip ?then" in out
    assert "Server -[str:tok]-> Client.token" in out


def test_run_missing_memory_exit_3(capsys):
    assert run_cli("run", str(CORPUS / "auth_exec.chor")) == 3
    assert "unbound variable" in capsys.readouterr().err


def test_run_unfold_limit_exit_4(tmp_path, capsys):
    f = tmp_path / "spin.chor"
    f.write_text("def X { call X; } main { call X; }")
    assert run_cli("run", str(f)) == 4
    assert "unfolded" in capsys.readouterr().err


def test_simulate_matches_run(capsys):
    assert run_cli("simulate", str(CORPUS / "auth_exec.chor"),
                   "--mem", "Client.credentials=str:ok") == 0
    sim_out = capsys.readouterr().out
    assert run_cli("run", str(CORPUS / "auth_exec.chor"),
                   "--mem", "Client.credentials=str:ok") == 0
    assert capsys.readouterr().out == sim_out


def test_verify_auth_exec(capsys):
    assert run_cli("verify", str(CORPUS / "auth_exec.chor"),
                   "--mem", "Client.credentials=str:ok", "--depth", "12") == 0
    out = capsys.readouterr().out
    assert "traces equal: 1 completed" in out
    assert "deadlock-free: yes" in out


def test_verify_both_guard_modes(capsys):
    for value in ("ok", "bad"):
        assert run_cli("verify", str(CORPUS / "auth_exec.chor"),
                       "--mem", f"Client.credentials=str:{value}",
                       "--depth", "12") == 0
        assert "traces equal: 1 completed" in capsys.readouterr().out


def test_verify_unprojectable_exit_2():
    f = CORPUS / "unprojectable" / "u3_offer_vs_recv.chor"
    assert run_cli("verify", str(f)) == 2


def test_compile_writes_services(tmp_path, capsys):
    assert run_cli("compile", str(CORPUS / "auth.chor"),
                   "--out", str(tmp_path)) == 0
    out = capsys.readouterr().out
    assert (tmp_path / "client.ol").exists()
    assert (tmp_path / "ip.ol").exists()
    assert (tmp_path / "server.ol").exists()
    assert str(tmp_path / "client.ol") in out
    assert (tmp_path / "client.ol").read_text() == (GOLDEN / "client.ol").read_text()


def test_compile_single_file(tmp_path):
    assert run_cli("compile", str(CORPUS / "auth.chor"),
                   "--out", str(tmp_path), "--single-file") == 0
    text = (tmp_path / "program.ol").read_text()
    assert len(re.findall(r"^service \w+ \{", text, re.M)) == 3


def test_compile_base_port(tmp_path):
    assert run_cli("compile", str(CORPUS / "auth.chor"),
                   "--out", str(tmp_path), "--base-port", "7000") == 0
    assert 'location: "socket://localhost:7000"' in (tmp_path / "client.ol").read_text()


def test_bad_memory_argument_is_usage_error():
    with pytest.raises(SystemExit):
        run_cli("run", str(CORPUS / "auth_exec.chor"),
                "--mem", "Client.credentials=float:1")


def test_seed_and_exhaustive_conflict():
    with pytest.raises(SystemExit):
        run_cli("run", str(CORPUS / "parallel3.chor"),
                "--seed", "1", "--exhaustive")


def test_check_empty_main(capsys):
    assert run_cli("check", str(CORPUS / "empty.chor")) == 0
    assert capsys.readouterr().err == ""


def test_state_space_limit_exit_4(capsys):
    assert run_cli("run", str(CORPUS / "parallel3.chor"),
                   "--max-configs", "2") == 4
    assert "budget" in capsys.readouterr().err
