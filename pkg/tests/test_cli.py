import json

import pytest

from app.core.config import settings
from app.route.route import parse_and_dispatch


def records(result) -> dict:
    return json.loads(result.stdout.strip().splitlines()[-1])


def invoke(runner, cli, *args):
    return runner.invoke(cli, ["--format", "records", *args])


def test_mixed_pipeline(runner, cli, tmp_path):
    rho, table, rho_hat = tmp_path / "rho.txt", tmp_path / "table.txt", tmp_path / "rho_hat.txt"
    result = invoke(runner, cli, "gen", "--spin", "1", "--kind", "mixed", "--seed", "3", "--out", str(rho))
    assert result.exit_code == 0, result.stderr
    result = invoke(runner, cli, "measure", "--state", str(rho), "--cone", "K=5,theta=1.0", "--out", str(table))
    assert result.exit_code == 0, result.stderr
    assert records(result)["data"]["mode"] == "exact"
    result = invoke(runner, cli, "reconstruct", "mixed", "--table", str(table), "--out", str(rho_hat))
    assert result.exit_code == 0, result.stderr
    assert records(result)["data"]["residual"] < 1e-10
    assert rho_hat.read_text().startswith("spin 2\n")


def test_certify_reports_the_deficit(runner, cli):
    result = invoke(runner, cli, "certify", "--spin", "1", "--cone", "K=4,theta=1.0")
    assert result.exit_code == 0
    data = records(result)["data"]
    assert (data["rank"], data["deficit"], data["injective"]) == (8, 1, False)


def test_certify_table_format(runner, cli):
    result = runner.invoke(cli, ["certify", "--spin", "1/2", "--tripod"])
    assert result.exit_code == 0
    assert result.stdout.splitlines()[0] == "injective: rank 4 of 4, deficit 0"


def test_not_injective_exit_code(runner, cli, tmp_path):
    rho, table = tmp_path / "rho.txt", tmp_path / "table.txt"
    invoke(runner, cli, "gen", "--spin", "1", "--kind", "mixed", "--out", str(rho))
    invoke(runner, cli, "measure", "--state", str(rho), "--cone", "K=4,theta=1.0", "--out", str(table))
    result = invoke(runner, cli, "reconstruct", "mixed", "--table", str(table), "--out", str(tmp_path / "out.txt"))
    assert result.exit_code == 2
    assert "not injective" in result.stderr
    result = invoke(
        runner, cli, "reconstruct", "mixed", "--table", str(table), "--allow-minimum-norm", "--out", str(tmp_path / "out.txt")
    )
    assert result.exit_code == 0


def test_design_writes_a_quorum(runner, cli, tmp_path):
    quorum = tmp_path / "quorum.txt"
    result = invoke(runner, cli, "design", "--spin", "1/2", "--axes", "3", "--grid-points", "20", "--out", str(quorum))
    assert result.exit_code == 0, result.stderr
    assert quorum.read_text().startswith("quorum cone")
    result = invoke(runner, cli, "design", "--spin", "1", "--axes", "4", "--grid-points", "20")
    assert result.exit_code == 2


def test_pure_pipeline(runner, cli, tmp_path):
    psi, table, psi_hat = tmp_path / "psi.txt", tmp_path / "table.txt", tmp_path / "psi_hat.txt"
    invoke(runner, cli, "gen", "--spin", "3/2", "--seed", "5", "--out", str(psi))
    invoke(runner, cli, "measure", "--state", str(psi), "--tripod", "--out", str(table))
    result = invoke(runner, cli, "reconstruct", "pure", "--table", str(table), "--out", str(psi_hat))
    assert result.exit_code == 0, result.stderr
    assert records(result)["data"]["residual"] <= 1e-8


def test_partners(runner, cli, tmp_path):
    psi, partners = tmp_path / "psi.txt", tmp_path / "partners.txt"
    invoke(runner, cli, "gen", "--spin", "1", "--seed", "5", "--out", str(psi))
    result = invoke(runner, cli, "partners", "--state", str(psi), "--out", str(partners))
    assert result.exit_code == 0, result.stderr
    data = records(result)["data"]
    assert (data["patterns"], data["candidates"], data["selected"]) == (4, 4, 0)
    assert "selected" in partners.read_text()
    result = invoke(runner, cli, "partners", "--state", str(psi), "--third-axis", "x")
    assert result.exit_code == 4


def test_indirect_expectation(runner, cli, tmp_path):
    rho, table, operator = tmp_path / "rho.txt", tmp_path / "table.txt", tmp_path / "sz.txt"
    invoke(runner, cli, "gen", "--spin", "1/2", "--kind", "mixed", "--out", str(rho))
    invoke(runner, cli, "measure", "--state", str(rho), "--tripod", "--out", str(table))
    operator.write_text("spin 1\n0 0 0.5 0.0\n1 1 -0.5 0.0\n")
    result = invoke(runner, cli, "indirect", "--table", str(table), "--operator", str(operator))
    assert result.exit_code == 0, result.stderr
    data = records(result)["data"]
    assert abs(data["im"]) < 1e-12
    assert abs(data["re"]) <= 0.5


def test_consistency_exit_codes(runner, cli, tmp_path):
    rho, quorum = tmp_path / "rho.txt", tmp_path / "quorum.txt"
    invoke(runner, cli, "gen", "--spin", "1", "--kind", "mixed", "--out", str(rho))
    quorum.write_text("quorum explicit\n" + "".join(f"axis 1.0 {k * 1.2566370614359172}\n" for k in range(5)))
    result = invoke(runner, cli, "consistency", "--state", str(rho), "--quorum", str(quorum), "--holdout", "0.77,0")
    assert result.exit_code == 0, result.stderr
    assert records(result)["data"]["passed"] is True
    result = invoke(runner, cli, "consistency", "--state", str(rho), "--quorum", str(quorum), "--holdout", "1.0,0")
    assert result.exit_code == 1


def test_dynamics_command(runner, cli, tmp_path):
    rho, trajectory = tmp_path / "rho.txt", tmp_path / "trajectory.txt"
    invoke(runner, cli, "gen", "--spin", "1", "--kind", "mixed", "--out", str(rho))
    result = invoke(
        runner, cli, "dynamics", "--state", str(rho), "--hamiltonian", "zeeman:omega=1,theta=0.4,phi=0.3",
        "--t1", "2", "--steps", "10", "--cone", "K=5,theta=1.0", "--check-closure", "--out", str(trajectory),
    )
    assert result.exit_code == 0, result.stderr
    data = records(result)["data"]
    assert data["closure_max_deviation"] <= 1e-8
    assert data["energy_drift"] <= 1e-12
    assert trajectory.read_text().splitlines()[1] == "t k m p"


def test_particle_demo(runner, cli, tmp_path):
    out = tmp_path / "particle.txt"
    result = runner.invoke(cli, ["particle-demo", "--mean-x", "1.4142135623730951", "--out", str(out)])
    assert result.exit_code == 0, result.stderr
    assert result.stdout.startswith("same densities, distinct states")
    text = out.read_text()
    assert "# position" in text and "# momentum" in text


def test_particle_tolerance_override(runner, cli):
    result = runner.invoke(cli, ["--tolerance", "PARTICLE_INDEPENDENCE_TOLERANCE=0.5", "particle-demo"])
    assert result.exit_code == 0, result.stderr
    assert result.stdout.startswith("check failed")
    assert settings.PARTICLE_INDEPENDENCE_TOLERANCE == 1e-6


def test_missing_input_file(runner, cli, tmp_path):
    result = invoke(runner, cli, "reconstruct", "mixed", "--table", str(tmp_path / "nope.txt"), "--out", str(tmp_path / "o.txt"))
    assert result.exit_code == 5


def test_invalid_spin(runner, cli, tmp_path):
    result = invoke(runner, cli, "gen", "--spin", "1/3", "--out", str(tmp_path / "psi.txt"))
    assert result.exit_code == 1


def test_tolerance_override_is_restored(runner, cli):
    before = settings.EXACT_RESIDUAL_TOLERANCE
    result = runner.invoke(cli, ["--tolerance", "EXACT_RESIDUAL_TOLERANCE=1e-6", "certify", "--spin", "1/2", "--tripod"])
    assert result.exit_code == 0
    assert settings.EXACT_RESIDUAL_TOLERANCE == before


def test_parse_and_dispatch_exit_codes(tmp_path):
    assert parse_and_dispatch(["certify", "--spin", "1/2", "--tripod"]) == 0
    assert parse_and_dispatch(["--tolerance", "NO_SUCH_SETTING=1", "certify", "--spin", "1/2", "--tripod"]) == 1
    assert parse_and_dispatch(["no-such-command"]) == 1
    assert parse_and_dispatch(["certify", "--spin", "1", "--cone", "K=4,theta=1.0", "--tripod"]) == 1


@pytest.mark.slow
def test_selftest_quick(runner, cli):
    result = runner.invoke(cli, ["selftest", "--quick", "--seed", "1"])
    lines = result.stdout.splitlines()
    assert lines[0] == "selftest seed 1 quick"
    assert all(line.startswith("PASS") for line in lines[1:-1]), result.stdout
    assert result.exit_code == 0
    again = runner.invoke(cli, ["selftest", "--quick", "--seed", "1"])
    assert again.stdout == result.stdout
