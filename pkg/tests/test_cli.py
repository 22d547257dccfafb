import numpy as np
import yaml

from manifold_mpc import cli


def run_cli(args):
    try:
        return cli.main(args)
    except SystemExit as exc:  # argparse usage errors
        return exc.code


def test_list_scenarios_descriptions(capsys):
    assert run_cli(["list-scenarios"]) == 0
    out = capsys.readouterr().out
    for name in ("quad-circle", "quad-loop", "ugv-hill"):
        assert name in out


def test_list_scenarios_ids(capsys):
    assert run_cli(["list-scenarios", "--ids"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines == sorted(lines)
    assert all(" " not in line for line in lines)
    assert "quad-circle" in lines


def test_unknown_subcommand_prints_usage(capsys):
    assert run_cli(["frobnicate"]) == 1
    assert "usage" in capsys.readouterr().err.lower()


def test_no_subcommand_is_usage_error(capsys):
    assert run_cli([]) == 1


def test_run_bundled_scenario(tmp_path, capsys):
    out = tmp_path / "out"
    code = run_cli(["run", "quad-circle", "--duration", "0.5", "--out", str(out)])
    assert code == 0
    header, rows = cli.read_trace_csv(str(out / "trace.csv"))
    assert len(rows) == 50  # duration / dt
    assert header[0] == "t" and header[-1] == "solve_time_us"
    summary = cli.read_summary(str(out / "summary.txt"))
    assert "max_pos_err_m" in summary and "mean_solve_time_ms" in summary


def test_run_ugv_summary_fields(tmp_path):
    out = tmp_path / "ugv"
    code = run_cli(["run", "ugv-hill", "--duration", "0.4", "--out", str(out)])
    assert code == 0
    summary = cli.read_summary(str(out / "summary.txt"))
    assert "max_pos_err_m" in summary
    assert "mean_solve_time_ms" in summary


def test_run_config_file_with_overrides(tmp_path):
    cfg = tmp_path / "scenario.yaml"
    cfg.write_text(yaml.safe_dump({
        "scenario": "quad-circle",
        "duration_s": 0.3,
        "seed": 7,
        "overrides": {"reference": {"speed_max_mps": 1.0}},
    }))
    out = tmp_path / "run"
    assert run_cli(["run", str(cfg), "--out", str(out)]) == 0
    _, rows = cli.read_trace_csv(str(out / "trace.csv"))
    assert len(rows) == 30


def test_degenerate_bounds_config_rejected(tmp_path, capsys):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text(yaml.safe_dump({
        "scenario": "quad-circle",
        "overrides": {"mpc": {"u_min": [0.0, -1.0, -1.0, -1.0],
                              "u_max": [0.0, 1.0, 1.0, 1.0]}},
    }))
    assert run_cli(["run", str(cfg)]) == 1
    assert "config error" in capsys.readouterr().err


def test_unknown_scenario_rejected(capsys):
    assert run_cli(["run", "does-not-exist"]) == 1
    assert "config error" in capsys.readouterr().err


def test_nonconvergence_exit_code(tmp_path):
    # one-iteration cap cannot satisfy the residual tolerance while the
    # initial transient saturates the yaw-rate bound
    cfg = tmp_path / "starved.yaml"
    cfg.write_text(yaml.safe_dump({
        "scenario": "ugv-hill",
        "duration_s": 0.2,
        "overrides": {"mpc": {"max_iter": 1},
                      "sim": {"dx_init": [0.0, 1.2, 0.8]}},
    }))
    assert run_cli(["run", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_tracking_lost_exit_code(tmp_path):
    cfg = tmp_path / "lost.yaml"
    cfg.write_text(yaml.safe_dump({
        "scenario": "quad-circle",
        "duration_s": 0.3,
        "overrides": {
            "reference": {"speed_max_mps": 0.0, "ramp_time_s": 0.0},
            "sim": {"dx_init": [0.0] * 6 + [float(np.pi) - 1e-5, 0.0, 0.0]},
        },
    }))
    assert run_cli(["run", str(cfg), "--out", str(tmp_path / "o")]) == 3


def test_trace_roundtrip_to_printed_precision(tmp_path):
    out = tmp_path / "rt"
    assert run_cli(["run", "quad-circle", "--duration", "0.2", "--out", str(out)]) == 0
    from manifold_mpc import scenarios
    from manifold_mpc.simulate import rollout

    sc = scenarios.load_scenario("quad-circle", {"sim": {"duration_s": 0.2}})
    tr = rollout(sc)
    header, rows = cli.read_trace_csv(str(out / "trace.csv"))
    assert rows.shape[0] == len(tr)
    amb = tr.x.shape[1]
    assert np.allclose(rows[:, 0], tr.t, atol=1e-10)
    assert np.allclose(rows[:, 1 : 1 + amb], tr.x, rtol=1e-11, atol=1e-14)
    assert np.allclose(rows[:, 1 + amb : 1 + 2 * amb], tr.x_ref, rtol=1e-11, atol=1e-14)
    iters_col = header.index("solver_iters")
    assert np.array_equal(rows[:, iters_col].astype(int), tr.iterations)


def test_exit_code_stable_across_runs(tmp_path):
    codes = set()
    for i in range(2):
        codes.add(run_cli(["run", "quad-circle", "--duration", "0.2",
                           "--seed", "5", "--out", str(tmp_path / f"r{i}")]))
    assert codes == {0}
    a = cli.read_trace_csv(str(tmp_path / "r0" / "trace.csv"))[1]
    b = cli.read_trace_csv(str(tmp_path / "r1" / "trace.csv"))[1]
    # everything but the wall-clock column is identical
    assert np.array_equal(a[:, :-1], b[:, :-1])
