"""Experiment runner, persistence, and the command line front end."""

from math import inf, log, sqrt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plantgap.cli import main
from plantgap.config import (format_config, parse_config_text, read_config,
                             write_config)
from plantgap.harness import (CSV_COLUMNS, STAT_NAMES, ExperimentConfig,
                              FidelityReport, PowerCurve, _binned_tv, _row,
                              graph_summary_stats, phase_sweep,
                              planted_support_report, pushforward_fidelity,
                              recompute_errors_from_rows,
                              refutation_gap_experiment, rows_to_csv_text,
                              run_detection_experiment,
                              run_recovery_experiment)
from plantgap.models import Graph, PdsParams, sample_pds
from plantgap.serialize import (read_dense_csv, read_edge_list,
                                write_dense_csv, write_edge_list)

SMALL_POINT = dict(N=20, k0=2, p=1.0, q=0.5, r=2)


def _graph(n: int, edges) -> Graph:
    adj = np.zeros((n, n), dtype=bool)
    for u, v in edges:
        adj[u, v] = adj[v, u] = True
    return Graph(n=n, adj=adj, planted=None)


# ---------------------------------------------------------------------------
# config files

def test_parse_config_text():
    text = """
    # comment line
    n = 52            # trailing comment
    rate = 0.25
    label = alpha
    flag = true
    missing = none
    grid = 1, 2.5, x
    """
    values = parse_config_text(text)
    assert values == {"n": 52, "rate": 0.25, "label": "alpha", "flag": True,
                      "missing": None, "grid": [1, 2.5, "x"]}


def test_parse_config_errors():
    with pytest.raises(ValueError, match="line 2"):
        parse_config_text("a = 1\nbroken line\n")
    with pytest.raises(ValueError, match="empty key"):
        parse_config_text(" = 3\n")


@settings(deadline=None, max_examples=60)
@given(st.dictionaries(
    keys=st.text(alphabet="abcdefghij", min_size=1, max_size=8),
    values=st.one_of(
        st.booleans(),
        st.integers(-10 ** 9, 10 ** 9),
        st.floats(allow_nan=False, allow_infinity=False),
        st.text(alphabet="abcdefgh", min_size=1, max_size=10)),
    max_size=6))
def test_config_roundtrip(values):
    assert parse_config_text(format_config(values)) == values


def test_config_file_io(tmp_path):
    path = tmp_path / "run.cfg"
    write_config(path, {"n": 10, "q": 0.5})
    assert read_config(path) == {"n": 10, "q": 0.5}


# ---------------------------------------------------------------------------
# containers and CSV

def test_experiment_config_from_dict():
    cfg = ExperimentConfig.from_dict(
        {"kind": "detect", "trials": 5, "n": 10, "test": "sum"})
    assert cfg.trials == 5
    assert cfg.params == {"n": 10, "test": "sum"}
    with pytest.raises(ValueError, match="unknown experiment kind"):
        ExperimentConfig.from_dict({"kind": "frobnicate"})
    with pytest.raises(ValueError, match="one trial"):
        ExperimentConfig(kind="detect", trials=0)
    with pytest.raises(ValueError, match="significance"):
        ExperimentConfig(kind="detect", significance=1.5)
    with pytest.raises(ValueError, match="threads"):
        ExperimentConfig(kind="detect", threads=0)


def test_power_curve_invariants():
    PowerCurve(trials=10, type_i=0.1, type_ii=0.2, power=0.8,
               ci_type_i=0.0, ci_type_ii=0.0, alpha_hat=1.0, beta_hat=0.5)
    with pytest.raises(ValueError, match="power"):
        PowerCurve(trials=10, type_i=0.1, type_ii=0.2, power=0.9,
                   ci_type_i=0.0, ci_type_ii=0.0, alpha_hat=1.0, beta_hat=0.5)
    with pytest.raises(ValueError, match="out of range"):
        PowerCurve(trials=10, type_i=-0.5, type_ii=0.2, power=0.8,
                   ci_type_i=0.0, ci_type_ii=0.0, alpha_hat=1.0, beta_hat=0.5)


def test_row_schema():
    row = _row(experiment="x", trial=3, statistic=0.1)
    assert set(row) == set(CSV_COLUMNS)
    assert row["runtime_ms"] == 0 and row["n"] is None
    with pytest.raises(KeyError):
        _row(bogus=1)


def test_rows_to_csv_text_formatting():
    rows = [_row(experiment="e", n=3, p=0.25, q=1e-07, decision=True,
                 trial=0, statistic=2, density=None)]
    text = rows_to_csv_text(rows)
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert lines[1] == "e,3,,0.25,1e-07,,,,,0,2,,1,,0"
    assert text.endswith("\n")


def test_recompute_errors_from_rows():
    rows = [
        {"experiment": "detect-sum-h0", "decision": 0},
        {"experiment": "detect-sum-h0", "decision": 1},
        {"experiment": "detect-sum-h1", "decision": 1},
        {"experiment": "detect-sum-h1", "decision": 1},
    ]
    assert recompute_errors_from_rows(rows) == (0.5, 0.0)
    with pytest.raises(ValueError, match="paired"):
        recompute_errors_from_rows(rows[:2])


# ---------------------------------------------------------------------------
# detection experiments

def test_detection_constant0():
    cfg = ExperimentConfig(kind="detect", trials=30, seed=4,
                           params=dict(n=20, k=5, p=0.5, q=0.5, test="constant0"))
    curve = run_detection_experiment(cfg)
    assert curve.type_i == 0.0 and curve.type_ii == 1.0 and curve.power == 0.0
    assert len(curve.rows) == 60
    assert all(r["decision"] == 0 for r in curve.rows)
    # p = q carries no per-pair signal, so the measured alpha is infinite
    assert curve.alpha_hat == inf


def test_detection_sum_easy_point(tmp_path):
    out = tmp_path / "detect.csv"
    cfg = ExperimentConfig(kind="detect", trials=40, seed=11, out=str(out),
                           params=dict(n=60, k=30, p=0.9, q=0.2))
    curve = run_detection_experiment(cfg)
    assert curve.type_i == 0.0 and curve.power == 1.0
    assert out.read_text() == rows_to_csv_text(list(curve.rows))
    # p = 0.9 is interior, so alpha comes from the plain KL
    assert curve.alpha_hat == pytest.approx(
        -log(0.9 * log(4.5) + 0.1 * log(0.1 / 0.8)) / log(60))


def test_detection_boundary_alpha():
    cfg = ExperimentConfig(kind="detect", trials=5, seed=1,
                           params=dict(n=40, k=10, p=1.0, q=0.05))
    curve = run_detection_experiment(cfg)
    assert curve.alpha_hat == pytest.approx(-log(log(20.0)) / log(40))


def test_detection_dsm_needs_star_pair():
    cfg = ExperimentConfig(kind="detect", trials=5,
                           params=dict(n=20, k=5, p=0.8, q=0.4, test="dsm"))
    with pytest.raises(ValueError, match="mean-corrected"):
        run_detection_experiment(cfg)
    bad = ExperimentConfig(kind="detect", trials=5,
                           params=dict(n=20, k=5, p=0.8, q=0.4, model="x"))
    with pytest.raises(ValueError, match="unknown model"):
        run_detection_experiment(bad)


def test_detection_dsm_smoke():
    cfg = ExperimentConfig(kind="detect", trials=30, seed=7,
                           params=dict(n=100, k=60, p=0.7, q=0.3,
                                       model="pds_star", test="dsm"))
    curve = run_detection_experiment(cfg)
    assert 0.0 <= curve.type_i <= 1.0
    assert curve.rows[0]["p0"] is not None


def test_detection_threads_byte_identical():
    params = dict(n=30, k=10, p=0.9, q=0.3)
    texts = []
    for threads in (1, 4):
        cfg = ExperimentConfig(kind="detect", trials=20, seed=21,
                               threads=threads, params=params)
        texts.append(rows_to_csv_text(list(run_detection_experiment(cfg).rows)))
    assert texts[0] == texts[1]


# ---------------------------------------------------------------------------
# recovery experiments

def test_recovery_topk_easy_point():
    cfg = ExperimentConfig(kind="recover", trials=30, seed=5,
                           params=dict(n=40, k=10, p=1.0, q=0.05))
    curve = run_recovery_experiment(cfg)
    assert curve.power >= 0.9
    assert curve.type_i == 0.0
    assert curve.rows[0]["experiment"] == "recover-topk"


def test_recovery_amplify_smoke():
    cfg = ExperimentConfig(kind="recover", trials=15, seed=6,
                           params=dict(n=40, k=8, p=1.0, q=0.3,
                                       method="amplify", r_clones=41))
    curve = run_recovery_experiment(cfg)
    assert curve.power >= 0.8
    assert curve.rows[0]["r"] == 41


def test_recovery_amplify_default_clone_count():
    cfg = ExperimentConfig(kind="recover", trials=2, seed=6,
                           params=dict(n=30, k=8, p=1.0, q=0.3, method="amplify"))
    curve = run_recovery_experiment(cfg)
    assert curve.rows[0]["r"] == int(np.ceil(log(8) ** 2.1))


def test_recovery_unknown_method():
    cfg = ExperimentConfig(kind="recover", trials=2,
                           params=dict(n=20, k=4, p=1.0, q=0.3, method="x"))
    with pytest.raises(ValueError, match="unknown recovery method"):
        run_recovery_experiment(cfg)


# ---------------------------------------------------------------------------
# summary statistics and fidelity

def test_graph_summary_stats_frozen():
    tri = _graph(3, [(0, 1), (1, 2), (0, 2)])
    assert graph_summary_stats(tri).tolist() == [3.0, 0.0, 1.0, 2.0, 0.0]
    c4 = _graph(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
    assert graph_summary_stats(c4).tolist() == [4.0, 0.0, 0.0, 2.0, 1.0]
    k4 = _graph(4, [(u, v) for u in range(4) for v in range(u + 1, 4)])
    assert graph_summary_stats(k4).tolist() == [6.0, 0.0, 4.0, 3.0, 3.0]


def test_binned_tv():
    a = np.arange(100.0)
    assert _binned_tv(a, a.copy()) == 0.0
    assert _binned_tv(np.zeros(50), np.zeros(50) + 10.0) == 1.0
    assert _binned_tv(np.ones(5), np.ones(5)) == 0.0  # degenerate range


def test_fidelity_identity_passes():
    cfg = ExperimentConfig(kind="reduce-fidelity", trials=150, seed=9,
                           params=dict(mode="identity", n=60))
    report = pushforward_fidelity(cfg)
    assert isinstance(report, FidelityReport)
    assert report.passed and report.mode == "identity"
    assert report.stat_names == STAT_NAMES
    assert report.bonferroni == pytest.approx(0.01)
    assert report.edge_tv_threshold == pytest.approx(max(0.03, 2.5 / sqrt(150)))
    assert len(report.rows) == 300


def test_fidelity_threshold_override_and_guards():
    cfg = ExperimentConfig(kind="reduce-fidelity", trials=40, seed=9,
                           params=dict(mode="identity", n=30,
                                       edge_tv_threshold=0.9))
    assert pushforward_fidelity(cfg).edge_tv_threshold == 0.9
    with pytest.raises(ValueError, match="insufficient trials"):
        pushforward_fidelity(ExperimentConfig(
            kind="reduce-fidelity", trials=10, significance=0.01,
            params=dict(mode="identity", n=30)))
    with pytest.raises(ValueError, match="unknown fidelity mode"):
        pushforward_fidelity(ExperimentConfig(
            kind="reduce-fidelity", trials=40, params=dict(mode="x")))


def test_fidelity_false_positive_rate():
    """Identity-mode batteries compare a distribution against itself, so
    failures are pure false alarms; the Bonferroni + TV design keeps the
    per-battery rate near the nominal 5 percent."""
    failures = 0
    for rep in range(25):
        cfg = ExperimentConfig(kind="reduce-fidelity", trials=60,
                               seed=1000 + rep,
                               params=dict(mode="identity", n=40))
        failures += int(not pushforward_fidelity(cfg).passed)
    assert failures <= 5


def test_fidelity_pds_star_null():
    cfg = ExperimentConfig(kind="reduce-fidelity", trials=120, seed=31,
                           threads=4, params=dict(mode="pds_star", **SMALL_POINT))
    report = pushforward_fidelity(cfg)
    assert report.passed
    assert report.runs == 120


def test_fidelity_corruption_is_caught():
    """Dropping the whitening shrinks the output variance; the degree
    variance statistic is the designed tripwire."""
    cfg = ExperimentConfig(kind="reduce-fidelity", trials=120, seed=31,
                           threads=4,
                           params=dict(mode="pds_star_corrupt", **SMALL_POINT))
    report = pushforward_fidelity(cfg)
    assert not report.passed
    assert report.rejected[STAT_NAMES.index("degree_variance")]


def test_fidelity_isbm_null():
    cfg = ExperimentConfig(kind="reduce-fidelity", trials=100, seed=33,
                           threads=4, params=dict(mode="isbm", **SMALL_POINT))
    assert pushforward_fidelity(cfg).passed


def test_fidelity_threads_byte_identical():
    texts = []
    for threads in (1, 4):
        cfg = ExperimentConfig(kind="reduce-fidelity", trials=40, seed=35,
                               threads=threads,
                               params=dict(mode="pds_star", **SMALL_POINT))
        texts.append(rows_to_csv_text(list(pushforward_fidelity(cfg).rows)))
    assert texts[0] == texts[1]


def test_planted_support_report():
    cfg = ExperimentConfig(kind="reduce-fidelity", trials=60, seed=37,
                           threads=4, params=dict(**SMALL_POINT))
    report = planted_support_report(cfg)
    assert report.expected_size == 26
    assert report.sizes_ok and report.p1_ok and report.p2_ok and report.passed
    assert all(r["decision"] == 1 for r in report.rows)


# ---------------------------------------------------------------------------
# refutation gap

def test_refutation_strong_signal():
    cfg = ExperimentConfig(kind="refute", trials=12, seed=41,
                           params=dict(n=36, k=9, gamma=4.0))
    report = refutation_gap_experiment(cfg)
    assert report.k_chi2 > 5.0
    assert report.paired_rate >= 0.8
    assert len(report.rows) == 24
    assert {r["experiment"] for r in report.rows} == {"refute-null", "refute-isbm"}


def test_refutation_weak_signal():
    cfg = ExperimentConfig(kind="refute", trials=8, seed=43,
                           params=dict(n=36, k=9, gamma=0.236))
    report = refutation_gap_experiment(cfg)
    assert report.k_chi2 < 0.15


def test_refutation_zero_signal_is_null():
    """gamma = 0 collapses both sides to the same law; the valuation is
    discrete so ties are common and the paired rate is small but symmetric."""
    cfg = ExperimentConfig(kind="refute", trials=20, seed=45,
                           params=dict(n=20, k=5, gamma=0.0))
    report = refutation_gap_experiment(cfg)
    assert report.ks_pvalue > 0.01
    assert report.k_chi2 == 0.0
    v0 = np.array([r["statistic"] for r in report.rows
                   if r["experiment"] == "refute-null"])
    v1 = np.array([r["statistic"] for r in report.rows
                   if r["experiment"] == "refute-isbm"])
    assert report.paired_rate == pytest.approx(float(np.mean(v1 > v0)))
    assert abs(float(np.mean(v1 > v0)) - float(np.mean(v0 > v1))) <= 0.3


def test_refutation_threshold_default_and_guard():
    cfg = ExperimentConfig(kind="refute", trials=2, seed=47,
                           params=dict(n=20, k=5, gamma=1.0))
    report = refutation_gap_experiment(cfg)
    assert report.rows[0]["threshold"] == pytest.approx(report.threshold)
    bad = ExperimentConfig(kind="refute", trials=2,
                           params=dict(n=36, k=7, gamma=1.0))
    with pytest.raises(ValueError, match="divide"):
        refutation_gap_experiment(bad)


# ---------------------------------------------------------------------------
# phase sweep

def test_phase_sweep_tiny_grid():
    cfg = ExperimentConfig(kind="sweep", trials=6, seed=51,
                           params=dict(n=16, q=0.3, alpha_grid=[0.3],
                                       beta_grid=[0.5, 0.75], dks_budget=5e3))
    summaries, rows = phase_sweep(cfg)
    assert len(summaries) == 2
    for point in summaries:
        assert "error" not in point
        assert 0.0 <= point["rate_sum"] <= 1.0
        assert 0.0 <= point["rate_recover"] <= 1.0
    # comb(16, 4) fits the valuation budget, comb(16, 8) does not
    assert summaries[0]["refutable"] is True
    assert summaries[1]["refutable"] is False
    assert summaries[1]["rate_refute"] is None
    assert all(rows[i]["trial"] <= rows[i + 1]["trial"]
               for i in range(len(rows) - 1))


def test_phase_sweep_infeasible_kl_is_capped():
    cfg = ExperimentConfig(kind="sweep", trials=2, seed=53,
                           params=dict(n=16, q=0.3, alpha_grid=[-5.0],
                                       beta_grid=[0.5], dks_budget=1.0))
    summaries, _ = phase_sweep(cfg)
    assert summaries[0]["kl_feasible"] is False
    assert summaries[0]["p"] < 1.0


# ---------------------------------------------------------------------------
# serialization

def test_edge_list_roundtrip(tmp_path):
    g = sample_pds(PdsParams(n=15, k=4, p=1.0, q=0.3), np.random.default_rng(3))
    path = tmp_path / "g.txt"
    write_edge_list(g, path)
    h = read_edge_list(path)
    assert h.n == g.n
    assert np.array_equal(h.adj, g.adj)
    assert np.array_equal(h.planted, g.planted)
    bare = _graph(5, [(0, 4)])
    write_edge_list(bare, path)
    assert read_edge_list(path).planted is None


def test_dense_csv_roundtrip(tmp_path):
    g = _graph(6, [(0, 1), (2, 5)])
    path = tmp_path / "g.csv"
    write_dense_csv(g, path)
    assert np.array_equal(read_dense_csv(path).adj, g.adj)


# ---------------------------------------------------------------------------
# command line

def test_cli_generate_models(tmp_path, capsys):
    out = tmp_path / "er.txt"
    assert main(["generate", "--model", "er", "--n", "30", "--seed", "3",
                 "--out", str(out)]) == 0
    assert "er n=30" in capsys.readouterr().out
    assert read_edge_list(out).n == 30

    out = tmp_path / "pds.txt"
    assert main(["generate", "--model", "pds", "--n", "20", "--k", "6",
                 "--p", "0.9", "--q", "0.2", "--out", str(out)]) == 0
    assert read_edge_list(out).planted.size == 6

    assert main(["generate", "--model", "kpc", "--N", "12", "--k0", "3",
                 "--p", "1.0", "--q", "0.4"]) == 0
    assert main(["generate", "--model", "isbm", "--n", "20", "--r", "4",
                 "--gamma", "0.3"]) == 0
    capsys.readouterr()

    out = tmp_path / "bc.csv"
    assert main(["generate", "--model", "biclustering", "--n", "25", "--k", "5",
                 "--mu", "1.5", "--out", str(out)]) == 0
    assert np.loadtxt(out, delimiter=",").shape == (25, 25)

    out = tmp_path / "bspca.csv"
    assert main(["generate", "--model", "bspca", "--n", "30", "--d", "12",
                 "--k", "6", "--theta", "2.0", "--delta", "0.2",
                 "--out", str(out)]) == 0
    assert np.loadtxt(out, delimiter=",").shape == (30, 12)
    capsys.readouterr()


def test_cli_generate_missing_param(capsys):
    assert main(["generate", "--model", "er"]) == 1
    assert "error:" in capsys.readouterr().err


def test_cli_reduce_pds_star_with_manifest(tmp_path, capsys):
    out = tmp_path / "reduced.txt"
    argv = ["reduce", "--pipeline", "pds_star", "--N", "20", "--k0", "2",
            "--p", "1.0", "--q", "0.5", "--r", "2", "--seed", "5",
            "--out", str(out)]
    assert main(argv) == 0
    assert "support=26" in capsys.readouterr().out
    g = read_edge_list(out)
    assert g.n == 52 and g.planted.size == 26
    manifest = read_config(str(out) + ".manifest")
    assert manifest["n"] == 52
    assert manifest["stages"] == ["embed", "design", "rotate", "threshold",
                                  "permute"]
    assert isinstance(manifest["total_eps"], float)


def test_cli_reduce_isbm_h0(capsys):
    assert main(["reduce", "--pipeline", "isbm", "--N", "20", "--k0", "2",
                 "--p", "1.0", "--q", "0.5", "--r", "2",
                 "--hypothesis", "h0"]) == 0
    assert "support=none" in capsys.readouterr().out


def test_cli_reduce_bc_chain(tmp_path, capsys):
    src = tmp_path / "src.txt"
    assert main(["generate", "--model", "pds", "--n", "40", "--k", "8",
                 "--p", "0.75", "--q", "0.5", "--seed", "2",
                 "--out", str(src)]) == 0
    out = tmp_path / "bc.csv"
    assert main(["reduce", "--pipeline", "bc", "--in", str(src),
                 "--rho", "0.25", "--out", str(out)]) == 0
    assert "cols=8" in capsys.readouterr().out
    assert np.loadtxt(out, delimiter=",").shape == (40, 40)


def test_cli_reduce_bspca_and_lift(tmp_path, capsys):
    out = tmp_path / "spca.csv"
    assert main(["reduce", "--pipeline", "bspca", "--n", "30", "--k", "8",
                 "--tau", "2", "--out", str(out)]) == 0
    assert np.loadtxt(out, delimiter=",").shape == (30, 30)
    assert main(["reduce", "--pipeline", "lift", "--n", "30", "--k", "5",
                 "--p", "1.0", "--q", "0.3", "--t", "2"]) == 0
    assert "lift n=35" in capsys.readouterr().out


def test_cli_test_exit_codes(capsys):
    argv = ["test", "--n", "40", "--k", "20", "--p", "0.9", "--q", "0.2",
            "--trials", "25", "--seed", "1", "--max-error", "0.5"]
    assert main(argv) == 0
    assert main(["test", "--test", "constant0", "--n", "20", "--k", "5",
                 "--p", "0.6", "--q", "0.4", "--trials", "10",
                 "--max-error", "0.5"]) == 2
    capsys.readouterr()


def test_cli_recover_exit_codes(capsys):
    argv = ["recover", "--n", "40", "--k", "10", "--p", "1.0", "--q", "0.05",
            "--trials", "10", "--seed", "5"]
    assert main(argv) == 0
    assert main(argv + ["--min-rate", "1.1"]) == 2
    capsys.readouterr()


def test_cli_refute(capsys):
    argv = ["refute", "--n", "36", "--k", "9", "--gamma", "4.0",
            "--trials", "3", "--seed", "7", "--min-paired-rate", "0.8"]
    assert main(argv) == 0
    assert "paired_rate=" in capsys.readouterr().out


def test_cli_sweep(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    argv = ["sweep", "--n", "16", "--q", "0.3", "--alpha-grid", "0.3",
            "--beta-grid", "0.5", "--trials", "4", "--dks-budget", "2000",
            "--out", str(out)]
    assert main(argv) == 0
    assert "alpha=0.30" in capsys.readouterr().out
    assert out.exists()
    manifest = read_config(str(out) + ".manifest")
    assert manifest["points"] == 1 and manifest["failed"] == 0


def test_cli_fidelity_exit_codes(capsys):
    assert main(["fidelity", "--mode", "identity", "--n", "40",
                 "--trials", "100", "--seed", "2"]) == 0
    assert "passed=True" in capsys.readouterr().out
    argv = ["fidelity", "--mode", "pds_star_corrupt", "--N", "20", "--k0", "2",
            "--p", "1.0", "--q", "0.5", "--r", "2", "--trials", "100",
            "--seed", "3", "--threads", "4"]
    assert main(argv) == 2
    capsys.readouterr()


def test_cli_fidelity_planted(capsys):
    argv = ["fidelity", "--mode", "planted", "--N", "20", "--k0", "2",
            "--p", "1.0", "--q", "0.5", "--r", "2", "--trials", "30",
            "--seed", "4", "--threads", "4"]
    assert main(argv) == 0
    assert "support_sizes_ok=True" in capsys.readouterr().out


def test_cli_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "gen.cfg"
    write_config(cfg, {"n": 30, "density": 0.5, "seed": 1})
    # config fills the size when no flag is given
    assert main(["generate", "--model", "er", "--config", str(cfg)]) == 0
    assert "er n=30" in capsys.readouterr().out
    # an explicit flag beats the config value
    assert main(["generate", "--model", "er", "--config", str(cfg),
                 "--n", "10"]) == 0
    assert "er n=10" in capsys.readouterr().out
