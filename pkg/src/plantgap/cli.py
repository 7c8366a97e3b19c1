"""Command line front end.

Subcommands: generate, reduce, test, recover, refute, sweep, fidelity.
Exit codes: 0 on pass, 2 on statistical failure, 1 on error. Values given in
a --config file (flat "key = value" lines) fill in any flag left unset.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .config import read_config, write_manifest
from .harness import (ExperimentConfig, phase_sweep, planted_support_report,
                      pushforward_fidelity, refutation_gap_experiment,
                      run_detection_experiment, run_recovery_experiment)
from .models import (BcParams, BspcaParams, IsbmParams, KpcParams, PdsParams,
                     isbm_params_from_gamma, sample_biclustering,
                     sample_bspca, sample_erdos_renyi, sample_isbm,
                     sample_kpc, sample_pds)
from .reductions import (bc_recovery_map, derive_pds_star_params,
                         lift_pc_nonhomogeneous, random_rotation_to_bspca,
                         reduce_kpc_to_isbm, reduce_kpc_to_pds_star)
from .serialize import read_edge_list, write_edge_list


def _add_common(sub):
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--trials", type=int, default=None)
    sub.add_argument("--out", default=None)
    sub.add_argument("--config", default=None)
    sub.add_argument("--threads", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plantgap")
    subs = parser.add_subparsers(dest="command", required=True)

    g = subs.add_parser("generate", help="sample one model instance")
    g.add_argument("--model", required=True,
                   choices=["er", "pds", "kpc", "isbm", "biclustering", "bspca"])
    for flag, typ in (("--n", int), ("--k", int), ("--p", float), ("--q", float),
                      ("--N", int), ("--k0", int), ("--r", int),
                      ("--gamma", float), ("--density", float), ("--mu", float),
                      ("--d", int), ("--theta", float), ("--delta", float)):
        g.add_argument(flag, type=typ, default=None)
    _add_common(g)

    r = subs.add_parser("reduce", help="run a reduction pipeline")
    r.add_argument("--pipeline", required=True,
                   choices=["pds_star", "isbm", "bc", "bspca", "lift"])
    r.add_argument("--hypothesis", choices=["h0", "h1"], default="h1")
    r.add_argument("--in", dest="infile", default=None)
    for flag, typ in (("--N", int), ("--k0", int), ("--p", float), ("--q", float),
                      ("--r", int), ("--n", int), ("--k", int),
                      ("--rho", float), ("--tau", int), ("--t", int)):
        r.add_argument(flag, type=typ, default=None)
    _add_common(r)

    t = subs.add_parser("test", help="paired detection experiment")
    t.add_argument("--model", choices=["pds", "pds_star"], default=None)
    t.add_argument("--test", dest="test_name", default=None,
                   choices=["sum", "dsm", "oracle_topk", "constant0"])
    for flag, typ in (("--n", int), ("--k", int), ("--p", float), ("--q", float),
                      ("--max-error", float)):
        t.add_argument(flag, type=typ, default=None)
    _add_common(t)

    rec = subs.add_parser("recover", help="support recovery experiment")
    rec.add_argument("--method", choices=["topk", "amplify"], default=None)
    for flag, typ in (("--n", int), ("--k", int), ("--p", float), ("--q", float),
                      ("--r-clones", int), ("--min-rate", float)):
        rec.add_argument(flag, type=typ, default=None)
    _add_common(rec)

    ref = subs.add_parser("refute", help="valuation-gap experiment")
    for flag, typ in (("--n", int), ("--k", int), ("--gamma", float),
                      ("--threshold", float), ("--min-paired-rate", float),
                      ("--dks-budget", float)):
        ref.add_argument(flag, type=typ, default=None)
    _add_common(ref)

    sw = subs.add_parser("sweep", help="phase-diagram grid sweep")
    sw.add_argument("--alpha-grid", default=None)
    sw.add_argument("--beta-grid", default=None)
    for flag, typ in (("--n", int), ("--q", float), ("--dks-budget", float)):
        sw.add_argument(flag, type=typ, default=None)
    _add_common(sw)

    f = subs.add_parser("fidelity", help="pushforward fidelity battery")
    f.add_argument("--mode", default=None,
                   choices=["identity", "pds_star", "pds_star_corrupt",
                            "isbm", "planted"])
    for flag, typ in (("--N", int), ("--k0", int), ("--p", float), ("--q", float),
                      ("--r", int), ("--n", int), ("--density", float),
                      ("--significance", float), ("--edge-tv-threshold", float)):
        f.add_argument(flag, type=typ, default=None)
    _add_common(f)

    return parser


def _merge(args: argparse.Namespace, defaults: dict) -> dict:
    """Flag > config file > built-in default."""
    merged = dict(defaults)
    if getattr(args, "config", None):
        merged.update(read_config(args.config))
    for key, val in vars(args).items():
        if key in ("command", "config") or val is None:
            continue
        merged[key] = val
    return merged


def _experiment_config(kind: str, merged: dict, param_keys) -> ExperimentConfig:
    params = {k: merged[k] for k in param_keys if merged.get(k) is not None}
    return ExperimentConfig(
        kind=kind, params=params, trials=int(merged["trials"]),
        seed=int(merged["seed"]), significance=float(merged["significance"]),
        out=merged.get("out"), threads=int(merged["threads"]))


def _manifest(path, merged: dict, extra: dict):
    payload = {k: v for k, v in merged.items() if v is not None}
    payload.update(extra)
    write_manifest(str(path) + ".manifest", payload)


_BASE = dict(seed=0, trials=100, threads=1, significance=0.05, out=None)


def _cmd_generate(args) -> int:
    merged = _merge(args, {**_BASE, "density": 0.5})
    rng = np.random.default_rng(int(merged["seed"]))
    model = merged["model"]
    if model == "er":
        g = sample_erdos_renyi(merged["n"], merged["density"], rng)
    elif model == "pds":
        g = sample_pds(PdsParams(n=merged["n"], k=merged["k"],
                                 p=merged["p"], q=merged["q"]), rng)
    elif model == "kpc":
        g = sample_kpc(KpcParams(N=merged["N"], k0=merged["k0"],
                                 p=merged["p"], q=merged["q"]), rng)
    elif model == "isbm":
        params = isbm_params_from_gamma(merged["n"], merged["r"], merged["gamma"])
        g = sample_isbm(params, rng)
    elif model == "biclustering":
        M, rows, cols = sample_biclustering(
            BcParams(n=merged["n"], k=merged["k"], mu=merged["mu"]), rng)
        if merged.get("out"):
            np.savetxt(merged["out"], M, delimiter=",")
        print(f"biclustering n={merged['n']} k={merged['k']} "
              f"rows={rows.tolist()} cols={cols.tolist()}")
        return 0
    elif model == "bspca":
        x, v = sample_bspca(BspcaParams(n=merged["n"], d=merged["d"],
                                        k=merged["k"], theta=merged["theta"],
                                        delta=merged["delta"]), rng)
        if merged.get("out"):
            np.savetxt(merged["out"], x, delimiter=",")
        print(f"bspca n={merged['n']} d={merged['d']} support={np.flatnonzero(v).tolist()}")
        return 0
    else:
        raise ValueError(model)
    if merged.get("out"):
        write_edge_list(g, merged["out"])
    planted = "none" if g.planted is None else len(g.planted)
    print(f"{model} n={g.n} edges={g.edge_count()} planted={planted}")
    return 0


def _load_or_sample_pds(merged, rng):
    if merged.get("infile"):
        return read_edge_list(merged["infile"])
    return sample_pds(PdsParams(n=merged["n"], k=merged["k"],
                                p=merged["p"], q=merged["q"]), rng)


def _cmd_reduce(args) -> int:
    merged = _merge(args, _BASE)
    rng = np.random.default_rng(int(merged["seed"]))
    pipeline = merged["pipeline"]
    out = merged.get("out")
    if pipeline in ("pds_star", "isbm"):
        rp = derive_pds_star_params(merged["N"], merged["k0"], merged["p"],
                                    merged["q"], merged["r"])
        if merged.get("infile"):
            src = read_edge_list(merged["infile"])
        elif merged["hypothesis"] == "h1":
            src = sample_kpc(KpcParams(N=rp.N, k0=rp.k0, p=rp.p, q=rp.q), rng)
        else:
            src = sample_erdos_renyi(rp.N, rp.q, rng)
        reducer = reduce_kpc_to_pds_star if pipeline == "pds_star" else reduce_kpc_to_isbm
        g, trace = reducer(src, rp, rng)
        if out:
            write_edge_list(g, out)
            _manifest(out, merged, {
                "n": rp.n, "k": rp.k, "gamma": rp.gamma, "mu": rp.mu,
                "total_eps": trace.total_eps,
                "stages": [s.name for s in trace.stages]})
        support = "none" if g.planted is None else len(g.planted)
        print(f"{pipeline} n={g.n} edges={g.edge_count()} support={support} "
              f"total_eps={trace.total_eps:.3g}")
        return 0
    if pipeline == "bc":
        src = _load_or_sample_pds(merged, rng)
        image = bc_recovery_map(src, merged["rho"], rng)
        if out:
            np.savetxt(out, image.matrix, delimiter=",")
        kk = "none" if image.col_support is None else len(image.col_support)
        print(f"bc n={src.n} rho={merged['rho']} cols={kk}")
        return 0
    if pipeline == "bspca":
        if merged.get("infile"):
            M = np.loadtxt(merged["infile"], delimiter=",")
        else:
            M, _, _ = sample_biclustering(
                BcParams(n=merged["n"], k=merged["k"], mu=merged.get("p", 1.0)), rng)
        samples = random_rotation_to_bspca(M, merged["tau"], rng)
        if out:
            np.savetxt(out, samples, delimiter=",")
        print(f"bspca samples={samples.shape[0]} dim={samples.shape[1]}")
        return 0
    if pipeline == "lift":
        src = _load_or_sample_pds(merged, rng)
        g = lift_pc_nonhomogeneous(src, merged["k"], merged["t"], rng)
        if out:
            write_edge_list(g, out)
        print(f"lift n={g.n} edges={g.edge_count()}")
        return 0
    raise ValueError(pipeline)


def _cmd_test(args) -> int:
    merged = _merge(args, {**_BASE, "model": "pds", "test_name": "sum"})
    merged["test"] = merged.pop("test_name")
    cfg = _experiment_config("detect", merged, ("model", "test", "n", "k", "p", "q"))
    curve = run_detection_experiment(cfg)
    print(f"type_i={curve.type_i:.4f} type_ii={curve.type_ii:.4f} "
          f"power={curve.power:.4f} alpha_hat={curve.alpha_hat:.3f} "
          f"beta_hat={curve.beta_hat:.3f}")
    if cfg.out:
        _manifest(cfg.out, merged, {"type_i": curve.type_i,
                                    "type_ii": curve.type_ii})
    limit = merged.get("max_error")
    if limit is not None and curve.type_i + curve.type_ii > limit:
        return 2
    return 0


def _cmd_recover(args) -> int:
    merged = _merge(args, {**_BASE, "method": "topk"})
    cfg = _experiment_config("recover", merged,
                             ("method", "n", "k", "p", "q", "r_clones"))
    curve = run_recovery_experiment(cfg)
    print(f"method={merged['method']} exact_rate={curve.power:.4f} "
          f"ci={curve.ci_type_ii:.4f}")
    if cfg.out:
        _manifest(cfg.out, merged, {"exact_rate": curve.power})
    floor = merged.get("min_rate")
    if floor is not None and curve.power < floor:
        return 2
    return 0


def _cmd_refute(args) -> int:
    merged = _merge(args, {**_BASE, "trials": 200})
    cfg = _experiment_config("refute", merged,
                             ("n", "k", "gamma", "threshold", "dks_budget"))
    report = refutation_gap_experiment(cfg)
    print(f"paired_rate={report.paired_rate:.4f} strong_rate={report.strong_rate:.4f} "
          f"null_below_rate={report.null_below_rate:.4f} "
          f"k_chi2={report.k_chi2:.3f} ks_pvalue={report.ks_pvalue:.3g}")
    if cfg.out:
        _manifest(cfg.out, merged, {"paired_rate": report.paired_rate})
    floor = merged.get("min_paired_rate")
    if floor is not None and report.paired_rate < floor:
        return 2
    return 0


def _parse_grid(raw):
    if raw is None:
        return None
    if isinstance(raw, (list, tuple)):
        return [float(v) for v in raw]
    return [float(part) for part in str(raw).split(",") if part.strip()]


def _cmd_sweep(args) -> int:
    merged = _merge(args, {**_BASE, "trials": 25})
    for key in ("alpha_grid", "beta_grid"):
        grid = _parse_grid(merged.get(key))
        if grid is not None:
            merged[key] = grid
    cfg = _experiment_config("sweep", merged,
                             ("n", "q", "alpha_grid", "beta_grid", "dks_budget"))
    summaries, _ = phase_sweep(cfg)
    failed = 0
    for point in summaries:
        if "error" in point:
            failed += 1
            print(f"alpha={point['alpha_hat']:.2f} beta={point['beta_hat']:.2f} "
                  f"error={point['error']}")
            continue
        rates = " ".join(
            f"{task}={point['rate_' + task]:.2f}" if point.get("rate_" + task) is not None
            else f"{task}=NA" for task in ("sum", "dsm", "recover", "refute"))
        print(f"alpha={point['alpha_hat']:.2f} beta={point['beta_hat']:.2f} "
              f"k={point['k']} p={point['p']:.4f} {rates}")
    if cfg.out:
        _manifest(cfg.out, merged, {"points": len(summaries), "failed": failed})
    return 0


def _cmd_fidelity(args) -> int:
    merged = _merge(args, {**_BASE, "mode": "pds_star", "trials": 200,
                           "significance": 0.01})
    mode = merged["mode"]
    keys = ("mode", "N", "k0", "p", "q", "r", "n", "density",
            "edge_tv_threshold")
    cfg = _experiment_config("reduce-fidelity", merged, keys)
    if mode == "planted":
        report = planted_support_report(cfg)
        print(f"support_sizes_ok={report.sizes_ok} "
              f"p1_hat={report.p1_hat:.6f} target={report.p1_target:.6f} "
              f"(3sigma={3 * report.p1_sigma:.2e}) "
              f"p2_hat={report.p2_hat:.6f} target={report.p2_target:.6f} "
              f"(3sigma={3 * report.p2_sigma:.2e})")
        ok = report.passed
    else:
        report = pushforward_fidelity(cfg)
        for name, pv, rej in zip(report.stat_names, report.pvalues,
                                 report.rejected):
            print(f"{name}: ks_p={pv:.4g} {'REJECT' if rej else 'ok'}")
        print(f"edge_tv={report.edge_tv:.4f} (threshold "
              f"{report.edge_tv_threshold:.4f}) passed={report.passed}")
        ok = report.passed
    if cfg.out:
        _manifest(cfg.out, merged, {"passed": ok})
    return 0 if ok else 2


_DISPATCH = {
    "generate": _cmd_generate,
    "reduce": _cmd_reduce,
    "test": _cmd_test,
    "recover": _cmd_recover,
    "refute": _cmd_refute,
    "sweep": _cmd_sweep,
    "fidelity": _cmd_fidelity,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _DISPATCH[args.command](args)
    except KeyError as exc:
        print(f"error: missing required parameter: {exc.args[0]}",
              file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
