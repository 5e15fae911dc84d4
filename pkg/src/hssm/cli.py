"""Command-line front end.

Subcommands: prior-dist, prior-moments, asymptotic, simulate-crf, fit,
predict, diagnose.  All take ``--config PATH`` plus optional ``--seed``,
``--out`` and ``--chains`` overrides.  Outputs are plain CSV/JSON written
deterministically: the same config and seed produce byte-identical files.
Exit codes: 0 ok, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import presets
from .asymptotics import PyFamilyKind, asym_marginal_moment
from .cluster_counts import (
    GroupSizes,
    HssmSpec,
    SPIKE_SLAB,
    marginal_cluster_pmf,
    spike_slab_adjust,
    total_cluster_pmf,
)
from .config import ConfigError, RunConfig, load_config
from .diagnostics import cluster_count_summary, cn_error, cn_star, coclustering, predictive_score
from .errors import NumericalError, ParamError, SizeError
from .franchise import empirical_cluster_pmf, simulate
from .gibbs import GibbsTrace, predictive_density, run_chain
from .logpmf import LogPmf
from .partitions import PITMAN_YOR


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _write_csv(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def _write_json(path: Path, obj):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _pmf_rows(p: LogPmf):
    for k, lp, pr in zip(p.support, p.log_mass, p.probs()):
        yield int(k), float(lp), float(pr)


def _require_sizes(cfg: RunConfig) -> GroupSizes:
    if cfg.sizes is None:
        raise ConfigError("missing required key [groups] sizes")
    return cfg.sizes


def _moments(cfg: RunConfig, g: GroupSizes) -> dict:
    marg = marginal_cluster_pmf(cfg.model, g.n[0])
    tot = total_cluster_pmf(cfg.model, g)
    out = {
        "group_sizes": list(g.n),
        "marginal_mean": marg.mean(),
        "marginal_variance": marg.variance(),
        "total_mean": tot.mean(),
        "total_variance": tot.variance(),
    }
    if cfg.model.base.kind == SPIKE_SLAB:
        a = cfg.model.base.a
        out["observed_marginal_mean"] = spike_slab_adjust(marg, a).mean()
        out["observed_total_mean"] = spike_slab_adjust(tot, a).mean()
    return out


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_prior_dist(cfg: RunConfig) -> int:
    g = _require_sizes(cfg)
    for i, n_i in enumerate(sorted(set(g.n)), start=0):
        p = marginal_cluster_pmf(cfg.model, n_i)
        _write_csv(cfg.out_dir / f"marginal_pmf_n{n_i}.csv",
                   ["k", "log_prob", "prob"], _pmf_rows(p))
    tot = total_cluster_pmf(cfg.model, g)
    _write_csv(cfg.out_dir / "total_pmf.csv", ["k", "log_prob", "prob"], _pmf_rows(tot))
    _write_json(cfg.out_dir / "moments.json", _moments(cfg, g))

    rows = []
    I = g.I
    for n_total in cfg.n_grid:
        n_i = max(n_total // I, 1)
        gg = GroupSizes(tuple([n_i] * I))
        marg = marginal_cluster_pmf(cfg.model, n_i)
        tt = total_cluster_pmf(cfg.model, gg)
        rows.append((gg.total, n_i, marg.mean(), marg.variance(), tt.mean(), tt.variance()))
    _write_csv(cfg.out_dir / "prior_curve.csv",
               ["n_total", "n_per_group", "marginal_mean", "marginal_variance",
                "total_mean", "total_variance"], rows)
    return 0


def cmd_prior_moments(cfg: RunConfig) -> int:
    g = _require_sizes(cfg)
    m = _moments(cfg, g)
    _write_json(cfg.out_dir / "moments.json", m)
    _write_csv(cfg.out_dir / "moments.csv", sorted(m), [[m[k] for k in sorted(m)]])
    return 0


def _asym_kind(model: HssmSpec) -> PyFamilyKind:
    top, bottom = model.top, model.bottom
    if top.family != PITMAN_YOR or bottom.family != PITMAN_YOR:
        raise ConfigError("asymptotic curves require Pitman-Yor or Dirichlet levels")
    s0, s1 = top.sigma, bottom.sigma
    if s0 > 0 and s1 > 0:
        return PyFamilyKind.hpyp(s0, top.theta, s1, bottom.theta)
    if s0 > 0:
        return PyFamilyKind.hpydp(s0, top.theta, bottom.theta)
    if s1 > 0:
        return PyFamilyKind.hdpyp(top.theta, s1, bottom.theta)
    return PyFamilyKind.hdp(top.theta, bottom.theta)


def cmd_asymptotic(cfg: RunConfig) -> int:
    kind = _asym_kind(cfg.model)
    n_max = cfg.asym_n_max
    from .partitions import block_count_log_matrix

    Qb = np.exp(block_count_log_matrix(cfg.model.bottom, n_max)[1:, 1:])
    Qt = np.exp(block_count_log_matrix(cfg.model.top, n_max)[1:, 1:])
    top_means = Qt @ np.arange(1, n_max + 1)
    rows = []
    for n in range(1, n_max + 1):
        exact = float(Qb[n - 1, :n] @ top_means[:n])
        asym = asym_marginal_moment(kind, n, 1.0) if n >= 3 else float("nan")
        rows.append((n, exact, asym))
    _write_csv(cfg.out_dir / "asymptotic.csv",
               ["n", "exact_marginal_mean", "asymptotic_marginal_mean"], rows)
    return 0


def cmd_simulate_crf(cfg: RunConfig) -> int:
    g = _require_sizes(cfg)
    rng = np.random.default_rng(cfg.seed)
    if cfg.reps == 1:
        state = simulate(cfg.model, g, rng)
        rows = []
        for i in range(1, g.I + 1):
            for j, c in enumerate(state.table_of_customer[i - 1], start=1):
                d = state.dish_of_table[i - 1][c - 1]
                rows.append((i, j, c, d, str(state.atoms[d - 1])))
        _write_csv(cfg.out_dir / "draws.csv",
                   ["restaurant", "customer", "table", "dish", "atom"], rows)
        _write_json(cfg.out_dir / "summary.json", {
            "dishes": state.n_dishes,
            "tables": state.total_tables,
            "distinct_values": state.distinct_atoms(),
        })
        return 0
    emp = empirical_cluster_pmf(cfg.model, g, cfg.reps, rng)
    for i in range(1, g.I + 1):
        _write_csv(cfg.out_dir / f"empirical_marginal_pmf_group{i}.csv",
                   ["k", "log_prob", "prob"], _pmf_rows(emp.per_group[i - 1]))
    _write_csv(cfg.out_dir / "empirical_total_pmf.csv",
               ["k", "log_prob", "prob"], _pmf_rows(emp.total))
    summary = {
        "reps": cfg.reps,
        "mean_total_clusters": emp.mean_total,
        "se_mean_total_clusters": emp.se_mean_total,
        "group_means": [emp.per_group[i].mean() for i in range(g.I)],
    }
    if cfg.model.base.kind == SPIKE_SLAB:
        summary["observed_group_means"] = [
            emp.per_group_observed[i].mean() for i in range(g.I)]
        _write_csv(cfg.out_dir / "empirical_total_observed_pmf.csv",
                   ["k", "log_prob", "prob"], _pmf_rows(emp.total_observed))
    _write_json(cfg.out_dir / "summary.json", summary)
    return 0


def _run_chains(cfg: RunConfig, data) -> list[GibbsTrace]:
    traces = []
    for chain in range(cfg.chains):
        traces.append(run_chain(
            data, cfg.model, cfg.hyper, cfg.sweeps, cfg.burn_in, cfg.thin,
            seed=cfg.seed + chain, init=cfg.init))
    return traces


def _write_trace(path: Path, trace: GibbsTrace):
    sweeps = trace.burn_in + trace.thin * (1 + np.arange(trace.n_snapshots))
    rows = []
    for m in range(trace.n_snapshots):
        rows.append((int(sweeps[m] - 1), int(trace.n_clusters[m]),
                     *[int(x) for x in trace.d_star[m]]))
    n = trace.d_star.shape[1]
    _write_csv(path, ["sweep", "n_clusters", *[f"d{j+1}" for j in range(n)]], rows)


def _fit_summary(traces: list[GibbsTrace]) -> dict:
    per_chain = []
    for t in traces:
        med, var, hist = cluster_count_summary(t)
        per_chain.append({"median_clusters": med, "variance_clusters": var,
                          "histogram": {str(k): v for k, v in hist.items()}})
    pooled = np.concatenate([t.n_clusters for t in traces]).astype(float)
    pooled_sorted = np.sort(pooled)
    return {
        "chains": per_chain,
        "pooled_median_clusters": float(pooled_sorted[(pooled.size - 1) // 2]),
        "pooled_variance_clusters": float(pooled.var()),
    }


def cmd_fit(cfg: RunConfig) -> int:
    data = cfg.dataset()
    traces = _run_chains(cfg, data)
    for idx, t in enumerate(traces):
        _write_trace(cfg.out_dir / f"trace_chain{idx}.csv", t)
    _write_json(cfg.out_dir / "summary.json", _fit_summary(traces))
    return 0


def cmd_predict(cfg: RunConfig) -> int:
    data = cfg.dataset()
    traces = _run_chains(cfg, data)
    for idx, t in enumerate(traces):
        _write_trace(cfg.out_dir / f"trace_chain{idx}.csv", t)
    grid = cfg.predict_grid
    for i in range(1, data.I + 1):
        dens = np.zeros(grid.size)
        for t in traces:
            dens += predictive_density(t, data, cfg.model, cfg.hyper, i, grid)
        dens /= len(traces)
        _write_csv(cfg.out_dir / f"predictive_group{i}.csv", ["y", "density"],
                   zip(grid, dens))
    _write_json(cfg.out_dir / "summary.json", _fit_summary(traces))
    return 0


def cmd_diagnose(cfg: RunConfig) -> int:
    if cfg.preset is None:
        raise ConfigError("diagnose needs [data] preset (synthetic truth is required)")
    grid = cfg.predict_grid
    metrics = {"cn": [], "cn_star": [], "score": [], "median_clusters": [],
               "variance_clusters": []}
    rows = []
    for r in range(cfg.runs):
        synth = presets.generate(cfg.preset, cfg.preset_seed + r)
        trace = run_chain(synth.data, cfg.model, cfg.hyper, cfg.sweeps,
                          cfg.burn_in, cfg.thin, seed=cfg.seed + r, init=cfg.init)
        P = coclustering(trace)
        cn = cn_error(P, synth.truth)
        cns = cn_star(P, synth.truth)
        pred = [predictive_density(trace, synth.data, cfg.model, cfg.hyper, i, grid)
                for i in range(1, synth.data.I + 1)]
        truth_dens = [synth.true_density(i, grid) for i in range(1, synth.data.I + 1)]
        sc = predictive_score(pred, truth_dens, grid)
        med, var, _ = cluster_count_summary(trace)
        for key, val in zip(("cn", "cn_star", "score", "median_clusters",
                             "variance_clusters"), (cn, cns, sc, med, var)):
            metrics[key].append(val)
        rows.append((r, cn, cns, sc, med, var))
    _write_csv(cfg.out_dir / "metrics.csv",
               ["run", "cn", "cn_star", "score", "median_clusters",
                "variance_clusters"], rows)
    agg = {}
    for key, vals in metrics.items():
        v = np.asarray(vals)
        agg[key] = {"mean": float(v.mean()),
                    "sd": float(v.std(ddof=1)) if v.size > 1 else 0.0}
    agg["runs"] = cfg.runs
    _write_json(cfg.out_dir / "metrics.json", agg)
    return 0


COMMANDS = {
    "prior-dist": cmd_prior_dist,
    "prior-moments": cmd_prior_moments,
    "asymptotic": cmd_asymptotic,
    "simulate-crf": cmd_simulate_crf,
    "fit": cmd_fit,
    "predict": cmd_predict,
    "diagnose": cmd_diagnose,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hssm",
        description="Hierarchical species sampling models: prior laws, "
                    "franchise simulation, and Gibbs inference.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to the run config")
        p.add_argument("--seed", type=int, default=None, help="override [sampler] seed")
        p.add_argument("--out", default=None, help="override [output] dir")
        p.add_argument("--chains", type=int, default=None, help="override [sampler] chains")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(Path(args.config), seed_override=args.seed,
                          out_override=args.out, chains_override=args.chains)
        return COMMANDS[args.command](cfg)
    except (ConfigError, ParamError, SizeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
