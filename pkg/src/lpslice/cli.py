"""Command-line orchestration: gen, learn, calibrate, solve, bench, oracle.

Every command reads an optional JSON config (--config) whose fields are
overridden by flags, writes machine-readable outputs into --out, and is
deterministic under a fixed master seed.  Bench emits metrics.csv with the
fixed header, a summary.json carrying the sweep structures, and a run
manifest; wall-clock columns are excluded from the stable content hash.
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import json
import math
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import pca_projection, random_projection, solve_projected
from .compression import check_exact, model_from_json, model_to_json, solve_via_compression
from .instances import (
    PRESETS,
    STREAM_PILOT,
    STREAM_TEST,
    Instance,
    cost_stream,
    gen_instance,
    instance_from_json,
    instance_to_json,
    load_instance,
    make_preset,
    sample_costs,
)
from .learner import certificate_bound, learn, make_anchor, trace_to_json
from .lp_core import SolveStatus, dump_json, load_json, solve_lp
from .oracle import ScaleError, dir_star, enumerate_vertices, prior_spec_from_dict, reachable_vertices
from .prior import (
    anchor_cost,
    calibrate,
    composite_certificate,
    fit_score,
    prior_to_json,
    retain_stream,
)

CSV_HEADER = "instance,method,k,seed,obj_ratio,exact,cert_lb,hard,skipped,wall_ms,flag"

# near-zero full values make the ratio metric meaningless; those cells
# switch to an absolute gap and say so in the flag column
RATIO_DENOM_FLOOR = 1e-9

_CONFIG_DEFAULTS = {
    "seed": 0,
    "out": "runs",
    "n1": 60,
    "m_fit": 40,
    "m_cal": 120,
    "n_test": 150,
    "rho": 0.1,
    "delta0": 0.05,
    "delta1": 0.05,
    "rho_grid": [0.05, 0.1, 0.3],
    "n1_grid": [5, 10, 20, 40],
    "methods": ["ours", "random", "pca", "full"],
    "jobs": 1,
    "known_prior": False,
}


# ---------------------------------------------------------------------------
# config plumbing
# ---------------------------------------------------------------------------


def _build_config(args: argparse.Namespace) -> dict:
    cfg = dict(_CONFIG_DEFAULTS)
    if getattr(args, "config", None):
        cfg.update(load_json(args.config))
    for key in cfg:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    for key in ("preset", "instance", "kind", "params"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if getattr(args, "known_prior", False):
        cfg["known_prior"] = True
    return cfg


def _config_hash(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()


def _resolve_instance(cfg: dict) -> Instance:
    if cfg.get("preset"):
        return make_preset(cfg["preset"], int(cfg["seed"]))
    if cfg.get("instance"):
        return load_instance(cfg["instance"], cfg.get("cost_config"))
    if cfg.get("kind"):
        params = cfg.get("params") or {}
        if isinstance(params, str):
            params = json.loads(params)
        return gen_instance(cfg["kind"], params, int(cfg["seed"]))
    raise SystemExit("no instance given: use --preset, --instance, or --kind/--params")


def _write_manifest(out: Path, cfg: dict, command: str) -> None:
    doc = {
        "schema": 1,
        "command": command,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "package_version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "config": cfg,
        "config_hash": _config_hash(cfg),
    }
    dump_json(doc, out / "run_manifest.json")


def _out_dir(cfg: dict) -> Path:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# learning pipelines shared by learn/bench
# ---------------------------------------------------------------------------


def _pilot_samples(inst: Instance, cfg: dict) -> tuple[np.ndarray, np.ndarray]:
    m_fit, m_cal = int(cfg["m_fit"]), int(cfg["m_cal"])
    X = sample_costs(inst, m_fit + m_cal, int(cfg["seed"]), stream=STREAM_PILOT)
    return X[:m_fit], X[m_fit:]


def _estimated_pipeline(inst: Instance, cfg: dict, rho: float | None = None):
    """pilot -> fit -> calibrate -> anchor -> retain n1. Returns a dict of parts."""
    fit_X, cal_X = _pilot_samples(inst, cfg)
    params = fit_score(fit_X)
    prior = calibrate(params, cal_X, float(rho if rho is not None else cfg["rho"]), float(cfg["delta0"]))
    x0 = make_anchor(inst.polytope, anchor_cost(prior))
    retained, skipped = retain_stream(prior, cost_stream(inst, int(cfg["seed"])), int(cfg["n1"]))
    return {"prior": prior, "x0": x0, "retained": retained, "skipped": skipped}


def _known_pipeline(inst: Instance, cfg: dict):
    x0 = make_anchor(inst.polytope, inst.c0)
    n1 = int(cfg["n1"])
    retained = list(sample_costs(inst, n1, int(cfg["seed"])))
    return {"prior": None, "x0": x0, "retained": retained, "skipped": 0}


def _run_pipeline(inst: Instance, cfg: dict):
    if cfg["known_prior"]:
        return _known_pipeline(inst, cfg)
    return _estimated_pipeline(inst, cfg)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_gen(args) -> int:
    cfg = _build_config(args)
    inst = _resolve_instance(cfg)
    out = _out_dir(cfg)
    path = out / f"{inst.name}.json"
    dump_json(instance_to_json(inst), path)
    digest = hashlib.sha256(path.read_bytes()).hexdigest()
    print(f"wrote {path} (d={inst.d}, m={inst.polytope.m}, sha256={digest[:16]})")
    return 0


def cmd_calibrate(args) -> int:
    cfg = _build_config(args)
    inst = _resolve_instance(cfg)
    out = _out_dir(cfg)
    fit_X, cal_X = _pilot_samples(inst, cfg)
    params = fit_score(fit_X)
    prior = calibrate(params, cal_X, float(cfg["rho"]), float(cfg["delta0"]))
    dump_json(prior_to_json(prior), out / "prior.json")
    _write_manifest(out, cfg, "calibrate")
    thr = "inf" if math.isinf(prior.threshold) else f"{prior.threshold:.6g}"
    print(f"calibrated prior: m={prior.m} k={prior.k} threshold={thr} rho={prior.rho} delta0={prior.delta0}")
    return 0


def cmd_learn(args) -> int:
    cfg = _build_config(args)
    inst = _resolve_instance(cfg)
    out = _out_dir(cfg)
    parts = _run_pipeline(inst, cfg)
    model, trace = learn(
        inst.polytope,
        parts["x0"],
        parts["retained"],
        provenance={"instance": inst.name, "seed": int(cfg["seed"])},
        anchor_provenance="known c0" if cfg["known_prior"] else "estimated prior mean",
    )
    n1, t = len(parts["retained"]), len(trace.hard)
    cert = certificate_bound(n1, t, float(cfg["delta1"]))
    cert_doc = {
        "schema": 1,
        "mode": "known" if cfg["known_prior"] else "estimated",
        "n1": n1,
        "t": t,
        "delta1": float(cfg["delta1"]),
        "bound": cert.lower_bound,
        "skipped": parts["skipped"],
    }
    if not cfg["known_prior"]:
        cert_doc["rho"] = float(cfg["rho"])
        cert_doc["delta0"] = float(cfg["delta0"])
        cert_doc["composite"] = composite_certificate(float(cfg["rho"]), n1, t, float(cfg["delta1"])) if n1 else 0.0
        dump_json(prior_to_json(parts["prior"]), out / "prior.json")
    dump_json(model_to_json(model), out / "model.json")
    dump_json(trace_to_json(trace), out / "trace.json")
    dump_json(cert_doc, out / "certificate.json")
    _write_manifest(out, cfg, "learn")
    line = f"learned rank {model.rank} from n1={n1} (hard={t}, skipped={parts['skipped']}); bound={cert.lower_bound:.4f}"
    if "composite" in cert_doc:
        line += f" composite={cert_doc['composite']:.4f}"
    print(line)
    return 0


def cmd_solve(args) -> int:
    cfg = _build_config(args)
    inst = _resolve_instance(cfg)
    out = _out_dir(cfg)
    if args.cost is not None:
        c = np.array(json.loads(args.cost), dtype=float)
    elif args.test_index is not None:
        c = sample_costs(inst, 1, int(cfg["seed"]), start=int(args.test_index), stream=STREAM_TEST)[0]
    else:
        c = inst.c0
    full = solve_lp(inst.polytope, c)
    report: dict = {"schema": 1, "instance": inst.name, "full_status": full.status.value}
    if full.status is SolveStatus.OPTIMAL:
        report["full_value"] = full.value
        report["full_x"] = [float(v) for v in full.x]
    print(f"full: {full.status.value}" + (f" value={full.value:.10g}" if full.value is not None else ""))
    if args.model:
        model = model_from_json(load_json(args.model))
        red = solve_via_compression(model, inst.polytope, c)
        exact = check_exact(model, inst.polytope, c)
        report["reduced_value"] = red.value
        report["reduced_x"] = [float(v) for v in red.x]
        report["exact"] = bool(exact)
        print(f"compressed (rank {model.rank}): value={red.value:.10g} exact={exact}")
    dump_json(report, out / "solution.json")
    return 0


def cmd_oracle(args) -> int:
    cfg = _build_config(args)
    inst = _resolve_instance(cfg)
    try:
        vs = enumerate_vertices(inst.polytope)
        prior_doc = inst.polytope.meta.get("prior")
        if prior_doc is None:
            raise SystemExit("instance metadata carries no prior region")
        spec = prior_spec_from_dict(prior_doc)
        reach = reachable_vertices(inst.polytope, spec)
        basis, dstar = dir_star(inst.polytope, spec)
    except ScaleError as e:
        print(f"oracle refused: {e}", file=sys.stderr)
        return 2
    print(f"vertices: {len(vs)}")
    print(f"reachable: {len(reach)}")
    print(f"d_star: {dstar}")
    for j in range(basis.shape[1]):
        print(f"  basis[{j}] = {np.array2string(basis[:, j], precision=6)}")
    return 0


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------


def _ratio_stats(values: list, full_values: list, statuses: list) -> tuple[float, str, int]:
    """Mean objective ratio over solved cells; absolute gap when the full
    value sits at zero. Returns (mean, flag, infeasible_count)."""
    ratios, gaps = [], []
    n_inf = 0
    for v, vf, st in zip(values, full_values, statuses):
        if st != "optimal":
            n_inf += 1
            continue
        if abs(vf) <= RATIO_DENOM_FLOOR:
            gaps.append(abs(v - vf))
        else:
            ratios.append(v / vf)
    flag_parts = []
    if gaps and not ratios:
        mean = float(np.mean(gaps))
        flag_parts.append("absgap")
    elif ratios:
        mean = float(np.mean(ratios))
        if gaps:
            flag_parts.append(f"absgap_cells={len(gaps)}")
    else:
        mean = math.nan
    if n_inf:
        flag_parts.append(f"infeasible={n_inf}")
    return mean, ";".join(flag_parts), n_inf


def _eval_ours(model, inst_doc: dict, test_costs, full_values) -> dict:
    inst = instance_from_json(inst_doc)
    t0 = time.perf_counter()
    vals, stats, exact = [], [], []
    for c in test_costs:
        r = solve_via_compression(model, inst.polytope, np.asarray(c))
        vals.append(r.value)
        stats.append("optimal")
        exact.append(check_exact(model, inst.polytope, np.asarray(c)))
    wall = (time.perf_counter() - t0) * 1e3
    ratio, flag, _ = _ratio_stats(vals, full_values, stats)
    return {"obj_ratio": ratio, "exact": float(np.mean(exact)) if exact else math.nan, "wall_ms": wall, "flag": flag}


def _eval_projection(pm, inst_doc: dict, test_costs, full_values) -> dict:
    inst = instance_from_json(inst_doc)
    t0 = time.perf_counter()
    vals, stats = [], []
    for c in test_costs:
        r = solve_projected(inst.polytope, np.asarray(c), pm)
        if r.status is SolveStatus.OPTIMAL:
            vals.append(r.value)
            stats.append("optimal")
        else:
            vals.append(math.nan)
            stats.append(r.status.value)
    wall = (time.perf_counter() - t0) * 1e3
    ratio, flag, _ = _ratio_stats(vals, full_values, stats)
    exact = [
        abs(v - vf) <= 1e-6 * (1.0 + abs(vf))
        for v, vf, st in zip(vals, full_values, stats)
        if st == "optimal"
    ]
    return {
        "obj_ratio": ratio,
        "exact": float(np.mean(exact)) if exact else 0.0,
        "wall_ms": wall,
        "flag": flag,
    }


def _row(instance, method, k, seed, cell: dict, cert_lb="", hard="", skipped="") -> dict:
    return {
        "instance": instance,
        "method": method,
        "k": k,
        "seed": seed,
        "obj_ratio": cell.get("obj_ratio", math.nan),
        "exact": cell.get("exact", math.nan),
        "cert_lb": cert_lb,
        "hard": hard,
        "skipped": skipped,
        "wall_ms": int(round(cell.get("wall_ms", 0.0))),
        "flag": cell.get("flag", ""),
    }


def _fmt_cell(v) -> str:
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return f"{v:.9g}"
    return str(v)


def _rows_to_csv(rows: list) -> str:
    cols = CSV_HEADER.split(",")
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(",".join(_fmt_cell(r[c]) for c in cols))
    return "\n".join(lines) + "\n"


def _stable_csv_hash(csv_text: str) -> str:
    """Content hash with the wall_ms column masked (timing is run-dependent)."""
    cols = CSV_HEADER.split(",")
    wall_idx = cols.index("wall_ms")
    out_lines = []
    for i, line in enumerate(csv_text.strip().split("\n")):
        if i == 0:
            out_lines.append(line)
            continue
        parts = line.split(",")
        parts[wall_idx] = "x"
        out_lines.append(",".join(parts))
    return hashlib.sha256("\n".join(out_lines).encode()).hexdigest()


def _bench_cell(payload: dict) -> dict:
    """One sweep cell: build the model for the cell and evaluate all methods.

    Runs in a worker process; everything in the payload is JSON-safe, and
    the result depends only on the payload, so any scheduling order yields
    identical rows.
    """
    inst = instance_from_json(payload["instance"])
    cfg = payload["cfg"]
    seed = int(cfg["seed"])
    test_costs = [np.array(c) for c in payload["test_costs"]]
    full_values = payload["full_values"]
    x0 = np.array(payload["x0"])
    train = [np.array(c) for c in payload["train_costs"]]
    skipped = payload["skipped"]

    t0 = time.perf_counter()
    model, trace = learn(inst.polytope, x0, train)
    learn_ms = (time.perf_counter() - t0) * 1e3
    n1, t = len(train), len(trace.hard)
    if payload["mode"] == "estimated":
        cert = composite_certificate(float(payload["rho"]), n1, t, float(cfg["delta1"])) if n1 else 0.0
    else:
        cert = certificate_bound(n1, t, float(cfg["delta1"])).lower_bound
    K = int(payload.get("K") or max(1, model.rank))

    rows = []
    label = payload["label"]
    methods = cfg["methods"]
    if "ours" in methods:
        cell = _eval_ours(model, payload["instance"], test_costs, full_values)
        cell["wall_ms"] += learn_ms
        rows.append(_row(label, "ours", model.rank, seed, cell, cert_lb=f"{cert:.6f}", hard=t, skipped=skipped))
    if "random" in methods:
        pm = random_projection(inst.d, K, seed)
        rows.append(_row(label, "random", K, seed, _eval_projection(pm, payload["instance"], test_costs, full_values)))
    if "pca" in methods:
        # with no training solves yet, the anchor is the one observed optimizer
        opts = payload["train_opts"] if payload["train_opts"] else [payload["x0"]]
        pm = pca_projection(np.array(opts, dtype=float), K)
        rows.append(_row(label, "pca", K, seed, _eval_projection(pm, payload["instance"], test_costs, full_values)))
    if "full" in methods:
        cell = {"obj_ratio": 1.0, "exact": 1.0, "wall_ms": payload["full_wall_ms"], "flag": ""}
        rows.append(_row(label, "full", inst.d, seed, cell))
    return {
        "cell_id": payload["cell_id"],
        "rows": rows,
        "d_rho": model.rank,
        "rank_growth": [int(v) for v in np.cumsum(trace.appends_per_sample)],
        "hard": t,
    }


def cmd_bench(args) -> int:
    cfg = _build_config(args)
    inst = _resolve_instance(cfg)
    out = _out_dir(cfg)
    seed = int(cfg["seed"])
    mode = "known" if cfg["known_prior"] else "estimated"
    inst_doc = instance_to_json(inst)

    # shared test set and full-LP reference values
    test_costs = sample_costs(inst, int(cfg["n_test"]), seed, stream=STREAM_TEST)
    t0 = time.perf_counter()
    full_values = []
    for c in test_costs:
        r = solve_lp(inst.polytope, c)
        if r.status is not SolveStatus.OPTIMAL:
            raise SystemExit(f"full LP not optimal on a test cost: {r.status.value}")
        full_values.append(r.value)
    full_wall_ms = (time.perf_counter() - t0) * 1e3

    # one shared training pipeline at the configured rho (stage a and c)
    parts = _run_pipeline(inst, cfg)
    train_costs = parts["retained"]
    train_opts = [solve_lp(inst.polytope, c).x.tolist() for c in train_costs]

    base_payload = {
        "instance": inst_doc,
        "cfg": cfg,
        "mode": mode,
        "test_costs": [c.tolist() for c in test_costs],
        "full_values": full_values,
        "full_wall_ms": full_wall_ms,
        "x0": parts["x0"].tolist(),
        "rho": cfg["rho"],
    }

    payloads = []

    def add_payload(label, train, opts, skipped, K=None, rho=None, x0=None):
        p = copy.deepcopy(base_payload)
        p["label"] = label
        p["train_costs"] = [np.asarray(c).tolist() for c in train]
        p["train_opts"] = list(opts)
        p["skipped"] = skipped
        p["K"] = K
        if rho is not None:
            p["rho"] = rho
        if x0 is not None:
            p["x0"] = x0.tolist()
        p["cell_id"] = len(payloads)
        payloads.append(p)

    # stage a + full-budget cell: the whole retained stream
    add_payload(inst.name, train_costs, train_opts, parts["skipped"])

    # stage b: rho sweep (estimated mode only; the prior is what rho changes)
    rho_infos = []
    if mode == "estimated":
        for rho in cfg["rho_grid"]:
            sub = _estimated_pipeline(inst, cfg, rho=rho)
            sub_opts = [solve_lp(inst.polytope, c).x.tolist() for c in sub["retained"]]
            rho_infos.append({"rho": float(rho), "cell_id": len(payloads)})
            add_payload(
                f"{inst.name}@rho={rho:g}",
                sub["retained"],
                sub_opts,
                sub["skipped"],
                rho=rho,
                x0=sub["x0"],
            )

    # stage c: sample sweep at fixed K (the full-budget learned rank)
    probe_model, _ = learn(inst.polytope, parts["x0"], train_costs)
    K_fixed = max(1, probe_model.rank)
    sample_infos = []
    for n in cfg["n1_grid"]:
        n = int(n)
        if n > len(train_costs):
            continue
        sample_infos.append({"n1": n, "cell_id": len(payloads)})
        add_payload(
            f"{inst.name}@n1={n}",
            train_costs[:n],
            train_opts[:n],
            parts["skipped"],
            K=K_fixed,
        )

    jobs = int(cfg["jobs"])
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_bench_cell, payloads))
    else:
        results = [_bench_cell(p) for p in payloads]
    results.sort(key=lambda r: r["cell_id"])

    rows = [row for res in results for row in res["rows"]]
    csv_text = _rows_to_csv(rows)
    (out / "metrics.csv").write_text(csv_text)

    by_id = {res["cell_id"]: res for res in results}
    summary = {
        "schema": 1,
        "instance": inst.name,
        "mode": mode,
        "rank_growth": by_id[0]["rank_growth"],
        "rho_sweep": [
            {"rho": info["rho"], "d_rho": by_id[info["cell_id"]]["d_rho"], "K": max(1, by_id[info["cell_id"]]["d_rho"])}
            for info in rho_infos
        ],
        "sample_sweep": [
            {"n1": info["n1"], "rank": by_id[info["cell_id"]]["d_rho"], "K": K_fixed}
            for info in sample_infos
        ],
        "csv_sha256_stable": _stable_csv_hash(csv_text),
        "notes": {"fcnn": "neural cost-only baseline omitted; out of scope for this artifact"},
    }
    dump_json(summary, out / "summary.json")
    _write_manifest(out, cfg, "bench")
    print(f"wrote {out / 'metrics.csv'} ({len(rows)} rows) and summary.json")
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", help="JSON config file; flags override fields")
    sp.add_argument("--preset", help=f"named preset ({', '.join(sorted(PRESETS))})")
    sp.add_argument("--instance", help="path to an instance .json or .mps file")
    sp.add_argument("--kind", help="instance family for direct generation")
    sp.add_argument("--params", help="JSON parameter object for --kind")
    sp.add_argument("--seed", type=int, help="master seed")
    sp.add_argument("--out", help="output directory")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="lpslice", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("gen", help="generate an instance file")
    _add_common(sp)
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("calibrate", help="fit and calibrate the estimated prior")
    _add_common(sp)
    sp.add_argument("--m-fit", dest="m_fit", type=int)
    sp.add_argument("--m-cal", dest="m_cal", type=int)
    sp.add_argument("--rho", type=float)
    sp.add_argument("--delta0", type=float)
    sp.set_defaults(func=cmd_calibrate)

    sp = sub.add_parser("learn", help="run the learning pipeline and write the model")
    _add_common(sp)
    sp.add_argument("--n1", type=int)
    sp.add_argument("--m-fit", dest="m_fit", type=int)
    sp.add_argument("--m-cal", dest="m_cal", type=int)
    sp.add_argument("--rho", type=float)
    sp.add_argument("--delta0", type=float)
    sp.add_argument("--delta1", type=float)
    sp.add_argument("--known-prior", dest="known_prior", action="store_true", default=None)
    sp.set_defaults(func=cmd_learn)

    sp = sub.add_parser("solve", help="solve at a cost, optionally through a model")
    _add_common(sp)
    sp.add_argument("--model", help="path to model.json")
    sp.add_argument("--cost", help="explicit cost vector as a JSON list")
    sp.add_argument("--test-index", dest="test_index", type=int, help="index into the seeded test stream")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("bench", help="run the benchmark sweeps and write metrics")
    _add_common(sp)
    sp.add_argument("--n1", type=int)
    sp.add_argument("--m-fit", dest="m_fit", type=int)
    sp.add_argument("--m-cal", dest="m_cal", type=int)
    sp.add_argument("--n-test", dest="n_test", type=int)
    sp.add_argument("--rho", type=float)
    sp.add_argument("--delta0", type=float)
    sp.add_argument("--delta1", type=float)
    sp.add_argument("--jobs", type=int)
    sp.add_argument("--known-prior", dest="known_prior", action="store_true", default=None)
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("oracle", help="brute-force report for a small instance")
    _add_common(sp)
    sp.set_defaults(func=cmd_oracle)

    args = ap.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
