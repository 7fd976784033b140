"""Experiment driver tying the pipeline together from one JSON config.

One experiment = one output directory with curves.csv, boost.csv, eta.txt,
raw sample sets and a manifest. Everything is seeded from the config; results
are byte-identical across reruns and across worker counts, because each
(C, alpha, gamma, cycle) work unit derives its own seed from the master seed
and indices, and aggregation is ordered by unit index.

Exit codes: 0 ok, 2 config error, 3 embedding failure, 4 compute failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import analysis
from .chimera import (
    Embedding,
    build_chimera,
    choi_embed,
    heuristic_embed,
    load_graph,
    save_embedding,
    validate_embedding,
)
from .errors import ConfigError, EmbeddingNotFound, InvalidEmbedding, NqacError
from .ising import brute_force_ground, load_problem
from .meanfield import free_energy_grid
from .nesting import encode_for_scale, encode_nested, load_nested, save_nested
from .pt import PtParams, geometric_ladder, run_pt, thermal_boost_scan
from .sampleset import SampleSet, load_sampleset, save_sampleset
from .sqa import (
    SqaParams,
    Schedule,
    default_schedule,
    device_like_schedule,
    load_schedule,
    run_protocol_cycle,
    run_sqa,
)

#: the standard penalty optimization grid
DEFAULT_GAMMA_GRID = (0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_EMBEDDING = 3
EXIT_COMPUTE = 4


def _schedule_from_name(name: str) -> Schedule:
    if name == "linear":
        return default_schedule()
    if name == "device":
        return device_like_schedule()
    return load_schedule(name)


def code_digest() -> str:
    """SHA-256 over the package's source files (stable code version tag)."""
    root = Path(__file__).parent
    blobs = []
    for path in sorted(root.rglob("*.py")) + sorted((root / "data").glob("*")):
        blobs.append(path.name.encode() + b"\0" + path.read_bytes())
    return hashlib.sha256(b"\0".join(blobs)).hexdigest()


# ---------------------------------------------------------------------------
# experiment config


_REQUIRED = ("problem", "C", "alphas", "seed")


def load_config(path) -> dict:
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")
    if "config" in raw and isinstance(raw["config"], dict):
        raw = raw["config"]  # manifests embed the config; rerun from them
    cfg = dict(raw)
    for key in _REQUIRED:
        if key not in cfg:
            raise ConfigError(f"config missing required key {key!r}")
    cfg.setdefault("gammas", list(DEFAULT_GAMMA_GRID))
    cfg.setdefault("engine", "sqa")
    cfg.setdefault("engine_params", {})
    cfg.setdefault("embedding", "none")
    cfg.setdefault("graph", None)
    cfg.setdefault("cycles", 20)
    cfg.setdefault("runs_per_cycle", 1000)
    cfg.setdefault("schedule", "linear")
    cfg.setdefault("fit_count", 4)
    cfg.setdefault("p0", None)
    if not cfg["C"] or not cfg["alphas"] or not cfg["gammas"]:
        raise ConfigError("C, alphas and gammas grids must be non-empty")
    if not isinstance(cfg["seed"], int):
        raise ConfigError("seed must be an integer (wall-clock seeding is not allowed)")
    if cfg["engine"] not in ("sqa", "pt"):
        raise ConfigError(f"unknown engine {cfg['engine']!r}")
    if cfg["embedding"] not in ("none", "choi", "heuristic"):
        raise ConfigError(f"unknown embedding mode {cfg['embedding']!r}")
    if any(not (0 < a <= 1) for a in cfg["alphas"]):
        raise ConfigError("alphas must lie in (0, 1]")
    if not Path(cfg["problem"]).exists():
        raise ConfigError(f"problem file not found: {cfg['problem']}")
    if cfg["embedding"] != "none" and not cfg["graph"]:
        raise ConfigError("embedded runs need a hardware graph file")
    if cfg["graph"] and not Path(cfg["graph"]).exists():
        raise ConfigError(f"graph file not found: {cfg['graph']}")
    return cfg


def _unit_seed(master: int, *idx: int) -> int:
    ss = np.random.SeedSequence(entropy=master, spawn_key=tuple(idx))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _sqa_unit(cfg: dict, emb_dict, ci: int, ai: int, gi: int, cycle: int):
    """One (C, alpha, gamma, cycle) work unit; safe to run in any process."""
    base = load_problem(cfg["problem"])
    C = cfg["C"][ci]
    alpha = cfg["alphas"][ai]
    gamma = cfg["gammas"][gi]
    np_prob = encode_for_scale(base, C, gamma, alpha)
    emb = Embedding.from_dict(emb_dict) if emb_dict is not None else None
    graph = load_graph(cfg["graph"]) if cfg["graph"] else None
    ep = cfg["engine_params"]
    params = SqaParams(
        sweeps=int(ep.get("sweeps", 10_000)),
        trotter_slices=int(ep.get("trotter_slices", 64)),
        beta=float(ep.get("beta", 0.1)),
        noise_sigma=float(ep.get("noise_sigma", 0.05)),
        seed=_unit_seed(cfg["seed"], ci, ai, gi),
    )
    sch = _schedule_from_name(cfg["schedule"])
    configs, rec = run_protocol_cycle(
        np_prob, emb, sch, params, int(cfg["runs_per_cycle"]), cycle, graph=graph
    )
    return configs, rec


def _build_embedding(cfg: dict, C: int, n_logical: int):
    if cfg["embedding"] == "none":
        return None
    graph = load_graph(cfg["graph"])
    n_nested = C * n_logical
    if cfg["embedding"] == "choi":
        return choi_embed(n_nested, graph)
    rng = np.random.default_rng(_unit_seed(cfg["seed"], 0xE0BED, C))
    base = load_problem(cfg["problem"])
    np_prob = encode_nested(base, C, 1.0)
    return heuristic_embed(np_prob, graph, rng)


def run_experiment(cfg: dict, out_dir, jobs: int = 1, stage: str = "all") -> Path:
    """Execute the full pipeline for a config; returns the artifact directory."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    samples_dir = out / "samples"
    samples_dir.mkdir(exist_ok=True)

    base = load_problem(cfg["problem"])
    ground_energy, ground_states = brute_force_ground(base)

    embeddings = {C: _build_embedding(cfg, C, base.n) for C in cfg["C"]}

    manifest = {
        "config": cfg,
        "code_digest": code_digest(),
        "problem_digest": base.digest(),
        "ground_energy": ground_energy,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))

    def sample_path(ci, ai, gi):
        return samples_dir / f"C{cfg['C'][ci]}_a{ai}_g{gi}.ndjson"

    if stage in ("all", "sample"):
        if cfg["engine"] == "sqa":
            units = [
                (ci, ai, gi, cycle)
                for ci in range(len(cfg["C"]))
                for ai in range(len(cfg["alphas"]))
                for gi in range(len(cfg["gammas"]))
                for cycle in range(int(cfg["cycles"]))
            ]
            emb_dicts = {
                C: (e.to_dict() if e is not None else None)
                for C, e in embeddings.items()
            }
            results = {}
            if jobs > 1:
                with ProcessPoolExecutor(max_workers=jobs) as pool:
                    futs = {
                        u: pool.submit(
                            _sqa_unit, cfg, emb_dicts[cfg["C"][u[0]]], *u
                        )
                        for u in units
                    }
                    for u, fut in futs.items():
                        results[u] = fut.result()
            else:
                for u in units:
                    results[u] = _sqa_unit(cfg, emb_dicts[cfg["C"][u[0]]], *u)
            for ci in range(len(cfg["C"])):
                for ai in range(len(cfg["alphas"])):
                    for gi in range(len(cfg["gammas"])):
                        parts = []
                        ids = []
                        recs = []
                        for cycle in range(int(cfg["cycles"])):
                            configs, rec = results[(ci, ai, gi, cycle)]
                            parts.append(configs)
                            ids.append(np.full(configs.shape[0], cycle, dtype=np.int64))
                            recs.append(rec)
                        np_prob = encode_for_scale(
                            base, cfg["C"][ci], cfg["gammas"][gi], cfg["alphas"][ai]
                        )
                        emb = embeddings[cfg["C"][ci]]
                        if emb is None:
                            digest = np_prob.nested.digest()
                        else:
                            from .chimera import apply_embedding

                            digest = apply_embedding(
                                np_prob, emb, load_graph(cfg["graph"])
                            ).problem.digest()
                        ss = SampleSet(
                            configs=np.vstack(parts),
                            cycle_ids=np.concatenate(ids),
                            cycles=tuple(recs),
                            problem_digest=digest,
                        )
                        save_sampleset(ss, sample_path(ci, ai, gi))
        else:  # pt engine
            ep = cfg["engine_params"]
            betas = tuple(
                ep.get("betas")
                or geometric_ladder(
                    float(ep.get("beta_max", 2.0)),
                    int(ep.get("n_betas", 16)),
                    float(ep.get("beta_min", 0.1)),
                )
            )
            rows = []
            for ci, C in enumerate(cfg["C"]):
                for gi, gamma in enumerate(cfg["gammas"]):
                    params = PtParams(
                        betas=betas,
                        sweeps=int(ep.get("sweeps", 4000)),
                        swap_interval=int(ep.get("swap_interval", 5)),
                        seed=_unit_seed(cfg["seed"], ci, gi),
                    )
                    pts = thermal_boost_scan(
                        base, C, gamma, cfg["alphas"], params, ground_states,
                        n_samples=int(ep.get("n_samples", 1000)),
                    )
                    for ai, (alpha, P, se) in enumerate(pts):
                        rows.append((ci, ai, gi, alpha, P, se))
            (samples_dir / "pt_scan.json").write_text(
                json.dumps(rows, sort_keys=True)
            )

    if stage not in ("all", "analyze"):
        return out

    # analysis: per (C, alpha) pick the best gamma, then boost + exponent
    curves = []
    if cfg["engine"] == "sqa":
        for ci, C in enumerate(cfg["C"]):
            alphas = []
            Ps = []
            ses = []
            gamma_used = {}
            for ai, alpha in enumerate(cfg["alphas"]):
                per_gamma = {}
                for gi, gamma in enumerate(cfg["gammas"]):
                    ss = load_sampleset(sample_path(ci, ai, gi))
                    np_prob = encode_for_scale(base, C, gamma, alpha)
                    P, se = analysis.estimate_success(
                        ss,
                        np_prob,
                        embeddings[C],
                        ground_states,
                        decode_seed=_unit_seed(cfg["seed"], 0xDEC, ci, ai, gi),
                    )
                    per_gamma[gamma] = (P, se)
                gstar, pstar = analysis.optimize_gamma(per_gamma)
                alphas.append(alpha)
                Ps.append(pstar)
                ses.append(per_gamma[gstar][1])
                gamma_used[float(alpha)] = gstar
            curves.append(
                analysis.SuccessCurve(
                    C=C, alphas=alphas, P=Ps, stderr=ses, gamma_used=gamma_used
                )
            )
    else:
        rows = json.loads((samples_dir / "pt_scan.json").read_text())
        for ci, C in enumerate(cfg["C"]):
            alphas = []
            Ps = []
            ses = []
            gamma_used = {}
            for ai, alpha in enumerate(cfg["alphas"]):
                per_gamma = {}
                for row in rows:
                    if row[0] == ci and row[1] == ai:
                        per_gamma[cfg["gammas"][row[2]]] = (row[4], row[5])
                gstar, pstar = analysis.optimize_gamma(per_gamma)
                alphas.append(alpha)
                Ps.append(pstar)
                ses.append(per_gamma[gstar][1])
                gamma_used[float(alpha)] = gstar
            curves.append(
                analysis.SuccessCurve(
                    C=C, alphas=alphas, P=Ps, stderr=ses, gamma_used=gamma_used
                )
            )

    (out / "curves.csv").write_text(analysis.curves_csv(curves))
    if 1 in cfg["C"] and len(cfg["alphas"]) >= 2:
        boost = analysis.compute_boost(curves, p0=cfg["p0"])
        (out / "boost.csv").write_text(analysis.boost_csv(boost))
        usable = [C for C, v in boost.mu.items() if v is not None]
        if len(usable) >= 2:
            eta = analysis.fit_eta(boost, fit_count=int(cfg["fit_count"]))
            (out / "eta.txt").write_text(
                analysis.eta_text(eta, int(cfg["fit_count"]))
            )
    return out


# ---------------------------------------------------------------------------
# subcommands


def _cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg["seed"] = args.seed
    except ConfigError as exc:
        print(f"[config] {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        out = run_experiment(cfg, args.out, jobs=args.jobs, stage=args.stage)
    except (EmbeddingNotFound, InvalidEmbedding) as exc:
        print(f"[embed] {exc}", file=sys.stderr)
        return EXIT_EMBEDDING
    except NqacError as exc:
        print(f"[compute] {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    print(f"experiment artifacts in {out}")
    return EXIT_OK


def _cmd_encode(args) -> int:
    base = load_problem(args.problem)
    if args.alpha is not None:
        np_prob = encode_for_scale(base, args.C, args.gamma, args.alpha)
    else:
        np_prob = encode_nested(base, args.C, args.gamma)
    save_nested(np_prob, args.out)
    print(f"nested problem ({np_prob.n_nested} vertices) -> {args.out}")
    return EXIT_OK


def _cmd_embed(args) -> int:
    graph = load_graph(args.graph) if args.graph else build_chimera(args.rows, args.cols)
    np_prob = load_nested(args.source)
    try:
        if args.mode == "choi":
            emb = choi_embed(np_prob.n_nested, graph)
        else:
            rng = np.random.default_rng(args.seed)
            emb = heuristic_embed(np_prob, graph, rng, max_tries=args.max_tries)
    except (EmbeddingNotFound, NqacError) as exc:
        print(f"[embed] {exc}", file=sys.stderr)
        return EXIT_EMBEDDING
    report = validate_embedding(emb, np_prob, graph)
    if not report.ok:
        print(f"[embed] produced invalid embedding: {report.violations}", file=sys.stderr)
        return EXIT_EMBEDDING
    save_embedding(emb, args.out)
    from .chimera import embedding_stats

    nq, mx, mean = embedding_stats(emb)
    print(f"embedding: {nq} qubits, max chain {mx}, mean chain {mean:.2f} -> {args.out}")
    return EXIT_OK


def _cmd_sqa(args) -> int:
    p = load_problem(args.problem)
    sch = _schedule_from_name(args.schedule)
    params = SqaParams(
        sweeps=args.sweeps,
        trotter_slices=args.slices,
        beta=args.beta,
        noise_sigma=0.0,
        seed=args.seed,
    )
    ss = run_sqa(p, sch, params, args.anneals)
    save_sampleset(ss, args.out)
    print(f"{ss.n_records} anneal records -> {args.out}")
    return EXIT_OK


def _cmd_pt(args) -> int:
    p = load_problem(args.problem)
    betas = (
        tuple(float(b) for b in args.betas.split(","))
        if args.betas
        else geometric_ladder(args.beta_max, args.n_betas, args.beta_min)
    )
    params = PtParams(
        betas=betas, sweeps=args.sweeps, swap_interval=args.swap_interval, seed=args.seed
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    samplesets = run_pt(p, params, args.samples)
    for i, (beta, ss) in enumerate(sorted(samplesets.items())):
        save_sampleset(ss, out_dir / f"beta_{i:02d}_{beta:.6g}.ndjson")
    print(f"{len(samplesets)} thermal sample sets -> {out_dir}")
    return EXIT_OK


def _cmd_meanfield(args) -> int:
    sch = _schedule_from_name(args.schedule)
    rows = free_energy_grid(
        sch.a_of, sch.b_of, args.gamma, args.beta, args.C, n_m=args.n_m, n_s=args.n_s
    )
    lines = ["m,s,A,B,betaF"]
    lines += [",".join(format(v, ".12g") for v in row) for row in rows]
    Path(args.out).write_text("\n".join(lines) + "\n")
    print(f"free-energy grid ({len(rows)} rows) -> {args.out}")
    return EXIT_OK


def _cmd_analyze(args) -> int:
    rows = [
        line.split(",")
        for line in Path(args.curves).read_text().strip().splitlines()[1:]
    ]
    by_c: dict[int, list] = {}
    for C, alpha, gamma, P, se in rows:
        by_c.setdefault(int(C), []).append(
            (float(alpha), float(P), float(se), float(gamma) if gamma else None)
        )
    curves = []
    for C, pts in sorted(by_c.items()):
        pts.sort()
        curves.append(
            analysis.SuccessCurve(
                C=C,
                alphas=[p[0] for p in pts],
                P=[p[1] for p in pts],
                stderr=[p[2] for p in pts],
                gamma_used={p[0]: p[3] for p in pts if p[3] is not None} or None,
            )
        )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    boost = analysis.compute_boost(curves, p0=args.p0, smoothing=args.smoothing)
    (out / "boost.csv").write_text(analysis.boost_csv(boost))
    eta = analysis.fit_eta(boost, fit_count=args.fit_count)
    (out / "eta.txt").write_text(analysis.eta_text(eta, args.fit_count))
    print(f"boost + eta -> {out}")
    return EXIT_OK


def _cmd_bruteforce(args) -> int:
    p = load_problem(args.problem)
    energy, states = brute_force_ground(p)
    print(f"ground energy {energy:.12g}, {states.shape[0]} ground states")
    if args.out:
        Path(args.out).write_text(
            json.dumps(
                {"ground_energy": energy, "ground_states": states.tolist()},
                sort_keys=True,
            )
        )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="nqac",
        description="nested quantum annealing correction experiment harness",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a full experiment from a config file")
    run_p.add_argument("--config", required=True)
    run_p.add_argument("--out", required=True)
    run_p.add_argument("--seed", type=int, default=None, help="override config seed")
    run_p.add_argument("--jobs", type=int, default=1)
    run_p.add_argument("--stage", choices=("all", "sample", "analyze"), default="all")
    run_p.set_defaults(func=_cmd_run)

    enc = sub.add_parser("encode", help="nest a problem at level C")
    enc.add_argument("--problem", required=True)
    enc.add_argument("--C", type=int, required=True)
    enc.add_argument("--gamma", type=float, required=True)
    enc.add_argument("--alpha", type=float, default=None,
                     help="problem scale; keeps the penalty fixed in device units")
    enc.add_argument("--out", required=True)
    enc.set_defaults(func=_cmd_encode)

    embp = sub.add_parser("embed", help="embed a nested problem on hardware")
    embp.add_argument("--source", required=True, help="nested problem file")
    embp.add_argument("--graph", default=None, help="hardware graph JSON")
    embp.add_argument("--rows", type=int, default=8)
    embp.add_argument("--cols", type=int, default=8)
    embp.add_argument("--mode", choices=("choi", "heuristic"), default="choi")
    embp.add_argument("--seed", type=int, default=0)
    embp.add_argument("--max-tries", type=int, default=64)
    embp.add_argument("--out", required=True)
    embp.set_defaults(func=_cmd_embed)

    sqa_p = sub.add_parser("sqa", help="anneal a problem file directly")
    sqa_p.add_argument("--problem", required=True)
    sqa_p.add_argument("--schedule", default="linear",
                       help="'linear', 'device', or a CSV path")
    sqa_p.add_argument("--sweeps", type=int, default=10_000)
    sqa_p.add_argument("--slices", type=int, default=64)
    sqa_p.add_argument("--beta", type=float, default=0.1)
    sqa_p.add_argument("--anneals", type=int, default=100)
    sqa_p.add_argument("--seed", type=int, default=0)
    sqa_p.add_argument("--out", required=True)
    sqa_p.set_defaults(func=_cmd_sqa)

    pt_p = sub.add_parser("pt", help="sample thermal states by parallel tempering")
    pt_p.add_argument("--problem", required=True)
    pt_p.add_argument("--betas", default=None, help="comma list; overrides the ladder")
    pt_p.add_argument("--beta-max", type=float, default=2.0)
    pt_p.add_argument("--beta-min", type=float, default=0.1)
    pt_p.add_argument("--n-betas", type=int, default=16)
    pt_p.add_argument("--sweeps", type=int, default=4000)
    pt_p.add_argument("--swap-interval", type=int, default=5)
    pt_p.add_argument("--samples", type=int, default=1000)
    pt_p.add_argument("--seed", type=int, default=0)
    pt_p.add_argument("--out", required=True)
    pt_p.set_defaults(func=_cmd_pt)

    mf = sub.add_parser("meanfield", help="tabulate the mean-field free energy")
    mf.add_argument("--C", type=int, required=True)
    mf.add_argument("--gamma", type=float, required=True)
    mf.add_argument("--beta", type=float, required=True)
    mf.add_argument("--schedule", default="linear")
    mf.add_argument("--n-m", type=int, default=101)
    mf.add_argument("--n-s", type=int, default=51)
    mf.add_argument("--out", required=True)
    mf.set_defaults(func=_cmd_meanfield)

    an = sub.add_parser("analyze", help="boost and exponent from a curves.csv")
    an.add_argument("--curves", required=True)
    an.add_argument("--p0", type=float, default=None)
    an.add_argument("--fit-count", type=int, default=4)
    an.add_argument("--smoothing", default=None)
    an.add_argument("--out", required=True)
    an.set_defaults(func=_cmd_analyze)

    bf = sub.add_parser("bruteforce", help="exhaustive ground-state search")
    bf.add_argument("--problem", required=True)
    bf.add_argument("--out", default=None)
    bf.set_defaults(func=_cmd_bruteforce)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"[config] {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"[config] {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (EmbeddingNotFound, InvalidEmbedding) as exc:
        print(f"[embed] {exc}", file=sys.stderr)
        return EXIT_EMBEDDING
    except NqacError as exc:
        print(f"[compute] {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
