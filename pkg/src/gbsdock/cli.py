"""Command line interface.

Every subcommand reads an optional experiment config JSON (``--config``) and
applies the shared overrides on top, so a benchmark can be replayed from a
summary sidecar with nothing but ``gbsdock bench fig56 --config summary.json``.
Exit codes: 0 on success, 2 on invalid input, 3 on numerical failure.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .docking import (
    build_binding_interaction_graph,
    build_labeled_distance_graph,
    load_points,
    load_potential,
)
from .exceptions import NumericalError, ValidationError
from .gbs import apply_loss, mean_clicks, state_from_encoding, tune_c_for_clicks
from .graphs import load_graph, max_weighted_clique_with_runner_up, save_graph
from .harness import (
    ExperimentConfig,
    load_config,
    resolve_instance,
    role_seed,
    run_figure3,
    run_figure4,
    run_figure5_6,
    run_noise_study,
)
from .instances import generate_planted_instance, load_instance, save_instance
from .samplers import sample_postselected, sample_threshold_chain, save_batch
from .solvers import hybrid_pipeline, save_solve_result

_BENCH_RUNNERS = {
    "fig3": run_figure3,
    "fig4": run_figure4,
    "fig56": run_figure5_6,
    "noise": run_noise_study,
}


def _add_common_options(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", metavar="FILE",
                     help="experiment config JSON (a bench summary works too)")
    sub.add_argument("--seed", type=int, metavar="N",
                     help="override the base seed")
    sub.add_argument("--out-dir", metavar="DIR",
                     help="override the output directory")
    sub.add_argument("--samples", type=int, metavar="N",
                     help="override the sample count of every sampling stage")
    sub.add_argument("--threads", type=int, metavar="N",
                     help="override the sampler worker count")
    sub.add_argument("--emit-gnuplot", action="store_true",
                     help="also write plain-text gnuplot scripts")


def _cli_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    overrides = {}
    if args.seed is not None:
        overrides["base_seed"] = args.seed
    if args.out_dir is not None:
        overrides["out_dir"] = args.out_dir
    if args.samples is not None:
        overrides["n_samples_random"] = args.samples
        overrides["n_samples_shrink"] = args.samples
        overrides["pilot_samples"] = args.samples
    if args.threads is not None:
        overrides["threads"] = args.threads
    if args.emit_gnuplot:
        overrides["emit_gnuplot"] = True
    if not overrides:
        return cfg
    d = cfg.to_dict()
    d.update(overrides)
    return ExperimentConfig.from_dict(d)


def _out_path(args: argparse.Namespace, default_name: str) -> Path:
    if getattr(args, "out", None):
        return Path(args.out)
    out_dir = Path(args.out_dir or "results")
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir / default_name


def _tuned(cfg: ExperimentConfig, graph):
    enc = tune_c_for_clicks(graph, cfg.alpha, cfg.target_mean_clicks, cfg.eta)
    state = apply_loss(state_from_encoding(enc), cfg.eta)
    return enc, state


def cmd_build_graph(args: argparse.Namespace) -> int:
    _, ligand = load_points(args.ligand)
    _, receptor = load_points(args.receptor)
    potential = load_potential(args.potential) if args.potential else None
    big = build_binding_interaction_graph(
        build_labeled_distance_graph(ligand),
        build_labeled_distance_graph(receptor),
        potential,
        tau=args.tau,
        epsilon=args.epsilon,
    )
    path = _out_path(args, "binding_graph.json")
    meta = {
        "kind": "binding-interaction",
        "ligand": str(args.ligand),
        "receptor": str(args.receptor),
        "tau": big.tau,
        "epsilon": big.epsilon,
        "n_contacts": len(big.contacts),
    }
    save_graph(big.graph, path, meta=meta)
    print(f"wrote {path}: {big.graph.n} vertices, {big.graph.n_edges} edges")
    return 0


def cmd_gen_instance(args: argparse.Namespace) -> int:
    inst = generate_planted_instance(
        n=args.n,
        clique_size=args.clique_size,
        edge_density=args.density,
        weight_profile=args.profile,
        seed=args.seed if args.seed is not None else 1,
    )
    path = _out_path(args, "instance.json")
    save_instance(inst, path)
    print(
        f"wrote {path}: {inst.graph.n} vertices, {inst.graph.n_edges} edges, "
        f"planted clique {list(inst.planted_clique)} "
        f"(weight {inst.planted_weight:.6f}, attempt {inst.generator_params['attempt']})"
    )
    return 0


def cmd_tune(args: argparse.Namespace) -> int:
    cfg = _cli_config(args)
    graph = resolve_instance(cfg).graph
    enc, state = _tuned(cfg, graph)
    doc = {
        "c": enc.c,
        "alpha": enc.alpha,
        "eta": cfg.eta,
        "target_mean_clicks": cfg.target_mean_clicks,
        "mean_clicks": mean_clicks(state),
        "squeezing": list(enc.squeezing),
        "b_eigenvalues": [float(v) for v in np.linalg.eigvalsh(enc.b_matrix)],
    }
    print(json.dumps(doc, indent=2, sort_keys=True))
    return 0


def cmd_sample(args: argparse.Namespace) -> int:
    cfg = _cli_config(args)
    graph = resolve_instance(cfg).graph
    enc, state = _tuned(cfg, graph)
    n = cfg.n_samples_shrink
    seed = role_seed(cfg.base_seed, "gbs")
    if args.postselect:
        batch = sample_postselected(enc, args.postselect, n, seed)
    else:
        batch = sample_threshold_chain(state, n, seed, threads=cfg.threads)
    path = _out_path(args, "samples.csv")
    save_batch(batch, path)
    clicks = batch.patterns.sum(axis=1)
    print(
        f"wrote {path}: {batch.n_samples} samples, mean clicks "
        f"{clicks.mean():.4f}, zero-click {int((clicks == 0).sum())}"
    )
    return 0


def cmd_solve(args: argparse.Namespace) -> int:
    cfg = _cli_config(args)
    resolved = resolve_instance(cfg)
    enc, state = _tuned(cfg, resolved.graph)
    batch = sample_threshold_chain(
        state, cfg.n_samples_shrink, role_seed(cfg.base_seed, "gbs"),
        threads=cfg.threads,
    )
    result = hybrid_pipeline(
        resolved.graph,
        batch,
        max_steps=cfg.max_steps,
        seed=role_seed(cfg.base_seed, "shrink_gbs"),
        target_weight=resolved.target_weight,
    )
    path = _out_path(args, "solve.csv")
    save_solve_result(result, path)
    rate = result.success_curve[-1] if len(result.success_curve) else 0.0
    print(
        f"wrote {path}: best clique {list(result.best_clique)} "
        f"(weight {result.best_weight:.6f}), success rate {rate:.4f} "
        f"after {cfg.max_steps} steps"
    )
    return 0


def _load_any_graph(path):
    # accept either a bare graph JSON or a planted-instance JSON
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError:
        doc = None
    if isinstance(doc, dict) and "graph" in doc:
        return load_instance(path).graph
    return load_graph(path)


def cmd_oracle(args: argparse.Namespace) -> int:
    if args.graph:
        graph = _load_any_graph(args.graph)
    else:
        graph = resolve_instance(_cli_config(args)).graph
    clique, weight, runner_up = max_weighted_clique_with_runner_up(graph)
    doc = {
        "clique": list(clique),
        "weight": weight,
        "runner_up_weight": runner_up,
        "n_vertices": graph.n,
    }
    print(json.dumps(doc, indent=2, sort_keys=True))
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    cfg = _cli_config(args)
    summary = _BENCH_RUNNERS[args.scenario](cfg)
    out = Path(cfg.out_dir)
    print(f"wrote {out / summary['artifacts']['summary']} (config {summary['config_hash']})")
    if args.scenario == "fig3":
        for src in ("gbs", "classical"):
            d = summary["sources"][src]
            print(f"  {src}: clique yield {d['yield']:.6f}, best weight {d['best_weight']}")
    elif args.scenario == "fig4":
        for src in ("gbs", "classical"):
            d = summary["sources"][src]
            lo, hi = d["wilson95"]
            print(f"  {src}: success rate {d['rate']:.4f} (95% CI {lo:.4f}-{hi:.4f})")
    elif args.scenario == "fig56":
        for src in ("gbs", "classical"):
            curve = summary["curves"][src]
            print(f"  {src}: success {curve[0]:.4f} at k=0, {curve[-1]:.4f} at k={len(curve) - 1}")
    else:
        k0 = summary["k0"]
        print(
            f"  noiseless {k0['noiseless_rate']:.4f}, noisy {k0['noisy_rate']:.4f} "
            f"(within band: {k0['noisy_within_band']})"
        )
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gbsdock",
        description="Maximum weighted clique search with a simulated Gaussian boson sampler.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("build-graph", help="pharmacophore point files to binding graph JSON")
    p.add_argument("--ligand", required=True, metavar="FILE")
    p.add_argument("--receptor", required=True, metavar="FILE")
    p.add_argument("--potential", metavar="FILE", help="pairwise potential CSV (default: shipped table)")
    p.add_argument("--tau", type=float, default=1.0, help="flexibility threshold (default 1.0)")
    p.add_argument("--epsilon", type=float, default=0.5, help="contact slack (default 0.5)")
    p.add_argument("--out", metavar="FILE", help="output path (default OUT_DIR/binding_graph.json)")
    _add_common_options(p)
    p.set_defaults(handler=cmd_build_graph)

    p = subs.add_parser("gen-instance", help="generate an oracle-verified planted instance")
    p.add_argument("--n", type=int, default=24, help="vertex count (default 24)")
    p.add_argument("--clique-size", type=int, default=8, help="planted clique size (default 8)")
    p.add_argument("--density", type=float, default=0.35, help="background edge density (default 0.35)")
    p.add_argument("--profile", default="heavy-core", choices=("heavy-core", "uniform-light"),
                   help="vertex weight profile (default heavy-core)")
    p.add_argument("--out", metavar="FILE", help="output path (default OUT_DIR/instance.json)")
    _add_common_options(p)
    p.set_defaults(handler=cmd_gen_instance)

    p = subs.add_parser("tune", help="tune the encoding scale to the target mean click count")
    _add_common_options(p)
    p.set_defaults(handler=cmd_tune)

    p = subs.add_parser("sample", help="draw threshold detector samples from the tuned device")
    p.add_argument("--postselect", type=int, metavar="N",
                   help="sample exactly-N-click patterns instead of the full distribution")
    p.add_argument("--out", metavar="FILE", help="output path (default OUT_DIR/samples.csv)")
    _add_common_options(p)
    p.set_defaults(handler=cmd_sample)

    p = subs.add_parser("solve", help="run the hybrid shrink/local-search pipeline on device samples")
    p.add_argument("--out", metavar="FILE", help="output path (default OUT_DIR/solve.csv)")
    _add_common_options(p)
    p.set_defaults(handler=cmd_solve)

    p = subs.add_parser("bench", help="run a benchmark scenario end to end")
    p.add_argument("scenario", choices=tuple(_BENCH_RUNNERS))
    _add_common_options(p)
    p.set_defaults(handler=cmd_bench)

    p = subs.add_parser("oracle", help="brute-force maximum weighted clique")
    p.add_argument("--graph", metavar="FILE", help="graph JSON (default: the configured instance)")
    _add_common_options(p)
    p.set_defaults(handler=cmd_oracle)

    return parser


def _report(exc: Exception) -> None:
    print(f"error: {exc}", file=sys.stderr)
    for note in getattr(exc, "__notes__", ()):
        print(f"  {note}", file=sys.stderr)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ValidationError as exc:
        _report(exc)
        return 2
    except NumericalError as exc:
        _report(exc)
        return 3
    except OSError as exc:
        _report(exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
