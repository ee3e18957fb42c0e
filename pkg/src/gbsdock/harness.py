"""Experiment orchestration: configs, instance resolution, benchmark runners.

The harness glues the pipeline together.  It resolves a problem instance
(synthetic planted graph, serialized graph file, or pharmacophore point
sets), tunes the device encoding, draws device and moment-matched classical
sample batches, feeds them to the solvers, and writes plot-ready CSV tables
plus JSON summaries.

Four runners mirror the benchmark suite exposed by the CLI:

- ``run_figure3``: post-selected fixed-click random search, device vs
  uniform classical subsets, binned into a clique count-vs-weight table.
- ``run_figure4``: greedy shrinking on threshold samples, size/weight
  histogram with success rates and Wilson intervals.
- ``run_figure5_6``: success-vs-local-search-steps curves for both sources.
- ``run_noise_study``: the same curves for a lossless device and a lossy
  one re-tuned to the same mean click count.

Every artifact embeds the config hash, base seed, and package version;
reruns with the same config are byte-identical, and a summary sidecar can
be fed back through ``load_config`` to reproduce the run.
"""

from __future__ import annotations

import hashlib
import json
from collections import Counter
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import __version__
from .docking import (
    build_binding_interaction_graph,
    build_labeled_distance_graph,
    load_points,
    load_potential,
)
from .exceptions import ValidationError
from .gbs import (
    GaussianState,
    apply_loss,
    build_encoding,
    mean_clicks,
    state_from_encoding,
    tune_c_for_clicks,
)
from .graphs import (
    BRUTEFORCE_MAX_VERTICES,
    VertexSet,
    WeightedGraph,
    load_graph,
    max_weighted_clique_with_runner_up,
)
from .instances import generate_planted_instance
from .samplers import (
    SampleBatch,
    classical_baseline,
    estimate_moments,
    sample_postselected,
    sample_threshold_chain,
)
from .solvers import WEIGHT_TOL, SolveResult, hybrid_pipeline, random_search

INSTANCE_KINDS = ("synthetic", "graph", "pharmacophore")

# bins below this sample fraction are dropped from the plot table (the raw
# histogram keeps them)
PLOT_FRACTION_FLOOR = 5e-3

_DEFAULT_INSTANCE = {
    "kind": "synthetic",
    "n": 24,
    "clique_size": 8,
    "edge_density": 0.35,
    "weight_profile": "heavy-core",
    "seed": 1,
}

# sub-seed role offsets: every stochastic stage derives its own seed from
# (base_seed, role) so stages stay decoupled and reruns are reproducible
_SEED_ROLES = {
    "fig3_gbs": 11,
    "fig3_classical": 12,
    "pilot": 21,
    "gbs": 22,
    "classical": 23,
    "shrink_gbs": 31,
    "shrink_classical": 32,
    "noisy_gbs": 41,
    "shrink_noisy": 42,
}

# scientific parameters only: knobs that cannot change the numbers (output
# directory, plot emission, thread count) stay out of the hash
_HASH_EXCLUDED_FIELDS = ("out_dir", "emit_gnuplot", "threads")


@dataclass(frozen=True)
class ExperimentConfig:
    """Every knob of a benchmark run, JSON round-trippable."""

    instance: dict = field(default_factory=lambda: dict(_DEFAULT_INSTANCE))
    alpha: float = 1.0
    target_mean_clicks: float = 8.0
    eta: float = 1.0
    noise_eta: float = 0.8
    n_samples_random: int = 100_000
    n_samples_shrink: int = 10_000
    pilot_samples: int = 10_000
    postselect_clicks: int = 8
    max_steps: int = 20
    base_seed: int = 42
    threads: int = 1
    out_dir: str = "results"
    emit_gnuplot: bool = False

    def __post_init__(self) -> None:
        if not isinstance(self.instance, dict):
            raise ValidationError("instance must be a dict with a 'kind' key")
        if self.instance.get("kind") not in INSTANCE_KINDS:
            raise ValidationError(
                f"instance kind must be one of {INSTANCE_KINDS}, "
                f"got {self.instance.get('kind')!r}"
            )
        try:
            frozen = json.loads(json.dumps(self.instance))
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"instance dict is not JSON-serializable: {exc}") from exc
        object.__setattr__(self, "instance", frozen)
        for name in ("alpha", "target_mean_clicks", "eta", "noise_eta"):
            v = float(getattr(self, name))
            if not np.isfinite(v):
                raise ValidationError(f"{name} must be finite, got {v}")
            object.__setattr__(self, name, v)
        if self.alpha < 0.0:
            raise ValidationError(f"alpha must be >= 0, got {self.alpha}")
        if self.target_mean_clicks <= 0.0:
            raise ValidationError(
                f"target_mean_clicks must be > 0, got {self.target_mean_clicks}"
            )
        for name in ("eta", "noise_eta"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ValidationError(f"{name} must lie in (0, 1], got {v}")
        for name in ("n_samples_random", "n_samples_shrink", "pilot_samples", "threads"):
            v = int(getattr(self, name))
            if v < 1:
                raise ValidationError(f"{name} must be >= 1, got {v}")
            object.__setattr__(self, name, v)
        for name in ("postselect_clicks", "max_steps", "base_seed"):
            object.__setattr__(self, name, int(getattr(self, name)))
        if self.postselect_clicks < 2 or self.postselect_clicks % 2:
            raise ValidationError(
                f"postselect_clicks must be a positive even integer, "
                f"got {self.postselect_clicks}"
            )
        if self.max_steps < 0:
            raise ValidationError(f"max_steps must be >= 0, got {self.max_steps}")
        if self.base_seed < 0:
            raise ValidationError(f"base_seed must be >= 0, got {self.base_seed}")
        object.__setattr__(self, "out_dir", str(self.out_dir))
        object.__setattr__(self, "emit_gnuplot", bool(self.emit_gnuplot))

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def hash(self) -> str:
        """Twelve hex chars identifying the scientific parameters."""
        d = {
            k: v
            for k, v in self.to_dict().items()
            if k not in _HASH_EXCLUDED_FIELDS
        }
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:12]


def save_config(config: ExperimentConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n")


def load_config(path: str | Path) -> ExperimentConfig:
    """Read a config JSON; summary sidecars (with a nested "config") work too."""
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(d, dict):
        raise ValidationError(f"{path} does not contain a JSON object")
    if isinstance(d.get("config"), dict) and "instance" in d["config"]:
        d = d["config"]
    return ExperimentConfig.from_dict(d)


class ResolvedInstance(NamedTuple):
    graph: WeightedGraph
    target_clique: VertexSet | None
    target_weight: float | None
    details: dict


def resolve_instance(config: ExperimentConfig) -> ResolvedInstance:
    """Materialize the configured instance and its optimum, if certifiable."""
    params = dict(config.instance)
    kind = params.pop("kind")
    if kind == "synthetic":
        inst = generate_planted_instance(**params)
        details = {"kind": kind, **inst.generator_params}
        return ResolvedInstance(
            inst.graph, inst.planted_clique, inst.planted_weight, details
        )
    if kind == "graph":
        if "path" not in params:
            raise ValidationError("graph instance requires a 'path' key")
        g = load_graph(params["path"])
        details = {"kind": kind, "path": str(params["path"]), "n": g.n, "n_edges": g.n_edges}
    elif kind == "pharmacophore":
        for key in ("ligand", "receptor"):
            if key not in params:
                raise ValidationError(f"pharmacophore instance requires a {key!r} key")
        _, lig_points = load_points(params["ligand"])
        _, rec_points = load_points(params["receptor"])
        potential = load_potential(params["potential"]) if "potential" in params else None
        big = build_binding_interaction_graph(
            build_labeled_distance_graph(lig_points),
            build_labeled_distance_graph(rec_points),
            potential,
            tau=params.get("tau", 1.0),
            epsilon=params.get("epsilon", 0.5),
        )
        g = big.graph
        details = {
            "kind": kind,
            "ligand": str(params["ligand"]),
            "receptor": str(params["receptor"]),
            "tau": big.tau,
            "epsilon": big.epsilon,
            "n": g.n,
            "n_edges": g.n_edges,
        }
    else:  # pragma: no cover - config validation rejects other kinds
        raise ValidationError(f"unknown instance kind {kind!r}")

    if g.n <= BRUTEFORCE_MAX_VERTICES:
        best, best_weight, _ = max_weighted_clique_with_runner_up(g)
        return ResolvedInstance(g, best, best_weight, details)
    return ResolvedInstance(g, None, None, details)


def role_seed(base_seed: int, role: str) -> int:
    """Stable per-stage sub-seed derived from (base_seed, role)."""
    ss = np.random.SeedSequence([int(base_seed), _SEED_ROLES[role]])
    return int(ss.generate_state(1)[0])


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion (default 95%)."""
    if trials < 0 or successes < 0 or successes > trials:
        raise ValidationError(
            f"need 0 <= successes <= trials, got {successes}/{trials}"
        )
    if trials == 0:
        return (0.0, 1.0)
    p = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2.0 * trials)) / denom
    half = z * np.sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials)) / denom
    lo = 0.0 if successes == 0 else max(0.0, center - half)
    hi = 1.0 if successes == trials else min(1.0, center + half)
    return (lo, hi)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    return v


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _provenance_lines(config: ExperimentConfig) -> list[str]:
    return [
        f"# config_hash={config.hash()}",
        f"# base_seed={config.base_seed}",
        f"# version={__version__}",
    ]


def _write_table(path: Path, config: ExperimentConfig, columns, rows) -> None:
    lines = _provenance_lines(config)
    lines.append(",".join(columns))
    lines.extend(",".join(_cell(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def _write_summary(path: Path, config: ExperimentConfig, payload: dict) -> dict:
    doc = {
        "config": config.to_dict(),
        "config_hash": config.hash(),
        "version": __version__,
    }
    doc.update(_jsonable(payload))
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return doc


def _write_gnuplot(path: Path, config: ExperimentConfig, body: str) -> None:
    lines = _provenance_lines(config) + [
        'set datafile separator ","',
        "set key autotitle columnhead",
        body.strip(),
    ]
    path.write_text("\n".join(lines) + "\n")


def _out_dir(config: ExperimentConfig) -> Path:
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _add_context(exc: Exception, runner: str, config: ExperimentConfig) -> None:
    # portable add_note: 3.11+ renders __notes__ in tracebacks, 3.10 keeps
    # them inspectable on the exception object
    note = f"while running {runner} (config {config.hash()})"
    notes = list(getattr(exc, "__notes__", ()))
    notes.append(note)
    exc.__notes__ = notes


def _tuned_state(
    g: WeightedGraph, config: ExperimentConfig, eta: float
) -> tuple[GaussianState, float]:
    enc = tune_c_for_clicks(g, config.alpha, config.target_mean_clicks, eta)
    state = apply_loss(state_from_encoding(enc), eta)
    return state, enc.c


def _matched_batches(
    g: WeightedGraph,
    state: GaussianState,
    config: ExperimentConfig,
    pilot_role: str,
    gbs_role: str,
    classical_role: str,
) -> tuple[SampleBatch, SampleBatch, float, float]:
    """Device batch plus a classical batch matched to its click moments."""
    pilot = sample_threshold_chain(
        state,
        config.pilot_samples,
        role_seed(config.base_seed, pilot_role),
        threads=config.threads,
    )
    mean, var = estimate_moments(pilot)
    gbs = sample_threshold_chain(
        state,
        config.n_samples_shrink,
        role_seed(config.base_seed, gbs_role),
        threads=config.threads,
    )
    classical = classical_baseline(
        g.n,
        mean,
        max(var, 1e-12),
        config.n_samples_shrink,
        role_seed(config.base_seed, classical_role),
    )
    return gbs, classical, float(mean), float(var)


def _curve_over_total(result: SolveResult, n_total: int) -> np.ndarray:
    """Success curve with the full batch (zero-click rows included) as denominator."""
    factor = result.meta["n_usable"] / n_total if n_total else 0.0
    return np.asarray(result.success_curve, dtype=float) * factor


def _successes_at(result: SolveResult, k: int) -> int:
    return sum(1 for r in result.per_sample_records if 0 <= r.first_success <= k)


def run_figure3(config: ExperimentConfig) -> dict:
    """Fixed-click random search: device vs uniform classical subsets.

    Post-selects device samples on exactly ``postselect_clicks`` clicks and
    draws equally many fixed-size uniform subsets; every sampled subset that
    is a clique lands in a (size, weight) bin.  The summary reports the
    clique yield of both sources and whether the certified maximum-weight
    clique was ever sampled.
    """
    try:
        return _run_figure3(config)
    except Exception as exc:
        _add_context(exc, "fig3", config)
        raise


def _run_figure3(config: ExperimentConfig) -> dict:
    g, _, target_weight, details = resolve_instance(config)
    enc = build_encoding(g, config.alpha)
    n = config.n_samples_random
    gbs_batch = sample_postselected(
        enc, config.postselect_clicks, n, role_seed(config.base_seed, "fig3_gbs")
    )
    classical_batch = classical_baseline(
        g.n,
        float(config.postselect_clicks),
        1e-18,
        n,
        role_seed(config.base_seed, "fig3_classical"),
    )

    rows = []
    sources = {}
    for name, batch in (("gbs", gbs_batch), ("classical", classical_batch)):
        result = random_search(g, batch)
        bins = Counter(
            (r.size, r.weight) for r in result.per_sample_records if r.is_clique
        )
        for (size, weight), count in sorted(bins.items()):
            rows.append((name, size, weight, count))
        n_cliques = result.meta["n_cliques"]
        found = (
            bool(result.best_weight >= target_weight - WEIGHT_TOL)
            if target_weight is not None
            else None
        )
        sources[name] = {
            "n_cliques": n_cliques,
            "yield": n_cliques / n,
            "best_weight": result.best_weight,
            "best_clique": list(result.best_clique),
            "found_target": found,
            "clique_size_counts": result.meta["clique_size_counts"],
        }

    out = _out_dir(config)
    _write_table(
        out / "fig3_histogram.csv", config, ("source", "size", "weight", "count"), rows
    )
    cls_yield = sources["classical"]["yield"]
    payload = {
        "kind": "fig3",
        "instance": details,
        "target_weight": target_weight,
        "postselect_clicks": config.postselect_clicks,
        "n_samples": n,
        "encoding_c": enc.c,
        "sources": sources,
        "yield_ratio": (sources["gbs"]["yield"] / cls_yield) if cls_yield else None,
        "artifacts": {"histogram": "fig3_histogram.csv", "summary": "fig3_summary.json"},
    }
    if config.emit_gnuplot:
        payload["artifacts"]["gnuplot"] = "fig3.gp"
        _write_gnuplot(
            out / "fig3.gp",
            config,
            'set xlabel "clique weight"\n'
            'set ylabel "count"\n'
            'plot "fig3_histogram.csv" '
            'using (stringcolumn(1) eq "gbs" ? $3 : 1/0):4 '
            'with impulses title "gbs", '
            '"" using (stringcolumn(1) eq "classical" ? $3 : 1/0):4 '
            'with impulses title "classical"',
        )
    return _write_summary(out / "fig3_summary.json", config, payload)


def run_figure4(config: ExperimentConfig) -> dict:
    """Greedy shrinking histogram on threshold samples, device vs classical.

    Tunes the device to the target mean click count, shrinks every sample to
    a clique, and bins the results by (size, weight).  Bins below
    ``PLOT_FRACTION_FLOOR`` of the batch are dropped from the plot table but
    kept in the raw histogram.  The summary reports the rate at which each
    source shrinks onto the certified optimum, with Wilson 95% intervals.
    """
    try:
        return _run_figure4(config)
    except Exception as exc:
        _add_context(exc, "fig4", config)
        raise


def _run_figure4(config: ExperimentConfig) -> dict:
    g, _, target_weight, details = resolve_instance(config)
    state, tuned_c = _tuned_state(g, config, config.eta)
    gbs_batch, classical_batch, pilot_mean, pilot_var = _matched_batches(
        g, state, config, "pilot", "gbs", "classical"
    )
    n = config.n_samples_shrink

    raw_rows = []
    plot_rows = []
    sources = {}
    for name, batch, shrink_role in (
        ("gbs", gbs_batch, "shrink_gbs"),
        ("classical", classical_batch, "shrink_classical"),
    ):
        result = hybrid_pipeline(
            g,
            batch,
            max_steps=0,
            seed=role_seed(config.base_seed, shrink_role),
            target_weight=target_weight,
        )
        bins = Counter(
            (r.shrunk_size, r.shrunk_weight) for r in result.per_sample_records
        )
        n_zero = result.meta["n_zero_click"]
        if n_zero:
            bins[(0, 0.0)] += n_zero
        modal_bin = None
        for (size, weight), count in sorted(bins.items()):
            fraction = count / n
            raw_rows.append((name, size, weight, count, fraction))
            if fraction >= PLOT_FRACTION_FLOOR:
                plot_rows.append((name, size, weight, count, fraction))
            if modal_bin is None or count > modal_bin["count"]:
                modal_bin = {"size": size, "weight": weight, "count": count}
        successes = _successes_at(result, 0)
        lo, hi = wilson_interval(successes, n)
        sources[name] = {
            "successes": successes,
            "rate": successes / n,
            "wilson95": [lo, hi],
            "n_zero_click": n_zero,
            "modal_bin": modal_bin,
            "best_weight": result.best_weight,
        }

    out = _out_dir(config)
    columns = ("source", "size", "weight", "count", "fraction")
    _write_table(out / "fig4_histogram.csv", config, columns, raw_rows)
    _write_table(out / "fig4_plot.csv", config, columns, plot_rows)
    cls_rate = sources["classical"]["rate"]
    payload = {
        "kind": "fig4",
        "instance": details,
        "target_weight": target_weight,
        "tuned_c": tuned_c,
        "eta": config.eta,
        "achieved_mean_clicks": mean_clicks(state),
        "pilot": {
            "mean": pilot_mean,
            "var": pilot_var,
            "n_samples": config.pilot_samples,
        },
        "n_samples": n,
        "sources": sources,
        "rate_ratio": (sources["gbs"]["rate"] / cls_rate) if cls_rate else None,
        "artifacts": {
            "histogram": "fig4_histogram.csv",
            "plot": "fig4_plot.csv",
            "summary": "fig4_summary.json",
        },
    }
    if config.emit_gnuplot:
        payload["artifacts"]["gnuplot"] = "fig4.gp"
        _write_gnuplot(
            out / "fig4.gp",
            config,
            'set xlabel "clique weight"\n'
            'set ylabel "fraction of samples"\n'
            'plot "fig4_plot.csv" '
            'using (stringcolumn(1) eq "gbs" ? $3 : 1/0):5 '
            'with impulses title "gbs", '
            '"" using (stringcolumn(1) eq "classical" ? $3 : 1/0):5 '
            'with impulses title "classical"',
        )
    return _write_summary(out / "fig4_summary.json", config, payload)


def run_figure5_6(config: ExperimentConfig) -> dict:
    """Success-vs-steps curves: shrink plus k local-search steps, both sources.

    Every sample is shrunk to a clique and then expanded for up to
    ``max_steps`` local-search steps; the curve reports the fraction of the
    batch that has reached the certified maximum weight by step k.
    """
    try:
        return _run_figure5_6(config)
    except Exception as exc:
        _add_context(exc, "fig56", config)
        raise


def _run_figure5_6(config: ExperimentConfig) -> dict:
    g, _, target_weight, details = resolve_instance(config)
    state, tuned_c = _tuned_state(g, config, config.eta)
    gbs_batch, classical_batch, pilot_mean, pilot_var = _matched_batches(
        g, state, config, "pilot", "gbs", "classical"
    )
    n = config.n_samples_shrink

    curves = {}
    zero_clicks = {}
    best_weights = {}
    for name, batch, shrink_role in (
        ("gbs", gbs_batch, "shrink_gbs"),
        ("classical", classical_batch, "shrink_classical"),
    ):
        result = hybrid_pipeline(
            g,
            batch,
            max_steps=config.max_steps,
            seed=role_seed(config.base_seed, shrink_role),
            target_weight=target_weight,
        )
        curves[name] = _curve_over_total(result, n)
        zero_clicks[name] = result.meta["n_zero_click"]
        best_weights[name] = result.best_weight

    out = _out_dir(config)
    rows = [
        (k, curves["gbs"][k], curves["classical"][k])
        for k in range(config.max_steps + 1)
    ]
    _write_table(out / "fig56_curves.csv", config, ("k", "gbs", "classical"), rows)
    payload = {
        "kind": "fig56",
        "instance": details,
        "target_weight": target_weight,
        "tuned_c": tuned_c,
        "eta": config.eta,
        "achieved_mean_clicks": mean_clicks(state),
        "pilot": {
            "mean": pilot_mean,
            "var": pilot_var,
            "n_samples": config.pilot_samples,
        },
        "n_samples": n,
        "max_steps": config.max_steps,
        "curves": curves,
        "zero_clicks": zero_clicks,
        "best_weights": best_weights,
        "artifacts": {"curves": "fig56_curves.csv", "summary": "fig56_summary.json"},
    }
    if config.emit_gnuplot:
        payload["artifacts"]["gnuplot"] = "fig56.gp"
        _write_gnuplot(
            out / "fig56.gp",
            config,
            'set xlabel "local search steps k"\n'
            'set ylabel "success rate"\n'
            'plot "fig56_curves.csv" using 1:2 with linespoints, '
            '"" using 1:3 with linespoints',
        )
    return _write_summary(out / "fig56_summary.json", config, payload)


def run_noise_study(config: ExperimentConfig) -> dict:
    """Success curves for a lossless device vs a lossy one, re-tuned.

    The lossy device (transmission ``noise_eta``) is re-tuned to the same
    target mean click count before sampling, so the comparison isolates the
    effect of noise on sample quality rather than on brightness.  The
    classical baseline is moment-matched to the lossless pilot batch.
    """
    try:
        return _run_noise_study(config)
    except Exception as exc:
        _add_context(exc, "noise", config)
        raise


def _run_noise_study(config: ExperimentConfig) -> dict:
    g, _, target_weight, details = resolve_instance(config)
    n = config.n_samples_shrink

    clean_state, clean_c = _tuned_state(g, config, 1.0)
    gbs_batch, classical_batch, pilot_mean, pilot_var = _matched_batches(
        g, clean_state, config, "pilot", "gbs", "classical"
    )
    noisy_state, noisy_c = _tuned_state(g, config, config.noise_eta)
    noisy_batch = sample_threshold_chain(
        noisy_state,
        n,
        role_seed(config.base_seed, "noisy_gbs"),
        threads=config.threads,
    )

    curves = {}
    results = {}
    for name, batch, shrink_role in (
        ("gbs_noiseless", gbs_batch, "shrink_gbs"),
        ("gbs_noisy", noisy_batch, "shrink_noisy"),
        ("classical", classical_batch, "shrink_classical"),
    ):
        result = hybrid_pipeline(
            g,
            batch,
            max_steps=config.max_steps,
            seed=role_seed(config.base_seed, shrink_role),
            target_weight=target_weight,
        )
        curves[name] = _curve_over_total(result, n)
        results[name] = result

    clean_k0 = _successes_at(results["gbs_noiseless"], 0)
    lo, hi = wilson_interval(clean_k0, n)
    noisy_rate = _successes_at(results["gbs_noisy"], 0) / n

    out = _out_dir(config)
    rows = [
        (k, curves["gbs_noiseless"][k], curves["gbs_noisy"][k], curves["classical"][k])
        for k in range(config.max_steps + 1)
    ]
    _write_table(
        out / "noise_curves.csv",
        config,
        ("k", "gbs_noiseless", "gbs_noisy", "classical"),
        rows,
    )
    payload = {
        "kind": "noise",
        "instance": details,
        "target_weight": target_weight,
        "etas": {"noiseless": 1.0, "noisy": config.noise_eta},
        "tuned_c": {"noiseless": clean_c, "noisy": noisy_c},
        "achieved_mean_clicks": {
            "noiseless": mean_clicks(clean_state),
            "noisy": mean_clicks(noisy_state),
        },
        "pilot": {
            "mean": pilot_mean,
            "var": pilot_var,
            "n_samples": config.pilot_samples,
        },
        "n_samples": n,
        "max_steps": config.max_steps,
        "curves": curves,
        "zero_clicks": {k: r.meta["n_zero_click"] for k, r in results.items()},
        "k0": {
            "noiseless_rate": clean_k0 / n,
            "noiseless_wilson95": [lo, hi],
            "noisy_rate": noisy_rate,
            "noisy_within_band": bool(lo <= noisy_rate <= hi),
        },
        "artifacts": {"curves": "noise_curves.csv", "summary": "noise_summary.json"},
    }
    if config.emit_gnuplot:
        payload["artifacts"]["gnuplot"] = "noise.gp"
        _write_gnuplot(
            out / "noise.gp",
            config,
            'set xlabel "local search steps k"\n'
            'set ylabel "success rate"\n'
            'plot "noise_curves.csv" using 1:2 with linespoints, '
            '"" using 1:3 with linespoints, "" using 1:4 with linespoints',
        )
    return _write_summary(out / "noise_summary.json", config, payload)
