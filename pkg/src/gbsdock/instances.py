"""Synthetic benchmark graphs with a known maximum-weighted clique.

Solver success rates are only meaningful against a graph whose optimum is
certain.  The generator plants a clique on an Erdos-Renyi background, draws
vertex weights so the planted clique should be the strict weight maximum,
and then *proves* optimality with the brute-force oracle before handing the
instance out.  Attempts that produce a heavier or tying competitor are
discarded and redrawn from a fresh sub-seed.

The default shape is 24 vertices with a planted 8-clique whose weight mass
sits on a heavy core of six vertices plus two light ones, totalling about
4.0, which matches the scale of the pharmacophore graphs this package
targets.

Real binding interaction graphs are not a featureless background plus one
clique: geometric consistency produces several mutually overlapping
near-maximum cliques, and heuristic search has to tell them apart.  To
mimic that, a nonzero-density background also carries a few forced "decoy"
cliques of the planted size, each sharing half its vertices with the
planted clique and completing itself from mid-weight background vertices.
Decoys are deliberately slightly lighter than the planted clique (attempts
where one ties or wins are rejected by the oracle check), so they act as
local optima that trap weight-guided local search without ever changing
the ground truth.  A zero-density background stays empty, with no decoys.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._validation import check_count
from .exceptions import InstanceGenerationError, ValidationError
from .graphs import (
    BRUTEFORCE_MAX_VERTICES,
    VertexSet,
    WeightedGraph,
    as_vertex_set,
    graph_from_dict,
    graph_to_dict,
    max_weighted_clique_with_runner_up,
)

MAX_GENERATOR_RETRIES = 100

# generated instances must beat their runner-up by at least this much, so
# that downstream success checks (weight >= target - 1e-9) are unambiguous
UNIQUENESS_MARGIN = 1e-6

WEIGHT_PROFILES = ("heavy-core", "uniform-light")

_HEAVY_RANGE = (0.55, 0.70)
_LIGHT_RANGE = (0.12, 0.22)
_BACKGROUND_RANGE = (0.05, 0.35)
_DECOY_RANGE = (0.20, 0.40)
_UNIFORM_LIGHT_WEIGHT = 0.15
_MAX_DECOYS = 3


@dataclass(frozen=True)
class PlantedInstance:
    """A weighted graph bundled with its oracle-certified optimum."""

    graph: WeightedGraph
    planted_clique: VertexSet
    generator_params: dict

    @property
    def planted_weight(self) -> float:
        return float(self.graph.vertex_weights[list(self.planted_clique)].sum())


def _draw_weights(
    rng: np.random.Generator, n: int, planted: VertexSet, profile: str
) -> np.ndarray:
    if profile == "uniform-light":
        return np.full(n, _UNIFORM_LIGHT_WEIGHT)
    w = rng.uniform(*_BACKGROUND_RANGE, size=n)
    k = len(planted)
    n_heavy = max(k - 2, 1) if k else 0
    order = rng.permutation(k)
    heavy = [planted[i] for i in order[:n_heavy]]
    light = [planted[i] for i in order[n_heavy:]]
    w[heavy] = rng.uniform(*_HEAVY_RANGE, size=len(heavy))
    w[light] = rng.uniform(*_LIGHT_RANGE, size=len(light))
    return w


def _force_clique(a: np.ndarray, members) -> None:
    for x in range(len(members)):
        for y in range(x + 1, len(members)):
            a[members[x], members[y]] = a[members[y], members[x]] = 1.0


def generate_planted_instance(
    n: int = 24,
    clique_size: int = 8,
    edge_density: float = 0.35,
    weight_profile: str = "heavy-core",
    seed: int = 1,
) -> PlantedInstance:
    """Generate a random graph whose maximum-weighted clique is known.

    Draws a background graph at ``edge_density``, forces the planted clique
    edges to exist, and assigns weights per ``weight_profile``:

    - ``"heavy-core"``: planted vertices get a heavy core (all but two of
      them) plus two light members; the background stays lighter on average.
    - ``"uniform-light"``: every vertex gets the same small weight, which on
      dense backgrounds makes ties with competitor cliques unavoidable and
      exercises the rejection path.

    When the background has nonzero density and the planted clique has at
    least four vertices, up to ``_MAX_DECOYS`` decoy cliques of the planted
    size are forced as well.  Each decoy shares half its vertices with the
    planted clique and completes itself from otherwise-unused background
    vertices, whose weights move into the mid-weight decoy range under the
    heavy-core profile.  Decoys give local search competing near-maximum
    cliques to get stuck in, as real contact graphs do.

    Each attempt is checked against the brute-force oracle; the instance is
    returned only if the planted clique is the strict maximum with a margin
    of at least ``UNIQUENESS_MARGIN`` over the runner-up (decoy cliques that
    tie or win therefore force a redraw).  After ``MAX_GENERATOR_RETRIES``
    failed attempts an :class:`InstanceGenerationError` is raised.
    """
    check_count(n, "n")
    check_count(clique_size, "clique_size")
    check_count(seed, "seed", minimum=0)
    if n > BRUTEFORCE_MAX_VERTICES:
        raise ValidationError(
            f"n = {n} exceeds the oracle limit of {BRUTEFORCE_MAX_VERTICES} "
            "vertices; uniqueness could not be certified"
        )
    if clique_size > n:
        raise ValidationError(f"clique_size = {clique_size} exceeds n = {n}")
    if not 0.0 <= edge_density < 1.0:
        raise ValidationError(
            f"edge_density must lie in [0, 1), got {edge_density}"
        )
    if weight_profile not in WEIGHT_PROFILES:
        raise ValidationError(
            f"unknown weight_profile {weight_profile!r}; "
            f"expected one of {WEIGHT_PROFILES}"
        )

    iu = np.triu_indices(n, k=1)
    for attempt in range(MAX_GENERATOR_RETRIES):
        rng = np.random.default_rng([seed, attempt])
        verts = rng.permutation(n)
        planted_arr = np.sort(verts[:clique_size])
        planted = as_vertex_set(planted_arr, n)

        a = np.zeros((n, n))
        a[iu] = rng.random(len(iu[0])) < edge_density
        a = a + a.T
        _force_clique(a, planted_arr)

        w = _draw_weights(rng, n, planted, weight_profile)

        decoys = []
        if edge_density > 0.0 and clique_size >= 4:
            n_shared = clique_size // 2
            n_excl = clique_size - n_shared
            pool = verts[clique_size:]
            n_decoys = min(_MAX_DECOYS, (n - clique_size) // n_excl)
            for j in range(n_decoys):
                shared = rng.choice(planted_arr, size=n_shared, replace=False)
                excl = pool[n_excl * j : n_excl * (j + 1)]
                if weight_profile == "heavy-core":
                    w[excl] = rng.uniform(*_DECOY_RANGE, size=n_excl)
                members = np.concatenate([shared, excl])
                _force_clique(a, members)
                decoys.append(sorted(int(v) for v in members))

        g = WeightedGraph(a, w)
        best, best_weight, runner_up = max_weighted_clique_with_runner_up(g)
        if best == planted and runner_up < best_weight - UNIQUENESS_MARGIN:
            params = {
                "n": n,
                "clique_size": clique_size,
                "edge_density": edge_density,
                "weight_profile": weight_profile,
                "seed": seed,
                "attempt": attempt,
                "planted_weight": best_weight,
                "runner_up_weight": runner_up,
                "decoys": decoys,
            }
            return PlantedInstance(g, planted, params)

    raise InstanceGenerationError(
        f"no instance with a uniquely optimal planted clique found in "
        f"{MAX_GENERATOR_RETRIES} attempts (n={n}, clique_size={clique_size}, "
        f"edge_density={edge_density}, weight_profile={weight_profile!r})"
    )


def instance_to_dict(inst: PlantedInstance) -> dict:
    return {
        "graph": graph_to_dict(inst.graph),
        "planted_clique": list(inst.planted_clique),
        "generator_params": inst.generator_params,
    }


def instance_from_dict(d: dict) -> PlantedInstance:
    for key in ("graph", "planted_clique", "generator_params"):
        if key not in d:
            raise ValidationError(f"instance dict is missing required key {key!r}")
    g = graph_from_dict(d["graph"])
    planted = as_vertex_set(d["planted_clique"], g.n)
    return PlantedInstance(g, planted, dict(d["generator_params"]))


def save_instance(inst: PlantedInstance, path: str | Path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(inst), indent=2) + "\n")


def load_instance(path: str | Path) -> PlantedInstance:
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from exc
    return instance_from_dict(d)
