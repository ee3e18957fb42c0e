"""Clique heuristics over sampled subgraphs: random search, greedy shrinking,
and grow/swap local search, plus the pipeline that chains them.

All three run on any SampleBatch, so GBS and classical sample streams share
one code path. Vertex subsets are manipulated as Python int bitmasks
throughout; graphs stay well under 64 vertices so this is both compact and
fast enough for 1e5-sample campaigns.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from ._validation import as_rng, check_count
from .exceptions import ValidationError
from .graphs import (
    BRUTEFORCE_MAX_VERTICES,
    VertexSet,
    WeightedGraph,
    as_vertex_set,
    clique_weight,
    is_clique,
    max_weighted_clique_with_runner_up,
)
from .samplers import SampleBatch

WEIGHT_TOL = 1e-9

# tie-break jitter so zero-weight vertices keep a nonzero selection probability
_WEIGHT_FLOOR = 1e-9


class RandomSearchRecord(NamedTuple):
    sample: int
    n_clicks: int
    is_clique: bool
    size: int
    weight: float


class PipelineRecord(NamedTuple):
    sample: int
    n_clicks: int
    shrunk_size: int
    shrunk_weight: float
    steps_used: int
    first_success: int  # smallest k with best-so-far weight at target, -1 if never
    sizes: tuple[int, ...]  # clique size after k steps, k = 0..max_steps
    weights: tuple[float, ...]


@dataclass(frozen=True)
class SolveResult:
    """Outcome of a solver run: the champion clique plus per-sample records."""

    best_clique: VertexSet
    best_weight: float
    per_sample_records: tuple
    success_curve: np.ndarray | None
    meta: dict

    def __post_init__(self):
        if self.success_curve is not None:
            curve = np.asarray(self.success_curve, dtype=np.float64)
            curve.flags.writeable = False
            object.__setattr__(self, "success_curve", curve)


def _mask_of(vertices) -> int:
    mask = 0
    for v in vertices:
        mask |= 1 << int(v)
    return mask


def _mask_members(mask: int) -> list[int]:
    out = []
    v = 0
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return out


def _mask_is_clique(mask: int, masks) -> bool:
    m = mask
    while m:
        low = m & (-m)
        v = low.bit_length() - 1
        if masks[v] & mask != mask ^ low:
            return False
        m ^= low
    return True


def random_search(g: WeightedGraph, batch: SampleBatch) -> SolveResult:
    """Keep each sampled subset iff it already is a clique."""
    if batch.n_modes != g.n:
        raise ValidationError(f"batch has {batch.n_modes} modes but graph has {g.n} vertices")
    masks = g.neighbor_masks()
    weights = g.vertex_weights
    records = []
    size_counts: dict[int, int] = {}
    best_w = -1.0
    best_mask = 0
    for i, row in enumerate(batch.patterns):
        verts = np.flatnonzero(row)
        mask = _mask_of(verts)
        ok = _mask_is_clique(mask, masks)
        w = float(weights[verts].sum())
        records.append(RandomSearchRecord(i, len(verts), ok, len(verts), w))
        if ok:
            size_counts[len(verts)] = size_counts.get(len(verts), 0) + 1
            if w > best_w:
                best_w = w
                best_mask = mask
    best = tuple(_mask_members(best_mask)) if best_w >= 0.0 else ()
    return SolveResult(
        best_clique=best,
        best_weight=clique_weight(g, best),
        per_sample_records=tuple(records),
        success_curve=None,
        meta={
            "kind": "random_search",
            "n_samples": batch.n_samples,
            "n_cliques": sum(size_counts.values()),
            "clique_size_counts": {str(k): v for k, v in sorted(size_counts.items())},
            "source": batch.source,
        },
    )


def greedy_shrink(g: WeightedGraph, s, seed) -> VertexSet:
    """Shrink a vertex subset to a clique by repeatedly dropping a vertex of
    minimum degree (then minimum weight, then uniformly at random)."""
    rng = as_rng(seed)
    vs = as_vertex_set(s, g.n)
    masks = g.neighbor_masks()
    weights = g.vertex_weights
    mask = _mask_of(vs)
    while not _mask_is_clique(mask, masks):
        members = _mask_members(mask)
        degs = [(masks[v] & mask).bit_count() for v in members]
        dmin = min(degs)
        pool = [v for v, d in zip(members, degs) if d == dmin]
        wmin = min(weights[v] for v in pool)
        pool = [v for v in pool if weights[v] == wmin]
        drop = pool[int(rng.integers(len(pool)))] if len(pool) > 1 else pool[0]
        mask ^= 1 << drop
    return tuple(_mask_members(mask))


def _weighted_pick(rng: np.random.Generator, candidates: list[int], weights: np.ndarray) -> int:
    w = weights[candidates] + _WEIGHT_FLOOR
    idx = rng.choice(len(candidates), p=w / w.sum())
    return candidates[int(idx)]


def local_search(
    g: WeightedGraph, start, max_steps: int, seed, _trace: list | None = None
) -> tuple[VertexSet, int]:
    """Improve a clique by growing (add a common neighbor, weight-proportional)
    or, when no growth is possible, swapping one member for an outside vertex
    adjacent to all the others. Stops early once neither move exists.
    """
    rng = as_rng(seed)
    max_steps = check_count(max_steps, "max_steps", minimum=0)
    vs = as_vertex_set(start, g.n)
    if not is_clique(g, vs):
        raise ValidationError(f"local search must start from a clique, got {vs}")
    masks = g.neighbor_masks()
    weights = g.vertex_weights
    full = (1 << g.n) - 1
    mask = _mask_of(vs)
    steps = 0
    for _ in range(max_steps):
        common = full & ~mask
        m = mask
        while m and common:
            low = m & (-m)
            common &= masks[low.bit_length() - 1]
            m ^= low
        if common:
            u = _weighted_pick(rng, _mask_members(common), weights)
            mask |= 1 << u
        else:
            swaps = []  # (incoming u, outgoing v): u adjacent to all but v
            outside = full & ~mask
            while outside:
                low = outside & (-outside)
                outside ^= low
                u = low.bit_length() - 1
                missing = mask & ~masks[u]
                if missing != 0 and (missing & (missing - 1)) == 0:
                    swaps.append((u, missing.bit_length() - 1))
            if not swaps:
                break
            preferred = [(u, v) for u, v in swaps if weights[u] >= weights[v]]
            if preferred:
                pick = preferred[_weighted_pick_index(rng, preferred, weights)]
            else:
                pick = swaps[int(rng.integers(len(swaps)))]
            u, v = pick
            mask = (mask | (1 << u)) ^ (1 << v)
        steps += 1
        if _trace is not None:
            _trace.append(mask)
    return tuple(_mask_members(mask)), steps


def _weighted_pick_index(rng: np.random.Generator, pairs: list[tuple[int, int]], weights) -> int:
    w = np.array([weights[u] for u, _ in pairs]) + _WEIGHT_FLOOR
    return int(rng.choice(len(pairs), p=w / w.sum()))


def resolve_target_weight(g: WeightedGraph, target_weight: float | None) -> float:
    """Explicit target, or the brute-force optimum when the graph is small."""
    if target_weight is not None:
        return float(target_weight)
    if g.n > BRUTEFORCE_MAX_VERTICES:
        raise ValidationError(
            f"no target_weight given and the graph has {g.n} > "
            f"{BRUTEFORCE_MAX_VERTICES} vertices, too large for the oracle"
        )
    _, best_w, _ = max_weighted_clique_with_runner_up(g)
    return best_w


def hybrid_pipeline(
    g: WeightedGraph,
    batch: SampleBatch,
    max_steps: int,
    seed,
    target_weight: float | None = None,
) -> SolveResult:
    """Per sample: greedy shrink, then local search, recording when the
    running best first reaches the maximum weighted clique.

    Zero-click samples carry no information and are ignored. The success
    curve is the fraction of usable samples whose best-so-far weight reached
    the target within k steps, k = 0..max_steps; cumulative, so monotone.
    Per-sample randomness comes from a stream derived as (seed, sample index).
    """
    if batch.n_modes != g.n:
        raise ValidationError(f"batch has {batch.n_modes} modes but graph has {g.n} vertices")
    max_steps = check_count(max_steps, "max_steps", minimum=0)
    seed = check_count(seed, "seed", minimum=0)
    target = resolve_target_weight(g, target_weight)
    weights = g.vertex_weights

    first_success_counts = np.zeros(max_steps + 1, dtype=np.int64)
    n_usable = 0
    n_zero = 0
    best_w = -1.0
    best_mask = 0
    records = []
    for i, row in enumerate(batch.patterns):
        verts = np.flatnonzero(row)
        if len(verts) == 0:
            n_zero += 1
            continue
        n_usable += 1
        rng = np.random.default_rng([seed, i])
        start = greedy_shrink(g, verts, rng)
        trace: list[int] = []
        _, steps_used = local_search(g, start, max_steps, rng, _trace=trace)

        # hold the last state for the steps after an early stop
        mask_k = [_mask_of(start)] + trace
        mask_k += [mask_k[-1]] * (max_steps - len(trace))
        weight_k = [float(sum(weights[v] for v in _mask_members(mk))) for mk in mask_k]
        sizes = [mk.bit_count() for mk in mask_k]

        running = -1.0
        first = -1
        for k, (mk, wk) in enumerate(zip(mask_k, weight_k)):
            if wk > running:
                running = wk
                if wk > best_w:
                    best_w = wk
                    best_mask = mk
            if first < 0 and running >= target - WEIGHT_TOL:
                first = k
        if first >= 0:
            first_success_counts[first] += 1
        records.append(
            PipelineRecord(
                sample=i,
                n_clicks=len(verts),
                shrunk_size=len(start),
                shrunk_weight=weight_k[0],
                steps_used=steps_used,
                first_success=first,
                sizes=tuple(sizes),
                weights=tuple(weight_k),
            )
        )
    curve = np.cumsum(first_success_counts) / max(n_usable, 1)
    best = tuple(_mask_members(best_mask)) if best_w >= 0.0 else ()
    return SolveResult(
        best_clique=best,
        best_weight=clique_weight(g, best),
        per_sample_records=tuple(records),
        success_curve=curve,
        meta={
            "kind": "hybrid",
            "n_samples": batch.n_samples,
            "n_usable": n_usable,
            "n_zero_click": n_zero,
            "max_steps": max_steps,
            "target_weight": target,
            "source": batch.source,
        },
    )


def save_solve_result(result: SolveResult, path) -> None:
    """Write per-sample records as CSV and the summary (curve, best clique,
    meta) as a JSON sidecar."""
    path = Path(path)
    kind = result.meta.get("kind", "unknown")
    lines = []
    if kind == "hybrid":
        lines.append("sample,n_clicks,k,size,weight,success")
        target = result.meta["target_weight"]
        for r in result.per_sample_records:
            running = -1.0
            for k, (size, w) in enumerate(zip(r.sizes, r.weights)):
                running = max(running, w)
                hit = int(running >= target - WEIGHT_TOL)
                lines.append(f"{r.sample},{r.n_clicks},{k},{size},{w!r},{hit}")
    elif kind == "random_search":
        lines.append("sample,n_clicks,is_clique,size,weight")
        for r in result.per_sample_records:
            lines.append(f"{r.sample},{r.n_clicks},{int(r.is_clique)},{r.size},{r.weight!r}")
    else:
        raise ValidationError(f"cannot serialize solve result of kind {kind!r}")
    path.write_text("\n".join(lines) + "\n")
    summary = {
        "best_clique": list(result.best_clique),
        "best_weight": result.best_weight,
        "success_curve": None
        if result.success_curve is None
        else [float(x) for x in result.success_curve],
        "meta": result.meta,
    }
    path.with_suffix(".json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
