"""Click-pattern samplers: exact chain-rule device simulation, post-selection
on a fixed click count, and the moment-matched classical baseline.

The chain-rule sampler draws patterns mode by mode. Writing Q = sigma + I/2
in an interleaved (x_0, p_0, x_1, p_1, ...) row ordering, the marginal
probability of a prefix pattern is an inclusion-exclusion sum of vacuum terms
1/sqrt(det Q_T) over the clicked subsets. Jacobi's determinant identity turns
each term into a determinant of a small block of the inverse of the leading
2k x 2k principal submatrix, so the cost per step scales with 2^(clicks so
far) instead of 2^k. The block inverses depend only on the state and are
precomputed once per batch.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numba
import numpy as np

from ._validation import check_count
from .exceptions import DegenerateDistributionError, NumericalError, ValidationError
from .gbs import SAMPLER_MAX_MODES, Encoding, GaussianState, _hafnian_dp, encoding_to_dict

BATCH_SOURCES = ("gbs", "gbs_postselected", "classical")

# enumeration guard for the post-selected sampler
POSTSELECT_MAX_SUBSETS = 10_000_000


@dataclass(frozen=True, eq=False)
class SampleBatch:
    """A block of threshold click patterns plus the seed and provenance behind it."""

    patterns: np.ndarray  # (n_samples, n_modes) uint8, read-only
    seed: int
    source: str
    provenance: dict

    def __post_init__(self):
        p = np.asarray(self.patterns)
        if p.ndim != 2:
            raise ValidationError(f"patterns must be a 2-d array, got shape {p.shape}")
        if p.size and not np.all((p == 0) | (p == 1)):
            raise ValidationError("patterns must contain only 0/1 entries")
        p = np.ascontiguousarray(p, dtype=np.uint8)
        p.flags.writeable = False
        object.__setattr__(self, "patterns", p)
        if self.source not in BATCH_SOURCES:
            raise ValidationError(f"source must be one of {BATCH_SOURCES}, got {self.source!r}")
        if not isinstance(self.seed, (int, np.integer)):
            raise ValidationError("seed must be an integer")
        object.__setattr__(self, "seed", int(self.seed))
        if not isinstance(self.provenance, dict):
            raise ValidationError("provenance must be a dict")

    @property
    def n_samples(self) -> int:
        return self.patterns.shape[0]

    @property
    def n_modes(self) -> int:
        return self.patterns.shape[1]

    def click_counts(self) -> np.ndarray:
        return self.patterns.sum(axis=1, dtype=np.int64)


@numba.njit(cache=True, inline="always")
def _chol_det_inplace(buf, nn):
    # In-place lower Cholesky of the leading nn x nn block; returns the
    # determinant, or -1.0 if the block is not positive definite.
    det = 1.0
    for i in range(nn):
        for j in range(i):
            acc = buf[i, j]
            for t in range(j):
                acc -= buf[i, t] * buf[j, t]
            buf[i, j] = acc / buf[j, j]
        acc = buf[i, i]
        for t in range(i):
            acc -= buf[i, t] * buf[i, t]
        if acc <= 0.0:
            return -1.0
        buf[i, i] = math.sqrt(acc)
        det *= acc
    return det


@numba.njit(cache=True, nogil=True)
def _chain_kernel(g_all, det_all, uniforms, out):
    # General covariance. g_all[k]: inverse of the leading 2(k+1) block of
    # interleaved Q = sigma + I/2, det_all[k]: its determinant. Returns -1 on
    # success, else the index of the sample where a conditional probability
    # left [0, 1] beyond tolerance.
    count, m = uniforms.shape
    buf = np.empty((2 * m, 2 * m))
    rows = np.empty(2 * m, np.int64)
    clicked = np.empty(m, np.int64)
    for s in range(count):
        n_clicked = 0
        p_prefix = 1.0
        for k in range(m):
            det_r = det_all[k]
            g = g_all[k]
            # p0 = P(observed prefix, mode k silent), by inclusion-exclusion
            # over which clicked modes W are deleted from the marginal block.
            p0 = 0.0
            for mask in range(1 << n_clicked):
                nn = 0
                for i in range(n_clicked):
                    if (mask >> i) & 1:
                        mode = clicked[i]
                        rows[nn] = 2 * mode
                        rows[nn + 1] = 2 * mode + 1
                        nn += 2
                for a in range(nn):
                    ra = rows[a]
                    for b in range(a + 1):
                        buf[a, b] = g[ra, rows[b]]
                det_w = _chol_det_inplace(buf, nn)
                if det_w < 0.0:
                    return s
                term = 1.0 / math.sqrt(det_r * det_w)
                if (n_clicked - (nn >> 1)) & 1:
                    p0 -= term
                else:
                    p0 += term
            cond = p0 / p_prefix
            # relative guard at ordinary prefixes plus an absolute floor: on
            # prefixes of probability ~1e-8 the inclusion-exclusion sum hits
            # the float64 cancellation floor (~1e-15 absolute), which is the
            # noise being divided by p_prefix here
            tol = 1e-9 + 1e-12 / p_prefix
            if not (-tol <= cond <= 1.0 + tol):
                return s
            if cond < 0.0:
                cond = 0.0
            elif cond > 1.0:
                cond = 1.0
            if uniforms[s, k] < cond:
                out[s, k] = 0
                p_prefix = p0
            else:
                out[s, k] = 1
                p_prefix -= p0
                clicked[n_clicked] = k
                n_clicked += 1
    return -1


@numba.njit(cache=True, nogil=True)
def _chain_kernel_split(gx_all, gp_all, det_all, uniforms, out):
    # Specialization for states with no x-p correlations: Q factors into an
    # x block and a p block, so each subset determinant is a product of two
    # half-size determinants. det_all[k] = det(Qx_k) * det(Qp_k).
    count, m = uniforms.shape
    bufx = np.empty((m, m))
    bufp = np.empty((m, m))
    rows = np.empty(m, np.int64)
    clicked = np.empty(m, np.int64)
    for s in range(count):
        n_clicked = 0
        p_prefix = 1.0
        for k in range(m):
            det_r = det_all[k]
            gx = gx_all[k]
            gp = gp_all[k]
            p0 = 0.0
            for mask in range(1 << n_clicked):
                nn = 0
                for i in range(n_clicked):
                    if (mask >> i) & 1:
                        rows[nn] = clicked[i]
                        nn += 1
                for a in range(nn):
                    ra = rows[a]
                    for b in range(a + 1):
                        bufx[a, b] = gx[ra, rows[b]]
                        bufp[a, b] = gp[ra, rows[b]]
                det_x = _chol_det_inplace(bufx, nn)
                if det_x < 0.0:
                    return s
                det_p = _chol_det_inplace(bufp, nn)
                if det_p < 0.0:
                    return s
                term = 1.0 / math.sqrt(det_r * det_x * det_p)
                if (n_clicked - nn) & 1:
                    p0 -= term
                else:
                    p0 += term
            cond = p0 / p_prefix
            # same scale-aware guard as the general kernel
            tol = 1e-9 + 1e-12 / p_prefix
            if not (-tol <= cond <= 1.0 + tol):
                return s
            if cond < 0.0:
                cond = 0.0
            elif cond > 1.0:
                cond = 1.0
            if uniforms[s, k] < cond:
                out[s, k] = 0
                p_prefix = p0
            else:
                out[s, k] = 1
                p_prefix -= p0
                clicked[n_clicked] = k
                n_clicked += 1
    return -1


def _leading_inverses(q: np.ndarray, step: int) -> tuple[np.ndarray, np.ndarray]:
    """Inverses and determinants of the leading step*(k+1) blocks of q."""
    n = q.shape[0]
    m = n // step
    g_all = np.zeros((m, n, n))
    det_all = np.zeros(m)
    for k in range(m):
        lead = q[: step * (k + 1), : step * (k + 1)]
        det = float(np.linalg.det(lead))
        if not np.isfinite(det) or det <= 0.0:
            raise NumericalError(f"covariance block for modes 0..{k} has bad determinant {det}")
        det_all[k] = det
        g_all[k, : step * (k + 1), : step * (k + 1)] = np.linalg.inv(lead)
    return g_all, det_all


def _chain_runner(s: GaussianState):
    """Build the per-state tables and return a kernel closure over them."""
    m = s.n_modes
    cov = s.covariance
    if np.max(np.abs(cov[:m, m:])) <= 1e-12:
        # no x-p correlations: work with the two m x m quadrature blocks
        qx = cov[:m, :m] + 0.5 * np.eye(m)
        qp = cov[m:, m:] + 0.5 * np.eye(m)
        gx_all, detx_all = _leading_inverses(qx, 1)
        gp_all, detp_all = _leading_inverses(qp, 1)
        det_all = detx_all * detp_all
        return lambda uniforms, out: _chain_kernel_split(gx_all, gp_all, det_all, uniforms, out)
    q = cov + 0.5 * np.eye(2 * m)
    perm = np.empty(2 * m, dtype=np.int64)
    perm[0::2] = np.arange(m)
    perm[1::2] = m + np.arange(m)
    g_all, det_all = _leading_inverses(q[np.ix_(perm, perm)], 2)
    return lambda uniforms, out: _chain_kernel(g_all, det_all, uniforms, out)


def sample_threshold_chain(
    s: GaussianState,
    count: int,
    seed: int,
    threads: int = 1,
    provenance: dict | None = None,
) -> SampleBatch:
    """Draw exact threshold samples from a Gaussian state, mode by mode.

    Cost per sample grows as 2^(clicks so far), so keep the expected click
    count moderate. Deterministic given (seed, threads): worker w draws its
    uniforms from seed + w and blocks are concatenated in worker order.
    """
    count = check_count(count, "count")
    threads = check_count(threads, "threads")
    seed = check_count(seed, "seed", minimum=0)
    m = s.n_modes
    if m > SAMPLER_MAX_MODES:
        raise ValidationError(f"sampler is guarded at {SAMPLER_MAX_MODES} modes, got {m}")
    kernel = _chain_runner(s)

    threads = min(threads, count)
    base, rem = divmod(count, threads)
    chunk = [base + (1 if w < rem else 0) for w in range(threads)]

    def run_worker(w: int) -> np.ndarray:
        rng = np.random.default_rng(seed + w)
        uniforms = rng.random((chunk[w], m))
        out = np.zeros((chunk[w], m), dtype=np.uint8)
        bad = kernel(uniforms, out)
        if bad >= 0:
            raise NumericalError(
                f"conditional click probability left [0, 1] beyond tolerance "
                f"(sample {bad} of worker {w})"
            )
        return out

    if threads == 1:
        blocks = [run_worker(0)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            blocks = list(pool.map(run_worker, range(threads)))
    if provenance is None:
        provenance = {"kind": "gaussian_state", "n_modes": m}
    return SampleBatch(
        patterns=np.vstack(blocks), seed=seed, source="gbs", provenance=provenance
    )


@numba.njit(cache=True, nogil=True)
def _postselect_weights(adj, omega, n_clicks, n_combos):
    # Enumerate n_clicks-subsets in lexicographic order; weight of subset S is
    # (prod omega_S * Haf(A_S))^2. The spectral scale cancels at fixed size
    # but keeping it makes the weights match the unnormalized distribution.
    m = adj.shape[0]
    weights = np.zeros(n_combos)
    comb = np.empty(n_clicks, np.int64)
    for i in range(n_clicks):
        comb[i] = i
    sub = np.empty((n_clicks, n_clicks))
    for ci in range(n_combos):
        det_omega = 1.0
        for i in range(n_clicks):
            det_omega *= omega[comb[i]]
            for j in range(n_clicks):
                sub[i, j] = adj[comb[i], comb[j]]
        w = det_omega * _hafnian_dp(sub)
        weights[ci] = w * w
        i = n_clicks - 1
        while i >= 0 and comb[i] == m - n_clicks + i:
            i -= 1
        if i < 0:
            break
        comb[i] += 1
        for j in range(i + 1, n_clicks):
            comb[j] = comb[j - 1] + 1
    return weights


def _unrank_combination(rank: int, m: int, k: int) -> list[int]:
    """Lexicographic rank -> sorted k-subset of range(m)."""
    out = []
    x = 0
    for slot in range(k, 0, -1):
        while True:
            reachable = math.comb(m - x - 1, slot - 1)
            if rank < reachable:
                out.append(x)
                x += 1
                break
            rank -= reachable
            x += 1
    return out


def sample_postselected(e: Encoding, n_clicks: int, count: int, seed: int) -> SampleBatch:
    """Sample patterns with a fixed total click count directly.

    Enumerates every n_clicks-vertex subset S, weights it by
    (det Omega_S * Haf(A_S))^2, and samples the resulting categorical
    distribution. Subsets whose induced subgraph has no perfect matching get
    zero weight and never appear.
    """
    n_clicks = check_count(n_clicks, "n_clicks", minimum=0)
    count = check_count(count, "count")
    seed = check_count(seed, "seed", minimum=0)
    m = e.n_modes
    if n_clicks > m:
        raise ValidationError(f"n_clicks = {n_clicks} exceeds the mode count {m}")
    n_combos = math.comb(m, n_clicks)
    if n_combos > POSTSELECT_MAX_SUBSETS:
        raise ValidationError(
            f"C({m}, {n_clicks}) = {n_combos} subsets exceeds the "
            f"{POSTSELECT_MAX_SUBSETS} enumeration guard"
        )
    if n_clicks % 2 == 1:
        raise DegenerateDistributionError(
            "odd click totals have zero probability for a pure squeezed device: "
            "no odd-vertex subgraph has a perfect matching"
        )
    adj = np.ascontiguousarray(e.graph.adjacency)
    omega = np.ascontiguousarray(e.omega)
    weights = _postselect_weights(adj, omega, n_clicks, n_combos)
    total = float(weights.sum())
    if not np.isfinite(total) or total <= 0.0:
        raise DegenerateDistributionError(
            f"every {n_clicks}-vertex subset has hafnian zero; nothing to sample"
        )
    rng = np.random.default_rng(seed)
    chosen = rng.choice(n_combos, size=count, p=weights / total)
    unique, inverse = np.unique(chosen, return_inverse=True)
    decoded = np.zeros((unique.size, n_clicks), dtype=np.int64)
    for row, rank in enumerate(unique):
        decoded[row] = _unrank_combination(int(rank), m, n_clicks)
    patterns = np.zeros((count, m), dtype=np.uint8)
    if n_clicks > 0:
        patterns[np.repeat(np.arange(count), n_clicks), decoded[inverse].ravel()] = 1
    provenance = {"encoding": encoding_to_dict(e), "n_clicks": n_clicks}
    return SampleBatch(
        patterns=patterns, seed=seed, source="gbs_postselected", provenance=provenance
    )


def classical_baseline(
    m: int, mean_n: float, var_n: float, count: int, seed: int
) -> SampleBatch:
    """Moment-matched baseline: subset size from a rounded clamped normal, then
    a uniform random subset of that size."""
    m = check_count(m, "m")
    count = check_count(count, "count")
    seed = check_count(seed, "seed", minimum=0)
    mean_n = float(mean_n)
    var_n = float(var_n)
    if not math.isfinite(mean_n):
        raise ValidationError(f"mean_n must be finite, got {mean_n}")
    if not math.isfinite(var_n) or var_n <= 0.0:
        raise ValidationError(f"var_n must be positive, got {var_n}")
    rng = np.random.default_rng(seed)
    sizes = np.rint(rng.normal(mean_n, math.sqrt(var_n), size=count))
    sizes = np.clip(sizes, 0, m).astype(np.int64)
    perms = rng.permuted(np.tile(np.arange(m), (count, 1)), axis=1)
    keep = np.arange(m)[None, :] < sizes[:, None]
    patterns = np.zeros((count, m), dtype=np.uint8)
    patterns[np.repeat(np.arange(count), sizes), perms[keep]] = 1
    return SampleBatch(
        patterns=patterns,
        seed=seed,
        source="classical",
        provenance={"mean_n": mean_n, "var_n": var_n},
    )


def estimate_moments(batch: SampleBatch) -> tuple[float, float]:
    """Sample mean and unbiased sample variance of the batch's click counts."""
    if batch.n_samples == 0:
        raise ValidationError("cannot estimate click moments from an empty batch")
    counts = batch.click_counts().astype(np.float64)
    mean = float(counts.mean())
    var = float(counts.var(ddof=1)) if counts.size > 1 else 0.0
    return mean, var


def save_batch(batch: SampleBatch, path) -> None:
    """Write a batch as CSV (bitstring + click count per row) plus a JSON sidecar."""
    path = Path(path)
    lines = ["pattern,clicks"]
    for row in batch.patterns:
        bits = "".join("1" if v else "0" for v in row)
        lines.append(f"{bits},{int(row.sum())}")
    path.write_text("\n".join(lines) + "\n")
    sidecar = {
        "n_modes": batch.n_modes,
        "n_samples": batch.n_samples,
        "provenance": batch.provenance,
        "seed": batch.seed,
        "source": batch.source,
    }
    path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")


def load_batch(path) -> SampleBatch:
    """Read a batch written by save_batch (CSV plus JSON sidecar)."""
    path = Path(path)
    meta = json.loads(path.with_suffix(".json").read_text())
    lines = path.read_text().splitlines()
    if not lines or lines[0] != "pattern,clicks":
        raise ValidationError(f"{path} does not look like a sample batch CSV")
    n_modes = int(meta["n_modes"])
    patterns = np.zeros((len(lines) - 1, n_modes), dtype=np.uint8)
    for i, line in enumerate(lines[1:]):
        bits = line.split(",", 1)[0]
        if len(bits) != n_modes:
            raise ValidationError(f"row {i} has {len(bits)} modes, expected {n_modes}")
        patterns[i] = np.frombuffer(bits.encode("ascii"), dtype=np.uint8) - ord("0")
    return SampleBatch(
        patterns=patterns,
        seed=meta["seed"],
        source=meta["source"],
        provenance=meta["provenance"],
    )
