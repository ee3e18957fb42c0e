"""Graph-to-device encodings and Gaussian state simulation with threshold
detectors.

A vertex-weighted graph is programmed onto a simulated squeezed-light
sampler: the graph Laplacian D - A is scaled on both sides by a diagonal
matrix Omega with entries c * (1 + alpha * w_j), giving a real symmetric
matrix B whose eigenvalues tanh(r_j) fix the mode squeezing. Sampling the
resulting state with threshold (click / no-click) detectors favours vertex
subsets whose induced subgraph has many perfect matchings and heavy vertex
weights, which is what makes the machine a clique proposer.

Covariance convention: real 2M x 2M matrices over quadratures ordered
(x_1..x_M, p_1..p_M), vacuum = I/2, zero displacement throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from ._validation import check_symmetric, readonly
from .exceptions import EncodingError, NumericalError, ValidationError
from .graphs import WeightedGraph, laplacian

HAFNIAN_MAX_DIM = 24
SAMPLER_MAX_MODES = 30

_EIGENVALUE_CEILING = 1.0 - 1e-6


@numba.njit(cache=True)
def _hafnian_dp(a):
    # Recursive expansion along the first remaining row, memoized over index
    # subsets: f[mask] = sum_j a[i, j] * f[mask - {i, j}] with i = min(mask).
    n = a.shape[0]
    size = np.int64(1) << n
    f = np.zeros(size)
    f[0] = 1.0
    for mask in range(2, size):
        m = np.int64(mask)
        i = 0
        while ((m >> i) & 1) == 0:
            i += 1
        rest = m ^ (np.int64(1) << i)
        if rest == 0:
            continue
        acc = 0.0
        for j in range(i + 1, n):
            if (rest >> j) & 1:
                acc += a[i, j] * f[rest ^ (np.int64(1) << j)]
        f[m] = acc
    return f[size - 1]


def hafnian(a: np.ndarray) -> float:
    """Hafnian of a symmetric even-dimensional matrix.

    Sum over all perfect matchings of {1..2N} of the product of matched
    entries; the diagonal never contributes. The empty (0 x 0) matrix has
    hafnian 1. Cost is O(2^(2N) * N) time and O(2^(2N)) memory, guarded at
    dimension 24.
    """
    a = check_symmetric(a, "matrix", tol=1e-9)
    n = a.shape[0]
    if n % 2 != 0:
        raise ValidationError(f"hafnian needs an even-dimensional matrix, got {n}x{n}")
    if n > HAFNIAN_MAX_DIM:
        raise ValidationError(f"hafnian is guarded at dimension {HAFNIAN_MAX_DIM}, got {n}")
    if n == 0:
        return 1.0
    return float(_hafnian_dp(np.ascontiguousarray(a)))


def spectral_c_bound(g: WeightedGraph, omega_raw: np.ndarray) -> float:
    """Largest scale c such that B = (c*omega) (D - A) (c*omega) keeps its
    spectrum inside [0, c]: c = 1 / (2 * max_j d_j * omega_j^2).

    Zero-degree vertices contribute nothing to B and are excluded from the
    max; an edgeless graph returns +inf (any scale works, B = 0).
    """
    omega_raw = np.asarray(omega_raw, dtype=np.float64).reshape(-1)
    if omega_raw.shape[0] != g.n:
        raise ValidationError(f"expected {g.n} omega entries, got {omega_raw.shape[0]}")
    if not np.all(np.isfinite(omega_raw)) or np.any(omega_raw <= 0.0):
        raise ValidationError("omega entries must be positive and finite")
    d = g.adjacency.sum(axis=1)
    active = d > 0
    if not np.any(active):
        return math.inf
    return float(1.0 / (2.0 * np.max(d[active] * omega_raw[active] ** 2)))


@dataclass(frozen=True, eq=False)
class Encoding:
    """A graph programmed for the sampler.

    omega is the diagonal of the full scaling matrix (c * (1 + alpha * w)),
    b_matrix = Omega (D - A) Omega, and squeezing holds r_j = atanh(lambda_j)
    for the ascending eigenvalues lambda_j of b_matrix. All eigenvalues lie
    in [0, 1).
    """

    graph: WeightedGraph
    omega: np.ndarray
    alpha: float
    c: float
    b_matrix: np.ndarray
    squeezing: np.ndarray

    def __post_init__(self) -> None:
        if not 0.0 < self.c < 1.0:
            raise ValidationError(f"c must lie in (0, 1), got {self.c}")
        if self.alpha < 0.0:
            raise ValidationError(f"alpha must be >= 0, got {self.alpha}")
        object.__setattr__(self, "omega", readonly(np.asarray(self.omega)))
        object.__setattr__(self, "b_matrix", readonly(check_symmetric(self.b_matrix, "b_matrix")))
        object.__setattr__(self, "squeezing", readonly(np.asarray(self.squeezing)))

    @property
    def n_modes(self) -> int:
        return self.b_matrix.shape[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.tanh(self.squeezing)


def build_encoding(g: WeightedGraph, alpha: float = 1.0, target_c: float | None = None) -> Encoding:
    """Program a graph: Omega = c (1 + alpha w) on the diagonal, B = Omega L Omega.

    With target_c omitted, c is the spectral bound capped just below 1, which
    guarantees the spectrum of B stays in [0, c]. An explicit target_c in
    (0, 1) is honoured but rejected if it pushes an eigenvalue of B to 1 or
    beyond.
    """
    if alpha < 0.0 or not np.isfinite(alpha):
        raise ValidationError(f"alpha must be >= 0 and finite, got {alpha}")
    omega_raw = 1.0 + alpha * g.vertex_weights
    if target_c is None:
        c = min(spectral_c_bound(g, omega_raw), _EIGENVALUE_CEILING)
    else:
        c = float(target_c)
        if not 0.0 < c < 1.0:
            raise ValidationError(f"target_c must lie in (0, 1), got {c}")
    omega = c * omega_raw
    b = omega[:, None] * laplacian(g) * omega[None, :]
    b = (b + b.T) / 2.0
    evals = np.linalg.eigvalsh(b)
    if evals[0] < -1e-9:
        raise NumericalError(f"encoding matrix lost positive semidefiniteness: min eigenvalue {evals[0]}")
    if evals[-1] >= 1.0:
        raise EncodingError(
            f"c={c} drives an eigenvalue of B to {evals[-1]:.6f} >= 1; no squeezing realizes it"
        )
    squeezing = np.arctanh(np.clip(evals, 0.0, None))
    return Encoding(graph=g, omega=omega, alpha=float(alpha), c=c, b_matrix=b, squeezing=squeezing)


@dataclass(frozen=True, eq=False)
class GaussianState:
    """Zero-mean Gaussian state given by its quadrature covariance matrix.

    The covariance is 2M x 2M over (x_1..x_M, p_1..p_M) with vacuum = I/2.
    Construction checks symmetry and the uncertainty bound
    sigma + i J / 2 >= 0.
    """

    covariance: np.ndarray

    def __post_init__(self) -> None:
        s = check_symmetric(self.covariance, "covariance", tol=1e-8)
        if s.shape[0] % 2 != 0 or s.shape[0] == 0:
            raise ValidationError(f"covariance must be 2M x 2M with M >= 1, got {s.shape}")
        m = s.shape[0] // 2
        j = np.zeros_like(s)
        j[:m, m:] = np.eye(m)
        j[m:, :m] = -np.eye(m)
        herm = s + 0.5j * j
        min_eig = float(np.linalg.eigvalsh(herm)[0])
        if min_eig < -1e-9:
            raise ValidationError(f"covariance violates the uncertainty bound: min eig {min_eig}")
        object.__setattr__(self, "covariance", readonly(s))

    @property
    def n_modes(self) -> int:
        return self.covariance.shape[0] // 2


def vacuum_state(n_modes: int) -> GaussianState:
    return GaussianState(np.eye(2 * n_modes) / 2.0)


def symplectic_eigenvalues(s: GaussianState) -> np.ndarray:
    m = s.n_modes
    j = np.zeros((2 * m, 2 * m))
    j[:m, m:] = np.eye(m)
    j[m:, :m] = -np.eye(m)
    ev = np.linalg.eigvals(j @ s.covariance)
    return np.sort(np.abs(ev))[::2]


def state_from_encoding(e: Encoding) -> GaussianState:
    """Pure squeezed state realizing the encoding.

    Solves sigma from the device matrix relation with the doubled block
    B (+) B: sigma = (I - X [B (+) B])^{-1} - I/2 in the mode-operator
    ordering, then rotates to quadratures. For real B the result is block
    diagonal: sigma_xx = (I - B)^{-1} - I/2, sigma_pp = (I + B)^{-1} - I/2.
    """
    b = e.b_matrix
    m = b.shape[0]
    cal_a = np.block([[b, np.zeros_like(b)], [np.zeros_like(b), b]])
    x = np.block([[np.zeros((m, m)), np.eye(m)], [np.eye(m), np.zeros((m, m))]])
    k = np.eye(2 * m) - x @ cal_a
    try:
        sigma_ops = np.linalg.inv(k) - np.eye(2 * m) / 2.0
    except np.linalg.LinAlgError as exc:
        raise EncodingError("I - X(B (+) B) is singular: some eigenvalue of B equals 1") from exc
    eye = np.eye(m)
    rot = np.block([[eye, eye], [-1j * eye, 1j * eye]]) / math.sqrt(2.0)
    sigma = rot @ sigma_ops @ rot.conj().T
    if np.max(np.abs(sigma.imag)) > 1e-9:
        raise NumericalError("covariance acquired an imaginary part beyond tolerance")
    sigma = sigma.real
    state = GaussianState((sigma + sigma.T) / 2.0)
    nu = symplectic_eigenvalues(state)
    if np.max(np.abs(nu - 0.5)) > 1e-7:
        raise NumericalError(f"encoded state is not pure: symplectic spectrum {nu}")
    return state


def apply_loss(s: GaussianState, eta: float) -> GaussianState:
    """Uniform photon loss: sigma -> eta sigma + (1 - eta) I/2, eta in (0, 1]."""
    eta = float(eta)
    if not 0.0 < eta <= 1.0:
        raise ValidationError(f"transmission eta must lie in (0, 1], got {eta}")
    dim = s.covariance.shape[0]
    return GaussianState(eta * s.covariance + (1.0 - eta) * np.eye(dim) / 2.0)


def _mode_indices(modes, n_modes: int) -> np.ndarray:
    modes = [int(v) for v in modes]
    if len(set(modes)) != len(modes):
        raise ValidationError("mode list contains duplicates")
    for v in modes:
        if not 0 <= v < n_modes:
            raise ValidationError(f"mode {v} out of range for {n_modes} modes")
    return np.array(modes + [n_modes + v for v in modes], dtype=np.intp)


def reduced_covariance(s: GaussianState, modes) -> np.ndarray:
    idx = _mode_indices(modes, s.n_modes)
    return s.covariance[np.ix_(idx, idx)]


def vacuum_probability(s: GaussianState, modes=None) -> float:
    """Probability that every listed mode (default: all) shows no photons:
    1 / sqrt(det(sigma_T + I/2)) on the reduced covariance."""
    if modes is None:
        modes = range(s.n_modes)
    modes = list(modes)
    if not modes:
        return 1.0
    q = reduced_covariance(s, modes) + np.eye(2 * len(modes)) / 2.0
    det = float(np.linalg.det(q))
    if det <= 0.0:
        raise NumericalError(f"vacuum overlap determinant is not positive: {det}")
    return 1.0 / math.sqrt(det)


def threshold_probability(s: GaussianState, pattern) -> float:
    """Probability of a click / no-click pattern under threshold detection.

    Inclusion-exclusion over the clicked set: sum over subsets Z of the
    clicked modes of (-1)^|Z| times the vacuum probability of Z united with
    the unclicked modes. Tiny negative round-off (above -1e-10) clips to 0.
    """
    pattern = np.asarray(pattern).reshape(-1)
    if pattern.shape[0] != s.n_modes:
        raise ValidationError(f"pattern length {pattern.shape[0]} != mode count {s.n_modes}")
    if not np.all((pattern == 0) | (pattern == 1)):
        raise ValidationError("pattern entries must be 0 or 1")
    clicked = [int(v) for v in np.flatnonzero(pattern == 1)]
    unclicked = [int(v) for v in np.flatnonzero(pattern == 0)]
    total = 0.0
    for z_mask in range(1 << len(clicked)):
        z = [clicked[i] for i in range(len(clicked)) if (z_mask >> i) & 1]
        sign = -1.0 if len(z) % 2 else 1.0
        total += sign * vacuum_probability(s, z + unclicked)
    if total < -1e-10:
        raise NumericalError(f"threshold probability fell below the numerical floor: {total}")
    return max(total, 0.0)


def mean_clicks(s: GaussianState) -> float:
    """Expected number of clicking detectors: M - sum_j p_vac(mode j)."""
    return s.n_modes - sum(vacuum_probability(s, [j]) for j in range(s.n_modes))


def mean_photon_number(s: GaussianState) -> float:
    m = s.n_modes
    d = np.diag(s.covariance)
    return float((d[:m] + d[m:] - 1.0).sum() / 2.0)


def tune_c_for_clicks(
    g: WeightedGraph,
    alpha: float,
    target_clicks: float,
    eta: float = 1.0,
    tol: float = 1e-3,
) -> Encoding:
    """Bisect the spectral scale c until the encoded state (after loss eta)
    has expected click count within tol of target_clicks.

    The mean click count grows monotonically with c; the search space is
    (0, c_max) with c_max keeping every eigenvalue of B below 1 - 1e-6. If
    even c_max cannot reach the target, the error reports the maximum
    achievable mean.
    """
    if not 0.0 < eta <= 1.0:
        raise ValidationError(f"transmission eta must lie in (0, 1], got {eta}")
    target = float(target_clicks)
    if not 0.0 < target < g.n:
        raise ValidationError(f"target clicks must lie in (0, n_modes={g.n}), got {target}")
    if alpha < 0.0 or not np.isfinite(alpha):
        raise ValidationError(f"alpha must be >= 0 and finite, got {alpha}")

    omega_raw = 1.0 + alpha * g.vertex_weights
    base = omega_raw[:, None] * laplacian(g) * omega_raw[None, :]
    base = (base + base.T) / 2.0
    mu, vecs = np.linalg.eigh(base)
    mu = np.clip(mu, 0.0, None)
    mu_max = float(mu[-1])
    v2 = vecs**2

    def clicks_at(c: float) -> float:
        lam = c * c * mu
        dxx = v2 @ (1.0 / (1.0 - lam)) - 0.5
        dpp = v2 @ (1.0 / (1.0 + lam)) - 0.5
        dxx = eta * dxx + (1.0 - eta) * 0.5
        dpp = eta * dpp + (1.0 - eta) * 0.5
        pvac = 1.0 / np.sqrt((dxx + 0.5) * (dpp + 0.5))
        return float(g.n - pvac.sum())

    if mu_max <= 0.0:
        raise EncodingError(
            f"target {target} unreachable: graph has no edges, maximum achievable mean clicks is 0"
        )
    c_max = math.sqrt(_EIGENVALUE_CEILING / mu_max)
    n_hi = clicks_at(c_max)
    if n_hi < target - tol:
        raise EncodingError(
            f"target {target} unreachable below the eigenvalue ceiling; "
            f"maximum achievable mean clicks is {n_hi:.6f}"
        )
    lo, hi = 0.0, c_max
    n_lo = 0.0
    for _ in range(200):
        mid = (lo + hi) / 2.0
        n_mid = clicks_at(mid)
        if not n_lo - 1e-9 <= n_mid <= n_hi + 1e-9:
            raise NumericalError(
                f"mean clicks failed to grow monotonically in c: N({lo})={n_lo}, "
                f"N({mid})={n_mid}, N({hi})={n_hi}"
            )
        if abs(n_mid - target) <= tol:
            return build_encoding(g, alpha=alpha, target_c=mid)
        if n_mid < target:
            lo, n_lo = mid, n_mid
        else:
            hi, n_hi = mid, n_mid
    raise NumericalError(f"click tuning did not converge to {target} within 200 bisections")


def encoding_to_dict(e: Encoding) -> dict:
    return {
        "n_modes": e.n_modes,
        "omega": [float(x) for x in e.omega],
        "alpha": e.alpha,
        "c": e.c,
        "eigenvalues": [float(x) for x in e.eigenvalues],
        "squeezing": [float(x) for x in e.squeezing],
    }
