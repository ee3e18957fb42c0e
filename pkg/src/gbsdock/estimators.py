"""Scikit-learn style wrappers around the functional core.

``GBSCliqueSearch`` is a fit/predict façade: ``fit`` programs the simulated
device on a weighted graph, draws a batch, and runs the configured search;
``fit_predict`` returns the best clique as a binary membership vector.
``BindingGraphBuilder`` is a stateless transformer from pharmacophore point
set pairs to binding interaction graphs.  Both follow the estimator contract
(params set verbatim in ``__init__``, validation deferred to ``fit``), so
``clone``, ``get_params`` and pipelines work as usual.
"""

import numbers
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .docking import (
    PharmacophorePoint,
    PotentialTable,
    build_binding_interaction_graph,
    build_labeled_distance_graph,
    load_potential,
)
from .exceptions import ValidationError
from .gbs import apply_loss, build_encoding, state_from_encoding, tune_c_for_clicks
from .graphs import WeightedGraph
from .samplers import sample_postselected, sample_threshold_chain
from .solvers import hybrid_pipeline, random_search

STRATEGIES = ("random", "shrink", "hybrid")


def _as_graph(X, vertex_weights) -> WeightedGraph:
    if isinstance(X, WeightedGraph):
        if vertex_weights is None:
            return X
        return WeightedGraph(adjacency=X.adjacency, vertex_weights=vertex_weights)
    a = np.asarray(X, dtype=np.float64)
    w = vertex_weights
    if w is None and a.ndim == 2:
        w = np.ones(a.shape[0])
    return WeightedGraph(adjacency=a, vertex_weights=w)


class GBSCliqueSearch(BaseEstimator):
    """Maximum weighted clique search seeded by a simulated GBS device.

    Parameters
    ----------
    alpha : float, weight emphasis of the encoding (0 ignores weights).
    mean_clicks : float, target mean click count the device is tuned to.
    eta : float in (0, 1], detector/loop transmission.
    n_samples : int, batch size drawn from the device.
    max_steps : int, local search steps after greedy shrinking (hybrid only).
    strategy : "random" (clique test only), "shrink" (greedy shrinking),
        or "hybrid" (shrinking plus local search).
    postselect : int or None; if set, sample exactly this many clicks
        per pattern instead of the full threshold distribution.
    target_weight : float or None; success threshold for the curve.  When
        None the brute-force oracle certifies it (graphs up to 30 vertices).
    random_state : int or None, seed for device and solver randomness.

    Attributes
    ----------
    graph_, encoding_, batch_, result_ : intermediate artifacts of the run.
    best_clique_ : tuple of vertex indices.
    best_weight_ : float.
    success_curve_ : ndarray of success fraction per step (None for
        strategy="random").
    """

    def __init__(
        self,
        alpha=1.0,
        mean_clicks=8.0,
        eta=1.0,
        n_samples=1000,
        max_steps=20,
        strategy="hybrid",
        postselect=None,
        target_weight=None,
        random_state=0,
    ):
        self.alpha = alpha
        self.mean_clicks = mean_clicks
        self.eta = eta
        self.n_samples = n_samples
        self.max_steps = max_steps
        self.strategy = strategy
        self.postselect = postselect
        self.target_weight = target_weight
        self.random_state = random_state

    def _seeds(self) -> tuple[int, int]:
        ss = np.random.SeedSequence(self.random_state)
        device, solver = (int(v) for v in ss.generate_state(2))
        return device, solver

    def fit(self, X, y=None, vertex_weights=None):
        """Program the device on the graph, sample, and search.

        X is a symmetric 0/1 adjacency matrix or a WeightedGraph; vertex
        weights default to 1 unless given (or carried by the graph).
        """
        if self.strategy not in STRATEGIES:
            raise ValidationError(
                f"strategy must be one of {STRATEGIES}, got {self.strategy!r}"
            )
        g = _as_graph(X, vertex_weights)
        device_seed, solver_seed = self._seeds()

        if self.postselect is not None:
            if not isinstance(self.postselect, numbers.Integral):
                raise ValidationError(
                    f"postselect must be an integer, got {self.postselect!r}"
                )
            encoding = build_encoding(g, self.alpha)
            batch = sample_postselected(
                encoding, int(self.postselect), self.n_samples, device_seed
            )
        else:
            encoding = tune_c_for_clicks(g, self.alpha, self.mean_clicks, self.eta)
            state = apply_loss(state_from_encoding(encoding), self.eta)
            batch = sample_threshold_chain(state, self.n_samples, device_seed)

        if self.strategy == "random":
            result = random_search(g, batch)
        else:
            steps = 0 if self.strategy == "shrink" else self.max_steps
            result = hybrid_pipeline(
                g,
                batch,
                max_steps=steps,
                seed=solver_seed,
                target_weight=self.target_weight,
            )

        self.graph_ = g
        self.encoding_ = encoding
        self.batch_ = batch
        self.result_ = result
        self.best_clique_ = result.best_clique
        self.best_weight_ = result.best_weight
        self.success_curve_ = result.success_curve
        self.n_features_in_ = g.n
        return self

    def fit_predict(self, X, y=None, vertex_weights=None) -> np.ndarray:
        """Fit and return the best clique as a 0/1 membership vector."""
        self.fit(X, y=y, vertex_weights=vertex_weights)
        membership = np.zeros(self.graph_.n, dtype=np.int64)
        membership[list(self.best_clique_)] = 1
        return membership


class BindingGraphBuilder(TransformerMixin, BaseEstimator):
    """Transform (ligand points, receptor points) pairs into binding graphs.

    Parameters
    ----------
    potential : PotentialTable, CSV path, or None for the shipped table.
    tau : float, flexibility threshold on distance mismatch.
    epsilon : float, contact slack added on top of tau.

    ``transform`` returns a list of BindingInteractionGraph; each carries the
    WeightedGraph in its ``graph`` attribute plus the contact labeling.
    """

    def __init__(self, potential=None, tau=1.0, epsilon=0.5):
        self.potential = potential
        self.tau = tau
        self.epsilon = epsilon

    def _resolve_potential(self) -> PotentialTable | None:
        if self.potential is None or isinstance(self.potential, PotentialTable):
            return self.potential
        if isinstance(self.potential, (str, Path)):
            return load_potential(self.potential)
        raise ValidationError(
            f"potential must be a PotentialTable, a path, or None, "
            f"got {type(self.potential).__name__}"
        )

    @staticmethod
    def _as_points(seq) -> list[PharmacophorePoint]:
        points = []
        for item in seq:
            if isinstance(item, PharmacophorePoint):
                points.append(item)
            else:
                label, xyz = item
                points.append(PharmacophorePoint(label, xyz))
        return points

    def fit(self, X, y=None):
        self._resolve_potential()
        return self

    def transform(self, X) -> list:
        potential = self._resolve_potential()
        out = []
        for ligand, receptor in X:
            out.append(
                build_binding_interaction_graph(
                    build_labeled_distance_graph(self._as_points(ligand)),
                    build_labeled_distance_graph(self._as_points(receptor)),
                    potential,
                    tau=self.tau,
                    epsilon=self.epsilon,
                )
            )
        return out
