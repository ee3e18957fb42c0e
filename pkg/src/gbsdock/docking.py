"""Pharmacophore point sets, contact potentials, and binding interaction graphs.

A molecule (ligand or receptor binding site) is reduced to labeled
pharmacophore points in 3D. Docking becomes a graph problem: each
ligand-receptor point pair is a candidate contact, contacts are vertices
weighted by a knowledge-based potential, and two contacts are joined by an
edge when they can be realized simultaneously by a rigid placement up to a
flexibility threshold. Heavy cliques in this binding interaction graph are
candidate binding poses.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np

from ._validation import check_non_negative, check_symmetric, readonly
from .exceptions import ValidationError
from .graphs import WeightedGraph


class PharmacophoreLabel(str, Enum):
    """The six pharmacophore point types recognized by the potential table."""

    NEGATIVE_CHARGE = "NegativeCharge"
    POSITIVE_CHARGE = "PositiveCharge"
    HBOND_DONOR = "HBondDonor"
    HBOND_ACCEPTOR = "HBondAcceptor"
    HYDROPHOBE = "Hydrophobe"
    AROMATIC = "Aromatic"


LABELS: tuple[PharmacophoreLabel, ...] = tuple(PharmacophoreLabel)
_LABEL_INDEX = {label: i for i, label in enumerate(LABELS)}


def parse_label(name: str) -> PharmacophoreLabel:
    try:
        return PharmacophoreLabel(name)
    except ValueError:
        known = ", ".join(l.value for l in LABELS)
        raise ValidationError(f"unknown pharmacophore label {name!r}; expected one of: {known}") from None


@dataclass(frozen=True)
class PharmacophorePoint:
    """A labeled point in 3D space (coordinates in angstroms)."""

    label: PharmacophoreLabel
    position: np.ndarray

    def __post_init__(self) -> None:
        if not isinstance(self.label, PharmacophoreLabel):
            object.__setattr__(self, "label", parse_label(self.label))
        pos = np.asarray(self.position, dtype=np.float64).reshape(-1)
        if pos.shape != (3,):
            raise ValidationError(f"position must have 3 coordinates, got shape {pos.shape}")
        if not np.all(np.isfinite(pos)):
            raise ValidationError("position coordinates must be finite")
        object.__setattr__(self, "position", readonly(pos))


@dataclass(frozen=True, eq=False)
class LabeledDistanceGraph:
    """Complete graph over pharmacophore points with Euclidean edge lengths."""

    points: tuple[PharmacophorePoint, ...]
    edge_lengths: np.ndarray

    def __post_init__(self) -> None:
        if len(self.points) < 1:
            raise ValidationError("a labeled distance graph needs at least one point")
        d = check_symmetric(self.edge_lengths, "edge_lengths")
        if d.shape[0] != len(self.points):
            raise ValidationError("edge_lengths shape does not match point count")
        object.__setattr__(self, "points", tuple(self.points))
        object.__setattr__(self, "edge_lengths", readonly(d))

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def labels(self) -> tuple[PharmacophoreLabel, ...]:
        return tuple(p.label for p in self.points)


def build_labeled_distance_graph(points: Iterable[PharmacophorePoint]) -> LabeledDistanceGraph:
    points = tuple(points)
    if not points:
        raise ValidationError("need at least one pharmacophore point")
    xyz = np.stack([p.position for p in points])
    diff = xyz[:, None, :] - xyz[None, :, :]
    d = np.sqrt((diff * diff).sum(axis=-1))
    np.fill_diagonal(d, 0.0)
    return LabeledDistanceGraph(points, d)


@dataclass(frozen=True, eq=False)
class PotentialTable:
    """Symmetric 6x6 contact potential indexed by pharmacophore label pairs."""

    kappa: np.ndarray

    def __post_init__(self) -> None:
        k = check_symmetric(self.kappa, "kappa", tol=1e-9)
        if k.shape != (6, 6):
            raise ValidationError(f"kappa must be 6x6, got {k.shape}")
        object.__setattr__(self, "kappa", readonly(k))

    def value(self, a: PharmacophoreLabel | str, b: PharmacophoreLabel | str) -> float:
        ia = _LABEL_INDEX[parse_label(a)]
        ib = _LABEL_INDEX[parse_label(b)]
        return float(self.kappa[ia, ib])


def potential_from_csv_text(text: str) -> PotentialTable:
    """Parse a potential CSV: a header of the six labels, then either a full
    6x6 block or a lower-triangular block (row i holding i+1 entries).

    The header may list the labels in any order; rows and columns follow the
    header order and are mapped back to the canonical label order. Full
    matrices are checked for symmetry and symmetrized; triangular input is
    mirrored.
    """
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if not rows:
        raise ValidationError("potential CSV is empty")
    header = [parse_label(c.strip()) for c in rows[0]]
    if len(header) != 6 or len(set(header)) != 6:
        raise ValidationError("potential CSV header must list the 6 labels exactly once each")
    body = rows[1:]
    if len(body) != 6:
        raise ValidationError(f"potential CSV must have 6 value rows, got {len(body)}")

    def parse_row(r: list[str], i: int) -> list[float]:
        try:
            return [float(c) for c in r if c.strip() != ""]
        except ValueError as exc:
            raise ValidationError(f"potential CSV row {i + 2}: {exc}") from exc

    values = [parse_row(r, i) for i, r in enumerate(body)]
    lengths = [len(v) for v in values]
    m = np.zeros((6, 6))
    if lengths == [i + 1 for i in range(6)]:
        for i, row in enumerate(values):
            for j, x in enumerate(row):
                m[i, j] = m[j, i] = x
    elif lengths == [6] * 6:
        m = np.array(values)
        if np.max(np.abs(m - m.T)) > 1e-9:
            raise ValidationError("full potential matrix is not symmetric")
        m = (m + m.T) / 2.0
    else:
        raise ValidationError(
            "potential CSV rows must be lower-triangular (1..6 entries) or a full 6x6 block"
        )
    perm = np.array([_LABEL_INDEX[l] for l in header])
    canonical = np.zeros((6, 6))
    canonical[np.ix_(perm, perm)] = m
    return PotentialTable(canonical)


def load_potential(path: str | Path) -> PotentialTable:
    return potential_from_csv_text(Path(path).read_text())


def potential_to_csv_text(table: PotentialTable) -> str:
    lines = [",".join(l.value for l in LABELS)]
    for i in range(6):
        lines.append(",".join(repr(float(table.kappa[i, j])) for j in range(i + 1)))
    return "\n".join(lines) + "\n"


def default_potential() -> PotentialTable:
    """The packaged knowledge-based contact potential (reflected, so larger
    values mark more desirable contacts; minimum entry is 0)."""
    text = resources.files("gbsdock.data").joinpath("pharmacophore_potential.csv").read_text()
    return potential_from_csv_text(text)


def reflect_potential(p: PotentialTable | np.ndarray) -> PotentialTable:
    """Flip a potential so that low raw scores (favourable contacts) become
    large weights: out = max(p) - min(p) - p, entrywise over the whole table.

    Applying the reflection twice returns the original table.
    """
    k = p.kappa if isinstance(p, PotentialTable) else np.asarray(p, dtype=np.float64)
    k = check_symmetric(k, "potential", tol=1e-9)
    if k.shape != (6, 6):
        raise ValidationError(f"potential must be 6x6, got {k.shape}")
    return PotentialTable(k.max() - k.min() - k)


class Contact(NamedTuple):
    """A candidate ligand-receptor contact: indices into the two point sets."""

    ligand_point: int
    receptor_point: int


@dataclass(frozen=True, eq=False)
class BindingInteractionGraph:
    """Weighted graph over candidate contacts, with construction provenance."""

    graph: WeightedGraph
    contacts: tuple[Contact, ...]
    tau: float
    epsilon: float

    def __post_init__(self) -> None:
        if len(self.contacts) != self.graph.n:
            raise ValidationError("one contact per graph vertex is required")
        object.__setattr__(self, "contacts", tuple(self.contacts))


def is_tau_flexible(
    c1: Contact,
    c2: Contact,
    ligand: LabeledDistanceGraph,
    receptor: LabeledDistanceGraph,
    tau: float,
    epsilon: float,
) -> bool:
    """True iff the two contacts' ligand and receptor distances agree within
    tau + 2*epsilon, i.e. both contacts can hold at once for a placement that
    tolerates tau of flexibility and epsilon of point blur."""
    tau = check_non_negative(tau, "tau")
    epsilon = check_non_negative(epsilon, "epsilon")
    dl = ligand.edge_lengths[c1.ligand_point, c2.ligand_point]
    db = receptor.edge_lengths[c1.receptor_point, c2.receptor_point]
    return bool(abs(dl - db) <= tau + 2.0 * epsilon)


def build_binding_interaction_graph(
    ligand: LabeledDistanceGraph,
    receptor: LabeledDistanceGraph,
    potential: PotentialTable | None = None,
    tau: float = 1.0,
    epsilon: float = 0.5,
) -> BindingInteractionGraph:
    """Build the contact graph for a ligand / receptor point-set pair.

    Vertices are all n*m ligand-receptor point pairs, ordered ligand-major
    (contact (l, b) sits at index l*m + b). A vertex weighs kappa(ligand
    label, receptor label). Two contacts are adjacent when their distances
    agree within tau + 2*epsilon and they share neither a ligand nor a
    receptor point, so any clique uses each molecular point at most once.
    """
    tau = check_non_negative(tau, "tau")
    epsilon = check_non_negative(epsilon, "epsilon")
    if potential is None:
        potential = default_potential()
    n, m = ligand.n, receptor.n
    contacts = tuple(Contact(l, b) for l in range(n) for b in range(m))

    li = np.array([_LABEL_INDEX[lbl] for lbl in ligand.labels])
    bi = np.array([_LABEL_INDEX[lbl] for lbl in receptor.labels])
    weights = potential.kappa[np.ix_(li, bi)].reshape(n * m)

    slack = tau + 2.0 * epsilon
    gap = np.abs(
        ligand.edge_lengths[:, None, :, None] - receptor.edge_lengths[None, :, None, :]
    )
    adj = (gap <= slack).astype(float)
    lig_idx = np.repeat(np.arange(n), m)
    rec_idx = np.tile(np.arange(m), n)
    adj = adj.reshape(n * m, n * m)
    adj[lig_idx[:, None] == lig_idx[None, :]] = 0.0
    adj[rec_idx[:, None] == rec_idx[None, :]] = 0.0
    graph = WeightedGraph(adj, weights)
    return BindingInteractionGraph(graph=graph, contacts=contacts, tau=tau, epsilon=epsilon)


def points_to_dict(molecule: str, points: Iterable[PharmacophorePoint]) -> dict:
    return {
        "molecule": molecule,
        "points": [
            {"label": p.label.value, "xyz": [float(x) for x in p.position]} for p in points
        ],
    }


def points_from_dict(d: dict) -> tuple[str, list[PharmacophorePoint]]:
    if "points" not in d:
        raise ValidationError("pharmacophore JSON is missing the 'points' key")
    molecule = str(d.get("molecule", ""))
    points = []
    for i, entry in enumerate(d["points"]):
        if "label" not in entry or "xyz" not in entry:
            raise ValidationError(f"point {i} must have 'label' and 'xyz' keys")
        points.append(PharmacophorePoint(label=parse_label(entry["label"]), position=entry["xyz"]))
    return molecule, points


def save_points(molecule: str, points: Iterable[PharmacophorePoint], path: str | Path) -> None:
    Path(path).write_text(json.dumps(points_to_dict(molecule, points), indent=2) + "\n")


def load_points(path: str | Path) -> tuple[str, list[PharmacophorePoint]]:
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from exc
    return points_from_dict(d)
