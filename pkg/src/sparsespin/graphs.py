"""Coupling graphs for XY spin models.

Every Hamiltonian in this package is parametrized by a weighted coupling
graph chi_ij.  Five families are supported: all-to-all, nearest-neighbour,
powers-of-two (sites coupled iff their separation is an integer power of 2),
hypercube (sites coupled iff their binary labels differ in one bit), and
1D power-law decay chi0 * d**(-alpha).

Site indexing is zero-based.  Hypercube and powers-of-two require N = 2**m.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np


class GraphKind(str, enum.Enum):
    A2A = "a2a"
    NN = "nn"
    PWR2 = "pwr2"
    HYPERCUBE = "hypercube"
    POWER_LAW = "powerlaw"


class Boundary(str, enum.Enum):
    OPEN = "open"
    PERIODIC = "periodic"


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True, eq=False)
class CouplingGraph:
    """Symmetric nonnegative coupling matrix with family metadata.

    ``weights[i, j]`` is the coupling strength chi_ij (zero diagonal).  The
    matrix is made read-only at construction; graphs are safe to share across
    threads.
    """

    n_spins: int
    chi0: float
    weights: np.ndarray
    kind: GraphKind
    boundary: Boundary
    alpha: float | None = None
    _edges: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        w = self.weights
        if w.shape != (self.n_spins, self.n_spins):
            raise ValueError("weights shape does not match n_spins")
        if not np.array_equal(w, w.T):
            raise ValueError("weights must be symmetric")
        if np.any(np.diag(w) != 0):
            raise ValueError("weights must have zero diagonal")
        w.flags.writeable = False
        iu, ju = np.nonzero(np.triu(w))
        object.__setattr__(
            self, "_edges",
            tuple((int(i), int(j), float(w[i, j])) for i, j in zip(iu, ju)),
        )

    def edges(self) -> tuple:
        """Unordered pairs (i, j, chi_ij) with i < j and chi_ij != 0."""
        return self._edges


def build_graph(kind: GraphKind | str, n: int, chi0: float = 1.0,
                boundary: Boundary | str = Boundary.OPEN,
                alpha: float | None = None) -> CouplingGraph:
    """Construct a coupling graph of the given family.

    ``alpha`` is required for POWER_LAW and rejected otherwise.  Hypercube
    ignores ``boundary`` (its geometry is set by Hamming distance, not a 1D
    layout).
    """
    kind = GraphKind(kind)
    boundary = Boundary(boundary)
    if n < 2:
        raise ValueError(f"need at least 2 spins, got n={n}")
    if not chi0 > 0:
        raise ValueError(f"chi0 must be positive, got {chi0}")
    if kind in (GraphKind.PWR2, GraphKind.HYPERCUBE) and not _is_power_of_two(n):
        raise ValueError(f"{kind.value} graph requires N = 2**m, got N={n}")
    if kind is GraphKind.POWER_LAW:
        if alpha is None:
            raise ValueError("powerlaw graph requires alpha")
        if alpha < 0:
            raise ValueError(f"powerlaw exponent must be >= 0, got alpha={alpha}")
    elif alpha is not None:
        raise ValueError(f"alpha is only meaningful for powerlaw, not {kind.value}")

    w = np.zeros((n, n))
    sites = np.arange(n)
    sep = np.abs(np.subtract.outer(sites, sites))

    if kind is GraphKind.A2A:
        w = chi0 * (1.0 - np.eye(n))
    elif kind is GraphKind.NN:
        w[sep == 1] = chi0
        if boundary is Boundary.PERIODIC:
            w[0, n - 1] = w[n - 1, 0] = chi0
    elif kind is GraphKind.PWR2:
        powers = {1 << r for r in range(n.bit_length())}
        if boundary is Boundary.OPEN:
            coupled = np.isin(sep, sorted(powers))
        else:
            # ring rule: chi(m) = chi0 if m = 2**r or N - m = 2**r
            coupled = np.isin(sep, sorted(powers)) | np.isin(n - sep, sorted(powers))
        np.fill_diagonal(coupled, False)
        w[coupled] = chi0
    elif kind is GraphKind.HYPERCUBE:
        for b in range(n.bit_length() - 1):
            i = sites
            j = sites ^ (1 << b)
            w[i, j] = chi0
    else:  # POWER_LAW
        d = sep.astype(float)
        if boundary is Boundary.PERIODIC:
            d = np.minimum(d, n - d)
        with np.errstate(divide="ignore"):
            w = chi0 * d ** (-float(alpha))
        np.fill_diagonal(w, 0.0)

    return CouplingGraph(n_spins=n, chi0=float(chi0), weights=w,
                         kind=kind, boundary=boundary,
                         alpha=float(alpha) if alpha is not None else None)


def edge_count(g: CouplingGraph) -> int:
    """Number of unordered pairs with nonzero coupling."""
    return len(g.edges())


def a2a_edge_count(n: int) -> int:
    return n * (n - 1) // 2


def normalized_time(t: float, g: CouplingGraph) -> float:
    """Rescale physical time by the graph's edge fraction, t~ = t * E_G / E_A2A.

    Equal normalized times correspond to equal total interaction budgets
    across graphs of the same size.
    """
    return t * edge_count(g) / a2a_edge_count(g.n_spins)


def physical_time(t_norm: float, g: CouplingGraph) -> float:
    """Inverse of :func:`normalized_time`."""
    return t_norm * a2a_edge_count(g.n_spins) / edge_count(g)


def predicted_tstar(g: CouplingGraph) -> float:
    """Mean-field prediction for the physical time of maximum QFI.

    The all-to-all model peaks at t = pi / chi0; rescaling by the edge ratio
    gives pi * E_A2A / (E_G * chi0) for a general graph.
    """
    return math.pi * a2a_edge_count(g.n_spins) / (edge_count(g) * g.chi0)


def graph_to_json(g: CouplingGraph) -> dict:
    """JSON document {n, chi0, kind, alpha?, boundary, edges: [[i, j, w]...]}."""
    doc = {
        "n": g.n_spins,
        "chi0": g.chi0,
        "kind": g.kind.value,
        "boundary": g.boundary.value,
        "edges": [[i, j, w] for i, j, w in g.edges()],
    }
    if g.alpha is not None:
        doc["alpha"] = g.alpha
    return doc


def graph_from_json(doc: dict | str) -> CouplingGraph:
    if isinstance(doc, str):
        doc = json.loads(doc)
    n = int(doc["n"])
    w = np.zeros((n, n))
    for i, j, wij in doc["edges"]:
        w[int(i), int(j)] = w[int(j), int(i)] = float(wij)
    return CouplingGraph(n_spins=n, chi0=float(doc["chi0"]), weights=w,
                         kind=GraphKind(doc["kind"]),
                         boundary=Boundary(doc["boundary"]),
                         alpha=float(doc["alpha"]) if "alpha" in doc else None)
