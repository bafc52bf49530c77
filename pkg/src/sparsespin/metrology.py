"""Entanglement and metrology diagnostics for pure spin states.

Everything here is a read-only function of a statevector: quantum Fisher
information (fixed-axis and axis-optimized), the Wineland squeezing
parameter, the collective spin length <J^2>, overlap with the x-basis GHZ
family, von Neumann entropies of site subsets, and the tripartite mutual
information.  Entropies use the natural logarithm throughout, so the GHZ
tripartite mutual information is ln 2.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .core import StateVector, _popcounts, _site_view, reduced_density
from .graphs import CouplingGraph, normalized_time

_AXES = ("x", "y", "z")


def _apply_collective(axis: str, n: int, amps: np.ndarray) -> np.ndarray:
    """J_axis |psi> with J = sum_i sigma_i/2."""
    out = np.zeros_like(amps)
    for site in range(n):
        sv = _site_view(amps, n, site)
        dv = _site_view(out, n, site)
        if axis == "x":
            dv[:, 0, :] += 0.5 * sv[:, 1, :]
            dv[:, 1, :] += 0.5 * sv[:, 0, :]
        elif axis == "y":
            dv[:, 0, :] += -0.5j * sv[:, 1, :]
            dv[:, 1, :] += +0.5j * sv[:, 0, :]
        else:
            dv[:, 0, :] += 0.5 * sv[:, 0, :]
            dv[:, 1, :] -= 0.5 * sv[:, 1, :]
    return out


def spin_moments(psi: StateVector) -> tuple:
    """First and second collective-spin moments.

    Returns (jvec, jmat) with jvec[a] = <J_a> and jmat[a, b] = <J_a J_b>
    (complex; its real part is the symmetrized second moment).
    """
    n = psi.n_spins
    w = [_apply_collective(ax, n, psi.amplitudes) for ax in _AXES]
    jvec = np.array([np.vdot(psi.amplitudes, wa).real for wa in w])
    jmat = np.array([[np.vdot(wa, wb) for wb in w] for wa in w])
    return jvec, jmat


def _covariance(psi: StateVector) -> tuple:
    jvec, jmat = spin_moments(psi)
    cov = jmat.real - np.outer(jvec, jvec)
    return jvec, cov, float(np.trace(jmat).real)


def qfi_axis(psi: StateVector, axis: str) -> float:
    """F_Q for rotations about a coordinate axis: 4 (<J_a^2> - <J_a>^2)."""
    if axis not in _AXES:
        raise ValueError(f"axis must be one of {_AXES}, got {axis!r}")
    w = _apply_collective(axis, psi.n_spins, psi.amplitudes)
    mean = np.vdot(psi.amplitudes, w).real
    second = np.vdot(w, w).real
    return 4.0 * (second - mean ** 2)


def qfi_optimal(psi: StateVector) -> float:
    """Best rotation-generator QFI over all axes: 4 * lambda_max of the
    symmetrized collective-spin covariance matrix."""
    _, cov, _ = _covariance(psi)
    return 4.0 * float(np.linalg.eigvalsh(cov)[-1])


def wineland_xi2(psi: StateVector) -> float:
    """Wineland squeezing parameter N * min(Delta J_perp)^2 / |<J>|^2.

    The variance is minimized over the plane perpendicular to the mean-spin
    direction (2x2 transverse covariance eigenproblem).  Raises if the mean
    spin length vanishes (squeezing undefined).
    """
    jvec, cov, _ = _covariance(psi)
    jlen = float(np.linalg.norm(jvec))
    if jlen <= 1e-8:
        raise ValueError("mean spin length vanishes; squeezing undefined")
    s = jvec / jlen
    # orthonormal transverse frame, seeded by the axis least aligned with s
    seed = np.zeros(3)
    seed[int(np.argmin(np.abs(s)))] = 1.0
    e1 = seed - np.dot(seed, s) * s
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(s, e1)
    basis = np.array([e1, e2])
    vperp = basis @ cov @ basis.T
    min_var = float(np.linalg.eigvalsh(vperp)[0])
    return psi.n_spins * min_var / jlen ** 2


def j2_expectation(psi: StateVector) -> float:
    """<J^2> = <Jx^2 + Jy^2 + Jz^2>; equals j(j+1), j = N/2, for states in
    the permutationally symmetric sector."""
    _, _, j2 = _covariance(psi)
    return j2


def ghz_overlap(psi: StateVector) -> float:
    """max_phi |<GHZ_x(phi)|psi>|^2, with the phase optimized analytically.

    With a = <+^N|psi> and b = <-^N|psi>, the optimum is (|a| + |b|)^2 / 2.
    """
    n = psi.n_spins
    scale = 2.0 ** (-n / 2)
    a = scale * np.sum(psi.amplitudes)
    signs = 1.0 - 2.0 * (_popcounts(n) & 1)
    b = scale * np.sum(signs * psi.amplitudes)
    return float((abs(a) + abs(b)) ** 2 / 2.0)


def subsystem_entropy(psi: StateVector, subset) -> float:
    """Von Neumann entropy -Tr rho ln rho of the reduced state on ``subset``.

    For a pure global state S_subset = S_complement, so the reduction is
    always performed on the smaller side.  Eigenvalues below 1e-14 are
    treated as exact zeros.
    """
    n = psi.n_spins
    subset = tuple(int(s) for s in subset)
    if len(subset) > n // 2:
        subset = tuple(s for s in range(n) if s not in set(subset))
    rho = reduced_density(psi, subset)
    evals = np.linalg.eigvalsh(rho.matrix)
    evals = evals[evals > 1e-14]
    return float(-np.sum(evals * np.log(evals)))


def mutual_information(psi: StateVector, a, b) -> float:
    """I(A;B) = S_A + S_B - S_AB."""
    a, b = tuple(a), tuple(b)
    if set(a) & set(b):
        raise ValueError("subsets overlap")
    return (subsystem_entropy(psi, a) + subsystem_entropy(psi, b)
            - subsystem_entropy(psi, a + b))


def tripartite_mutual_information(psi: StateVector, a, b, c) -> float:
    """I3 = I(A;B) + I(A;C) - I(A;BC); negative values flag scrambling,
    ln 2 for a GHZ state."""
    a, b, c = tuple(a), tuple(b), tuple(c)
    if not (a and b and c):
        raise ValueError("all three subsets must be nonempty")
    if set(a) & set(b) or set(a) & set(c) or set(b) & set(c):
        raise ValueError("subsets must be disjoint")
    return (mutual_information(psi, a, b) + mutual_information(psi, a, c)
            - mutual_information(psi, a, b + c))


def quarter_partition(n: int) -> tuple:
    """Contiguous equal quarters (A, B, C) in site order; D is the rest."""
    if n < 4:
        raise ValueError("quarter partition needs at least 4 sites")
    q = n // 4
    return tuple(range(0, q)), tuple(range(q, 2 * q)), tuple(range(2 * q, 3 * q))


# ---------------------------------------------------------------------------
# per-time-point bundles

@dataclass
class MetricsRecord:
    """One row of diagnostics for a state sampled along a trajectory."""

    n_spins: int
    t: float
    t_norm: float
    qfi_axis: dict
    qfi_opt: float
    j2: float
    ghz_overlap: float
    xi2: float | None = None
    i3: float | None = None
    entropies: dict = field(default_factory=dict)

    @property
    def j2_norm(self) -> float:
        j = self.n_spins / 2
        return self.j2 / (j * (j + 1))


def compute_metrics(psi: StateVector, t: float, graph: CouplingGraph | None = None,
                    with_i3: bool = False, tmi_partition=None,
                    entropy_subsets=()) -> MetricsRecord:
    """Evaluate the standard diagnostic bundle on one state.

    ``xi2`` is left unset when the mean spin length vanishes (e.g. at the
    GHZ point).  ``t_norm`` requires a graph; it falls back to t otherwise.
    """
    jvec, cov, j2 = _covariance(psi)
    qfi = {ax: 4.0 * cov[k, k] for k, ax in enumerate(_AXES)}
    qfi_opt = 4.0 * float(np.linalg.eigvalsh(cov)[-1])

    xi2 = None
    jlen = float(np.linalg.norm(jvec))
    if jlen > 1e-8:
        try:
            xi2 = wineland_xi2(psi)
        except ValueError:
            xi2 = None

    i3 = None
    if with_i3:
        parts = tmi_partition or quarter_partition(psi.n_spins)
        i3 = tripartite_mutual_information(psi, *parts)

    entropies = {tuple(s): subsystem_entropy(psi, s) for s in entropy_subsets}

    return MetricsRecord(
        n_spins=psi.n_spins,
        t=t,
        t_norm=normalized_time(t, graph) if graph is not None else t,
        qfi_axis=qfi,
        qfi_opt=qfi_opt,
        j2=j2,
        ghz_overlap=ghz_overlap(psi),
        xi2=xi2,
        i3=i3,
        entropies=entropies,
    )


METRICS_COLUMNS = ("t", "t_norm", "qfi_x", "qfi_y", "qfi_z", "qfi_opt",
                   "qfi_opt_per_spin", "xi2", "j2", "j2_norm", "ghz_overlap",
                   "i3", "entropy_half")


def fmt(x) -> str:
    """17-significant-digit float formatting shared by all delimited output."""
    if x is None:
        return "nan"
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _record_row(rec: MetricsRecord) -> dict:
    half = tuple(range(rec.n_spins // 2))
    return {
        "t": rec.t,
        "t_norm": rec.t_norm,
        "qfi_x": rec.qfi_axis["x"],
        "qfi_y": rec.qfi_axis["y"],
        "qfi_z": rec.qfi_axis["z"],
        "qfi_opt": rec.qfi_opt,
        "qfi_opt_per_spin": rec.qfi_opt / rec.n_spins,
        "xi2": rec.xi2,
        "j2": rec.j2,
        "j2_norm": rec.j2_norm,
        "ghz_overlap": rec.ghz_overlap,
        "i3": rec.i3,
        "entropy_half": rec.entropies.get(half),
    }


def metrics_to_csv(records, extra_columns=()) -> str:
    """Render records to CSV with the documented fixed column order."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(extra_columns) + list(METRICS_COLUMNS))
    for rec in records:
        extra, rec = (rec[:-1], rec[-1]) if isinstance(rec, tuple) else ((), rec)
        row = _record_row(rec)
        writer.writerow([fmt(v) for v in extra]
                        + [fmt(row[c]) for c in METRICS_COLUMNS])
    return buf.getvalue()


def metrics_to_jsonl(records, extra_columns=()) -> str:
    lines = []
    for rec in records:
        extra, rec = (rec[:-1], rec[-1]) if isinstance(rec, tuple) else ((), rec)
        row = dict(zip(extra_columns, extra))
        row.update(_record_row(rec))
        row["entropies"] = {",".join(map(str, k)): v
                            for k, v in rec.entropies.items()}
        lines.append(json.dumps(row, allow_nan=True, sort_keys=False))
    return "\n".join(lines) + "\n" if lines else ""
