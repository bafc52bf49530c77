"""Statevector engine: basis conventions, gates, and exact time evolution.

Basis convention (frozen): amplitudes are indexed by integers c in
[0, 2**N).  Bit b of c is the state of spin b; bit value 0 is |0> (spin up,
+z), bit value 1 is |1> (spin down).  All operations are pure: inputs are
never mutated, new states are returned.

The XY Hamiltonian

    H = sum_ij chi_ij (Sx_i Sx_j + Sy_i Sy_j),   S = sigma / 2

is applied matrix-free: per edge (i, j) the flip-flop term exchanges the
anti-aligned bit pairs |01> <-> |10> with amplitude chi_ij / 2.  Time
evolution uses an adaptive short-iterative Lanczos propagator with
defect-based substep control.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Union

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .graphs import CouplingGraph

MAX_SPINS = 20  # 2**20 amplitudes; larger systems are out of desk scale


class EvolutionError(RuntimeError):
    """Propagator failed to converge; carries the achieved residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (achieved residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True, eq=False)
class StateVector:
    n_spins: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.amplitudes.shape != (1 << self.n_spins,):
            raise ValueError("amplitude vector length must be 2**n_spins")

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "StateVector":
        return StateVector(self.n_spins, self.amplitudes.copy())


@dataclass(frozen=True)
class DensityMatrix:
    """Reduced state on an ordered site subset; bit t of the row index is
    the state of ``subset[t]``."""

    subset: tuple
    matrix: np.ndarray

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)


# ---------------------------------------------------------------------------
# gates

@dataclass(frozen=True)
class GlobalRotation:
    """exp(-i angle/2 * sum_i sigma_i^axis): Bloch rotation of every spin."""
    axis: str
    angle: float


@dataclass(frozen=True)
class PairPhase:
    """Controlled phase diag[1, 1, 1, e^{-i phi}] on spins (i, j)."""
    i: int
    j: int
    phi: float


@dataclass(frozen=True)
class PairRotationZ:
    """exp(-i (sigma_i^z + sigma_j^z) phi / 2) for every listed pair."""
    pairs: tuple
    phi: float


@dataclass(frozen=True)
class SitePermutation:
    """Relabel basis bits: bit perm[b] of the new configuration is bit b of
    the old one (the spin at site b moves to site perm[b])."""
    perm: tuple


@dataclass(frozen=True)
class HalfAngleRotationZ:
    """exp(-i sigma^z phi / 2) on the listed sites only."""
    sites: tuple
    phi: float


Gate = Union[GlobalRotation, PairPhase, PairRotationZ, SitePermutation,
             HalfAngleRotationZ]


# ---------------------------------------------------------------------------
# state constructors

def coherent_x_state(n: int) -> StateVector:
    """|+>^N, every spin polarized along +x; all 2**n amplitudes equal."""
    if not 1 <= n <= MAX_SPINS:
        raise ValueError(f"n must be in [1, {MAX_SPINS}], got {n}")
    dim = 1 << n
    return StateVector(n, np.full(dim, 2.0 ** (-n / 2), dtype=complex))


def ghz_x_state(n: int, phi: float = 0.0) -> StateVector:
    """(|+>^n + e^{i phi} |->^n) / sqrt(2) in the computational basis."""
    if n < 2:
        raise ValueError(f"GHZ state needs n >= 2, got {n}")
    if n > MAX_SPINS:
        raise ValueError(f"n must be <= {MAX_SPINS}, got {n}")
    signs = 1.0 - 2.0 * (_popcounts(n) & 1)
    amps = (1.0 + np.exp(1j * phi) * signs) * (2.0 ** (-(n + 1) / 2))
    return StateVector(n, amps)


def basis_state(n: int, index: int) -> StateVector:
    amps = np.zeros(1 << n, dtype=complex)
    amps[index] = 1.0
    return StateVector(n, amps)


@lru_cache(maxsize=8)
def _popcounts(n: int) -> np.ndarray:
    idx = np.arange(1 << n, dtype=np.uint32)
    pc = np.zeros(1 << n, dtype=np.int64)
    for b in range(n):
        pc += (idx >> b) & 1
    return pc


def _pair_shape(n: int, i: int, j: int) -> tuple:
    """Five-axis factorization (high, bit j, middle, bit i, low) of the
    amplitude vector, for i < j; block-sliceable views are much faster than
    general axis moves."""
    return (1 << (n - 1 - j), 2, 1 << (j - i - 1), 2, 1 << i)


def _site_view(tensor: np.ndarray, n: int, i: int) -> np.ndarray:
    """View of shape (high, 2, low) exposing bit i as the middle axis."""
    return tensor.reshape(1 << (n - 1 - i), 2, 1 << i)


# ---------------------------------------------------------------------------
# Hamiltonian application and time evolution

def _apply_hxy_raw(n: int, edges: Sequence, amps: np.ndarray) -> np.ndarray:
    out = np.zeros_like(amps)
    for i, j, w in edges:
        lo, hi = (i, j) if i < j else (j, i)
        shape = _pair_shape(n, lo, hi)
        src = amps.reshape(shape)
        dst = out.reshape(shape)
        h = 0.5 * w
        dst[:, 0, :, 1, :] += h * src[:, 1, :, 0, :]
        dst[:, 1, :, 0, :] += h * src[:, 0, :, 1, :]
    return out


def apply_hxy(g: CouplingGraph, psi: StateVector) -> StateVector:
    """H_XY |psi>, unnormalized."""
    if g.n_spins != psi.n_spins:
        raise ValueError(f"graph has {g.n_spins} spins, state has {psi.n_spins}")
    return StateVector(psi.n_spins,
                       _apply_hxy_raw(psi.n_spins, g.edges(), psi.amplitudes))


def _expm_tridiag_e1(alphas: np.ndarray, betas: np.ndarray, dt: float) -> np.ndarray:
    """Coefficients of exp(-i dt T) e_1 in the Lanczos basis."""
    if len(alphas) == 1:
        return np.array([np.exp(-1j * dt * alphas[0])])
    evals, evecs = eigh_tridiagonal(alphas, betas)
    return evecs @ (np.exp(-1j * dt * evals) * evecs[0, :].conj())


def _step_error(alphas, betas, beta_next, dt) -> tuple:
    """A-posteriori truncation estimate for one Krylov substep of size dt.

    Combines the difference between successive-order approximants with the
    classic residual-coupling term beta_next * |last coefficient|.
    """
    m = len(alphas)
    c_full = _expm_tridiag_e1(np.asarray(alphas), np.asarray(betas), dt)
    c_trunc = _expm_tridiag_e1(np.asarray(alphas[:m - 1]), np.asarray(betas[:m - 2]), dt)
    diff = float(np.linalg.norm(np.concatenate([c_full[:m - 1] - c_trunc,
                                                c_full[-1:]])))
    return max(diff, beta_next * abs(c_full[-1])), c_full


def evolve_xy(g: CouplingGraph, psi: StateVector, t: float,
              tol: float = 1e-10, max_krylov: int = 30,
              max_substeps: int = 200_000) -> StateVector:
    """exp(-i H_XY t) |psi> to accuracy ``tol`` (norm of the defect).

    The Krylov basis is grown until the truncation estimate for the
    remaining interval (or an adaptively halved substep) drops below the
    proportional budget tol * |dt| / |t|.  The norm is re-checked after
    every substep.
    """
    if g.n_spins != psi.n_spins:
        raise ValueError(f"graph has {g.n_spins} spins, state has {psi.n_spins}")
    if not tol > 0:
        raise ValueError("tol must be positive")
    if max_krylov < 2:
        raise ValueError("max_krylov must be at least 2")
    if t == 0:
        return psi.copy()

    n = psi.n_spins
    edges = g.edges()
    if not edges:
        return psi.copy()
    apply_h = lambda vec: _apply_hxy_raw(n, edges, vec)

    v = psi.amplitudes.astype(complex, copy=True)
    done = 0.0
    for _ in range(max_substeps):
        rem = t - done
        if abs(rem) <= 1e-15 * abs(t):
            break

        # grow the Lanczos basis until the full remaining step converges
        V = np.empty((max_krylov + 1, v.size), dtype=complex)
        V[0] = v
        alphas, betas = [], []
        c_step, dt, err = None, rem, np.inf
        breakdown = False
        scale = 0.0
        for k in range(max_krylov):
            w = apply_h(V[k])
            a = float(np.vdot(V[k], w).real)
            alphas.append(a)
            w -= a * V[k]
            if k > 0:
                w -= betas[-1] * V[k - 1]
            # full reorthogonalization keeps the small eigenproblem trustworthy
            w -= (V[:k + 1].conj() @ w) @ V[:k + 1]
            b = float(np.linalg.norm(w))
            scale = max(scale, abs(a), b)
            if b <= 1e-13 * max(scale, 1.0):
                # invariant subspace: exact for the whole remaining interval
                c_step = _expm_tridiag_e1(np.asarray(alphas), np.asarray(betas), rem)
                dt, err, breakdown = rem, 0.0, True
                break
            if k >= 1:
                err, c = _step_error(alphas, betas, b, rem)
                if err <= tol * abs(rem) / abs(t):
                    c_step, dt = c, rem
                    break
            betas.append(b)
            V[k + 1] = w / b

        if c_step is None:
            # basis is full: shrink the substep until the estimate converges
            beta_next = betas.pop()
            dt = rem
            for _ in range(80):
                dt *= 0.5
                if abs(dt) < 1e-12 * abs(t):
                    raise EvolutionError("substep collapsed below 1e-12 of "
                                         "the requested time", residual=err)
                err, c = _step_error(alphas, betas, beta_next, dt)
                if err <= tol * abs(dt) / abs(t):
                    c_step = c
                    break
            else:
                raise EvolutionError("Krylov step not converged within the "
                                     "iteration budget", residual=err)

        v = c_step @ V[:len(alphas)]
        if breakdown:
            done = t
            continue
        nrm = float(np.linalg.norm(v))
        if abs(nrm - 1.0) > 1e-6:
            raise EvolutionError("norm drifted during substep",
                                 residual=abs(nrm - 1.0))
        v /= nrm
        done += dt
    else:
        raise EvolutionError("substep budget exhausted", residual=abs(t - done))
    return StateVector(n, v)


# ---------------------------------------------------------------------------
# gate application

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _rotation_matrix(axis: str, angle: float) -> np.ndarray:
    s = _PAULI[axis]
    return np.cos(angle / 2) * np.eye(2) - 1j * np.sin(angle / 2) * s


def apply_gate(psi: StateVector, gate: Gate) -> StateVector:
    """Apply one gate, returning a new state."""
    n = psi.n_spins
    amps = psi.amplitudes.copy()

    if isinstance(gate, GlobalRotation):
        if gate.axis == "z":
            # diagonal: phase exp(-i angle/2 * (n - 2*popcount))
            zsum = n - 2 * _popcounts(n)
            amps *= np.exp(-0.5j * gate.angle * zsum)
        else:
            u = _rotation_matrix(gate.axis, gate.angle)
            for site in range(n):
                v = _site_view(amps, n, site)
                a0 = v[:, 0, :].copy()
                a1 = v[:, 1, :].copy()
                v[:, 0, :] = u[0, 0] * a0 + u[0, 1] * a1
                v[:, 1, :] = u[1, 0] * a0 + u[1, 1] * a1
    elif isinstance(gate, PairPhase):
        if gate.i == gate.j:
            raise ValueError("PairPhase needs two distinct sites")
        _check_sites(n, (gate.i, gate.j))
        lo, hi = sorted((gate.i, gate.j))
        v = amps.reshape(_pair_shape(n, lo, hi))
        v[:, 1, :, 1, :] *= np.exp(-1j * gate.phi)
    elif isinstance(gate, PairRotationZ):
        sites = [s for pair in gate.pairs for s in pair]
        _check_sites(n, sites)
        _rotate_z_sites(amps, n, sites, gate.phi)
    elif isinstance(gate, HalfAngleRotationZ):
        _check_sites(n, gate.sites)
        _rotate_z_sites(amps, n, gate.sites, gate.phi)
    elif isinstance(gate, SitePermutation):
        perm = tuple(gate.perm)
        if sorted(perm) != list(range(n)):
            raise ValueError(f"perm must be a bijection on 0..{n - 1}")
        idx = np.arange(1 << n)
        dest = np.zeros_like(idx)
        for b in range(n):
            dest |= ((idx >> b) & 1) << perm[b]
        out = np.empty_like(amps)
        out[dest] = psi.amplitudes
        amps = out
    else:
        raise TypeError(f"unknown gate {gate!r}")
    return StateVector(n, amps)


def _check_sites(n: int, sites) -> None:
    for s in sites:
        if not 0 <= s < n:
            raise ValueError(f"site {s} out of range for {n} spins")


def _rotate_z_sites(amps: np.ndarray, n: int, sites, phi: float) -> None:
    f0 = np.exp(-0.5j * phi)
    f1 = np.exp(+0.5j * phi)
    for s in sites:
        v = _site_view(amps, n, s)
        v[:, 0, :] *= f0
        v[:, 1, :] *= f1


def apply_circuit(psi: StateVector, gates: Sequence[Gate]) -> StateVector:
    for gate in gates:
        psi = apply_gate(psi, gate)
    return psi


# ---------------------------------------------------------------------------
# reduced states and overlaps

def reduced_density(psi: StateVector, subset: Sequence[int]) -> DensityMatrix:
    """Partial trace over the complement of ``subset``."""
    n = psi.n_spins
    subset = tuple(int(s) for s in subset)
    if not subset:
        raise ValueError("subset must be nonempty")
    if len(set(subset)) != len(subset):
        raise ValueError("subset has repeated sites")
    _check_sites(n, subset)
    if len(subset) >= n:
        raise ValueError("subset must be a strict subset of sites")
    if len(subset) > 12:
        raise ValueError("reduced density capped at 12 sites")
    k = len(subset)
    rest = [s for s in range(n) if s not in subset]
    # axis of bit b is n-1-b; most significant bit of the row index first
    axes = [n - 1 - s for s in reversed(subset)] + [n - 1 - s for s in reversed(rest)]
    a = psi.amplitudes.reshape((2,) * n).transpose(axes).reshape(1 << k, 1 << (n - k))
    rho = a @ a.conj().T
    return DensityMatrix(subset=subset, matrix=rho)


def overlap(a: StateVector, b: StateVector) -> complex:
    """<a|b>."""
    if a.n_spins != b.n_spins:
        raise ValueError("states have different sizes")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


# ---------------------------------------------------------------------------
# binary interchange format

_MAGIC = b"SSPINSV1"


def save_state(psi: StateVector, path) -> None:
    """16-byte header (magic + uint32 N + padding), then little-endian
    interleaved re/im float64 amplitudes."""
    with open(path, "wb") as fh:
        fh.write(_MAGIC + struct.pack("<I", psi.n_spins) + b"\x00" * 4)
        fh.write(psi.amplitudes.astype("<c16").tobytes())


def load_state(path) -> StateVector:
    with open(path, "rb") as fh:
        header = fh.read(16)
        if header[:8] != _MAGIC:
            raise ValueError("not a statevector dump")
        n = struct.unpack("<I", header[8:12])[0]
        amps = np.frombuffer(fh.read(), dtype="<c16").astype(complex)
    if amps.shape != (1 << n,):
        raise ValueError("truncated statevector dump")
    return StateVector(n, amps)
