"""Stroboscopic tweezer-array protocol emulating sparse-graph XY dynamics.

One Trotter step of length dt = t*/M applies, for each shuffle stage, a
pair of conjugated Ising layers

    U(dt) = [R_x e^{-i H_zz dt/2} R_x^dag] [R_y e^{-i H_zz dt/2} R_y^dag]

on physical nearest-neighbour pairs (2v-1, 2v), followed by a Faro shuffle
of the atom positions.  Over log2(N) stages the pairs sweep out the
hypercube edge set, so for large M the circuit converges to continuous XY
evolution on the hypercube graph.  An alternative rearrangement schedule
produces the powers-of-two graph.  Each pairwise Ising evolution
U_zz(theta) = exp(-i sigma^z sigma^z theta) compiles exactly into one
CPHASE plus a two-site z rotation and a global phase.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .core import (GlobalRotation, HalfAngleRotationZ, PairPhase,
                   PairRotationZ, SitePermutation, StateVector, apply_gate)
from .graphs import Boundary, GraphKind, build_graph
from .metrology import compute_metrics

HYPERCUBE_XY = "hypercube"
PWR2_XY = "pwr2"


@dataclass(frozen=True)
class StrobeParams:
    """Protocol parameters: N = 2**m spins, M Trotter iterations, total
    physical evolution time t_star, and the target coupling graph."""

    n_spins: int
    m_iterations: int
    t_star: float
    target: str = HYPERCUBE_XY
    chi0: float = 1.0

    def __post_init__(self):
        n = self.n_spins
        if n < 2 or (n & (n - 1)) != 0:
            raise ValueError(f"strobe protocol requires N = 2**m, got {n}")
        if self.m_iterations < 1:
            raise ValueError("need at least one Trotter iteration")
        if not self.t_star > 0:
            raise ValueError("t_star must be positive")
        if self.target not in (HYPERCUBE_XY, PWR2_XY):
            raise ValueError(f"unknown target {self.target!r}")

    @property
    def dt(self) -> float:
        return self.t_star / self.m_iterations

    @property
    def theta(self) -> float:
        # per-pair Ising angle: H_zz = 2 chi0 Sz Sz per pair evolved for
        # dt/2 gives U_zz(theta) with theta = chi0 dt / 4
        return self.chi0 * self.dt / 4.0


@dataclass(frozen=True)
class Move:
    """Annotation describing the rearrangement that produced the following
    gates (Faro stage or PWR2 row move); acts as the identity on the state."""
    note: str


@dataclass
class Schedule:
    """Ordered gate list plus move annotations, ready for export."""
    n_spins: int
    items: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def gates(self) -> list:
        return [it for it in self.items if not isinstance(it, Move)]

    def count_2q(self) -> int:
        return sum(isinstance(it, PairPhase) for it in self.items)


def faro_perm(n: int) -> tuple:
    """Faro shuffle on N = 2**m sites: the least significant bit of the
    m-bit site label becomes the most significant, i = b_m..b_2 b_1 ->
    b_1 b_m..b_2.  Applying it m times gives the identity."""
    if n < 2 or (n & (n - 1)) != 0:
        raise ValueError(f"Faro shuffle requires N = 2**m, got {n}")
    m = n.bit_length() - 1
    return tuple(((i >> 1) | ((i & 1) << (m - 1))) for i in range(n))


def _compose(p: tuple, q: tuple) -> tuple:
    """Permutation p followed by q."""
    return tuple(q[p[i]] for i in range(len(p)))


def _invert(p: tuple) -> tuple:
    inv = [0] * len(p)
    for i, x in enumerate(p):
        inv[x] = i
    return tuple(inv)


def _physical_pairs(n: int) -> list:
    return [(2 * v, 2 * v + 1) for v in range(n // 2)]


def hypercube_edge_coverage(n: int) -> list:
    """Logical pair set addressed at each Faro stage.

    Stage k acts on physical pairs (2v, 2v+1) after k-1 accumulated
    shuffles; pulled back to atom labels these are Hamming-distance-1 pairs,
    and the union over all log2(N) stages is exactly the hypercube edge set.
    """
    faro = faro_perm(n)
    m = n.bit_length() - 1
    stages = []
    atom_of_pos = tuple(range(n))  # atom currently at each position
    for _ in range(m):
        stages.append(sorted(tuple(sorted((atom_of_pos[a], atom_of_pos[b])))
                             for a, b in _physical_pairs(n)))
        # shuffle: the atom at position p moves to position faro[p]
        atom_of_pos = tuple(atom_of_pos[pos] for pos in _invert(faro))
    return stages


def compile_ising(theta: float) -> tuple:
    """Angles (phi, varphi, alpha) with e^{i alpha} R_z(varphi) U_CZ(phi)
    = exp(-i sigma^z sigma^z theta) exactly: phi = 4 theta, varphi = 2 theta,
    alpha = theta."""
    return 4.0 * theta, 2.0 * theta, theta


def _ising_layer(pairs, theta: float) -> list:
    """Exact gate decomposition of prod_pairs U_zz(theta), up to the global
    phase alpha = theta per pair."""
    phi, varphi, _ = compile_ising(theta)
    gates = [PairPhase(i, j, phi) for i, j in pairs]
    gates.append(PairRotationZ(tuple(tuple(p) for p in pairs), varphi))
    return gates


def _conjugated_stage(pairs, theta: float) -> list:
    """[R_x e^{-i H_zz dt/2} R_x^dag][R_y e^{-i H_zz dt/2} R_y^dag] as a
    gate list in application order (the y-conjugated half acts first)."""
    gates = []
    for axis in ("y", "x"):
        gates.append(GlobalRotation(axis, -math.pi / 2))
        gates.extend(_ising_layer(pairs, theta))
        gates.append(GlobalRotation(axis, math.pi / 2))
    return gates


def build_strobe_circuit(p: StrobeParams) -> Schedule:
    """Full gate schedule for M Trotter steps of the chosen target."""
    n = p.n_spins
    m = n.bit_length() - 1
    sched = Schedule(n_spins=n, meta={
        "target": p.target, "n": n, "m_iterations": p.m_iterations,
        "t_star": p.t_star, "dt": p.dt, "theta": p.theta,
    })
    if p.target == HYPERCUBE_XY:
        faro = faro_perm(n)
        pairs = _physical_pairs(n)
        for step in range(p.m_iterations):
            for stage in range(m):
                sched.items.extend(_conjugated_stage(pairs, p.theta))
                sched.items.append(SitePermutation(faro))
                sched.items.append(Move(f"faro shuffle, stage {stage + 1} of "
                                        f"{m}, step {step + 1}"))
    else:
        stage_bonds = pwr2_stage_bonds(n)
        for step in range(p.m_iterations):
            for stage, bonds in enumerate(stage_bonds):
                sched.items.append(Move(f"pwr2 row move to distance "
                                        f"{1 << stage}, step {step + 1}"))
                sched.items.extend(_pwr2_stage_gates(n, stage, p.theta,
                                                     conjugated=True))
    return sched


# ---------------------------------------------------------------------------
# PWR2 rearrangement schedule

def pwr2_stage_bonds(n: int) -> list:
    """Bond set addressed at each PWR2 stage m' = 1..log2(N).

    At stage m' the atoms regroup into chains whose consecutive members are
    logical indices 2**(m'-1) apart (residue classes mod 2**(m'-1)); the
    chain nearest-neighbour bonds are exactly the distance-2**(m'-1) pairs,
    and the union over stages is the open-boundary PWR2 edge set.
    """
    if n < 2 or (n & (n - 1)) != 0:
        raise ValueError(f"PWR2 schedule requires N = 2**m, got {n}")
    stages = []
    for stage in range(n.bit_length() - 1):
        step = 1 << stage
        bonds = []
        for residue in range(step):
            chain = list(range(residue, n, step))
            bonds.extend((chain[k], chain[k + 1]) for k in range(len(chain) - 1))
        stages.append(sorted(bonds))
    return stages


def _chains(n: int, stage: int) -> list:
    step = 1 << stage
    return [list(range(residue, n, step)) for residue in range(step)]


def _pwr2_stage_gates(n: int, stage: int, theta: float,
                      conjugated: bool) -> list:
    """Gates of one PWR2 stage: CPHASE layers over even then odd chain
    bonds, z rotations with half the angle on chain endpoints, optionally
    wrapped in the x/y conjugation of a Trotter stage."""
    phi, varphi, _ = compile_ising(theta)
    chains = _chains(n, stage)
    even, odd = [], []
    interior, endpoints = [], []
    for chain in chains:
        bonds = [(chain[k], chain[k + 1]) for k in range(len(chain) - 1)]
        even.extend(bonds[0::2])
        odd.extend(bonds[1::2])
        endpoints.extend((chain[0], chain[-1]))
        interior.extend(chain[1:-1])

    def ising_block():
        gates = [PairPhase(i, j, phi) for i, j in even]
        gates.extend(PairPhase(i, j, phi) for i, j in odd)
        if interior:
            gates.append(HalfAngleRotationZ(tuple(interior), 2 * varphi))
        gates.append(HalfAngleRotationZ(tuple(endpoints), varphi))
        return gates

    if not conjugated:
        return ising_block()
    gates = []
    for axis in ("y", "x"):
        gates.append(GlobalRotation(axis, -math.pi / 2))
        gates.extend(ising_block())
        gates.append(GlobalRotation(axis, math.pi / 2))
    return gates


def pwr2_schedule(n: int, theta: float = 0.0) -> Schedule:
    """One pass over the PWR2 rearrangement stages (a single H_zz block per
    stage).  The final stage has chains of length 2, hence a single CPHASE
    layer; every other stage needs two."""
    sched = Schedule(n_spins=n, meta={"target": PWR2_XY, "n": n,
                                      "theta": theta})
    for stage in range(n.bit_length() - 1):
        sched.items.append(Move(f"pwr2 row move to distance {1 << stage}"))
        sched.items.extend(_pwr2_stage_gates(n, stage, theta, conjugated=False))
    return sched


# ---------------------------------------------------------------------------
# simulation

def simulate_strobe(p: StrobeParams, psi0: StateVector,
                    tmi_partition=None) -> tuple:
    """Run the schedule and return (final state, metrics).

    Site permutations are tracked in a logical<->physical map instead of
    moving amplitudes; gates addressed to physical positions are applied to
    the atoms currently there.  Permutations compose to the identity over
    one full Trotter step, so final metrics are in logical order.
    """
    if psi0.n_spins != p.n_spins:
        raise ValueError("initial state size does not match parameters")
    sched = build_strobe_circuit(p)
    psi = psi0
    atom_of_pos = tuple(range(p.n_spins))
    for item in sched.items:
        if isinstance(item, Move):
            continue
        if isinstance(item, SitePermutation):
            atom_of_pos = tuple(atom_of_pos[pos]
                                for pos in _invert(tuple(item.perm)))
            continue
        psi = apply_gate(psi, _relabel(item, atom_of_pos))
    if atom_of_pos != tuple(range(p.n_spins)):
        raise RuntimeError("schedule permutations did not compose to identity")

    graph = build_graph(GraphKind.HYPERCUBE if p.target == HYPERCUBE_XY
                        else GraphKind.PWR2, p.n_spins, p.chi0,
                        Boundary.OPEN)
    metrics = compute_metrics(psi, t=p.t_star, graph=graph,
                              with_i3=p.n_spins >= 4,
                              tmi_partition=tmi_partition)
    return psi, metrics


def _relabel(gate, atom_of_pos):
    """Redirect a physically-addressed gate to the atoms at those positions."""
    if isinstance(gate, GlobalRotation):
        return gate
    if isinstance(gate, PairPhase):
        return PairPhase(atom_of_pos[gate.i], atom_of_pos[gate.j], gate.phi)
    if isinstance(gate, PairRotationZ):
        return PairRotationZ(tuple((atom_of_pos[i], atom_of_pos[j])
                                   for i, j in gate.pairs), gate.phi)
    if isinstance(gate, HalfAngleRotationZ):
        return HalfAngleRotationZ(tuple(atom_of_pos[s] for s in gate.sites),
                                  gate.phi)
    raise TypeError(f"cannot relabel {gate!r}")


# ---------------------------------------------------------------------------
# budgets

def gate_counts(p: StrobeParams) -> tuple:
    """(two-qubit, single-qubit) operation counts: M N log2 N CPHASEs and
    twice as many single-qubit operations."""
    n2 = p.m_iterations * p.n_spins * (p.n_spins.bit_length() - 1)
    return n2, 2 * n2


@dataclass(frozen=True)
class FidelityModel:
    f_2q: float
    f_1q: float

    def __post_init__(self):
        if not (0 < self.f_2q <= 1 and 0 < self.f_1q <= 1):
            raise ValueError("fidelities must lie in (0, 1]")


def fidelity_estimate(counts: tuple, model: FidelityModel) -> float:
    """Multiplicative many-body fidelity f_2q^n2q * f_1q^n1q."""
    n_2q, n_1q = counts
    return model.f_2q ** n_2q * model.f_1q ** n_1q


# ---------------------------------------------------------------------------
# export

def schedule_to_json(sched: Schedule) -> list:
    """Stable wire format: ordered list of
    {op: rot|cphase|rotz|perm|move, ...} entries."""
    out = []
    for item in sched.items:
        if isinstance(item, Move):
            out.append({"op": "move", "note": item.note})
        elif isinstance(item, GlobalRotation):
            out.append({"op": "rot", "axis": item.axis, "angle": item.angle})
        elif isinstance(item, PairPhase):
            out.append({"op": "cphase", "i": item.i, "j": item.j,
                        "phi": item.phi})
        elif isinstance(item, PairRotationZ):
            out.append({"op": "rotz", "pairs": [list(p) for p in item.pairs],
                        "phi": item.phi})
        elif isinstance(item, HalfAngleRotationZ):
            out.append({"op": "rotz", "sites": list(item.sites),
                        "phi": item.phi})
        elif isinstance(item, SitePermutation):
            out.append({"op": "perm", "perm": list(item.perm)})
        else:
            raise TypeError(f"cannot serialize {item!r}")
    return out


def write_schedule_json(sched: Schedule, path) -> None:
    doc = {"meta": sched.meta, "items": schedule_to_json(sched)}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
