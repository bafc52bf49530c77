"""Spin-1/2 dynamics and metrology on sparse coupling graphs.

Sparse long-range coupling graphs (powers-of-two, hypercube) emulate
one-axis-twisting dynamics and prepare Heisenberg-limited probe states with
only ~log2(N) couplings per spin.  This package provides the coupling
graphs, an exact statevector engine for the XY model, the metrology
diagnostics (QFI, Wineland squeezing, GHZ overlap, tripartite mutual
information), the spectral-gap analysis that explains the protection of
collective dynamics, and the stroboscopic tweezer-array circuit protocol.
"""

from .graphs import (Boundary, CouplingGraph, GraphKind, a2a_edge_count,
                     build_graph, edge_count, graph_from_json, graph_to_json,
                     normalized_time, physical_time, predicted_tstar)
from .core import (DensityMatrix, EvolutionError, Gate, GlobalRotation,
                   HalfAngleRotationZ, PairPhase, PairRotationZ,
                   SitePermutation, StateVector, apply_circuit, apply_gate,
                   apply_hxy, basis_state, coherent_x_state, evolve_xy,
                   ghz_x_state, load_state, overlap, reduced_density,
                   save_state)
from .metrology import (MetricsRecord, compute_metrics, ghz_overlap,
                        j2_expectation, metrics_to_csv, metrics_to_jsonl,
                        mutual_information, qfi_axis, qfi_optimal,
                        quarter_partition, subsystem_entropy,
                        tripartite_mutual_information, wineland_xi2)
from .spectral import (GapMethod, GapResult, GapSweepRow, gap_closed_form,
                       gap_numeric, gap_spinwave_1d, gap_sweep, goat_decompose,
                       laplacian, powerlaw_gap_asymptote, spinwave_minimum)
from .strobe import (FidelityModel, Move, Schedule, StrobeParams,
                     build_strobe_circuit, compile_ising, faro_perm,
                     fidelity_estimate, gate_counts, hypercube_edge_coverage,
                     pwr2_schedule, pwr2_stage_bonds, schedule_to_json,
                     simulate_strobe, write_schedule_json)
from .trajectories import (QfiMaximum, ScalingFit, find_max_qfi,
                           norm_time_grid, qfi_scaling_fit, scan_evolution,
                           sqrt_n_time, strobe_m_sweep)

__version__ = "0.1.0"
