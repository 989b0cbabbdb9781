"""Wideband near-field hybrid beamforming with true-time-delay networks."""

from .config import (SystemConfig, UserLocation, paper_config, desk_config, PRESETS,
                     db_to_linear, linear_to_db, dbm_to_watts, watts_to_dbm)
from .channel import (NearFieldChannel, generate_channel, los_channel, random_channel,
                      array_response, subcarrier_frequencies)
from .topology import (TtdTopology, TopologyKind, PARALLEL, SERIAL_F, SERIAL_B, HYBRID, HFB,
                       cumulative_delays, ttd_phase_matrix, SplitterPlan, splitter_equal_power,
                       splitter_equalized, cascade_output_powers, effective_insertion_loss)
from .single_user import (subarray_geometry, infinite_range_design, classify_monotonicity,
                          finite_range_design, design, conventional_design, array_gain,
                          single_user_rate, Monotonicity)
from .solver import SolverParams, BeamformerSet, SolveResult, penalty_solve, full_digital_solve
from .evaluation import (EvaluationReport, spectral_efficiency, benchmark_full_digital,
                         benchmark_optimal_ttd, benchmark_conventional, evaluate_scheme)
from .scenario import Campaign, ScenarioError, load as load_scenario, validate_scenario
from .experiments import run_campaign, single_user_table
from .kernels import BACKEND

__version__ = "0.1.0"
