"""Overhead and utilization analysis of fixed and flexible TTI frame designs
for millimeter-wave cellular links, with a symbol-level scheduling simulator."""

from .channel import (AntennaConfig, ArchKind, BeamformingArch, LinkBudget, PathLossModel,
                      PathLossState, SnrDistribution, SnrSample, SpectralEfficiencyParams,
                      bf_gain, effective_snr, omni_gain, quantized_snr, sample_omni_snr,
                      sample_snr_distribution, spectral_efficiency)
from .frame import FrameParams, TtiMode, allocation_time, n_symbols, round_to_symbols
from .traffic import (BurstyLogNormal, FitError, FullBufferTcp, NoTraffic, sample_arrivals,
                      sample_pdu_size, tcp_ack_bits)
from .utilization import (UtilizationReport, tcp_ack_time_min, tcp_segments_per_tti,
                          util_bursty_fixed, util_bursty_flexible, util_tcp)
from .overhead import (ControlMsg, InfeasibleError, OverheadReport, SrMode, cqi_overhead,
                       dl_ack_overhead, dl_grant_overhead, format_table2, sr_overhead, table2,
                       total_overhead, ul_ack_overhead, ul_grant_overhead)
from .scenario import (Scenario, ScenarioError, dump_scenario, list_templates, load_scenario,
                       load_template)
from .analysis import analytic_prediction, bursty_tti_statistics, scenario_utilization
from .simulator import (SchedulerError, SimReport, Simulation, check_invariants, rrc_experiment,
                        run, scheduler_step)
from .experiments import SweepError, SweepSpec, run_experiment

__version__ = "0.1.0"
