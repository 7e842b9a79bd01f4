"""Two-timescale optimization of IRS-assisted MISO downlinks.

The IRS phases and amplitudes are tuned on a slow timescale by projected
zeroth-order stochastic gradient ascent, which only needs two channel
probes per step; the AP precoder is recomputed for every channel
realization by WMMSE.
"""

from .beamforming import (PrecoderMatrix, SumrateBreakdown, mrt_init, sinr, sumrate,
                          weighted_sumrate, wmmse_precoder)
from .channel import (ADJUSTABLE, UNIT, ChannelRealization, IrsPanel, IrsState, NetworkConfig,
                      StatisticalCsi, correlation_matrix, draw_statistical_csi, effective_channel,
                      effective_channel_jacobian, irs_correlation, path_loss, sample_realization)
from .errors import ConfigError, DimensionError, ParameterError
from .gradients import (ProbePair, WirtingerFactor, chain_rule_gradient, probe_channel,
                        quasi_gradient, wirtinger_factor)
from .harness import (RunRecord, SweepSpec, aggregate, estimate_constants, export_results,
                      load_results, paired_gap, run_ensemble, run_simulation, run_sweep,
                      simulation_seed)
from .scenario import METHODS, Scenario, builtin_scenario, load_scenario, parse_scenario
from .zosga import (CONSTANT, GEOMETRIC, ScheduleParams, Trajectory, project_box, run_zosga,
                    select_iterate, step_size, theorem1_bound, zosga_step)

__version__ = "0.1.0"
