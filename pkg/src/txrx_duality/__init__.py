"""Joint transmit/receive beamforming for the multiuser MIMO downlink via
uplink-downlink duality."""

from .errors import (ConfigError, DegenerateDenominator, DegenerateGain, DimensionMismatch,
                     Infeasible, NotConverged, NotHermitian, NotPositiveDefinite, Singular,
                     TxRxError)
from .model import (BeamformerState, ChannelSet, SystemConfig, config_from_dict,
                    draw_channels, init_state, load_config, validate_config)
from .numerics import EigResult, HermitianPair, dominant_gen_eigvec, solve_linear
from .sinr import (ConstraintSystem, GainTensor, constraint_system, gain_tensor,
                   sinr_downlink, sinr_uplink)
from .solver import (DualityAudit, SolveOptions, SolveReport, Status, audit_duality, solve,
                     solve_downlink_powers, solve_uplink_powers, update_receive_filters,
                     update_transmit_filters)

__version__ = '0.1.0'
