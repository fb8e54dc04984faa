"""Deterministic link-level simulator for surface-aided radio links."""

from .baselines import (
    RelaySpec,
    df_relay_hop_snrs,
    df_relay_se,
    relay_from_area,
    required_area,
    required_area_crossover,
    tx_array_snr,
)
from .estimation import (
    SWEEP_CSV_HEADER,
    EstimationResult,
    SweepPlan,
    dft_sweep,
    effective_se,
    grouped_dft_sweep,
    ls_estimate,
    on_off_sweep,
    select_and_score,
    simulate_sweep,
    write_sweep_csv,
)
from .propagation import (
    CascadedChannel,
    LinkBudget,
    cascaded_channel,
    far_field_amplitude_sum,
    freespace_gain,
    from_db,
    mirror_end_to_end_gain,
    noise_power,
    to_db,
)
from .runner import (
    Scenario,
    ScenarioError,
    load_scenario,
    run_all,
    run_experiment,
    scenario_from_dict,
)
from .scene import (
    SPEED_OF_LIGHT_M_S,
    CarrierSpec,
    Placement,
    RisArray,
    build_planar_ris,
    surface_area,
)
from .surface import (
    LinkMetrics,
    PhaseConfig,
    beam_pattern,
    config_mirror_mimicking,
    config_optimal,
    evaluate,
    group_config,
    group_index_map,
    hpbw,
    quantize_config,
)

__version__ = "0.1.0"
