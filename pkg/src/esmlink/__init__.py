"""Enhanced spatial modulation: codebooks, bounds and link-level simulation."""

from .lattice import (
    Constellation,
    LatticePoint,
    avg_energy,
    cross_min_sq_dist,
    min_sq_dist,
    union,
)
from .constellations import (
    build_extension,
    build_primary_qam,
    build_primary_subset,
    build_secondary,
    build_tf_family,
)
from .codebooks import (
    Codebook,
    Codeword,
    SingleUseCodebook,
    TwoUseCodebook,
    antenna_combination_bits,
    build_codebook,
    build_esm_type1,
    build_esm_type1_general,
    build_esm_type2,
    build_esm_type2_8tx,
    build_esm_type3,
    build_msm,
    build_tf_space,
    verify_alpha_beta,
)
from .channel import NoiseConfig, sample_channel, transmit
from .decoders import DecodeResult, decode_type3, ml_exhaustive, sphere_decode
from .analysis import (
    apep_union_bound,
    cer_bound,
    certify_min_distance,
    energy_table,
    flops_per_decision,
    pep,
    snr_gain_db,
)
from .simulator import CerPoint, SimConfig, gain_at_cer, gain_vs_nr, run_cer

__version__ = "0.1.0"
