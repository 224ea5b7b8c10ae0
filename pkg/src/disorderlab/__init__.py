"""Desk-scale numerical laboratory for two-valued random lattice operators."""

from .geometry import (
    BoxSpec,
    GeometryError,
    RBitGeometry,
    Site,
    TiltedRect,
    box_sites,
    boundaries,
    cover_defects,
    diagonal_trace,
    is_r_dyadic,
    is_sparse,
    r_dyadic_box,
    r_geometry,
    regularity_verdict,
    theta1,
    tilted_sites,
)
from .fields import PotentialField, flip, from_json, sample, to_json, with_override
from .operators import (
    LatticeOperator,
    SingularityError,
    Spectrum,
    assemble,
    assemble_cut,
    assemble_extended_cut,
    count_below,
    eigendecompose,
    green,
    inverse_norm,
    reflect,
)
from .percolation import (
    ClusterLabeling,
    cluster_S,
    is_admissible,
    is_perfect,
    percolation_event,
    zero_clusters,
)
from .catalog import EnergyCatalog, dos_histogram, eig_catalog, enumerate_connected
from .rankone import Classification, classify_site, monotone_shift_predicate, obstruction_sign

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
