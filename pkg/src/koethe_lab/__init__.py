"""Seminorm computations, partition algorithms and inequality certificates
for graded sequence algebras and their smooth-operator truncations."""

__version__ = "0.1.0"

from .logtower import (  # noqa: F401
    LogTower,
    LogTowerError,
    lt_add,
    lt_cmp,
    lt_div,
    lt_encode,
    lt_exp,
    lt_from_int,
    lt_from_ln,
    lt_from_real,
    lt_mul,
    lt_one,
    lt_parse,
    lt_pow,
    lt_zero,
    log_component_rel_diff,
)
from .koethe import (  # noqa: F401
    Certificate,
    CertStatus,
    CheckBounds,
    KoetheMatrix,
    SeqVector,
    Witness,
    condition_iv_check,
    dn_check,
    dn_exponent,
    equivalence_check,
    geometric_matrix,
    gp_nuclearity_check,
    matrix_from_rows,
    norm_table_csv,
    pairing,
    power_matrix,
    s_dual_norm,
    s_norm,
    scaled_power_matrix,
    seminorm,
)
