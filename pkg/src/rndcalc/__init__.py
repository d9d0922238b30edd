"""Radon-Nikodym derivatives on finite spaces and grid densities, with checkers
for the standard derivative identities and discrete information measures."""

from .conditional import (
    ConditionalKernel,
    JointMeasure,
    bayes_quantities,
    binary_symmetric_channel,
    check_bayes_like,
    check_inverse_bayes,
    check_unit_measure,
    conditional_from_joint,
    constant_kernel,
    identity_kernel,
    inverse_bayes_quantities,
    joint_from,
    marginal_x,
    marginal_y,
    output_marginal,
    swap,
)
from .density import (
    DensityMeasure,
    check_chain_rule_density,
    kl_density,
    kl_density_floored,
    rnd_density,
    verify_rnd_density,
)
from .errors import CapacityError, DomainError, MeasureError, StructuralError, UnsatisfiableError
from .information import (
    check_il_identity,
    identity_rhs,
    kl_divergence,
    lautum_information,
    mutual_information,
)
from .measure import (
    ProbabilityMeasure,
    SampleSpace,
    SignedMeasure,
    SubsetMask,
    counting,
    integrate,
    is_absolutely_continuous,
    measure_of,
    mix,
    probability,
    product,
    scale,
    signed,
    total_mass,
)
from .report import CheckReport
from .rnd import (
    MeasureSequence,
    RNDFunction,
    as_equal,
    check_chain_rule,
    check_change_of_measure,
    check_continuity,
    check_linearity,
    check_multiplicative_inverse,
    check_nonneg_finite,
    check_product_measures,
    check_proportional,
    check_radon_nikodym,
    rnd,
)
from .suite import THEOREM_IDS, run_suite

__version__ = "0.1.0"
