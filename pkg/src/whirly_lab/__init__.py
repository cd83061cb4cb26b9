"""whirly-lab: dyadic Gaussian trees, phase-group actions on them, and Monte
Carlo verification of the action's measure-theoretic behavior.

The pieces compose in layers: :mod:`~whirly_lab.tree` builds the random trees
and their innovation calculus, :mod:`~whirly_lab.group` acts on them by
level-indexed phase vectors, :mod:`~whirly_lab.sets` describes cylinder Borel
sets, :mod:`~whirly_lab.montecarlo` estimates their measures reproducibly, and
:mod:`~whirly_lab.experiments` / :mod:`~whirly_lab.acceptance` turn the
model's guarantees into pass/fail reports.
"""

from .rng import RngStream, as_generator
from .tree import (
    ComplexGaussianConvention,
    DepthMismatchError,
    DyadicPath,
    LevelMismatchError,
    LevelVector,
    TreeSample,
    as_path,
    conditional_levels,
    innovations,
    phi_roundtrip,
    project,
    project_vectors,
    sample_conditional,
    sample_levels,
    sample_tree,
    standard_complex,
    tree_from_innovations,
    u_stat,
    u_stat_arrays,
    u_stat_vector,
)
from .group import (
    GroupElement,
    act,
    compose,
    conjugate,
    embed,
    identity,
    make_gsk,
    random_element,
    uniform_distance,
)
from .sets import (
    ActedSet,
    AffineImage,
    BorelSet,
    ComplementSet,
    DiskProduct,
    Halfspace,
    IntersectionSet,
    UnionSet,
    acted_set,
    affine_image,
    boolean_combine,
    disk_mass,
    disk_product,
    halfspace,
    set_from_json,
    symmetric_difference,
)
from .montecarlo import (
    JointTable,
    MeasureEstimate,
    default_block_size,
    estimate_conditional_measure,
    estimate_joint_events,
    estimate_measure,
    tally_blocks,
    wilson_interval,
)
from .experiments import (
    ExperimentReport,
    positivity_scan,
    sharpness_check,
    verify_action_identity,
    verify_conditional_independence,
    verify_continuity,
    verify_convolution,
    verify_marginals,
    whirly_search,
)
from .acceptance import ACCEPTANCE_SEED, CRITERIA, Criterion, run_all

__version__ = "0.1.0"

__all__ = [
    "ACCEPTANCE_SEED",
    "ActedSet",
    "AffineImage",
    "BorelSet",
    "CRITERIA",
    "ComplementSet",
    "ComplexGaussianConvention",
    "Criterion",
    "DepthMismatchError",
    "DiskProduct",
    "DyadicPath",
    "ExperimentReport",
    "GroupElement",
    "Halfspace",
    "IntersectionSet",
    "JointTable",
    "LevelMismatchError",
    "LevelVector",
    "MeasureEstimate",
    "RngStream",
    "TreeSample",
    "UnionSet",
    "act",
    "acted_set",
    "affine_image",
    "as_generator",
    "as_path",
    "boolean_combine",
    "compose",
    "conditional_levels",
    "conjugate",
    "default_block_size",
    "disk_mass",
    "disk_product",
    "embed",
    "estimate_conditional_measure",
    "estimate_joint_events",
    "estimate_measure",
    "halfspace",
    "identity",
    "innovations",
    "make_gsk",
    "phi_roundtrip",
    "positivity_scan",
    "project",
    "project_vectors",
    "random_element",
    "run_all",
    "sample_conditional",
    "sample_levels",
    "sample_tree",
    "set_from_json",
    "sharpness_check",
    "standard_complex",
    "symmetric_difference",
    "tally_blocks",
    "tree_from_innovations",
    "u_stat",
    "u_stat_arrays",
    "u_stat_vector",
    "uniform_distance",
    "verify_action_identity",
    "verify_conditional_independence",
    "verify_continuity",
    "verify_convolution",
    "verify_marginals",
    "whirly_search",
    "wilson_interval",
]
