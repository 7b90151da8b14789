"""Verification workbench for finite atom structures of cylindric-style
and relation algebras: build structures, check frame and equational laws,
take reducts and relativizations, split atoms, and solve truncated
network-extension games exactly.
"""

from .bao import (
    BudgetExceededError,
    CaAtomStructure,
    Element,
    FrameCondition,
    FrameReport,
    check_ca_frame,
    cyl,
    delta,
    diag,
    dual_cyl,
    element,
    empty,
    singleton,
    structure_from_dict,
    structure_from_json,
    structure_to_dict,
    structure_to_json,
    subst_repl,
    subst_transp,
    top,
)
from .constructions import (
    SplitPolicy,
    SplitResult,
    basic_matrices,
    bin_forb,
    enumerate_matrices,
    full_set_algebra,
    hh_ra,
    johnson_extend,
    kappa,
    monk_atoms,
    psi,
    split_atom,
    three_cube,
    validate_matrix,
)
from .games import (
    EXISTS,
    FORALL,
    VARIANT_FRESH,
    VARIANT_REUSE,
    VARIANT_TRIANGLE,
    CaNetwork,
    GameSpec,
    RaNetwork,
    SolveResult,
    Transcript,
    drop_cyl_pair,
    network_to_dot,
    play_interactive,
    replay_transcript,
    search_budget,
    solve,
    transcript_from_json,
    transcript_to_json,
    validate_network,
)
from .hyper import (
    HyperNetwork,
    enumerate_hypernetworks,
    is_hyperbasis,
    validate_hypernetwork,
)
from .iso import (
    ca_find_isomorphism,
    ca_is_isomorphism,
    ra_find_isomorphism,
    ra_is_isomorphism,
)
from .neat import (
    IsoReport,
    NrCertificate,
    QuotientFrame,
    RaReduct,
    RlResult,
    nr,
    ra_reduct,
    rd_rho,
    restriction_iso,
    rl_x,
    rl_x_witness,
)
from .ra import (
    RaAtomStructure,
    RaAxiomReport,
    check_ra_axioms,
    ra_from_dict,
    ra_from_json,
    ra_to_dict,
    ra_to_json,
)
from .terms import (
    AtomsMode,
    EquationReport,
    Exhaustive,
    Sample,
    ca_axioms,
    check_equation,
    eval_term,
    pea_axioms,
)

__all__ = [
    "AtomsMode",
    "BudgetExceededError",
    "CaAtomStructure",
    "CaNetwork",
    "EXISTS",
    "Element",
    "EquationReport",
    "Exhaustive",
    "FORALL",
    "FrameCondition",
    "FrameReport",
    "GameSpec",
    "HyperNetwork",
    "IsoReport",
    "NrCertificate",
    "QuotientFrame",
    "RaAtomStructure",
    "RaAxiomReport",
    "RaNetwork",
    "RaReduct",
    "RlResult",
    "Sample",
    "SolveResult",
    "SplitPolicy",
    "SplitResult",
    "Transcript",
    "VARIANT_FRESH",
    "VARIANT_REUSE",
    "VARIANT_TRIANGLE",
    "basic_matrices",
    "bin_forb",
    "ca_axioms",
    "ca_find_isomorphism",
    "ca_is_isomorphism",
    "check_ca_frame",
    "check_equation",
    "check_ra_axioms",
    "cyl",
    "delta",
    "diag",
    "drop_cyl_pair",
    "dual_cyl",
    "element",
    "empty",
    "enumerate_hypernetworks",
    "enumerate_matrices",
    "eval_term",
    "full_set_algebra",
    "hh_ra",
    "is_hyperbasis",
    "johnson_extend",
    "kappa",
    "monk_atoms",
    "network_to_dot",
    "nr",
    "pea_axioms",
    "play_interactive",
    "psi",
    "ra_find_isomorphism",
    "ra_from_dict",
    "ra_from_json",
    "ra_is_isomorphism",
    "ra_reduct",
    "ra_to_dict",
    "ra_to_json",
    "rd_rho",
    "replay_transcript",
    "restriction_iso",
    "rl_x",
    "rl_x_witness",
    "search_budget",
    "singleton",
    "solve",
    "split_atom",
    "structure_from_dict",
    "structure_from_json",
    "structure_to_dict",
    "structure_to_json",
    "subst_repl",
    "subst_transp",
    "three_cube",
    "top",
    "transcript_from_json",
    "transcript_to_json",
    "validate_hypernetwork",
    "validate_matrix",
    "validate_network",
]
