"""Syntactic transformations, class recognizers, and brute-force semantic
oracles for second-order sentences on finite relational structures."""

from .classes import (
    CLASSES,
    EXISTS_GUARDED,
    FORALL_RESTRICTED,
    NEGATIVE,
    POSITIVE,
    ClassVerdict,
    class_duality_check,
    classify,
)
from .errors import (
    BlowupError,
    BudgetExceededError,
    DomainError,
    EnumerationLimitError,
    PohammerError,
    PreconditionError,
    SignatureError,
)
from .formulas import (
    And,
    Assignment,
    Eq,
    ExistsFO,
    ExistsSO,
    FalseF,
    ForallFO,
    ForallSO,
    Formula,
    Not,
    Or,
    RelAtom,
    SOAtom,
    SOVar,
    TrueF,
    Var,
    alpha_normalize,
    conj,
    disj,
    fresh_so_var,
    fresh_var,
    free_fo_vars,
    free_so_vars,
    is_sentence,
    make_prefix,
    prefix_from_letters,
)
from .homsearch import (
    CLOSURE_KINDS,
    HOM_KINDS,
    ClosureReport,
    canonical_key,
    check_closure,
    count_structures,
    enumerate_structures,
    find_homomorphisms,
    is_isomorphic,
    verify_homomorphism,
)
from .modelcheck import (
    DEFAULT_BUDGET,
    Qbf3Instance,
    QcspInstance,
    mc_so,
    mc_so_witness,
    qcsp_canonical_structure,
    solve_qbf3,
    solve_qcsp,
)
from .normalize import (
    CNF,
    DEFAULT_SIZE_CAP,
    DNF,
    PrenexReorderWarning,
    dual_negate,
    qf_normalize,
    to_nnf,
    to_prenex,
)
from .reductions import (
    Qbf3PipelineResult,
    Qbf3ReductionKit,
    QcspPipelineResult,
    QcspReductionKit,
    build_phi_b,
    build_phi_star,
    encode_qbf3_instance,
    encode_qcsp_instance,
    load_qbf3_kit,
    load_qcsp_kit,
    run_qbf3_pipeline,
    run_qcsp_pipeline,
    write_qbf3_kit,
    write_qcsp_kit,
)
from .structures import (
    NEQ_SYMBOL,
    FiniteStructure,
    Signature,
    disjoint_union,
    expand,
    expand_with_neq,
    reduct,
    substructure,
)
from .textio import (
    ParseError,
    SourceSpan,
    alpha_equivalent,
    infer_signature,
    parse_formula,
    parse_qcsp,
    parse_qdimacs3,
    parse_signature,
    parse_structure,
    serialize_formula,
    serialize_structure,
)
from .transforms import csp_hammer, restrict, shom_transform, sup_transform

__version__ = "0.1.0"
