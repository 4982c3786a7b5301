"""presforge: finitely presented group constructions with homological and
finite-quotient certificates."""

from .freewords import (
    Alphabet,
    Word,
    apply_map,
    commutator,
    conjugacy_test,
    cyclically_reduce,
    exponent_vector,
    free_reduce,
    parse_word,
    render_word,
)
from .presentations import (
    FinitePresentation,
    PresentationMorphism,
    amalgamated_product,
    direct_product_presentation,
    free_product,
    higman_presentations,
    hnn_extension,
    parse_presentation,
    presentation,
    render_presentation,
    tietze_eliminate_generator,
)
from .homology import (
    AbelianGroupDescriptor,
    h1,
    h2_aspherical,
    is_perfect,
    smith_normal_form,
)
from .uce import (
    CommutatorWitness,
    NormalClosureElement,
    UcePresentation,
    express_in_generators,
    find_commutator_witnesses,
    miller_uce,
    normal_closure_stream,
    uce_word_transfer,
)
from .smallcancel import (
    DehnSolver,
    MetricCertificate,
    PieceTable,
    dehn_word_problem,
    metric_certificate,
    piece_table,
)
from .constructions import (
    GeneratingSet,
    KillResult,
    PairWord,
    RipsOutput,
    acyclic_subdirect,
    conjugacy_gadget,
    delta_amalgam,
    fibre_generators,
    fibre_membership,
    kill_finite_quotients,
    rips_wise,
    super_perfectify,
)
from .quotients import (
    CosetTable,
    PermAssignment,
    finite_quotient_certificate,
    hom_search,
    todd_coxeter,
)

__version__ = "0.1.0"
