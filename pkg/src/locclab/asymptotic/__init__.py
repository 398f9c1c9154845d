from .domino import NoGoCertificate, domino_nogo_certificate, forced_form_search, pair_form_operator
from .lemma import LemmaCheck, full_rank_lemma_check
from .product_states import ProductSearchResult, TwoDimClassification, product_basis_2d, product_states_in_span
from .witness import (
    ConditionCheck,
    SepWitness,
    TheoremOneWitness,
    WitnessReport,
    check_product_element,
    check_theorem1_witness,
    identity_witness,
    witness_from_dict,
    witness_to_dict,
)
