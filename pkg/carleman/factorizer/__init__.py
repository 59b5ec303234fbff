# Factorization kit psi * (g * f) = f and the weighted-space demos
from .kit import (
    FactorizationKit, FactorizationReport, FamilyReport, Orientation, PsiClassReport, build_kit, factorize,
    factorize_bounded_family, matching_orientation, tail_onset, verify_psi_class,
)
from .weight_systems import (
    GSMembership, SystemKind, WeightSystem, check_tib_weight, check_weight_system_axioms,
    check_weight_system_regularity, exponential_weight, gaussian_weight, gelfand_shilov_membership,
    nu_weight, unit_weight,
)

__all__ = [
    'FactorizationKit', 'FactorizationReport', 'FamilyReport', 'Orientation', 'PsiClassReport', 'build_kit',
    'factorize', 'factorize_bounded_family', 'matching_orientation', 'tail_onset', 'verify_psi_class',
    'GSMembership', 'SystemKind', 'WeightSystem', 'check_tib_weight', 'check_weight_system_axioms',
    'check_weight_system_regularity', 'exponential_weight', 'gaussian_weight', 'gelfand_shilov_membership',
    'nu_weight', 'unit_weight',
]
