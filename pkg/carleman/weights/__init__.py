# Weight sequences, associated functions and the r-sequence lemmas
from .sequence import GevreyGenerator, WeightSequence, load_weight, make_from_table, make_gevrey, read_table
from .associated import AssociatedFunction, AssociatedValue, Backend, associated_nu
from .conditions import (
    ConditionReport, check_inclusion, check_M2, check_M2star, check_nontriviality,
    check_nu_doubling, check_nu_M2_inequality,
)
from .rsequences import (
    KDirection, KWitness, MergeResult, RSequence, ShrinkResult, klemma_convert,
    merge_rsequences, shrink_r,
)

__all__ = [
    'GevreyGenerator', 'WeightSequence', 'load_weight', 'make_from_table', 'make_gevrey', 'read_table',
    'AssociatedFunction', 'AssociatedValue', 'Backend', 'associated_nu',
    'ConditionReport', 'check_inclusion', 'check_M2', 'check_M2star', 'check_nontriviality',
    'check_nu_doubling', 'check_nu_M2_inequality',
    'KDirection', 'KWitness', 'MergeResult', 'RSequence', 'ShrinkResult', 'klemma_convert',
    'merge_rsequences', 'shrink_r',
]
