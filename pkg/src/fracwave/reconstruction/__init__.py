from .fulltime import FullTimeOptions, analytic_samples, fulltime_newton, fulltime_system
from .largetime import AsymptoticTermSet, LargeTimeOptions, largetime_model, largetime_newton, masked_terms
from .peel import lhospital_order, sequential_peel
from .report import IterationRecord, ReconstructionReport, Status
from .smalltime import SmallTimeOptions, smalltime_model, smalltime_newton, smalltime_preprocess

__all__ = [
    "AsymptoticTermSet",
    "FullTimeOptions",
    "IterationRecord",
    "LargeTimeOptions",
    "ReconstructionReport",
    "SmallTimeOptions",
    "Status",
    "analytic_samples",
    "fulltime_newton",
    "fulltime_system",
    "largetime_model",
    "largetime_newton",
    "lhospital_order",
    "masked_terms",
    "sequential_peel",
    "smalltime_model",
    "smalltime_newton",
    "smalltime_preprocess",
]
