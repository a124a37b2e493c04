from .metrics import (ConfusionCounts, LabelMetrics, ReportRow, ReportTable,
                      aggregate, analytic_report, binary_counts, chance_f1,
                      confusion, majority_f1, prf1)
from .agreement import (AgreementReport, ContingencyTable, KappaResult,
                        agreement_report, cohen_kappa, pooled_category_table)

__all__ = [
    "AgreementReport", "ConfusionCounts", "ContingencyTable", "KappaResult",
    "LabelMetrics", "ReportRow", "ReportTable", "aggregate",
    "agreement_report", "analytic_report", "binary_counts", "chance_f1",
    "cohen_kappa", "confusion", "majority_f1", "pooled_category_table",
    "prf1",
]
