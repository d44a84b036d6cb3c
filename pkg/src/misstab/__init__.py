"""Mechanism assessment and non-response model fitting for incomplete
contingency tables.

A table is a fully classified stratum plus one supplemental margin per
missingness pattern.  The package answers two questions about it: what do
the observed counts alone say about each variable's missingness mechanism
(assess), and how well does each member of the non-response model catalog
explain the counts (fit_model / fit_all), with a parametric bootstrap to
gauge the stability of the assessment (bootstrap_assess).
"""

from .errors import ComputationError, TableError
from .tables import (
    ANALYSIS_SHAPES,
    IncompleteTable,
    Stratum,
    TableSchema,
    builtin_dataset,
    builtin_dataset_description,
    builtin_dataset_names,
    dump_table,
    load_table,
    load_table_csv,
    pattern_label,
    scale_counts,
    sniff_and_load,
    subtable,
)
from .odds import (
    CLASS_INCONCLUSIVE,
    CLASS_MAR,
    CLASS_MCAR_OR_NMAR,
    MEMBERSHIP_INSIDE,
    MEMBERSHIP_OUTSIDE,
    MEMBERSHIP_UNDEFINED,
    AssessmentVerdict,
    CountRatio,
    FamilyAssessment,
    OddsInterval,
    OddsQuery,
    QueryRecord,
    assess,
    list_queries,
    membership,
    nonresponse_odds,
    response_odds,
)
from .models import (
    DF_CONVENTIONS,
    DF_MULTINOMIAL,
    DF_POISSON_CELLS,
    MECH_MAR,
    MECH_MCAR,
    MECH_NMAR,
    DesignStructure,
    Mechanism,
    NonresponseModel,
    build_design,
    degrees_of_freedom,
    enumerate_models,
    generating_class,
    get_model,
    indicator_factor,
    is_perfect_fit,
    model_summary,
    observed_statistic_count,
    parameter_count,
)
from .fitting import (
    FitResult,
    MarBoundRecord,
    MarBoundReport,
    aic_bic,
    chi_square_sf,
    collapse_cross,
    fit_all,
    fit_closed_form,
    fit_em,
    fit_model,
    fitted_containment,
    g_squared,
    mar_bounds,
)
from .bootstrap import (
    BootstrapSummary,
    FamilyBootstrap,
    bootstrap_assess,
    resample,
)

__version__ = "1.0.0"

__all__ = [
    "ANALYSIS_SHAPES",
    "AssessmentVerdict",
    "BootstrapSummary",
    "CLASS_INCONCLUSIVE",
    "CLASS_MAR",
    "CLASS_MCAR_OR_NMAR",
    "ComputationError",
    "CountRatio",
    "DF_CONVENTIONS",
    "DF_MULTINOMIAL",
    "DF_POISSON_CELLS",
    "DesignStructure",
    "FamilyAssessment",
    "FamilyBootstrap",
    "FitResult",
    "IncompleteTable",
    "MarBoundRecord",
    "MarBoundReport",
    "MECH_MAR",
    "MECH_MCAR",
    "MECH_NMAR",
    "MEMBERSHIP_INSIDE",
    "MEMBERSHIP_OUTSIDE",
    "MEMBERSHIP_UNDEFINED",
    "Mechanism",
    "NonresponseModel",
    "OddsInterval",
    "OddsQuery",
    "QueryRecord",
    "Stratum",
    "TableError",
    "TableSchema",
    "aic_bic",
    "assess",
    "bootstrap_assess",
    "build_design",
    "builtin_dataset",
    "builtin_dataset_description",
    "builtin_dataset_names",
    "chi_square_sf",
    "collapse_cross",
    "degrees_of_freedom",
    "dump_table",
    "enumerate_models",
    "fit_all",
    "fit_closed_form",
    "fit_em",
    "fit_model",
    "fitted_containment",
    "g_squared",
    "generating_class",
    "get_model",
    "indicator_factor",
    "is_perfect_fit",
    "list_queries",
    "load_table",
    "load_table_csv",
    "mar_bounds",
    "membership",
    "model_summary",
    "nonresponse_odds",
    "observed_statistic_count",
    "parameter_count",
    "pattern_label",
    "resample",
    "response_odds",
    "scale_counts",
    "sniff_and_load",
    "subtable",
    "__version__",
]
