"""Optimality criteria.  Importing this package registers the built-ins."""

from .base import (
    Criterion,
    CriterionContext,
    CriterionSpec,
    build_context,
    builtin_names,
    catalog,
    get_criterion,
    register_custom,
    unregister_custom,
)
from . import design, mixed, genetics, regression, spacing  # noqa: F401  (registration)
from .design import KINDS as DESIGN_KINDS, design_values
from .genetics import lower_tri, scaled_crossprod_kernel, vanraden_amat
from .mixed import cd_mean_mm, gauss_mean_mm, gaussian_kernel, pev_mean_mm
from .regression import aic_ols, dfbetas_group, fit_logdet
from .spacing import maximin_values

EXTRA_NAMES = ("MAXIMIN", "KERNELALIGN", "AICOLS", "DFBETAS", "GAININB", "FITLOGDET")
TABLE_NAMES = tuple(DESIGN_KINDS) + ("PEVMEANMM", "CDMEANMM", "GAUSSMEANMM")

__all__ = [
    "Criterion", "CriterionContext", "CriterionSpec", "build_context", "builtin_names",
    "catalog", "get_criterion", "register_custom", "unregister_custom", "design_values",
    "vanraden_amat", "scaled_crossprod_kernel", "lower_tri", "pev_mean_mm", "cd_mean_mm",
    "gauss_mean_mm", "gaussian_kernel", "aic_ols", "fit_logdet", "dfbetas_group",
    "maximin_values", "EXTRA_NAMES", "TABLE_NAMES",
]
