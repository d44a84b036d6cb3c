"""Maximum likelihood fitting of non-response models.

Every model is fitted to the full cross of substantive variables by
recording indicators.  Where an explicit solution exists and stays strictly
positive it is used directly; otherwise an expectation-maximization loop
distributes each supplemental count over the cells it collapses, then
rescales the working table to the model's sufficient margins by iterative
proportional fitting.  Fit quality is the deviance of the observed strata
against the collapsed fitted expectations, with tail probabilities from the
chi-square survival function.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincc

from .errors import ComputationError, TableError
from .models import (
    DF_CONVENTIONS,
    DF_POISSON_CELLS,
    MECH_MAR,
    NonresponseModel,
    build_design,
    degrees_of_freedom,
    enumerate_models,
    factor_levels,
    full_cross_dims,
    generating_class,
    get_model,
    indicator_factor,
    is_perfect_fit,
    factor_axes,
    parameter_count,
)
from .tables import IncompleteTable, TableSchema

BOUNDARY_PROB = 1e-8  # fitted cell probability below this flags a boundary

METHOD_CLOSED = "closed-form"
METHOD_EM = "em"


def _indicator_index(schema: TableSchema, pattern) -> tuple:
    pat = set(pattern)
    return tuple(1 if m in pat else 0 for m in schema.missing)


def collapse_cross(mu: np.ndarray, schema: TableSchema, pattern):
    """Fitted expectations for one stratum: fix the indicator levels and
    sum out the unrecorded substantive axes."""
    n_sub = len(schema.names)
    idx = (slice(None),) * n_sub + _indicator_index(schema, pattern)
    sl = mu[idx]
    axes = tuple(
        schema.index(v) for v in schema.names if v in set(pattern)
    )
    if axes:
        sl = sl.sum(axis=axes)
    return sl


def _loglik(mu: np.ndarray, table: IncompleteTable) -> float:
    ll = -float(mu.sum())
    for st in table.strata:
        pat = table.pattern_of(st)
        c = np.asarray(collapse_cross(mu, table.schema, pat), dtype=float)
        y = st.counts
        mask = y > 0
        if not np.all(c[mask] > 0):
            return float("-inf")
        ll += float((y[mask] * np.log(c[mask])).sum())
    return ll


def _e_step(mu, table):
    schema = table.schema
    z = np.zeros_like(mu)
    n_sub = len(schema.names)
    for st in table.strata:
        pat = tuple(table.pattern_of(st))
        idx = (slice(None),) * n_sub + _indicator_index(schema, pat)
        if not pat:
            z[idx] = st.counts
            continue
        sl = mu[idx]
        axes = tuple(schema.index(v) for v in pat)
        size = 1
        for v in pat:
            size *= schema.levels(v)
        denom = sl.sum(axis=axes, keepdims=True)
        safe = np.where(denom > 0, denom, 1.0)
        frac = np.where(denom > 0, sl / safe, 1.0 / size)
        y = np.expand_dims(st.counts, axes)
        z[idx] = y * frac
    return z


def _margin_axes(schema: TableSchema, terms) -> tuple:
    axes = factor_axes(schema)
    ndim = len(full_cross_dims(schema))
    out = []
    for term in terms:
        keep = {axes[f] for f in term}
        out.append(tuple(a for a in range(ndim) if a not in keep))
    return tuple(out)


def _ipf(mu, z, sum_axes_list, rtol=1e-9, max_sweeps=30):
    for _ in range(max_sweeps):
        worst = 0.0
        for sum_axes in sum_axes_list:
            target = z.sum(axis=sum_axes, keepdims=True)
            cur = mu.sum(axis=sum_axes, keepdims=True)
            with np.errstate(invalid="ignore", divide="ignore"):
                ratio = np.where(cur > 0, target / np.where(cur > 0, cur, 1.0), 0.0)
            diff = np.max(
                np.abs(target - cur) / np.maximum(target, 1e-300)
            )
            worst = max(worst, float(diff))
            mu = mu * ratio
        if worst < rtol:
            break
    return mu


@dataclass(frozen=True, eq=False)
class FitResult:
    """A fitted non-response model.

    mu_hat covers the complete cross (substantive axes then indicator
    axes); pi_hat is mu_hat / N.  lambda_hat maps each term to its
    sum-to-zero effect array and is None when a fitted cell sits on the
    zero boundary.  G2 compares observed strata with the collapsed fit.
    """

    model_id: str
    model: NonresponseModel
    schema: TableSchema
    n_params: int
    mu_hat: np.ndarray
    pi_hat: np.ndarray
    lambda_hat: dict | None
    lambda_residual: float | None
    G2: float
    df: int
    df_convention: str
    p_value: float
    aic: float
    bic: float
    converged: bool
    boundary: bool
    iterations: int
    method: str
    perfect_fit: bool
    loglik_trace: tuple

    def fitted_strata(self) -> dict:
        """Collapsed fitted expectations keyed by missingness pattern."""
        return {
            pat: np.asarray(
                collapse_cross(self.mu_hat, self.schema, pat), dtype=float
            )
            for pat in self.schema.patterns()
        }


def g_squared(fit: FitResult, table: IncompleteTable) -> float:
    """Deviance of the observed strata against the collapsed fit."""
    return _g2_from_mu(fit.mu_hat, table)


def _g2_from_mu(mu, table) -> float:
    total = 0.0
    for st in table.strata:
        pat = table.pattern_of(st)
        c = np.asarray(collapse_cross(mu, table.schema, pat), dtype=float)
        y = st.counts
        mask = y > 0
        if not np.all(c[mask] > 0):
            return float("inf")
        total += 2.0 * float(
            (y[mask] * np.log(y[mask] / c[mask])).sum()
        )
    return max(total, 0.0)


def chi_square_sf(x: float, df: int) -> float:
    """Chi-square survival function P(X > x) for integer df >= 1."""
    if not isinstance(df, (int, np.integer)) or isinstance(df, bool):
        raise ComputationError("df must be a positive integer")
    if df < 1:
        raise ComputationError("df must be a positive integer")
    x = float(x)
    if math.isnan(x) or x < 0:
        raise ComputationError("x must be nonnegative")
    if math.isinf(x):
        return 0.0
    return float(gammaincc(df / 2.0, x / 2.0))


def aic_bic(fit: FitResult, table: IncompleteTable) -> tuple:
    """Deviance-based information criteria (G2 penalized by parameters)."""
    n = table.N
    return (
        fit.G2 + 2.0 * fit.n_params,
        fit.G2 + math.log(n) * fit.n_params,
    )


def _recover_lambda(model, schema, mu):
    if np.any(mu <= 0):
        return None, None
    design = build_design(model, schema)
    logmu = np.log(mu.reshape(-1))
    beta, *_ = np.linalg.lstsq(design.columns, logmu, rcond=None)
    resid = float(np.max(np.abs(design.columns @ beta - logmu)))
    lv = factor_levels(schema)
    lam = {(): np.asarray(beta[0])}
    pos = 1
    for term in model.terms:
        if not term:
            continue
        from .models import _effects_coding  # local to avoid API noise

        codes = {f: _effects_coding(lv[f]) for f in term}
        shape = tuple(lv[f] for f in term)
        arr = np.zeros(shape)
        for combo in itertools.product(*(range(lv[f] - 1) for f in term)):
            basis = np.array(1.0)
            for f, m in zip(term, combo):
                basis = np.multiply.outer(basis, codes[f][:, m])
            arr += beta[pos] * basis
            pos += 1
        lam[term] = arr
    return lam, resid


def _finalize(
    model,
    schema,
    table,
    mu,
    method,
    converged,
    iterations,
    trace,
    df_convention,
    force_boundary=False,
):
    n = table.N
    mu = np.asarray(mu, dtype=float)
    g2 = _g2_from_mu(mu, table)
    params = parameter_count(model, schema)
    df = degrees_of_freedom(model, schema, df_convention)
    if df == 0:
        p = 1.0
    elif math.isinf(g2):
        p = 0.0
    else:
        p = chi_square_sf(g2, df)
    # a model with as many parameters as observed statistics fits them
    # exactly at any interior maximum, so a visibly imperfect fit means
    # the maximum sits on the boundary of the parameter space
    saturated_miss = is_perfect_fit(model, schema) and g2 > 1e-6
    boundary = bool(
        force_boundary
        or saturated_miss
        or np.any(mu / n < BOUNDARY_PROB)
    )
    lam, resid = _recover_lambda(model, schema, mu)
    pi = mu / n
    pi.flags.writeable = False
    mu_ro = mu.copy()
    mu_ro.flags.writeable = False
    return FitResult(
        model_id=model.id,
        model=model,
        schema=schema,
        n_params=params,
        mu_hat=mu_ro,
        pi_hat=pi,
        lambda_hat=lam,
        lambda_residual=resid,
        G2=g2,
        df=df,
        df_convention=df_convention,
        p_value=p,
        aic=g2 + 2.0 * params,
        bic=g2 + math.log(n) * params,
        converged=converged,
        boundary=boundary,
        iterations=iterations,
        method=method,
        perfect_fit=is_perfect_fit(model, schema),
        loglik_trace=tuple(trace),
    )


def _resolve_model(model, schema):
    if isinstance(model, NonresponseModel):
        return model
    return get_model(schema, str(model))


def fit_em(
    model,
    table: IncompleteTable,
    tol: float = 1e-10,
    max_iter: int = 10000,
    df_convention: str = DF_POISSON_CELLS,
    init: str = "uniform",
    seed=None,
) -> FitResult:
    """Expectation-maximization fit from a deterministic uniform start.

    The E step spreads each supplemental count over the cells it collapses
    in proportion to the current fit; the M step rescales to the model's
    sufficient margins by iterative proportional fitting.  Iteration stops
    when the relative change of the observed-data log-likelihood drops
    below tol.  init="perturbed" (with a seed) jitters the start
    multiplicatively to probe for multiple modes.
    """
    schema = table.schema
    if not schema.is_analysis_shape:
        raise TableError(f"shape {schema.shape} cannot be fitted")
    model = _resolve_model(model, schema)
    if df_convention not in DF_CONVENTIONS:
        raise TableError(f"unknown df convention {df_convention}")
    if tol <= 0 or max_iter < 1:
        raise ComputationError("tol must be positive and max_iter >= 1")
    dims = full_cross_dims(schema)
    n = table.N
    if n == 0:
        raise ComputationError("empty table cannot be fitted")
    mu = np.full(dims, n / float(np.prod(dims)))
    if init == "perturbed":
        # the jitter must stay inside the model's log-linear span, or the
        # multiplicative updates would carry the extra interactions forever
        rng = np.random.default_rng(seed)
        design = build_design(model, schema)
        loadings = 0.05 * rng.standard_normal(design.columns.shape[1] - 1)
        field = design.columns[:, 1:] @ loadings
        mu = mu * np.exp(field.reshape(dims))
        mu *= n / mu.sum()
    elif init != "uniform":
        raise ComputationError(f"unknown init mode {init}")
    sum_axes_list = _margin_axes(schema, generating_class(model))
    trace = []
    prev = None
    converged = False
    iterations = 0
    for it in range(1, max_iter + 1):
        z = _e_step(mu, table)
        mu = _ipf(mu, z, sum_axes_list)
        ll = _loglik(mu, table)
        trace.append(ll)
        iterations = it
        if prev is not None and math.isfinite(ll):
            if abs(ll - prev) <= tol * (abs(prev) + 1.0):
                converged = True
                break
        prev = ll
    # the likelihood can flatten out while a cell still decays toward
    # zero; one extra step exposes that drift so the boundary is flagged
    probe = _ipf(mu, _e_step(mu, table), sum_axes_list)
    small = mu / n < 1e-4
    drifting = bool(np.any(small & (probe < 0.999 * mu)))
    return _finalize(
        model,
        schema,
        table,
        mu,
        METHOD_EM,
        converged,
        iterations,
        trace,
        df_convention,
        force_boundary=drifting,
    )


# ---------------------------------------------------------------------------
# Explicit solutions.

def _positive(arr) -> bool:
    return bool(np.all(np.asarray(arr) > 0))


def _tilt_solve(weight, target):
    """Solve sum_i weight[i, j] * s[i] = target[j] for strictly positive s.

    Returns None unless the system is square, solvable, and positive.
    """
    weight = np.asarray(weight, dtype=float)
    target = np.asarray(target, dtype=float)
    if weight.shape[0] != weight.shape[1]:
        return None
    try:
        s = np.linalg.solve(weight.T, target)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(s)) or not np.all(s > 0):
        return None
    return s


def _mshape_arrays(table):
    v1, v2 = table.schema.missing
    y11 = table.full.counts.astype(float)
    y21 = table.stratum({v1}).counts.astype(float)
    y12 = table.stratum({v2}).counts.astype(float)
    y22 = float(table.stratum({v1, v2}).counts)
    return y11, y21, y12, y22


def _assemble_mshape(table, mu11, mu21, mu12, mu22):
    dims = full_cross_dims(table.schema)
    mu = np.zeros(dims)
    mu[:, :, 0, 0] = mu11
    mu[:, :, 1, 0] = mu21
    mu[:, :, 0, 1] = mu12
    mu[:, :, 1, 1] = mu22
    return mu


def _both_missing_block(weights, total):
    wsum = weights.sum()
    if total == 0:
        return np.zeros_like(weights)
    if wsum <= 0:
        return None
    return total * weights / wsum


def _closed_m5(table):
    y11, y21, y12, y22 = _mshape_arrays(table)
    rows = y11.sum(axis=1)
    cols = y11.sum(axis=0)
    if not (_positive(rows) and _positive(cols)):
        return None
    mu21 = y21[None, :] * y11 / cols[None, :]
    mu12 = y12[:, None] * y11 / rows[:, None]
    w = y11 * (y12 / rows)[:, None] * (y21 / cols)[None, :]
    mu22 = _both_missing_block(w, y22)
    if mu22 is None:
        return None
    return _assemble_mshape(table, y11, mu21, mu12, mu22)


def _closed_m3(table):
    y11, y21, y12, y22 = _mshape_arrays(table)
    s = _tilt_solve(y11, y21)
    u = _tilt_solve(y11.T, y12)
    if s is None or u is None:
        return None
    mu21 = y11 * s[:, None]
    mu12 = y11 * u[None, :]
    mu22 = _both_missing_block(y11 * s[:, None] * u[None, :], y22)
    if mu22 is None:
        return None
    return _assemble_mshape(table, y11, mu21, mu12, mu22)


def _closed_m2(table):
    y11, y21, y12, y22 = _mshape_arrays(table)
    rows = y11.sum(axis=1)
    if not _positive(rows):
        return None
    s = _tilt_solve(y11, y21)
    if s is None:
        return None
    mu21 = y11 * s[:, None]
    mu12 = y12[:, None] * y11 / rows[:, None]
    mu22 = _both_missing_block(y11 * s[:, None] * (y12 / rows)[:, None], y22)
    if mu22 is None:
        return None
    return _assemble_mshape(table, y11, mu21, mu12, mu22)


def _closed_m1(table):
    y11, y21, y12, y22 = _mshape_arrays(table)
    rows11 = y11.sum(axis=1)
    tot11 = y11.sum()
    rows1p = rows11 + y12
    tot1p = tot11 + y12.sum()
    if not (_positive(rows11) and tot11 > 0 and tot1p > 0):
        return None
    mu11 = y11 * (rows1p / rows11)[:, None] * (tot11 / tot1p)
    s = _tilt_solve(mu11, y21)
    if s is None:
        return None
    mu21 = mu11 * s[:, None]
    mu12 = mu11 * (y12.sum() / tot11)
    mu22 = _both_missing_block(mu21.copy(), y22)
    if mu22 is None:
        return None
    return _assemble_mshape(table, mu11, mu21, mu12, mu22)


def _mirror_table(table):
    """Swap the two variables (and their strata) of a two-variable table."""
    schema = table.schema
    v1, v2 = schema.names
    from .tables import IncompleteTable as _IT, Stratum as _St, TableSchema as _TS

    mirrored = _TS((schema.variables[1], schema.variables[0]), (v2, v1))
    strata = []
    for pat in mirrored.patterns():
        src = table.stratum(set(pat))
        counts = src.counts
        if counts.ndim == 2:
            counts = counts.T
        strata.append(_St(mirrored.observed_for(pat), counts))
    return _IT(mirrored, tuple(strata))


def _unmirror_mu(mu):
    return np.transpose(mu, (1, 0, 3, 2))


def _closed_mirrored(table, base):
    mirrored = _mirror_table(table)
    mu = base(mirrored)
    if mu is None:
        return None
    return _unmirror_mu(mu)


def _closed_c4(table):
    schema = table.schema
    v = schema.missing[0]
    p = schema.index(v)
    full = table.full.counts.astype(float)
    margin = table.stratum({v}).counts.astype(float)
    coll = full.sum(axis=p)
    tot1 = full.sum()
    tot2 = margin.sum()
    grand = tot1 + tot2
    if not _positive(coll) or tot1 <= 0:
        return None
    plus = coll + margin
    factor = np.expand_dims(plus / coll, p)
    mu1 = full * factor * (tot1 / grand)
    dims = full_cross_dims(schema)
    mu = np.zeros(dims)
    mu[..., 0] = mu1
    mu[..., 1] = mu1 * (tot2 / tot1)
    return mu


def fit_closed_form(
    model,
    table: IncompleteTable,
    df_convention: str = DF_POISSON_CELLS,
) -> FitResult | None:
    """Explicit maximum likelihood fit, or None when no interior explicit
    solution applies (the caller should then fall back to fit_em).

    Explicit solutions are available for the two-variable models M1, M2,
    M3, M5, M6, M8 and for the single-missing three-variable model C4.
    The tilted ones (all but M5 and C4) additionally require a square
    substantive cross and a strictly positive tilt solution; a zero
    denominator or a non-positive tilt means the likelihood peaks on the
    boundary and None is returned.
    """
    schema = table.schema
    model = _resolve_model(model, schema)
    if df_convention not in DF_CONVENTIONS:
        raise TableError(f"unknown df convention {df_convention}")
    builders = {
        "M1": lambda t: _closed_m1(t),
        "M2": lambda t: _closed_m2(t),
        "M3": lambda t: _closed_m3(t),
        "M5": lambda t: _closed_m5(t),
        "M6": lambda t: _closed_mirrored(t, _closed_m2),
        "M8": lambda t: _closed_mirrored(t, _closed_m1),
        "C4": lambda t: _closed_c4(t),
    }
    builder = builders.get(model.id)
    if builder is None:
        return None
    mu = builder(table)
    if mu is None:
        return None
    return _finalize(
        model,
        schema,
        table,
        mu,
        METHOD_CLOSED,
        True,
        0,
        (),
        df_convention,
    )


def fit_model(
    model,
    table: IncompleteTable,
    tol: float = 1e-10,
    max_iter: int = 10000,
    df_convention: str = DF_POISSON_CELLS,
    prefer_closed: bool = True,
) -> FitResult:
    """Fit one model, using the explicit solution when it applies."""
    schema = table.schema
    model = _resolve_model(model, schema)
    if prefer_closed:
        closed = fit_closed_form(model, table, df_convention)
        if closed is not None:
            return closed
    return fit_em(
        model,
        table,
        tol=tol,
        max_iter=max_iter,
        df_convention=df_convention,
    )


def fit_all(
    table: IncompleteTable,
    tol: float = 1e-10,
    max_iter: int = 10000,
    df_convention: str = DF_POISSON_CELLS,
    prefer_closed: bool = True,
) -> tuple:
    """Fit the full catalog, ranked by G2 (ties: fewer parameters, id)."""
    fits = [
        fit_model(
            m,
            table,
            tol=tol,
            max_iter=max_iter,
            df_convention=df_convention,
            prefer_closed=prefer_closed,
        )
        for m in enumerate_models(table.schema)
    ]
    fits.sort(key=lambda f: (f.G2, f.n_params, f.model_id))
    return tuple(fits)


def best_non_perfect(fits) -> FitResult | None:
    for f in fits:
        if not f.perfect_fit:
            return f
    return None


# ---------------------------------------------------------------------------
# Model-based odds diagnostics.

def _fitted_response_values(fit: FitResult, assessed, target, pair, cond):
    """Fitted fully-classified odds over the target pair, one value per
    level of the assessed variable."""
    schema = fit.schema
    n_sub = len(schema.names)
    full = fit.mu_hat[(slice(None),) * n_sub + (0,) * len(schema.missing)]
    fixed = dict(cond)
    a, b = pair
    out = []
    for lvl in range(schema.levels(assessed)):
        idx_num = []
        idx_den = []
        for name in schema.names:
            if name == assessed:
                idx_num.append(lvl)
                idx_den.append(lvl)
            elif name == target:
                idx_num.append(a - 1)
                idx_den.append(b - 1)
            else:
                idx_num.append(fixed[name] - 1)
                idx_den.append(fixed[name] - 1)
        num = float(full[tuple(idx_num)])
        den = float(full[tuple(idx_den)])
        out.append(num / den if den > 0 else float("nan"))
    return out


def _fitted_nonresponse_value(fit: FitResult, assessed, target, pair, cond):
    schema = fit.schema
    coll = np.asarray(
        collapse_cross(fit.mu_hat, schema, (assessed,)), dtype=float
    )
    observed = [n for n in schema.names if n != assessed]
    fixed = dict(cond)
    a, b = pair
    idx_num = []
    idx_den = []
    for name in observed:
        if name == target:
            idx_num.append(a - 1)
            idx_den.append(b - 1)
        else:
            idx_num.append(fixed[name] - 1)
            idx_den.append(fixed[name] - 1)
    num = float(coll[tuple(idx_num)])
    den = float(coll[tuple(idx_den)])
    return num / den if den > 0 else float("nan")


def fitted_containment(fit: FitResult) -> tuple:
    """For every containment check, the model-based non-response odds and
    the span of the model-based response odds.

    Returns (assessed, target, pair, conditioning, value, low, high)
    tuples; entries are NaN when a fitted zero makes them undefined.
    """
    from .odds import list_queries

    out = []
    for q in list_queries(fit.schema):
        values = _fitted_response_values(
            fit, q.missing_var, q.target, q.pair, q.conditioning
        )
        finite = [v for v in values if math.isfinite(v)]
        lo = min(finite) if finite else float("nan")
        hi = max(finite) if finite else float("nan")
        val = _fitted_nonresponse_value(
            fit, q.missing_var, q.target, q.pair, q.conditioning
        )
        out.append(
            (q.missing_var, q.target, q.pair, q.conditioning, val, lo, hi)
        )
    return tuple(out)


@dataclass(frozen=True)
class MarBoundRecord:
    variable: str
    donor: str
    pair: tuple
    conditioning: tuple
    quantity_max: float
    quantity_min: float
    lower: float
    upper: float
    lambda_difference: float
    classification: str


@dataclass(frozen=True)
class MarBoundReport:
    model_id: str
    applicable: bool
    records: tuple

    @property
    def classification(self) -> str:
        if not self.applicable or not self.records:
            return "not-applicable"
        if all(r.classification == "strong-MAR" for r in self.records):
            return "strong-MAR"
        return "weak-MAR"


def mar_bounds(fit: FitResult) -> MarBoundReport:
    """Bracket test for each MAR mechanism of a fitted model.

    For a variable whose missingness depends on a donor, containment of
    the model-based non-response odds in the span of the model-based
    response odds is equivalent to the donor-by-indicator effect
    difference lying between -log(Q_max)/2 and -log(Q_min)/2, where Q is
    the ratio of the extreme response odds to the non-response odds,
    deflated by the effect difference.  A difference strictly inside the
    bracket is reported as strong-MAR, otherwise weak-MAR; models with no
    MAR mechanism (or a boundary fit) are not applicable.
    """
    schema = fit.schema
    mar_vars = [
        (v, m) for v, m in fit.model.mechanisms if m.kind == MECH_MAR
    ]
    if not mar_vars or fit.lambda_hat is None:
        return MarBoundReport(fit.model_id, False, ())
    axes = factor_axes(schema)
    records = []
    for v, mech in mar_vars:
        donor = mech.donor
        rv = indicator_factor(v)
        term = tuple(sorted((donor, rv), key=lambda f: axes[f]))
        lam = fit.lambda_hat.get(term)
        if lam is None:
            continue
        rest = [n for n in schema.names if n not in (v, donor)]
        conds = (
            [((rest[0], lvl),) for lvl in range(1, schema.levels(rest[0]) + 1)]
            if rest
            else [()]
        )
        pairs = itertools.combinations(range(1, schema.levels(donor) + 1), 2)
        for pair in pairs:
            a, b = pair
            delta = float(lam[b - 1, 1] - lam[a - 1, 1])
            for cond in conds:
                values = _fitted_response_values(fit, v, donor, pair, cond)
                omega = _fitted_nonresponse_value(fit, v, donor, pair, cond)
                finite = [x for x in values if math.isfinite(x) and x > 0]
                if not finite or not math.isfinite(omega) or omega <= 0:
                    continue
                r_max = max(finite)
                r_min = min(finite)
                q_max = (r_max / omega) * math.exp(-2.0 * delta)
                q_min = (r_min / omega) * math.exp(-2.0 * delta)
                lower = -0.5 * math.log(q_max)
                upper = -0.5 * math.log(q_min)
                strong = lower < delta < upper
                records.append(
                    MarBoundRecord(
                        variable=v,
                        donor=donor,
                        pair=pair,
                        conditioning=cond,
                        quantity_max=q_max,
                        quantity_min=q_min,
                        lower=lower,
                        upper=upper,
                        lambda_difference=delta,
                        classification="strong-MAR" if strong else "weak-MAR",
                    )
                )
    return MarBoundReport(fit.model_id, True, tuple(records))
