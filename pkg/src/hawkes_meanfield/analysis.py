"""Replicated experiments that confront simulation with the limit theory.

Each experiment runs seeded replicates, reduces them to plain-data tables,
and derives pass/fail checks from the tables alone.  The split matters: the
``*_verdicts`` functions are pure functions of (tables, tolerances), so a
persisted report can be re-judged later and must reproduce its verdicts
bit for bit.

Replicate r of an experiment uses the derived seed replicate_seed(seed, r)
(shifted by a per-size block for multi-size experiments), from which both
the network and the event noise draw their disjoint streams.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from .errors import (
    ContractError,
    ParameterError,
    UnsupportedTransferError,
    WrongRegimeError,
)
from .fluctuations import jackknife_covariance, sample_terminal_fluctuations
from .network import build_complementary_network, sample_network
from .rng import replicate_seed
from .simulator import (
    SimulationConfig,
    compensators,
    extract_martingale_paths,
    simulate_thinning,
    simulate_time_change,
)
from .volterra import solve_mean_field

__all__ = [
    "ExperimentReport",
    "DEFAULT_TOLERANCES",
    "lln_experiment",
    "clt_experiment",
    "corollary_experiment",
    "critical_experiment",
    "independence_experiment",
    "lln_verdicts",
    "clt_verdicts",
    "corollary_verdicts",
    "critical_verdicts",
    "independence_verdicts",
    "run_experiment",
    "report_from_dict",
]

log = logging.getLogger(__name__)

_BACKENDS = {"thinning": simulate_thinning, "time_change": simulate_time_change}

DEFAULT_TOLERANCES = {
    "mean_zero_se": 3.0,        # |mean| <= this many standard errors
    "moment_match_se": 4.0,     # pooled-SE band for moment comparisons
    "diag_gap_se": 3.0,         # diagonal-vs-off-diagonal covariance gap
    "slope_rel": 0.10,          # relative band for bracket slopes
    "corr_alpha": 0.01,         # sign-test level for increment correlations
    "drift_gap_se": 3.0,        # separation of complementary drift paths
    "ratio_band": [2.0, 8.0],   # sup-error ratio across a 16x size span
    "gof_alpha": 0.01,          # goodness-of-fit floor for count laws
    "bound_slack": 1e-9,        # float slack on rigorous inequalities
}


def _tol(overrides):
    tol = dict(DEFAULT_TOLERANCES)
    if overrides:
        unknown = set(overrides) - set(tol)
        if unknown:
            raise ParameterError(f"unknown tolerance keys {sorted(unknown)}")
        tol.update({k: overrides[k] for k in overrides})
    return tol


def _pure(obj):
    """Recursively convert numpy containers to plain JSON-ready Python."""
    if isinstance(obj, dict):
        return {str(k): _pure(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_pure(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_pure(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def make_check(name, passed, observed, target, tolerance, detail=""):
    return {
        "name": str(name),
        "passed": bool(passed),
        "observed": _pure(observed),
        "target": _pure(target),
        "tolerance": _pure(tolerance),
        "detail": str(detail),
    }


@dataclass(frozen=True)
class ExperimentReport:
    """Tables plus verdicts from one experiment run.

    tables hold plain data only; checks are derived from tables through the
    experiment's verdict function and never from transient state, so
    re-judging a deserialized report reproduces them exactly.
    """

    experiment: str
    params: dict
    tolerances: dict
    tables: dict
    checks: list = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def summary_lines(self):
        out = []
        for c in self.checks:
            mark = "PASS" if c["passed"] else "FAIL"
            out.append(f"[{mark}] {self.experiment}: {c['name']} "
                       f"(observed={c['observed']}, target={c['target']}, "
                       f"tolerance={c['tolerance']})")
        return out

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "params": _pure(self.params),
            "tolerances": _pure(self.tolerances),
            "tables": _pure(self.tables),
            "checks": _pure(self.checks),
        }


def report_from_dict(data: dict) -> ExperimentReport:
    return ExperimentReport(
        experiment=data["experiment"], params=data["params"],
        tolerances=data["tolerances"], tables=data["tables"],
        checks=data.get("checks", []),
    )


_VERDICT_FUNCTIONS = {}


def _reverdict(report: ExperimentReport) -> list:
    """Recompute the checks of a (possibly deserialized) report."""
    fn = _VERDICT_FUNCTIONS[report.experiment]
    return fn(report.tables, report.tolerances)


def _simulate(backend, net, kernel, transfer, cfg):
    try:
        run = _BACKENDS[backend]
    except KeyError:
        raise ParameterError(
            f"backend must be one of {sorted(_BACKENDS)}, got {backend!r}"
        ) from None
    return run(net, kernel, transfer, cfg)


def _se(values):
    v = np.asarray(values, dtype=np.float64)
    return float(v.std(ddof=1) / math.sqrt(len(v)))


def _downsample_stride(grid, target=256):
    return max(1, (len(grid) - 1) // target)


# ----------------------------------------------------------------------
# law of large numbers
# ----------------------------------------------------------------------

def lln_experiment(*, sizes, p, q, kernel, transfer, horizon, replicates,
                   seed, backend="thinning", dt=None, tolerances=None
                   ) -> ExperimentReport:
    """Uniform convergence of every vertex input to the mean-field path.

    For each network size runs `replicates` fresh networks and measures
    E_N = max over vertices and grid times of |S_i(t) - I(t)|.  The medians
    must decrease strictly in N and the first/last ratio must sit in the
    configured band (defaults assume a 16x size span, where the expected
    decay N^{-1/2} adjusted for the growing vertex maximum gives about 3).
    """
    sizes = [int(n) for n in sizes]
    if len(sizes) < 2 or any(s < 1 for s in sizes) or sorted(sizes) != sizes:
        raise ParameterError("sizes must be an increasing list of >= 2 sizes")
    if p == 0.5:
        raise WrongRegimeError(
            "p = 1/2 collapses the mean-field drift; the uniform-convergence "
            "experiment needs the mean-field regime (use critical_experiment)"
        )
    if replicates < 3:
        raise ParameterError("need at least 3 replicates")
    tol = _tol(tolerances)
    mean_path = solve_mean_field(kernel, transfer, p, q, horizon, dt)
    sup_errors = {}
    events_mean = {}
    for block, n in enumerate(sizes):
        errs = []
        events = []
        for r in range(replicates):
            rs = replicate_seed(seed, block * replicates + r)
            net = sample_network(n, p, q, rs)
            cfg = SimulationConfig(horizon=horizon, seed=rs, dt=dt,
                                   tracked_vertices=(), record_full=True)
            res = _simulate(backend, net, kernel, transfer, cfg)
            errs.append(float(np.max(np.abs(res.full_input
                                            - mean_path.values[None, :]))))
            events.append(res.trains.total_events)
        sup_errors[str(n)] = errs
        events_mean[str(n)] = float(np.mean(events))
        log.info("lln n=%d: median sup error %.4g", n, np.median(errs))
    tables = {
        "sizes": sizes,
        "sup_errors": sup_errors,
        "medians": {str(n): float(np.median(sup_errors[str(n)])) for n in sizes},
        "events_mean": events_mean,
        "replicates": replicates,
    }
    params = {"sizes": sizes, "p": p, "q": q, "horizon": horizon,
              "replicates": replicates, "seed": seed, "backend": backend,
              "dt": dt, "kernel": kernel.kind, "transfer": transfer.kind}
    checks = lln_verdicts(tables, tol)
    return ExperimentReport("lln", params, tol, _pure(tables), checks)


def lln_verdicts(tables, tolerances):
    sizes = tables["sizes"]
    med = [tables["medians"][str(n)] for n in sizes]
    decreasing = all(a > b for a, b in zip(med, med[1:]))
    checks = [make_check(
        "median-sup-error-decreasing", decreasing, med, "strictly decreasing",
        None, detail=f"sizes {sizes}",
    )]
    lo, hi = tolerances["ratio_band"]
    ratio = med[0] / med[-1] if med[-1] > 0 else math.inf
    checks.append(make_check(
        "sup-error-ratio-in-band", lo <= ratio <= hi, ratio, [lo, hi], None,
        detail=f"median({sizes[0]}) / median({sizes[-1]})",
    ))
    return checks


_VERDICT_FUNCTIONS["lln"] = lln_verdicts


# ----------------------------------------------------------------------
# central limit theorem
# ----------------------------------------------------------------------

def clt_experiment(*, n, p, q, kernel, transfer, horizon, replicates,
                   limit_samples, seed, n_tracked=2, backend="thinning",
                   dt=None, tolerances=None) -> ExperimentReport:
    """Terminal-time fluctuation moments against the limit system.

    Finite-network side: replicates of K^{N,k}_T = sqrt(N) (S_k(T) - I(T))
    for the first n_tracked vertices plus the vertex average.  Limit side:
    limit_samples draws of the Gaussian system.  Matched within pooled
    standard-error bands; the covariance must also show the exchangeable
    structure (diagonal strictly above off-diagonal when 0 < q < 1).
    """
    if n_tracked < 2:
        raise ParameterError("n_tracked must be >= 2 (a covariance pair)")
    if replicates < 8 or limit_samples < 8:
        raise ParameterError("need at least 8 replicates and limit samples")
    tol = _tol(tolerances)
    mean_path = solve_mean_field(kernel, transfer, p, q, horizon, dt)
    i_term = mean_path.values[-1]
    root_n = math.sqrt(n)
    tracked = tuple(range(n_tracked))
    finite = np.empty((replicates, 1 + n_tracked))
    for r in range(replicates):
        rs = replicate_seed(seed, r)
        net = sample_network(n, p, q, rs)
        cfg = SimulationConfig(horizon=horizon, seed=rs, dt=dt,
                               tracked_vertices=tracked)
        res = _simulate(backend, net, kernel, transfer, cfg)
        finite[r, 0] = root_n * (res.mean_input[-1] - i_term)
        finite[r, 1:] = root_n * (res.tracked_input[:, -1] - i_term)
        if r and r % 100 == 0:
            log.info("clt replicate %d/%d", r, replicates)
    limit = sample_terminal_fluctuations(mean_path, kernel, transfer, p, q,
                                         n_tracked, limit_samples, seed)
    lim_rows = np.column_stack([limit["kbar"], limit["k"]])

    cov_f, se_f, loo_f = jackknife_covariance(finite, return_loo=True)
    cov_l, se_l, _ = jackknife_covariance(lim_rows, return_loo=True)
    gap_loo = loo_f[:, 1, 1] - loo_f[:, 1, 2]
    r_count = len(finite)
    gap_center = gap_loo.mean()
    gap_se = math.sqrt((r_count - 1) / r_count
                       * float(np.sum((gap_loo - gap_center) ** 2)))
    tables = {
        "n": n,
        "finite": {
            "replicates": replicates,
            "mean": finite.mean(axis=0),
            "se_mean": [_se(finite[:, j]) for j in range(finite.shape[1])],
            "cov": cov_f, "cov_se": se_f,
        },
        "limit": {
            "samples": limit_samples,
            "mean": lim_rows.mean(axis=0),
            "se_mean": [_se(lim_rows[:, j]) for j in range(lim_rows.shape[1])],
            "cov": cov_l, "cov_se": se_l,
        },
        "diag_gap": {"value": float(cov_f[1, 1] - cov_f[1, 2]), "se": gap_se},
        "q": q,
        "values_finite": finite,
    }
    params = {"n": n, "p": p, "q": q, "horizon": horizon,
              "replicates": replicates, "limit_samples": limit_samples,
              "n_tracked": n_tracked, "seed": seed, "backend": backend,
              "dt": dt, "kernel": kernel.kind, "transfer": transfer.kind}
    checks = clt_verdicts(tables, tol)
    return ExperimentReport("clt", params, tol, _pure(tables), checks)


def clt_verdicts(tables, tolerances):
    fin, lim = tables["finite"], tables["limit"]
    band = tolerances["moment_match_se"]
    checks = []

    def _pooled(label, a, se_a, b, se_b):
        gap = abs(a - b)
        pooled = math.hypot(se_a, se_b)
        checks.append(make_check(
            label, gap <= band * pooled, a, b, band * pooled,
            detail=f"|gap|={gap:.4g}, pooled SE={pooled:.4g}",
        ))

    _pooled("mean-kbar-matches-limit", fin["mean"][0], fin["se_mean"][0],
            lim["mean"][0], lim["se_mean"][0])
    _pooled("mean-k1-matches-limit", fin["mean"][1], fin["se_mean"][1],
            lim["mean"][1], lim["se_mean"][1])
    _pooled("var-k1-matches-limit", fin["cov"][1][1], fin["cov_se"][1][1],
            lim["cov"][1][1], lim["cov_se"][1][1])
    _pooled("cov-k1k2-matches-limit", fin["cov"][1][2], fin["cov_se"][1][2],
            lim["cov"][1][2], lim["cov_se"][1][2])

    gap = tables["diag_gap"]
    q = tables["q"]
    if 0.0 < q < 1.0:
        need = tolerances["diag_gap_se"] * gap["se"]
        checks.append(make_check(
            "cov-diagonal-exceeds-offdiagonal", gap["value"] > need,
            gap["value"], f"> {need:.4g}", tolerances["diag_gap_se"],
            detail="finite-size covariance, vertex pair (1, 2)",
        ))
    else:
        checks.append(make_check(
            "cov-diagonal-exceeds-offdiagonal", True, gap["value"],
            "degenerate (q in {0, 1})", None,
            detail="structure check only applies for 0 < q < 1",
        ))
    return checks


_VERDICT_FUNCTIONS["clt"] = clt_verdicts


# ----------------------------------------------------------------------
# corollary statistics (population averages of compensated counts)
# ----------------------------------------------------------------------

def corollary_experiment(*, sizes, p, q, kernel, transfer, horizon,
                         replicates, seed, backend="thinning", dt=None,
                         tolerances=None) -> ExperimentReport:
    """Compensated-count averages: vanishing sup, CLT at root-N, coupling.

    Per size and replicate the unsigned compensated average
    A_N(s) = N^{-1} sum_j (Z^j_s - int_0^s h(S_j)) is recorded; its sup must
    shrink from the smallest to the largest size.  At the largest size the
    root-N statistic X^0_T is checked for mean zero and for variance
    int_0^T h(I) ds, the pointwise linearization of h(S_0(T)) around I(T)
    is checked against the rigorous curvature bound, and the correlation
    between the signed and unsigned statistics is compared with 2p - 1.
    """
    sizes = [int(n) for n in sizes]
    if len(sizes) < 2 or sorted(sizes) != sizes:
        raise ParameterError("sizes must be an increasing list of >= 2 sizes")
    if replicates < 8:
        raise ParameterError("need at least 8 replicates")
    if transfer.second_deriv_sup is None:
        raise UnsupportedTransferError(
            "the linearization check needs a curvature bound "
            "(transfer.second_deriv_sup)"
        )
    tol = _tol(tolerances)
    mean_path = solve_mean_field(kernel, transfer, p, q, horizon, dt)
    i_term = mean_path.values[-1]
    h_term = float(transfer(i_term))
    hp_term = float(transfer.derivative(i_term))
    rate_integral = float(np.trapezoid(transfer(mean_path.values),
                                       mean_path.grid))

    sup_stats = {}
    x0_terminal = []
    xu_terminal = []
    lin_excess = -math.inf
    for block, n in enumerate(sizes):
        sups = []
        root_n = math.sqrt(n)
        for r in range(replicates):
            rs = replicate_seed(seed, block * replicates + r)
            net = sample_network(n, p, q, rs)
            cfg = SimulationConfig(horizon=horizon, seed=rs, dt=dt,
                                   tracked_vertices=(0,), record_full=True)
            res = _simulate(backend, net, kernel, transfer, cfg)
            paths = extract_martingale_paths(res, vertices=(0,))
            sups.append(float(np.max(np.abs(paths.x0))) / root_n)
            if n == sizes[-1]:
                x0_terminal.append(float(paths.x0[-1]))
                xu_terminal.append(float(paths.mean_martingale[-1]))
                s_term = float(res.tracked_input[0, -1])
                k_term = root_n * (s_term - i_term)
                lhs = abs(root_n * (float(transfer(s_term)) - h_term)
                          - hp_term * k_term)
                bound = 0.5 * transfer.second_deriv_sup * k_term**2 / root_n
                lin_excess = max(lin_excess, lhs - bound)
        sup_stats[str(n)] = sups
        log.info("corollary n=%d: median sup %.4g", n, np.median(sups))

    x0 = np.asarray(x0_terminal)
    xu = np.asarray(xu_terminal)
    var, var_se, _ = _jackknife_scalar(x0, lambda v: v.var(ddof=1))
    corr, corr_se, _ = _jackknife_scalar(
        np.column_stack([xu, x0]),
        lambda v: float(np.corrcoef(v[:, 0], v[:, 1])[0, 1]),
    )
    tables = {
        "sizes": sizes,
        "replicates": replicates,
        "sup_stats": sup_stats,
        "medians": {str(n): float(np.median(sup_stats[str(n)])) for n in sizes},
        "root_n_stat": {
            "n": sizes[-1],
            "values": x0_terminal,
            "mean": float(x0.mean()),
            "se_mean": _se(x0),
            "var": var,
            "var_se": var_se,
            "target_var": rate_integral,
        },
        "linearization": {"max_excess": float(lin_excess),
                          "curvature_bound": transfer.second_deriv_sup},
        "coupling": {"corr": corr, "se": corr_se, "target": 2.0 * p - 1.0,
                     "signed_values": xu_terminal},
    }
    params = {"sizes": sizes, "p": p, "q": q, "horizon": horizon,
              "replicates": replicates, "seed": seed, "backend": backend,
              "dt": dt, "kernel": kernel.kind, "transfer": transfer.kind}
    checks = corollary_verdicts(tables, tol)
    return ExperimentReport("corollary", params, tol, _pure(tables), checks)


def corollary_verdicts(tables, tolerances):
    sizes = tables["sizes"]
    med_first = tables["medians"][str(sizes[0])]
    med_last = tables["medians"][str(sizes[-1])]
    checks = [make_check(
        "compensated-average-sup-decreasing", med_last < med_first,
        [med_first, med_last], "last < first", None,
        detail=f"medians at n={sizes[0]} and n={sizes[-1]}",
    )]
    stat = tables["root_n_stat"]
    z_band = tolerances["mean_zero_se"]
    checks.append(make_check(
        "root-n-statistic-mean-zero",
        abs(stat["mean"]) <= z_band * stat["se_mean"], stat["mean"], 0.0,
        z_band * stat["se_mean"],
    ))
    checks.append(make_check(
        "root-n-statistic-variance",
        abs(stat["var"] - stat["target_var"]) <= z_band * stat["var_se"],
        stat["var"], stat["target_var"], z_band * stat["var_se"],
    ))
    lin = tables["linearization"]
    checks.append(make_check(
        "linearization-curvature-bound",
        lin["max_excess"] <= tolerances["bound_slack"], lin["max_excess"],
        "<= 0", tolerances["bound_slack"],
    ))
    coup = tables["coupling"]
    checks.append(make_check(
        "signed-unsigned-coupling",
        abs(coup["corr"] - coup["target"]) <= z_band * coup["se"],
        coup["corr"], coup["target"], z_band * coup["se"],
    ))
    return checks


_VERDICT_FUNCTIONS["corollary"] = corollary_verdicts


def _jackknife_scalar(values, statistic):
    """Leave-one-out jackknife of an arbitrary scalar statistic."""
    values = np.asarray(values)
    r = len(values)
    if r < 3:
        raise ContractError("jackknife needs at least 3 samples")
    full = float(statistic(values))
    loo = np.array([
        float(statistic(np.delete(values, i, axis=0))) for i in range(r)
    ])
    center = loo.mean()
    se = math.sqrt((r - 1) / r * float(np.sum((loo - center) ** 2)))
    return full, se, loo


# ----------------------------------------------------------------------
# critical regime
# ----------------------------------------------------------------------

def critical_experiment(*, n, q=0.5, kernel, transfer, horizon, replicates,
                        seed, backend="thinning", complementary=False,
                        net_seed=None, dt=None, tolerances=None
                        ) -> ExperimentReport:
    """Bracket structure of the critical-scaling martingales (p = 1/2).

    Random mode (complementary=False): fresh Erdos-Renyi graphs per
    replicate; the realized bracket [Mtilde^0, Mtilde^0]_T must match
    q (1 - q) int hbar within the relative band, and the cross bracket
    [Mtilde^0, Mtilde^1]_T must average to zero.

    Complementary mode: one fixed network from build_complementary_network
    (q = 1/2), fresh event noise per replicate; the centered martingale
    increments of vertices 0 and 1 must be negatively correlated (sign
    test) and the two drift paths must separate beyond the pooled-SE band
    somewhere on the grid.
    """
    if replicates < 5:
        raise ParameterError("need at least 5 replicates")
    if complementary and q != 0.5:
        raise WrongRegimeError("the complementary construction fixes q = 1/2")
    if not (0.0 < q < 1.0):
        raise WrongRegimeError("critical bracket structure needs 0 < q < 1")
    tol = _tol(tolerances)
    p = 0.5

    fixed_net = None
    if complementary:
        if net_seed is None:
            net_seed = replicate_seed(seed, 1 << 20)
        fixed_net = build_complementary_network(n, net_seed)

    grid = None
    stride = None
    series = {name: [] for name in (
        "bracket_realized", "bracket_cross", "covariation_exact",
        "covariation_mean_rate", "covariation_limit", "drift_vertex0",
        "drift_vertex1", "martingale_vertex0", "martingale_vertex1",
        "mtilde_vertex0", "mtilde_vertex1",
    )}
    slope_diag = []
    slope_target = []
    slope_cross = []
    increment_corr = []
    drift0_full = []
    drift1_full = []
    drift_gap_full = []
    cross_coeff = []

    for r in range(replicates):
        rs = replicate_seed(seed, r)
        net = fixed_net if complementary else sample_network(n, p, q, rs)
        cfg = SimulationConfig(horizon=horizon, seed=rs, scaling="critical",
                               dt=dt, tracked_vertices=(0, 1),
                               record_full=True, record_mean_rate=True)
        res = _simulate(backend, net, kernel, transfer, cfg)
        paths = extract_martingale_paths(res, vertices=(0, 1))
        ident = np.max(np.abs(paths.m_per_vertex
                              - (paths.m_tilde
                                 + net.q * paths.mean_martingale[None, :])))
        if ident > 1e-9:
            raise ContractError(
                f"martingale split identity violated by {ident:.3g}"
            )
        if grid is None:
            grid = paths.grid
            stride = _downsample_stride(grid)
        comp = compensators(res)
        centered0 = net.adjacency[:, 0].astype(np.float64) - net.q
        centered1 = net.adjacency[:, 1].astype(np.float64) - net.q
        predictable = (centered0**2 @ comp) / n
        c00 = float(np.mean(centered0**2))
        c01 = float(np.mean(centered0 * centered1))
        cross_coeff.append(c01)

        bracket00 = paths.brackets[(0, 0)]
        bracket01 = paths.brackets[(0, 1)]
        slope_diag.append(float(bracket00[-1] / horizon))
        slope_target.append(float(net.q * (1.0 - net.q)
                                  * paths.hbar_int[-1] / horizon))
        slope_cross.append(float(bracket01[-1] / horizon))

        series["bracket_realized"].append(bracket00[::stride])
        series["bracket_cross"].append(bracket01[::stride])
        series["covariation_exact"].append(predictable[::stride])
        series["covariation_mean_rate"].append((c00 * paths.hbar_int)[::stride])
        series["covariation_limit"].append(
            (net.q * (1.0 - net.q) * paths.hbar_int)[::stride])
        series["drift_vertex0"].append(paths.drifts[0, ::stride])
        series["drift_vertex1"].append(paths.drifts[1, ::stride])
        series["martingale_vertex0"].append(paths.m_per_vertex[0, ::stride])
        series["martingale_vertex1"].append(paths.m_per_vertex[1, ::stride])
        series["mtilde_vertex0"].append(paths.m_tilde[0, ::stride])
        series["mtilde_vertex1"].append(paths.m_tilde[1, ::stride])

        if complementary:
            inc0 = np.diff(paths.m_tilde[0, ::stride])
            inc1 = np.diff(paths.m_tilde[1, ::stride])
            if inc0.std() == 0.0 or inc1.std() == 0.0:
                increment_corr.append(0.0)
            else:
                increment_corr.append(float(np.corrcoef(inc0, inc1)[0, 1]))
            drift0_full.append(paths.drifts[0, ::stride])
            drift1_full.append(paths.drifts[1, ::stride])
            drift_gap_full.append(paths.drifts[0, ::stride]
                                  - paths.drifts[1, ::stride])
        log.info("critical replicate %d/%d done", r + 1, replicates)

    tables = {
        "mode": "complementary" if complementary else "random",
        "n": n,
        "q": q,
        "horizon": horizon,
        "replicates": replicates,
        "t_grid": grid[::stride],
        "series": series,
        "slope_diag": slope_diag,
        "slope_target": slope_target,
        "slope_cross": slope_cross,
        "cross_coefficient": cross_coeff,
    }
    if complementary:
        d0 = np.asarray(drift0_full)
        d1 = np.asarray(drift1_full)
        dg = np.asarray(drift_gap_full)
        tables["increment_correlations"] = increment_corr
        tables["drift_mean0"] = d0.mean(axis=0)
        tables["drift_mean1"] = d1.mean(axis=0)
        # paired per-replicate difference: the two drifts share each
        # replicate's event noise, so the difference is the powerful statistic
        tables["drift_gap_mean"] = dg.mean(axis=0)
        tables["drift_gap_se"] = dg.std(axis=0, ddof=1) / math.sqrt(replicates)
        tables["sign_residual"] = fixed_net.sign_sum
        tables["net_seed"] = net_seed
    params = {"n": n, "p": p, "q": q, "horizon": horizon,
              "replicates": replicates, "seed": seed, "backend": backend,
              "complementary": complementary, "dt": dt,
              "kernel": kernel.kind, "transfer": transfer.kind}
    checks = critical_verdicts(tables, tol)
    return ExperimentReport("critical", params, tol, _pure(tables), checks)


def critical_verdicts(tables, tolerances):
    checks = []
    if tables["mode"] == "random":
        total_diag = float(np.sum(tables["slope_diag"]))
        total_target = float(np.sum(tables["slope_target"]))
        ratio = total_diag / total_target if total_target else math.inf
        band = tolerances["slope_rel"]
        checks.append(make_check(
            "bracket-slope-matches-qq-hbar",
            abs(ratio - 1.0) <= band, ratio, 1.0, band,
            detail="pooled realized bracket over pooled q(1-q) int hbar",
        ))
        cross = np.asarray(tables["slope_cross"])
        se = _se(cross)
        z_band = tolerances["mean_zero_se"]
        checks.append(make_check(
            "cross-bracket-mean-zero",
            abs(cross.mean()) <= z_band * se, float(cross.mean()), 0.0,
            z_band * se,
        ))
        return checks

    corr = np.asarray(tables["increment_correlations"])
    negative = int(np.sum(corr < 0.0))
    pval = float(sps.binomtest(negative, len(corr), 0.5,
                               alternative="greater").pvalue)
    checks.append(make_check(
        "complementary-increments-negatively-correlated",
        pval <= tolerances["corr_alpha"],
        {"negative": negative, "replicates": len(corr), "pvalue": pval},
        "sign-test p <= alpha", tolerances["corr_alpha"],
        detail=f"mean correlation {corr.mean():.4f}",
    ))

    gap = np.abs(np.asarray(tables["drift_gap_mean"]))
    se = np.asarray(tables["drift_gap_se"])
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0.0, gap / se, 0.0)
    z[0] = 0.0
    best = int(np.argmax(z))
    band = tolerances["drift_gap_se"]
    checks.append(make_check(
        "complementary-drifts-separate",
        bool(z[best] > band), float(z[best]), f"> {band}", band,
        detail=f"paired |mean|/SE of drift difference, best at "
               f"t={tables['t_grid'][best]:.4g}",
    ))

    c01 = np.asarray(tables["cross_coefficient"])
    target = -tables["q"] * (1.0 - tables["q"])
    checks.append(make_check(
        "complementary-cross-coefficient-exact",
        bool(np.all(c01 == target)), float(c01[0]), target, 0.0,
        detail="disjoint half supports force the centered product everywhere",
    ))
    checks.append(make_check(
        "sign-residual-within-parity",
        abs(int(tables["sign_residual"])) <= 2, tables["sign_residual"],
        "0 (or 2 when n/2 is odd)", 2,
    ))
    return checks


_VERDICT_FUNCTIONS["critical"] = critical_verdicts


# ----------------------------------------------------------------------
# asymptotic independence
# ----------------------------------------------------------------------

def independence_experiment(*, sizes, p, q, kernel, transfer, horizon,
                            replicates, seed, m_vertices=5,
                            backend="thinning", dt=None, tolerances=None
                            ) -> ExperimentReport:
    """Terminal counts of a fixed vertex set: decorrelation and Poisson law.

    Collects the event counts of the first m_vertices vertices at the
    horizon across replicates for each size.  At the largest size the
    pairwise count correlations must be consistent with zero and the count
    histogram must pass a chi-square test against the Poisson law with mean
    int_0^T h(I) ds.
    """
    sizes = [int(x) for x in sizes]
    if sorted(sizes) != sizes or len(sizes) < 1:
        raise ParameterError("sizes must be increasing and non-empty")
    if m_vertices < 2 or m_vertices > min(sizes):
        raise ParameterError("m_vertices must be >= 2 and <= every size")
    if replicates < 10:
        raise ParameterError("need at least 10 replicates")
    tol = _tol(tolerances)
    mean_path = solve_mean_field(kernel, transfer, p, q, horizon, dt)
    mu = float(np.trapezoid(transfer(mean_path.values), mean_path.grid))
    counts = {}
    for block, n in enumerate(sizes):
        rows = np.empty((replicates, m_vertices), dtype=np.int64)
        for r in range(replicates):
            rs = replicate_seed(seed, block * replicates + r)
            net = sample_network(n, p, q, rs)
            cfg = SimulationConfig(horizon=horizon, seed=rs, dt=dt,
                                   tracked_vertices=())
            res = _simulate(backend, net, kernel, transfer, cfg)
            rows[r] = res.trains.counts()[:m_vertices]
        counts[str(n)] = rows
        log.info("independence n=%d done", n)

    largest = counts[str(sizes[-1])].astype(np.float64)
    pairs = []
    for a in range(m_vertices):
        for b in range(a + 1, m_vertices):
            ca, cb = largest[:, a], largest[:, b]
            if ca.std() == 0.0 or cb.std() == 0.0:
                pairs.append(0.0)
            else:
                pairs.append(float(np.corrcoef(ca, cb)[0, 1]))
    pooled = largest.ravel()
    chi = _poisson_gof(pooled, mu)

    tables = {
        "sizes": sizes,
        "m_vertices": m_vertices,
        "replicates": replicates,
        "counts": counts,
        "pair_correlations": pairs,
        "mean_pair_correlation": float(np.mean(pairs)),
        "corr_se": 1.0 / math.sqrt(replicates * len(pairs)),
        "poisson": chi,
        "poisson_mean": mu,
    }
    params = {"sizes": sizes, "p": p, "q": q, "horizon": horizon,
              "replicates": replicates, "m_vertices": m_vertices,
              "seed": seed, "backend": backend, "dt": dt,
              "kernel": kernel.kind, "transfer": transfer.kind}
    checks = independence_verdicts(tables, tol)
    return ExperimentReport("independence", params, tol, _pure(tables), checks)


def _poisson_gof(samples, mu):
    """Chi-square of integer samples against Poisson(mu), bins merged to >= 5."""
    samples = np.asarray(samples)
    total = len(samples)
    hi = int(max(samples.max(initial=0), mu) + 10 * math.sqrt(mu + 1.0)) + 1
    support = np.arange(hi + 1)
    pmf = sps.poisson.pmf(support, mu)
    pmf[-1] = max(1.0 - pmf[:-1].sum(), 0.0)  # fold the tail into the last bin
    observed = np.bincount(np.minimum(samples.astype(np.int64), hi),
                           minlength=hi + 1).astype(np.float64)
    expected = pmf * total
    # merge adjacent bins until every expected count reaches 5
    obs_b, exp_b = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(observed, expected):
        acc_o += o
        acc_e += e
        if acc_e >= 5.0:
            obs_b.append(acc_o)
            exp_b.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0.0 and exp_b:
        obs_b[-1] += acc_o
        exp_b[-1] += acc_e
    if len(exp_b) < 2:
        return {"statistic": 0.0, "pvalue": 1.0, "bins": len(exp_b)}
    exp_arr = np.asarray(exp_b) * (np.sum(obs_b) / np.sum(exp_b))
    stat, pval = sps.chisquare(obs_b, exp_arr)
    return {"statistic": float(stat), "pvalue": float(pval),
            "bins": len(exp_b)}


def independence_verdicts(tables, tolerances):
    z_band = tolerances["mean_zero_se"]
    mean_corr = tables["mean_pair_correlation"]
    se = tables["corr_se"]
    checks = [make_check(
        "pairwise-count-correlation-zero",
        abs(mean_corr) <= z_band * se, mean_corr, 0.0, z_band * se,
        detail=f"{len(tables['pair_correlations'])} pairs at the largest size",
    )]
    chi = tables["poisson"]
    checks.append(make_check(
        "counts-match-poisson-law",
        chi["pvalue"] >= tolerances["gof_alpha"], chi["pvalue"],
        f">= {tolerances['gof_alpha']}", tolerances["gof_alpha"],
        detail=f"chi-square {chi['statistic']:.3g} on {chi['bins']} bins, "
               f"mean {tables['poisson_mean']:.4g}",
    ))
    return checks


_VERDICT_FUNCTIONS["independence"] = independence_verdicts


_EXPERIMENTS = {
    "lln": lln_experiment,
    "clt": clt_experiment,
    "corollary": corollary_experiment,
    "critical": critical_experiment,
    "independence": independence_experiment,
}


def run_experiment(name: str, **kwargs) -> ExperimentReport:
    """Dispatch to the named experiment with keyword arguments."""
    try:
        fn = _EXPERIMENTS[name]
    except KeyError:
        raise ParameterError(
            f"unknown experiment {name!r}; choose from {sorted(_EXPERIMENTS)}"
        ) from None
    return fn(**kwargs)
