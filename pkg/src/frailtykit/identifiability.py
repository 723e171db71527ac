"""Numerical identifiability probes and parameter recovery.

The probes make the model class's identifiability story operational:

* ``sub_distribution_distance`` measures how far apart two models' joint
  sub-distribution functions are on a quantile grid; distinct parameter
  points separate, while the frailty-scale confounding (only removed by the
  unit-mean convention) provably does not.
* ``limit_identity_check`` evaluates the tilted frailty transform at the
  cumulative-hazard load of shrinking times; for unit-mean frailty the value
  tends to 1, and the rate at which it does pins the hazard scale factors.
* ``lst_sequence_test`` compares two frailty transforms along the argument
  sequences that the survival functions themselves generate: plain integer
  loads for shared / correlated structures, and loads obtained by pushing a
  bounded increasing sequence through H_other(H_first^{-1}(.)) for the
  cause-specific structures.  Agreement along the whole sequence forces the
  mixtures to coincide.
* ``recover_parameters`` / ``fit_mle`` search parameter space with a
  restarted simplex optimizer, with the unit-mean normalization applied
  inside the objective so the confounded scale direction is quotiented out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import brentq, minimize
from scipy.special import logsumexp

from . import frailty as fr
from . import model as md
from .hazards import (
    Family,
    HazardSpec,
    _cumulative_array,
    _hazard_array,
    cumulative_hazard,
    inverse_cumulative_hazard,
)

__all__ = [
    "Verdict",
    "ProbeGrid",
    "ProbeReport",
    "RecoveryResult",
    "FitResult",
    "SEPARATION_THRESHOLD",
    "default_probe_grid",
    "sub_distribution_distance",
    "per_pair_distances",
    "limit_identity_check",
    "lst_sequence_test",
    "scale_confounding_transform",
    "probe_models",
    "recover_parameters",
    "recover_from_model",
    "target_tensor",
    "fit_mle",
]

SEPARATION_THRESHOLD = 1e-6

DEFAULT_QUANTILE_LEVELS = (0.1, 0.25, 0.5, 0.75, 0.9, 0.99)


class Verdict(str, Enum):
    INDISTINGUISHABLE = "indistinguishable"
    SEPARATED = "separated"


@dataclass(frozen=True)
class ProbeGrid:
    """Strictly increasing evaluation times per axis (at least 5 each)."""

    t1_points: tuple
    t2_points: tuple

    def __post_init__(self):
        for name in ("t1_points", "t2_points"):
            pts = tuple(float(p) for p in getattr(self, name))
            if len(pts) < 5:
                raise ValueError("probe grids need at least 5 points per axis")
            arr = np.asarray(pts)
            if np.any(arr <= 0.0) or np.any(np.diff(arr) <= 0.0):
                raise ValueError("grid points must be positive and increasing")
            object.__setattr__(self, name, pts)


@dataclass(frozen=True)
class ProbeReport:
    sup_distance: float
    per_pair: dict
    limit_residuals: dict
    lst_sequence_gap: float
    verdict: Verdict


def _diagonal_quantile(m, level):
    """Time t with P(T1 <= t or T2 <= t) = level, off the survival diagonal."""
    def f(t):
        return (1.0 - md.joint_survival(m, t, t)) - level

    hi = 1.0
    for _ in range(400):
        if f(hi) > 0.0:
            break
        hi *= 4.0
    else:
        raise RuntimeError("diagonal quantile bracket failed")
    lo = hi
    for _ in range(400):
        lo /= 4.0
        if f(lo) < 0.0:
            break
    return brentq(f, lo, hi, rtol=1e-13)


def default_probe_grid(m, levels=DEFAULT_QUANTILE_LEVELS):
    """Model-implied grid: quantiles of the first-failure time on both axes."""
    pts = tuple(_diagonal_quantile(m, lv) for lv in levels)
    return ProbeGrid(pts, pts)


def _check_comparable(ma, mb):
    if ma.structure != mb.structure:
        raise ValueError("models must share the frailty structure")


def per_pair_distances(ma, mb, grid, q=None):
    """Max |F_a - F_b| over the grid, per cause pair (j1, j2)."""
    _check_comparable(ma, mb)
    fa = md.joint_sub_distribution_grid(ma, grid.t1_points, grid.t2_points, q)
    fb = md.joint_sub_distribution_grid(mb, grid.t1_points, grid.t2_points, q)
    gap = np.abs(fa - fb)
    return {
        (j1 + 1, j2 + 1): float(np.max(gap[j1, j2]))
        for j1 in range(gap.shape[0])
        for j2 in range(gap.shape[1])
    }


def sub_distribution_distance(ma, mb, grid, q=None):
    """Sup over cause pairs and grid points of |F_a - F_b|."""
    return max(per_pair_distances(ma, mb, grid, q).values())


def limit_identity_check(m, times=(1e-2, 1e-4, 1e-6)):
    """Residual |tilted_mean(load(t)) - 1| per (individual, cause) and time.

    The load vector places each cause's cumulative hazard at t on the
    coordinate that multiplies it.  For unit-mean frailty the residuals
    shrink monotonically to 0 along the given decreasing times; an off-mean
    mixture is flagged by residuals converging to |mean - 1| instead.
    """
    out = {}
    for k in (1, 2):
        for j in range(1, m.num_causes(k) + 1):
            coord = m.structure.coordinate_of(k, j)
            residuals = []
            for t in times:
                s = np.zeros(m.structure.dimension)
                for jj in range(1, m.num_causes(k) + 1):
                    s[m.structure.coordinate_of(k, jj)] += cumulative_hazard(
                        m.hazard(k, jj), t)
                residuals.append(abs(fr.tilted_mean(m.frailty, coord, s) - 1.0))
            out[(k, j)] = tuple(residuals)
    return out


def _sequence_loads(structure, hazards, n):
    """Transform arguments generated by the survival equality at step n.

    Cause-specific structures push m = n/(n+1) through the first cause's
    inverse cumulative hazard and read every cause's cumulative hazard at the
    resulting time, accumulating per coordinate; shared and correlated
    structures use the plain integer load.
    """
    kind = structure.kind
    if kind is fr.FrailtyKind.SHARED:
        return np.array([float(n)])
    if kind is fr.FrailtyKind.CORRELATED:
        return np.array([float(n), float(n)])
    if hazards is None:
        raise ValueError(
            "cause-specific sequence construction needs the hazard map")
    m1 = n / (n + 1.0)
    s = np.zeros(structure.dimension)
    for k in (1, 2):
        t_star = inverse_cumulative_hazard(hazards[(k, 1)], m1)
        for j in range(1, structure.num_causes(k) + 1):
            s[structure.coordinate_of(k, j)] += cumulative_hazard(
                hazards[(k, j)], t_star)
    return s


def lst_sequence_test(ga, gb, n_max=20, hazards=None):
    """Max transform gap along the structure's canonical argument sequence.

    Inputs are canonicalized first, so mixtures equal up to atom relabeling
    give a gap of exactly 0.
    """
    if ga.structure != gb.structure:
        raise ValueError("mixtures must share the frailty structure")
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    ca, cb = fr.canonicalize(ga), fr.canonicalize(gb)
    gap = 0.0
    for n in range(1, n_max + 1):
        s = _sequence_loads(ga.structure, hazards, n)
        gap = max(gap, abs(fr.lst(ca, s) - fr.lst(cb, s)))
    return gap


def scale_confounding_transform(m, c):
    """The transform that unit-mean normalization exists to rule out.

    Multiplies every frailty atom by c and divides every alpha by c; for
    Weibull and exponential hazards (b constant in alpha) the conditional
    hazards, and hence all observables, are unchanged.  The result is built
    without the unit-mean requirement.
    """
    if c <= 0.0:
        raise ValueError("scale must be positive")
    for spec in m.hazards.values():
        if spec.family not in (Family.WEIBULL, Family.EXPONENTIAL):
            raise ValueError(
                "exact scale confounding needs Weibull or exponential hazards")
    hazards = {
        key: HazardSpec(spec.family, spec.gamma, spec.alpha / c)
        for key, spec in m.hazards.items()
    }
    g = fr.DiscreteFrailty(m.structure, m.frailty.atoms * c, m.frailty.weights)
    return md.ModelSpec(m.structure, hazards, g, require_unit_mean=False)


def probe_models(ma, mb, grid=None, n_max=20, q=None):
    """Full distinguishability report for a model pair."""
    _check_comparable(ma, mb)
    if grid is None:
        grid = default_probe_grid(ma)
    pair_gaps = per_pair_distances(ma, mb, grid, q)
    sup = max(pair_gaps.values())
    residuals = {
        "a": tuple(abs(v - 1.0) for v in fr.coordinate_means(ma.frailty)),
        "b": tuple(abs(v - 1.0) for v in fr.coordinate_means(mb.frailty)),
    }
    gap = lst_sequence_test(ma.frailty, mb.frailty, n_max=n_max,
                            hazards=ma.hazards)
    verdict = (Verdict.SEPARATED if sup > SEPARATION_THRESHOLD
               else Verdict.INDISTINGUISHABLE)
    return ProbeReport(
        sup_distance=float(sup),
        per_pair=pair_gaps,
        limit_residuals=residuals,
        lst_sequence_gap=float(gap),
        verdict=verdict,
    )


def probe_report_to_dict(report):
    return {
        "sup_distance": report.sup_distance,
        "per_pair": {f"{j1},{j2}": v for (j1, j2), v in report.per_pair.items()},
        "limit_residuals": {k: list(v) for k, v in report.limit_residuals.items()},
        "lst_gap": report.lst_sequence_gap,
        "verdict": report.verdict.value,
    }


# ---------------------------------------------------------------------------
# parameter search


class _Parametrization:
    """Pack/unpack a model as an unconstrained vector.

    Layout: per (k, j) slot a log-gamma (omitted for exponential hazards,
    where gamma is pinned) and a log-alpha, then atom log-coordinates, then
    num_atoms - 1 weight logits (the first logit is fixed at 0).  Unit-mean
    renormalization inside ``unpack`` makes the mean constraint invisible to
    the optimizer.
    """

    def __init__(self, template, enforce_unit_mean=True):
        self.structure = template.structure
        self.slots = [
            (k, j)
            for k in (1, 2)
            for j in range(1, template.num_causes(k) + 1)
        ]
        self.families = {key: template.hazard(*key).family for key in self.slots}
        self.num_atoms = template.frailty.num_atoms
        self.dimension = template.frailty.dimension
        self.enforce_unit_mean = enforce_unit_mean

    @property
    def size(self):
        n_hz = sum(1 if self.families[s] is Family.EXPONENTIAL else 2
                   for s in self.slots)
        return n_hz + self.num_atoms * self.dimension + (self.num_atoms - 1)

    def pack(self, m):
        theta = []
        for key in self.slots:
            spec = m.hazard(*key)
            if spec.family is not self.families[key]:
                raise ValueError("model families do not match the template")
            if spec.family is not Family.EXPONENTIAL:
                theta.append(math.log(spec.gamma))
            theta.append(math.log(spec.alpha))
        theta.extend(np.log(m.frailty.atoms).ravel())
        logits = np.log(m.frailty.weights)
        theta.extend(logits[1:] - logits[0])
        return np.array(theta)

    def unpack(self, theta):
        theta = np.asarray(theta, dtype=float)
        hazards = {}
        pos = 0
        for key in self.slots:
            fam = self.families[key]
            if fam is Family.EXPONENTIAL:
                gamma = 1.0
            else:
                gamma = math.exp(theta[pos])
                pos += 1
            alpha = math.exp(theta[pos])
            pos += 1
            hazards[key] = HazardSpec(fam, gamma, alpha)
        n_coords = self.num_atoms * self.dimension
        atoms = np.exp(theta[pos:pos + n_coords]).reshape(
            self.num_atoms, self.dimension)
        pos += n_coords
        logits = np.concatenate([[0.0], theta[pos:]])
        logits -= logits.max()
        weights = np.exp(logits)
        weights /= weights.sum()
        g = fr.DiscreteFrailty(self.structure, atoms, weights)
        if self.enforce_unit_mean:
            g = fr.normalize_to_unit_mean(g)
        return md.ModelSpec(self.structure, hazards, g,
                            require_unit_mean=self.enforce_unit_mean)


def _axis_simplex(x0, step):
    n = x0.size
    simplex = np.tile(x0, (n + 1, 1))
    for i in range(n):
        simplex[i + 1, i] += step
    return simplex


def _restarted_simplex(objective, theta0, budget, seed, restarts=10,
                       first_step=0.3):
    """Nelder-Mead with polish restarts under a shared evaluation budget.

    Restart i shrinks the initial simplex around the incumbent; every third
    restart jitters the start point to escape shallow basins.  Returns
    (theta, value, evaluations, converged); converged is False when the
    budget ran out before any restart terminated on its own tolerances.
    """
    rng = np.random.default_rng(seed)
    evals = 0

    def counted(x):
        nonlocal evals
        evals += 1
        try:
            v = objective(x)
        except (ValueError, FloatingPointError, OverflowError):
            return 1e50
        return v if np.isfinite(v) else 1e50

    best_x = np.array(theta0, dtype=float)
    best_f = counted(best_x)
    if best_f <= 1e-24:
        return best_x, best_f, evals, True

    converged = False
    step = first_step
    for i in range(restarts):
        remaining = budget - evals
        if remaining < 2 * (best_x.size + 1):
            break
        start = best_x
        if i > 0 and i % 3 == 0:
            start = best_x + rng.normal(0.0, step, size=best_x.size)
        res = minimize(
            counted, start, method="Nelder-Mead",
            options={
                "initial_simplex": _axis_simplex(start, step),
                "maxfev": remaining,
                "maxiter": 10 ** 9,
                "xatol": 1e-11,
                "fatol": 1e-16,
                "adaptive": best_x.size > 6,
            })
        evals = min(evals, budget)
        if res.fun < best_f:
            best_f = float(res.fun)
            best_x = np.array(res.x)
        if res.success:
            converged = True
        if best_f <= 1e-24:
            break
        step = max(step * 0.35, 1e-6)
    return best_x, best_f, evals, converged


@dataclass(frozen=True)
class RecoveryResult:
    model: md.ModelSpec
    distance: float
    objective: float
    evaluations: int
    converged: bool


def target_tensor(m, grid, q=None):
    """The (L1, L2, n1, n2) sub-distribution tensor a recovery run matches."""
    return md.joint_sub_distribution_grid(m, grid.t1_points, grid.t2_points, q)


def recover_parameters(target, grid, init, budget=20000, seed=0,
                       enforce_unit_mean=True, q=None, restarts=10):
    """Fit a model to target sub-distribution values on a grid.

    Minimizes the squared-sum mismatch over hazard parameters and frailty
    atoms/weights (all free in log scale).  ``target`` is the tensor produced
    by :func:`target_tensor`; ``init`` fixes families, structure, and atom
    count and supplies the starting point.
    """
    target = np.asarray(target, dtype=float)
    par = _Parametrization(init, enforce_unit_mean)
    quad = q or md.DEFAULT_QUADRATURE

    def objective(theta):
        model = par.unpack(theta)
        fit = md.joint_sub_distribution_grid(
            model, grid.t1_points, grid.t2_points, quad)
        return float(np.sum((fit - target) ** 2))

    theta, value, evals, converged = _restarted_simplex(
        objective, par.pack(init), budget, seed, restarts=restarts)
    model = par.unpack(theta)
    fit = md.joint_sub_distribution_grid(
        model, grid.t1_points, grid.t2_points, quad)
    return RecoveryResult(
        model=model,
        distance=float(np.max(np.abs(fit - target))),
        objective=float(value),
        evaluations=int(evals),
        converged=bool(converged),
    )


def recover_from_model(target_model, init, budget=20000, seed=0,
                       enforce_unit_mean=True, q=None, restarts=10,
                       grid=None):
    """Convenience wrapper: build the default grid and target from a model."""
    if grid is None:
        grid = default_probe_grid(target_model)
    target = target_tensor(target_model, grid, q)
    result = recover_parameters(target, grid, init, budget=budget, seed=seed,
                                enforce_unit_mean=enforce_unit_mean, q=q,
                                restarts=restarts)
    return result, grid


@dataclass(frozen=True)
class FitResult:
    model: md.ModelSpec
    log_likelihood: float
    evaluations: int
    converged: bool


def _dataset_arrays(dataset):
    t = {1: [], 2: []}
    j = {1: [], 2: []}
    for obs in dataset:
        if obs.j1 == 0 or obs.j2 == 0:
            raise ValueError("maximum-likelihood fitting needs complete data")
        t[1].append(obs.t1)
        t[2].append(obs.t2)
        j[1].append(obs.j1)
        j[2].append(obs.j2)
    return ({k: np.asarray(v, dtype=float) for k, v in t.items()},
            {k: np.asarray(v, dtype=np.int64) - 1 for k, v in j.items()})


def _log_likelihood(m, times, causes):
    """Sum over pairs of log joint sub-density, vectorized over the data."""
    n = times[1].size
    total = np.zeros((m.frailty.num_atoms, n))
    log_h = np.zeros(n)
    for k in (1, 2):
        specs = m.hazards_for(k)
        t = times[k]
        cause = causes[k]
        hs = np.stack([_hazard_array(sp, t) for sp in specs])
        cums = np.stack([_cumulative_array(sp, t) for sp in specs])
        eps = m.eps_matrix(k)
        log_h += np.log(hs[cause, np.arange(n)])
        total += np.log(eps[:, cause]) - eps @ cums
    logw = np.log(m.frailty.weights)
    return float(np.sum(logsumexp(total + logw[:, None], axis=0) + log_h))


def fit_mle(dataset, structure, num_atoms, init, budget=20000, seed=0,
            restarts=10):
    """Maximize the joint sub-density likelihood on complete data.

    ``init`` supplies families and the starting point; its structure and atom
    count must match the requested ones.  Returns the fitted model with the
    attained log-likelihood.
    """
    if init.structure != structure:
        raise ValueError("init structure does not match requested structure")
    if init.frailty.num_atoms != num_atoms:
        raise ValueError("init atom count does not match num_atoms")
    times, causes = _dataset_arrays(dataset)
    for k in (1, 2):
        if np.any(causes[k] >= structure.num_causes(k)):
            raise ValueError("dataset contains cause labels beyond the model")
    n = times[1].size
    par = _Parametrization(init, enforce_unit_mean=True)

    def objective(theta):
        model = par.unpack(theta)
        return -_log_likelihood(model, times, causes) / n

    theta0 = par.pack(init)
    f0 = objective(theta0)
    if not np.isfinite(f0):
        raise ValueError("log-likelihood is not finite at the init")
    theta, value, evals, converged = _restarted_simplex(
        objective, theta0, budget, seed, restarts=restarts)
    return FitResult(
        model=par.unpack(theta),
        log_likelihood=float(-value * n),
        evaluations=int(evals),
        converged=bool(converged),
    )
