"""Theorem-level checks run against the kernels and the sampler.

Every process-level identity asserted of kernel-driven processes is turned
into an executable check here:

* the conditional law given the whole history outside an increment equals
  the kernel on its frontier (``cmarkov_conditional_check``);
* the two-parameter three-neighbor conditioning pattern is recovered
  (``star_markov_correspondence``);
* inside and outside blocks decouple given the boundary of a finite union
  (``sharp_markov_check``);
* projections onto nested histories commute (``commuting_filtration_check``);
* projections on monotone flows are one-parameter Markov with the induced
  kernel (``flow_projection_check``);
* homogeneous kernels restart from the current value under shifts
  (``simple_markov_shift_check``).

Kernels with an exact Gaussian form are checked by linear algebra at sharp
tolerances, others statistically with seeded Monte Carlo.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import stats

from .errors import HistoryError, KernelError
from .families import union_subset
from .kernels import (GaussianMarginal, StableMarginal, _kernel_parameters,
                      factor_increments, gaussian_coeffs, is_gaussian_exact,
                      kernel_apply, state_dim)
from .lattice import frontier, make_increment, semilattice_closure, split
from .reports import CheckReport
from .sampler import (CustomLaw, DEGENERATE_VAR, GaussianLaw, PointMassLaw,
                      gaussian_fdd_moments, sample_fdd, split_seeds)

JITTER = 1e-12


# ---------------------------------------------------------------------------
# Gaussian conditioning helpers
# ---------------------------------------------------------------------------

def gaussian_condition(fdd, target, cond_labels, jitter=JITTER):
    """Conditional law of one variable given a block.

    Returns ``(weights, const, var, dropped)``: the affine representation
    ``E[X_t | block] = const + sum_l weights[l] * x_l`` plus the conditional
    variance.  Degenerate block variables (variance below ``1e-12``) carry
    no randomness and are dropped; their labels are reported so callers can
    fold the deterministic contribution into the constant.
    """
    ti = fdd.index(target)
    keep, dropped = [], []
    seen = set()
    for l in cond_labels:
        if l in seen or l == target:
            continue
        seen.add(l)
        i = fdd.index(l)
        (keep if fdd.cov[i, i] > DEGENERATE_VAR else dropped).append(l)
    if not keep:
        return {}, float(fdd.mean[ti]), float(fdd.cov[ti, ti]), dropped
    b = [fdd.index(l) for l in keep]
    block = fdd.cov[np.ix_(b, b)] + jitter * np.eye(len(b))
    cross = fdd.cov[b, ti]
    w = np.linalg.solve(block, cross)
    const = float(fdd.mean[ti] - w @ fdd.mean[b])
    var = float(max(fdd.cov[ti, ti] - w @ cross, 0.0))
    return dict(zip(keep, w)), const, var, dropped


def partial_covariance(fdd, left, right, given, jitter=JITTER):
    """Cross-covariance of two blocks after conditioning on a third."""
    li = [fdd.index(l) for l in left]
    ri = [fdd.index(l) for l in right]
    gi = [fdd.index(l) for l in given
          if fdd.cov[fdd.index(l), fdd.index(l)] > DEGENERATE_VAR]
    base = fdd.cov[np.ix_(li, ri)]
    if not gi:
        return base
    block = fdd.cov[np.ix_(gi, gi)] + jitter * np.eye(len(gi))
    solve = np.linalg.solve(block, fdd.cov[np.ix_(gi, ri)])
    return base - fdd.cov[np.ix_(li, gi)] @ solve


# ---------------------------------------------------------------------------
# Conditional law of an increment apex
# ---------------------------------------------------------------------------

def _assert_history(family, inc, extra_sets):
    for e in extra_sets:
        meet = family.intersect(e, inc.apex)
        if not union_subset(family, meet, inc.parts):
            raise HistoryError("set %r intersects the increment" % (e,))


def _conditional_vs_kernel(spec, family, fdd, target, cond_labels,
                           kernel_pairs, extras):
    """Largest gap between Gaussian conditioning and the kernel law.

    ``kernel_pairs`` maps labels to kernel coefficients; ``extras`` are the
    history labels whose conditional weight must vanish.  A target that is
    itself a conditioning label (a degenerate product component) is known
    deterministically.
    """
    coeffs, var = kernel_pairs
    if target in cond_labels:
        w, const, cvar, dropped = {target: 1.0}, 0.0, 0.0, []
    else:
        w, const, cvar, dropped = gaussian_condition(fdd, target, cond_labels)
    gap = abs(cvar - var)
    expected_const = 0.0
    for label, c in coeffs.items():
        if label in dropped:
            expected_const += c * fdd.mean_of(label)
        else:
            gap = max(gap, abs(w.get(label, 0.0) - c))
    gap = max(gap, abs(const - expected_const))
    for label in extras:
        if label not in coeffs and label not in dropped:
            gap = max(gap, abs(w.get(label, 0.0)))
    return gap


def cmarkov_conditional_check(spec, family, inc, extra_history_sets=(),
                              nu=None, tol=1e-8):
    """Conditioning on extra history must not move the kernel law.

    Builds the exact joint Gaussian over the apex, the frontier and the
    extra history sets (all required to avoid the increment), conditions
    the apex value on everything, and requires vanishing weights on the
    extras and kernel-matching conditional moments.
    """
    if not is_gaussian_exact(spec):
        raise KernelError("the conditional-law check is exact Gaussian only")
    nu = nu or PointMassLaw(0.0)
    extra_history_sets = list(extra_history_sets)
    _assert_history(family, inc, extra_history_sets)
    front = frontier(family, inc)
    all_sets = [inc.apex, *front.sets, *extra_history_sets]
    fdd = gaussian_fdd_moments(spec, family, nu, all_sets)

    if spec.kind == "product":
        gap = 0.0
        incs = factor_increments(family, inc)
        for l, (sub, fam, ci) in enumerate(zip(spec.components,
                                               family.factors, incs)):
            fr_l = frontier(fam, ci)
            c_l, v_l = gaussian_coeffs(sub, fam, ci, fr_l)
            pairs = (dict(zip(((l, s) for s in fr_l.sets), c_l)), v_l)
            cond, seen = [], set()
            for s in [*front.sets, *extra_history_sets]:
                label = (l, s.factors[l])
                if label not in seen:
                    seen.add(label)
                    cond.append(label)
            extras = [label for label in cond if label not in pairs[0]]
            gap = max(gap, _conditional_vs_kernel(
                sub, fam, fdd, (l, inc.apex.factors[l]), cond, pairs, extras))
    else:
        c, v = gaussian_coeffs(spec, family, inc, front)
        pairs = (dict(zip(front.sets, c)), v)
        cond = [*front.sets,
                *[e for e in extra_history_sets if e not in front.sets]]
        gap = _conditional_vs_kernel(spec, family, fdd, inc.apex, cond,
                                     pairs, extra_history_sets)

    return CheckReport("cmarkov_conditional", True, float(gap), tol,
                       gap <= tol, len(all_sets), None,
                       {"extras": len(extra_history_sets)})


# ---------------------------------------------------------------------------
# Two-parameter three-neighbor pattern
# ---------------------------------------------------------------------------

def star_markov_correspondence(family, s, t, h, k):
    """The corner increment must condition on exactly its three neighbors.

    For ``h, k > 0`` the frontier of
    ``[0,(s+h,t+k)] minus [0,(s,t)] u [0,(s+h,t)] u [0,(s,t+k)]`` is the
    neighbor triple with signs ``+1`` on the one-sided extensions and
    ``-1`` on the shared corner; degenerate ``h`` or ``k`` collapse it to a
    single chain neighbor.
    """
    if family.kind != "rect" or family.dim != 2:
        raise KernelError("the three-neighbor pattern lives on rect{2}")
    apex = family.rect(s + h, t + k)
    parts = [family.rect(s, t), family.rect(s + h, t), family.rect(s, t + k)]
    inc = make_increment(family, apex, parts)
    front = frontier(family, inc)
    actual = dict(zip(front.sets, front.signs))
    if h > 0 and k > 0:
        expected = {family.rect(s + h, t): 1, family.rect(s, t + k): 1,
                    family.rect(s, t): -1}
    else:
        expected = {family.intersect(apex, family.rect(
            max(s, s + h), max(t, t + k))): 1}
    passed = actual == expected
    return CheckReport("star_markov", True, 0.0 if passed else 1.0, 0.0,
                       passed, 1, None,
                       {"sets": [family.label(x) for x in front.sets],
                        "signs": list(front.signs)})


# ---------------------------------------------------------------------------
# Sharp separation across a finite union
# ---------------------------------------------------------------------------

def sharp_markov_check(spec, family, b_parts, inside_sets, outside_sets,
                       nu=None, tol=1e-8):
    """Inside and outside blocks must decouple given the boundary block.

    The boundary block is derived from the generated semilattice as the
    sets inside the union but not inside its interior.  The check is the
    exact Gaussian partial cross-covariance.
    """
    if not is_gaussian_exact(spec) or state_dim(spec) != 1:
        raise KernelError("the sharp separation check is scalar Gaussian only")
    nu = nu or PointMassLaw(0.0)
    inside_sets, outside_sets = list(inside_sets), list(outside_sets)
    from .lattice import extremal_representation

    b_parts = extremal_representation(family, list(b_parts))
    for s in inside_sets:
        if not union_subset(family, s, b_parts):
            raise HistoryError("inside set %r escapes the union" % (s,))
    for s in outside_sets:
        if union_subset(family, s, b_parts):
            raise HistoryError("outside set %r lies inside the union" % (s,))

    sl = semilattice_closure(family, [*b_parts, *inside_sets, *outside_sets])
    boundary = [u for u in sl.sets
                if union_subset(family, u, b_parts)
                and not family.inside_union_interior(u, b_parts)]
    if not boundary:
        raise KernelError("empty boundary block")
    fdd = gaussian_fdd_moments(spec, family, nu, list(sl.sets))
    cross = partial_covariance(fdd, inside_sets, outside_sets, boundary)
    gap = float(np.max(np.abs(cross))) if cross.size else 0.0
    return CheckReport("sharp_markov", True, gap, tol, gap <= tol,
                       len(sl.sets), None,
                       {"boundary": [family.label(u) for u in boundary]})


# ---------------------------------------------------------------------------
# Commuting projections
# ---------------------------------------------------------------------------

def _projection(fdd, functional, block, jitter=JITTER):
    """Project an affine functional onto the span of a block.

    ``functional`` is ``(coeffs over fdd.labels, const)``; the result is
    supported on the block.  Degenerate block variables are excluded.
    """
    coeffs, const = functional
    keep = [l for l in block
            if fdd.cov[fdd.index(l), fdd.index(l)] > DEGENERATE_VAR]
    if not keep:
        return np.zeros_like(coeffs), const + coeffs @ fdd.mean
    b = [fdd.index(l) for l in keep]
    block_cov = fdd.cov[np.ix_(b, b)] + jitter * np.eye(len(b))
    cross = fdd.cov[np.ix_(b, range(len(fdd.labels)))] @ coeffs
    w = np.linalg.solve(block_cov, cross)
    out = np.zeros_like(coeffs)
    for wi, i in zip(w, b):
        out[i] = wi
    new_const = const + float(coeffs @ fdd.mean) - float(w @ fdd.mean[b])
    return out, new_const


def commuting_filtration_check(spec, family, u, v, y_sets, y_coeffs=None,
                               nu=None, tol=1e-8):
    """Iterated projections onto two histories equal the meet projection.

    ``Y`` is the linear functional of the process values at ``y_sets`` with
    the given coefficients; the check compares coefficient vectors of
    project-onto-``u``-then-``v`` (and the reverse) against the single
    projection onto the intersection history.
    """
    if not is_gaussian_exact(spec) or state_dim(spec) != 1:
        raise KernelError("the commuting check is scalar Gaussian only")
    nu = nu or GaussianLaw(0.0, 1.0)
    y_sets = list(y_sets)
    y_coeffs = [1.0] * len(y_sets) if y_coeffs is None else list(y_coeffs)
    sl = semilattice_closure(family, [u, v, *y_sets])
    fdd = gaussian_fdd_moments(spec, family, nu, list(sl.sets))
    labels = list(fdd.labels)
    coeffs = np.zeros(len(labels))
    for s, c in zip(y_sets, y_coeffs):
        coeffs[fdd.index(s)] += c
    functional = (coeffs, 0.0)

    block_u = [s for s in labels if family.is_subset(s, u)]
    block_v = [s for s in labels if family.is_subset(s, v)]
    meet = family.intersect(u, v)
    block_meet = [s for s in labels if family.is_subset(s, meet)]

    uv = _projection(fdd, _projection(fdd, functional, block_u), block_v)
    vu = _projection(fdd, _projection(fdd, functional, block_v), block_u)
    single = _projection(fdd, functional, block_meet)

    gap = 0.0
    for side in (uv, vu):
        gap = max(gap, float(np.max(np.abs(side[0] - single[0]))))
        gap = max(gap, abs(side[1] - single[1]))
    return CheckReport("commuting_filtrations", True, gap, tol, gap <= tol,
                       len(labels), None)


# ---------------------------------------------------------------------------
# Flow projections
# ---------------------------------------------------------------------------

def flow_projection_check(spec, family, flow_corners, nu=None, tol=1e-8,
                          n=100000, seed=0, freq=1.0):
    """Projections on an increasing flow are one-parameter Markov.

    Gaussian branch: the conditional law of each flow value given all
    earlier ones puts no weight on anything but its predecessor and matches
    the kernel of the simple increment.  Stable branch: the closed-form
    conditional characteristic function leaves residuals uncorrelated with
    older flow values, within three standard errors.
    """
    nu = nu or PointMassLaw(0.0)
    sets = [family.rect(*c) if family.kind == "rect" else c
            for c in flow_corners]
    for a, b in zip(sets, sets[1:]):
        if not family.is_subset(a, b) or a == b:
            raise KernelError("flow points must strictly increase")
    if len(sets) == 1:
        return CheckReport("flow_projection", True, 0.0, tol, True, 1, seed,
                           {"note": "single-point flow"})

    if is_gaussian_exact(spec) and state_dim(spec) == 1:
        fdd = gaussian_fdd_moments(spec, family, nu, sets)
        gap = 0.0
        for i in range(1, len(sets)):
            inc = make_increment(family, sets[i], [sets[i - 1]])
            front = frontier(family, inc)
            c, v = gaussian_coeffs(spec, family, inc, front)
            pairs = (dict(zip(front.sets, c)), v)
            cond = [family.empty_prime(), *sets[:i]]
            gap = max(gap, _conditional_vs_kernel(
                spec, family, fdd, sets[i], cond, pairs, cond))
        return CheckReport("flow_projection", True, float(gap), tol,
                           gap <= tol, len(sets), seed)

    if len(sets) < 3:
        raise KernelError("the sampled flow check needs three flow points")
    sample = sample_fdd(spec, family, nu, sets, seed, n)
    worst = 0.0
    rows = []
    for i in range(2, len(sets)):
        inc = make_increment(family, sets[i], [sets[i - 1]])
        front = frontier(family, inc)
        dist = kernel_apply(spec, family, inc, front,
                            [sample.values[sets[i - 1]]])
        predicted = np.real(dist.char_fn(freq))
        residual = np.cos(freq * sample.values[sets[i]]) - predicted
        for name, g in (("cos", np.cos), ("sin", np.sin)):
            probe = g(sample.values[sets[i - 2]])
            prod = residual * probe
            est = float(np.mean(prod))
            se = float(np.std(prod) / math.sqrt(n))
            rows.append({"lag_from": i - 2, "fn": name, "estimate": est,
                         "se": se})
            worst = max(worst, abs(est) / se if se > 0 else 0.0)
    return CheckReport("flow_projection", False, worst, 3.0, worst <= 3.0,
                       n, seed, {"rows": rows})


# ---------------------------------------------------------------------------
# Simple restart under shifts
# ---------------------------------------------------------------------------

def _homogeneity_probe(spec, family, sets, u_set, tol=1e-9):
    sl = semilattice_closure(family, list(sets))
    from .lattice import shift_increment

    for i in range(1, len(sl.sets)):
        inc = sl.left_neighborhood(i)
        if spec.kind == "product":
            incs = factor_increments(family, inc)
            for sub, fam, ci, ui in zip(spec.components, family.factors,
                                        incs, u_set.factors):
                _probe_one(sub, fam, ci, ui, tol)
        else:
            _probe_one(spec, family, inc, u_set, tol)


def _probe_one(spec, family, inc, u_set, tol):
    from .lattice import shift_increment

    shifted = shift_increment(family, inc, u_set)
    base = _kernel_parameters(spec, family, inc, frontier(family, inc))
    moved = _kernel_parameters(spec, family, shifted,
                               frontier(family, shifted))
    gap = abs(base["scale"] - moved["scale"])
    for s, c in base["coeffs"].items():
        gap = max(gap, abs(c - moved["coeffs"][family.shift(s, u_set)]))
    if gap > tol:
        raise KernelError("kernel is not shift-homogeneous (gap %g)" % gap)


def simple_markov_shift_check(spec, family, u_set, sets, nu=None, tol=1e-8,
                              n=50000, seed=0):
    """Shifted futures restart from the current value.

    Requires a shift-homogeneous kernel (probed exactly; inhomogeneous
    specs raise).  Gaussian branch: the law of the shifted sets conditioned
    on the value at ``u_set`` equals, as an affine family in the start
    value, the law of the unshifted sets started at that value.  Stable
    branch: matched-start sampling compared per set by Kolmogorov-Smirnov
    at the 1 percent level.
    """
    nu = nu or PointMassLaw(0.0)
    sets = list(sets)
    _homogeneity_probe(spec, family, sets, u_set)
    shifted = [family.shift(s, u_set) for s in sets]
    origin = family.empty_prime()

    if is_gaussian_exact(spec) and state_dim(spec) == 1:
        big = gaussian_fdd_moments(spec, family, nu, [u_set, *shifted])
        at_zero = gaussian_fdd_moments(spec, family, PointMassLaw(0.0), sets)
        at_one = gaussian_fdd_moments(spec, family, PointMassLaw(1.0), sets)
        gap = 0.0
        cond = [origin, u_set]
        for i, (s, sh) in enumerate(zip(sets, shifted)):
            w, const, var, dropped = gaussian_condition(big, sh, cond)
            intercept = at_zero.mean_of(s)
            slope = at_one.mean_of(s) - intercept
            if u_set in dropped:
                expected_const = intercept + slope * big.mean_of(u_set)
                gap = max(gap, abs(const - expected_const))
            else:
                gap = max(gap, abs(w.get(u_set, 0.0) - slope))
                gap = max(gap, abs(const - intercept))
            gap = max(gap, abs(w.get(origin, 0.0)) if origin != u_set else 0.0)
        cross = partial_covariance(big, shifted, shifted, cond)
        target = np.array([[at_zero.cov_of(a, b) for b in sets] for a in sets])
        gap = max(gap, float(np.max(np.abs(cross - target))))
        return CheckReport("simple_markov_shift", True, float(gap), tol,
                           gap <= tol, len(sets), seed)

    seeds = split_seeds(seed, 2)
    lhs = sample_fdd(spec, family, nu, [u_set, *shifted], seeds[0], n)
    start = lhs.values[u_set]
    rhs = sample_fdd(spec, family,
                     CustomLaw(lambda rng, size: start.copy()),
                     sets, seeds[1], n)
    worst_p = 1.0
    for s, sh in zip(sets, shifted):
        ks = stats.ks_2samp(lhs.values[sh], rhs.values[s])
        worst_p = min(worst_p, float(ks.pvalue))
    return CheckReport("simple_markov_shift", False, worst_p, 0.01,
                       worst_p > 0.01, n, seed, {"min_pvalue": worst_p})
