"""Transition kernels indexed by increments.

A kernel spec maps an increment ``C = A \\ B`` and the process values on the
frontier of ``C`` to the one-dimensional conditional distribution of the
value at ``A``.  Implemented families:

* ``DiracKernel``        - deterministic continuation (point mass at the
  signed frontier combination);
* ``LevyKernel``         - independent-increment kernels driven by an
  infinitely divisible marginal (Gaussian, Poisson or symmetric stable)
  run for time ``m(C)``;
* ``OUKernel``           - mean-reverting kernels with symmetric
  alpha-stable innovations (Gaussian when ``alpha == 2``);
* ``ProductKernel``      - componentwise kernels on a product family,
  acting on vector states;
* ``AdditiveLevyKernel`` - convolution of per-factor Levy marginals on a
  product family, acting on scalar states.

Kernels are immutable; sampling takes an explicit generator so concurrent
use only requires independent streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import KernelError
from .lattice import (frontier, increment_measure, make_increment,
                      shift_increment, simple_increment, split)

GAUSS_QUAD_NODES = 80
SIGMA_NEGATIVE_TOL = 1e-10


# ---------------------------------------------------------------------------
# Symmetric stable sampling (Chambers-Mallows-Stuck)
# ---------------------------------------------------------------------------

def sas_standard(alpha, rng, size=()):
    """Draw standard symmetric alpha-stable variates, scale 1, alpha in (0, 2).

    Uses the Chambers-Mallows-Stuck transform of a uniform angle and an
    exponential clock; reduces to the Cauchy quantile transform at
    ``alpha == 1``.
    """
    if not 0.0 < alpha < 2.0:
        raise KernelError("stable sampling needs alpha in (0, 2)")
    u = rng.uniform(-math.pi / 2, math.pi / 2, size)
    if alpha == 1.0:
        return np.tan(u)
    w = rng.standard_exponential(size)
    num = np.sin(alpha * u) / np.cos(u) ** (1.0 / alpha)
    return num * (np.cos((1.0 - alpha) * u) / w) ** ((1.0 - alpha) / alpha)


# ---------------------------------------------------------------------------
# Conditional distributions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PointMass:
    value: object

    def sample(self, rng, size=None):
        v = np.asarray(self.value, dtype=float)
        if size is None:
            return v.copy()
        return np.broadcast_to(v, _shape(size, v)).copy()

    def mean(self):
        return self.value

    def var(self):
        return 0.0

    def density(self, y):
        y = np.asarray(y, dtype=float)
        return np.where(y == self.value, np.inf, 0.0)

    def char_fn(self, u):
        return np.exp(1j * u * np.asarray(self.value, dtype=float))


@dataclass(frozen=True)
class GaussianDist:
    mean_value: object
    variance: float

    def sample(self, rng, size=None):
        mean = np.asarray(self.mean_value, dtype=float)
        shape = mean.shape if size is None else _shape(size, mean)
        return mean + math.sqrt(self.variance) * rng.standard_normal(shape)

    def mean(self):
        return self.mean_value

    def var(self):
        return self.variance

    def density(self, y):
        if self.variance <= 0.0:
            raise KernelError("degenerate Gaussian has no density")
        y = np.asarray(y, dtype=float)
        z = (y - self.mean_value) ** 2 / (2.0 * self.variance)
        return np.exp(-z) / math.sqrt(2.0 * math.pi * self.variance)

    def char_fn(self, u):
        mean = np.asarray(self.mean_value, dtype=float)
        return np.exp(1j * u * mean - 0.5 * self.variance * u ** 2)


@dataclass(frozen=True)
class ShiftedPoisson:
    shift: object
    rate: float

    def sample(self, rng, size=None):
        shift = np.asarray(self.shift, dtype=float)
        shape = shift.shape if size is None else _shape(size, shift)
        return shift + rng.poisson(self.rate, shape)

    def mean(self):
        return self.shift + self.rate

    def var(self):
        return self.rate

    def density(self, y):
        raise KernelError("Poisson kernels have no Lebesgue density")

    def char_fn(self, u):
        shift = np.asarray(self.shift, dtype=float)
        return np.exp(1j * u * shift + self.rate * (np.exp(1j * u) - 1.0))


@dataclass(frozen=True)
class ShiftedStable:
    alpha: float
    scale: float
    shift: object

    def sample(self, rng, size=None):
        shift = np.asarray(self.shift, dtype=float)
        shape = shift.shape if size is None else _shape(size, shift)
        return shift + self.scale * sas_standard(self.alpha, rng, shape)

    def mean(self):
        raise KernelError("stable distributions have no finite moments here")

    def var(self):
        raise KernelError("stable distributions have no finite moments here")

    def density(self, y):
        raise KernelError("stable densities are not evaluated")

    def char_fn(self, u):
        shift = np.asarray(self.shift, dtype=float)
        return np.exp(1j * u * shift - np.abs(self.scale * u) ** self.alpha)


@dataclass(frozen=True)
class ConvolvedDist:
    """Sum of independent component distributions (mixed-class convolution)."""

    components: tuple

    def sample(self, rng, size=None):
        total = None
        for c in self.components:
            draw = c.sample(rng, size)
            total = draw if total is None else total + draw
        return total

    def mean(self):
        return sum(c.mean() for c in self.components)

    def var(self):
        return sum(c.var() for c in self.components)

    def density(self, y):
        raise KernelError("mixed convolutions have no closed-form density")

    def char_fn(self, u):
        total = 1.0
        for c in self.components:
            total = total * c.char_fn(u)
        return total


def _shape(size, arr):
    if isinstance(size, int):
        size = (size,)
    return tuple(size) + arr.shape


# ---------------------------------------------------------------------------
# Marginal classes for Levy kernels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GaussianMarginal:
    rate: float = 1.0  # variance per unit measure

    def at_time(self, t, shift):
        return GaussianDist(shift, self.rate * t)


@dataclass(frozen=True)
class PoissonMarginal:
    rate: float = 1.0  # intensity per unit measure

    def at_time(self, t, shift):
        return ShiftedPoisson(shift, self.rate * t)


@dataclass(frozen=True)
class StableMarginal:
    alpha: float
    rate: float = 1.0  # scale at unit measure

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise KernelError("stable marginal needs alpha in (0, 2)")

    def at_time(self, t, shift):
        return ShiftedStable(self.alpha, self.rate * t ** (1.0 / self.alpha),
                             shift)


# ---------------------------------------------------------------------------
# Kernel specs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiracKernel:
    kind = "dirac"


@dataclass(frozen=True)
class LevyKernel:
    marginal: object
    kind = "levy"


@dataclass(frozen=True)
class OUKernel:
    alpha: float
    lam: float
    sigma: float
    kind = "ou"

    def __post_init__(self):
        if not 0.0 < self.alpha <= 2.0:
            raise KernelError("OU kernel needs alpha in (0, 2]")
        if self.lam <= 0.0 or self.sigma <= 0.0:
            raise KernelError("OU kernel needs lam > 0 and sigma > 0")


@dataclass(frozen=True)
class ProductKernel:
    components: tuple
    kind = "product"


@dataclass(frozen=True)
class AdditiveLevyKernel:
    marginals: tuple
    kind = "additive"

    def __post_init__(self):
        marg = tuple(m.marginal if isinstance(m, LevyKernel) else m
                     for m in self.marginals)
        object.__setattr__(self, "marginals", marg)


def state_dim(spec):
    """Dimension of the processed state: factor count for product kernels."""
    return len(spec.components) if spec.kind == "product" else 1


def is_gaussian_exact(spec):
    """True when the kernel admits an exact linear-Gaussian representation."""
    if spec.kind == "dirac":
        return True
    if spec.kind == "levy":
        return isinstance(spec.marginal, GaussianMarginal)
    if spec.kind == "ou":
        return spec.alpha == 2.0
    if spec.kind == "additive":
        return all(isinstance(m, GaussianMarginal) for m in spec.marginals)
    if spec.kind == "product":
        return all(is_gaussian_exact(c) for c in spec.components)
    return False


def _check_product(spec, family):
    if family.kind != "product":
        raise KernelError("%s kernels need a product family" % spec.kind)
    if len(spec_components(spec)) != family.arity:
        raise KernelError("kernel arity %d does not match family arity %d"
                          % (len(spec_components(spec)), family.arity))


def spec_components(spec):
    return spec.components if spec.kind == "product" else spec.marginals


def factor_increments(family, inc):
    """Per-factor increments of a product-family increment."""
    out = []
    for i, fam in enumerate(family.factors):
        apex = inc.apex.factors[i]
        parts = [p.factors[i] for p in inc.parts]
        out.append(make_increment(fam, apex, parts))
    return out


# ---------------------------------------------------------------------------
# Measure-geometry helpers shared by the OU kernel
# ---------------------------------------------------------------------------

def _ou_gaps(spec, family, inc, front):
    """Nonnegative measure gaps m(A) - m(Cp_i) along the frontier."""
    m_apex = family.set_measure(inc.apex)
    return np.array([m_apex - family.set_measure(s) for s in front.sets])


def ou_sigma(spec, family, inc, front=None):
    """Innovation scale of the OU kernel on an increment.

    Empty increments give 0.  A bracket more negative than ``-1e-10``
    signals increment geometry outside the kernel's domain and raises
    rather than being silently clamped.
    """
    if spec.kind != "ou":
        raise KernelError("ou_sigma needs an OU kernel")
    if inc.empty:
        return 0.0
    if front is None:
        front = frontier(family, inc)
    gaps = _ou_gaps(spec, family, inc, front)
    al = spec.alpha * spec.lam
    bracket = 1.0 - float(np.dot(front.signs, np.exp(-al * gaps)))
    if bracket < -SIGMA_NEGATIVE_TOL:
        raise KernelError("negative OU scale bracket %g" % bracket)
    bracket = max(bracket, 0.0)
    return (spec.sigma ** spec.alpha / al * bracket) ** (1.0 / spec.alpha)


# ---------------------------------------------------------------------------
# Linear-Gaussian representation
# ---------------------------------------------------------------------------

def gaussian_coeffs(spec, family, inc, front=None):
    """Linear representation ``X_A = sum_i c_i x_i + sqrt(v) Z``.

    Returns the coefficient array aligned with the frontier sets and the
    innovation variance.  Only kernels with an exact Gaussian form qualify
    (Dirac, Gaussian Levy, Gaussian OU, all-Gaussian additive).
    """
    if front is None:
        front = frontier(family, inc)
    signs = np.asarray(front.signs, dtype=float)
    if inc.empty or spec.kind == "dirac":
        return signs, 0.0
    if spec.kind == "levy":
        if not isinstance(spec.marginal, GaussianMarginal):
            raise KernelError("no Gaussian form for %r" % (spec.marginal,))
        return signs, spec.marginal.rate * increment_measure(family, inc)
    if spec.kind == "ou":
        if spec.alpha != 2.0:
            raise KernelError("no Gaussian form for stable OU")
        gaps = _ou_gaps(spec, family, inc, front)
        coeffs = signs * np.exp(-spec.lam * gaps)
        return coeffs, ou_sigma(spec, family, inc, front) ** 2
    if spec.kind == "additive":
        _check_product(spec, family)
        if not all(isinstance(m, GaussianMarginal) for m in spec.marginals):
            raise KernelError("additive kernel mixes non-Gaussian marginals")
        var = sum(m.rate * increment_measure(fam, ci)
                  for m, fam, ci in zip(spec.marginals, family.factors,
                                        factor_increments(family, inc)))
        return signs, var
    raise KernelError("no scalar Gaussian form for %s kernels" % spec.kind)


# ---------------------------------------------------------------------------
# Kernel application
# ---------------------------------------------------------------------------

def kernel_apply(spec, family, inc, front, values):
    """Conditional distribution of the apex value given frontier values.

    ``values`` is aligned with ``front.sets``; entries may be scalars or
    arrays of a common shape (vectorized conditioning).  Product kernels
    take one value vector per frontier set and return a tuple of
    per-component distributions.
    """
    if spec.kind == "product":
        return _product_apply(spec, family, inc, front, values)
    values = [np.asarray(v, dtype=float) for v in values]
    if len(values) != len(front.sets):
        raise KernelError("expected %d frontier values, got %d"
                          % (len(front.sets), len(values)))
    shift = front.delta(values)
    if inc.empty or spec.kind == "dirac":
        return PointMass(shift)
    if spec.kind == "levy":
        return spec.marginal.at_time(increment_measure(family, inc), shift)
    if spec.kind == "ou":
        gaps = _ou_gaps(spec, family, inc, front)
        weights = np.asarray(front.signs) * np.exp(-spec.lam * gaps)
        mean = sum(w * v for w, v in zip(weights, values))
        scale = ou_sigma(spec, family, inc, front)
        if spec.alpha == 2.0:
            return GaussianDist(mean, scale ** 2)
        return ShiftedStable(spec.alpha, scale, mean)
    if spec.kind == "additive":
        _check_product(spec, family)
        comps = []
        for marg, fam, ci in zip(spec.marginals, family.factors,
                                 factor_increments(family, inc)):
            t = increment_measure(fam, ci)
            comps.append(marg.at_time(t, 0.0))
        if all(isinstance(m, GaussianMarginal) for m in spec.marginals):
            var = sum(c.variance for c in comps)
            return GaussianDist(shift, var)
        same_stable = all(isinstance(m, StableMarginal)
                          and m.alpha == spec.marginals[0].alpha
                          for m in spec.marginals)
        if same_stable:
            alpha = spec.marginals[0].alpha
            scale = sum(c.scale ** alpha for c in comps) ** (1.0 / alpha)
            return ShiftedStable(alpha, scale, shift)
        return ConvolvedDist((PointMass(shift), *comps))
    raise KernelError("unknown kernel kind %r" % (spec.kind,))


def _product_apply(spec, family, inc, front, values):
    _check_product(spec, family)
    arity = family.arity
    values = [np.asarray(v, dtype=float) for v in values]
    component_values = {}
    for idx, s in enumerate(front.sets):
        v = values[idx]
        if v.ndim == 0 or v.shape[-1] != arity:
            raise KernelError("product values need %d components" % arity)
        for l in range(arity):
            key = (l, s.factors[l])
            comp = v[..., l]
            if key in component_values:
                if not np.array_equal(component_values[key], comp):
                    raise KernelError(
                        "inconsistent conditioning values for component %d" % l)
            else:
                component_values[key] = comp
    dists = []
    incs = factor_increments(family, inc)
    for l, (sub, fam, ci) in enumerate(zip(spec.components, family.factors,
                                           incs)):
        fr = frontier(fam, ci)
        try:
            vals = [component_values[(l, u)] for u in fr.sets]
        except KeyError as exc:
            raise KernelError(
                "conditional law does not factorize: missing component value "
                "for %r" % (exc.args[0],)) from exc
        dists.append(kernel_apply(sub, fam, ci, fr, vals))
    return tuple(dists)


# ---------------------------------------------------------------------------
# Transition densities
# ---------------------------------------------------------------------------

def transition_density(spec, family, inc, front, values, y):
    """Closed-form conditional density at ``y`` (Gaussian kernels only)."""
    if spec.kind == "product":
        _check_product(spec, family)
        y = np.asarray(y, dtype=float)
        if y.shape[-1] != family.arity:
            raise KernelError("product density needs one y per component")
        dists = kernel_apply(spec, family, inc, front, values)
        dens = 1.0
        for l, d in enumerate(dists):
            dens = dens * d.density(y[..., l])
        return dens
    dist = kernel_apply(spec, family, inc, front, values)
    return dist.density(y)


# ---------------------------------------------------------------------------
# Expectation helper
# ---------------------------------------------------------------------------

def _gauss_hermite(nodes=GAUSS_QUAD_NODES):
    x, w = np.polynomial.hermite.hermgauss(nodes)
    return x, w / math.sqrt(math.pi)


def expectation(dist, f, rng=None, n_mc=20000, quad_nodes=GAUSS_QUAD_NODES):
    """E[f(Y)] for a conditional distribution.

    Gaussian and point-mass laws are integrated by Gauss-Hermite
    quadrature (vectorized over array-valued means); Poisson by truncated
    summation; stable and mixed laws by Monte Carlo with the supplied
    generator.
    """
    if isinstance(dist, PointMass):
        return f(np.asarray(dist.value, dtype=float))
    if isinstance(dist, GaussianDist):
        mean = np.asarray(dist.mean_value, dtype=float)
        if dist.variance == 0.0:
            return f(mean)
        x, w = _gauss_hermite(quad_nodes)
        std = math.sqrt(2.0 * dist.variance)
        acc = 0.0
        for xi, wi in zip(x, w):
            acc = acc + wi * f(mean + std * xi)
        return acc
    if isinstance(dist, ShiftedPoisson):
        kmax = int(dist.rate + 12.0 * math.sqrt(dist.rate) + 25.0)
        shift = np.asarray(dist.shift, dtype=float)
        acc, logfact = 0.0, 0.0
        for k in range(kmax + 1):
            if k > 0:
                logfact += math.log(k)
            if dist.rate > 0:
                w = math.exp(-dist.rate + k * math.log(dist.rate) - logfact)
            else:
                w = 1.0 if k == 0 else 0.0
            acc = acc + w * f(shift + k)
        return acc
    if rng is None:
        raise KernelError("Monte Carlo expectation needs a generator")
    draws = dist.sample(rng, n_mc)
    return np.mean(f(draws), axis=0)


# ---------------------------------------------------------------------------
# Chapman-Kolmogorov residual
# ---------------------------------------------------------------------------

DEFAULT_TEST_FUNCTIONS = (
    ("x", lambda y: y),
    ("x^2", lambda y: y ** 2),
    ("cos(x)", lambda y: np.cos(y)),
    ("sin(x)", lambda y: np.sin(y)),
    ("cos(2x)", lambda y: np.cos(2.0 * y)),
    ("sin(2x)", lambda y: np.sin(2.0 * y)),
)


@dataclass(frozen=True)
class FnRow:
    name: str
    one_step: float
    two_step: float
    diff: float
    se: float


@dataclass(frozen=True)
class CKReport:
    exact_gap: object
    rows: tuple
    n: int
    seed: object

    def passed(self, exact_tol=1e-10, z=3.0):
        if self.exact_gap is not None and self.exact_gap > exact_tol:
            return False
        return all(abs(r.diff) <= z * r.se or r.diff == 0.0 for r in self.rows)


def compose_exact(spec, family, inc, a_prime):
    """Exact one-step vs two-step gap of the linear-Gaussian representation.

    The two-step route substitutes the inner kernel into the outer one;
    coefficients are compared set by set, innovation variances directly.
    Product kernels recurse into their factors.
    """
    if spec.kind == "product":
        _check_product(spec, family)
        cut = family.intersect(inc.apex, a_prime)
        gaps = []
        for sub, fam, ci, cut_i in zip(spec.components, family.factors,
                                       factor_increments(family, inc),
                                       cut.factors):
            gaps.append(compose_exact(sub, fam, ci, cut_i))
        return max(gaps)

    inner, outer = split(family, inc, a_prime)
    fr = frontier(family, inc)
    c, v = gaussian_coeffs(spec, family, inc, fr)
    one = dict(zip(fr.sets, c))

    fr_out = frontier(family, outer)
    c2, v2 = gaussian_coeffs(spec, family, outer, fr_out)
    two = dict(zip(fr_out.sets, c2))
    var_two = v2
    cut = inner.apex
    if not inner.empty:
        w = two.pop(cut, 0.0)
        fr_in = frontier(family, inner)
        c1, v1 = gaussian_coeffs(spec, family, inner, fr_in)
        for s, coeff in zip(fr_in.sets, c1):
            two[s] = two.get(s, 0.0) + w * coeff
        var_two = v2 + w * w * v1

    gap = abs(v - var_two)
    for s in set(one) | set(two):
        gap = max(gap, abs(one.get(s, 0.0) - two.get(s, 0.0)))
    return gap


def ck_residual(spec, family, inc, a_prime, values, n=100000, seed=0,
                test_functions=DEFAULT_TEST_FUNCTIONS):
    """One-step vs two-step check of kernel composition.

    ``values`` maps index sets to conditioning values and must cover the
    frontiers of the increment and of both split halves.  For kernels with
    an exact Gaussian form the coefficient-level gap is reported; the Monte
    Carlo rows estimate ``E[f(X_A)]`` along both routes for each test
    function together with the pooled standard error.
    """
    exact_gap = None
    if is_gaussian_exact(spec):
        exact_gap = compose_exact(spec, family, inc, a_prime)
    if spec.kind == "product":
        if exact_gap is None:
            raise KernelError("Monte Carlo CK is scalar-state only")
        return CKReport(exact_gap, (), 0, seed)

    inner, outer = split(family, inc, a_prime)
    fr = frontier(family, inc)
    rng1 = np.random.default_rng(np.random.SeedSequence((seed, 1)))
    rng2 = np.random.default_rng(np.random.SeedSequence((seed, 2)))

    one_draws = kernel_apply(spec, family, inc, fr,
                             [np.broadcast_to(values[s], (n,))
                              for s in fr.sets]).sample(rng1)

    cut = inner.apex
    if inner.empty:
        fr_in = frontier(family, inner)
        stage = PointMass(fr_in.delta([np.broadcast_to(values[s], (n,))
                                       for s in fr_in.sets])).sample(rng2)
    else:
        fr_in = frontier(family, inner)
        stage = kernel_apply(spec, family, inner, fr_in,
                             [np.broadcast_to(values[s], (n,))
                              for s in fr_in.sets]).sample(rng2)
    fr_out = frontier(family, outer)
    outer_vals = [stage if s == cut else np.broadcast_to(values[s], (n,))
                  for s in fr_out.sets]
    if outer.empty:
        two_draws = fr_out.delta(outer_vals)
    else:
        two_draws = kernel_apply(spec, family, outer, fr_out,
                                 outer_vals).sample(rng2)

    rows = []
    for name, f in test_functions:
        a, b = f(one_draws), f(two_draws)
        diff = float(np.mean(a) - np.mean(b))
        se = math.sqrt((np.var(a) + np.var(b)) / n)
        rows.append(FnRow(name, float(np.mean(a)), float(np.mean(b)),
                          diff, se))
    return CKReport(exact_gap, tuple(rows), n, seed)


# ---------------------------------------------------------------------------
# Homogeneity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GapReport:
    method: str
    gap: float
    threshold: float
    passed: bool
    details: dict


def homogeneity_gap(spec, family, inc, u_set, n=20000, seed=0, tol=1e-12):
    """Compare a kernel on an increment and on its shift, frontier-matched.

    Kernels with exact parameters (Gaussian, Dirac, Poisson) report the
    largest coefficient or parameter gap.  Stable kernels report a
    two-sample Kolmogorov-Smirnov statistic on matched conditioning values,
    passing at the 1 percent level.
    """
    shifted = shift_increment(family, inc, u_set)
    fr = frontier(family, inc)
    fr_s = frontier(family, shifted)
    mapping = {family.shift(s, u_set): s for s in fr.sets}
    if set(mapping) != set(fr_s.sets):
        raise KernelError("shift does not carry the frontier onto itself")

    if spec.kind == "product":
        _check_product(spec, family)
        gaps = [homogeneity_gap(sub, fam, ci, ui, n=n, seed=seed, tol=tol)
                for sub, fam, ci, ui in zip(spec.components, family.factors,
                                            factor_increments(family, inc),
                                            u_set.factors)]
        gap = max(g.gap for g in gaps)
        return GapReport(gaps[0].method, gap, gaps[0].threshold,
                         all(g.passed for g in gaps), {"factors": len(gaps)})

    stable = ((spec.kind == "ou" and spec.alpha < 2.0)
              or (spec.kind == "levy" and isinstance(spec.marginal, StableMarginal))
              or (spec.kind == "additive"
                  and any(isinstance(m, StableMarginal) for m in spec.marginals)))
    if not stable:
        base = _kernel_parameters(spec, family, inc, fr)
        moved = _kernel_parameters(spec, family, shifted, fr_s)
        gap = abs(base["scale"] - moved["scale"])
        for s in fr.sets:
            shifted_set = family.shift(s, u_set)
            gap = max(gap, abs(base["coeffs"][s] - moved["coeffs"][shifted_set]))
        return GapReport("exact", gap, tol, gap <= tol, {})

    from scipy import stats

    rng = np.random.default_rng(np.random.SeedSequence((seed, 7)))
    vals = {s: rng.normal() for s in fr.sets}
    base_vals = [np.full(n, vals[s]) for s in fr.sets]
    moved_vals = [np.full(n, vals[mapping[s]]) for s in fr_s.sets]
    a = kernel_apply(spec, family, inc, fr, base_vals).sample(rng)
    b = kernel_apply(spec, family, shifted, fr_s, moved_vals).sample(rng)
    ks = stats.ks_2samp(a, b)
    return GapReport("ks", float(ks.statistic), 0.01,
                     bool(ks.pvalue > 0.01), {"pvalue": float(ks.pvalue)})


def _kernel_parameters(spec, family, inc, front):
    """Scalar kernel parameters: per-set mean coefficients plus a scale."""
    signs = np.asarray(front.signs, dtype=float)
    if inc.empty or spec.kind == "dirac":
        return {"coeffs": dict(zip(front.sets, signs)), "scale": 0.0}
    if spec.kind == "levy":
        t = increment_measure(family, inc)
        if isinstance(spec.marginal, GaussianMarginal):
            scale = spec.marginal.rate * t
        elif isinstance(spec.marginal, PoissonMarginal):
            scale = spec.marginal.rate * t
        else:
            scale = spec.marginal.rate * t ** (1.0 / spec.marginal.alpha)
        return {"coeffs": dict(zip(front.sets, signs)), "scale": scale}
    if spec.kind == "ou":
        gaps = _ou_gaps(spec, family, inc, front)
        coeffs = signs * np.exp(-spec.lam * gaps)
        return {"coeffs": dict(zip(front.sets, coeffs)),
                "scale": ou_sigma(spec, family, inc, front)}
    if spec.kind == "additive":
        var = 0.0
        for marg, fam, ci in zip(spec.marginals, family.factors,
                                 factor_increments(family, inc)):
            var += marg.rate * increment_measure(fam, ci)
        return {"coeffs": dict(zip(front.sets, signs)), "scale": var}
    raise KernelError("no parameter form for %s kernels" % spec.kind)


# ---------------------------------------------------------------------------
# Multiparameter transition operators
# ---------------------------------------------------------------------------

def multiparameter_semigroup(spec, family, t_corner, f, n_mc=20000, seed=0,
                             quad_nodes=GAUSS_QUAD_NODES):
    """The operator ``x -> E[f(value at [0, t]) | start x]``.

    Returns a callable accepting scalars or arrays.  Gaussian kernels use
    quadrature; stable kernels fall back to seeded Monte Carlo.  A zero
    corner yields the identity operator.
    """
    base = family.empty_prime()
    apex = family.shift(base, t_corner)
    inc = make_increment(family, apex, [base])
    fr = frontier(family, inc)

    def operator(x):
        x = np.asarray(x, dtype=float)
        rng = np.random.default_rng(np.random.SeedSequence((seed, 11)))
        dist = kernel_apply(spec, family, inc, fr, [x])
        return expectation(dist, f, rng=rng, n_mc=n_mc, quad_nodes=quad_nodes)

    return operator


def tabulate(fn, xs):
    xs = np.asarray(xs, dtype=float)
    return np.asarray(fn(xs), dtype=float)


# ---------------------------------------------------------------------------
# Feller modulus
# ---------------------------------------------------------------------------

def feller_modulus(spec, family, rho, f, bound=2.0, n_pairs=40, x_grid=None,
                   seed=0, n_mc=4000, quad_nodes=GAUSS_QUAD_NODES):
    """Estimated uniform gap ``sup |P_{U \\ V} f - f|`` over thin increments.

    Pairs ``V <= U`` with Hausdorff gap at most ``rho`` are sampled inside
    the bounding box, and the conditional expectation is compared with the
    identity on a value grid.  Decreasing ``rho`` shrinks the estimate for
    continuity-preserving kernels.
    """
    if family.kind != "rect":
        raise KernelError("the Feller modulus is implemented for rect families")
    if rho == 0.0:
        return 0.0
    if x_grid is None:
        x_grid = np.linspace(-4.0, 4.0, 81)
    x_grid = np.asarray(x_grid, dtype=float)
    rng = np.random.default_rng(np.random.SeedSequence((seed, 13)))
    worst = 0.0
    for _ in range(n_pairs):
        upper = rng.uniform(rho, bound, family.dim)
        delta = rng.uniform(0.0, rho, family.dim)
        u_set = family.rect(*upper)
        v_set = family.rect(*(upper - delta))
        inc = make_increment(family, u_set, [v_set])
        fr = frontier(family, inc)
        dist = kernel_apply(spec, family, inc, fr, [x_grid])
        values = expectation(dist, f, rng=rng, n_mc=n_mc,
                             quad_nodes=quad_nodes)
        worst = max(worst, float(np.max(np.abs(values - f(x_grid)))))
    return worst


def feller_profile(spec, family, f, rhos=None, **cfg):
    """Modulus estimates over a dyadic ladder of ``rho`` values."""
    if rhos is None:
        rhos = [2.0 ** -k for k in range(1, 9)]
    return [(rho, feller_modulus(spec, family, rho, f, **cfg))
            for rho in rhos]
