import sys
sys.path.insert(0, "src")
import math
import numpy as np
from scipy import stats

from setmarkov.families import rect_family, product_family
from setmarkov import lattice as lat
from setmarkov import kernels as ker

fam = rect_family(2)
apex = fam.rect(2, 2)
inc = lat.make_increment(fam, apex, [fam.rect(2, 1), fam.rect(1, 2)])
fr = lat.frontier(fam, inc)
print("frontier:", [s.corner for s in fr.sets], fr.signs)
spec = ker.LevyKernel(ker.GaussianMarginal(1.0))
vals = {(2.0, 1.0): 2.0, (1.0, 2.0): 3.0, (1.0, 1.0): 1.0}
aligned = [vals[s.corner] for s in fr.sets]
d = ker.kernel_apply(spec, fam, inc, fr, aligned)
print("Brownian staircase:", d.mean(), d.var(), "expect 4, 1")

# OU example
fam1 = rect_family(1)
inc1 = lat.simple_increment(fam1, fam1.rect(1.0))
fr1 = lat.frontier(fam1, inc1)
ou = ker.OUKernel(2.0, 1.0, math.sqrt(2.0))
d = ker.kernel_apply(ou, fam1, inc1, fr1, [1.5])
print("OU:", d.mean(), d.var(), "expect", 1.5 * math.exp(-1), 1 - math.exp(-2))
print("ou_sigma empty:", ker.ou_sigma(ou, fam1, lat.make_increment(fam1, fam1.rect(1.0), [fam1.rect(1.0)])))

# CMS alpha=1 vs Cauchy; alpha=1.5 vs scipy levy_stable
rng = np.random.default_rng(42)
x = ker.sas_standard(1.0, rng, 20000)
print("cauchy KS p:", stats.kstest(x, "cauchy").pvalue)
x = ker.sas_standard(1.5, rng, 5000)
print("levy_stable 1.5 KS p:", stats.kstest(x, stats.levy_stable(1.5, 0.0).cdf).pvalue)

# exact CK on random Brownian/OU splits
rng = np.random.default_rng(7)
worst = {"brown": 0.0, "ou": 0.0}
for _ in range(60):
    dim = int(rng.integers(1, 4))
    f = rect_family(dim)
    a = f.rect(*rng.uniform(0.5, 3.0, dim))
    parts = [f.rect(*(np.array(a.corner) * rng.uniform(0.05, 1.0, dim)))
             for _ in range(int(rng.integers(1, 5)))]
    inc = lat.make_increment(f, a, parts)
    cut = f.rect(*(np.array(a.corner) * rng.uniform(0.05, 1.2, dim)))
    worst["brown"] = max(worst["brown"], ker.compose_exact(
        ker.LevyKernel(ker.GaussianMarginal(0.7)), f, inc, cut))
    worst["ou"] = max(worst["ou"], ker.compose_exact(
        ker.OUKernel(2.0, 0.8, 1.3), f, inc, cut))
print("exact CK worst:", worst)

# additive CK
pf = product_family(rect_family(1), rect_family(1))
add = ker.AdditiveLevyKernel((ker.GaussianMarginal(1.0), ker.GaussianMarginal(2.0)))
a = pf.prod(pf.factors[0].rect(2.0), pf.factors[1].rect(1.5))
parts = [pf.prod(pf.factors[0].rect(1.0), pf.factors[1].rect(1.5)),
         pf.prod(pf.factors[0].rect(2.0), pf.factors[1].rect(0.5))]
inc = lat.make_increment(pf, a, parts)
cut = pf.prod(pf.factors[0].rect(1.5), pf.factors[1].rect(1.0))
print("additive exact CK:", ker.compose_exact(add, pf, inc, cut))

# product kernel on *-Markov increment
prod = ker.ProductKernel((ker.LevyKernel(ker.GaussianMarginal(1.0)),) * 2)
s, t, h, k = 1.0, 1.0, 1.0, 1.0
a = pf.prod(pf.factors[0].rect(s + h), pf.factors[1].rect(t + k))
parts = [pf.prod(pf.factors[0].rect(s), pf.factors[1].rect(t)),
         pf.prod(pf.factors[0].rect(s + h), pf.factors[1].rect(t)),
         pf.prod(pf.factors[0].rect(s), pf.factors[1].rect(t + k))]
inc = lat.make_increment(pf, a, parts)
fr = lat.frontier(pf, inc)
print("star frontier:", [pf.label(x) for x in fr.sets], fr.signs)
vals = [np.array([1.0, 2.0]), np.array([1.0, 4.0]), np.array([3.0, 2.0])]
# align with fr.sets: build dict by (component, factor set)
vmap = {((1.0,), (1.0,)): [1.0, 2.0], ((2.0,), (1.0,)): [3.0, 2.0],
        ((1.0,), (2.0,)): [1.0, 4.0]}
aligned = [np.array(vmap[tuple(x.corner for x in s.factors)]) for s in fr.sets]
dists = ker.kernel_apply(prod, pf, inc, fr, aligned)
print("product dists:", dists)

# bi-Brownian density with single part
inc2 = lat.make_increment(pf, a, [parts[0]])
fr2 = lat.frontier(pf, inc2)
dens = ker.transition_density(prod, pf, inc2, fr2,
                              [np.array([0.0, 0.0])], np.array([0.0, 0.0]))
print("bi-Brownian density:", dens, "expect", (1 / math.sqrt(2 * math.pi)) ** 2)

# MC ck for stable OU
fam2 = rect_family(2)
a = fam2.rect(2.0, 1.5)
inc = lat.make_increment(fam2, a, [fam2.rect(1.0, 1.5), fam2.rect(2.0, 0.5)])
fr = lat.frontier(fam2, inc)
sou = ker.OUKernel(1.8, 1.0, 1.0)
vals = {s: float(i) * 0.3 for i, s in enumerate(fr.sets)}
inner, outer = lat.split(fam2, inc, fam2.rect(1.5, 1.0))
for s in lat.frontier(fam2, inner).sets + lat.frontier(fam2, outer).sets:
    vals.setdefault(s, 0.1)
rep = ker.ck_residual(sou, fam2, inc, fam2.rect(1.5, 1.0), vals, n=50000, seed=3)
print("stable CK rows:")
for r in rep.rows:
    print("  ", r.name, round(r.diff, 5), round(r.se, 5), abs(r.diff) <= 3 * r.se)
print("passed:", rep.passed())
