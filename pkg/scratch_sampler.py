import sys
sys.path.insert(0, "src")
import math
import numpy as np

from setmarkov.families import rect_family, tree_family, product_family
from setmarkov import kernels as ker
from setmarkov import sampler as smp

fam = rect_family(2)
brown = ker.LevyKernel(ker.GaussianMarginal(1.0))
nu = smp.PointMassLaw(0.0)

# moments: Brownian cov(U,V) = m(U cap V)
fdd = smp.gaussian_fdd_moments(brown, fam, nu, [fam.rect(1, 2), fam.rect(2, 1)])
print("cov:", fdd.cov_of(fam.rect(1, 2), fam.rect(2, 1)), "expect 1")
print("var U:", fdd.cov_of(fam.rect(1, 2), fam.rect(1, 2)), "expect 2")

# OU closed forms
fam1 = rect_family(1)
lam, sig, x0 = 0.7, 1.3, 0.8
ou = ker.OUKernel(2.0, lam, sig)
sets = [fam1.rect(0.5), fam1.rect(1.9)]
fdd = smp.gaussian_fdd_moments(ou, fam1, smp.PointMassLaw(x0), sets)
for s in sets:
    m = fam1.set_measure(s)
    print("OU mean gap:", abs(fdd.mean_of(s) - x0 * math.exp(-lam * m)))
u, v = sets
mu_, mv = fam1.set_measure(u), fam1.set_measure(v)
mdelta = abs(mu_ - mv)
expect = sig**2 / (2 * lam) * (math.exp(-lam * mdelta) - math.exp(-lam * (mu_ + mv)))
print("OU cov gap:", abs(fdd.cov_of(u, v) - expect))

# sampling agreement
sets = [fam.rect(1, 1), fam.rect(2, 1), fam.rect(1.5, 2)]
fdd = smp.gaussian_fdd_moments(brown, fam, nu, sets)
sample = smp.sample_fdd(brown, fam, nu, sets, seed=123, replicates=200000)
for s in sets:
    emp_m = sample.values[s].mean()
    emp_v = sample.values[s].var()
    print(fam.label(s), "mean", round(emp_m, 4), "vs", round(fdd.mean_of(s), 4),
          "var", round(emp_v, 4), "vs", round(fdd.cov_of(s, s), 4))

# determinism
s2 = smp.sample_fdd(brown, fam, nu, sets, seed=123, replicates=100)
s3 = smp.sample_fdd(brown, fam, nu, sets, seed=123, replicates=100)
print("deterministic:", all(np.array_equal(s2.values[s], s3.values[s]) for s in s2.values))

# tree sibling independence
tf = tree_family([0, 0, 0, 1, 1, 2, 2])
ts = [tf.branch(1), tf.branch(3), tf.branch(4)]
samp = smp.sample_fdd(brown, tf, nu, ts, seed=5, replicates=100000)
dl = samp.values[tf.branch(3)] - samp.values[tf.branch(1)]
dr = samp.values[tf.branch(4)] - samp.values[tf.branch(1)]
corr = np.corrcoef(dl, dr)[0, 1]
print("sibling incr corr:", round(corr, 4), "3SE:", 3 / math.sqrt(100000))

# product moments (bi-Brownian)
pf = product_family(rect_family(1), rect_family(1))
bib = ker.ProductKernel((brown, brown))
psets = [pf.prod(pf.factors[0].rect(1.0), pf.factors[1].rect(2.0)),
         pf.prod(pf.factors[0].rect(2.0), pf.factors[1].rect(1.0))]
pfdd = smp.gaussian_fdd_moments(bib, pf, nu, psets)
print("bi labels:", pfdd.labels)
samp = smp.sample_fdd(bib, pf, nu, psets, seed=9, replicates=50000)
v = samp.values[psets[0]]
print("bi var comp:", v[:, 0].var(), v[:, 1].var(), "expect 1, 2")

# numbering invariance exact + stable
rep = smp.numbering_invariance_check(brown, fam, sets)
print("numbering exact:", rep.passed, rep.discrepancy)
sou = ker.OUKernel(1.5, 1.0, 1.0)
rep = smp.numbering_invariance_check(sou, fam, sets, trials=20, n=1500, seed=2)
print("numbering stable:", rep.passed, rep.details)

# grid
corners, draws = smp.sample_grid(brown, fam, nu, [[0.5, 1.0], [0.5, 1.0]], seed=4, replicates=50000)
print("grid corners:", [c.corner for c in corners])
emp = np.cov(draws[:, 1], draws[:, 2])[0, 1]
print("grid cov((0.5,1),(1,0.5)):", round(emp, 4), "expect", 0.25)
