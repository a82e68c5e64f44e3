import sys
sys.path.insert(0, "src")
import math
import numpy as np

from setmarkov.families import rect_family, product_family, additive_measure
from setmarkov import lattice as lat
from setmarkov import kernels as ker
from setmarkov import sampler as smp
from setmarkov import verify as ver

fam = rect_family(2)
brown = ker.LevyKernel(ker.GaussianMarginal(1.0))
ou = ker.OUKernel(2.0, 0.8, 1.2)

# cmarkov: staircase with extra deep inside B
apex = fam.rect(2, 2)
inc = lat.make_increment(fam, apex, [fam.rect(2, 1), fam.rect(1, 2)])
extras = [fam.rect(0.5, 0.5), fam.rect(1.7, 0.3)]
for spec in (brown, ou):
    rep = ver.cmarkov_conditional_check(spec, fam, inc, extras)
    print("cmarkov", spec.kind, rep.passed, rep.discrepancy)

# product (bi-Brownian)
pf = product_family(rect_family(1), rect_family(1))
bib = ker.ProductKernel((brown, brown))
papex = pf.prod(pf.factors[0].rect(2.0), pf.factors[1].rect(2.0))
pinc = lat.make_increment(pf, papex, [
    pf.prod(pf.factors[0].rect(1.0), pf.factors[1].rect(2.0)),
    pf.prod(pf.factors[0].rect(2.0), pf.factors[1].rect(1.0))])
pextras = [pf.prod(pf.factors[0].rect(0.5), pf.factors[1].rect(0.5))]
rep = ver.cmarkov_conditional_check(bib, pf, pinc, pextras)
print("cmarkov product", rep.passed, rep.discrepancy)

# star
rep = ver.star_markov_correspondence(fam, 1.0, 1.0, 1.0, 1.0)
print("star:", rep.passed, rep.details)
rep = ver.star_markov_correspondence(fam, 1.0, 1.0, 0.0, 1.0)
print("star degenerate:", rep.passed, rep.details)

# sharp
rep = ver.sharp_markov_check(
    brown, fam,
    [fam.rect(2, 1), fam.rect(1, 2)],
    [fam.rect(0.5, 0.5), fam.rect(1, 1)],
    [fam.rect(3, 3), fam.rect(0.2, 2.5)])
print("sharp:", rep.passed, rep.discrepancy, rep.details["boundary"])

# commute
rep = ver.commuting_filtration_check(brown, fam, fam.rect(2, 1), fam.rect(1, 2),
                                     [fam.rect(2, 2)])
print("commute:", rep.passed, rep.discrepancy)
rep = ver.commuting_filtration_check(ou, fam, fam.rect(2, 1), fam.rect(1.5, 2),
                                     [fam.rect(2.2, 2.2), fam.rect(0.7, 1.1)],
                                     [1.0, -0.5])
print("commute ou:", rep.passed, rep.discrepancy)

# flow gaussian
rep = ver.flow_projection_check(brown, fam, [(0.5, 0.5), (1.0, 1.0), (2.0, 2.0)])
print("flow brown:", rep.passed, rep.discrepancy)
# flow stable
sou = ker.OUKernel(1.6, 1.0, 1.0)
rep = ver.flow_projection_check(sou, fam, [(0.5, 0.5), (1.0, 1.0), (1.5, 1.5), (2.0, 2.0)],
                                n=60000, seed=11)
print("flow stable:", rep.passed, rep.discrepancy)

# shift checks: homogeneous = rect{1} Lebesgue
fam1 = rect_family(1)
rep = ver.simple_markov_shift_check(brown, fam1, fam1.rect(1.0),
                                    [fam1.rect(1.0), fam1.rect(2.0)])
print("shift brown rect1:", rep.passed, rep.discrepancy)
rep = ver.simple_markov_shift_check(ou, fam1, fam1.rect(1.0),
                                    [fam1.rect(0.5), fam1.rect(1.5)])
print("shift ou rect1:", rep.passed, rep.discrepancy)

# additive measure rect{2}: homogeneous for Levy and OU
fam2a = rect_family(2, additive_measure([1.0, 1.0]))
rep = ver.simple_markov_shift_check(
    ker.LevyKernel(ker.GaussianMarginal(1.0)), fam2a, fam2a.rect(1.0, 1.0),
    [fam2a.rect(1.0, 1.0), fam2a.rect(2.0, 0.5)])
print("shift brown additive rect2:", rep.passed, rep.discrepancy)

ou_add = ker.OUKernel(2.0, 0.5, 1.0)
rep = ver.simple_markov_shift_check(ou_add, fam2a, fam2a.rect(1.0, 0.0),
                                    [fam2a.rect(1.0, 1.0), fam2a.rect(0.5, 2.0)])
print("shift ou additive rect2:", rep.passed, rep.discrepancy)

# inhomogeneous: plain Lebesgue rect{2}
try:
    ver.simple_markov_shift_check(brown, fam, fam.rect(1.0, 1.0),
                                  [fam.rect(1.0, 1.0)])
    print("shift lebesgue rect2: NO ERROR (bad)")
except ker.KernelError as e:
    print("shift lebesgue rect2 correctly rejected:", e)

# stable shift (rect{1})
sou1 = ker.OUKernel(1.5, 1.0, 1.0)
rep = ver.simple_markov_shift_check(sou1, fam1, fam1.rect(0.7),
                                    [fam1.rect(0.6), fam1.rect(1.2)],
                                    n=40000, seed=3)
print("shift stable:", rep.passed, rep.discrepancy)

# homogeneity gap negative control: weighted lebesgue rect{2}, non-axis shift
from setmarkov.families import weighted_lebesgue
famw = rect_family(2, weighted_lebesgue([1.0, 2.0]))
incw = lat.make_increment(famw, famw.rect(2, 2), [famw.rect(1, 1)])
gap = ker.homogeneity_gap(ker.LevyKernel(ker.GaussianMarginal(1.0)), famw,
                          incw, famw.rect(0.3, 0.7))
print("negative control gap:", gap.gap, "passed:", gap.passed)
