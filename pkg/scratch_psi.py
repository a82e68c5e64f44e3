"""Scratch: validate frontier/psi design against brute-force identities."""
import itertools
import sys

sys.path.insert(0, "src")
import numpy as np

from setmarkov.families import rect_family, tree_family, product_family
from setmarkov import lattice as lat

rng = np.random.default_rng(0)

fails = {"psi": 0, "tele": 0, "delta": 0, "headid": 0}
checked = 0

for trial in range(4000):
    dim = int(rng.integers(1, 4))
    fam = rect_family(dim)
    apex = fam.rect(*(rng.uniform(0.5, 3.0, dim)))
    k = int(rng.integers(1, 5))
    parts = []
    for _ in range(k):
        frac = rng.uniform(0.05, 1.0, dim)
        parts.append(fam.rect(*(np.array(apex.corner) * frac)))
    # sometimes force exact ties in coordinates
    if rng.random() < 0.3 and dim >= 2 and len(parts) >= 2:
        c0 = list(parts[0].corner)
        c1 = list(parts[1].corner)
        c1[0] = c0[1] if dim >= 2 else c0[0]
        parts[1] = fam.rect(*c1)
    inc = lat.make_increment(fam, apex, parts)
    try:
        fr = lat.frontier(fam, inc)
    except Exception as e:
        fails["psi"] += 1
        print("frontier fail:", e, inc)
        continue
    checked += 1

    # value-level identity: Delta x_B via signs == subset-expansion
    vals = {}
    coeffs = lat.incl_excl_coefficients(fam, inc)
    for u in coeffs:
        vals[u] = rng.normal()
    lhs = sum(s * vals[u] for s, u in zip(fr.signs, fr.sets))
    rhs = 0.0
    for r in range(1, len(inc.parts) + 1):
        sgn = 1 if r % 2 == 1 else -1
        for sub in itertools.combinations(inc.parts, r):
            inter = sub[0]
            for s in sub[1:]:
                inter = fam.intersect(inter, s)
            rhs += sgn * vals[inter]
    if abs(lhs - rhs) > 1e-9:
        fails["delta"] += 1

    # head identity: x_{A_1} == sum_i sign_i * x_{A_1 cap Cp_i} for arbitrary vals
    head = fr.sets[0]
    head_vals = {}
    for u in fr.sets:
        w = fam.intersect(head, u)
        if w not in head_vals:
            head_vals[w] = rng.normal()
    lhs2 = head_vals[head]
    rhs2 = sum(s * head_vals[fam.intersect(head, u)]
               for s, u in zip(fr.signs, fr.sets))
    if abs(lhs2 - rhs2) > 1e-9:
        fails["headid"] += 1

    # telescoping: dX_C == (x_A - x_psi(A)) - sum_i sign_i (x_i - x_psi(i))
    xa = rng.normal()
    at = lambda i: xa if i == 0 else vals[fr.sets[i - 1]]
    dxc = xa - lhs
    tele = (at(0) - at(fr.psi[0])) - sum(
        s * (at(i + 1) - at(fr.psi[i + 1])) for i, s in enumerate(fr.signs))
    if abs(dxc - tele) > 1e-9:
        fails["tele"] += 1
        if fails["tele"] < 3:
            print("tele fail:", inc, fr.sets, fr.signs, fr.psi)

print("checked", checked, "fails", fails)

# tree + product smoke
tf = tree_family([0, 0, 0, 1, 1, 2, 2])
inc = lat.make_increment(tf, tf.branch(5), [tf.branch(2), tf.branch(0)])
fr = lat.frontier(tf, inc)
print("tree frontier:", fr.sets, fr.signs, fr.psi)

pf = product_family(rect_family(1), rect_family(1))
apex = pf.prod(pf.factors[0].rect(2.0), pf.factors[1].rect(2.0))
p1 = pf.prod(pf.factors[0].rect(2.0), pf.factors[1].rect(1.0))
p2 = pf.prod(pf.factors[0].rect(1.0), pf.factors[1].rect(2.0))
inc = lat.make_increment(pf, apex, [p1, p2])
fr = lat.frontier(pf, inc)
print("prod frontier:", [pf.label(s) for s in fr.sets], fr.signs, fr.psi)
