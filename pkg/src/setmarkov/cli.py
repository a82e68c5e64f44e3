"""Config-driven command line front end.

Commands take a JSON configuration file describing the index family, the
kernel, the initial law and command-specific geometry.  Sampling commands
write CSV (one row per replicate, one column per set label); verification
commands write JSON reports.  Exit codes: 0 all checks passed, 2 a check
failed, 1 configuration or runtime error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import kernels as kernels_mod
from . import sampler as sampler_mod
from . import verify as verify_mod
from .errors import (CapacityError, ConfigError, ConsistencyError,
                     FamilyError, HistoryError, KernelError)
from .families import (MeasureSpec, product_family, rect_family, tree_family)
from .lattice import make_increment, semilattice_closure
from .reports import CheckReport

SCHEMA_VERSION = 1


# ---------------------------------------------------------------------------
# Config parsing
# ---------------------------------------------------------------------------

def _need(cfg, key, kind=None):
    if key not in cfg:
        raise ConfigError("missing config field %r" % key)
    value = cfg[key]
    if kind is not None and not isinstance(value, kind):
        raise ConfigError("config field %r has wrong type" % key)
    return value


def build_measure(cfg):
    if cfg is None:
        return None
    kind = _need(cfg, "kind", str)
    if kind == "lebesgue":
        return MeasureSpec("lebesgue")
    if kind in ("weighted", "additive"):
        weights = tuple(float(w) for w in _need(cfg, "weights", list))
        return MeasureSpec(kind, weights)
    if kind == "depth":
        return MeasureSpec("depth", None, float(cfg.get("root_mass", 0.0)))
    raise ConfigError("unknown measure kind %r" % kind)


def build_family(cfg):
    kind = _need(cfg, "kind", str)
    measure = build_measure(cfg.get("measure"))
    if kind == "rect":
        return rect_family(int(_need(cfg, "dim")), measure)
    if kind == "tree":
        return tree_family(_need(cfg, "parents", list),
                           int(cfg.get("root", 0)), measure)
    if kind == "product":
        factors = [build_family(f) for f in _need(cfg, "factors", list)]
        return product_family(factors, measure=measure)
    raise ConfigError("unknown family kind %r" % kind)


def build_marginal(cfg):
    kind = _need(cfg, "kind", str)
    if kind == "gaussian":
        return kernels_mod.GaussianMarginal(float(cfg.get("rate", 1.0)))
    if kind == "poisson":
        return kernels_mod.PoissonMarginal(float(cfg.get("rate", 1.0)))
    if kind == "stable":
        return kernels_mod.StableMarginal(float(_need(cfg, "alpha")),
                                          float(cfg.get("rate", 1.0)))
    raise ConfigError("unknown marginal kind %r" % kind)


def build_kernel(cfg):
    kind = _need(cfg, "kind", str)
    if kind == "dirac":
        return kernels_mod.DiracKernel()
    if kind == "levy":
        return kernels_mod.LevyKernel(build_marginal(_need(cfg, "marginal",
                                                           dict)))
    if kind == "ou":
        return kernels_mod.OUKernel(float(_need(cfg, "alpha")),
                                    float(_need(cfg, "lam")),
                                    float(_need(cfg, "sigma")))
    if kind == "product":
        return kernels_mod.ProductKernel(tuple(
            build_kernel(c) for c in _need(cfg, "components", list)))
    if kind == "additive":
        comps = []
        for c in _need(cfg, "components", list):
            comps.append(build_marginal(c.get("marginal", c)))
        return kernels_mod.AdditiveLevyKernel(tuple(comps))
    raise ConfigError("unknown kernel kind %r" % kind)


def build_initial_law(cfg):
    if cfg is None:
        return sampler_mod.PointMassLaw(0.0)
    kind = _need(cfg, "kind", str)
    if kind == "point":
        return sampler_mod.PointMassLaw(float(cfg.get("value", 0.0)))
    if kind == "gaussian":
        return sampler_mod.GaussianLaw(float(cfg.get("mean", 0.0)),
                                       float(cfg.get("var", 1.0)))
    raise ConfigError("unknown initial law kind %r" % kind)


def parse_set(family, obj):
    if family.kind == "rect":
        if not isinstance(obj, list):
            raise ConfigError("rect sets are corner lists, got %r" % (obj,))
        return family.rect(*[float(v) for v in obj])
    if family.kind == "tree":
        return family.branch(int(obj))
    if family.kind == "product":
        if not isinstance(obj, list) or len(obj) != family.arity:
            raise ConfigError("product sets need %d factor entries"
                              % family.arity)
        return family.prod(tuple(parse_set(f, o)
                                 for f, o in zip(family.factors, obj)))
    raise ConfigError("unknown family kind %r" % family.kind)


def parse_sets(family, objs):
    return [parse_set(family, o) for o in objs]


class Run:
    """Validated configuration bundle for one command invocation."""

    def __init__(self, cfg, args):
        if not isinstance(cfg, dict):
            raise ConfigError("config root must be an object")
        version = _need(cfg, "version")
        if version != SCHEMA_VERSION:
            raise ConfigError("unsupported config version %r" % (version,))
        self.cfg = cfg
        self.family = build_family(_need(cfg, "family", dict))
        self.kernel = build_kernel(_need(cfg, "kernel", dict))
        self.nu = build_initial_law(cfg.get("initial_law"))
        self.seed = args.seed if args.seed is not None else cfg.get("seed")
        self.replicates = (args.replicates if args.replicates is not None
                           else int(cfg.get("replicates", 1)))
        self.tolerance = float(cfg.get("tolerance", 1e-8))

    def need_seed(self):
        if self.seed is None:
            raise ConfigError("a seed is mandatory for sampling commands")
        return int(self.seed)

    def sets(self, key="sets"):
        return parse_sets(self.family, _need(self.cfg, key, list))

    def one_set(self, key):
        return parse_set(self.family, _need(self.cfg, key))

    def increment(self):
        inc_cfg = _need(self.cfg, "increment", dict)
        apex = parse_set(self.family, _need(inc_cfg, "apex"))
        parts = parse_sets(self.family, _need(inc_cfg, "parts", list))
        return make_increment(self.family, apex, parts)

    def conditioning_values(self, sets, seed_offset=1):
        """One consistent draw of the process used as conditioning data."""
        seed = self.need_seed() + seed_offset
        sample = sampler_mod.sample_fdd(self.kernel, self.family, self.nu,
                                        sets, seed, 1)
        return {s: float(np.asarray(v)[0])
                for s, v in sample.values.items()}


# ---------------------------------------------------------------------------
# Output plumbing
# ---------------------------------------------------------------------------

def _column_labels(run, sets, dim):
    labels = []
    for s in sets:
        base = run.family.label(s)
        if dim == 1:
            labels.append(base)
        else:
            labels.extend("%s:%d" % (base, l) for l in range(dim))
    return labels


def csv_payload(header, matrix):
    lines = [",".join(header)]
    for row in matrix:
        lines.append(",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def json_payload(reports):
    body = {"version": SCHEMA_VERSION,
            "reports": [r.to_dict() for r in reports]}
    return json.dumps(body, sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------------------
# Command handlers: each returns (text payload, all passed flag)
# ---------------------------------------------------------------------------

def cmd_sample_fdd(run, args):
    sets = run.sets()
    sample = sampler_mod.sample_fdd(run.kernel, run.family, run.nu, sets,
                                    run.need_seed(), run.replicates)
    dim = kernels_mod.state_dim(run.kernel)
    ordered = sample.semilattice.sets
    labels = _column_labels(run, ordered, dim)
    columns = []
    for s in ordered:
        v = sample.values[s]
        if dim == 1:
            columns.append(np.asarray(v))
        else:
            columns.extend(np.asarray(v)[:, l] for l in range(dim))
    matrix = np.stack(columns, axis=1)
    if args.json:
        body = {"version": SCHEMA_VERSION, "labels": labels,
                "rows": matrix.tolist()}
        return json.dumps(body, sort_keys=True, indent=2) + "\n", True
    return csv_payload(labels, matrix), True


def cmd_sample_grid(run, args):
    grid = _need(run.cfg, "grid", dict)
    axes = _need(grid, "axes", list)
    corners, draws = sampler_mod.sample_grid(run.kernel, run.family, run.nu,
                                             axes, run.need_seed(),
                                             run.replicates)
    labels = [run.family.label(c) for c in corners]
    if args.json:
        body = {"version": SCHEMA_VERSION, "labels": labels,
                "rows": draws.tolist()}
        return json.dumps(body, sort_keys=True, indent=2) + "\n", True
    return csv_payload(labels, draws), True


def cmd_moments(run, args):
    sets = run.sets()
    fdd = sampler_mod.gaussian_fdd_moments(run.kernel, run.family, run.nu,
                                           sets)
    labels = [str(l) if not hasattr(l, "corner") else run.family.label(l)
              for l in fdd.labels]
    body = {"version": SCHEMA_VERSION, "labels": labels,
            "mean": fdd.mean.tolist(), "cov": fdd.cov.tolist()}
    return json.dumps(body, sort_keys=True, indent=2) + "\n", True


def cmd_verify_ck(run, args):
    inc = run.increment()
    splits = parse_sets(run.family, _need(run.cfg, "splits", list))
    n = int(run.cfg.get("n", 20000))
    needed = [inc.apex, *inc.parts, *splits]
    scalar = kernels_mod.state_dim(run.kernel) == 1
    values = run.conditioning_values(
        list(semilattice_closure(run.family, needed).sets)) if scalar else None
    reports = []
    for idx, cut in enumerate(splits):
        if scalar:
            rep = kernels_mod.ck_residual(run.kernel, run.family, inc, cut,
                                          values, n=n,
                                          seed=run.need_seed() + idx)
            exact = rep.exact_gap is not None
            disc = rep.exact_gap if exact else max(
                (abs(r.diff) / r.se if r.se > 0 else 0.0) for r in rep.rows)
            details = {"rows": [r.__dict__ for r in rep.rows]}
            reports.append(CheckReport("chapman_kolmogorov", exact,
                                       float(disc),
                                       1e-10 if exact else 3.0,
                                       rep.passed(), n, run.seed, details))
        else:
            gap = kernels_mod.compose_exact(run.kernel, run.family, inc, cut)
            reports.append(CheckReport("chapman_kolmogorov", True, float(gap),
                                       1e-10, gap <= 1e-10, 0, run.seed))
    return json_payload(reports), all(r.passed for r in reports)


def cmd_verify_cmarkov(run, args):
    inc = run.increment()
    extras = parse_sets(run.family, run.cfg.get("extras", []))
    rep = verify_mod.cmarkov_conditional_check(run.kernel, run.family, inc,
                                               extras, run.nu, run.tolerance)
    return json_payload([rep]), rep.passed


def cmd_verify_sharp(run, args):
    rep = verify_mod.sharp_markov_check(
        run.kernel, run.family,
        parse_sets(run.family, _need(run.cfg, "b_parts", list)),
        parse_sets(run.family, _need(run.cfg, "inside", list)),
        parse_sets(run.family, _need(run.cfg, "outside", list)),
        run.nu, run.tolerance)
    return json_payload([rep]), rep.passed


def cmd_verify_commute(run, args):
    y_sets = parse_sets(run.family, _need(run.cfg, "y_sets", list))
    y_coeffs = run.cfg.get("y_coeffs")
    rep = verify_mod.commuting_filtration_check(
        run.kernel, run.family, run.one_set("u"), run.one_set("v"),
        y_sets, y_coeffs, run.nu, run.tolerance)
    return json_payload([rep]), rep.passed


def cmd_verify_flow(run, args):
    flow = _need(run.cfg, "flow", list)
    rep = verify_mod.flow_projection_check(
        run.kernel, run.family, flow, run.nu, run.tolerance,
        n=int(run.cfg.get("n", 50000)),
        seed=run.seed if run.seed is not None else 0)
    return json_payload([rep]), rep.passed


def cmd_verify_shift(run, args):
    rep = verify_mod.simple_markov_shift_check(
        run.kernel, run.family, run.one_set("u"), run.sets(), run.nu,
        run.tolerance, n=int(run.cfg.get("n", 50000)),
        seed=run.seed if run.seed is not None else 0)
    return json_payload([rep]), rep.passed


def cmd_verify_star(run, args):
    star = _need(run.cfg, "star", dict)
    reports = []
    if "cases" in star:
        rng = np.random.default_rng(run.seed if run.seed is not None else 0)
        for _ in range(int(star["cases"])):
            s, t, h, k = rng.uniform(0.1, 2.0, 4)
            reports.append(verify_mod.star_markov_correspondence(
                run.family, s, t, h, k))
    else:
        reports.append(verify_mod.star_markov_correspondence(
            run.family, float(_need(star, "s")), float(_need(star, "t")),
            float(_need(star, "h")), float(_need(star, "k"))))
    return json_payload(reports), all(r.passed for r in reports)


def cmd_feller(run, args):
    cfg = run.cfg.get("feller", {})
    rhos = cfg.get("rhos", [2.0 ** -k for k in range(1, 9)])
    f = lambda x: np.exp(-x ** 2)
    profile = kernels_mod.feller_profile(
        run.kernel, run.family, f, rhos=[float(r) for r in rhos],
        bound=float(cfg.get("bound", 2.0)),
        n_pairs=int(cfg.get("pairs", 40)),
        seed=run.seed if run.seed is not None else 0)
    slack = float(cfg.get("slack", 1.10))
    monotone = all(b <= a * slack
                   for (_, a), (_, b) in zip(profile, profile[1:]))
    rep = CheckReport("feller_modulus", False,
                      float(profile[-1][1]), float(profile[0][1]) + 1e-12,
                      monotone, int(cfg.get("pairs", 40)), run.seed,
                      {"profile": [[r, m] for r, m in profile]})
    return json_payload([rep]), rep.passed


COMMANDS = {
    "sample-fdd": cmd_sample_fdd,
    "sample-grid": cmd_sample_grid,
    "moments": cmd_moments,
    "verify-ck": cmd_verify_ck,
    "verify-cmarkov": cmd_verify_cmarkov,
    "verify-sharp": cmd_verify_sharp,
    "verify-commute": cmd_verify_commute,
    "verify-flow": cmd_verify_flow,
    "verify-shift": cmd_verify_shift,
    "verify-star": cmd_verify_star,
    "feller": cmd_feller,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="setmarkov",
        description="Sampling and verification for set-indexed Markov kernels")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True,
                        help="path to the JSON run configuration")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    parser.add_argument("--out", default=None,
                        help="output file (default stdout)")
    parser.add_argument("--replicates", type=int, default=None,
                        help="override the config replicate count")
    parser.add_argument("--json", action="store_true",
                        help="emit JSON instead of CSV for sample commands")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print("error: cannot read config: %s" % exc, file=sys.stderr)
        return 1
    try:
        run = Run(cfg, args)
        payload, passed = COMMANDS[args.command](run, args)
    except (ConfigError, FamilyError, KernelError, CapacityError,
            ConsistencyError, HistoryError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)
    return 0 if passed else 2


if __name__ == "__main__":
    sys.exit(main())
