"""Command-line interface: ``randifs {bounds,dimension,oracle,sample,cf-check}``.

Configuration is an INI file with the sections below; unknown sections or keys
are errors, and every problem is reported before anything runs.

``[system]``
    ``variant`` is one of ``two-map``, ``countable``, ``kahane-salem``, ``jump``, ``discs``, ``mixture``.

    * two-map: ``r1``, ``r2``, ``p``, ``q``
    * countable: ``rho``, ``p``, ``q``
    * kahane-salem: ``rho``, ``epsilon``, ``nu``, ``alpha``, ``lam``
    * jump: ``lam_lo``, ``lam_hi``, ``driver`` (identity|rotation), ``n_max``, ``lam``
    * discs: ``n_rings``, ``epsilon``, ``weights``, ``alpha``, ``lam``
    * mixture: ``atom``, ``atom_weight`` (synthetic atom plus Lebesgue on [0, 1])

    Weight vectors are written ``0.5, 0.5``, ``geometric 0.5`` or ``uniform 4``.
    ``lam`` fixes the parameter of interval-driven systems; otherwise it is
    drawn from the driver measure.
``[sampling]``  ``n``, ``depth``, ``seed``, ``n_orbits``, ``orbit_length``, ``parabolic_length``
``[dimension]`` ``n_basepoints``, ``r_min``, ``r_max``, ``n_levels``, ``tol_spread``, ``tol_mean``
``[oracle]``    ``depths``, ``n_pairs``, ``r_lo``, ``r_hi``
``[cf_check]``  ``ks_tol``
``[output]``    ``dir``, ``log_base`` (e|2)

Seeds: every random draw comes from ``SeedSequence(seed, spawn_key=(stream, chunk))``
with fixed stream ids and fixed chunk sizes, so CSVs do not depend on ``--threads``.

Exit codes: 0 pass, 1 fail verdict, 2 configuration error, 3 runtime guard.
"""
import argparse
import configparser
import csv
import logging
import math
import os
import platform
import shutil
import sys
import tempfile
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from .dimension import (ExactDimensionalityTest, atom_lebesgue_mixture, cylinder_ball_masses,
                        empirical_ball_mass)
from .exceptions import ConfigError, DomainError, EnumerationGuardError, EstimationError
from .kernel import sample_limit_set
from .measures import (dimension_formula, entropy_bounds, lyapunov_birkhoff,
                       lyapunov_closed_form)
from .rng import DEFAULT_CHUNK, STREAMS, stream_generator
from .systems import (ContinuedFractionConfig, DiscSystemConfig, KahaneSalemConfig,
                      build_system, cf_ball_overlap_count, cf_invariance_residual,
                      cf_overlap_count, certified_overlap_k, lyapunov_bounds_cf,
                      lyons_bound_audit, sample_parabolic)
from .systems.continued_fraction import PARABOLIC_LENGTH
from .weights import BernoulliWeights

log = logging.getLogger("randifs")

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_GUARD = 0, 1, 2, 3

VARIANT_KEYS = {
    "two-map": {"r1", "r2", "p", "q"},
    "countable": {"rho", "p", "q"},
    "kahane-salem": {"rho", "epsilon", "nu", "alpha", "lam"},
    "jump": {"lam_lo", "lam_hi", "driver", "n_max", "lam"},
    "discs": {"n_rings", "epsilon", "weights", "alpha", "lam"},
    "mixture": {"atom", "atom_weight"},
}

SECTIONS = {
    "system": {"variant"} | set().union(*VARIANT_KEYS.values()),
    "sampling": {"n", "depth", "seed", "n_orbits", "orbit_length", "parabolic_length"},
    "dimension": {"n_basepoints", "r_min", "r_max", "n_levels", "tol_spread", "tol_mean"},
    "oracle": {"depths", "n_pairs", "r_lo", "r_hi"},
    "cf_check": {"ks_tol"},
    "output": {"dir", "log_base"},
}

DEFAULTS = {
    "sampling": dict(n=100000, depth=None, seed=0, n_orbits=10000, orbit_length=100,
                     parabolic_length=PARABOLIC_LENGTH),
    "dimension": dict(n_basepoints=200, r_min=None, r_max=None, n_levels=11,
                      tol_spread=0.05, tol_mean=0.05),
    "oracle": dict(depths=None, n_pairs=100, r_lo=0.01, r_hi=0.5),
    "cf_check": dict(ks_tol=0.01),
    "output": dict(dir="out", log_base="e"),
}

COMMANDS = ("bounds", "dimension", "oracle", "sample", "cf-check")


# ------------------------------------------------------------------ config

def _floats(text):
    return tuple(float(v) for v in text.replace(",", " ").split())


def _ints(text):
    return tuple(int(v) for v in text.replace(",", " ").split())


def _opt_int(text):
    return None if text.strip().lower() in ("", "auto", "none") else int(text)


def _opt_float(text):
    return None if text.strip().lower() in ("", "auto", "none") else float(text)


def parse_weights(text, offset=1):
    """``"0.5, 0.5"``, ``"geometric 0.5"`` or ``"uniform 4"``."""
    parts = text.replace(",", " ").split()
    if not parts:
        raise ValueError("empty weight vector")
    head = parts[0].lower()
    if head == "geometric":
        return BernoulliWeights.geometric(float(parts[1]), offset=offset)
    if head == "uniform":
        return BernoulliWeights.uniform(int(parts[1]), offset=offset)
    return BernoulliWeights.explicit([float(v) for v in parts], offset=offset)


SYSTEM_PARSERS = {
    "r1": float, "r2": float, "epsilon": float, "alpha": float, "lam": float,
    "lam_lo": float, "lam_hi": float, "n_max": int, "n_rings": int, "driver": str.strip,
    "atom": float, "atom_weight": float, "rho": _floats,
}
SECTION_PARSERS = {
    "sampling": dict(n=int, depth=_opt_int, seed=int, n_orbits=int, orbit_length=int,
                     parabolic_length=int),
    "dimension": dict(n_basepoints=int, r_min=_opt_float, r_max=_opt_float, n_levels=int,
                      tol_spread=float, tol_mean=float),
    "oracle": dict(depths=_ints, n_pairs=int, r_lo=float, r_hi=float),
    "cf_check": dict(ks_tol=float),
    "output": dict(dir=str.strip, log_base=str.strip),
}


@dataclass
class RunConfig:
    variant: str
    system: dict
    sampling: dict
    dimension: dict
    oracle: dict
    cf_check: dict
    output: dict
    threads: int = 1
    source: str = ""

    @property
    def seed(self):
        return self.sampling["seed"]


def load_config(path=None, text=None, seed=None, threads=None, out=None, log_base=None):
    """Parse and validate a run configuration, collecting every error."""
    parser = configparser.ConfigParser(interpolation=None, default_section="__none__")
    parser.optionxform = str
    errors = []
    try:
        if text is not None:
            parser.read_string(text)
        else:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError([f"cannot read config: {exc}"])
    for sec in parser.sections():
        if sec not in SECTIONS:
            errors.append(f"unknown section [{sec}]")
            continue
        for key in parser[sec]:
            if key not in SECTIONS[sec]:
                errors.append(f"unknown key '{key}' in [{sec}]")
    if "system" not in parser or "variant" not in parser["system"]:
        errors.append("[system] variant is required")
        raise ConfigError(errors)
    raw = dict(parser["system"])
    variant = raw.pop("variant").strip()
    if variant not in VARIANT_KEYS:
        errors.append(f"unknown variant {variant!r}; choose from {sorted(VARIANT_KEYS)}")
        raise ConfigError(errors)
    system = {}
    n_before = len(errors)
    offset = 0 if variant == "discs" else 1
    for key, value in raw.items():
        if key not in SECTIONS["system"]:
            continue
        if key not in VARIANT_KEYS[variant]:
            errors.append(f"key '{key}' is not used by variant {variant}")
            continue
        try:
            if key in ("p", "q", "nu", "weights"):
                system[key] = parse_weights(value, offset)
            else:
                system[key] = SYSTEM_PARSERS[key](value)
        except (ValueError, IndexError, ConfigError) as exc:
            errors.append(f"[system] {key} = {value!r}: {exc}")
    system_ok = len(errors) == n_before
    sections = {}
    for sec, defaults in DEFAULTS.items():
        vals = dict(defaults)
        if sec in parser:
            for key, value in parser[sec].items():
                if key in SECTION_PARSERS[sec]:
                    try:
                        vals[key] = SECTION_PARSERS[sec][key](value)
                    except ValueError as exc:
                        errors.append(f"[{sec}] {key} = {value!r}: {exc}")
        sections[sec] = vals
    if seed is not None:
        sections["sampling"]["seed"] = seed
    if out is not None:
        sections["output"]["dir"] = out
    if log_base is not None:
        sections["output"]["log_base"] = log_base
    errors.extend(_check_sections(sections))
    if threads is not None and threads < 1:
        errors.append("--threads must be >= 1")
    run = RunConfig(variant, system, threads=threads or 1, source=str(path or "<string>"),
                    **sections)
    if system_ok:
        try:
            build_from_config(run)
        except ConfigError as exc:
            errors.extend(exc.errors)
        except (DomainError, ValueError, TypeError) as exc:
            errors.append(str(exc))
    if errors:
        raise ConfigError(errors)
    return run


def _check_sections(s):
    errors = []
    sp, dm, orc = s["sampling"], s["dimension"], s["oracle"]
    if not 0 <= sp["seed"] < 2 ** 64:
        errors.append("seed must be an unsigned 64-bit integer")
    if sp["n"] < 1:
        errors.append("[sampling] n must be >= 1")
    if sp["depth"] is not None and sp["depth"] < 1:
        errors.append("[sampling] depth must be >= 1")
    if sp["n_orbits"] < 2:
        errors.append("[sampling] n_orbits must be >= 2")
    if sp["orbit_length"] < 10:
        errors.append("[sampling] orbit_length must be >= 10")
    if sp["parabolic_length"] < 1:
        errors.append("[sampling] parabolic_length must be >= 1")
    if dm["n_basepoints"] < 2:
        errors.append("[dimension] n_basepoints must be >= 2")
    if dm["n_levels"] < 4:
        errors.append("[dimension] n_levels must be >= 4")
    if dm["r_min"] is not None and dm["r_max"] is not None and not 0 < dm["r_min"] < dm["r_max"]:
        errors.append("[dimension] need 0 < r_min < r_max")
    for key in ("tol_spread", "tol_mean"):
        if not dm[key] > 0:
            errors.append(f"[dimension] {key} must be positive")
    if orc["depths"] is not None and (not orc["depths"] or min(orc["depths"]) < 1):
        errors.append("[oracle] depths must be positive integers")
    if orc["n_pairs"] < 1:
        errors.append("[oracle] n_pairs must be >= 1")
    if not 0 < orc["r_lo"] <= orc["r_hi"]:
        errors.append("[oracle] need 0 < r_lo <= r_hi")
    if not s["cf_check"]["ks_tol"] > 0:
        errors.append("[cf_check] ks_tol must be positive")
    if s["output"]["log_base"] not in ("e", "2"):
        errors.append("[output] log_base must be 'e' or '2'")
    return errors


def build_from_config(run):
    """``(system, product measure, fixed parameter)``; all ``None`` for the mixture."""
    v, c = run.variant, run.system
    errors = []
    if v == "mixture":
        if not 0 < c.get("atom_weight", 0.5) < 1:
            errors.append("atom_weight must lie in (0, 1)")
        if errors:
            raise ConfigError(errors)
        return None, None, None
    if v in ("two-map", "countable", "kahane-salem"):
        cfg = KahaneSalemConfig(variant=v, r1=c.get("r1"), r2=c.get("r2"), rho=c.get("rho"),
                                p=c.get("p"), q=c.get("q", c.get("nu")),
                                epsilon=c.get("epsilon"), alpha=c.get("alpha"))
    elif v == "jump":
        lo = c.get("lam_lo", c.get("lam"))
        hi = c.get("lam_hi", lo)
        if lo is None:
            raise ConfigError(["jump needs lam_lo (and lam_hi) or lam"])
        cfg = ContinuedFractionConfig(lo, hi, c.get("driver", "identity"), c.get("n_max", 40))
        cfg.validate()
    else:
        cfg = DiscSystemConfig.default(c.get("n_rings", 3), c.get("epsilon", 0.1), c.get("weights"))
        if "alpha" in c:
            cfg = DiscSystemConfig(cfg.ring_radii, cfg.disc_radii, cfg.counts, cfg.epsilon,
                                   cfg.weights, c["alpha"])
    sys_, mu = build_system(cfg)
    lam = c.get("lam")
    if lam is not None and not sys_.driver.contains(np.atleast_1d(lam)):
        raise ConfigError([f"lam={lam} lies outside the parameter interval "
                           f"[{sys_.driver.lo}, {sys_.driver.hi}]"])
    return sys_, mu, lam


# ----------------------------------------------------------------- output

def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if v is None:
        return ""
    return str(v)


class ReportBundle:
    """Named CSV tables written atomically into the output directory."""

    def __init__(self, verdict=None):
        self.tables = {}
        self.verdict = verdict
        self.lines = []

    def add(self, name, header, rows):
        self.tables[name] = (list(header), [list(r) for r in rows])

    def add_record(self, name, record):
        self.add(name, ["key", "value"], list(record.items()))

    def say(self, text):
        self.lines.append(text)

    def write(self, out_dir):
        out_dir = os.path.abspath(out_dir)
        parent = os.path.dirname(out_dir)
        os.makedirs(parent, exist_ok=True)
        tmp = tempfile.mkdtemp(prefix=".randifs-", dir=parent)
        try:
            for name, (header, rows) in self.tables.items():
                with open(os.path.join(tmp, name), "w", encoding="utf-8", newline="") as fh:
                    w = csv.writer(fh, lineterminator="\n")
                    w.writerow(header)
                    w.writerows([[_fmt(v) for v in r] for r in rows])
            os.makedirs(out_dir, exist_ok=True)
            for name in self.tables:
                os.replace(os.path.join(tmp, name), os.path.join(out_dir, name))
        finally:
            shutil.rmtree(tmp, ignore_errors=True)


def _metadata(run, command):
    import scipy
    import sklearn
    return {
        "command": command,
        "variant": run.variant,
        "seed": run.seed,
        "seed_scheme": "SeedSequence(seed, spawn_key=(stream, chunk))",
        "streams": " ".join(f"{k}={v}" for k, v in STREAMS.items()),
        "chunk": DEFAULT_CHUNK,
        "randifs": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "sklearn": sklearn.__version__,
        "python": platform.python_version(),
        "log_base": run.output["log_base"],
    }


def _unit(run):
    return 1.0 if run.output["log_base"] == "e" else math.log(2.0)


# --------------------------------------------------------------- commands

def _sample(run, sys_, mu, lam):
    sp = run.sampling
    if sys_ is None:
        c = run.system
        return atom_lebesgue_mixture(sp["n"], c.get("atom", 0.5), c.get("atom_weight", 0.5),
                                     seed=run.seed)
    t = time.perf_counter()
    em = sample_limit_set(sys_, lam, mu.fiber, sp["n"], depth=sp["depth"], seed=run.seed,
                          threads=run.threads)
    log.info("sampled %d points in %.2fs", em.N, time.perf_counter() - t)
    return em


def _chi(run, sys_, mu, lam):
    sp = run.sampling
    t = time.perf_counter()
    est = lyapunov_birkhoff(sys_, mu, sp["n_orbits"], sp["orbit_length"], seed=run.seed,
                            lam=lam, threads=run.threads)
    log.info("Birkhoff exponent in %.2fs", time.perf_counter() - t)
    return est


def _bounds_rows(run, sys_, mu, lam):
    """Rows ``(quantity, value, note)`` of every closed-form bound for the system."""
    u = _unit(run)
    rows = []
    k = sys_.overlap_k()
    eb = entropy_bounds(mu, k)
    rows += [("h_driver", mu.base_entropy() / u, "driver entropy h(m)"),
             ("h_fiber", mu.fiber.entropy() / u, "fibre entropy h(nu)"),
             ("h_mu", eb.h_mu / u, "h(m) + h(nu), upper entropy bound"),
             ("overlap_k", k, "" if k is not None else "no bounded-overlap certificate"),
             ("entropy_lower", eb.lower / u if k else None, "h(mu) - log k"),
             ("entropy_lower_fiber", eb.fiber_lower / u if k else None, "h(nu) - log k")]
    if sys_.name == "jump":
        cfg = sys_.config
        pair = max(cf_overlap_count(cfg.lam_lo, n, cfg.n_max - 1) for n in range(cfg.n_max))
        rows += [("overlap_pairwise", pair, "other images meeting one image at lam_lo"),
                 ("overlap_ball", cf_ball_overlap_count(cfg.lam_lo, cfg.n_max),
                  "images meeting a common point at lam_lo"),
                 ("overlap_certified", certified_overlap_k(cfg.lam_lo), "k used for the bound")]
        chi_lo, _ = lyapunov_bounds_cf(cfg.lam_lo, cfg.n_max, sharp=True)
        _, chi_hi = lyapunov_bounds_cf(cfg.lam_hi, cfg.n_max)
        rows += [("chi_lower", chi_lo / u, "derivative sandwich at lam_lo"),
                 ("chi_upper", chi_hi / u, "derivative sandwich at lam_hi")]
        dim = dimension_formula(eb, chi_hi)
        rows += [("dim_lower", dim[0], "entropy_lower / chi_upper"),
                 ("dim_upper", eb.upper / chi_lo, "h_mu / chi_lower")]
        audit = lyons_bound_audit(cfg.lam_lo, cfg.lam_hi, k=3)
        for key, value in audit.items():
            scale = u if key.startswith(("chi", "entropy")) else 1.0
            rows.append(("audit_" + key, value / scale if not isinstance(value, bool) else value,
                         "reference bound, k = 3"))
        return rows, dim
    closed = lyapunov_closed_form(sys_, mu, lam=lam if sys_.driver.kind == "interval" else None)
    rows += [("chi_closed_form", closed.value / u, "closed-form Lyapunov exponent"),
             ("chi_truncation_index", closed.truncation_index, ""),
             ("chi_truncation_error", closed.truncation_error / u, "")]
    dim = dimension_formula(eb, closed)
    dim_f = dimension_formula(eb, closed, fiber_lower=True)
    rows += [("dim_lower", dim[0], "(h(mu) - log k) / chi"),
             ("dim_lower_fiber", dim_f[0], "(h(nu) - log k) / chi"),
             ("dim_upper", dim[1], "h(mu) / chi")]
    return rows, dim


def cmd_bounds(run):
    sys_, mu, lam = build_from_config(run)
    if sys_ is None:
        raise ConfigError(["variant mixture has no bounds; use dimension or sample"])
    rows, _ = _bounds_rows(run, sys_, mu, lam)
    rep = ReportBundle(verdict="PASS")
    rep.add("bounds.csv", ["quantity", "value", "note"], rows)
    rep.add_record("metadata.csv", _metadata(run, "bounds"))
    for q, v, note in rows:
        rep.say(f"{q} = {_fmt(v)}" + (f"  ({note})" if note else ""))
    if sys_.name == "jump":
        d = dict((q, v) for q, v, _ in rows)
        rep.say(f"lower-bound readings: with factor 10 {d['audit_dim_lower_with_factor_10']:.4g}, "
                f"without {d['audit_dim_lower_without_factor_10']:.4g}, claimed "
                f"{d['audit_claimed_lower']:.4g}; discrepancy = {_fmt(d['audit_discrepancy'])}")
    return rep


def cmd_dimension(run):
    sys_, mu, lam = build_from_config(run)
    em = _sample(run, sys_, mu, lam)
    dm = run.dimension
    u = _unit(run)
    summary = {"variant": run.variant, "n": em.N, "depth": em.depth,
               "error_bound": em.error_bound}
    interval, tol_mean = None, dm["tol_mean"]
    if sys_ is not None:
        chi = _chi(run, sys_, mu, lam)
        k = sys_.overlap_k()
        eb = entropy_bounds(mu, k)
        interval = dimension_formula(eb, chi, fiber_lower=True)
        tol_mean = dm["tol_mean"] + 3.0 * chi.std_error / chi.value
        summary.update({"h_mu": eb.h_mu / u, "overlap_k": k,
                        "entropy_lower": eb.lower / u if k else None,
                        "entropy_lower_fiber": eb.fiber_lower / u if k else None,
                        "entropy_upper": eb.upper / u, "chi": chi.value / u,
                        "chi_std_error": chi.std_error / u,
                        "dim_lower": interval[0], "dim_upper": interval[1]})
    t = time.perf_counter()
    test = ExactDimensionalityTest(dm["n_basepoints"], dm["r_min"], dm["r_max"], dm["n_levels"],
                                   error_bound=em.error_bound, interval=interval,
                                   tol_spread=dm["tol_spread"], tol_mean=tol_mean,
                                   random_state=run.seed).fit(em.points)
    log.info("local dimensions in %.2fs", time.perf_counter() - t)
    radii = test.grid_.radii
    q = em.q
    coord_names = ["x", "y"][:q]
    header = (["index", "sample_index"] + coord_names +
              ["slope", "r2_fit", "secant_min", "secant_max", "n_radii_used"] +
              [f"mass_{j}" for j in range(radii.size)])
    rows = []
    for i, (idx, e) in enumerate(zip(test.basepoint_index_, test.estimates_)):
        rows.append([i, int(idx)] + list(e.basepoint) +
                    [e.slope, e.r2_fit, e.secant_min, e.secant_max, e.n_used] + list(e.masses))
    summary.update({"n_basepoints": len(test.estimates_), "mean_slope": test.mean_,
                    "spread": test.spread_, "tol_spread": dm["tol_spread"],
                    "tol_mean": tol_mean, "verdict": test.report_.verdict})
    rep = ReportBundle(verdict=test.report_.verdict)
    rep.add("basepoints.csv", header, rows)
    rep.add("radii.csv", ["level", "radius", "log_radius", "mean_log_mass"],
            [[j, r, math.log(r), float(np.mean(np.log(np.maximum(
                [e.masses[j] for e in test.estimates_], np.finfo(float).tiny))))]
             for j, r in enumerate(radii)])
    rep.add_record("summary.csv", summary)
    rep.add_record("metadata.csv", _metadata(run, "dimension"))
    for key, value in summary.items():
        rep.say(f"{key} = {_fmt(value)}")
    return rep


def cmd_oracle(run):
    sys_, mu, lam = build_from_config(run)
    if sys_ is None or sys_.alphabet.countable:
        raise ConfigError(["oracle needs a finite-alphabet system (two-map or discs)"])
    em = _sample(run, sys_, mu, lam)
    lam_used = em.meta["lam"]
    orc = run.oracle
    depths = orc["depths"] or tuple(range(1, 13))
    rng = stream_generator(run.seed, "oracle")
    idx = rng.integers(0, em.N, size=orc["n_pairs"])
    xs = em.points[idx]
    rs = np.exp(rng.uniform(math.log(orc["r_lo"]), math.log(orc["r_hi"]), orc["n_pairs"]))
    emp = np.array([empirical_ball_mass(em, x, r) for x, r in zip(xs, rs)])
    p = np.clip(emp, 1.0 / em.N, 1.0 - 1.0 / em.N)
    sigma = np.sqrt(p * (1 - p) / em.N)
    rows, ok, widths = [], True, []
    for d in depths:
        t = time.perf_counter()
        sand = cylinder_ball_masses(sys_, lam_used, mu.fiber, d, xs, rs)
        log.info("depth %d oracle in %.2fs", d, time.perf_counter() - t)
        inside = (emp >= sand[:, 0] - 4 * sigma) & (emp <= sand[:, 1] + 4 * sigma)
        ok = ok and bool(inside.all())
        widths.append(float((sand[:, 1] - sand[:, 0]).max()))
        for i in range(len(rs)):
            rows.append([i, d] + list(xs[i]) + [rs[i], sand[i, 0], emp[i], sand[i, 1],
                                                sand[i, 1] - sand[i, 0], sigma[i], bool(inside[i])])
    coord_names = ["x", "y"][:em.q]
    rep = ReportBundle(verdict="PASS" if ok else "FAIL")
    rep.add("oracle.csv", ["pair", "depth"] + coord_names +
            ["r", "lower", "empirical", "upper", "width", "sigma", "within"], rows)
    rep.add("oracle_widths.csv", ["depth", "max_width"], list(zip(depths, widths)))
    rep.add_record("metadata.csv", _metadata(run, "oracle"))
    for d, w in zip(depths, widths):
        rep.say(f"depth {d}: max sandwich width {w:.6g}")
    rep.say(f"verdict = {rep.verdict}")
    return rep


def cmd_sample(run):
    sys_, mu, lam = build_from_config(run)
    em = _sample(run, sys_, mu, lam)
    rep = ReportBundle(verdict="PASS")
    rep.add("sample.csv", ["x", "y"][:em.q], em.points.tolist())
    meta = _metadata(run, "sample")
    meta.update({"n": em.N, "depth": em.depth, "error_bound": em.error_bound,
                 "parameter": em.parameter})
    rep.add_record("metadata.csv", meta)
    rep.say(f"{em.N} points, depth {em.depth}, error bound {em.error_bound:.3g}")
    return rep


def cmd_cf_check(run):
    if run.variant != "jump":
        raise ConfigError(["cf-check needs variant jump"])
    sys_, mu, lam = build_from_config(run)
    if lam is None:
        lam = sys_.config.lam_lo
        if sys_.config.lam_hi != lam:
            raise ConfigError(["cf-check needs a fixed lam (or lam_lo == lam_hi)"])
    sp = run.sampling
    t = time.perf_counter()
    em_p = sample_parabolic(lam, sp["n"], sp["parabolic_length"], seed=run.seed,
                            threads=run.threads)
    em_j = sample_limit_set(sys_, lam, mu.fiber, sp["n"], depth=sp["depth"], seed=run.seed,
                            threads=run.threads)
    ks = cf_invariance_residual(lam, em_p, em_j)
    log.info("cf-check in %.2fs", time.perf_counter() - t)
    tol = run.cf_check["ks_tol"]
    verdict = "PASS" if ks < tol else "FAIL"
    rep = ReportBundle(verdict=verdict)
    rep.add_record("cf_check.csv", {"lam": lam, "n": sp["n"], "ks_distance": ks, "ks_tol": tol,
                                    "parabolic_error_bound": em_p.error_bound,
                                    "jump_error_bound": em_j.error_bound, "verdict": verdict})
    rep.add_record("metadata.csv", _metadata(run, "cf-check"))
    rep.say(f"KS distance {ks:.6g} (tol {tol}) -> {verdict}")
    return rep


HANDLERS = {"bounds": cmd_bounds, "dimension": cmd_dimension, "oracle": cmd_oracle,
            "sample": cmd_sample, "cf-check": cmd_cf_check}


# -------------------------------------------------------------------- main

def build_parser():
    ap = argparse.ArgumentParser(prog="randifs", description=__doc__.split("\n")[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="INI run configuration")
    ap.add_argument("--seed", type=int, help="override [sampling] seed (unsigned 64-bit)")
    ap.add_argument("--threads", type=int, default=1, help="worker cap; outputs do not depend on it")
    ap.add_argument("--out", help="output directory (overrides [output] dir)")
    ap.add_argument("--log-base", choices=("e", "2"), help="display base for entropies and exponents")
    ap.add_argument("-v", "--verbose", action="store_true", help="log timings to stderr")
    return ap


def run_command(command, run):
    """Run one subcommand, write its CSVs and return the exit code."""
    try:
        rep = HANDLERS[command](run)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except EnumerationGuardError as exc:
        print(f"guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (DomainError, EstimationError) as exc:
        print(f"{command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_GUARD
    rep.write(run.output["dir"])
    for line in rep.lines:
        print(line)
    return EXIT_PASS if rep.verdict == "PASS" else EXIT_FAIL


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        run = load_config(args.config, seed=args.seed, threads=args.threads, out=args.out,
                          log_base=args.log_base)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    return run_command(args.command, run)


if __name__ == "__main__":
    sys.exit(main())
