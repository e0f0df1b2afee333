"""Problem configuration files (TOML) and their translation into samples."""

import math
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import InvalidInputError
from .io import read_samples, read_table
from .pipeline import (
    MODES,
    SolverOptions,
    adapt_analytic_bc,
    adapt_partial_potential,
    adapt_two_spectra,
    adapt_variable_h,
    error_report,
    run_inverse,
    synth_samples,
)
from .potentials import catalog, catalog_names, tabulated

PLAN_KEYS = ("count", "offset", "step", "imag", "include_zero", "h_values", "per_spectrum",
             "indices", "a", "h_ref")
SOURCE_KEYS = {
    "weyl-samples": ("samples",),
    "two-spectra": ("lambdas", "nus"),
    "variable-h": ("pairs",),
    "partial-potential": ("pairs",),
    "analytic-bc": ("bc_table",),
    "synthetic": (),
}


@dataclass
class ProblemConfig:
    """One inverse problem: where the data comes from, solver knobs and output directory.

    ``inputs`` holds file paths keyed by ``samples``, ``lambdas``, ``nus``,
    ``pairs`` or ``bc_table`` plus ``h_ref``; ``partial`` holds ``a``,
    ``known`` (catalog name or ``x,q`` table) and ``known_h``;
    ``synthetic`` holds ``potential``, ``h``, ``H``, ``plan`` and the plan
    parameters.
    """

    mode: str
    inputs: dict = field(default_factory=dict)
    partial: dict = field(default_factory=dict)
    synthetic: dict = field(default_factory=dict)
    solver: SolverOptions = field(default_factory=SolverOptions)
    output_dir: str = "weylsl-out"

    def validate(self):
        if self.mode not in MODES:
            raise InvalidInputError(f"mode must be one of {', '.join(MODES)}")
        need = SOURCE_KEYS[self.mode]
        missing = [k for k in need if not self.inputs.get(k)]
        if missing:
            raise InvalidInputError(f"mode {self.mode} needs input {', '.join(missing)}")
        given = [k for keys in SOURCE_KEYS.values() for k in keys
                 if self.inputs.get(k) and k not in need]
        if given:
            raise InvalidInputError(f"inputs {', '.join(sorted(set(given)))} do not belong to mode {self.mode}")
        if self.mode == "synthetic":
            if self.synthetic.get("potential") not in catalog_names():
                raise InvalidInputError(f"synthetic.potential must be one of {catalog_names()}")
            if not self.synthetic.get("plan"):
                raise InvalidInputError("synthetic.plan is required")
        if self.mode == "partial-potential":
            a = self.partial.get("a")
            if a is None or not 0 < float(a) < math.pi:
                raise InvalidInputError("partial.a must lie in (0, pi)")
            if not self.partial.get("known"):
                raise InvalidInputError("partial.known is required")
        self.solver.validate()
        return self


def _solver_from(table):
    known = {f.name for f in fields(SolverOptions)}
    unknown = set(table) - known
    if unknown:
        raise InvalidInputError(f"unknown solver keys: {', '.join(sorted(unknown))}")
    values = {k: (None if v in (0, "auto") and k in ("n_unknown_h", "K") else v) for k, v in table.items()}
    return SolverOptions(**values)


def load_config(path):
    """Read a TOML problem file; relative input paths are resolved against its directory."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise InvalidInputError(f"cannot read config {path}: {exc}") from None
    base = path.parent
    inputs = dict(raw.get("input", {}))
    for key in ("samples", "lambdas", "nus", "pairs", "bc_table"):
        if inputs.get(key):
            inputs[key] = str(base / inputs[key])
    partial = dict(raw.get("partial", {}))
    known = partial.get("known")
    if known and known not in catalog_names():
        partial["known"] = str(base / known)
    out = raw.get("output", {}).get("dir", "weylsl-out")
    cfg = ProblemConfig(
        mode=raw.get("mode", ""),
        inputs=inputs,
        partial=partial,
        synthetic=dict(raw.get("synthetic", {})),
        solver=_solver_from(raw.get("solver", {})),
        output_dir=str(base / out),
    )
    return cfg.validate()


def _column(path, name):
    header, data = read_table(path)
    if name not in header:
        raise InvalidInputError(f"{path}: missing column {name!r}")
    return data[:, header.index(name)]


def _known_potential(partial):
    known = partial["known"]
    h = float(partial.get("known_h", 0.0))
    if known in catalog_names():
        return catalog(known, h=h)
    x = _column(known, "x")
    q = _column(known, "q")
    return tabulated(x, q, h=h, label=Path(known).stem)


def synthetic_plan(section):
    plan = {"kind": section["plan"]}
    plan.update({k: section[k] for k in PLAN_KEYS if k in section})
    return plan


def build_samples(cfg):
    """Samples, optional rescale record and (synthetic mode only) the truth and spec."""
    ins = cfg.inputs
    h_ref = float(ins.get("h_ref", 0.0))
    if cfg.mode == "weyl-samples":
        return read_samples(ins["samples"]), None, None
    if cfg.mode == "two-spectra":
        return adapt_two_spectra(_column(ins["lambdas"], "lambda"), _column(ins["nus"], "lambda")), None, None
    if cfg.mode == "variable-h":
        pairs = zip(_column(ins["pairs"], "lambda"), _column(ins["pairs"], "h"))
        return adapt_variable_h(list(pairs), h_ref), None, None
    if cfg.mode == "analytic-bc":
        lam = _column(ins["bc_table"], "lambda")
        f1 = dict(zip(lam, _column(ins["bc_table"], "f1")))
        f2 = dict(zip(lam, _column(ins["bc_table"], "f2")))
        return adapt_analytic_bc(f1.__getitem__, f2.__getitem__, lam, h_ref), None, None
    if cfg.mode == "partial-potential":
        pairs = list(zip(_column(ins["pairs"], "lambda"), _column(ins["pairs"], "h")))
        samples, rec = adapt_partial_potential(_known_potential(cfg.partial), float(cfg.partial["a"]),
                                               pairs, h_ref)
        return samples, rec, None
    spec = catalog(cfg.synthetic["potential"], cfg.synthetic.get("h"), cfg.synthetic.get("H"))
    samples, rec, truth = synth_samples(spec, synthetic_plan(cfg.synthetic))
    return samples, rec, (spec, truth)


def solve_config(cfg):
    """Run the configured problem; returns ``(samples, result, error report or None)``."""
    samples, rec, synth = build_samples(cfg)
    result = run_inverse(samples, cfg.solver, rescale=rec)
    report = error_report(synth[0], result, synth[1]) if synth else None
    return samples, result, report


def default_config_text():
    """Commented template listing every knob."""
    return """\
# mode: weyl-samples | two-spectra | variable-h | partial-potential | analytic-bc | synthetic
mode = "weyl-samples"

[input]
samples = "samples.csv"      # Re_z,Im_z,Re_M,Im_M,is_infinite (weyl-samples)
# lambdas = "lambdas.csv"    # column 'lambda' (two-spectra: Robin spectrum)
# nus = "nus.csv"            # column 'lambda' (two-spectra: Dirichlet-left spectrum)
# pairs = "pairs.csv"        # columns 'lambda','h' (variable-h, partial-potential)
# bc_table = "bc.csv"        # columns 'lambda','f1','f2' (analytic-bc)
h_ref = 0.0

[partial]
# a = 1.5707963267948966
# known = "q5"               # catalog name or table with columns 'x','q'
# known_h = 1.0

[synthetic]
# potential = "q1"
# h = 1.0
# H = 2.0
# plan = "two-spectra"       # two-spectra | variable-h | points | partial
# count = 16

[solver]
n_unknown_h = "auto"
cond_limit = 1e5
fail_cond = 1e6
K = "auto"
N = 8
grid_points = 100
spline_degree = 7

[output]
dir = "weylsl-out"
"""
