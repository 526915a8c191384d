"""Command-line front end: ``gausscap {capacity,cinfo,perturb,verify}``.

Every list-valued flag takes comma-separated values and the rows are the
Cartesian product of the lists in the order the columns appear. Output is CSV
(default) or JSON lines; numbers carry 12 significant digits and switch to
scientific notation below 1e-4.

Columns
-------
capacity  eta, n_noise, capacity_bits, error
cinfo     eta, n_noise, energy, x, ic_bits, dic_dx_bits, error
perturb   spec, n_mean, eta, n_noise, d_s_out_nats, d_s_joint_nats, d_ic_nats, sign, condition, error
verify    suite, check, max_dev, tol, status

Exit status: 0 success, 1 domain/config error, 2 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .channel import ChannelParams, joint_output_cov
from .coherent import (
    capacity_conjecture,
    dIc_dx,
    gaussian_coherent_info,
    joint_spectrum,
    thermal_coherent_info,
)
from .errors import GausscapError
from .gaussian import GaussianInputParams, symplectic_eigenvalues
from .perturbation import (
    PerturbationSpec,
    coherent_info_shift,
    input_entropy_shift,
    joint_entropy_shift,
    moment_trace,
    output_entropy_shift,
)

COLUMNS = {
    "capacity": ["eta", "n_noise", "capacity_bits", "error"],
    "cinfo": ["eta", "n_noise", "energy", "x", "ic_bits", "dic_dx_bits", "error"],
    "perturb": ["spec", "n_mean", "eta", "n_noise", "d_s_out_nats", "d_s_joint_nats", "d_ic_nats", "sign",
                "condition", "error"],
    "verify": ["suite", "check", "max_dev", "tol", "status"],
}

SUITES = ("gaussian", "lemma", "perturbation", "all")

# keys accepted in --config files, mapped to argparse destinations
_CONFIG_KEYS = {"eta", "n_noise", "n_mean", "energy", "x", "spec", "epsilon", "cutoff", "format", "out"}

# cross-column check: I_c at x = 1 must equal the thermal-path value
_X1_TOL = 1e-9


class ConfigError(GausscapError):
    """Malformed command line or configuration file."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(f"{self.prog}: {message}")


def fmt_number(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if v == 0.0:
        return "0"
    # 'g' already switches to exponent form below 1e-4
    return format(v, ".12g")


def _json_value(v):
    if v is None or isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    text = fmt_number(v)
    return text if text in ("inf", "-inf", "nan") else json.loads(text)


def write_table(rows: Iterable[dict], columns: Sequence[str], fmt: str, stream) -> None:
    if fmt == "csv":
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([v if isinstance(v, str) else fmt_number(v) for v in (row.get(c) for c in columns)])
    elif fmt == "jsonl":
        for row in rows:
            stream.write(json.dumps({c: _json_value(row.get(c)) for c in columns}) + "\n")
    else:
        raise ConfigError(f"unknown format {fmt!r}")


def _threads() -> int:
    raw = os.environ.get("GAUSSCAP_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"GAUSSCAP_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError("GAUSSCAP_THREADS must be >= 1")
    return n


def _ordered_map(fn: Callable, items: list) -> list:
    """Evaluate rows (possibly in parallel) and return them in input order."""
    n = min(_threads(), max(len(items), 1))
    if n == 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _guard(fn):
    """Turn library domain errors into a row-level ``error`` cell."""

    def wrapped(item):
        try:
            return fn(item)
        except (GausscapError, ValueError, ArithmeticError) as exc:
            row = dict(_base_row(item))
            row["error"] = f"{type(exc).__name__}: {exc}"
            return row

    return wrapped


def _base_row(item) -> dict:
    return item[1] if isinstance(item, tuple) and len(item) == 2 and isinstance(item[1], dict) else {}


# ---------------------------------------------------------------------------
# configuration


def _float_list(text) -> list[float]:
    if isinstance(text, list):
        return text
    try:
        return [float(t) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from None


def read_config(path: str) -> dict:
    """Plain ``key = value`` file; ``#`` starts a comment; ``spec`` may repeat."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    out: dict = {}
    for no, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{no}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"{path}:{no}: unknown key {key!r}")
        if key == "spec":
            out.setdefault("spec", []).append(value)
        else:
            out[key] = value
    return out


@dataclass
class SweepConfig:
    eta: list = field(default_factory=lambda: [0.8])
    n_noise: list = field(default_factory=lambda: [0.0])
    n_mean: list = field(default_factory=lambda: [1.0])
    energy: list = field(default_factory=lambda: [10.0])
    x: list = field(default_factory=lambda: [1.0])
    spec: list = field(default_factory=lambda: ["1:1:1"])
    epsilon: float = 0.01
    cutoff: int = 40
    format: str = "csv"
    out: str | None = None

    def __post_init__(self):
        for name in ("eta", "n_noise", "n_mean", "energy", "x"):
            setattr(self, name, _float_list(getattr(self, name)))
        try:
            self.epsilon = float(self.epsilon)
            self.cutoff = int(self.cutoff)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.format not in ("csv", "jsonl"):
            raise ConfigError(f"format must be csv or jsonl, got {self.format!r}")
        if self.cutoff < 8:
            raise ConfigError("cutoff must be >= 8")


def build_config(args: argparse.Namespace) -> SweepConfig:
    values = read_config(args.config) if args.config else {}
    for key in _CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    return SweepConfig(**values)


# ---------------------------------------------------------------------------
# commands


def cmd_capacity(cfg: SweepConfig) -> list[dict]:
    items = [(None, {"eta": e, "n_noise": n}) for e, n in itertools.product(cfg.eta, cfg.n_noise)]

    @_guard
    def row(item):
        base = item[1]
        return {**base, "capacity_bits": capacity_conjecture(ChannelParams(base["eta"], base["n_noise"]))}

    return _ordered_map(row, items)


def cmd_coherent_info(cfg: SweepConfig) -> list[dict]:
    grid = itertools.product(cfg.eta, cfg.n_noise, cfg.energy, cfg.x)
    items = [(None, {"eta": a, "n_noise": b, "energy": c, "x": d}) for a, b, c, d in grid]

    @_guard
    def row(item):
        base = item[1]
        params = ChannelParams(base["eta"], base["n_noise"])
        inp = GaussianInputParams(base["energy"], base["x"])
        ic = gaussian_coherent_info(params, inp).value
        if inp.x == 1.0:
            thermal = thermal_coherent_info(params, inp.n_thermal).value
            if abs(ic - thermal) > _X1_TOL * max(1.0, abs(thermal)):
                raise ArithmeticError(f"x=1 value {ic} disagrees with thermal path {thermal}")
        out = {**base, "ic_bits": ic}
        try:
            out["dic_dx_bits"] = dIc_dx(params, inp)
        except GausscapError as exc:
            out["error"] = f"{type(exc).__name__}: {exc}"
        return out

    return _ordered_map(row, items)


def cmd_perturbation(cfg: SweepConfig) -> list[dict]:
    items = [(s, {"spec": s, "n_mean": n, "eta": e, "n_noise": nn})
             for s, n, e, nn in itertools.product(cfg.spec, cfg.n_mean, cfg.eta, cfg.n_noise)]

    @_guard
    def row(item):
        base = item[1]
        spec = PerturbationSpec.parse(base["spec"], cfg.epsilon)
        params = ChannelParams(base["eta"], base["n_noise"])
        rep = coherent_info_shift(spec, base["n_mean"], params)
        cond = params.eta < 1.0 and base["n_mean"] > params.n_noise / (1.0 - params.eta)
        sign = "-" if rep.d_ic < 0 else ("0" if rep.d_ic == 0 else "+")
        return {**base, "d_s_out_nats": rep.d_s_out, "d_s_joint_nats": rep.d_s_joint, "d_ic_nats": rep.d_ic,
                "sign": sign, "condition": cond}

    return _ordered_map(row, items)


# -- verification suites ----------------------------------------------------

_GAUSS_GRID = dict(eta=(0.1, 0.3, 0.5, 0.7, 0.9), n_noise=(0.0, 0.1, 0.5, 1.0), n_mean=(0.5, 1.0, 5.0, 50.0))


def _verify_gaussian(cfg: SweepConfig) -> list[dict]:
    spec_dev = occ_res = x1 = 0.0
    for eta, nn, n in itertools.product(*_GAUSS_GRID.values()):
        params = ChannelParams(eta, nn)
        js = joint_spectrum(params, n)
        will = np.sort(symplectic_eigenvalues(joint_output_cov(params, n)))
        closed = np.sort([js.n_a + 0.5, js.n_b + 0.5])
        spec_dev = max(spec_dev, float(np.max(np.abs(will - closed))))
        occ_res = max(occ_res, abs(js.occupation_residual(n)))
        inp = GaussianInputParams(n + 0.5, 1.0)
        x1 = max(x1, abs(gaussian_coherent_info(params, inp).value - thermal_coherent_info(params, n).value))
    tol = 1e-9
    return [
        {"check": "joint spectrum vs Williamson", "max_dev": spec_dev, "tol": tol},
        {"check": "photon-number identity residual", "max_dev": occ_res, "tol": tol},
        {"check": "gaussian x=1 vs thermal", "max_dev": x1, "tol": tol},
    ]


def _verify_lemma(cfg: SweepConfig) -> list[dict]:
    from .fock import lemma_check

    params = ChannelParams(0.6, 0.2)
    rows = []
    for part in (1, 2):
        for k, m in ((1, 0), (0, 1), (1, 1), (2, 1)):
            dev = lemma_check(k, m, 1.0, params, cfg.cutoff, part=part)
            rows.append({"check": f"part {part} k={k} m={m}", "max_dev": dev, "tol": 1e-6})
    return rows


def _verify_perturbation(cfg: SweepConfig) -> list[dict]:
    from .fock import entropy_shift_oracle, perturbation_operator, product_thermal, trace_quotient

    rows = []
    for text in ("1:1:1", "2:2:1", "2,0:1,1:1j"):
        spec = PerturbationSpec.parse(text)
        phi = perturbation_operator(spec, 1.0, cfg.cutoff)
        rho = product_thermal(1.0, cfg.cutoff, spec.n_modes)
        # the two-mode reference is diagonal, so tiny eigenvalues are exact
        val = trace_quotient(phi, rho, floor=1e-300)
        ref = moment_trace(spec, 1.0)
        rows.append({"check": f"trace quotient {text}", "max_dev": abs(val / ref - 1.0), "tol": 1e-4})
    a, b = PerturbationSpec.parse("1:1:1"), PerturbationSpec.parse("2:2:1")
    rho = product_thermal(1.0, cfg.cutoff, 1)
    cross = trace_quotient(perturbation_operator(a, 1.0, cfg.cutoff), rho, perturbation_operator(b, 1.0, cfg.cutoff))
    rows.append({"check": "cross term 1:1 vs 2:2", "max_dev": abs(cross), "tol": 1e-6})
    spec = PerturbationSpec.parse("1:1:1", 1.0)
    params = ChannelParams(0.5, 0.25)
    joint = ChannelParams(0.8, 0.0)
    coef = entropy_shift_oracle(spec, 1.0, params, cutoff=cfg.cutoff, joint_params=joint)
    for name, val, ref in (
        ("input eps^2 coefficient", coef.input, input_entropy_shift(spec, 1.0)),
        ("output eps^2 coefficient", coef.output, output_entropy_shift(spec, 1.0, params)),
        ("joint eps^2 coefficient (pure loss)", coef.joint, joint_entropy_shift(spec, 1.0, joint)),
    ):
        rows.append({"check": name, "max_dev": abs(val / ref - 1.0), "tol": 1e-2})
    return rows


_SUITE_FNS = {"gaussian": _verify_gaussian, "lemma": _verify_lemma, "perturbation": _verify_perturbation}


def cmd_verify(cfg: SweepConfig, suite: str) -> list[dict]:
    if suite not in SUITES:
        raise ConfigError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    names = [s for s in SUITES[:-1]] if suite == "all" else [suite]
    rows = []
    for name in names:
        for r in _SUITE_FNS[name](cfg):
            r["suite"] = name
            r["status"] = "pass" if r["max_dev"] <= r["tol"] else "FAIL"
            rows.append(r)
    return rows


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gausscap", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("command", choices=("capacity", "cinfo", "perturb", "verify"))
    p.add_argument("suite", nargs="?", default=None, help="verification suite: " + ", ".join(SUITES))
    p.add_argument("--eta", help="transmissivities, comma separated")
    p.add_argument("--n-noise", dest="n_noise", help="additive noise photon numbers")
    p.add_argument("--n-mean", dest="n_mean", help="thermal input photon numbers (perturb)")
    p.add_argument("--energy", help="input energies <a^dag a> + 1/2 (cinfo)")
    p.add_argument("--x", help="shape parameters in (0, 1] (cinfo)")
    p.add_argument("--spec", action="append", help="perturbation k:l[:c], e.g. 2,0:1,1:1j; repeatable")
    p.add_argument("--epsilon", type=float, help="perturbation strength (default 0.01)")
    p.add_argument("--cutoff", type=int, help="Fock cutoff for verify (default 40)")
    p.add_argument("--format", choices=("csv", "jsonl"), help="output format (default csv)")
    p.add_argument("--out", help="write to PATH instead of stdout")
    p.add_argument("--config", help="key=value file; command-line flags take precedence")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = build_config(args)
        if args.command == "verify":
            rows = cmd_verify(cfg, args.suite or "all")
        else:
            if args.suite is not None:
                raise ConfigError(f"unexpected argument {args.suite!r}")
            rows = {"capacity": cmd_capacity, "cinfo": cmd_coherent_info, "perturb": cmd_perturbation}[
                args.command](cfg)
        buf = io.StringIO()
        write_table(rows, COLUMNS[args.command], cfg.format, buf)
        if cfg.out:
            with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(buf.getvalue())
        else:
            sys.stdout.write(buf.getvalue())
    except (GausscapError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.command == "verify" and any(r["status"] != "pass" for r in rows):
        for r in rows:
            if r["status"] != "pass":
                print(f"verification failed: {r['suite']}: {r['check']} (dev {fmt_number(r['max_dev'])} > "
                      f"{fmt_number(r['tol'])})", file=sys.stderr)
        return 2
    return 0
