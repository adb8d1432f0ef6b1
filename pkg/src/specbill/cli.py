"""Command-line front end.

Every output carries a metadata block echoing the configuration and the
library version; there are no timestamps, so identical invocations give
byte-identical files.  Exit status: 0 success, 2 invalid configuration,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .errors import EvenSymmetry, SpecbillError

EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class ConfigError(Exception):
    pass


def fmt(x) -> str:
    """17 significant digits, enough to round-trip a double."""
    return format(float(x), ".17g")


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, Fraction):
        return float(x)
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    return x


def _dumps(obj) -> str:
    # repr of a float is its shortest round-trip representation
    return json.dumps(_jsonable(obj), indent=2, sort_keys=False) + "\n"


@dataclass
class RunConfig:
    subcommand: str
    options: dict = field(default_factory=dict)

    def meta(self) -> dict:
        return {"program": "specbill", "version": __version__, "subcommand": self.subcommand,
                "config": {k: v for k, v in sorted(self.options.items())}}


# -- parsing helpers ---------------------------------------------------------
def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _grid(text: str) -> tuple[int, int]:
    v = _int_list(text)
    if len(v) != 2:
        raise argparse.ArgumentTypeError("grid must be NK,NTAU")
    return v[0], v[1]


def _number(text: str):
    """Decimal strings stay exact as Fractions; the float value is used otherwise."""
    try:
        return Fraction(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _read_json(path: str) -> dict:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise ConfigError(f"{path} must contain a JSON object")
    return obj


def _load_domain(path: str):
    from .geometry import domain_from_dict

    desc = _read_json(path)
    desc.pop("meta", None)
    try:
        return domain_from_dict(desc), desc
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad domain desc in {path}: {exc}") from None


def _load_germ(path: str, order: int | None):
    from .geometry import GraphGerm, germ_from_dict

    desc = _read_json(path)
    desc.pop("meta", None)
    desc.setdefault("type", "germ")
    if desc["type"] != "germ":
        raise ConfigError(f"{path} does not describe a germ")
    try:
        germ = germ_from_dict(desc)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad germ in {path}: {exc}") from None
    padded = []
    if order is not None:
        # the jet of a polynomial patch: unspecified orders are zero
        coeffs = {n: v for n, v in germ.coeffs.items() if n <= 2 * order}
        for n in range(2, 2 * order + 1):
            if n not in coeffs:
                coeffs[n] = 0.0
                padded.append(n)
        germ = GraphGerm(germ.L, coeffs, germ.radius)
    return germ, padded


def _check(cond: bool, msg: str):
    if not cond:
        raise ConfigError(msg)


# -- output ------------------------------------------------------------------
def _csv_text(meta: dict, header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    for line in json.dumps(_jsonable(meta), sort_keys=False).splitlines():
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _emit(text: str, out: str | None):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _table_payload(meta, fmt_name, header, rows, extra=None):
    if fmt_name == "json":
        body = {"meta": meta, "columns": header, "rows": rows}
        if extra:
            body.update(extra)
        return _dumps(body)
    return _csv_text(meta, header, rows)


# -- subcommands -------------------------------------------------------------
def cmd_orbits(cfg: RunConfig) -> str:
    from .billiard import length_spectrum

    o = cfg.options
    _check(o["lmax"] > 0, "--lmax must be positive")
    _check(o["max_bounces"] is None or 2 <= o["max_bounces"] <= 12, "--max-bounces must lie in [2, 12]")
    _check(1 <= o["per_var"] <= 64, "--per-var must lie in [1, 64]")
    _check(1 <= o["max_seeds"] <= 100000, "--max-seeds must lie in [1, 100000]")
    pair, desc = _load_domain(o["domain"])
    from .geometry import ObstaclePair

    _check(isinstance(pair, ObstaclePair), "orbits needs a two-component domain")
    spec_out = length_spectrum(pair, o["lmax"], o["max_bounces"], o["per_var"], o["max_seeds"], o["seed"])
    M = max((len(orb.angles) for _, orb in spec_out), default=2)
    header = ["pattern", "length", "grad_norm", "ghost_flag"] + [f"angle{i + 1}" for i in range(M)]
    rows = []
    for L, orb in spec_out:
        ang = [float(a) for a in orb.angles] + [""] * (M - len(orb.angles))
        rows.append([str(orb.pattern), float(L), float(orb.grad_norm), int(orb.ghost)] + ang)
    return _table_payload(cfg.meta() | {"domain": desc}, o["format"], header, rows)


def cmd_hessian(cfg: RunConfig) -> str:
    from .circulant import CirculantHessian, cube_sum, eigenvalues, inverse_row, row_sum

    o = cfg.options
    r = o["r"]
    _check(len(r) == 1 and 1 <= r[0] <= 4096, "--r must be a single integer in [1, 4096]")
    c = Fraction(o["c"])
    exact = o["exact"]
    H = CirculantHessian(r[0], c if exact else float(c))
    body = {
        "meta": cfg.meta(),
        "r": r[0],
        "c": float(c),
        "eigenvalues": [float(v) for v in eigenvalues(H)],
        "inverse_row": [float(v) for v in inverse_row(H, exact=exact)],
        "row_sum": float(row_sum(H, exact=exact)),
        "F_r": float(cube_sum(H, exact=exact)),
    }
    if exact:
        body["exact"] = {"c": str(c), "inverse_row": [str(v) for v in inverse_row(H, exact=True)],
                         "row_sum": str(row_sum(H, exact=True)), "F_r": str(cube_sum(H, exact=True))}
    return _dumps(body)


def _check_r(r: list[int]):
    _check(len(r) >= 2, "--r needs at least two iterates")
    _check(all(1 <= v <= 256 for v in r), "--r entries must lie in [1, 256]")


def cmd_forward(cfg: RunConfig) -> str:
    from .inverse import forward_table

    o = cfg.options
    _check_r(o["r"])
    _check(o["order"] is None or 2 <= o["order"] <= 40, "--order must lie in [2, 40]")
    germ, padded = _load_germ(o["germ"], o["order"])
    table = forward_table(germ, o["r"], o["order"], o["model"], exact=not o["float"])
    body = {"meta": cfg.meta() | {"padded_orders": padded}} | table.to_json()
    return _dumps(body)


def cmd_recover(cfg: RunConfig) -> str:
    from .inverse import WaveInvariantTable, recover_germ

    o = cfg.options
    obj = _read_json(o["table"])
    try:
        table = WaveInvariantTable.from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad table in {o['table']}: {exc}") from None
    _check(o["order"] is None or 2 <= o["order"] <= table.J, f"--order must lie in [2, {table.J}]")
    pair = tuple(o["pair"]) if o["pair"] else None
    _check(pair is None or len(pair) == 2, "--pair needs two iterates")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", EvenSymmetry)
        germ = recover_germ(table, o["order"], None, pair)
    notes = [str(w.message) for w in caught if issubclass(w.category, EvenSymmetry)]
    return _dumps({"meta": cfg.meta() | {"warnings": notes}} | germ.to_json())


def cmd_roundtrip(cfg: RunConfig) -> str:
    from .inverse import WaveInvariantTable, forward_table, recover_germ, relative_errors

    o = cfg.options
    _check_r(o["r"])
    _check(o["order"] is None or 2 <= o["order"] <= 40, "--order must lie in [2, 40]")
    germ, padded = _load_germ(o["germ"], o["order"])
    exact = not o["float"]
    table = forward_table(germ, o["r"], o["order"], o["model"], exact=exact)
    # go through the serialised form so the report reflects the file round trip
    table = WaveInvariantTable.from_json(json.loads(table.dumps()))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EvenSymmetry)
        got = recover_germ(table)
    errs = relative_errors(germ, got)
    body = {
        "meta": cfg.meta() | {"padded_orders": padded},
        "exact": exact,
        "max_relative_error": max(errs.values(), default=0.0),
        "relative_errors": {str(n): e for n, e in errs.items()},
        "recovered": got.to_json()["coeffs"],
    }
    return _dumps(body)


def _check_bem(o):
    _check(16 <= o["n"] <= 2048 and o["n"] % 2 == 0, "--n must be even and lie in [16, 2048]")
    _check(o["kmax"] > o["kmin"] > 0, "need 0 < --kmin < --kmax")


def cmd_resonances(cfg: RunConfig) -> str:
    from .bem.resonance import resonance_scan

    o = cfg.options
    _check_bem(o)
    _check(o["taumin"] < o["taumax"] <= 0, "need --taumin < --taumax <= 0")
    _check(o["taumin"] >= -5, "--taumin below -5 is outside the conditioning range")
    nk, nt = o["grid"]
    _check(3 <= nk <= 2001 and 3 <= nt <= 501, "--grid sizes must lie in [3, 2001] x [3, 501]")
    dom, desc = _load_domain(o["domain"])
    cands = resonance_scan(dom, (o["kmin"], o["kmax"]), (o["taumin"], o["taumax"]), (nk, nt), o["n"],
                           include_real=o["include_real"])
    header = ["re_k", "im_k", "abs_det", "winding", "converged", "message"]
    rows = [[float(c.k.real), float(c.k.imag), float(c.residual), c.winding, int(c.converged), c.message]
            for c in cands]
    return _table_payload(cfg.meta() | {"domain": desc}, o["format"], header, rows)


def cmd_poisson(cfg: RunConfig) -> str:
    from .bem.poisson import MODES, poisson_spectrum

    o = cfg.options
    _check_bem(o)
    _check(o["tau"] > 0, "--tau must be positive")
    _check(o["mode"] in MODES, f"--mode must be one of {MODES}")
    _check(0 < o["dk_grid"] <= 1, "--dk-grid must lie in (0, 1]")
    dom, desc = _load_domain(o["domain"])
    ps = poisson_spectrum(dom, (o["kmin"], o["kmax"]), o["tau"], o["n"], o["window"], o["dk_grid"], o["mode"],
                          t_max=o["tmax"])
    meta = cfg.meta() | {"domain": desc}
    peaks = {"meta": meta, "resolution": ps.resolution, "floor": ps.floor,
             "peaks": [{"t": t, "amplitude": a} for t, a in ps.peaks]}
    if o["peaks"]:
        Path(o["peaks"]).write_text(_dumps(peaks))
    if o["format"] == "json":
        return _dumps(peaks | {"t": ps.t.tolist(), "amplitude": ps.amplitude.tolist()})
    rows = [[float(t), float(a)] for t, a in zip(ps.t, ps.amplitude)]
    return _csv_text(meta, ["t", "amplitude"], rows)


def cmd_specfun_check(cfg: RunConfig) -> str:
    from .bem.specfun import self_test

    o = cfg.options
    _check(1 <= o["angles"] <= 100000, "--angles must lie in [1, 100000]")
    _check(o["large"] > 12, "--large must exceed the series range")
    rep = self_test(angles=o["angles"], large=o["large"])
    rep["checks"] = {
        "continuity_below_1e-10": rep["continuity"] < 1e-10,
        "large_ratio_within_1e-3": rep["large_ratio_error"] < 1e-3,
        "large_modulus_within_1e-3": rep["large_modulus_error"] < 1e-3,
    }
    return _dumps({"meta": cfg.meta()} | rep)


COMMANDS = {
    "orbits": cmd_orbits,
    "hessian": cmd_hessian,
    "forward": cmd_forward,
    "recover": cmd_recover,
    "roundtrip": cmd_roundtrip,
    "resonances": cmd_resonances,
    "poisson": cmd_poisson,
    "specfun-check": cmd_specfun_check,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="specbill", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"specbill {__version__}")
    sub = p.add_subparsers(dest="subcommand", required=True)

    def common(sp, fmt_default="json", formats=("csv", "json")):
        sp.add_argument("--out", help="output file (default: stdout)")
        sp.add_argument("--format", choices=formats, default=fmt_default)

    sp = sub.add_parser("orbits", help="periodic reflecting rays up to a length")
    sp.add_argument("--domain", required=True)
    sp.add_argument("--lmax", type=float, required=True)
    sp.add_argument("--max-bounces", type=int)
    sp.add_argument("--per-var", type=int, default=8)
    sp.add_argument("--max-seeds", type=int, default=256)
    sp.add_argument("--seed", type=int, default=0)
    common(sp, "csv")

    sp = sub.add_parser("hessian", help="circulant Hessian algebra for gamma^r")
    sp.add_argument("--r", type=_int_list, required=True)
    sp.add_argument("--c", type=_number, required=True)
    sp.add_argument("--exact", action="store_true", help="rational arithmetic (c read as a decimal)")
    common(sp, "json", ("json",))

    for name, text in (("forward", "germ -> wave-invariant table"), ("roundtrip", "germ -> recovery report")):
        sp = sub.add_parser(name, help=text)
        sp.add_argument("--germ", "--domain", dest="germ", required=True)
        sp.add_argument("--r", type=_int_list, default=[2, 4])
        sp.add_argument("--order", type=int, help="J: use f'' .. f^(2J), zero-padding missing orders")
        sp.add_argument("--model", default="ZERO", choices=("ZERO", "POLY"))
        sp.add_argument("--float", action="store_true", help="double precision instead of exact rationals")
        common(sp, "json", ("json",))

    sp = sub.add_parser("recover", help="wave-invariant table -> germ")
    sp.add_argument("--table", required=True)
    sp.add_argument("--order", type=int)
    sp.add_argument("--pair", type=_int_list, help="the two iterates used for decoupling")
    common(sp, "json", ("json",))

    sp = sub.add_parser("resonances", help="zeros of det(I + N) in a rectangle")
    sp.add_argument("--domain", required=True)
    sp.add_argument("--kmin", type=float, required=True)
    sp.add_argument("--kmax", type=float, required=True)
    sp.add_argument("--taumin", type=float, default=-0.6)
    sp.add_argument("--taumax", type=float, default=0.0)
    sp.add_argument("--grid", type=_grid, default=(101, 13))
    sp.add_argument("--n", type=int, default=96)
    sp.add_argument("--include-real", action="store_true")
    common(sp, "csv")

    sp = sub.add_parser("poisson", help="t-transform of d/dk log det(I + N)")
    sp.add_argument("--domain", required=True)
    sp.add_argument("--kmin", type=float, required=True)
    sp.add_argument("--kmax", type=float, required=True)
    sp.add_argument("--tau", type=float, default=0.1)
    sp.add_argument("--n", type=int, default=192)
    sp.add_argument("--mode", default="full")
    sp.add_argument("--window", default="hann")
    sp.add_argument("--dk-grid", type=float, default=0.05)
    sp.add_argument("--tmax", type=float)
    sp.add_argument("--peaks", help="also write the peak list as JSON here")
    common(sp, "csv")

    sp = sub.add_parser("specfun-check", help="Hankel function self-test report")
    sp.add_argument("--angles", type=int, default=64)
    sp.add_argument("--large", type=float, default=50.0)
    common(sp, "json", ("json",))
    return p


def parse_config(argv=None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    opts = vars(ns).copy()
    sub = opts.pop("subcommand")
    for k, v in list(opts.items()):
        if isinstance(v, float) and not math.isfinite(v):
            raise ConfigError(f"--{k} must be finite")
        if isinstance(v, Fraction):
            opts[k] = str(v)
        if isinstance(v, tuple):
            opts[k] = list(v)
    return RunConfig(sub, opts)


def run(cfg: RunConfig) -> str:
    out = COMMANDS[cfg.subcommand](cfg)
    _emit(out, cfg.options.get("out"))
    return out


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
        run(cfg)
    except SystemExit as exc:       # argparse: usage errors are configuration errors
        return EXIT_CONFIG if exc.code not in (0, None) else 0
    except ConfigError as exc:
        print(f"specbill: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SpecbillError as exc:
        print(f"specbill: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:       # argument checks inside the library
        print(f"specbill: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
