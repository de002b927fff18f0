"""Command line front-end: ``dworkzeta {polytope,sums,lfun,verify}``.

Exit codes: 0 ok, 1 usage, 2 parse error, 3 geometry error, 4 enumeration cap
or certification refusal, 5 verification failure (report still printed).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import random
import re
import sys
from dataclasses import asdict, dataclass
from fractions import Fraction

from . import gfq, padic, polytope, precision, zeta
from .dwork_operator import InsufficientCutoff, OperatorSuite, build_F0, build_R
from .laurent import ParseError, format_laurent, parse_laurent

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_GEOMETRY, EXIT_REFUSED, EXIT_FAILED = 0, 1, 2, 3, 4, 5

DEFAULTS = {
    "p": 3, "a": 1, "n": None, "r": None, "poly": None, "N": 8, "W": "auto", "t_deg": None,
    "m_max": 2, "oracle_m": 3, "splitting": padic.ARTIN_HASSE, "format": "text", "seed": 0,
    "cap": gfq.DEFAULT_POINT_CAP,
}
_INT_KEYS = {"p", "a", "n", "r", "N", "t_deg", "m_max", "oracle_m", "seed", "cap"}
# n and N would collide after upper-casing
_ENV_NAMES = {key: f"DWORKZETA_{key.upper()}" for key in DEFAULTS}
_ENV_NAMES["n"] = "DWORKZETA_NVARS"


class UsageError(ValueError):
    pass


@dataclass
class JobConfig:
    p: int
    a: int
    n: int
    r: int
    poly: str
    N: int
    W: str
    t_deg: int | None
    m_max: int
    oracle_m: int
    splitting: str
    format: str
    seed: int
    cap: int

    def W_value(self):
        return None if self.W == "auto" else Fraction(self.W)


def _infer_n(text: str) -> int:
    idx = [int(k) for k in re.findall(r"x(\d+)", text)]
    return max(idx, default=1)


def resolve_config(ns: argparse.Namespace, env=None) -> JobConfig:
    """Flags beat DWORKZETA_* environment variables, which beat defaults."""
    env = os.environ if env is None else env
    vals = {}
    for key, default in DEFAULTS.items():
        flag = getattr(ns, key, None)
        env_val = env.get(_ENV_NAMES[key])
        if flag is not None:
            v = flag
        elif env_val is not None:
            v = env_val
        else:
            v = default
        if key in _INT_KEYS and v is not None:
            try:
                v = int(v)
            except ValueError as exc:
                raise UsageError(f"{key} must be an integer, got {v!r}") from exc
        vals[key] = v
    if vals["poly"] is None:
        raise UsageError("--poly is required")
    if vals["n"] is None:
        vals["n"] = _infer_n(vals["poly"])
    if vals["r"] is None:
        vals["r"] = vals["n"]
    if vals["splitting"] not in padic.KINDS:
        raise UsageError(f"splitting must be one of {padic.KINDS}")
    if vals["format"] not in ("json", "text"):
        raise UsageError("format must be json or text")
    if vals["W"] != "auto":
        try:
            Fraction(vals["W"])
        except ValueError as exc:
            raise UsageError(f"W must be a rational number or 'auto', got {vals['W']!r}") from exc
    if not gfq.is_prime(vals["p"]) or vals["a"] < 1:
        raise UsageError("p must be prime and a >= 1")
    if not 0 <= vals["r"] <= vals["n"]:
        raise UsageError("need 0 <= r <= n")
    return JobConfig(**vals)


def _field(cfg: JobConfig):
    return gfq.make_field(cfg.p, cfg.a)


def _parse(cfg: JobConfig):
    return parse_laurent(cfg.poly, cfg.n, _field(cfg))


def _frac(x) -> str:
    return str(x)


# --- subcommands --------------------------------------------------------------------------

def cmd_polytope(cfg: JobConfig) -> tuple[dict, int]:
    f = _parse(cfg)
    g = polytope.build_geometry(f.support(), cfg.n)
    faces = [{"dim": fc.dim, "points": [list(x) for x in fc.points]} for fc in g.faces]
    vol = polytope.normalized_volume(g) if g.dim == cfg.n else 0
    out = {"poly": format_laurent(f), "geometry": g.to_json(), "faces": faces,
           "normalized_volume": vol}
    space = gfq.SpaceSpec(cfg.n, cfg.r)
    affine = list(space.affine_axes)
    if affine:
        vols = polytope.restricted_volumes(g, affine)
        out["restricted_volumes"] = [{"A": sorted(A), "volume": _frac(v)}
                                     for A, v in sorted(vols.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))]
        out["v_S"] = polytope.v_A(g, affine)
        cm = polytope.is_commode(f, affine)
        out["commode"] = {"commode": cm.commode, "r_tilde": cm.r_tilde,
                          "rows": [{"A": list(A), "dim": d, "required": need} for A, d, need in cm.rows]}
    return out, EXIT_OK


def cmd_sums(cfg: JobConfig) -> tuple[dict, int]:
    f = _parse(cfg)
    space = gfq.SpaceSpec(cfg.n, cfg.r)
    rows = []
    for m in range(1, cfg.oracle_m + 1):
        counts = gfq.exp_sum_counts(space, f, m, cap=cfg.cap)
        rows.append({"m": m, "counts": counts, "cyc": gfq.CycInt.from_counts(counts).to_json()})
    return {"poly": format_laurent(f), "space": space.label(), "p": cfg.p, "a": cfg.a, "sums": rows}, EXIT_OK


def _auto_w_derivation(cfg: JobConfig, f) -> dict | None:
    try:
        g = polytope.build_geometry(f.support(), cfg.n)
    except polytope.DegenerateGeometry:
        return None
    q = cfg.p**cfg.a
    b = precision.b_frobenius(cfg.p, q) if cfg.splitting == padic.ARTIN_HASSE else precision.b_dwork(cfg.p, q)
    target = precision.auto_cutoff_target(b, q, cfg.N)
    if cfg.W == "auto":
        W, W_next = precision.auto_cutoff(g, b, q, cfg.N)
    else:
        W = Fraction(cfg.W)
        W_next = g.next_weight(W)
    return {"b": _frac(b), "q": q, "N": cfg.N, "target_W_next": _frac(target), "W": _frac(W),
            "W_next": _frac(W_next), "mode": "auto" if cfg.W == "auto" else "fixed"}


def cmd_lfun(cfg: JobConfig) -> tuple[dict, int]:
    f = _parse(cfg)
    space = gfq.SpaceSpec(cfg.n, cfg.r)
    deriv = _auto_w_derivation(cfg, f)
    t_deg = cfg.t_deg
    if t_deg is None:
        expected = None
        try:
            g = polytope.build_geometry(f.support(), cfg.n)
            if g.dim == cfg.n:
                affine = list(space.affine_axes)
                expected = polytope.v_A(g, affine) if affine else polytope.normalized_volume(g)
        except polytope.DegenerateGeometry:
            pass
        t_deg = zeta.default_t_deg(expected, cfg.oracle_m)
    rep = zeta.l_function_mixed(space, f, cfg.N, t_deg, kind=cfg.splitting, W=cfg.W_value(),
                                oracle_m=cfg.oracle_m, m_max=cfg.m_max)
    out = rep.to_json()
    out["t_deg"] = t_deg
    out["W_derivation"] = deriv
    status = "degenerate" if rep.nondegeneracy.get("status") == "degenerate" else ("ok" if rep.verified else "failed")
    out["status"] = status
    return out, EXIT_OK if rep.verified else EXIT_FAILED


def _splitting_audit(kind: str, p: int, a: int, i_max: int = 50) -> dict:
    b = padic.decay_rate(kind, p)
    N = max(4, math.ceil(b * i_max) + 1)
    T = padic.get_tower(p, a, N)
    lam = padic.splitting_coefficients(kind, T, i_max).lam
    bad = [i for i, x in enumerate(lam) if x.valuation() < b * i]
    return {"name": f"ord lambda_i >= {b} i ({kind}, i <= {i_max})", "pass": not bad, "violations": bad}


def cmd_verify(cfg: JobConfig) -> tuple[dict, int]:
    f = _parse(cfg)
    g = polytope.build_geometry(f.support(), cfg.n)
    checks: list[dict] = []
    for kind in padic.KINDS:
        checks.append(_splitting_audit(kind, cfg.p, cfg.a))
    T = padic.get_tower(cfg.p, cfg.a, cfg.N)
    gam = padic.gamma_root(T)
    v = (gam - T.pi()).valuation()
    checks.append({"name": "ord(gamma - pi) >= 2/(p-1)", "pass": v >= Fraction(2, cfg.p - 1), "value": _frac(v)})
    for name, series in (("F0", build_F0(f, g, T, padic.ARTIN_HASSE)),
                         ("G", build_F0(f, g, T, padic.DWORK_EXP))):
        bad = series.audit()
        checks.append({"name": f"{name} decay", "pass": not bad, "violations": len(bad)})
    R, Rinv = build_R(f, g, T)
    for name, series in (("R", R), ("R^-1", Rinv)):
        bad = series.audit()
        checks.append({"name": f"{name} decay", "pass": not bad, "violations": len(bad)})
    W = cfg.W_value() if cfg.W != "auto" else Fraction(4)
    suite = OperatorSuite(f, g, T, W)
    residuals = []
    for i in range(1, cfg.n + 1):
        residuals.append(suite.chain_map_residual(i))
        residuals.append(suite.derivation_conjugation_residual(i))
    residuals.append(suite.conjugation_residual())
    residuals.append(suite.inverse_pair_residual())
    for i in range(1, cfg.n + 1):
        for j in range(i + 1, cfg.n + 1):
            residuals.append(suite.commutator_residual(i, j, "hat"))
            residuals.append(suite.commutator_residual(i, j, "pi"))
    residuals.extend(suite.koszul_residuals("hat"))
    for r in residuals:
        checks.append(r.to_json())
    # splitting independence on the L-series
    space = gfq.SpaceSpec(cfg.n, cfg.r)
    t_deg = cfg.t_deg or 2
    reps = [zeta.l_function_mixed(space, f, cfg.N, t_deg, kind=k, W=cfg.W_value(), check_degree=False)
            for k in padic.KINDS]
    checks.append(compare_reports(reps[0].L, reps[1].L, "L series: ArtinHasse vs DworkExp"))
    ok = all(c["pass"] for c in checks)
    return {"poly": format_laurent(f), "p": cfg.p, "a": cfg.a, "N": cfg.N, "W": _frac(W), "checks": checks,
            "all_pass": ok}, EXIT_OK if ok else EXIT_FAILED


def compare_reports(A: zeta.CertSeries, B: zeta.CertSeries, name: str) -> dict:
    """Agreement of two certified series at their shared precision."""
    bad = []
    for k in range(min(A.deg, B.deg) + 1):
        shared = min(A.prec[k], B.prec[k])
        if (A.coeffs[k] - B.coeffs[k]).val_units() < shared:
            bad.append(k)
    return {"name": name, "pass": not bad, "mismatched_t_deg": bad}


# --- output -------------------------------------------------------------------------------

def _text(obj, indent: int = 0) -> str:
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v and not _flat_list(v):
                lines.append(f"{pad}{k}:")
                lines.append(_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {json.dumps(v)}")
    elif isinstance(obj, list):
        for v in obj:
            if isinstance(v, (dict, list)) and not _flat_list(v):
                lines.append(f"{pad}-")
                lines.append(_text(v, indent + 1))
            else:
                lines.append(f"{pad}- {json.dumps(v)}")
    else:
        lines.append(f"{pad}{obj}")
    return "\n".join(lines)


def _flat_list(v) -> bool:
    return isinstance(v, list) and all(not isinstance(x, (dict,)) for x in v)


def render(obj: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(obj, sort_keys=True, separators=(",", ":"))
    return _text(obj)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dworkzeta", description="Exponential sums and their L-functions.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("polytope", "Newton polytope report"), ("sums", "exact exponential sums"),
                        ("lfun", "L-function via the Frobenius matrix"), ("verify", "invariant suite")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--p", type=int)
        sp.add_argument("--a", type=int)
        sp.add_argument("--n", type=int)
        sp.add_argument("--r", type=int, help="torus rank (default n)")
        sp.add_argument("--poly")
        sp.add_argument("--N", type=int, dest="N")
        sp.add_argument("--W", dest="W", help="weight cutoff or 'auto'")
        sp.add_argument("--t-deg", type=int, dest="t_deg")
        sp.add_argument("--m-max", type=int, dest="m_max")
        sp.add_argument("--oracle-m", type=int, dest="oracle_m")
        sp.add_argument("--splitting", choices=padic.KINDS)
        sp.add_argument("--format", choices=("json", "text"))
        sp.add_argument("--seed", type=int)
        sp.add_argument("--cap", type=int)
    return parser


COMMANDS = {"polytope": cmd_polytope, "sums": cmd_sums, "lfun": cmd_lfun, "verify": cmd_verify}


def main(argv=None, env=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = resolve_config(ns, env)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    random.seed(cfg.seed)
    try:
        result, code = COMMANDS[ns.command](cfg)
    except ParseError as exc:
        print(f"parse error at position {exc.position}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (polytope.DegenerateGeometry, polytope.LowerDimensional, polytope.OutsideCone) as exc:
        print(f"geometry error: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY
    except gfq.EnumerationCapExceeded as exc:
        print(f"enumeration cap: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except (zeta.CertificationError, InsufficientCutoff) as exc:
        print(f"certification refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except gfq.FieldError as exc:
        print(f"field error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    result = {"command": ns.command, "config": asdict(cfg), **result}
    print(render(result, cfg.format), file=out)
    return code


if __name__ == "__main__":
    sys.exit(main())
