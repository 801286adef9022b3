"""Command-line front end: ``thetalift GROUP ACTION --config PATH [--out DIR] [--tol X] [--threads N]``.

Exit codes: 0 success, 1 configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__, catalog
from .config import ConfigError, RunConfig, config_hash, parse_rational
from .domain import DomainError, DomainPoint, find_frame, point_on_divisor
from .field import FieldError, codifferent
from .green import GreenError, GreenParams, green_eval, green_regularized_at_point, pole_extrapolate
from .lattice import LatticeError, MajorantForm, enumerate_ints, pairing_in_codifferent, z_dual
from .specfun import EvalPolicy, SpecFunError
from . import specfun
from .theta import SiegelPoint, ThetaError, siegel_theta, transform_residual
from .weilrep import Letter, WeilRepError, generator_matrix, relation_report, word_matrix
from .whittaker import (CuspFormData, EisensteinData, WeightVector, WhittakerError, WhittakerForm,
                        a_relation_deviation, b_of_f, eval_form, pairing, weak_holomorphy_obstruction)

log = logging.getLogger("thetalift")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2


class NumericFailure(RuntimeError):
    def __init__(self, payload: dict):
        super().__init__(payload.get("message", "numerical failure"))
        self.payload = payload


def to_jsonable(x):
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return to_jsonable(x.tolist())
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if hasattr(x, "coords") and hasattr(x, "field"):
        return [str(c) for c in x.coords]
    return x


# -- shared builders -------------------------------------------------------------------

def _point(cfg: RunConfig, lat, key=("point",)) -> DomainPoint:
    frame = find_frame(lat.space)
    return DomainPoint(frame, cfg.complex_list(list(key)))


def _tau(cfg: RunConfig, lat) -> SiegelPoint:
    tau = cfg.complex_list(["tau"]) if "tau" in cfg.raw else None
    if tau is None:
        raise ConfigError("/tau", "required for this subcommand")
    if len(tau) != lat.field.degree:
        raise ConfigError("/tau", f"expected {lat.field.degree} entries")
    return SiegelPoint(tuple(tau))


def _letter(cfg: RunConfig, spec: dict, pointer: str) -> Letter:
    kind = spec["kind"]
    if kind == "T":
        b = cfg.element(spec["b"], pointer + "/b") if "b" in spec else cfg.field.one
        return Letter("T", b)
    if kind == "M":
        if "eps" not in spec:
            raise ConfigError(pointer + "/eps", "M needs a unit eps")
        return Letter("M", cfg.element(spec["eps"], pointer + "/eps"))
    return Letter(kind)


def _word(cfg: RunConfig, specs: list, pointer: str) -> tuple:
    try:
        return tuple(_letter(cfg, s, f"{pointer}/{i}") for i, s in enumerate(specs))
    except WeilRepError as exc:
        raise ConfigError(pointer, str(exc)) from None


def _terms(cfg: RunConfig, items: list, pointer: str) -> dict:
    out = {}
    for i, t in enumerate(items):
        m = cfg.element(t["m"], f"{pointer}/{i}/m")
        out[(m, t["mu"])] = complex(*t["c"])
    return out


def _whittaker_form(cfg: RunConfig) -> WhittakerForm:
    spec = cfg.require("whittaker")["form"]
    weight = WeightVector(tuple(parse_rational(x, f"/whittaker/form/weight/{i}") for i, x in enumerate(spec["weight"])))
    form = WhittakerForm(weight, _terms(cfg, spec["terms"], "/whittaker/form/terms"))
    try:
        form.validate(cfg.lattice)
    except WhittakerError as exc:
        raise ConfigError("/whittaker/form", str(exc)) from None
    return form


def _green_params(cfg: RunConfig, s: float) -> GreenParams:
    g = cfg.raw["green"]
    kw = {"s": s}
    for key in ("truncation_radius", "singular_threshold"):
        if key in g:
            kw[key] = float(g[key])
    if "pole_steps" in g:
        kw["pole_steps"] = tuple(float(x) for x in g["pole_steps"])
    return GreenParams(**kw)


def _green_index(cfg: RunConfig):
    g = cfg.require("green")
    return cfg.element(g["m"], "/green/m"), int(g.get("mu", 0))


# -- subcommands --------------------------------------------------------------------------

def field_info(cfg: RunConfig) -> dict:
    f = cfg.field
    cd = codifferent(f)
    return {
        "degree": f.degree,
        "poly": list(f.poly),
        "discriminant": f.discriminant,
        "sigma1_root_index": f.embedding_order[0],
        "embeddings_of_basis": f.basis_embeddings,
        "trace_form": f.trace_form,
        "codifferent_basis": [b.coords for b in cd.elements()],
    }


def lattice_info(cfg: RunConfig) -> dict:
    lat = cfg.lattice
    dg = lat.discriminant_group
    return {
        "rank": lat.space.rank,
        "degree": lat.field.degree,
        "signatures": lat.space.signatures(),
        "even": lat.is_even(),
        "of_module": lat.is_of_module(),
        "discriminant_order": dg.order,
        "unimodular": dg.order == 1,
        "tr_gram": lat.tr_gram,
    }


def lattice_dual(cfg: RunConfig) -> dict:
    lat = cfg.lattice
    dual = z_dual(lat)
    return {"dual_basis_fcoords": dual.basis, "pairing_in_codifferent": pairing_in_codifferent(lat, dual)}


def lattice_disc(cfg: RunConfig) -> dict:
    dg = cfg.lattice.discriminant_group
    return {
        "order": dg.order,
        "invariant_factors": dg.invariant_factors,
        "coset_reps": dg.coset_reps,
        "q_values": [q.coords for q in dg.q_values],
        "tr_q_mod_1": dg.q_rat,
    }


def weil_gen(cfg: RunConfig) -> dict:
    dg = cfg.lattice.discriminant_group
    if "word" in cfg.raw:
        mat = word_matrix(dg, _word(cfg, cfg.raw["word"], "/word"))
        return {"word": mat.word_str(), "dim": mat.dim, "entries": mat.entries}
    one = cfg.field.one
    out = {}
    for letter in (Letter("S"), Letter("T", one), Letter("Z"), Letter("N")):
        mat = generator_matrix(dg, letter)
        out[str(letter)] = mat.entries
    return {"dim": dg.order, "generators": out}


def weil_check(cfg: RunConfig) -> dict:
    rep = relation_report(cfg.lattice.discriminant_group, tol=cfg.tol if "tol" in cfg.raw else 1e-12)
    if not rep["all_pass"]:
        raise NumericFailure({"error": "numeric", "message": "Weil relations violated", "report": to_jsonable(rep)})
    return rep


def specfun_eval(cfg: RunConfig) -> dict:
    spec = cfg.require("specfun")
    fn = getattr(specfun, spec["function"])
    policy = EvalPolicy(rel_tol=max(cfg.tol, 1e-15))
    args = dict(spec["args"])
    try:
        value = fn(**args, policy=policy) if spec["function"] != "reglift_g" else fn(**args)
    except TypeError as exc:
        raise ConfigError("/specfun/args", str(exc)) from None
    return {"function": spec["function"], "args": args, "value": value}


def theta_eval(cfg: RunConfig) -> dict:
    lat = cfg.lattice
    z = _point(cfg, lat) if "point" in cfg.raw else None
    tau = _tau(cfg, lat)
    val = siegel_theta(lat, z, tau, tol=cfg.tol)
    out = {"components": val.components, "tail_estimate": val.tail_estimate,
           "truncation_radius": val.truncation_radius, "n_terms": val.n_terms}
    if z is not None:
        out["frame"] = z.frame.to_json()
    return out


def theta_check(cfg: RunConfig) -> dict:
    lat = cfg.lattice
    z = _point(cfg, lat) if "point" in cfg.raw else None
    tau = _tau(cfg, lat)
    one = cfg.field.one
    if "words" in cfg.raw:
        words = [_word(cfg, w, f"/words/{i}") for i, w in enumerate(cfg.raw["words"])]
    else:
        words = [(Letter("S"),), (Letter("T", one),), (Letter("S"), Letter("T", one))]
    results = []
    for w in words:
        rep = transform_residual(lat, w, z, tau, tol=cfg.tol)
        rep["word"] = "".join(str(x) for x in w)
        results.append(rep)
    worst = max(r["residual"] for r in results)
    return {"checks": results, "max_residual": worst, "frame": z.frame.to_json() if z is not None else None}


def whittaker_eval(cfg: RunConfig) -> dict:
    lat = cfg.lattice
    f = _whittaker_form(cfg)
    tau = _tau(cfg, lat)
    s = cfg.raw["whittaker"].get("s")
    vec = eval_form(f, lat.discriminant_group.order, tau, s)
    return {"s": float(f.weight.s0) if s is None else s, "value": vec}


def _cusp_basis(cfg: RunConfig) -> list[CuspFormData]:
    out = []
    for i, g in enumerate(cfg.raw["whittaker"].get("cusp_basis", [])):
        weight = tuple(parse_rational(x, f"/whittaker/cusp_basis/{i}/weight/{j}") for j, x in enumerate(g["weight"]))
        out.append(CuspFormData(weight, _terms(cfg, g["coeffs"], f"/whittaker/cusp_basis/{i}/coeffs")))
    return out


def whittaker_pair(cfg: RunConfig) -> dict:
    f = _whittaker_form(cfg)
    try:
        vals = [pairing(g, f) for g in _cusp_basis(cfg)]
    except WhittakerError as exc:
        raise ConfigError("/whittaker/cusp_basis", str(exc)) from None
    return {"pairings": vals}


def whittaker_obstruct(cfg: RunConfig) -> dict:
    f = _whittaker_form(cfg)
    basis = _cusp_basis(cfg)
    try:
        rep = weak_holomorphy_obstruction(f, basis, tol=cfg.tol if "tol" in cfg.raw else 0.0)
    except WhittakerError as exc:
        raise ConfigError("/whittaker/cusp_basis", str(exc)) from None
    out = {"pairings": rep.values, "weakly_holomorphic": rep.weakly_holomorphic, "assumption": rep.assumption}
    if not basis:
        out["certificate"] = "S_kappa = {0}: no obstruction"
    return out


def whittaker_bf(cfg: RunConfig) -> dict:
    f = _whittaker_form(cfg)
    w = cfg.raw["whittaker"]
    eis = EisensteinData(_terms(cfg, w.get("eisenstein", []), "/whittaker/eisenstein"))
    try:
        rep = b_of_f(f, eis)
    except WhittakerError as exc:
        raise ConfigError("/whittaker/eisenstein", str(exc)) from None
    out = {"B(f)": rep.b_of_f, "weight_of_psi": rep.weight_of_psi, "A(f)": rep.a_of_f}
    if "residues" in w:
        out["A_relation_deviation"] = a_relation_deviation(f, eis, _terms(cfg, w["residues"], "/whittaker/residues"))
    return out


def _green_value_dict(v) -> dict:
    return {"value": v.value, "tail_estimate": v.tail_estimate, "partial_sum": v.partial_sum,
            "n_terms": v.n_terms, "truncation_radius": v.truncation_radius, "kappa": v.kappa,
            "regularization_applied": v.regularization_applied,
            "singular_terms": [{"lambda": lam, "w": w, "contribution": c} for lam, w, c in v.singular_terms]}


def green_eval_cmd(cfg: RunConfig) -> dict:
    lat = cfg.lattice
    m, mu = _green_index(cfg)
    z = _point(cfg, lat)
    s0 = lat.space.n / 2
    s = float(cfg.raw["green"].get("s", s0))
    params = _green_params(cfg, s)
    if s == s0:
        reg, count, raw = green_regularized_at_point(lat, mu, m, z, params)
        out = _green_value_dict(raw)
        out.update({"s": s, "at_s0": True, "regular_part": reg, "n_stripped_log_terms": count})
    else:
        out = _green_value_dict(green_eval(lat, mu, m, z, params))
        out.update({"s": s, "at_s0": False})
    out["frame"] = z.frame.to_json()
    return out


def green_pole(cfg: RunConfig) -> dict:
    lat = cfg.lattice
    m, mu = _green_index(cfg)
    z = _point(cfg, lat)
    pe = pole_extrapolate(lat, mu, m, z, _green_params(cfg, lat.space.n / 2 + 1))
    return {"constant_term": pe.constant_term, "residue": pe.residue, "fit_residual": pe.fit_residual,
            "steps": pe.steps, "values": pe.values, "laurent_residue": pe.laurent_residue,
            "laurent_constant": pe.laurent_constant, "frame": z.frame.to_json()}


def green_scan(cfg: RunConfig) -> dict:
    lat = cfg.lattice
    m, mu = _green_index(cfg)
    g = cfg.raw["green"]
    if "path" not in g:
        raise ConfigError("/green/path", "required for scan")
    path = g["path"]
    frame = find_frame(lat.space)
    if "start" in path:
        start = np.array(cfg.complex_list(["green", "path", "start"]))
    else:
        v = [parse_rational(x, f"/green/path/divisor_vector/{i}") for i, x in enumerate(path["divisor_vector"])]
        if len(v) != lat.dim:
            raise ConfigError("/green/path/divisor_vector", f"expected {lat.dim} lattice coordinates")
        lam1 = lat.embed_lcoords(np.array([[float(x) for x in v]]))[0][0]
        start = point_on_divisor(frame, lam1).z
    direction = np.array(cfg.complex_list(["green", "path", "direction"]))
    s0 = lat.space.n / 2
    s = float(g.get("s", s0))
    params = _green_params(cfg, s)
    rows = []
    for t in path["t"]:
        z = DomainPoint(frame, start + t * direction)
        if s == s0:
            reg, count, raw = green_regularized_at_point(lat, mu, m, z, params)
        else:
            raw = green_eval(lat, mu, m, z, params)
            count = len(raw.singular_terms)
            reg = raw.value - sum(c for _, _, c in raw.singular_terms)
        rows.append({"t": t, "s": s, "value": raw.value, "regular_part": reg,
                     "tail_estimate": raw.tail_estimate, "n_singular_terms": count})
    return {"rows": rows, "frame": frame.to_json(), "start": start, "direction": direction}


def _sqrt3_battery() -> dict:
    l0, l = catalog.sqrt3_L0(), catalog.sqrt3_L()
    f = l0.field
    # norm-2 vectors of the trace form: tr Q(x) = 1, enumerated on the trace majorant
    x, _ = enumerate_ints(l0, 0, MajorantForm.trace_form(l0.space), 1.0, level=Fraction(1))
    return {
        "L0": {"signatures": l0.space.signatures(), "even": l0.is_even(),
               "unimodular": l0.discriminant_group.order == 1, "tr_form_rank": len(l0.tr_gram),
               "tr_norm_2_vectors": len(x)},
        "L0+L1": {"signatures": l.space.signatures(), "even": l.is_even(),
                  "unimodular": l.discriminant_group.order == 1},
        "weil_relations_trivial_group": relation_report(l.discriminant_group)["all_pass"],
        "field_discriminant": f.discriminant,
    }


def examples_sqrt3(cfg: RunConfig | None) -> dict:
    out = _sqrt3_battery()
    ok = (out["L0"]["even"] and out["L0"]["unimodular"] and out["L0"]["tr_norm_2_vectors"] == 240
          and out["L0+L1"]["signatures"] == [(4, 2), (6, 0)] and out["L0+L1"]["even"]
          and out["L0+L1"]["unimodular"] and out["field_discriminant"] == 12)
    out["all_pass"] = ok
    if not ok:
        raise NumericFailure({"error": "numeric", "message": "sqrt3 battery failed", "report": to_jsonable(out)})
    return out


def examples_shimura(cfg: RunConfig | None) -> dict:
    data = catalog.shimura_curve_data()
    f = data["field"]
    delta = data["delta"]
    cd = codifferent(f)
    weight = WeightVector(data["k"])
    generates = all(cd.contains(b) for b in [delta]) and abs(delta.norm()) * f.discriminant == 1
    obstruction = weak_holomorphy_obstruction(WhittakerForm(weight, {}), data["cusp_basis"])
    out = {
        "field_discriminant": f.discriminant,
        "delta": delta.coords,
        "delta_signs": delta.signs(),
        "delta_generates_codifferent": generates,
        "n": data["n"],
        "weight_k": weight.k,
        "dual_weight_kappa": weight.kappa,
        "s0": weight.s0,
        "cusp_basis_size": len(data["cusp_basis"]),
        "certificate": "S_kappa = {0}: every f is weakly holomorphic" if obstruction.weakly_holomorphic else None,
    }
    ok = (f.discriminant == 49 and generates and delta.signs()[1:] == (1, 1)
          and weight.kappa == data["kappa"] and obstruction.weakly_holomorphic)
    out["all_pass"] = ok
    if not ok:
        raise NumericFailure({"error": "numeric", "message": "Shimura-curve battery failed", "report": to_jsonable(out)})
    return out


COMMANDS: dict[tuple[str, str], Callable] = {
    ("field", "info"): field_info,
    ("lattice", "info"): lattice_info,
    ("lattice", "dual"): lattice_dual,
    ("lattice", "disc"): lattice_disc,
    ("weil", "gen"): weil_gen,
    ("weil", "check"): weil_check,
    ("specfun", "eval"): specfun_eval,
    ("theta", "eval"): theta_eval,
    ("theta", "check"): theta_check,
    ("whittaker", "eval"): whittaker_eval,
    ("whittaker", "pair"): whittaker_pair,
    ("whittaker", "obstruct"): whittaker_obstruct,
    ("whittaker", "bf"): whittaker_bf,
    ("green", "eval"): green_eval_cmd,
    ("green", "scan"): green_scan,
    ("green", "pole"): green_pole,
    ("examples", "sqrt3"): examples_sqrt3,
    ("examples", "shimura-curve"): examples_shimura,
}

NUMERIC_ERRORS = (ThetaError, GreenError, SpecFunError, ArithmeticError, RuntimeError, np.linalg.LinAlgError)
CONFIG_ERRORS = (FieldError, LatticeError, WeilRepError, WhittakerError, DomainError)


def run(subcommand: tuple[str, str], cfg: RunConfig | None) -> tuple[int, dict]:
    """Execute one subcommand; returns (exit status, artifact)."""
    handler = COMMANDS[subcommand]
    t0 = time.perf_counter()
    try:
        if cfg is None and subcommand[0] != "examples":
            raise ConfigError("", "--config is required for this subcommand")
        result = handler(cfg)
        status = EXIT_OK
    except ConfigError as exc:
        return EXIT_CONFIG, exc.payload()
    except NumericFailure as exc:
        result, status = exc.payload, EXIT_NUMERIC
    except CONFIG_ERRORS as exc:
        return EXIT_CONFIG, {"error": "config", "pointer": "/", "message": f"{type(exc).__name__}: {exc}"}
    except NUMERIC_ERRORS as exc:
        result, status = {"error": "numeric", "type": type(exc).__name__, "message": str(exc)}, EXIT_NUMERIC
    artifact = {
        "command": " ".join(subcommand),
        "result": to_jsonable(result),
        "provenance": {
            "version": __version__,
            "config_hash": config_hash(cfg.raw) if cfg is not None else None,
            "config": cfg.raw if cfg is not None else None,
            "tol": cfg.tol if cfg is not None else None,
            "threads": cfg.threads if cfg is not None else 1,
            "elapsed_s": time.perf_counter() - t0,
        },
    }
    return status, artifact


def _rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    cols = ["t", "s", "value", "regular_part", "tail_estimate", "n_singular_terms"]
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: r[k] for k in cols})
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="thetalift", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    groups = p.add_subparsers(dest="group", required=True)
    actions: dict[str, list[str]] = {}
    for g, a in COMMANDS:
        actions.setdefault(g, []).append(a)
    for g, acts in actions.items():
        gp = groups.add_parser(g)
        sub = gp.add_subparsers(dest="action", required=True)
        for a in acts:
            ap = sub.add_parser(a)
            ap.add_argument("--config", type=Path, required=(g != "examples"))
            ap.add_argument("--out", type=Path)
            ap.add_argument("--threads", type=int, default=1)
            ap.add_argument("--tol", type=float)
            ap.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    cfg = None
    try:
        if args.config is not None:
            cfg = RunConfig.load(args.config, tol=args.tol, threads=args.threads)
    except ConfigError as exc:
        print(json.dumps(exc.payload()), file=sys.stderr)
        return EXIT_CONFIG
    status, artifact = run((args.group, args.action), cfg)
    if status == EXIT_CONFIG:
        print(json.dumps(artifact), file=sys.stderr)
        return status
    text = json.dumps(artifact, indent=2)
    csv_text = _rows_to_csv(artifact["result"]["rows"]) if (args.group, args.action) == ("green", "scan") and status == 0 else None
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "result.json").write_text(text)
        if csv_text is not None:
            (args.out / "scan.csv").write_text(csv_text)
        log.info("wrote %s", args.out)
    else:
        print(csv_text if csv_text is not None else text, end="" if csv_text else "\n")
    return status


if __name__ == "__main__":
    sys.exit(main())
