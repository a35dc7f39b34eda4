"""Command-line front end: ``hybridwc {jfun,mu,graphs,verify}``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .algebra import MPoly, RatFunc, z_exponents
from .errors import HybridWCError
from .graphs import enumerate_trees, tree_contribution
from .jfunctions import mu_coeff, nu_coeff, sector_of, unstable_coeff_eq, unstable_coeff_noneq
from .state_space import SAMPLE_MODELS, EqStateClass, Epsilon, ModelParams, StateClass, sample_model
from .verifiers import (
    check_all_edges,
    check_noneq_consistency,
    check_pole_structure,
    check_residue_recursion,
    residue_cases,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    model: ModelParams
    command: str
    subcommand: str | None = None
    output_path: str | None = None
    format: str = "json"
    equivariant: bool = False
    n: int = 1
    beta: int = 1
    max_vertices: int = 4
    max_beta_e: int = 3
    z_order: int = 4
    dot_dir: str | None = None
    threads: int = 1
    extra: dict = field(default_factory=dict)


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------


def _load_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed JSON in {path}: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("config must be a JSON object")
    return data


def model_from_dict(data: dict) -> ModelParams:
    data = dict(data)
    if "model" in data:
        name = data.pop("model")
        if name not in SAMPLE_MODELS:
            raise UsageError(f"unknown sample model {name!r}")
        base = sample_model(name)
        data.setdefault("weights", list(base.weights))
        data.setdefault("d", base.degree)
        data.setdefault("num_polys", base.num_polys)
    missing = [k for k in ("weights", "d", "num_polys") if k not in data]
    if missing:
        raise UsageError(f"config is missing {', '.join(missing)}")
    try:
        weights = [int(w) for w in data["weights"]]
        D = int(data.get("max_q_degree", 10))
        if D < 0:
            raise UsageError("max_q_degree must be non-negative")
        return ModelParams(
            tuple(weights),
            int(data["d"]),
            int(data["num_polys"]),
            Epsilon.parse(data.get("epsilon", "0+")),
            D,
        )
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def parse_config(args: argparse.Namespace) -> RunConfig:
    data = _load_json(args.config) if args.config else {}
    if args.epsilon is not None:
        data["epsilon"] = args.epsilon
    if args.max_degree is not None:
        data["max_q_degree"] = args.max_degree
    if not data:
        raise UsageError("a model is required: pass -c/--config")
    model = model_from_dict(data)
    threads = os.environ.get("HYBRIDWC_THREADS", "1")
    try:
        threads = max(1, int(threads))
    except ValueError:
        raise UsageError("HYBRIDWC_THREADS must be an integer") from None
    return RunConfig(
        model=model,
        command=args.command,
        subcommand=getattr(args, "check", None),
        output_path=args.out,
        format=args.format,
        equivariant=args.equivariant,
        n=getattr(args, "n", 1),
        beta=getattr(args, "beta", 1),
        max_vertices=getattr(args, "max_vertices", 4),
        max_beta_e=getattr(args, "max_beta_e", 3),
        z_order=getattr(args, "z_order", 4),
        dot_dir=getattr(args, "dot", None),
        threads=threads,
    )


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def _class_entries(cls, equivariant: bool) -> list[dict]:
    out = []
    if equivariant:
        for (j, m), c in cls.entries.items():
            out.append({"fixed_point": j, "z_exponent": None, "coeff": c.canonical_str()})
        return out
    for (m, l), c in cls.entries.items():
        for k, part in z_exponents(c).items():
            out.append({"power": l, "z_exponent": k, "coeff": part.canonical_str()})
    return out


def _series_report(cfg: RunConfig, kind: str) -> dict:
    p = cfg.model
    coeffs = []
    for beta in range(p.max_q_degree + 1):
        rec = {"beta": beta, "sector": int(sector_of(beta, p) * p.degree)}
        if not p.epsilon.is_unstable(beta):
            rec["stability"] = "stable-symbolic"
            rec["entries"] = []
            coeffs.append(rec)
            continue
        rec["stability"] = "unstable"
        if kind == "jfun":
            if cfg.equivariant:
                entries = []
                for j in range(1, p.num_polys + 1):
                    entries += _class_entries(unstable_coeff_eq(beta, j, p), True)
            else:
                entries = _class_entries(unstable_coeff_noneq(beta, p), False)
        else:
            if cfg.equivariant:
                entries = []
                for j in range(1, p.num_polys + 1):
                    entries += _class_entries(nu_coeff(beta, j, p, cfg.z_order), True)
            else:
                entries = _class_entries(mu_coeff(beta, p), False)
        rec["entries"] = entries
        coeffs.append(rec)
    return {
        "model": p.describe(),
        "epsilon": str(p.epsilon),
        "equivariant": cfg.equivariant,
        "coefficients": coeffs,
    }


def _graphs_report(cfg: RunConfig) -> dict:
    p = cfg.model
    trees = enumerate_trees(cfg.n, cfg.beta, p, cfg.max_vertices)
    out = []
    for i, t in enumerate(trees):
        rec = t.to_json(p)
        rec["contribution"] = tree_contribution(t, p)
        out.append(rec)
        if cfg.dot_dir:
            Path(cfg.dot_dir).mkdir(parents=True, exist_ok=True)
            Path(cfg.dot_dir, f"tree_{i:03d}.dot").write_text(t.to_dot(p, f"tree{i}") + "\n", encoding="utf-8")
    return {"model": p.describe(), "n": cfg.n, "beta": cfg.beta, "max_vertices": cfg.max_vertices, "trees": out}


def _residue_job(args):
    case, p = args
    return check_residue_recursion(*case, p, p.max_q_degree).to_json(p)


def _verify_report(cfg: RunConfig) -> tuple[dict, bool]:
    p = cfg.model
    sub = cfg.subcommand
    if sub == "residues":
        cases = list(residue_cases(p, cfg.max_beta_e))
        jobs = [(c, p) for c in cases]
        if cfg.threads > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
                reports = list(pool.map(_residue_job, jobs))
        else:
            reports = [_residue_job(job) for job in jobs]
        for case, rep in zip(cases, reports):
            rep["m"], rep["m_prime"] = str(case[2]), str(case[3])
        ok = all(r["verdict"] == "exact-equal" for r in reports)
        return {"check": "residues", "ok": ok, "reports": reports}, ok
    if sub == "edges":
        v = check_all_edges(p, max_beta_e=cfg.max_beta_e)
        return {"check": "edges", **v.to_json()}, v.ok
    if sub == "poles":
        verdicts = [
            check_pole_structure(j, m, p, p.max_q_degree).to_json()
            for j in range(1, p.num_polys + 1)
            for m in p.sectors()
        ]
        ok = all(v["ok"] for v in verdicts)
        return {"check": "poles", "ok": ok, "verdicts": verdicts}, ok
    if sub == "limit":
        v = check_noneq_consistency(p, p.max_q_degree)
        return {"check": "limit", **v.to_json()}, v.ok
    raise UsageError(f"unknown verify check {sub!r}")


# --------------------------------------------------------------------------
# rendering
# --------------------------------------------------------------------------


def _render_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if "coefficients" in report:
        w.writerow(["beta", "sector", "stability", "power", "fixed_point", "z_exponent", "coeff"])
        for rec in report["coefficients"]:
            for e in rec["entries"] or [{}]:
                w.writerow([
                    rec["beta"], rec["sector"], rec["stability"], e.get("power", ""),
                    e.get("fixed_point", ""), "" if e.get("z_exponent") is None else e["z_exponent"], e.get("coeff", ""),
                ])
    elif "trees" in report:
        w.writerow(["index", "vertices", "edges", "aut_order", "kinds", "contribution"])
        for i, t in enumerate(report["trees"]):
            verts = " ".join(f"({v['j']};{v['beta']})" for v in t["vertices"])
            edges = " ".join(f"{e['ends'][0]}-{e['ends'][1]}:{e['beta']}" for e in t["edges"])
            w.writerow([i, verts, edges, t["aut_order"], " ".join(t["kind_tags"]), t["contribution"]])
    else:
        w.writerow(["check", "ok"])
        w.writerow([report.get("check"), report.get("ok")])
    return buf.getvalue()


def _latex_coeff(s: str) -> str:
    return s.replace("*", " ")


def _render_latex(report: dict) -> str:
    lines = []
    if "coefficients" in report:
        lines.append("\\begin{tabular}{rrll}")
        lines.append("$\\beta$ & sector & index & coefficient \\\\ \\hline")
        for rec in report["coefficients"]:
            for e in rec["entries"]:
                idx = f"$H^{{{e['power']}}}$" if "power" in e else f"$P_{{{e['fixed_point']}}}$"
                zpow = "" if e.get("z_exponent") is None else f" z^{{{e['z_exponent']}}}"
                lines.append(f"{rec['beta']} & {rec['sector']}/{report['model']['d']} & {idx} & ${_latex_coeff(e['coeff'])}{zpow}$ \\\\")
            if rec["stability"] != "unstable":
                lines.append(f"{rec['beta']} & {rec['sector']}/{report['model']['d']} & & stable (symbolic) \\\\")
        lines.append("\\end{tabular}")
    elif "trees" in report:
        lines.append("\\begin{tabular}{rrl}")
        lines.append("tree & $|\\mathrm{Aut}|$ & contribution \\\\ \\hline")
        for i, t in enumerate(report["trees"]):
            lines.append(f"{i} & {t['aut_order']} & ${_latex_coeff(t['contribution'])}$ \\\\")
        lines.append("\\end{tabular}")
    else:
        lines.append(f"% {report.get('check')}: {'pass' if report.get('ok') else 'fail'}")
    return "\n".join(lines) + "\n"


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    if fmt == "csv":
        return _render_csv(report)
    if fmt == "latex":
        return _render_latex(report)
    raise UsageError(f"unknown format {fmt!r}")


def run(cfg: RunConfig) -> int:
    ok = True
    if cfg.command in ("jfun", "mu"):
        report = _series_report(cfg, cfg.command)
    elif cfg.command == "graphs":
        report = _graphs_report(cfg)
    elif cfg.command == "verify":
        report, ok = _verify_report(cfg)
    else:
        raise UsageError(f"unknown command {cfg.command!r}")
    text = render(report, cfg.format)
    if cfg.output_path:
        Path(cfg.output_path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK if ok else EXIT_FAIL


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", help="JSON model configuration")
    common.add_argument("--epsilon", help="'0+', 'p/q', an integer or 'inf'")
    common.add_argument("--max-degree", type=int, dest="max_degree", help="largest q-degree")
    common.add_argument("--equivariant", action="store_true", help="fixed-point basis output")
    common.add_argument("--format", choices=("json", "csv", "latex"), default="json")
    common.add_argument("--out", help="write the report here instead of stdout")

    parser = argparse.ArgumentParser(prog="hybridwc", description="Exact genus-zero hybrid-model wall-crossing data.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("jfun", parents=[common], help="unstable J-function coefficients")
    mu = sub.add_parser("mu", parents=[common], help="mirror-map coefficients")
    mu.add_argument("--z-order", type=int, default=4, dest="z_order", help="z-truncation of the vertex version")
    g = sub.add_parser("graphs", parents=[common], help="decorated localization trees")
    g.add_argument("--n", type=int, default=1)
    g.add_argument("--beta", type=int, default=1)
    g.add_argument("--max-vertices", type=int, default=4, dest="max_vertices")
    g.add_argument("--dot", help="directory for Graphviz files")
    v = sub.add_parser("verify", parents=[common], help="run an identity check")
    v.add_argument("check", choices=("residues", "edges", "poles", "limit"))
    v.add_argument("--max-beta-e", type=int, default=3, dest="max_beta_e")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = parse_config(args)
        return run(cfg)
    except (UsageError, HybridWCError, ValueError) as exc:
        print(f"hybridwc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE



def classes_from_report(report: dict, p: ModelParams) -> dict:
    """Rebuild ``{beta: class}`` from a ``jfun``/``mu`` JSON report."""
    z = MPoly.var(p.nvars, 0)
    out = {}
    for rec in report["coefficients"]:
        m = Fraction(rec["sector"], p.degree)
        entries: dict = {}
        for e in rec["entries"]:
            c = RatFunc.parse(e["coeff"], p.nvars)
            if e.get("z_exponent") is not None:
                k = e["z_exponent"]
                c = c * (z ** k if k >= 0 else RatFunc.from_poly(z).inverse() ** (-k))
            key = (e["fixed_point"], m) if "fixed_point" in e else (m, e["power"])
            entries[key] = entries[key] + c if key in entries else c
        if report.get("equivariant"):
            out[rec["beta"]] = EqStateClass(p, entries)
        else:
            out[rec["beta"]] = StateClass(p, entries)
    return out


def main_exit() -> None:
    """Console-script entry point."""
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
