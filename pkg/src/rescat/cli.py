"""Batch front end: run campaigns of named checks and write reports.

    rescat list
    rescat describe right-action
    rescat run moebius --format text
    rescat run path/to/campaign.json --prime 3 --report out.json

A campaign is a JSON file with a name, an optional config block, optional
spec files (polynomial groups, finite G-atlases) and a list of check ids.
Bundled campaigns can be named without a path.  The exit code is 0 iff every
check passes, 1 if any fails or is skipped, 2 on parse or lookup errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any, Sequence

from .core import LawReport, all_passed
from .errors import ParseError, RescatError, UnknownCheck
from .suites import REGISTRY, CheckOutcome, Config, get_check, run_check

CAMPAIGN_KEYS = {"campaign", "description", "config", "specs", "checks"}
CONFIG_KEYS = {"model", "prime", "jet_depth", "budget", "seed"}


@dataclass
class Campaign:
    name: str
    checks: list[str]
    config: dict = field(default_factory=dict)
    specs: list[Path] = field(default_factory=list)
    description: str = ""
    origin: Path | None = None


def _position(text: str, needle: str) -> tuple[int, int]:
    idx = text.find(needle)
    if idx < 0:
        return 1, 1
    line = text.count("\n", 0, idx) + 1
    col = idx - (text.rfind("\n", 0, idx) + 1) + 1
    return line, col


def parse_json(text: str, source: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}", line=exc.lineno, column=exc.colno, source=source) from None


def _fail(text: str, source: str, needle: str, msg: str) -> ParseError:
    line, col = _position(text, needle)
    return ParseError(f"{source}:{line}:{col}: {msg}", line=line, column=col, source=source)


def parse_campaign(text: str, source: str = "<campaign>", origin: Path | None = None) -> Campaign:
    data = parse_json(text, source)
    if not isinstance(data, dict):
        raise _fail(text, source, text.strip()[:1], "campaign must be a JSON object")
    for k in data:
        if k not in CAMPAIGN_KEYS:
            raise _fail(text, source, f'"{k}"', f"unknown campaign key {k!r}")
    if not isinstance(data.get("campaign"), str):
        raise _fail(text, source, '"campaign"' if "campaign" in data else "{", "campaign needs a string 'campaign' name")
    checks = data.get("checks")
    if not isinstance(checks, list) or not checks or not all(isinstance(c, str) for c in checks):
        raise _fail(text, source, '"checks"' if "checks" in data else "{", "'checks' must be a non-empty list of check ids")
    for c in checks:
        if c not in REGISTRY:
            line, col = _position(text, f'"{c}"')
            raise UnknownCheck(f"{source}:{line}:{col}: unknown check {c!r}", line=line, column=col, known=sorted(REGISTRY))
    config = data.get("config", {})
    if not isinstance(config, dict):
        raise _fail(text, source, '"config"', "'config' must be an object")
    for k, v in config.items():
        if k not in CONFIG_KEYS:
            raise _fail(text, source, f'"{k}"', f"unknown config key {k!r}")
        if k == "model" and v not in ("finset", "poly"):
            raise _fail(text, source, f'"{k}"', f"model must be finset or poly, got {v!r}")
        if k != "model" and (not isinstance(v, int) or isinstance(v, bool)):
            raise _fail(text, source, f'"{k}"', f"config value {k!r} must be an integer")
    specs = data.get("specs", [])
    if not isinstance(specs, list) or not all(isinstance(s, str) for s in specs):
        raise _fail(text, source, '"specs"', "'specs' must be a list of file names")
    base = origin.parent if origin else Path.cwd()
    return Campaign(data["campaign"], checks, config, [base / s for s in specs], data.get("description", ""), origin)


def bundled_dir() -> Path:
    return Path(str(resources.files("rescat") / "data"))


def bundled_campaigns() -> dict[str, Path]:
    d = bundled_dir() / "campaigns"
    return {p.stem: p for p in sorted(d.glob("*.json"))}


def load_campaign(ref: str) -> Campaign:
    path = Path(ref)
    if not path.exists():
        known = bundled_campaigns()
        if ref not in known:
            raise UnknownCheck(f"no campaign file or bundled campaign named {ref!r}", known=sorted(known))
        path = known[ref]
    return parse_campaign(path.read_text(), str(path.name), path)


# spec files


def load_spec(path: Path, cfg: Config) -> tuple[str, list[LawReport], dict]:
    """Parse a spec file and check what it declares."""
    from . import liegroups as lg
    from .gbundles import GAtlas, action_orbits, check_gatlas, check_group, principal_from_cocycle, right_action, torsor_witness
    from .poly import PolyModel

    text = path.read_text()
    data = parse_json(text, path.name)
    if not isinstance(data, dict):
        raise _fail(text, path.name, "[", "spec must be a JSON object")
    if "cocycle" in data:
        ga = GAtlas.from_json(data)
        reps = check_gatlas(ga) + check_group(ga.group)
        P = principal_from_cocycle(ga, name=data.get("name", path.stem))
        r, rr = right_action(P)
        _d, tr = torsor_witness(P, r)
        free, _trans, local = action_orbits(P, r)
        return f"spec:{path.name}", P.reports + reps + rr + [free, local] + tr, {"kind": "G-atlas", "points": len(P.bundle.E)}
    if "m" in data and "arity" in data:
        g = lg.PolyGroup.from_json(data, PolyModel(int(data["p"]), cfg.jet_depth))
        tg = lg.TangentGroup(g)
        reps = lg.group_laws(g, cfg.seed)
        if all_passed(reps):
            reps += lg.trivialize(tg, cfg.seed)[2] + lg.eckmann_hilton(tg, cfg.seed)
        return f"spec:{path.name}", reps, {"kind": "polynomial group", "arity": g.n, "p": g.model.p}
    raise _fail(text, path.name, "{", "spec is neither a polynomial group nor a G-atlas")


# running


def _run_one(args: tuple[str, Config]) -> tuple[str, dict]:
    cid, cfg = args
    t0 = time.perf_counter()
    try:
        out = run_check(cid, cfg)
        rec = _outcome_record(cid, out)
    except RescatError as exc:
        rec = {"id": cid, "verdict": "FAIL", "error": exc.to_dict(), "reports": [], "info": {}}
    rec["seconds"] = round(time.perf_counter() - t0, 3)
    return cid, rec


def _outcome_record(cid: str, out: CheckOutcome) -> dict:
    rec = {"id": cid, "verdict": out.verdict, "reports": [r.to_dict() for r in out.reports], "info": out.info}
    if out.skipped:
        rec["skipped"] = out.skipped
    return rec


def run_campaign(camp: Campaign, cfg: Config, jobs: int = 1, timings: bool = False) -> dict:
    """Execute the checks in declared order; results are keyed and emitted in that order regardless of jobs."""
    results: dict[str, dict] = {}
    for path in camp.specs:
        t0 = time.perf_counter()
        try:
            sid, reps, info = load_spec(path, cfg)
        except FileNotFoundError:
            raise ParseError(f"spec file not found: {path}", source=str(path)) from None
        results[sid] = {"id": sid, "verdict": "PASS" if all_passed(reps) else "FAIL", "reports": [r.to_dict() for r in reps], "info": info, "seconds": round(time.perf_counter() - t0, 3)}
    work = [(c, cfg) for c in camp.checks]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            done = dict(pool.map(_run_one, work))
    else:
        done = dict(map(_run_one, work))
    for c in camp.checks:
        results[c] = done[c]
    checks = list(results.values())
    if not timings:
        for rec in checks:
            rec.pop("seconds", None)
    verdict = "PASS" if all(rec["verdict"] == "PASS" for rec in checks) else "FAIL"
    return {"campaign": camp.name, "config": cfg.echo(), "verdict": verdict, "checks": checks}


def render_text(report: dict) -> str:
    lines = [f"campaign {report['campaign']}  " + " ".join(f"{k}={v}" for k, v in report["config"].items())]
    for rec in report["checks"]:
        t = f"  ({rec['seconds']:.2f}s)" if "seconds" in rec else ""
        lines.append(f"{rec['verdict']:<8}{rec['id']}{t}")
        if "skipped" in rec:
            lines.append(f"        skipped: {rec['skipped']}")
        if "error" in rec:
            lines.append(f"        error: {rec['error']['code']}: {rec['error']['message']}")
        for r in rec["reports"]:
            mark = "ok " if r["verdict"] == "PASS" else "BAD"
            lines.append(f"    {mark} {r['law']}  [{r['cases']} cases; {r['regime']}]")
            for cx in r["counterexamples"][:2]:
                lines.append(f"          counterexample: {json.dumps(cx, sort_keys=True)}")
            for n in r["notes"]:
                lines.append(f"          note: {n}")
        for k, v in rec.get("info", {}).items():
            lines.append(f"    {k}: {json.dumps(v, sort_keys=True)}")
    passed = sum(rec["verdict"] == "PASS" for rec in report["checks"])
    lines.append(f"{report['verdict']}: {passed}/{len(report['checks'])} checks passed")
    return "\n".join(lines) + "\n"


def describe(cid: str) -> str:
    chk = get_check(cid)
    lines = [chk.id, "", chk.statement, "", "models: " + ", ".join(chk.models), "knobs: " + ", ".join(chk.knobs)]
    return "\n".join(lines) + "\n"


def _config(args: argparse.Namespace, base: dict) -> Config:
    merged = dict(base)
    for k in CONFIG_KEYS:
        v = getattr(args, k, None)
        if v is not None:
            merged[k] = v
    return replace(Config(), **merged)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rescat", description="Run restriction-category geometry checks on finite models.")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a campaign file or a bundled campaign")
    run.add_argument("campaign", help="path to a campaign JSON file or a bundled campaign name")
    run.add_argument("--model", choices=("finset", "poly"), help="model (default poly)")
    run.add_argument("--prime", type=int, help="field size p (default 5)")
    run.add_argument("--jet-depth", dest="jet_depth", type=int, help="jet depth N for equality (default 3)")
    run.add_argument("--budget", type=int, help="node budget for isomorphism searches (default 1000000)")
    run.add_argument("--seed", type=int, help="random seed (default 0)")
    run.add_argument("--report", type=Path, help="write the JSON report here")
    run.add_argument("--format", choices=("json", "text"), default="text", help="stdout format")
    run.add_argument("--jobs", type=int, default=1, help="worker processes for independent checks")
    run.add_argument("--timings", action="store_true", help="include wall-clock seconds (breaks byte-identical reports)")
    d = sub.add_parser("describe", help="print the statement a check verifies")
    d.add_argument("check")
    sub.add_parser("list", help="list checks and bundled campaigns")
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "list":
            print("checks:")
            for cid, chk in REGISTRY.items():
                print(f"  {cid:<22}{'/'.join(chk.models)}")
            print("campaigns:")
            for name, path in bundled_campaigns().items():
                camp = parse_campaign(path.read_text(), path.name, path)
                print(f"  {name:<22}{camp.description}")
            return 0
        if args.command == "describe":
            sys.stdout.write(describe(args.check))
            return 0
        camp = load_campaign(args.campaign)
        cfg = _config(args, camp.config)
        if cfg.prime < 2 or any(cfg.prime % d == 0 for d in range(2, int(cfg.prime ** 0.5) + 1)):
            raise ParseError(f"--prime must be prime, got {cfg.prime}")
        report = run_campaign(camp, cfg, args.jobs, args.timings)
    except RescatError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return 2
    blob = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.report:
        args.report.write_text(blob)
    sys.stdout.write(blob if args.format == "json" else render_text(report))
    return 0 if report["verdict"] == "PASS" else 1


if __name__ == "__main__":
    raise SystemExit(main())
