"""Config-driven batch runner.

    semishadow --config run.json --out results/ [--seed N] [--command NAME]

Every command writes its artifacts into the output directory and prints a
one-line summary.  Exit status: 0 when the verdict holds, 1 when it does not,
2 for an invalid config.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
from importlib import resources
from pathlib import Path

import jsonschema

from .core import REAL_LINE, DomainError, finite_space
from .files import (write_json, write_rounds_csv, write_rows_csv, write_trajectory_csv)
from .gluing import GluingOracle, OracleFailure, RateFunction, glue_pair, rate_from_dict
from .maps import map_from_dict
from .matrix import CLASSES, implication_matrix, registered_systems
from .nonauto import NonAutoSystem, branch_shadow_construct, branch_vs_semigroup_report
from .parallel import ShadowConstructionFailed, certify_bounds, shadow_construct
from .perturb import expand_rle, pseudo_from_dict
from .semigroup import GeneratorSet, PseudoTrajectory, Trajectory, gap_profile, step_gaps
from .transfer import (ConjugacySpec, TransferRefused, conjugate_transfer, homeomorphism_from_dict,
                       invert_transfer)
from .verdicts import check_shadowing, falsify_shadowing

COMMANDS = ("perturb", "glue", "shadow", "falsify", "transfer", "branch-compare", "implication-matrix")


class ConfigError(ValueError):
    pass


def load_schema() -> dict:
    return json.loads(resources.files("semishadow").joinpath("config_schema.json").read_text())


_TOKEN = re.compile(r'\s*(?:(?P<open>[{\[])|(?P<close>[}\]])|(?P<comma>,)|(?P<colon>:)|'
                    r'(?P<str>"(?:[^"\\]|\\.)*")|(?P<lit>[^\s,:\]\}]+))')


def value_lines(text: str) -> dict[tuple, int]:
    """Line number of every value in a JSON document, keyed by its path."""
    lines: dict[tuple, int] = {(): 1}
    stack: list[list] = []  # [bracket, key or index]
    expect_key = False
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            break
        pos = m.end()
        kind = m.lastgroup
        tok = m.group(kind)
        if kind == "colon":
            continue
        if kind == "comma":
            if stack and stack[-1][0] == "[":
                stack[-1][1] += 1
            expect_key = bool(stack) and stack[-1][0] == "{"
            continue
        if kind == "close":
            stack.pop()
            expect_key = False
            continue
        if expect_key and kind == "str":
            stack[-1][1] = json.loads(tok)
            expect_key = False
            continue
        path = tuple(f[1] for f in stack)
        lines.setdefault(path, text.count("\n", 0, m.start(kind)) + 1)
        if kind == "open":
            stack.append([tok, 0 if tok == "[" else None])
            expect_key = tok == "{"
    return lines


def load_config(path) -> dict:
    text = Path(path).read_text()
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from None
    validator = jsonschema.Draft7Validator(load_schema())
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        lines = value_lines(text)
        err = errors[0]
        p = tuple(err.absolute_path)
        while p and p not in lines:
            p = p[:-1]
        where = "/".join(map(str, err.absolute_path)) or "<root>"
        raise ConfigError(f"{path}:{lines.get(p, 1)}: {where}: {err.message}")
    return cfg


def build_system(cfg: dict):
    """(generator set, branch system or None) from the config's system block."""
    sysd = cfg.get("system")
    if sysd is None:
        raise ConfigError("config has no system block")
    space_d = sysd.get("space", {"kind": "real"})
    space = REAL_LINE if space_d["kind"] == "real" else finite_space(space_d["labels"])
    gens = {gid: map_from_dict(m, space) for gid, m in sysd["generators"].items()}
    G = GeneratorSet.of(space, gens)
    branch = None
    if "branch" in sysd:
        word = sysd["branch"]
        n_steps = cfg["pseudo"]["length"] - 1
        if isinstance(word, str):
            word = [word] * n_steps
        elif word and isinstance(word[0], list):
            word = expand_rle(word)
        branch = NonAutoSystem(G, cfg["pseudo"]["t_min"], tuple(word))
    return G, branch


def build_rate(cfg: dict) -> RateFunction:
    return rate_from_dict(cfg.get("rate", {"form": "geometric", "lambda": 0.5}))


def build_oracle(cfg: dict, system) -> GluingOracle:
    o = cfg.get("oracle", {})
    bridges = {(u, v): tuple(w) for u, v, w in o.get("bridges", [])}
    return GluingOracle(system, o.get("strategy", "expanding-pick-forward"), o.get("mode", "strong"),
                        o.get("radius", 3), bridges)


def _pseudo(cfg, G, branch, seed):
    spec = dict(cfg["pseudo"])
    if branch is not None and "word" not in spec:
        spec["word"] = list(branch.branch)
    return pseudo_from_dict(G, spec, seed)


def cmd_perturb(cfg, out: Path, seed: int):
    G, branch = build_system(cfg)
    y = _pseudo(cfg, G, branch, seed)
    system = branch or G
    write_trajectory_csv(out / "pseudo.csv", y, system)
    prof = gap_profile(system, y)
    write_json(out / "gap_profile.json", {"moments": [list(m) for m in prof.moments],
                                          "window": [y.t_min, y.t_max]})
    sup = max(prof.amplitudes, default=0.0)
    return 0, f"perturb: {len(y)} points, {len(prof)} moments, largest gap {sup:.6g}"


def cmd_glue(cfg, out: Path, seed: int):
    G, branch = build_system(cfg)
    system = branch or G
    y = _pseudo(cfg, G, branch, seed)
    prof = gap_profile(system, y)
    if not prof.moments:
        raise ConfigError("glue needs a pseudo-trajectory with at least one moment")
    _, best = step_gaps(system, y)
    m = prof.times
    end = m[1] if len(m) > 1 else y.t_max
    i1 = m[0] - y.t_min
    left = Trajectory(G, y.t_min, y.points[:i1 + 1], best[:i1])
    right = Trajectory(G, m[0] + 1, y.points[i1 + 1:end - y.t_min + 1], best[i1 + 1:end - y.t_min])
    oracle = build_oracle(cfg, system)
    try:
        z, errors = glue_pair(oracle, left, right, build_rate(cfg))
    except OracleFailure as exc:
        write_json(out / "glue.json", {"status": "failed", "error": str(exc), "index": exc.index})
        return 1, f"glue: oracle failed ({exc})"
    write_trajectory_csv(out / "glued.csv", z)
    write_json(out / "glue.json", {"status": "ok", "t0": m[0] + 1, "gap": prof.amplitudes[0],
                                   "errors": errors, "window": [z.t_min, z.t_max]})
    return 0, f"glue: joined at t0={m[0] + 1}, gap {prof.amplitudes[0]:.6g}, max error {errors.max():.6g}"


def cmd_shadow(cfg, out: Path, seed: int):
    G, branch = build_system(cfg)
    system = branch or G
    phi = build_rate(cfg)
    th = cfg.get("thresholds", {})
    eps = th.get("eps", 1e-3)
    kind = th.get("kind", "U")
    n_seeds = cfg.get("n_seeds", 1)
    rows, n_pass = [], 0
    for k in range(n_seeds):
        s = seed + k
        y = _pseudo(cfg, G, branch, s)
        oracle = build_oracle(cfg, system)
        try:
            if branch is not None:
                z, cert = branch_shadow_construct(y, branch, oracle, phi, k_min=th.get("k_min"))
            else:
                z, cert = shadow_construct(y, G, oracle, phi, k_min=th.get("k_min"))
        except ShadowConstructionFailed as exc:
            write_json(out / f"certificate_{k:03d}.json", {"seed": s, **exc.certificate.to_dict()})
            rows.append([s, 0, "", "", exc.certificate.status])
            continue
        rep = certify_bounds(cert, eps, "A" if kind == "A" else "U")
        ok = rep.passed
        if kind == "L":
            ok = check_shadowing(z, y, "L").passed
        n_pass += ok
        write_json(out / f"certificate_{k:03d}.json", {"seed": s, **cert.to_dict(),
                                                      "certification": rep.to_dict()})
        write_rounds_csv(out / f"rounds_{k:03d}.csv", cert)
        write_trajectory_csv(out / f"pseudo_{k:03d}.csv", y, system)
        write_trajectory_csv(out / f"shadow_{k:03d}.csv", z)
        rows.append([s, int(ok), repr(cert.final["sup_distance"]), repr(cert.final["max_cesaro"]),
                     cert.status])
    write_rows_csv(out / "summary.csv", ["seed", "pass", "sup_distance", "max_cesaro", "status"], rows)
    status = 0 if n_pass == n_seeds else 1
    return status, f"shadow: {n_pass}/{n_seeds} seeds pass ({kind} bounds, eps={eps:g})"


def cmd_falsify(cfg, out: Path, seed: int):
    G, branch = build_system(cfg)
    system = branch or G
    y = _pseudo(cfg, G, branch, seed)
    opts = dict(cfg.get("falsify", {}))
    delta = cfg.get("thresholds", {}).get("delta", 1.0)
    w = falsify_shadowing(system, y, delta, **opts)
    write_json(out / "witness.json", w.to_dict())
    write_trajectory_csv(out / "pseudo.csv", y, system)
    return 0, f"falsify: claim={w.claim} lower_bound={w.lower_bound:.6g} delta={delta:g}"


def cmd_transfer(cfg, out: Path, seed: int):
    G, _ = build_system(cfg)
    tr = cfg.get("transfer", {})
    y = _pseudo(cfg, G, None, seed)
    delta = cfg.get("thresholds", {}).get("delta", 1.0)
    try:
        x, _ = shadow_construct(y, G, build_oracle(cfg, G), build_rate(cfg))
    except ShadowConstructionFailed as exc:
        return 1, f"transfer: no shadowing trajectory to transfer ({exc})"
    if tr.get("mode", "conjugate") == "invert":
        res = invert_transfer(G, y, x, delta)
        write_json(out / "transfer.json", {"mode": "invert", **res.to_dict()})
        write_trajectory_csv(out / "pseudo_reversed.csv", res.y, res.inverse)
        write_trajectory_csv(out / "shadow_reversed.csv", res.x)
        return 0, f"transfer: reversed window [{res.y.t_min}, {res.y.t_max}], C_lower={res.lower:g}"
    target = GeneratorSet.of(G.space, {gid: map_from_dict(m, G.space)
                                       for gid, m in tr["target"].items()})
    direction = tr.get("direction", "h.f=g.h")
    f, g = (G, target) if direction == "h.f=g.h" else (target, G)
    spec = ConjugacySpec(homeomorphism_from_dict(tr["h"]), f, g, direction,
                         tuple(tr.get("region", (-10.0, 10.0))), tuple(tr.get("singular_points", ())))
    try:
        res = conjugate_transfer(spec, y, x, delta)
    except TransferRefused as exc:
        est = exc.estimate.to_dict() if exc.estimate is not None else None
        write_json(out / "transfer.json", {"mode": "conjugate", "refused": True, "reason": str(exc),
                                           "bilipschitz": est})
        return 1, f"transfer: refused ({exc})"
    write_json(out / "transfer.json", {"mode": "conjugate", "refused": False, **res.to_dict()})
    write_trajectory_csv(out / "pseudo_target.csv", res.y, spec.target)
    write_trajectory_csv(out / "shadow_target.csv", res.x)
    return 0, (f"transfer: U statistic {res.before['U']['statistic']:.6g} -> "
               f"{res.after['U']['statistic']:.6g} (C={res.estimate.C:g})")


def cmd_branch_compare(cfg, out: Path, seed: int):
    G, branch = build_system(cfg)
    if branch is None:
        raise ConfigError("branch-compare needs system.branch")
    y = _pseudo(cfg, G, branch, seed)
    delta = cfg.get("thresholds", {}).get("delta")
    rep = branch_vs_semigroup_report(y, G, branch, delta, build_rate(cfg) if "rate" in cfg else None)
    write_json(out / "branch_compare.json", rep.to_dict())
    write_trajectory_csv(out / "pseudo.csv", y, G)
    s = "pass" if rep.semigroup_pass else "fail"
    b = "pass" if rep.branch_pass else "fail"
    return 0, f"branch-compare: semigroup {s}, branch {b} (delta={rep.delta:.6g})"


def cmd_implication_matrix(cfg, out: Path, seed: int):
    window = cfg.get("matrix", {}).get("window", 256)
    res = implication_matrix(registered_systems(window))
    cells = res["cells"]
    rows = [[r] + [cells[(r, c)]["value"] for c in CLASSES] for r in CLASSES]
    write_rows_csv(out / "matrix.csv", ["class"] + list(CLASSES), rows)
    write_rows_csv(out / "matrix_reference.csv", ["class"] + list(CLASSES),
                   [[r] + [cells[(r, c)].get("reference", "=") for c in CLASSES] for r in CLASSES])
    ev_rows = [[name, cls, e["status"], e["tests"], "" if e["lower_bound"] is None else repr(e["lower_bound"])]
               for name, ev in res["evidence"].items() for cls, e in ev.items()]
    write_rows_csv(out / "evidence.csv", ["system", "class", "status", "tests", "lower_bound"], ev_rows)
    write_json(out / "cells.json", {f"{r}->{c}": v for (r, c), v in cells.items()})
    n_ce = sum(v["value"] == "counterexample-found" for v in cells.values())
    return 0, f"implication-matrix: {len(res['evidence'])} systems, {n_ce} counterexample cells"


HANDLERS = {
    "perturb": cmd_perturb,
    "glue": cmd_glue,
    "shadow": cmd_shadow,
    "falsify": cmd_falsify,
    "transfer": cmd_transfer,
    "branch-compare": cmd_branch_compare,
    "implication-matrix": cmd_implication_matrix,
}


def run_command(cfg: dict, out, seed: int | None = None, command: str | None = None) -> tuple[int, str]:
    command = command or cfg["command"]
    if command not in HANDLERS:
        raise ConfigError(f"unknown command {command!r}")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    seed = cfg.get("seed", 0) if seed is None else seed
    return HANDLERS[command](cfg, out, seed)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="semishadow", description=__doc__.splitlines()[0])
    ap.add_argument("--config", required=True, help="experiment config (JSON)")
    ap.add_argument("--out", required=True, help="output directory")
    ap.add_argument("--seed", type=int, default=None, help="base seed, overrides the config")
    ap.add_argument("--command", choices=COMMANDS, default=None, help="overrides the config command")
    args = ap.parse_args(argv)
    if args.seed is not None and not 0 <= args.seed < 2 ** 64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return 2
    try:
        cfg = load_config(args.config)
        status, summary = run_command(cfg, args.out, args.seed, args.command)
    except (ConfigError, DomainError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(summary)
    return status


if __name__ == "__main__":
    sys.exit(main())
