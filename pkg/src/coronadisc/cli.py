"""Command-line front end: solve, verify, and resolution sweeps.

Exit status contract (stable, for scripting):

* 0 -- success
* 1 -- config or internal error
* 2 -- hypothesis check failed (the worst sample point is printed)

Config files are flat ``key = value`` text; keys are the RunConfig field
names.  ``functions`` may repeat, one spec string per line, in order.
Lines starting with ``#`` and blank lines are ignored.  All outputs are
UTF-8 with LF line endings.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field as dc_field

from .corona import (
    CoronaHypothesisError,
    CoronaProblem,
    serialize_report,
    solve_corona,
    verify_solution,
)
from .demos import demo_specs
from .grid import FieldFormatError, GridError, dump_field_csv, load_field_csv, make_polar_grid
from .specs import SpecError, parse_spec

__all__ = ["ConfigError", "CliError", "RunConfig", "parse_config", "cmd_solve", "cmd_verify", "cmd_sweep", "main"]


class ConfigError(ValueError):
    """Bad config file contents; the message names the offending key."""


class CliError(ValueError):
    """Bad command line usage."""


@dataclass
class RunConfig:
    functions: list[str] = dc_field(default_factory=list)
    epsilon: float | None = None
    n_r: int = 128
    n_theta: int = 256
    sigma: float = 0.5
    margin: float = 0.05
    r_int: float = 0.9
    output_dir: str = "."
    dump_fields: bool = False
    demo: str | None = None

    def validate(self) -> None:
        if self.demo is None and not self.functions:
            raise ConfigError("config needs either 'demo' or at least one 'functions' entry")
        if self.demo is None and self.epsilon is None:
            raise ConfigError("key 'epsilon': required when functions are given explicitly")
        if self.epsilon is not None and self.epsilon <= 0:
            raise ConfigError(f"key 'epsilon': must be positive, got {self.epsilon}")
        if not 0.0 < self.r_int < 1.0:
            raise ConfigError(f"key 'r_int': must lie in (0, 1), got {self.r_int}")
        if self.sigma <= 0:
            raise ConfigError(f"key 'sigma': must be positive, got {self.sigma}")
        if self.margin < 0:
            raise ConfigError(f"key 'margin': must be nonnegative, got {self.margin}")
        if self.n_r < 2 or self.n_theta < 4:
            raise ConfigError(
                f"key 'n_r'/'n_theta': resolution ({self.n_r}, {self.n_theta}) "
                "below the (2, 4) minimum"
            )


_BOOL_WORDS = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}


def parse_config(text: str) -> RunConfig:
    cfg = RunConfig()
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        try:
            if key == "functions":
                cfg.functions.append(value)
            elif key == "epsilon":
                cfg.epsilon = float(value)
            elif key == "n_r":
                cfg.n_r = int(value)
            elif key == "n_theta":
                cfg.n_theta = int(value)
            elif key == "sigma":
                cfg.sigma = float(value)
            elif key == "margin":
                cfg.margin = float(value)
            elif key == "r_int":
                cfg.r_int = float(value)
            elif key == "output_dir":
                cfg.output_dir = value
            elif key == "dump_fields":
                if value.lower() not in _BOOL_WORDS:
                    raise ValueError(f"not a boolean: {value!r}")
                cfg.dump_fields = _BOOL_WORDS[value.lower()]
            elif key == "demo":
                cfg.demo = value
            else:
                raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: key {key!r}: {exc}") from exc
    return cfg


def _build_problem(cfg: RunConfig) -> CoronaProblem:
    if cfg.demo is not None:
        specs, demo_eps = demo_specs(cfg.demo)
        epsilon = cfg.epsilon if cfg.epsilon is not None else demo_eps
    else:
        try:
            specs = [parse_spec(text) for text in cfg.functions]
        except SpecError as exc:
            raise ConfigError(f"key 'functions': {exc}") from exc
        epsilon = cfg.epsilon
    grid = make_polar_grid(cfg.n_r, cfg.n_theta)
    return CoronaProblem.from_specs(specs, epsilon, grid)


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def cmd_solve(cfg: RunConfig) -> int:
    cfg.validate()
    problem = _build_problem(cfg)
    h, report, pou, g = solve_corona(
        problem, sigma=cfg.sigma, margin=cfg.margin, r_int=cfg.r_int
    )
    os.makedirs(cfg.output_dir, exist_ok=True)
    _write(os.path.join(cfg.output_dir, "report.txt"), serialize_report(report))
    if cfg.dump_fields:
        for j, (h_j, rho_j, g_j) in enumerate(zip(h, pou.rho, g), start=1):
            _write(os.path.join(cfg.output_dir, f"h_{j}.csv"), dump_field_csv(h_j))
            _write(os.path.join(cfg.output_dir, f"rho_{j}.csv"), dump_field_csv(rho_j))
            _write(os.path.join(cfg.output_dir, f"g_{j}.csv"), dump_field_csv(g_j))
    print(f"solved: residual_sup_full = {report.residual_sup_full:.3e}, "
          f"max holo defect = {max(report.holo_defect):.3e}")
    print(f"report written to {os.path.join(cfg.output_dir, 'report.txt')}")
    return 0


def cmd_verify(cfg: RunConfig, fields_dir: str) -> int:
    cfg.validate()
    problem = _build_problem(cfg)
    h = []
    for j in range(1, problem.m + 1):
        path = os.path.join(fields_dir, f"h_{j}.csv")
        if not os.path.exists(path):
            raise CliError(f"missing field dump {path}")
        with open(path, encoding="utf-8") as fh:
            try:
                h.append(load_field_csv(fh.read(), problem.grid))
            except FieldFormatError as exc:
                raise FieldFormatError(f"{path}: {exc}") from exc
    report = verify_solution(problem, h, cfg.r_int)
    sys.stdout.write(serialize_report(report))
    return 0


def _parse_resolutions(text: str) -> list[tuple[int, int]]:
    out = []
    for token in text.split(","):
        token = token.strip()
        parts = token.split("x")
        if len(parts) != 2:
            raise CliError(f"bad resolution {token!r}; expected like 64x128")
        try:
            out.append((int(parts[0]), int(parts[1])))
        except ValueError as exc:
            raise CliError(f"bad resolution {token!r}: {exc}") from exc
    return out


def cmd_sweep(cfg: RunConfig, resolutions: list[tuple[int, int]]) -> int:
    if len(resolutions) < 2:
        raise CliError("sweep needs at least two resolutions")
    cfg.validate()
    rows = ["resolution,residual_sup,max_holo_defect,solver_sup_ratio"]
    for n_r, n_theta in resolutions:
        res_cfg = RunConfig(**{**cfg.__dict__, "n_r": n_r, "n_theta": n_theta})
        label = f"{n_r}x{n_theta}"
        try:
            problem = _build_problem(res_cfg)
            _, report, _, _ = solve_corona(
                problem, sigma=cfg.sigma, margin=cfg.margin, r_int=cfg.r_int
            )
            st = report.solver_stats
            if st is not None and st.max_input_sup > 0:
                ratio = st.max_output_sup / st.max_input_sup
            else:
                ratio = float("nan")
            rows.append(
                f"{label},{report.residual_sup_full:.17g},"
                f"{max(report.holo_defect):.17g},{ratio:.17g}"
            )
        except Exception as exc:  # per-row failure: record and continue
            print(f"sweep row {label} failed: {exc}", file=sys.stderr)
            rows.append(f"{label},nan,nan,nan")
    table = "\n".join(rows) + "\n"
    os.makedirs(cfg.output_dir, exist_ok=True)
    _write(os.path.join(cfg.output_dir, "sweep.csv"), table)
    sys.stdout.write(table)
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # route usage errors to exit status 1
        raise CliError(message)


def _load_cfg(args) -> RunConfig:
    if args.config is not None:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = parse_config(fh.read())
        except OSError as exc:
            raise CliError(f"cannot read config {args.config}: {exc}") from exc
    else:
        cfg = RunConfig()
    if getattr(args, "demo", None) is not None:
        cfg.demo = args.demo
    if getattr(args, "out", None) is not None:
        cfg.output_dir = args.out
    if getattr(args, "dump_fields", False):
        cfg.dump_fields = True
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = _Parser(prog="coronadisc", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve a corona problem end to end")
    p_solve.add_argument("--config", help="flat key = value config file")
    p_solve.add_argument("--demo", help="compiled-in demo name")
    p_solve.add_argument("--out", help="output directory (default from config)")
    p_solve.add_argument("--dump-fields", action="store_true", dest="dump_fields")

    p_verify = sub.add_parser("verify", help="re-verify dumped solution fields")
    p_verify.add_argument("--config", help="flat key = value config file")
    p_verify.add_argument("--demo", help="compiled-in demo name")
    p_verify.add_argument("--fields", required=True, help="directory with h_<j>.csv dumps")

    p_sweep = sub.add_parser("sweep", help="convergence table over resolutions")
    p_sweep.add_argument("--config", help="flat key = value config file")
    p_sweep.add_argument("--demo", help="compiled-in demo name")
    p_sweep.add_argument("--resolutions", required=True, help="comma list like 64x128,128x256")
    p_sweep.add_argument("--out", help="output directory")

    try:
        args = parser.parse_args(argv)
        cfg = _load_cfg(args)
        if args.command == "solve":
            return cmd_solve(cfg)
        if args.command == "verify":
            return cmd_verify(cfg, args.fields)
        return cmd_sweep(cfg, _parse_resolutions(args.resolutions))
    except CoronaHypothesisError as exc:
        print(f"hypothesis failed ({exc.stage}): {exc}", file=sys.stderr)
        print(f"worst point: z = {exc.worst_point:.6g}", file=sys.stderr)
        return 2
    except (CliError, ConfigError, SpecError, GridError, FieldFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # internal failure
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
