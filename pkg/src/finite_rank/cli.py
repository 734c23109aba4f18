"""Command-line front end.

Exit codes: 0 success, 1 oracle check failed, 2 invalid configuration,
3 solver routes disagree, 4 fixture comparison failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import oracle, tables
from .basis import build_basis_table
from .potential import PotentialSpec
from .solver import PathDisagreementError, SolverConfig, SpectrumResult, solve_spectrum
from .spectrum import evaluate_psi, lippmann_schwinger_residual, recover_states

log = logging.getLogger("finite_rank")

CSV_HEADER = ["lambda", "P", "N", "R", "i", "E", "sector_l", "residual"]
EXIT_ORACLE, EXIT_CONFIG, EXIT_PATHS, EXIT_COMPARE = 1, 2, 3, 4


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending field."""


@dataclass(frozen=True)
class Case:
    coupling: float
    power: int
    n_rank: int
    r_rank: int

    @property
    def key(self):
        return (self.coupling, self.power, self.n_rank, self.r_rank)


@dataclass
class GridSpec:
    rho_max: float = 4.0
    points: int = 41
    costheta: float = 1.0


@dataclass
class RunConfig:
    cases: list[Case] = field(default_factory=list)
    window: tuple[float, float] | None = None
    root_tol: float = 1e-10
    pole_exclusion: float = 1e-6
    compare_tol: float = tables.DEFAULT_TOL
    max_mismatch_fraction: float = tables.DEFAULT_MAX_MISMATCH_FRACTION
    format: str = "csv"
    out: str | None = None
    fixtures: str | None = None
    verify: bool = False
    emit_states: bool = False
    grid: GridSpec | None = None
    jobs: int = 1

    def validate(self) -> None:
        if not self.cases:
            raise ConfigError("cases: at least one case is required")
        for idx, case in enumerate(self.cases):
            where = f"cases[{idx}]"
            if case.power not in (3, 4):
                raise ConfigError(f"{where}.P: power must be 3 or 4, got {case.power}")
            if not case.coupling > 0:
                raise ConfigError(f"{where}.lambda: coupling must be positive, got {case.coupling}")
            if case.n_rank < 1:
                raise ConfigError(f"{where}.N: rank must be >= 1, got {case.n_rank}")
            if case.r_rank < case.n_rank:
                raise ConfigError(
                    f"{where}.R: R >= N is required (got N={case.n_rank}, R={case.r_rank})"
                )
        if self.window is not None and not self.window[0] < self.window[1]:
            raise ConfigError(f"window: lo must be below hi, got {self.window}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format: expected csv or json, got {self.format!r}")
        if self.jobs < 1:
            raise ConfigError(f"jobs: must be >= 1, got {self.jobs}")
        for name in ("root_tol", "pole_exclusion", "compare_tol"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"tolerances.{name}: must be positive")

    def solver_config(self, case: Case) -> SolverConfig:
        return SolverConfig(
            case.n_rank,
            case.r_rank,
            window=self.window,
            root_tol=self.root_tol,
            pole_exclusion=self.pole_exclusion,
        )


def reference_cases() -> list[Case]:
    return [
        Case(lam, p, n, r)
        for lam in tables.REFERENCE_LAMBDAS
        for p in tables.REFERENCE_POWERS
        for n, r in tables.REFERENCE_COLUMNS
    ]


def _parse_window(text) -> tuple[float, float]:
    if isinstance(text, (list, tuple)):
        lo, hi = text
    else:
        try:
            lo, hi = str(text).split(":")
        except ValueError:
            raise ConfigError(f"window: expected 'lo:hi', got {text!r}") from None
    try:
        return float(lo), float(hi)
    except ValueError:
        raise ConfigError(f"window: non-numeric bound in {text!r}") from None


def config_from_json(data: dict) -> RunConfig:
    cfg = RunConfig()
    try:
        cfg.cases = [
            Case(float(c["lambda"]), int(c["P"]), int(c["N"]), int(c["R"])) for c in data.get("cases", [])
        ]
    except KeyError as exc:
        raise ConfigError(f"cases: missing field {exc.args[0]}") from None
    if data.get("window") is not None:
        cfg.window = _parse_window(data["window"])
    tol = data.get("tolerances") or {}
    for name in ("root_tol", "pole_exclusion", "compare_tol", "max_mismatch_fraction"):
        if name in tol:
            setattr(cfg, name, float(tol[name]))
    for name in ("format", "out", "fixtures"):
        if name in data:
            setattr(cfg, name, data[name])
    cfg.verify = bool(data.get("verify", False))
    cfg.emit_states = bool(data.get("emit_states", False))
    cfg.jobs = int(data.get("jobs", 1))
    if data.get("grid"):
        cfg.grid = GridSpec(**data["grid"])
    return cfg


def build_config(args, default_cases) -> RunConfig:
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"config: cannot read {args.config}: {exc}") from None
        cfg = config_from_json(data)
    else:
        cfg = RunConfig()
    if any(v is not None for v in (args.coupling, args.power, args.n_rank, args.r_rank)):
        base = cfg.cases[0] if cfg.cases else Case(0.01, 4, 4, 4)
        n_rank = base.n_rank if args.n_rank is None else args.n_rank
        if args.r_rank is not None:
            r_rank = args.r_rank
        else:
            r_rank = base.r_rank if args.n_rank is None else n_rank
        cfg.cases = [
            Case(
                base.coupling if args.coupling is None else args.coupling,
                base.power if args.power is None else args.power,
                n_rank,
                r_rank,
            )
        ]
    if not cfg.cases:
        cfg.cases = default_cases()
    if args.window is not None:
        cfg.window = _parse_window(args.window)
    if args.tol is not None:
        cfg.compare_tol = args.tol
    if args.format is not None:
        cfg.format = args.format
    if args.out is not None:
        cfg.out = args.out
    if args.fixtures is not None:
        cfg.fixtures = args.fixtures
    if args.jobs is not None:
        cfg.jobs = args.jobs
    cfg.validate()
    return cfg


def run_cases(cfg: RunConfig) -> list[tuple[Case, SpectrumResult]]:
    """Solve every case; order of the output follows the input order."""

    def one(case):
        return case, solve_spectrum(cfg.solver_config(case), PotentialSpec(case.power, case.coupling))

    if cfg.jobs == 1:
        return [one(c) for c in cfg.cases]
    with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
        return list(pool.map(one, cfg.cases))


def result_rows(solved):
    for case, result in solved:
        for i, root in enumerate(result.roots, start=1):
            yield case, i, root


def format_csv(solved) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for case, i, root in result_rows(solved):
        writer.writerow(
            [
                f"{case.coupling:g}",
                case.power,
                case.n_rank,
                case.r_rank,
                i,
                f"{root.energy:.6f}",
                root.sector_l,
                f"{root.residual:.3e}",
            ]
        )
    return buf.getvalue()


def format_json(solved) -> str:
    blocks = []
    for case, result in solved:
        blocks.append(
            {
                "lambda": case.coupling,
                "P": case.power,
                "N": case.n_rank,
                "R": case.r_rank,
                "window": list(result.window),
                "roots": [
                    {
                        "i": i,
                        "E": root.energy,
                        "E_scan": root.scan_energy,
                        "sector_l": root.sector_l,
                        "residual": root.residual,
                        "degenerate": root.degenerate,
                    }
                    for i, root in enumerate(result.roots, start=1)
                ],
            }
        )
    return json.dumps({"results": blocks}, indent=2) + "\n"


def computed_from_solved(solved) -> dict:
    return {
        case.key: [tables.ComputedRoot(i, r.energy, r.scan_energy) for i, r in enumerate(res.roots, start=1)]
        for case, res in solved
    }


def load_results(path: str) -> dict:
    """Read results written by ``solve``/``sweep`` in JSON or CSV form."""
    text = Path(path).read_text()
    out: dict = {}
    if text.lstrip().startswith("{"):
        for block in json.loads(text)["results"]:
            key = (float(block["lambda"]), int(block["P"]), int(block["N"]), int(block["R"]))
            out[key] = [tables.ComputedRoot(r["i"], r["E"], r.get("E_scan")) for r in block["roots"]]
        return out
    for rec in csv.DictReader(io.StringIO(text)):
        key = (float(rec["lambda"]), int(rec["P"]), int(rec["N"]), int(rec["R"]))
        out.setdefault(key, []).append(tables.ComputedRoot(int(rec["i"]), float(rec["E"])))
    return out


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_results(cfg: RunConfig, solved) -> None:
    _emit(format_csv(solved) if cfg.format == "csv" else format_json(solved), cfg.out)


def _compare_solved(cfg: RunConfig, solved) -> int:
    fixture = tables.load_fixtures(cfg.fixtures)
    wanted = {case.key for case, _ in solved}
    subset = tables.FixtureTable([row for row in fixture.rows if row.case in wanted])
    if not subset.rows:
        log.info("no fixture rows for these cases; comparison skipped")
        return 0
    report = tables.compare(computed_from_solved(solved), subset, cfg.compare_tol, cfg.max_mismatch_fraction)
    for line in report.lines():
        print(line, file=sys.stderr)
    return 0 if report.passed else EXIT_COMPARE


def cmd_solve(cfg: RunConfig) -> int:
    solved = run_cases(cfg)
    _emit_results(cfg, solved)
    if cfg.emit_states:
        _emit_states_alongside(cfg, solved)
    if cfg.fixtures:
        return _compare_solved(cfg, solved)
    return 0


def cmd_sweep(cfg: RunConfig) -> int:
    solved = run_cases(cfg)
    _emit_results(cfg, solved)
    if cfg.emit_states:
        _emit_states_alongside(cfg, solved)
    status = _compare_solved(cfg, solved)
    if cfg.verify:
        status = status or _verify_solved(solved)
    return status


def cmd_compare(results_path: str, cfg: RunConfig) -> int:
    fixture = tables.load_fixtures(cfg.fixtures)
    report = tables.compare(load_results(results_path), fixture, cfg.compare_tol, cfg.max_mismatch_fraction)
    _emit("\n".join(report.lines()) + "\n", cfg.out)
    return 0 if report.passed else EXIT_COMPARE


def _verify_solved(solved) -> int:
    ok = True

    def line(name, passed, detail):
        nonlocal ok
        ok = ok and passed
        print(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")

    quad = oracle.quadrature_report()
    line("quadrature", quad.passed(1e-12), f"max relative deviation {quad.max_deviation:.2e}")
    for case, result in solved:
        spec = PotentialSpec(case.power, case.coupling)
        tag = f"lambda={case.coupling:g} P={case.power} N={case.n_rank} R={case.r_rank}"
        paths = float(np.max(np.abs(result.energies - result.scan_energies))) if result.roots else 0.0
        line(f"paths {tag}", paths <= 1e-8, f"max |eigen - scan| {paths:.2e}")
        if case.n_rank == case.r_rank and result.config.window is None:
            rep = oracle.galerkin_report(result.energies, case.n_rank, spec)
            line(f"galerkin {tag}", rep.passed(1e-10), f"max deviation {rep.max_deviation:.2e}")
        states = recover_states(result, "full")
        worst = max((lippmann_schwinger_residual(s, result.config, spec) for s in states), default=0.0)
        line(f"residual {tag}", worst <= 1e-7, f"max Lippmann-Schwinger residual {worst:.2e}")
    return 0 if ok else EXIT_ORACLE


def cmd_verify(cfg: RunConfig) -> int:
    return _verify_solved(run_cases(cfg))


def state_records(solved, grid: GridSpec | None = None) -> list[dict]:
    records = []
    for case, result in solved:
        table = build_basis_table(case.r_rank)
        for form in ("truncated", "full"):
            for i, state in enumerate(recover_states(result, form), start=1):
                rec = {
                    "lambda": case.coupling,
                    "P": case.power,
                    "N": case.n_rank,
                    "R": case.r_rank,
                    "i": i,
                    "E": state.energy,
                    "sector_l": state.sector_l,
                    "form": form,
                    "coefficients": [
                        {"n": n, "k": table.states[n - 1].k, "l": table.states[n - 1].l, "c": float(c)}
                        for n, c in enumerate(state.coefficients, start=1)
                        if c != 0.0
                    ],
                }
                if grid is not None:
                    rho = np.linspace(0.0, grid.rho_max, grid.points)
                    psi = evaluate_psi(state, rho, grid.costheta)
                    rec["samples"] = {
                        "costheta": grid.costheta,
                        "rho": rho.tolist(),
                        "psi": np.broadcast_to(psi, rho.shape).tolist(),
                    }
                records.append(rec)
    return records


def format_states(records: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps({"states": records}, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["lambda", "P", "N", "R", "i", "E", "sector_l", "form", "n", "k", "l", "c"])
    for rec in records:
        for c in rec["coefficients"]:
            writer.writerow(
                [f"{rec['lambda']:g}", rec["P"], rec["N"], rec["R"], rec["i"], f"{rec['E']:.6f}",
                 rec["sector_l"], rec["form"], c["n"], c["k"], c["l"], f"{c['c']:.12e}"]
            )
    return buf.getvalue()


def _emit_states_alongside(cfg: RunConfig, solved) -> None:
    text = format_states(state_records(solved, cfg.grid), "json")
    if cfg.out:
        out = Path(cfg.out)
        out.with_name(out.stem + "_states.json").write_text(text)
    else:
        sys.stdout.write(text)


def cmd_states(cfg: RunConfig) -> int:
    solved = run_cases(cfg)
    _emit(format_states(state_records(solved, cfg.grid), cfg.format), cfg.out)
    return 0


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON run configuration; flags override it")
    p.add_argument("--lambda", dest="coupling", type=float)
    p.add_argument("--power", type=int, choices=(3, 4))
    p.add_argument("--n-rank", type=int)
    p.add_argument("--r-rank", type=int)
    p.add_argument("--window", help="energy window lo:hi in units of hbar*omega/2")
    p.add_argument("--tol", type=float, help="fixture comparison tolerance")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--out")
    p.add_argument("--fixtures", help="fixture CSV file or directory ('builtin' for the bundled tables)")
    p.add_argument("--jobs", type=int)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="finite-rank", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in [
        ("solve", "solve one case (or the cases of --config)"),
        ("sweep", "run a sweep, by default the six reference tables, and compare with fixtures"),
        ("verify", "run oracle cross-checks"),
        ("states", "emit eigenstate expansions and optional wavefunction samples"),
    ]:
        p = sub.add_parser(name, help=text)
        _add_common(p)
        if name == "sweep":
            p.add_argument("--verify", action="store_true", help="also run oracle checks")
        if name in ("solve", "sweep"):
            p.add_argument("--emit-states", action="store_true", help="also write state expansions")
        if name == "states":
            p.add_argument("--grid", help="rho_max:points[:costheta] sample grid")
    p = sub.add_parser("compare", help="compare a results file (JSON or CSV) with fixtures")
    p.add_argument("results")
    _add_common(p)
    p.add_argument("--max-mismatch-fraction", type=float)
    return parser


def _parse_grid(text: str) -> GridSpec:
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise ConfigError(f"grid: expected rho_max:points[:costheta], got {text!r}")
    try:
        grid = GridSpec(float(parts[0]), int(parts[1]), float(parts[2]) if len(parts) == 3 else 1.0)
    except ValueError:
        raise ConfigError(f"grid: malformed value {text!r}") from None
    if grid.points < 1 or grid.rho_max < 0 or abs(grid.costheta) > 1:
        raise ConfigError(f"grid: out-of-range value {text!r}")
    return grid


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "solve":
            cfg = build_config(args, lambda: [Case(0.01, 4, 4, 4)])
            cfg.emit_states = cfg.emit_states or args.emit_states
            return cmd_solve(cfg)
        if args.command == "sweep":
            cfg = build_config(args, reference_cases)
            cfg.verify = cfg.verify or args.verify
            cfg.emit_states = cfg.emit_states or args.emit_states
            return cmd_sweep(cfg)
        if args.command == "verify":
            return cmd_verify(build_config(args, reference_cases))
        if args.command == "states":
            cfg = build_config(args, lambda: [Case(0.01, 4, 4, 4)])
            if args.grid:
                cfg.grid = _parse_grid(args.grid)
            return cmd_states(cfg)
        cfg = build_config(args, reference_cases)
        if args.max_mismatch_fraction is not None:
            cfg.max_mismatch_fraction = args.max_mismatch_fraction
        return cmd_compare(args.results, cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PathDisagreementError as exc:
        print(f"error: solver routes disagree: {exc}", file=sys.stderr)
        return EXIT_PATHS


if __name__ == "__main__":
    sys.exit(main())
