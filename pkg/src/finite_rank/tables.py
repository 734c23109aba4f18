"""Golden energy tables and comparison of computed spectra against them."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

REFERENCE_LAMBDAS = (0.01, 0.1, 1.0)
REFERENCE_POWERS = (3, 4)
REFERENCE_COLUMNS = ((4, 4), (4, 8), (4, 12), (8, 8), (8, 12), (12, 12))
DEFAULT_TOL = 1.5e-3
DEFAULT_MAX_MISMATCH_FRACTION = 0.05
PATH_AGREEMENT = 1e-8

Key = tuple[float, int, int, int]


@dataclass(frozen=True)
class FixtureRow:
    coupling: float
    power: int
    n_rank: int
    r_rank: int
    i: int
    energy: float

    @property
    def case(self) -> Key:
        return (self.coupling, self.power, self.n_rank, self.r_rank)


@dataclass
class FixtureTable:
    rows: list[FixtureRow]

    def __post_init__(self):
        seen = set()
        for row in self.rows:
            key = (*row.case, row.i)
            if key in seen:
                raise ValueError(f"duplicate fixture row {key}")
            seen.add(key)

    def cases(self) -> list[Key]:
        return sorted({row.case for row in self.rows})

    def column(self, case: Key) -> list[FixtureRow]:
        return sorted((r for r in self.rows if r.case == case), key=lambda r: r.i)


def _read_rows(handle) -> list[FixtureRow]:
    return [
        FixtureRow(
            float(rec["lambda"]),
            int(rec["P"]),
            int(rec["N"]),
            int(rec["R"]),
            int(rec["i"]),
            float(rec["E_paper"]),
        )
        for rec in csv.DictReader(handle)
    ]


def load_fixtures(path: str | Path | None = None) -> FixtureTable:
    """Read fixture CSVs from a file, a directory, or the bundled tables."""
    rows: list[FixtureRow] = []
    if path is None or str(path) == "builtin":
        folder = resources.files("finite_rank") / "fixtures"
        for item in sorted(folder.iterdir(), key=lambda p: p.name):
            if item.name.endswith(".csv"):
                with item.open() as fh:
                    rows.extend(_read_rows(fh))
        return FixtureTable(rows)
    path = Path(path)
    files = sorted(path.glob("*.csv")) if path.is_dir() else [path]
    for f in files:
        with open(f, newline="") as fh:
            rows.extend(_read_rows(fh))
    return FixtureTable(rows)


@dataclass(frozen=True)
class ComputedRoot:
    i: int
    energy: float
    scan_energy: float | None = None


@dataclass(frozen=True)
class Mismatch:
    case: Key
    i: int
    computed: float
    reference: float
    scan: float | None

    @property
    def paths_agree(self) -> bool:
        return self.scan is not None and abs(self.scan - self.computed) <= PATH_AGREEMENT


@dataclass
class ComparisonReport:
    checked: int = 0
    mismatches: list[Mismatch] = field(default_factory=list)
    missing: list[tuple] = field(default_factory=list)
    extra: dict[Key, int] = field(default_factory=dict)
    max_mismatch_fraction: float = DEFAULT_MAX_MISMATCH_FRACTION
    tol: float = DEFAULT_TOL

    @property
    def mismatch_fraction(self) -> float:
        return len(self.mismatches) / self.checked if self.checked else 0.0

    @property
    def passed(self) -> bool:
        return (
            not self.missing
            and self.checked > 0
            and self.mismatch_fraction <= self.max_mismatch_fraction
            and all(m.paths_agree for m in self.mismatches)
        )

    def lines(self) -> list[str]:
        out = [
            f"checked {self.checked} entries at tol {self.tol:g}: "
            f"{len(self.mismatches)} mismatches ({100 * self.mismatch_fraction:.1f}%)"
        ]
        for m in self.mismatches:
            lam, p, n, r = m.case
            scan = "n/a" if m.scan is None else f"{m.scan:.9f}"
            out.append(
                f"  MISMATCH lambda={lam:g} P={p} N={n} R={r} i={m.i}: computed {m.computed:.6f} "
                f"reference {m.reference:.3f} scan {scan} paths_agree={m.paths_agree}"
            )
        for key in self.missing:
            out.append(f"  MISSING {key}")
        for (lam, p, n, r), count in sorted(self.extra.items()):
            out.append(f"  info: lambda={lam:g} P={p} N={n} R={r} has {count} roots beyond the table")
        out.append("PASS" if self.passed else "FAIL")
        return out


def compare(
    results: dict[Key, list[ComputedRoot]],
    fixture: FixtureTable,
    tol: float = DEFAULT_TOL,
    max_mismatch_fraction: float = DEFAULT_MAX_MISMATCH_FRACTION,
) -> ComparisonReport:
    """Match computed roots to fixture rows by (case, i).

    Only fixture cases are compared; computed roots with i beyond a column's
    listed rows count as informational extras.
    """
    report = ComparisonReport(max_mismatch_fraction=max_mismatch_fraction, tol=tol)
    for case in fixture.cases():
        column = fixture.column(case)
        if case not in results:
            report.missing.append(case)
            continue
        computed = {root.i: root for root in results[case]}
        for row in column:
            root = computed.get(row.i)
            if root is None:
                report.missing.append((*case, row.i))
                continue
            report.checked += 1
            if abs(root.energy - row.energy) > tol:
                report.mismatches.append(Mismatch(case, row.i, root.energy, row.energy, root.scan_energy))
        extra = len(computed) - len(column)
        if extra > 0:
            report.extra[case] = extra
    return report
