"""Command-line front end: basis summaries, tensor export and verification."""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .geometry import GeometryError, ManifoldKind, ManifoldSpec, build_basis
from .tensors import FAMILY_SLOTS, SparseRank3
from .theorems import ABSENT, BracketTable, assemble_bracket_table, compute_family
from . import verify

log = logging.getLogger("vfalgebra")

FAMILIES = BracketTable.FAMILIES
SUITES = tuple(verify.SUITES)
DEFAULTS = {"manifold": "torus", "band": 2, "out": ".", "format": "json"}


@dataclass
class RunConfig:
    manifold: ManifoldKind
    band: int
    conformal: dict = field(default_factory=dict)
    tol: float | None = None
    out: Path = Path(".")
    format: str = "json"

    def __post_init__(self):
        self.manifold = ManifoldKind(self.manifold)
        if self.band < 1:
            raise ValueError("band must be at least 1")
        if self.tol is not None and not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if self.format not in ("json", "csv"):
            raise ValueError("format must be json or csv")
        self.out = Path(self.out)

    @property
    def spec(self):
        return ManifoldSpec(self.manifold, self.band, self.conformal)


def parse_conformal(items):
    """["c:1,0=0.1", ...] -> {"c:1,0": 0.1}."""
    out = {}
    for item in items:
        label, sep, amp = item.partition("=")
        if not sep:
            raise ValueError(f"conformal coefficient {item!r} is not LABEL=AMPLITUDE")
        out[label.strip()] = float(amp)
    return out


def read_config_file(path):
    """Key-value file (``key = value`` lines, ``#`` comments) as a dict of strings."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.read_string("[run]\n" + Path(path).read_text())
    return dict(parser["run"])


def _resolve(args):
    """Flags override the config file, which overrides the defaults."""
    values = dict(DEFAULTS)
    conformal = {}
    if args.config:
        file_values = read_config_file(args.config)
        conformal = parse_conformal(file_values.pop("conformal", "").split())
        for key in ("tol", "band"):
            if key in file_values:
                values[key] = float(file_values.pop(key)) if key == "tol" else int(file_values.pop(key))
        unknown = set(file_values) - set(DEFAULTS)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        values.update(file_values)
    for key in ("manifold", "band", "out", "format", "tol"):
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    if args.conformal:
        conformal = parse_conformal(args.conformal)
    return RunConfig(
        manifold=values["manifold"],
        band=int(values["band"]),
        conformal=conformal,
        tol=values.get("tol"),
        out=values["out"],
        format=values["format"],
    )


def _write(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def cmd_basis(config: RunConfig, stdout=None):
    stdout = stdout or sys.stdout
    basis = build_basis(config.spec)
    summary = basis.to_json()
    path = _write(config.out / "basis.json", json.dumps(summary, indent=1) + "\n")
    print(f"{len(basis)} modes, {len(basis.harmonic_fields)} harmonic fields -> {path}", file=stdout)
    return 0


def export_tensor(tensor: SparseRank3, fmt):
    text = tensor.to_json(with_family=True) if fmt == "json" else tensor.to_csv(with_family=True)
    return text if text.endswith("\n") else text + "\n"


def cmd_constants(config: RunConfig, families, stdout=None):
    stdout = stdout or sys.stdout
    basis = build_basis(config.spec)
    for name in families:
        tensor = compute_family(basis, name)
        if tensor.status == ABSENT:
            print(f"warning: {name} is empty: {tensor.status}", file=sys.stderr)
        path = _write(config.out / f"{name}.{config.format}", export_tensor(tensor, config.format))
        print(f"{name}: {len(tensor)} entries -> {path}", file=stdout)
    return 0


def load_tensor_file(path, family=None):
    """Read an exported tensor (JSON or CSV, with or without a family column)."""
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".csv":
        records = list(csv.DictReader(text.splitlines()))
    else:
        records = json.loads(text)
    if not isinstance(records, list):
        raise ValueError("tensor file must hold a list of records")
    names = {r.get("family") for r in records if r.get("family")}
    if family is None:
        if len(names) != 1:
            family = path.stem
        else:
            family = names.pop()
    if family not in FAMILY_SLOTS:
        raise ValueError(f"cannot tell which family {path.name} holds")
    return SparseRank3.from_records(family, records)


def check_file_report(config: RunConfig, path, family=None, table=None):
    """Compare a stored tensor with a fresh computation and with its symmetry class."""
    tol = config.tol if config.tol is not None else verify.DEFAULT_TOLERANCE[config.manifold]
    report = verify.VerificationReport("check-file", config.manifold.value, config.band, tol)
    try:
        stored = load_tensor_file(path, family)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        report.status = f"unreadable tensor file: {exc}"
        report.add(f"parse {Path(path).name}", float("inf"))
        return report
    basis = table.basis if table else build_basis(config.spec)
    fresh = table.family(stored.family) if table else compute_family(basis, stored.family)
    err, where = stored.difference(fresh)
    where = "-" if where is None else ", ".join(m.label for m in where)
    report.add(f"{stored.family} entries vs recomputation", err, detail=f"worst at ({where})")
    for fam, perm, sign, what in verify.SYMMETRY_CLASSES:
        if fam == stored.family:
            err, where = stored.permutation_violation(perm, sign)
            where = "-" if where is None else ", ".join(m.label for m in where)
            report.add(f"{fam} {what}", err, detail=f"worst at ({where})")
    return report


def cmd_verify(config: RunConfig, suites, check_files=(), family=None, stdout=None):
    stdout = stdout or sys.stdout
    basis = build_basis(config.spec)
    table = assemble_bracket_table(basis)
    reports = []
    for name in suites:
        if name == "cross":
            dump = []
            reports.append((name, verify.cross_validate(basis, table, config.tol, dump=dump)))
            _write(config.out / "oracle_dump.json", json.dumps(dump, indent=1) + "\n")
        else:
            reports.append((name, verify.SUITES[name](basis, table, config.tol)))
    for p in check_files:
        reports.append((f"check_{Path(p).stem}", check_file_report(config, p, family, table)))
    ok = True
    for name, rep in reports:
        stem = f"report_{name}"
        _write(config.out / f"{stem}.json", rep.to_json() + "\n")
        _write(config.out / f"{stem}.txt", rep.to_text() + "\n")
        print(rep.to_text(), file=stdout)
        if rep.status.startswith("no admissible"):
            print(f"warning: {rep.suite}: {rep.status}", file=sys.stderr)
        ok = ok and rep.passed
    return 0 if ok else 1


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--manifold", choices=[k.value for k in ManifoldKind])
    common.add_argument("--band", type=int, help="largest |k|^2 on the tori, largest degree l on the sphere")
    common.add_argument(
        "--conformal", action="append", metavar="LABEL=AMP", help="conformal-factor mode amplitude (ctorus), repeatable"
    )
    common.add_argument("--tol", type=float, help="override the suite tolerance")
    common.add_argument("--out", help="output directory")
    common.add_argument("--format", choices=["json", "csv"])
    common.add_argument("--config", help="key = value file; flags take precedence")

    parser = argparse.ArgumentParser(prog="vfalgebra", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("basis", parents=[common], help="write the mode list and eigenvalues")
    p = sub.add_parser("constants", parents=[common], help="compute and export structure-constant families")
    p.add_argument("--family", action="append", choices=FAMILIES, help="repeatable; default all")
    p = sub.add_parser("verify", parents=[common], help="run verification suites")
    p.add_argument("--suite", action="append", choices=SUITES, help="repeatable; default all")
    p.add_argument("--check-file", action="append", default=[], help="stored tensor file to re-check, repeatable")
    p.add_argument("--family", choices=FAMILIES, help="family held by --check-file when the file does not say")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        config = _resolve(args)
        config.spec
    except (ValueError, GeometryError, OSError) as exc:
        parser.error(str(exc))
    if args.command == "basis":
        return cmd_basis(config)
    if args.command == "constants":
        return cmd_constants(config, args.family or list(FAMILIES))
    suites = args.suite or ([] if args.check_file else list(SUITES))
    return cmd_verify(config, suites, args.check_file, args.family)


if __name__ == "__main__":
    sys.exit(main())
