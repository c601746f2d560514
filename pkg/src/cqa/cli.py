"""Command-line front end: ``cqa <command> ...``.

Every command writes JSON (or CSV where noted) to ``--out`` or stdout.  On
failure a JSON object ``{"format_version", "error": {"code", "kind", "message"}}``
goes to stdout and the process exits with the matching code.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .anneal import Schedule, evolve, prepare_initial
from .constraints import (
    InfeasibleError,
    SectorBasis,
    ZParity,
    constraint_as_hamiltonian,
    constraint_from_json,
    gf2_solve,
    sector_basis,
)
from .drivers import FAMILIES, DriverSpec
from .encodings import ENCODINGS, resource_counts
from .pauli import DimensionError, Hamiltonian, commutator_norm, max_dim
from .spectral import ClosureError, magnetization_curve, spectrum_sweep
from .statespace import check_closure

FORMAT_VERSION = 1

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_PARSE = 2
EXIT_DIMENSION = 3
EXIT_INFEASIBLE = 4
EXIT_CLOSURE = 5
EXIT_RUNTIME = 6

COMMANDS = ("driver", "verify", "sector", "spectrum", "magcurve", "anneal", "resources", "gf2")


class CliError(Exception):
    def __init__(self, code: int, kind: str, message: str):
        super().__init__(message)
        self.code, self.kind = code, kind


@dataclass
class RunSpec:
    command: str
    inputs: dict[str, str] = field(default_factory=dict)
    out: str | None = None
    options: dict[str, Any] = field(default_factory=dict)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(EXIT_PARSE, "usage", message)


def _load_json(text_or_path: str) -> Any:
    try:
        if os.path.exists(text_or_path):
            with open(text_or_path) as fh:
                return json.load(fh)
        return json.loads(text_or_path)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(EXIT_PARSE, "parse", f"cannot read JSON from {text_or_path!r}: {exc}") from exc


def _load_constraints(path: str) -> list:
    data = _load_json(path)
    items = data["constraints"] if isinstance(data, dict) else data
    return [constraint_from_json(c) for c in items]


def _load_sector(path: str, n: int) -> SectorBasis:
    data = _load_json(path)
    if isinstance(data, list) or "constraints" in data:
        return sector_basis(_load_constraints(path), n)
    sec = SectorBasis.from_json(data)
    if sec.n_sites != n:
        raise CliError(EXIT_PARSE, "parse", f"sector has {sec.n_sites} sites, Hamiltonian {n}")
    return sec


def _versioned(d: dict) -> dict:
    return {"format_version": FORMAT_VERSION, **d}


def _dump_json(obj: Any) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def _dump_csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


# -- commands ----------------------------------------------------------------


def cmd_driver(a) -> tuple[str, int]:
    spec = DriverSpec.from_json({"family": a.family, "params": _load_json(a.params)})
    return _dump_json(_versioned(spec.build().to_json())), EXIT_OK


def cmd_verify(a) -> tuple[str, int]:
    h = Hamiltonian.from_json(_load_json(a.driver))
    cs = _load_constraints(a.constraints)
    sector = _load_sector(a.sector, h.n_sites) if a.sector else None
    report = check_closure(h, cs, sector).to_json()
    norms = None
    if h.dim <= max_dim():
        norms = [commutator_norm(h, constraint_as_hamiltonian(c, h.n_sites)) for c in cs]
        report["commutator_norms"] = norms
    ok = report["closure"] == "pass" and (norms is None or max(norms, default=0.0) < 1e-12)
    return _dump_json(_versioned(report)), EXIT_OK if ok else EXIT_VERIFY_FAILED


def cmd_sector(a) -> tuple[str, int]:
    sec = sector_basis(_load_constraints(a.constraints), a.n)
    return _dump_json(_versioned(sec.to_json())), EXIT_OK


def cmd_spectrum(a) -> tuple[str, int]:
    hp = Hamiltonian.from_json(_load_json(a.hp))
    hd = Hamiltonian.from_json(_load_json(a.hd))
    sector = _load_sector(a.sector, hp.n_sites) if a.sector else None
    sweep = spectrum_sweep(hp, hd, np.linspace(0.0, 1.0, a.grid), sector, k=a.k)
    k = sweep.energies.shape[1]
    if a.summary:
        with open(a.summary, "w") as fh:
            fh.write(_dump_json(_versioned({"min_gap": sweep.min_gap, "s_star": sweep.s_star, "ground_block": sweep.ground_block})))
    return _dump_csv(["s"] + [f"E{j}" for j in range(k)], sweep.to_rows()), EXIT_OK


def cmd_magcurve(a) -> tuple[str, int]:
    grid = np.linspace(0.0, a.bmax, a.points)
    curve = magnetization_curve(a.n, grid, method=a.method)
    return _dump_csv(["B_over_J", "Mz", "E0_density"], curve.to_rows()), EXIT_OK


def cmd_anneal(a) -> tuple[str, int]:
    hp = Hamiltonian.from_json(_load_json(a.hp))
    hd = Hamiltonian.from_json(_load_json(a.hd))
    sector = _load_sector(a.sector, hp.n_sites) if a.sector else None
    psi0 = prepare_initial(hd, "sector_ground" if sector else "global_ground", sector=sector)
    sched = Schedule(a.T, tol=a.tol, n_checkpoints=a.checkpoints)
    if sector is not None and a.space == "full":
        res = evolve(hp, hd, psi0, sched, leak_sector=sector)
    else:
        res = evolve(hp, hd, psi0, sched, sector=sector)
    if a.csv:
        with open(a.csv, "w") as fh:
            fh.write(_dump_csv(["t", "s", "energy", "leakage"], res.to_rows()))
    return _dump_json(_versioned(res.to_json())), EXIT_OK


def cmd_resources(a) -> tuple[str, int]:
    return _dump_json(_versioned({"encoding": a.encoding, "n": a.n, **resource_counts(a.encoding, a.n)})), EXIT_OK


def cmd_gf2(a) -> tuple[str, int]:
    data = _load_json(a.parities)
    items = data["parities"] if isinstance(data, dict) else data
    parities = [ZParity(tuple(p["support"]), int(p.get("target", 1))) for p in items]
    n = data.get("n") if isinstance(data, dict) else None
    return _dump_json(_versioned(gf2_solve(parities, n).to_json())), EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cqa", description="Constraint-commuting drivers for constrained quantum annealing.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help):
        sp_ = sub.add_parser(name, help=help)
        sp_.add_argument("--out", help="output path (default: stdout)")
        sp_.set_defaults(fn=fn)
        return sp_

    s = add("driver", cmd_driver, "build a driver Hamiltonian")
    s.add_argument("--family", required=True, choices=FAMILIES)
    s.add_argument("--params", required=True, help="JSON text or path")

    s = add("verify", cmd_verify, "closure, commutation and connectivity report")
    s.add_argument("--driver", required=True)
    s.add_argument("--constraints", required=True)
    s.add_argument("--sector")

    s = add("sector", cmd_sector, "enumerate a charge sector")
    s.add_argument("--constraints", required=True)
    s.add_argument("--n", type=int, required=True)

    s = add("spectrum", cmd_spectrum, "lowest levels along the anneal (CSV)")
    s.add_argument("--hp", required=True)
    s.add_argument("--hd", required=True)
    s.add_argument("--grid", type=int, required=True)
    s.add_argument("--sector")
    s.add_argument("--k", type=int, default=4)
    s.add_argument("--summary", help="write min-gap JSON here")

    s = add("magcurve", cmd_magcurve, "XY-ring magnetization staircase (CSV)")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--bmax", type=float, default=4.0)
    s.add_argument("--points", type=int, default=81)
    s.add_argument("--method", choices=("sector", "full", "full_direct"), default="sector")

    s = add("anneal", cmd_anneal, "time evolution along H(s)")
    s.add_argument("--hp", required=True)
    s.add_argument("--hd", required=True)
    s.add_argument("--T", type=float, required=True)
    s.add_argument("--sector")
    s.add_argument("--space", choices=("sector", "full"), default="sector")
    s.add_argument("--tol", type=float, default=1e-3)
    s.add_argument("--checkpoints", type=int, default=64)
    s.add_argument("--csv", help="also write checkpoints as CSV")

    s = add("resources", cmd_resources, "qubit/edge counts per encoding")
    s.add_argument("--encoding", required=True, choices=ENCODINGS)
    s.add_argument("--n", type=int, required=True)

    s = add("gf2", cmd_gf2, "solve a mod-2 parity system")
    s.add_argument("--parities", required=True)
    return p


def run(argv: Sequence[str] | None = None, stdout=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    try:
        args = build_parser().parse_args(argv)
        text, code = args.fn(args)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            stdout.write(text)
        return code
    except CliError as exc:
        err = (exc.code, exc.kind, str(exc))
    except DimensionError as exc:
        err = (EXIT_DIMENSION, "dimension", str(exc))
    except InfeasibleError as exc:
        err = (EXIT_INFEASIBLE, "infeasible", str(exc))
    except ClosureError as exc:
        err = (EXIT_CLOSURE, "closure", str(exc))
    except (KeyError, TypeError, ValueError) as exc:
        err = (EXIT_PARSE, "invalid_input", f"{type(exc).__name__}: {exc}")
    except Exception as exc:  # noqa: BLE001
        err = (EXIT_RUNTIME, "runtime", f"{type(exc).__name__}: {exc}")
    code, kind, msg = err
    stdout.write(_dump_json(_versioned({"error": {"code": code, "kind": kind, "message": msg}})))
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
