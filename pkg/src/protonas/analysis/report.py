"""Deterministic run artifacts: CSV exports and the run summary.

All writers are idempotent (no timestamps, stable ordering) and floats
are serialized with Python's shortest round-trip repr, so re-exporting
the same run produces byte-identical files and parsing a value back
returns the exact double.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

from ..search.run import CandidateRecord, ParetoArchive
from .correlation import TauMatrix

GENE_COLUMNS = (
    ["architecture"]
    + [f"depth_{i}" for i in range(4)]
    + [f"ks_{i}" for i in range(4)]
    + ["width"]
    + [f"sparsity_{i}" for i in range(4)]
)
COST_COLUMNS = ["flops", "rom_bytes", "ram_bytes"]
OBJECTIVE_COLUMNS = ["obj_flops", "obj_neg_meco", "obj_neg_zico", "obj_neg_naswot", "obj_neg_snip"]
PROXY_COLUMNS = ["meco", "zico", "naswot", "snip"]

FRONT_COLUMNS = ["trial", "seed"] + GENE_COLUMNS + COST_COLUMNS + OBJECTIVE_COLUMNS + PROXY_COLUMNS


def _record_row(r: CandidateRecord) -> list:
    genes = (
        [r.genes.architecture]
        + list(r.genes.group_depth)
        + list(r.genes.kernel_stride)
        + [r.genes.width_multiplier]
        + list(r.genes.pruning_sparsity)
    )
    costs = [r.costs.flops, r.costs.rom_bytes, r.costs.ram_bytes]
    proxies = [r.proxies.meco, r.proxies.zico, r.proxies.naswot, r.proxies.snip]
    return [r.trial_index, r.seed] + genes + costs + list(r.objectives) + proxies


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_front_csv(path, records: list[CandidateRecord]) -> None:
    """One row per feasible scored record; header only when empty."""
    _write_csv(Path(path), FRONT_COLUMNS, [_record_row(r) for r in records])


def write_tau_csv(path, tau: TauMatrix) -> None:
    header = ["series"] + list(tau.labels)
    rows = [
        [label] + [float(v) for v in tau.values[i]] for i, label in enumerate(tau.labels)
    ]
    _write_csv(Path(path), header, rows)


def config_digest(echo: dict) -> str:
    return hashlib.sha256(
        json.dumps(echo, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()


def write_summary(path, echo: dict, archive: ParetoArchive, extra: dict | None = None) -> dict:
    """Run summary: config echo plus result counts; returns the document."""
    feasible = sum(1 for r in archive.records if r.feasibility.feasible)
    doc = {
        "config": echo,
        "config_hash": config_digest(echo),
        "counts": {
            "trials": len(archive.records),
            "feasible": feasible,
            "pareto": len(archive.pareto_indices),
        },
        "no_feasible_candidates": feasible == 0,
    }
    if extra:
        doc.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return doc


def export_report(
    archive: ParetoArchive,
    selection: list[int] | None,
    tau: TauMatrix | None,
    outdir,
    echo: dict | None = None,
) -> dict[str, Path]:
    """Write the standard artifact set into outdir.

    selection holds indices into archive.pareto_records() order.  Parts
    that are None are skipped.  Returns the paths written.
    """
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    written: dict[str, Path] = {}
    front = archive.pareto_records()
    write_front_csv(out / "pareto.csv", front)
    written["pareto"] = out / "pareto.csv"
    if selection is not None:
        chosen = sorted(selection)
        write_front_csv(out / "selection.csv", [front[i] for i in chosen])
        written["selection"] = out / "selection.csv"
    if tau is not None:
        write_tau_csv(out / "tau.csv", tau)
        written["tau"] = out / "tau.csv"
    write_summary(out / "run_summary.json", echo or {}, archive)
    written["summary"] = out / "run_summary.json"
    return written
