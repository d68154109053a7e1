"""Aggregate JSONL records into role-specific tables, machine-readable files and figures."""

from __future__ import annotations

import csv
import io
import json
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from planeval.errors import EmptyInput, MixedRoles
from planeval.eval_core import Role
from planeval.harness.records import EvalRecord

GROUP_KEYS = ("environment", "condition", "agent", "mode")

COLUMNS = {
    Role.SOLVER: ["Completeness", "Feasibility", "Optimality", "Diversity", "CostUtility", "PassRate"],
    Role.VERIFIER: ["Feasibility", "Optimality", "PassRate"],
    Role.HEURISTIC: ["Hit@1", "Hit@2", "Hit@3", "ComparisonAccuracy", "Malformed"],
}

DEFINITIONS = {
    Role.SOLVER: [
        "Completeness: course = every section assigned; fitness = share of iterations with a parseable plan.",
        "Feasibility: course = all constraints hold; fitness = share of iterations with an admissible plan.",
        "Optimality: course = total slack equals the exact optimum; fitness = mean satisfaction/10 over the last 3 iterations.",
        "Diversity: fitness only, share of exercises used at least once in the episode.",
        "CostUtility: fitness only, first iteration reaching the configured share of the best attainable satisfaction.",
        "PassRate: course = feasible with seat ratio within delta; fitness = same as Feasibility.",
    ],
    Role.VERIFIER: [
        "Feasibility: verdict on constraint satisfaction matches ground truth.",
        "Optimality: verdict on the seat threshold matches ground truth, over truly feasible plans only.",
        "PassRate: every graded part of the verdict is correct.",
    ],
    Role.HEURISTIC: [
        "Hit@k: the oracle-best candidate is within the agent's top k.",
        "ComparisonAccuracy: pairwise order agreement with the oracle ranking.",
        "Malformed: share of replies without a complete permutation of the labels.",
    ],
}


def _mean(values: list[float]) -> float | None:
    return sum(values) / len(values) if values else None


def _record_metrics(rec: EvalRecord, role: Role) -> dict[str, float | None]:
    o = rec.outcome
    if role is Role.SOLVER:
        if rec.environment == "fitness":
            return {
                "Completeness": o["delivery_rate"],
                "Feasibility": o["feasibility"],
                "Optimality": o["optimality"],
                "Diversity": o["diversity"],
                "CostUtility": float(o["cost_utility"]),
                "PassRate": o["feasibility"],
            }
        return {
            "Completeness": float(o["complete"]),
            "Feasibility": float(o["feasible"]),
            "Optimality": float(o["optimal"]),
            "Diversity": None,
            "CostUtility": None,
            "PassRate": float(o["threshold_pass"]),
        }
    if role is Role.VERIFIER:
        opt = o.get("optimality_correct")
        return {
            "Feasibility": float(o["feasibility_correct"]),
            "Optimality": None if opt is None else float(opt),
            "PassRate": float(o["pass"]),
        }
    hits = o["hit_at"]
    return {
        "Hit@1": float(hits["1"]),
        "Hit@2": float(hits["2"]) if "2" in hits else None,
        "Hit@3": float(hits["3"]) if "3" in hits else None,
        "ComparisonAccuracy": o["pairwise_agreement"],
        "Malformed": float(o["malformed"]),
    }


def summarize(records: Sequence[EvalRecord]) -> dict[str, Any]:
    if not records:
        raise EmptyInput("no records to report")
    roles = {r.role for r in records}
    if len(roles) > 1:
        raise MixedRoles(f"records mix roles {sorted(roles)}; report one role at a time")
    role = Role(roles.pop())
    groups: dict[tuple, list[EvalRecord]] = {}
    for r in records:
        groups.setdefault(tuple(getattr(r, k) for k in GROUP_KEYS), []).append(r)
    rows = []
    for key in sorted(groups):
        recs = groups[key]
        graded = [r for r in recs if not r.outcome.get("skipped")]
        per = [_record_metrics(r, role) for r in graded]
        row: dict[str, Any] = dict(zip(GROUP_KEYS, key))
        row["n"] = len(graded)
        row["skipped"] = len(recs) - len(graded)
        for col in COLUMNS[role]:
            row[col] = _mean([m[col] for m in per if m[col] is not None])
        rows.append(row)
    return {"role": role.value, "columns": list(GROUP_KEYS) + ["n", "skipped"] + COLUMNS[role], "rows": rows,
            "definitions": DEFINITIONS[role]}


def _fmt(v: Any) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.3f}"
    return str(v)


def render_text(summary: dict[str, Any]) -> str:
    cols = summary["columns"]
    table = [cols] + [[_fmt(row[c]) for c in cols] for row in summary["rows"]]
    widths = [max(len(r[i]) for r in table) for i in range(len(cols))]
    lines = [f"Role: {summary['role']}"]
    for i, r in enumerate(table):
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    lines.append("")
    lines.extend(summary["definitions"])
    return "\n".join(lines) + "\n"


def render_csv(summary: dict[str, Any]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(summary["columns"])
    for row in summary["rows"]:
        w.writerow(["" if row[c] is None else row[c] for c in summary["columns"]])
    return buf.getvalue()


def render_figure(summary: dict[str, Any], path: Path) -> None:
    """Grouped bar chart of the rate columns, one bar group per table row."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    role = Role(summary["role"])
    metrics = [c for c in COLUMNS[role] if c != "CostUtility"]
    rows = summary["rows"]
    fig, ax = plt.subplots(figsize=(max(6.0, 1.6 * len(rows) + 3), 4.0))
    width = 0.8 / len(metrics)
    for j, m in enumerate(metrics):
        xs = [i + (j - (len(metrics) - 1) / 2) * width for i in range(len(rows))]
        ax.bar(xs, [row[m] or 0.0 for row in rows], width, label=m)
    ax.set_xticks(range(len(rows)))
    ax.set_xticklabels([f"{r['agent']}\n{r['mode']}\n{r['condition']}" for r in rows], fontsize=8)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("rate")
    ax.set_title(f"{role.value} metrics")
    ax.legend(fontsize=8, ncol=len(metrics), loc="upper center", bbox_to_anchor=(0.5, -0.28))
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata={"Software": None})
    plt.close(fig)


def write_report(records: Sequence[EvalRecord], out_dir: str | Path, figures: bool = True) -> dict[str, Path]:
    """Write report.txt, report.json, report.csv and, optionally, a PNG chart."""
    summary = summarize(records)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "text": out / "report.txt",
        "json": out / "report.json",
        "csv": out / "report.csv",
    }
    paths["text"].write_text(render_text(summary), encoding="utf-8")
    paths["json"].write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    paths["csv"].write_text(render_csv(summary), encoding="utf-8")
    if figures:
        paths["figure"] = out / f"report_{summary['role'].lower()}.png"
        render_figure(summary, paths["figure"])
    return paths
