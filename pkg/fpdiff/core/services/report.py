"""
Report building: per-level class tables, adjacency matrices and the summary line.
"""
from collections import Counter
from decimal import ROUND_HALF_UP, Decimal
from typing import Dict, Iterable, List, Optional

from fpdiff.core.entities.comparison import ComparisonRecord, MergeResult, RunKey
from fpdiff.core.entities.execution import OPT_LEVEL_ORDER, OptLevel
from fpdiff.core.entities.outcome import DISCREPANCY_ORDER, OUTCOME_ORDER, OutcomeTag
from fpdiff.core.entities.precision import Precision
from fpdiff.schemas.report import LevelTable, Report, ReportSummary


def discrepancy_percentage(discrepancies: int, runs: int) -> str:
    """Share of runs as a percentage rounded half-up to two decimals."""
    if runs <= 0:
        return "0.00%"
    share = (Decimal(discrepancies) * 100 / Decimal(runs)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)
    return f"{share}%"


def _level_sort_key(label: str):
    levels = label.split(":")
    try:
        return tuple(OPT_LEVEL_ORDER.index(OptLevel(level)) for level in levels)
    except ValueError:
        return (len(OPT_LEVEL_ORDER),)


def _is_subnormal_record(record: ComparisonRecord) -> bool:
    return record.side_a.outcome.subnormal or record.side_b.outcome.subnormal


def build_report(
    records: Iterable[ComparisonRecord],
    runs_attempted: Optional[int] = None,
    unmatched: int = 0,
    unavailable: int = 0,
    cross_level: bool = False,
    precision: Optional[Precision] = None,
    total_programs: Optional[int] = None,
    option_count: Optional[int] = None,
) -> Report:
    """Aggregate comparison records; invariant under reordering of the records.

    ``total_programs`` and ``option_count`` default to what the records show.
    Runs per option per compiler are the attempted runs split evenly over both
    sides and every option.
    """
    records = list(records)
    tag_index = {tag: i for i, tag in enumerate(OUTCOME_ORDER)}
    class_counts: Dict[str, Counter] = {}
    compared: Counter = Counter()
    subnormal: Counter = Counter()
    adjacency: Dict[str, List[List[int]]] = {}

    for record in records:
        label = record.level_label
        counts = class_counts.setdefault(label, Counter())
        matrix = adjacency.setdefault(label, [[0] * len(OUTCOME_ORDER) for _ in OUTCOME_ORDER])
        compared[label] += 1
        if record.discrepancy.is_discrepancy:
            counts[record.discrepancy.tag] += 1
        if _is_subnormal_record(record):
            subnormal[label] += 1
        row, column = record.side_a.outcome.tag, record.side_b.outcome.tag
        matrix[tag_index[row]][tag_index[column]] += 1

    levels = sorted(class_counts, key=_level_sort_key)
    per_opt_table = {}
    for label in levels:
        counts = class_counts[label]
        per_opt_table[label] = LevelTable(
            counts={tag: counts[tag] for tag in DISCREPANCY_ORDER},
            total=sum(counts.values()),
            compared=compared[label],
            subnormal=subnormal[label],
        )

    total_discrepancies = sum(table.total for table in per_opt_table.values())
    runs_compared = 2 * sum(compared.values())
    attempted = runs_compared if runs_attempted is None else runs_attempted
    options = len(levels) if option_count is None else option_count
    if total_programs is None:
        total_programs = len({record.test_id for record in records})
    summary = ReportSummary(
        total_discrepancies=total_discrepancies,
        total_runs=runs_compared,
        percentage=discrepancy_percentage(total_discrepancies, runs_compared),
        runs_attempted=attempted,
        runs_compared=runs_compared,
        unmatched=unmatched,
        unavailable=unavailable,
        total_programs=total_programs,
        runs_per_option_per_compiler=attempted // (2 * options) if options else 0,
    )
    return Report(
        cross_level=cross_level,
        levels=levels,
        outcome_order=list(OUTCOME_ORDER),
        per_opt_table=per_opt_table,
        adjacency={label: adjacency[label] for label in levels},
        summary=summary,
        precision=precision,
    )


def _merge_keys(result: MergeResult) -> List[RunKey]:
    keys = [RunKey(r.test_id, r.input_index, r.side_a.compiler_id, r.side_a.opt_level) for r in result.records]
    keys.extend(result.unmatched_a)
    keys.extend(result.unmatched_b)
    keys.extend(u.key for u in result.unavailable)
    return keys


def report_from_merge(result: MergeResult) -> Report:
    keys = _merge_keys(result)
    return build_report(
        result.records,
        runs_attempted=result.runs_attempted,
        unmatched=len(result.unmatched_a) + len(result.unmatched_b),
        unavailable=len(result.unavailable),
        cross_level=result.cross_level,
        precision=result.precision,
        total_programs=len({key.test_id for key in keys}),
        option_count=1 if result.cross_level else len({key.opt_level for key in keys}),
    )



_SHORT_TAGS = {
    OutcomeTag.NAN: "NaN",
    OutcomeTag.INF: "Inf",
    OutcomeTag.ZERO: "Zero",
    OutcomeTag.NUMBER: "Num",
}


def _table(header: List[str], rows: List[List[str]]) -> List[str]:
    widths = [max(len(row[i]) for row in [header] + rows) for i in range(len(header))]
    lines = ["  ".join(cell.rjust(width) for cell, width in zip(header, widths))]
    lines.append("  ".join("-" * width for width in widths))
    lines.extend("  ".join(cell.rjust(width) for cell, width in zip(row, widths)) for row in rows)
    return lines


def render_report_text(report: Report) -> str:
    lines: List[str] = []
    title = "Discrepancies per optimization option"
    if report.precision is not None:
        title += f" ({report.precision.value})"
    if report.cross_level:
        title += " [cross-level, exploratory]"
    lines.append(title)
    lines.append("")

    header = ["Class"] + report.levels
    rows = [
        [tag.value] + [str(report.per_opt_table[label].counts[tag]) for label in report.levels]
        for tag in DISCREPANCY_ORDER
    ]
    rows.append(["Total"] + [str(report.per_opt_table[label].total) for label in report.levels])
    rows.append(["Subnormal"] + [str(report.per_opt_table[label].subnormal) for label in report.levels])
    lines.extend(_table(header, rows))

    for label in report.levels:
        lines.append("")
        lines.append(f"Adjacency matrix {label} (rows: side a, columns: side b)")
        tags = [_SHORT_TAGS[tag] for tag in report.outcome_order]
        matrix = report.adjacency[label]
        lines.extend(_table([""] + tags, [[tags[i]] + [str(c) for c in row] for i, row in enumerate(matrix)]))

    summary = report.summary
    lines.append("")
    lines.append(
        f"Total discrepancies: {summary.total_discrepancies:,} "
        f"({summary.percentage} of {summary.total_runs:,} total runs)"
    )
    lines.append(f"Total programs: {summary.total_programs:,}")
    lines.append(f"Runs per option per compiler: {summary.runs_per_option_per_compiler:,}")
    lines.append(f"Runs attempted vs compared: {summary.runs_attempted:,} vs {summary.runs_compared:,}")
    if summary.unmatched or summary.unavailable:
        lines.append(f"Unmatched runs: {summary.unmatched:,}; unavailable runs: {summary.unavailable:,}")
    return "\n".join(lines) + "\n"
