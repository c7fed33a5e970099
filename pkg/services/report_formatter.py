import csv
import io
import json
from collections import defaultdict
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

from pydantic import BaseModel

from models.schemas import AblationRow, MetricsRecord, RuleKind

BASE_COLUMNS = ["epoch", "train_loss", "train_acc", "test_acc", "wall_seconds", "eta"]
LAYER_COLUMNS = ["wnorm_min", "wnorm_mean", "wnorm_max", "update_mean"]


def _cell(value: Any) -> str:
    """Shortest round-trip text for floats, empty for missing values"""
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(float(value))
    if isinstance(value, Enum):
        return value.value
    return str(value)


class ReportFormatter:
    """Renders run results as CSV, markdown or JSON"""

    @staticmethod
    def format(rows: Sequence[BaseModel], format_type: str = "markdown") -> str:
        """Format result rows based on type"""
        if format_type == "markdown":
            return ReportFormatter._format_markdown(rows)
        elif format_type == "csv":
            return ReportFormatter._format_csv(rows)
        elif format_type == "json":
            return ReportFormatter._format_json(rows)
        raise ValueError(f"unknown report format {format_type!r}; accepted: markdown, csv, json")

    @staticmethod
    def _columns(rows: Sequence[BaseModel]) -> List[str]:
        return list(type(rows[0]).model_fields) if rows else []

    @staticmethod
    def _format_markdown(rows: Sequence[BaseModel]) -> str:
        columns = ReportFormatter._columns(rows)
        lines = ["| " + " | ".join(columns) + " |", "|" + "---|" * len(columns)]
        for row in rows:
            values = [_cell(getattr(row, c)) for c in columns]
            lines.append("| " + " | ".join(values) + " |")
        return "\n".join(lines) + "\n"

    @staticmethod
    def _format_csv(rows: Sequence[BaseModel]) -> str:
        columns = ReportFormatter._columns(rows)
        buffer = io.StringIO()
        writer = csv.writer(buffer)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(getattr(row, c)) for c in columns])
        return buffer.getvalue()

    @staticmethod
    def _format_json(rows: Sequence[BaseModel]) -> str:
        return json.dumps([row.model_dump(mode="json") for row in rows], indent=2)

    @staticmethod
    def metrics_header(layer_ids: Sequence[int]) -> List[str]:
        header = list(BASE_COLUMNS)
        for lid in layer_ids:
            header.extend(f"layer{lid}_{column}" for column in LAYER_COLUMNS)
        return header

    @staticmethod
    def write_metrics_csv(
        path: Union[str, Path], records: Sequence[MetricsRecord], layer_ids: Sequence[int], include_wall_time: bool = True
    ) -> Path:
        """metrics.csv with a fixed column order; wall time is left blank when excluded."""
        path = Path(path)
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(ReportFormatter.metrics_header(layer_ids))
            for record in records:
                row = [
                    record.epoch,
                    record.train_loss,
                    record.train_acc,
                    record.test_acc,
                    record.wall_seconds if include_wall_time else None,
                    record.eta,
                ]
                for lid in layer_ids:
                    stats = record.layers.get(lid)
                    row.extend(getattr(stats, c) if stats else None for c in LAYER_COLUMNS)
                writer.writerow([_cell(v) for v in row])
        return path

    @staticmethod
    def ablation_summary(rows: Sequence[AblationRow]) -> str:
        """Mean accuracy per rule with the signals each rule uses, one line per rule"""
        by_rule: Dict[RuleKind, List[AblationRow]] = defaultdict(list)
        for row in rows:
            by_rule[row.rule].append(row)

        lines = [
            "| rule | global signal | local signal | eta | seeds | mean train acc | mean test acc |",
            "|---|---|---|---|---|---|---|",
        ]
        for rule, cells in by_rule.items():
            tests = [c.test_acc for c in cells if c.test_acc is not None]
            mean_test: Optional[float] = sum(tests) / len(tests) if tests else None
            lines.append(
                "| {} | {} | {} | {:g} | {} | {:.4f} | {} |".format(
                    rule.value,
                    "yes" if rule.uses_global_signal else "no",
                    "yes" if rule.uses_traces else "no",
                    cells[0].eta,
                    len(cells),
                    sum(c.train_acc for c in cells) / len(cells),
                    f"{mean_test:.4f}" if mean_test is not None else "n/a",
                )
            )
        return "\n".join(lines) + "\n"


report_formatter = ReportFormatter()
