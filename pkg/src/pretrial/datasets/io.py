"""CSV ingestion and writing for case records.

Format: header row, UTF-8, "true"/"false" booleans, empty field = absent
optional value. Column order is case_id, released, features, protected,
outcomes. Missing feature values are rejected, never imputed.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import IO, Iterable, Sequence

from ..errors import DataError, ValidationError
from .records import CaseRecord, DatasetSchema, FeatureValue, schema_from_dict, schema_to_dict


def _parse_bool(text: str, row: int, column: str) -> bool:
    if text == "true":
        return True
    if text == "false":
        return False
    raise DataError(f"expected 'true' or 'false', got {text!r}", row=row, column=column)


def _parse_feature(text: str, kind: str, row: int, column: str) -> FeatureValue:
    if kind == "categorical":
        return text
    try:
        value = float(text)
    except ValueError:
        raise DataError(f"expected a number, got {text!r}", row=row, column=column) from None
    return int(value) if value.is_integer() else value


def _format_value(value: FeatureValue | bool | None) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float) and value.is_integer():
        return str(int(value))
    return str(value)


def parse_dataset(source: str | Path | IO[str], schema: DatasetSchema) -> list[CaseRecord]:
    """Validates every row against the schema; fails on the first bad cell."""
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8", newline="") as handle:
            return parse_dataset(handle, schema)
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise DataError("empty input: missing header row") from None
    expected = list(schema.columns)
    unknown = [name for name in header if name not in expected]
    if unknown:
        raise DataError(f"unknown column(s): {unknown}")
    missing = [name for name in expected if name not in header]
    if missing:
        raise DataError(f"missing column(s): {missing}")
    if header != expected:
        raise DataError(f"columns must appear in schema order {expected}, got {header}")

    records: list[CaseRecord] = []
    for row_number, row in enumerate(reader, start=2):
        if len(row) != len(expected):
            raise DataError(
                f"expected {len(expected)} fields, got {len(row)}", row=row_number
            )
        cells = dict(zip(expected, row))
        case_id = cells["case_id"]
        if not case_id:
            raise DataError("case_id must be non-empty", row=row_number, column="case_id")
        released = _parse_bool(cells["released"], row_number, "released")
        features: dict[str, FeatureValue] = {}
        for spec in schema.features:
            text = cells[spec.name]
            if text == "":
                raise DataError(
                    "missing feature value (features are mandatory)",
                    row=row_number,
                    column=spec.name,
                )
            value = _parse_feature(text, spec.kind, row_number, spec.name)
            try:
                spec.check(value)
            except ValidationError as exc:
                raise DataError(str(exc), row=row_number, column=spec.name) from None
            features[spec.name] = value
        protected = {name: cells[name] for name in schema.protected if cells[name] != ""}
        outcomes = {}
        for name in schema.outcomes:
            text = cells[name]
            if text != "":
                outcomes[name] = _parse_bool(text, row_number, name)
        if outcomes and not released:
            raise DataError(
                "outcomes present but released=false; outcomes are observable only "
                "for released defendants",
                row=row_number,
                invariant="released_only_outcomes",
            )
        records.append(
            CaseRecord(
                case_id=case_id,
                features=features,
                released=released,
                protected=protected or None,
                outcomes=outcomes or None,
            )
        )
    return records


def write_dataset(
    records: Iterable[CaseRecord], target: str | Path | IO[str], schema: DatasetSchema
) -> None:
    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8", newline="") as handle:
            write_dataset(records, handle, schema)
        return
    writer = csv.writer(target, lineterminator="\n")
    writer.writerow(schema.columns)
    for record in records:
        row = [record.case_id, _format_value(record.released)]
        for spec in schema.features:
            if spec.name not in record.features:
                raise ValidationError(
                    f"record {record.case_id!r} is missing feature {spec.name!r}"
                )
            row.append(_format_value(record.features[spec.name]))
        for name in schema.protected:
            row.append((record.protected or {}).get(name, ""))
        for name in schema.outcomes:
            if record.outcomes is not None and name in record.outcomes:
                row.append(_format_value(record.outcomes[name]))
            else:
                row.append("")
        writer.writerow(row)


def dataset_to_csv(records: Sequence[CaseRecord], schema: DatasetSchema) -> str:
    buffer = io.StringIO()
    write_dataset(records, buffer, schema)
    return buffer.getvalue()


def load_schema(path: str | Path) -> DatasetSchema:
    with open(path, encoding="utf-8") as handle:
        return schema_from_dict(json.load(handle))


def save_schema(schema: DatasetSchema, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(schema_to_dict(schema), handle, indent=2)
        handle.write("\n")


def infer_schema(source: str | Path | IO[str]) -> DatasetSchema:
    """Best-effort schema from a CSV header and first data row.

    Columns before any protected/outcome names are features; a column is
    numeric when its first value parses as a number. Range checks are left
    open. Meant as a CLI convenience; explicit schemas stay authoritative.
    """
    from .records import OUTCOME_NAMES, RESERVED_COLUMNS, FeatureSpec

    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8", newline="") as handle:
            return infer_schema(handle)
    reader = csv.reader(source)
    try:
        header = next(reader)
        first = next(reader)
    except StopIteration:
        raise DataError("cannot infer a schema from fewer than two rows") from None
    known_protected = {"race", "gender"}
    features = []
    protected = []
    for name, value in zip(header, first):
        if name in RESERVED_COLUMNS or name in OUTCOME_NAMES:
            continue
        if name in known_protected:
            protected.append(name)
            continue
        try:
            float(value)
            kind = "numeric"
        except ValueError:
            kind = "categorical"
        features.append(FeatureSpec(name=name, kind=kind))
    return DatasetSchema(
        features=tuple(features),
        protected=tuple(protected),
        outcomes=tuple(n for n in OUTCOME_NAMES if n in header),
    )
