"""Tabular ingestion: parsing, schema-driven encoding, and subgroup extraction.

Supported input formats:

* ``csv``        -- generic comma-separated file whose first row is the header.
* ``uci-adult``  -- the census income file: no header, comma plus optional
  space as delimiter, ``?`` for missing values, an optional trailing ``.``
  on the label column, and possibly a bare ``.`` sentinel line at the end.
* ``uci-german`` -- the credit scoring file: no header, whitespace-separated
  coded values (``A11`` ... ``A214``), target ``1`` = good / ``2`` = bad.

Builtin dataset ids ``adult`` and ``german`` resolve against a data
directory (argument, ``FAIRSAMPLE_DATA_DIR``, or ``./data``).
"""

from __future__ import annotations

import itertools
import json
import os
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

UNKNOWN_CATEGORY = "Unknown"

# Wildcard key in a value map: any value without an explicit entry maps to
# the wildcard's target (used e.g. to merge all non-White race codes).
VALUE_MAP_WILDCARD = "*"

ADULT_COLUMNS = (
    "age", "workclass", "fnlwgt", "education", "education-num",
    "marital-status", "occupation", "relationship", "race", "sex",
    "capital-gain", "capital-loss", "hours-per-week", "native-country",
    "income",
)

GERMAN_COLUMNS = (
    "checking_status", "duration", "credit_history", "purpose",
    "credit_amount", "savings", "employment_since", "installment_rate",
    "personal_status_sex", "other_debtors", "residence_since", "property",
    "age", "installment_plans", "housing", "existing_credits", "job",
    "num_dependents", "telephone", "foreign_worker", "credit_risk",
)


class ParseError(ValueError):
    """Raised for unreadable, malformed, or empty input tables."""


class SchemaError(ValueError):
    """Raised when a schema is inconsistent or does not match a table."""


@dataclass(frozen=True)
class Schema:
    """Declarative description of a tabular dataset.

    ``columns`` lists the feature columns as (name, kind) with kind one of
    ``numeric`` / ``categorical``; the target column is declared separately.
    ``value_maps`` rewrite raw sensitive values before subgroup keys are
    formed (they do not alter feature encoding, which always one-hot encodes
    the raw categories).  ``sensitive_domains`` fix the ordered value domain
    used to enumerate subgroups, so intersections that are absent from the
    data still surface as empty subgroups.  ``frozen_categories``, when
    given for a column, make encoding reject unseen raw values.
    """

    columns: tuple[tuple[str, str], ...]
    target: str
    positive_label: str
    sensitive: tuple[str, ...] = ()
    sensitive_domains: dict[str, tuple[str, ...]] = field(default_factory=dict)
    value_maps: dict[str, dict[str, str]] = field(default_factory=dict)
    missing_token: str | None = None
    frozen_categories: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        kinds = dict(self.columns)
        for name, kind in self.columns:
            if kind not in ("numeric", "categorical"):
                raise SchemaError(f"column {name!r}: unknown kind {kind!r}")
        if len(kinds) != len(self.columns):
            raise SchemaError("duplicate column names in schema")
        if self.target in self.sensitive:
            raise SchemaError("target column may not be listed as sensitive")
        if self.target in kinds:
            raise SchemaError("target column must not appear in feature columns")
        for col in self.sensitive:
            if kinds.get(col) != "categorical":
                raise SchemaError(f"sensitive column {col!r} must be a declared categorical column")
        for col in self.value_maps:
            if kinds.get(col) != "categorical":
                raise SchemaError(f"value_map key {col!r} is not a declared categorical column")
        for col in self.sensitive_domains:
            if col not in self.sensitive:
                raise SchemaError(f"sensitive_domains key {col!r} is not a sensitive column")

    @property
    def column_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.columns)

    def kind_of(self, name: str) -> str:
        for col, kind in self.columns:
            if col == name:
                return kind
        raise SchemaError(f"column {name!r} not declared in schema")

    def map_sensitive_value(self, col: str, raw: str) -> str:
        """Raw -> subgroup value: missing token, then value_map (with wildcard)."""
        value = UNKNOWN_CATEGORY if raw == self.missing_token else raw
        vmap = self.value_maps.get(col)
        if vmap is None:
            return value
        if value in vmap:
            return vmap[value]
        return vmap.get(VALUE_MAP_WILDCARD, value)


@dataclass(frozen=True)
class RawTable:
    """A parsed table: header names plus rows of raw string fields."""

    header: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]
    source: str

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> tuple[str, ...]:
        try:
            idx = self.header.index(name)
        except ValueError:
            raise SchemaError(f"column {name!r} not present in table {self.source!r}") from None
        return tuple(row[idx] for row in self.rows)


@dataclass(frozen=True)
class EncodedDataset:
    """Normalized numeric design matrix with provenance.

    ``X`` holds one-hot blocks for categorical columns and min-max scaled
    values for numeric columns, so every entry lies in [0, 1].  ``y`` is the
    0/1 target.  ``non_sensitive_mask`` marks encoded coordinates that were
    not derived from a sensitive source column.  ``categories`` records the
    ordered category list actually used per categorical column.
    """

    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...]
    non_sensitive_mask: np.ndarray
    row_origin: np.ndarray
    categories: dict[str, tuple[str, ...]]

    @property
    def m(self) -> int:
        return int(self.X.shape[0])

    @property
    def d(self) -> int:
        return int(self.X.shape[1])


@dataclass(frozen=True)
class Subgroup:
    """Rows sharing one value for each sensitive column."""

    key: tuple[tuple[str, str], ...]
    indices: np.ndarray

    @property
    def size(self) -> int:
        return int(self.indices.size)

    @property
    def label(self) -> str:
        return "/".join(value for _, value in self.key)


def _resolve_builtin(source: str, data_dir: str | os.PathLike | None) -> tuple[Path, str]:
    base = Path(data_dir or os.environ.get("FAIRSAMPLE_DATA_DIR", "data"))
    if source == "adult":
        return base / "adult.data", "uci-adult"
    if source == "german":
        return base / "german.data", "uci-german"
    raise ParseError(f"unknown builtin dataset id {source!r} (expected 'adult' or 'german')")


def parse_table(
    source: str | os.PathLike,
    format: str | None = None,
    data_dir: str | os.PathLike | None = None,
) -> RawTable:
    """Parse a file (or builtin dataset id) into a RawTable.

    ``format`` is one of ``csv``, ``uci-adult``, ``uci-german``; it defaults
    to ``csv`` for paths and is implied for builtin ids.
    """
    if isinstance(source, str) and source in ("adult", "german"):
        path, format = _resolve_builtin(source, data_dir)
    else:
        path = Path(source)
        format = format or "csv"
    if format not in ("csv", "uci-adult", "uci-german"):
        raise ParseError(f"unknown format tag {format!r}")
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc

    lines = text.splitlines()
    header: tuple[str, ...]
    rows: list[tuple[str, ...]] = []

    if format == "csv":
        import csv as _csv

        records = [r for r in _csv.reader(lines) if r and any(f.strip() for f in r)]
        if not records:
            raise ParseError(f"{path}: no data rows")
        header = tuple(f.strip() for f in records[0])
        raw_rows = records[1:]
        for lineno, rec in enumerate(raw_rows, start=2):
            fields = tuple(f.strip() for f in rec)
            if len(fields) != len(header):
                raise ParseError(
                    f"{path}: row {lineno} has {len(fields)} fields, expected {len(header)}"
                )
            rows.append(fields)
    elif format == "uci-adult":
        header = ADULT_COLUMNS
        for lineno, line in enumerate(lines, start=1):
            stripped = line.strip()
            if not stripped or stripped == ".":
                continue  # trailing blank line / end-of-file sentinel
            fields = [f.strip() for f in stripped.split(",")]
            if fields and fields[-1].endswith("."):
                fields[-1] = fields[-1][:-1]
            if len(fields) != len(header):
                raise ParseError(
                    f"{path}: row {lineno} has {len(fields)} fields, expected {len(header)}"
                )
            rows.append(tuple(fields))
    else:  # uci-german
        header = GERMAN_COLUMNS
        for lineno, line in enumerate(lines, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            fields = tuple(stripped.split())
            if len(fields) != len(header):
                raise ParseError(
                    f"{path}: row {lineno} has {len(fields)} fields, expected {len(header)}"
                )
            rows.append(fields)

    if not rows:
        raise ParseError(f"{path}: no data rows")
    return RawTable(header=header, rows=tuple(rows), source=str(path))


def encode(table: RawTable, schema: Schema) -> EncodedDataset:
    """Encode a RawTable into a normalized [0, 1] design matrix.

    Categorical columns become one-hot blocks over the categories present in
    the table (missing tokens folded into an ``Unknown`` category), ordered
    alphabetically; numeric columns are min-max scaled over the whole table.
    A constant numeric column scales to all zeros with a warning.
    """
    missing_cols = [c for c in schema.column_names if c not in table.header]
    if missing_cols:
        raise SchemaError(f"schema columns missing from table: {missing_cols}")
    if schema.target not in table.header:
        raise SchemaError(f"target column {schema.target!r} missing from table")

    m = table.n_rows
    blocks: list[np.ndarray] = []
    names: list[str] = []
    non_sensitive: list[bool] = []
    categories: dict[str, tuple[str, ...]] = {}

    for col, kind in schema.columns:
        values = table.column(col)
        is_sensitive = col in schema.sensitive
        if kind == "numeric":
            parsed = np.empty(m, dtype=np.float64)
            for i, v in enumerate(values):
                try:
                    parsed[i] = float(v)
                except ValueError:
                    raise ParseError(
                        f"column {col!r}, row {i + 1}: non-numeric value {v!r}"
                    ) from None
            lo, hi = parsed.min(), parsed.max()
            if hi > lo:
                scaled = (parsed - lo) / (hi - lo)
            else:
                warnings.warn(f"numeric column {col!r} is constant; encoded as zeros")
                scaled = np.zeros(m, dtype=np.float64)
            blocks.append(scaled[:, None])
            names.append(col)
            non_sensitive.append(not is_sensitive)
        else:
            cleaned = tuple(
                UNKNOWN_CATEGORY if v == schema.missing_token else v for v in values
            )
            if col in schema.frozen_categories:
                cats = schema.frozen_categories[col]
                allowed = set(cats)
                for i, v in enumerate(cleaned):
                    if v not in allowed:
                        raise SchemaError(
                            f"column {col!r}, row {i + 1}: value {v!r} not in frozen categories"
                        )
            else:
                cats = tuple(sorted(set(cleaned)))
            categories[col] = cats
            index = {c: j for j, c in enumerate(cats)}
            block = np.zeros((m, len(cats)), dtype=np.float64)
            for i, v in enumerate(cleaned):
                block[i, index[v]] = 1.0
            blocks.append(block)
            names.extend(f"{col}={c}" for c in cats)
            non_sensitive.extend([not is_sensitive] * len(cats))

    X = np.hstack(blocks)
    target_raw = table.column(schema.target)
    y = np.fromiter(
        (1 if v == schema.positive_label else 0 for v in target_raw),
        dtype=np.int64,
        count=m,
    )
    return EncodedDataset(
        X=X,
        y=y,
        feature_names=tuple(names),
        non_sensitive_mask=np.asarray(non_sensitive, dtype=bool),
        row_origin=np.arange(m, dtype=np.intp),
        categories=categories,
    )


def extract_subgroups(ds: EncodedDataset, table: RawTable, schema: Schema) -> list[Subgroup]:
    """Enumerate intersectional subgroups over the sensitive value domains.

    One subgroup per combination of declared (or observed) sensitive values,
    including combinations with no rows; ordering follows the declared
    domain order, so subgroup numbering is stable across runs.
    """
    if not schema.sensitive:
        raise SchemaError("schema declares no sensitive columns")

    mapped: dict[str, list[str]] = {}
    for col in schema.sensitive:
        raw = table.column(col)
        mapped[col] = [schema.map_sensitive_value(col, v) for v in raw]

    domains: list[tuple[str, ...]] = []
    for col in schema.sensitive:
        observed = set(mapped[col])
        if col in schema.sensitive_domains:
            domain = schema.sensitive_domains[col]
            extra = observed - set(domain)
            if extra:
                raise SchemaError(
                    f"sensitive column {col!r}: values {sorted(extra)} outside declared domain"
                )
        else:
            domain = tuple(sorted(observed))
        domains.append(domain)

    by_key: dict[tuple[str, ...], list[int]] = {
        combo: [] for combo in itertools.product(*domains)
    }
    for i in range(table.n_rows):
        combo = tuple(mapped[col][i] for col in schema.sensitive)
        by_key[combo].append(i)

    subgroups = []
    for combo in itertools.product(*domains):
        key = tuple(zip(schema.sensitive, combo))
        idx = np.asarray(by_key[combo], dtype=np.intp)
        subgroups.append(Subgroup(key=key, indices=idx))
    return subgroups


def builtin_schema(id: str) -> Schema:
    """Frozen schemas for the two builtin datasets."""
    if id == "adult":
        return Schema(
            columns=(
                ("age", "numeric"),
                ("workclass", "categorical"),
                ("fnlwgt", "numeric"),
                ("education", "categorical"),
                ("education-num", "numeric"),
                ("marital-status", "categorical"),
                ("occupation", "categorical"),
                ("relationship", "categorical"),
                ("race", "categorical"),
                ("sex", "categorical"),
                ("capital-gain", "numeric"),
                ("capital-loss", "numeric"),
                ("hours-per-week", "numeric"),
                ("native-country", "categorical"),
            ),
            target="income",
            positive_label=">50K",
            sensitive=("sex", "race"),
            sensitive_domains={
                "sex": ("Female", "Male"),
                "race": ("non-White", "White"),
            },
            value_maps={"race": {"White": "White", VALUE_MAP_WILDCARD: "non-White"}},
            missing_token="?",
        )
    if id == "german":
        return Schema(
            columns=(
                ("checking_status", "categorical"),
                ("duration", "numeric"),
                ("credit_history", "categorical"),
                ("purpose", "categorical"),
                ("credit_amount", "numeric"),
                ("savings", "categorical"),
                ("employment_since", "categorical"),
                ("installment_rate", "numeric"),
                ("personal_status_sex", "categorical"),
                ("other_debtors", "categorical"),
                ("residence_since", "numeric"),
                ("property", "categorical"),
                ("age", "numeric"),
                ("installment_plans", "categorical"),
                ("housing", "categorical"),
                ("existing_credits", "numeric"),
                ("job", "categorical"),
                ("num_dependents", "numeric"),
                ("telephone", "categorical"),
                ("foreign_worker", "categorical"),
            ),
            target="credit_risk",
            positive_label="1",
            sensitive=("personal_status_sex",),
            sensitive_domains={
                "personal_status_sex": ("A91", "A92", "A93", "A94", "A95"),
            },
        )
    raise SchemaError(f"unknown builtin schema id {id!r} (expected 'adult' or 'german')")


def load_schema(path: str | os.PathLike) -> Schema:
    """Load a schema from the JSON document format described in the README."""
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON: {exc}") from exc
    try:
        return Schema(
            columns=tuple((str(n), str(k)) for n, k in doc["columns"]),
            target=str(doc["target"]["column"]),
            positive_label=str(doc["target"]["positive"]),
            sensitive=tuple(doc.get("sensitive", ())),
            sensitive_domains={
                k: tuple(v) for k, v in doc.get("sensitive_domains", {}).items()
            },
            value_maps={
                k: {str(a): str(b) for a, b in v.items()}
                for k, v in doc.get("value_maps", {}).items()
            },
            missing_token=doc.get("missing_token"),
            frozen_categories={
                k: tuple(v) for k, v in doc.get("frozen_categories", {}).items()
            },
        )
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"{path}: malformed schema document: {exc}") from exc
