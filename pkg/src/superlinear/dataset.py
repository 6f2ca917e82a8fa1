"""Reading and writing article datasets.

JSON layout::

    {"articles": [{"id": "A1", "order": "as-reported",
                   "experiments": [{"id": "e1", "n": 20,
                                    "means": [1.0, 2.0, 3.1],
                                    "sds": [1.0, 1.1, 0.9]}]}]}

``n`` is either one integer (balanced cells) or a list of three; ``order`` is
optional. CSV files have one experiment per row with the columns in
``CSV_COLUMNS``; rows of an article keep their file order.

Parse failures raise ``ParseError`` with a line (and column for JSON);
invalid content raises ``ValidationError`` naming the offending field.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ParseError, ValidationError
from .linearity_tests import OrderingPolicy
from .model import ExperimentSummary

CSV_COLUMNS = ("article_id", "experiment_id", "n1", "n2", "n3",
               "m1", "m2", "m3", "s1", "s2", "s3")
FORMATS = ("json", "csv")


@dataclass(frozen=True)
class ArticleDataset:
    id: str
    experiments: tuple
    ordering_policy: OrderingPolicy = field(default_factory=OrderingPolicy)

    def __post_init__(self):
        object.__setattr__(self, "id", str(self.id))
        exps = tuple(self.experiments)
        if not exps:
            raise ValidationError(f"article {self.id!r}: experiments must not be empty")
        seen = set()
        for e in exps:
            if not isinstance(e, ExperimentSummary):
                raise ValidationError(f"article {self.id!r}: experiments must be ExperimentSummary")
            if e.id in seen:
                raise ValidationError(f"article {self.id!r}: duplicate experiment id {e.id!r}")
            seen.add(e.id)
        object.__setattr__(self, "experiments", exps)

    def __len__(self):
        return len(self.experiments)


def detect_format(path, fmt=None) -> str:
    if fmt is not None:
        if fmt not in FORMATS:
            raise ValidationError(f"unknown format {fmt!r}; expected one of {FORMATS}")
        return fmt
    suffix = Path(path).suffix.lower().lstrip(".")
    if suffix not in FORMATS:
        raise ValidationError(f"cannot infer format from {str(path)!r}; pass json or csv")
    return suffix


def ingest(path, fmt=None) -> list:
    """Load and validate every article in ``path``."""
    fmt = detect_format(path, fmt)
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: cannot read file ({exc.strerror})") from exc
    if fmt == "json":
        return parse_json(text, source=str(path))
    return parse_csv(text, source=str(path))


# -- JSON ---------------------------------------------------------------------

def _experiment(where, obj):
    if not isinstance(obj, dict):
        raise ValidationError(f"{where}: expected an object")
    missing = [k for k in ("id", "n", "means", "sds") if k not in obj]
    if missing:
        raise ValidationError(f"{where}: missing field(s) {', '.join(missing)}")
    n = obj["n"]
    for key, value in (("means", obj["means"]), ("sds", obj["sds"])):
        if not isinstance(value, list) or len(value) != 3:
            raise ValidationError(f"{where}.{key}: expected a list of 3 numbers")
        for i, v in enumerate(value):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ValidationError(f"{where}.{key}[{i}]: expected a number, got {v!r}")
    if isinstance(n, list):
        if len(n) != 3:
            raise ValidationError(f"{where}.n: expected an integer or a list of 3 integers")
        cells = n
    else:
        cells = [n] * 3
    for i, v in enumerate(cells):
        if isinstance(v, bool) or not isinstance(v, int):
            raise ValidationError(f"{where}.n: expected integer cell sizes, got {v!r}")
    try:
        return ExperimentSummary(id=obj["id"], means=obj["means"], sds=obj["sds"],
                                 cell_sizes=tuple(cells))
    except ValidationError as exc:
        raise type(exc)(f"{where}: {exc}") from exc


def _article(where, obj):
    if not isinstance(obj, dict):
        raise ValidationError(f"{where}: expected an object")
    if "id" not in obj or "experiments" not in obj:
        raise ValidationError(f"{where}: article needs 'id' and 'experiments'")
    if not isinstance(obj["experiments"], list):
        raise ValidationError(f"{where}.experiments: expected a list")
    exps = [_experiment(f"{where}.experiments[{j}]", e) for j, e in enumerate(obj["experiments"])]
    try:
        policy = OrderingPolicy.parse(obj.get("order", "as-reported"))
        return ArticleDataset(obj["id"], tuple(exps), policy)
    except ValidationError as exc:
        raise ValidationError(f"{where}: {exc}") from exc


def parse_json(text: str, source: str = "<json>") -> list:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("articles"), list):
        raise ValidationError(f"{source}: top level must be an object with an 'articles' list")
    articles = [_article(f"articles[{i}]", a) for i, a in enumerate(doc["articles"])]
    _unique_articles(articles, source)
    return articles


def _unique_articles(articles, source):
    ids = [a.id for a in articles]
    dupes = sorted({i for i in ids if ids.count(i) > 1})
    if dupes:
        raise ValidationError(f"{source}: duplicate article id(s) {dupes}")


def _cells_json(e):
    n1, n2, n3 = e.cell_sizes
    return n1 if n1 == n2 == n3 else [n1, n2, n3]


def to_json_dict(datasets: Sequence[ArticleDataset]) -> dict:
    out = []
    for a in datasets:
        item = {"id": a.id}
        if a.ordering_policy != OrderingPolicy():
            item["order"] = str(a.ordering_policy)
        item["experiments"] = [{"id": e.id, "n": _cells_json(e), "means": list(e.means),
                                "sds": list(e.sds)} for e in a.experiments]
        out.append(item)
    return {"articles": out}


def dumps_json(datasets: Sequence[ArticleDataset]) -> str:
    # json writes floats with repr, the shortest exact round-trip form
    return json.dumps(to_json_dict(datasets), indent=2) + "\n"


# -- CSV ----------------------------------------------------------------------

def parse_csv(text: str, source: str = "<csv>") -> list:
    reader = csv.reader(text.splitlines())
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError(f"{source}:1: empty file") from None
    header = [h.strip() for h in header]
    missing = [c for c in CSV_COLUMNS if c not in header]
    if missing:
        raise ParseError(f"{source}:1: missing column(s) {', '.join(missing)}")
    index = {c: header.index(c) for c in CSV_COLUMNS}
    grouped: dict = {}
    for row in reader:
        line = reader.line_num
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"{source}:{line}: expected {len(header)} fields, got {len(row)}")
        values = {}
        for col in CSV_COLUMNS:
            raw = row[index[col]].strip()
            if col in ("article_id", "experiment_id"):
                if not raw:
                    raise ValidationError(f"{source}:{line}: field {col} is empty")
                values[col] = raw
                continue
            try:
                values[col] = int(raw) if col[0] == "n" else float(raw)
            except ValueError:
                kind = "integer" if col[0] == "n" else "number"
                raise ParseError(f"{source}:{line}: field {col}: expected a {kind}, got {raw!r}") from None
        for col in ("s1", "s2", "s3"):
            if not values[col] > 0.0 or not math.isfinite(values[col]):
                raise ValidationError(f"{source}:{line}: field {col} must be positive, got {values[col]!r}")
        try:
            e = ExperimentSummary(id=values["experiment_id"],
                                  means=(values["m1"], values["m2"], values["m3"]),
                                  sds=(values["s1"], values["s2"], values["s3"]),
                                  cell_sizes=(values["n1"], values["n2"], values["n3"]))
        except ValidationError as exc:
            raise type(exc)(f"{source}:{line}: {exc}") from exc
        exps = grouped.setdefault(values["article_id"], [])
        if any(x.id == e.id for x in exps):
            raise ValidationError(f"{source}:{line}: duplicate experiment id {e.id!r} "
                                  f"in article {values['article_id']!r}")
        exps.append(e)
    if not grouped:
        raise ValidationError(f"{source}: no experiments found")
    return [ArticleDataset(aid, tuple(exps)) for aid, exps in grouped.items()]


def _csv_rows(datasets: Iterable[ArticleDataset]):
    for a in datasets:
        for e in a.experiments:
            yield [a.id, e.id, *e.cell_sizes, *(repr(float(v)) for v in e.means),
                   *(repr(float(v)) for v in e.sds)]


def dumps_csv(datasets: Sequence[ArticleDataset]) -> str:
    """CSV text; ordering policies are not representable and are dropped."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    writer.writerows(_csv_rows(datasets))
    return buf.getvalue()


def write_datasets(datasets: Sequence[ArticleDataset], path, fmt=None) -> None:
    fmt = detect_format(path, fmt)
    text = dumps_json(datasets) if fmt == "json" else dumps_csv(datasets)
    Path(path).write_text(text, encoding="utf-8")
