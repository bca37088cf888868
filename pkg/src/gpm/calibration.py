"""Provenance-tagged store of measured values and fitted model parameters.

Every number used by the analytic models lives here as a ``CalibRecord``
keyed by (device, metric_id, params). The store is write-once at startup
(ingest) and read-only afterwards; lookups are exact matches, never
interpolated.

Dataset format: CSV with header ``device,metric_id,params,value,unit,provenance``
where ``params`` is a ``k=v;k=v`` list (keys sorted in canonical form).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Optional

from .errors import AbsentRecordError, IngestError

#: Recognized measurement units. "ratio" covers dimensionless factors printed
#: in the source tables (e.g. "4.23x"); "param" marks fitted model constants.
UNITS = frozenset({
    "cycles", "bytes_per_clk_sm", "bytes_per_clk", "GBps", "TBps",
    "TFLOPS", "TOPS", "GFLOPS", "ms", "tokens_per_s", "watts",
    "tflops_per_watt", "percent", "ratio", "param",
})

#: Anchors a record's provenance string must match: tables and prose sections
#: of the source benchmarking study, vendor datasheets, and fit steps that are
#: part of this artifact's build.
ANCHOR_REGISTRY: dict[str, str] = {
    "Table II": "device properties of the three benchmarked GPUs",
    "Table III": "memory latency in cycles per level",
    "Table IV": "memory throughput per level",
    "Table V": "SASS lowering of tensor-core instructions",
    "Table VI": "warp-level mma latency/throughput, dense and sparse",
    "Table VII": "dense warp-group instruction latency/throughput",
    "Table VIII": "sparse warp-group instruction latency/throughput",
    "Table IX": "warp-group instruction sweep over the N modifier",
    "Table X": "power and energy efficiency of max-shape mma",
    "Table XI": "LLM inference throughput in tokens/s",
    "Async Table (H800)": "tiled-matmul sync vs async copy results, H800",
    "Async Table (A100)": "tiled-matmul sync vs async copy results, A100",
    "Sec. IV-B": "memory-results prose",
    "Sec. IV-C": "tensor-core-results prose",
    "Sec. IV-D": "transformer-engine-results prose",
    "Sec. IV-E": "new-feature-results prose",
    "Fit: async pipeline": "least-squares fit of the async-copy pipeline model",
    "Fit: TE linear": "tuned utilization/overhead curves for the FP8 linear model",
    "Fit: TC efficiency": "per-class tensor-core efficiency and throttle factors",
    "Fit: DSM": "distributed-shared-memory contention/occupancy constants",
    "Vendor datasheet": "public vendor specification, not from the study",
}


def format_params(params: Mapping[str, str]) -> str:
    """Canonical ``k=v;k=v`` form: keys sorted, values stringified."""
    return ";".join(f"{k}={params[k]}" for k in sorted(params))


def parse_params(text: str) -> dict[str, str]:
    if not text:
        return {}
    out: dict[str, str] = {}
    for item in text.split(";"):
        if "=" not in item:
            raise IngestError(f"malformed params entry {item!r} (expected k=v)")
        k, v = item.split("=", 1)
        out[k] = v
    return out


def _format_value(value: float) -> str:
    # repr() is the shortest round-trip form, keeping dumps byte-stable.
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


@dataclass(frozen=True)
class CalibRecord:
    device: str
    metric_id: str
    params: tuple[tuple[str, str], ...]
    value: float
    unit: str
    provenance: str

    @property
    def params_dict(self) -> dict[str, str]:
        return dict(self.params)

    @property
    def key(self) -> tuple[str, str, tuple[tuple[str, str], ...]]:
        return (self.device, self.metric_id, self.params)


def make_record(
    device: str,
    metric_id: str,
    params: Mapping[str, object],
    value: float,
    unit: str,
    provenance: str,
) -> CalibRecord:
    items = tuple(sorted((k, str(v)) for k, v in params.items()))
    return CalibRecord(device, metric_id, items, float(value), unit, provenance)


class CalibrationStore:
    """Exact-match lookup table over calibration records."""

    def __init__(self):
        self._records: dict[tuple, CalibRecord] = {}
        self._unit_by_metric: dict[str, str] = {}

    def __len__(self) -> int:
        return len(self._records)

    def add(self, record: CalibRecord) -> None:
        if not math.isfinite(record.value):
            raise IngestError(
                f"non-finite value for ({record.device}, {record.metric_id})"
            )
        if record.unit not in UNITS:
            raise IngestError(f"unknown unit {record.unit!r}")
        if record.provenance not in ANCHOR_REGISTRY:
            raise IngestError(f"unregistered provenance anchor {record.provenance!r}")
        prior_unit = self._unit_by_metric.get(record.metric_id)
        if prior_unit is not None and prior_unit != record.unit:
            raise IngestError(
                f"metric {record.metric_id} mixes units {prior_unit!r} and {record.unit!r}"
            )
        if record.key in self._records:
            raise IngestError(
                f"duplicate record ({record.device}, {record.metric_id}, "
                f"{format_params(record.params_dict)})"
            )
        self._records[record.key] = record
        self._unit_by_metric[record.metric_id] = record.unit

    def ingest_dataset(self, path: str | Path) -> int:
        """Ingest a CSV dataset; returns the number of records added."""
        path = Path(path)
        try:
            text = path.read_text()
        except FileNotFoundError:
            raise IngestError(f"calibration file not found: {path}")
        count = 0
        reader = csv.reader(io.StringIO(text))
        header = next(reader, None)
        if header is None:
            return 0
        expected = ["device", "metric_id", "params", "value", "unit", "provenance"]
        if [h.strip() for h in header] != expected:
            raise IngestError(f"{path}: bad header {header!r}, expected {expected}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 6:
                raise IngestError(f"{path}:{lineno}: expected 6 columns, got {len(row)}")
            device, metric_id, params_text, value_text, unit, provenance = row
            try:
                value = float(value_text)
            except ValueError:
                raise IngestError(f"{path}:{lineno}: bad value {value_text!r}")
            rec = make_record(device, metric_id, parse_params(params_text),
                              value, unit, provenance)
            try:
                self.add(rec)
            except IngestError as exc:
                raise IngestError(f"{path}:{lineno}: {exc}")
            count += 1
        return count

    def lookup(
        self, device: str, metric_id: str, params: Mapping[str, object] | None = None
    ) -> CalibRecord:
        """Exact-match record; raises AbsentRecordError when no record exists."""
        key = make_record(device, metric_id, params or {}, 0.0, "param", "Fit: TC efficiency").key
        rec = self._records.get(key)
        if rec is None:
            raise AbsentRecordError(
                f"no record for ({device}, {metric_id}, "
                f"{format_params({k: str(v) for k, v in (params or {}).items()})})"
            )
        return rec

    def value(
        self, device: str, metric_id: str, params: Mapping[str, object] | None = None
    ) -> float:
        return self.lookup(device, metric_id, params).value

    def has(
        self, device: str, metric_id: str, params: Mapping[str, object] | None = None
    ) -> bool:
        try:
            self.lookup(device, metric_id, params)
            return True
        except AbsentRecordError:
            return False

    def query(
        self, device: Optional[str] = None, metric_id: Optional[str] = None,
        where: Mapping[str, object] | None = None,
    ) -> list[CalibRecord]:
        """All records matching the given device/metric and param subset."""
        want = {k: str(v) for k, v in (where or {}).items()}
        out = []
        for rec in self._records.values():
            if device is not None and rec.device != device:
                continue
            if metric_id is not None and rec.metric_id != metric_id:
                continue
            pd = rec.params_dict
            if any(pd.get(k) != v for k, v in want.items()):
                continue
            out.append(rec)
        out.sort(key=lambda r: r.key)
        return out

    def records(self) -> Iterable[CalibRecord]:
        return sorted(self._records.values(), key=lambda r: r.key)

    def dump_canonical(self) -> str:
        """Byte-stable canonical CSV of the full store (sorted, shortest floats)."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["device", "metric_id", "params", "value", "unit", "provenance"])
        for rec in self.records():
            writer.writerow([
                rec.device, rec.metric_id, format_params(rec.params_dict),
                _format_value(rec.value), rec.unit, rec.provenance,
            ])
        return buf.getvalue()
