"""Static device catalog: hardware descriptions and theoretical peak rates.

Devices are loaded from a JSON document (one object per device) and are
immutable after load, so a catalog can be shared freely across threads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional

from .errors import FormatError, SpecValidationError, UnsupportedDtypeError


class Architecture(Enum):
    AMPERE = "Ampere"
    ADA = "Ada"
    HOPPER = "Hopper"


class MemType(Enum):
    HBM2E = "HBM2e"
    GDDR6X = "GDDR6X"


@dataclass(frozen=True)
class DeviceFeatures:
    dpx_hardware: bool
    dsm: bool
    fp8_tc: bool


@dataclass(frozen=True)
class CacheSizes:
    l1_bytes: int
    l2_bytes: int


@dataclass(frozen=True)
class DeviceSpec:
    """One GPU's static hardware description plus theoretical peaks.

    ``tc_peaks`` maps input dtype name to the dense tensor-core peak in
    TFLOPS (TOPS for integer dtypes). Sparse peaks are always 2x dense.
    ``tc_peaks_wgmma`` optionally overrides per-dtype peaks for the
    warp-group instruction path, where the source study quotes a slightly
    different TF32 figure than for the warp-level path.
    """

    name: str
    architecture: Architecture
    compute_capability: float
    sm_count: int
    cores_per_sm: int
    max_clock_mhz: float
    mem_size_gib: float
    mem_type: MemType
    mem_clock_mhz: float
    mem_bus_bits: int
    mem_bandwidth_gbs: float
    tc_count: int
    tc_generation: int
    power_limit_w: float
    features: DeviceFeatures
    tc_peaks: dict[str, float]
    tc_peaks_wgmma: dict[str, float] = field(default_factory=dict)
    cache_sizes: Optional[CacheSizes] = None
    observed_clock_mhz: Optional[float] = None
    smem_per_sm_bytes: Optional[int] = None
    max_threads_per_sm: Optional[int] = None
    max_blocks_per_sm: Optional[int] = None
    provenance_notes: str = ""

    @property
    def effective_clock_mhz(self) -> float:
        """Clock used for cycle/time conversions (observed override wins)."""
        return self.observed_clock_mhz if self.observed_clock_mhz else self.max_clock_mhz

    @property
    def mem_size_bytes(self) -> float:
        return self.mem_size_gib * 2**30


def peak_tc_throughput(
    device: DeviceSpec, input_dtype: str, sparse: bool = False, *, api: str = "mma"
) -> float:
    """Theoretical tensor-core peak for a dtype, doubled when sparse.

    ``api`` selects the per-table peak set: the warp-group path ("wgmma")
    may carry an overriding figure for some dtypes.
    """
    peaks = dict(device.tc_peaks)
    if api == "wgmma":
        peaks.update(device.tc_peaks_wgmma)
    key = _canonical_dtype(input_dtype)
    if key not in peaks:
        raise UnsupportedDtypeError(
            f"{device.name} has no tensor-core peak for dtype {input_dtype!r}"
        )
    value = peaks[key]
    return 2.0 * value if sparse else value


def _canonical_dtype(dtype: str) -> str:
    # FP8 variants share one peak entry.
    up = dtype.upper()
    if up in ("FP8_E4M3", "FP8_E5M2"):
        return "FP8"
    return up


_REQUIRED = [
    "name", "architecture", "compute_capability", "sm_count", "cores_per_sm",
    "max_clock_mhz", "mem_size_gib", "mem_type", "mem_clock_mhz", "mem_bus_bits",
    "mem_bandwidth_gbs", "tc_count", "tc_generation", "power_limit_w",
    "features", "tc_peaks",
]


def _parse_device(obj: dict, index: int) -> DeviceSpec:
    name = obj.get("name", f"<entry {index}>")
    for key in _REQUIRED:
        if key not in obj:
            raise FormatError(f"device {name!r}: missing field {key!r}")
    try:
        arch = Architecture(obj["architecture"])
    except ValueError:
        raise FormatError(f"device {name!r}: unknown architecture {obj['architecture']!r}")
    try:
        mem_type = MemType(obj["mem_type"])
    except ValueError:
        raise FormatError(f"device {name!r}: unknown mem_type {obj['mem_type']!r}")

    feats = obj["features"]
    features = DeviceFeatures(
        dpx_hardware=bool(feats.get("dpx_hardware", False)),
        dsm=bool(feats.get("dsm", False)),
        fp8_tc=bool(feats.get("fp8_tc", False)),
    )
    cache = None
    if obj.get("cache_sizes"):
        cache = CacheSizes(
            l1_bytes=int(obj["cache_sizes"]["l1_bytes"]),
            l2_bytes=int(obj["cache_sizes"]["l2_bytes"]),
        )
    return DeviceSpec(
        name=str(obj["name"]),
        architecture=arch,
        compute_capability=float(obj["compute_capability"]),
        sm_count=int(obj["sm_count"]),
        cores_per_sm=int(obj["cores_per_sm"]),
        max_clock_mhz=float(obj["max_clock_mhz"]),
        mem_size_gib=float(obj["mem_size_gib"]),
        mem_type=mem_type,
        mem_clock_mhz=float(obj["mem_clock_mhz"]),
        mem_bus_bits=int(obj["mem_bus_bits"]),
        mem_bandwidth_gbs=float(obj["mem_bandwidth_gbs"]),
        tc_count=int(obj["tc_count"]),
        tc_generation=int(obj["tc_generation"]),
        power_limit_w=float(obj["power_limit_w"]),
        features=features,
        tc_peaks={_canonical_dtype(k): float(v) for k, v in obj["tc_peaks"].items()},
        tc_peaks_wgmma={
            _canonical_dtype(k): float(v)
            for k, v in obj.get("tc_peaks_wgmma", {}).items()
        },
        cache_sizes=cache,
        observed_clock_mhz=obj.get("observed_clock_mhz"),
        smem_per_sm_bytes=obj.get("smem_per_sm_bytes"),
        max_threads_per_sm=obj.get("max_threads_per_sm"),
        max_blocks_per_sm=obj.get("max_blocks_per_sm"),
        provenance_notes=obj.get("provenance_notes", ""),
    )


def _check_invariants(dev: DeviceSpec) -> None:
    def bad(field: str, msg: str):
        raise SpecValidationError(dev.name, field, msg)

    if dev.sm_count <= 0:
        bad("sm_count", "must be positive")
    if dev.tc_count != 4 * dev.sm_count:
        bad("tc_count", f"expected 4 x sm_count = {4 * dev.sm_count}, got {dev.tc_count}")
    if dev.mem_bandwidth_gbs <= 0:
        bad("mem_bandwidth_gbs", "must be positive")
    if dev.power_limit_w <= 0:
        bad("power_limit_w", "must be positive")
    if dev.architecture is not Architecture.HOPPER:
        if dev.features.dsm:
            bad("features.dsm", "only Hopper devices have distributed shared memory")
        if dev.features.dpx_hardware:
            bad("features.dpx_hardware", "only Hopper devices have DPX hardware")
    for dtype, value in {**dev.tc_peaks, **dev.tc_peaks_wgmma}.items():
        if not math.isfinite(value) or value <= 0:
            bad(f"tc_peaks[{dtype}]", "peak must be a positive finite number")


def load_devices(path: str | Path) -> list[DeviceSpec]:
    """Load a device-spec JSON file, validate it, and return devices sorted by name."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise FormatError(f"device file not found: {path}")
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: line {exc.lineno}: {exc.msg}")
    if not isinstance(raw, list):
        raise FormatError(f"{path}: expected a top-level JSON array of device objects")

    devices = [_parse_device(obj, i) for i, obj in enumerate(raw)]
    seen: set[str] = set()
    for dev in devices:
        if dev.name in seen:
            raise SpecValidationError(dev.name, "name", "duplicate device name")
        seen.add(dev.name)
        _check_invariants(dev)
    return sorted(devices, key=lambda d: d.name)


class DeviceCatalog:
    """Immutable, name-indexed view over a list of device specs."""

    def __init__(self, devices: list[DeviceSpec]):
        self._devices = tuple(sorted(devices, key=lambda d: d.name))
        self._by_name = {d.name: d for d in self._devices}

    @classmethod
    def load(cls, path: str | Path) -> "DeviceCatalog":
        return cls(load_devices(path))

    def __iter__(self):
        return iter(self._devices)

    def __len__(self) -> int:
        return len(self._devices)

    def names(self) -> list[str]:
        return [d.name for d in self._devices]

    def get(self, name: str) -> DeviceSpec:
        try:
            return self._by_name[name]
        except KeyError:
            raise KeyError(f"unknown device {name!r}; available: {self.names()}")
