"""Memory-hierarchy model: per-level latency, throughput, and derived ratios.

Levels are pinned explicitly (the measurement methodology selects the level
via load modifiers, not via working-set sweeps), so the primary operations
are calibrated lookups plus unit conversions. An optional capacity-based
level selector is available when a device carries cache sizes.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .calibration import CalibrationStore
from .devices import DeviceCatalog, DeviceSpec
from .errors import AbsentRecordError, UsageError


class MemLevel(Enum):
    L1 = "L1"
    SHARED = "Shared"
    L2 = "L2"
    GLOBAL = "Global"


class MemDtype(Enum):
    FP32 = "FP32"
    FP64 = "FP64"
    FP32V4 = "FP32v4"


@dataclass(frozen=True)
class MemAccess:
    dtype: MemDtype
    vector_width: int = 1

    def __post_init__(self):
        if self.dtype is MemDtype.FP32V4 and self.vector_width != 4:
            raise UsageError("FP32v4 access implies vector_width=4")


#: FP64 add throughput measured on the devices whose FP64 pipe, not the cache,
#: bottlenecks FP64 cache reads. Stored per device in the calibration set.
FP64_PIPE_METRIC = "mem.fp64_add_rate"

_LEVEL_METRIC = {
    MemLevel.L1: "mem.latency.l1",
    MemLevel.SHARED: "mem.latency.shared",
    MemLevel.L2: "mem.latency.l2",
    MemLevel.GLOBAL: "mem.latency.global",
}

_TPUT_METRIC = {
    MemLevel.L1: ("mem.throughput.l1", "bytes_per_clk_sm"),
    MemLevel.SHARED: ("mem.throughput.shared", "bytes_per_clk_sm"),
    MemLevel.L2: ("mem.throughput.l2", "bytes_per_clk"),
    MemLevel.GLOBAL: ("mem.throughput.global", "GBps"),
}


@dataclass(frozen=True)
class CacheRate:
    value: float
    unit: str
    clamped: bool


@dataclass(frozen=True)
class LatencyRatios:
    avg_l2_over_l1: float
    avg_global_over_l2: float
    l2_over_global_bw: dict[str, float]


def bytes_per_clk_to_gbs(value: float, device: DeviceSpec, per_sm: bool = False) -> float:
    """Convert a per-clock byte rate to GB/s (1e9) at the device's effective clock."""
    scale = device.sm_count if per_sm else 1
    return value * scale * device.effective_clock_mhz * 1e6 / 1e9


class MemoryModel:
    def __init__(self, catalog: DeviceCatalog, store: CalibrationStore):
        self.catalog = catalog
        self.store = store

    def level_latency(self, device: DeviceSpec, level: MemLevel) -> float:
        """Calibrated access latency in cycles for one memory level."""
        return self.store.value(device.name, _LEVEL_METRIC[level])

    def level_throughput(
        self, device: DeviceSpec, level: MemLevel, access: Optional[MemAccess] = None
    ) -> tuple[float, str]:
        """Calibrated throughput and its unit for one level.

        Global memory ignores the access dtype (the measurement kernel is a
        fixed vectorized float4 read/write mix).
        """
        metric, unit = _TPUT_METRIC[level]
        if level in (MemLevel.SHARED, MemLevel.GLOBAL):
            return self.store.value(device.name, metric), unit
        if access is None:
            raise UsageError(f"{level.value} throughput requires an access dtype")
        value = self.store.value(device.name, metric, {"dtype": access.dtype.value})
        return value, unit

    def _fp64_pipe_rate(self, device: DeviceSpec) -> Optional[float]:
        try:
            return self.store.value(device.name, FP64_PIPE_METRIC)
        except AbsentRecordError:
            return None

    def effective_cache_throughput(
        self, device: DeviceSpec, level: MemLevel, access: MemAccess
    ) -> CacheRate:
        """Cache throughput with the FP64-pipe clamp applied where it binds.

        For FP64 accesses on devices with a 16 B/clk/SM FP64 add pipe, the
        measured cache figure reflects the compute unit, not the cache; the
        clamp flag records when that bound is the binding one.
        """
        if level not in (MemLevel.L1, MemLevel.L2):
            raise UsageError("effective cache throughput is defined for L1/L2 only")
        metric, unit = _TPUT_METRIC[level]
        clamped = False
        if access.dtype is MemDtype.FP64:
            pipe = self._fp64_pipe_rate(device)
            if pipe is not None:
                pipe_at_level = pipe if level is MemLevel.L1 else pipe * device.sm_count
                raw = self._raw_cache_capability(device, level)
                clamped = pipe_at_level < raw
        try:
            value = self.store.value(device.name, metric, {"dtype": access.dtype.value})
        except AbsentRecordError:
            # No measurement: model as min(cache capability, FP64 pipe rate).
            raw = self._raw_cache_capability(device, level)
            pipe = self._fp64_pipe_rate(device)
            if access.dtype is MemDtype.FP64 and pipe is not None:
                pipe_at_level = pipe if level is MemLevel.L1 else pipe * device.sm_count
                value = min(raw, pipe_at_level)
            else:
                value = raw
        return CacheRate(value=value, unit=unit, clamped=clamped)

    def _raw_cache_capability(self, device: DeviceSpec, level: MemLevel) -> float:
        """Demonstrated cache rate: max over the non-FP64 measured dtypes."""
        metric, _ = _TPUT_METRIC[level]
        rates = [
            self.store.value(device.name, metric, {"dtype": d.value})
            for d in (MemDtype.FP32, MemDtype.FP32V4)
            if self.store.has(device.name, metric, {"dtype": d.value})
        ]
        if not rates:
            raise AbsentRecordError(f"no cache throughput records for {device.name}/{level.value}")
        return max(rates)

    def l2_bandwidth_gbs(self, device: DeviceSpec) -> float:
        """Best measured L2 rate converted to GB/s at the device clock."""
        return bytes_per_clk_to_gbs(self._raw_cache_capability(device, MemLevel.L2), device)

    def global_fraction_of_peak(self, device: DeviceSpec) -> float:
        measured, _ = self.level_throughput(device, MemLevel.GLOBAL)
        return measured / device.mem_bandwidth_gbs

    def latency_ratios(self, devices: Optional[list[DeviceSpec]] = None) -> LatencyRatios:
        devs = list(devices) if devices is not None else list(self.catalog)
        if not devs:
            raise UsageError("latency_ratios requires at least one device")
        l2_l1 = [
            self.level_latency(d, MemLevel.L2) / self.level_latency(d, MemLevel.L1)
            for d in devs
        ]
        g_l2 = [
            self.level_latency(d, MemLevel.GLOBAL) / self.level_latency(d, MemLevel.L2)
            for d in devs
        ]
        bw_ratio = {}
        for d in devs:
            global_gbs, _ = self.level_throughput(d, MemLevel.GLOBAL)
            bw_ratio[d.name] = self.l2_bandwidth_gbs(d) / global_gbs
        return LatencyRatios(
            avg_l2_over_l1=sum(l2_l1) / len(l2_l1),
            avg_global_over_l2=sum(g_l2) / len(g_l2),
            l2_over_global_bw=bw_ratio,
        )

    def working_set_level(self, device: DeviceSpec, working_set_bytes: int) -> MemLevel:
        """Capacity-based level selection (needs cache_sizes; best effort).

        Shared memory is excluded: it is explicitly allocated, never a
        capacity fallback.
        """
        if device.cache_sizes is None:
            raise UsageError(f"{device.name} carries no cache sizes")
        if working_set_bytes <= device.cache_sizes.l1_bytes:
            return MemLevel.L1
        if working_set_bytes <= device.cache_sizes.l2_bytes:
            return MemLevel.L2
        return MemLevel.GLOBAL
