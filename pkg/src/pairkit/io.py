"""File interchange: patterns, joint spectra, tag streams, traces.

Text formats are CSV with ``#``-prefixed header comments; floats are
written with ``repr`` so values round-trip exactly.  The tag-stream binary
format is a flat little-endian record stream (u8 channel id, f64 seconds)
with channel ids from :data:`pairkit.counting.CHANNEL_IDS`.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .counting import CHANNEL_IDS, CHANNELS, CoincidenceHistogram, TagStream
from .grids import FrequencyGrid
from .interference import HomTrace
from .jointspectrum import JointSpectrum
from .poling import PolingPattern

_TAG_RECORD = np.dtype([("channel", "u1"), ("time", "<f8")])


def _write_lines(path, header_lines, rows):
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _fmt(value: float) -> str:
    return repr(float(value))


# ---------------------------------------------------------------------------
# poling patterns


def write_pattern_csv(path, pattern: PolingPattern, header_lines=()):
    rows = [("x_start", "x_end", "sign")]
    starts = pattern.boundaries[:-1]
    ends = pattern.boundaries[1:]
    rows += [
        (_fmt(a), _fmt(b), str(int(s)))
        for a, b, s in zip(starts, ends, pattern.signs)
    ]
    meta = [
        f"length_m={_fmt(pattern.length)}",
        f"nominal_period_m={_fmt(pattern.nominal_period)}",
    ]
    _write_lines(path, list(header_lines) + meta, rows)


def read_pattern_csv(path) -> PolingPattern:
    length = None
    period = None
    starts, ends, signs = [], [], []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("length_m="):
                    length = float(body.split("=", 1)[1])
                elif body.startswith("nominal_period_m="):
                    period = float(body.split("=", 1)[1])
                continue
            if line.startswith("x_start"):
                continue
            a, b, s = line.split(",")
            starts.append(float(a))
            ends.append(float(b))
            signs.append(int(s))
    if not starts:
        raise ValueError(f"no segments found in {path}")
    boundaries = np.array(starts + [ends[-1]])
    if length is None:
        length = boundaries[-1]
    if period is None:
        raise ValueError(f"{path} lacks a nominal_period_m header")
    return PolingPattern(boundaries, np.array(signs, np.int8), length, period)


# ---------------------------------------------------------------------------
# joint spectra

_GRID_FIELDS = (
    "signal_center",
    "idler_center",
    "signal_span",
    "idler_span",
    "n_signal",
    "n_idler",
)


def _grid_dict(grid: FrequencyGrid) -> dict:
    return {name: getattr(grid, name) for name in _GRID_FIELDS}


def _grid_from_dict(data: dict) -> FrequencyGrid:
    return FrequencyGrid(**{name: data[name] for name in _GRID_FIELDS})


def write_jsa_csv(path, jsa: JointSpectrum, header_lines=()):
    grid = jsa.grid
    meta = [f"{name}={_fmt(getattr(grid, name))}" for name in _GRID_FIELDS[:4]]
    meta += [f"n_signal={grid.n_signal}", f"n_idler={grid.n_idler}"]
    rows = [("re", "im")]
    flat = jsa.amplitude.ravel()
    rows += [(_fmt(v.real), _fmt(v.imag)) for v in flat]
    _write_lines(path, list(header_lines) + meta, rows)


def read_jsa_csv(path) -> JointSpectrum:
    meta: dict[str, float] = {}
    re, im = [], []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, value = body.partition("=")
                    if key in _GRID_FIELDS:
                        meta[key] = float(value)
                continue
            if line.startswith("re"):
                continue
            a, b = line.split(",")
            re.append(float(a))
            im.append(float(b))
    grid = FrequencyGrid(
        signal_center=meta["signal_center"],
        idler_center=meta["idler_center"],
        signal_span=meta["signal_span"],
        idler_span=meta["idler_span"],
        n_signal=int(meta["n_signal"]),
        n_idler=int(meta["n_idler"]),
    )
    amp = (np.array(re) + 1j * np.array(im)).reshape(grid.n_signal, grid.n_idler)
    return JointSpectrum(grid, amp)


def write_jsa_json(path, jsa: JointSpectrum, metadata: dict | None = None):
    payload = {
        "grid": _grid_dict(jsa.grid),
        "amplitude_re": jsa.amplitude.real.tolist(),
        "amplitude_im": jsa.amplitude.imag.tolist(),
    }
    if metadata:
        payload["metadata"] = metadata
    Path(path).write_text(json.dumps(payload), encoding="utf-8")


def read_jsa_json(path) -> JointSpectrum:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    grid = _grid_from_dict(payload["grid"])
    amp = np.array(payload["amplitude_re"]) + 1j * np.array(payload["amplitude_im"])
    return JointSpectrum(grid, amp)


# ---------------------------------------------------------------------------
# tag streams


def write_tagstream_csv(path, stream: TagStream, header_lines=()):
    rows = [("channel", "timestamp_s")]
    for name in CHANNELS:
        rows += [(name, _fmt(t)) for t in stream[name]]
    meta = [
        f"duration_s={_fmt(stream.duration)}",
        f"repetition_rate_hz={_fmt(stream.repetition_rate)}",
    ]
    _write_lines(path, list(header_lines) + meta, rows)


def read_tagstream_csv(path) -> TagStream:
    duration = None
    rate = None
    collected: dict[str, list[float]] = {name: [] for name in CHANNELS}
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("duration_s="):
                    duration = float(body.split("=", 1)[1])
                elif body.startswith("repetition_rate_hz="):
                    rate = float(body.split("=", 1)[1])
                continue
            if line.startswith("channel"):
                continue
            name, value = line.split(",")
            collected[name].append(float(value))
    if duration is None or rate is None:
        raise ValueError(f"{path} lacks duration/repetition-rate headers")
    channels = {name: np.array(values, dtype=float) for name, values in collected.items()}
    return TagStream(channels=channels, duration=duration, repetition_rate=rate)


def write_tagstream_binary(path, stream: TagStream):
    total = sum(stream[name].size for name in CHANNELS)
    records = np.empty(total, dtype=_TAG_RECORD)
    offset = 0
    for name in CHANNELS:
        times = stream[name]
        records["channel"][offset : offset + times.size] = CHANNEL_IDS[name]
        records["time"][offset : offset + times.size] = times
        offset += times.size
    with Path(path).open("wb") as fh:
        header = np.array(
            [stream.duration, stream.repetition_rate], dtype="<f8"
        ).tobytes()
        fh.write(b"PKTAGS01")
        fh.write(header)
        fh.write(records.tobytes())


def read_tagstream_binary(path) -> TagStream:
    raw = Path(path).read_bytes()
    if raw[:8] != b"PKTAGS01":
        raise ValueError(f"{path} is not a pairkit tag-stream file")
    duration, rate = np.frombuffer(raw[8:24], dtype="<f8")
    records = np.frombuffer(raw[24:], dtype=_TAG_RECORD)
    channels = {}
    for name, cid in CHANNEL_IDS.items():
        channels[name] = np.sort(records["time"][records["channel"] == cid])
    return TagStream(channels=channels, duration=float(duration), repetition_rate=float(rate))


# ---------------------------------------------------------------------------
# traces, sweeps, histograms


def write_hom_trace_csv(path, trace: HomTrace, header_lines=()):
    rows = [("tau_s", "rate", "visibility")]
    rows += [
        (_fmt(t), _fmt(c), _fmt(1.0 - c))
        for t, c in zip(trace.delays, trace.rates)
    ]
    meta = [f"visibility_zero_delay={_fmt(trace.visibility)}"]
    _write_lines(path, list(header_lines) + meta, rows)


def write_rsweep_csv(path, sweep: np.ndarray, header_lines=()):
    rows = [("reflectivity", "visibility")]
    rows += [(_fmt(r), _fmt(v)) for r, v in sweep]
    _write_lines(path, list(header_lines), rows)


def write_histogram_csv(path, hist: CoincidenceHistogram, header_lines=()):
    rows = [("delay_s", "counts")]
    rows += [
        (_fmt(d), str(int(c)))
        for d, c in zip(hist.delay_axis(), hist.counts)
    ]
    meta = [
        f"bin_width_s={_fmt(hist.bin_width)}",
        f"channel_a={hist.channel_a}",
        f"channel_b={hist.channel_b}",
    ]
    _write_lines(path, list(header_lines) + meta, rows)


def write_marginals_csv(path, axis_nm, top, bot=None, header_lines=()):
    if bot is None:
        rows = [("wavelength_nm", "intensity")]
        rows += [(_fmt(x), _fmt(a)) for x, a in zip(axis_nm, top)]
    else:
        rows = [("wavelength_nm", "intensity_top", "intensity_bot")]
        rows += [(_fmt(x), _fmt(a), _fmt(b)) for x, a, b in zip(axis_nm, top, bot)]
    _write_lines(path, list(header_lines), rows)


def write_schmidt_csv(path, spectrum, header_lines=()):
    rows = [("mode", "coefficient")]
    rows += [(str(n), _fmt(nu)) for n, nu in enumerate(spectrum.coefficients)]
    _write_lines(path, list(header_lines), rows)


def write_keyvalue_csv(path, items, header_lines=()):
    rows = [("key", "value")]
    rows += [(str(k), _fmt(v)) for k, v in items]
    _write_lines(path, list(header_lines), rows)


def write_tofmap_csv(path, centers_signal_nm, centers_idler_nm, counts, header_lines=()):
    rows = [("signal_nm", "idler_nm", "counts")]
    for i, s in enumerate(centers_signal_nm):
        for j, w in enumerate(centers_idler_nm):
            c = counts[i, j]
            if c:
                rows.append((_fmt(s), _fmt(w), str(int(c))))
    _write_lines(path, list(header_lines), rows)
