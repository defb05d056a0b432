"""Measure spec files and report/table serialization.

A measure spec is a JSON object with a ``family`` discriminator; the schema
is documented in the README with one example per family.  Angles accept
either an object form ({"type": "rational", "p": 1, "q": 4}, {"type":
"golden"}, {"type": "sqrt2"}, {"type": "custom", "value": 0.37}) or the
string shorthands "1/4", "golden", "sqrt2"; plain decimal strings parse as
exact rationals.

Delimited exports format floats with 17 significant digits; JSON exports use
the shortest exact round-trip representation with sorted keys, so identical
inputs produce byte-identical files.
"""

from __future__ import annotations

import json
import struct
from fractions import Fraction
from pathlib import Path

import numpy as np

from .angles import Angle
from .errors import SpecError
from .fourier import FourierTable
from .measures import (
    HAAR,
    AtomicMeasure,
    CantorLebesgue,
    CircleMeasure,
    ConvolutionMeasure,
    GappedProduct,
    GridDensity,
    Mixture,
    PowerMeasure,
    ReversedMeasure,
    RieszProduct,
    fejer_coefficients,
)
from .operators import GridChain, NormCurve

SNAPSHOT_MAGIC = b"CMX1"


def fmt(x: float) -> str:
    """A float with 17 significant digits (round-trip safe)."""
    return format(float(x), ".17g")


# ---------------------------------------------------------------------------
# Angle / measure parsing


def parse_angle(obj, path: str) -> Angle:
    if isinstance(obj, str):
        text = obj.strip()
        negate = text.startswith("-") and not text[1:2].isdigit()
        if negate:
            text = text[1:]
        if text == "golden":
            base = Angle.golden()
        elif text == "sqrt2":
            base = Angle.sqrt2()
        else:
            try:
                return Angle.from_fraction(Fraction(obj.strip()))
            except (ValueError, ZeroDivisionError) as exc:
                raise SpecError(path, f"cannot parse angle string {obj!r}: {exc}")
        return -base if negate else base
    if not isinstance(obj, dict):
        raise SpecError(path, "angle must be a string or an object")
    kind = obj.get("type")
    negate = bool(obj.get("negate", False))
    if kind == "rational":
        try:
            angle = Angle.rational(int(obj["p"]), int(obj["q"]))
        except KeyError as exc:
            raise SpecError(path, f"rational angle needs field {exc}")
        except ValueError as exc:
            raise SpecError(path, str(exc))
    elif kind == "golden":
        angle = Angle.golden()
    elif kind == "sqrt2":
        angle = Angle.sqrt2()
    elif kind == "custom":
        if "value" not in obj:
            raise SpecError(path, "custom angle needs a 'value'")
        try:
            angle = Angle.custom(obj["value"])
        except ValueError as exc:
            raise SpecError(path, str(exc))
    else:
        raise SpecError(path, f"unknown angle type {kind!r}")
    return -angle if negate else angle


def _require(obj: dict, key: str, path: str):
    if key not in obj:
        raise SpecError(f"{path}.{key}" if path else key, "missing required field")
    return obj[key]


def parse_measure(obj, path: str = "") -> CircleMeasure:
    """Build a measure from a spec dict (see the README for the schema)."""
    if not isinstance(obj, dict):
        raise SpecError(path or "<root>", "measure spec must be an object")
    family = _require(obj, "family", path)
    here = path or "<root>"
    try:
        if family == "haar":
            return HAAR
        if family == "atomic":
            atoms = _require(obj, "atoms", path)
            pairs = []
            for i, atom in enumerate(atoms):
                apath = f"{here}.atoms[{i}]"
                angle = parse_angle(_require(atom, "angle", apath), f"{apath}.angle")
                weight = float(_require(atom, "weight", apath))
                pairs.append((angle, weight))
            return AtomicMeasure.from_pairs(pairs)
        if family == "grid":
            density = np.asarray(_require(obj, "density", path), dtype=np.float64)
            return GridDensity(density)
        if family == "cantor":
            return CantorLebesgue(float(_require(obj, "theta", path)))
        if family == "riesz":
            co = _require(obj, "coefficients", path)
            prefix = tuple(float(a) for a in co.get("prefix", []))
            tail_obj = co.get("tail")
            tail = None
            if tail_obj is not None:
                kind = _require(tail_obj, "kind", f"{here}.coefficients.tail")
                if kind == "geometric":
                    tail = ("geometric", float(_require(tail_obj, "ratio", f"{here}.coefficients.tail")))
                elif kind == "power":
                    tail = ("power", float(_require(tail_obj, "alpha", f"{here}.coefficients.tail")))
                else:
                    raise SpecError(f"{here}.coefficients.tail.kind", f"unknown tail {kind!r}")
            fr = _require(obj, "frequencies", path)
            fprefix = tuple(int(n) for n in _require(fr, "prefix", f"{here}.frequencies"))
            ratio = float(fr.get("ratio", 4.0))
            return RieszProduct(prefix, fprefix, tail, ratio)
        if family == "gapped":
            raw = _require(obj, "factors", path)
            factors = []
            for i, fobj in enumerate(raw):
                fpath = f"{here}.factors[{i}]"
                if "fejer" in fobj:
                    factors.append(fejer_coefficients(int(fobj["fejer"])))
                elif "cosine" in fobj:
                    factors.append(np.asarray(fobj["cosine"], dtype=np.float64))
                else:
                    raise SpecError(fpath, "factor needs 'cosine' coefficients or a 'fejer' degree")
            scales = obj.get("scales")
            if scales is not None:
                scales = tuple(int(r) for r in scales)
            return GappedProduct(tuple(factors), scales, float(obj.get("ratio", 2.0)))
        if family == "mixture":
            comps = _require(obj, "components", path)
            parsed = []
            for i, comp in enumerate(comps):
                cpath = f"{here}.components[{i}]"
                w = float(_require(comp, "weight", cpath))
                m = parse_measure(_require(comp, "measure", cpath), f"{cpath}.measure")
                parsed.append((w, m))
            return Mixture(tuple(parsed))
        if family == "power":
            base = parse_measure(_require(obj, "base", path), f"{here}.base")
            return PowerMeasure(base, int(_require(obj, "exponent", path)))
        if family == "reversed":
            return ReversedMeasure(parse_measure(_require(obj, "base", path), f"{here}.base"))
        if family == "convolution":
            left = parse_measure(_require(obj, "left", path), f"{here}.left")
            right = parse_measure(_require(obj, "right", path), f"{here}.right")
            return ConvolutionMeasure(left, right)
    except SpecError:
        raise
    except Exception as exc:  # invariant violations surface as spec errors
        raise SpecError(here, str(exc))
    raise SpecError(f"{here}.family", f"unknown family {family!r}")


def load_measure(path: str | Path) -> CircleMeasure:
    p = Path(path)
    try:
        obj = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise SpecError(str(p), f"invalid JSON: {exc}")
    return parse_measure(obj)


# ---------------------------------------------------------------------------
# Tabular writers (csv or json rows)


def write_rows(path: Path, header: list[str], rows, fmt_mode: str) -> None:
    if fmt_mode == "csv":
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join(row))
        path.write_text("\n".join(lines) + "\n")
    elif fmt_mode == "json":
        payload = {"columns": header, "rows": [list(r) for r in rows]}
        path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    else:
        raise SpecError("format", f"unknown output format {fmt_mode!r}")


def write_fourier_table(table: FourierTable, path: str | Path, fmt_mode: str = "csv") -> Path:
    """Columns n, re, im, abs, source."""
    path = Path(path)
    rows = []
    N = table.half_width
    for n in range(-N, N + 1):
        v = table.values[n + N]
        rows.append(
            (str(n), fmt(v.real), fmt(v.imag), fmt(abs(v)), table.source_name(n))
        )
    write_rows(path, ["n", "re", "im", "abs", "source"], rows, fmt_mode)
    return path


def write_norm_curve(curve: NormCurve, path: str | Path, fmt_mode: str = "csv") -> Path:
    """Columns n, value, kind, p."""
    path = Path(path)
    rows = [
        (str(int(n)), fmt(v), kind, curve.label)
        for n, v, kind in zip(curve.ns, curve.values, curve.kinds)
    ]
    write_rows(path, ["n", "value", "kind", "p"], rows, fmt_mode)
    return path


def write_conze_scan(scan: dict[int, np.ndarray], path: str | Path, fmt_mode: str = "csv") -> Path:
    """Columns n, ratio_j1, ratio_j2, ... for the scanned positive frequencies."""
    path = Path(path)
    js = sorted(scan)
    length = len(scan[js[0]])
    rows = []
    for i in range(length):
        row = [str(i + 1)]
        for j in js:
            v = scan[j][i]
            if np.isfinite(v):
                row.append(fmt(v))
            else:
                row.append("nan" if np.isnan(v) else "inf")
        rows.append(tuple(row))
    write_rows(path, ["n"] + [f"ratio_j{j}" for j in js], rows, fmt_mode)
    return path


def write_spectrum_points(table: FourierTable, path: str | Path, fmt_mode: str = "csv") -> Path:
    """Columns n, re, im (the plottable point cloud)."""
    path = Path(path)
    N = table.half_width
    rows = [
        (str(n), fmt(table.values[n + N].real), fmt(table.values[n + N].imag))
        for n in range(-N, N + 1)
    ]
    write_rows(path, ["n", "re", "im"], rows, fmt_mode)
    return path


def write_json(payload: dict, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    return path


# ---------------------------------------------------------------------------
# Grid chain snapshots (binary)


def write_chain_snapshot(chain: GridChain, path: str | Path) -> Path:
    """Binary layout: magic 'CMX1', u64 cell count, f64 masses, little-endian."""
    path = Path(path)
    blob = struct.pack("<4sQ", SNAPSHOT_MAGIC, chain.n_cells)
    blob += chain.p.astype("<f8").tobytes()
    path.write_bytes(blob)
    return path


def read_chain_snapshot(path: str | Path) -> GridChain:
    raw = Path(path).read_bytes()
    magic, n = struct.unpack_from("<4sQ", raw)
    if magic != SNAPSHOT_MAGIC:
        raise SpecError(str(path), "not a chain snapshot (bad magic)")
    p = np.frombuffer(raw, dtype="<f8", offset=12, count=n).astype(np.float64)
    return GridChain(int(n), p, np.fft.fft(p))
