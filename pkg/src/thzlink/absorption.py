"""Molecular absorption coefficient providers and link transmittance.

The absorption coefficient k(f) itself comes from external data (spectroscopic
models or measurements); this module only wraps it behind a provider interface
so the rest of the library never cares where the numbers came from. Two
providers are available: a constant coefficient and a strictly parsed
frequency table with piecewise-linear interpolation and no extrapolation.

Conventions: frequencies in Hz, distances in m, k in 1/m (natural-log
convention, so transmitted power fraction is e^{-k d}).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

from .errors import InvalidParameterError, OutOfDomainError


@dataclass(frozen=True)
class ConstantAbsorption:
    """Frequency-independent absorption coefficient."""

    k: float  # 1/m

    def __post_init__(self):
        if not (self.k >= 0.0 and math.isfinite(self.k)):
            raise InvalidParameterError(f"absorption coefficient must be >= 0, got {self.k}")


@dataclass(frozen=True)
class TabulatedAbsorption:
    """Piecewise-linear absorption table over frequency.

    Rows must be strictly increasing in frequency, with at least two rows.
    Queries outside the tabulated range raise rather than extrapolate.
    """

    rows: tuple  # of (frequency_hz, k_per_m)

    def __post_init__(self):
        rows = tuple((float(f), float(k)) for f, k in self.rows)
        if len(rows) < 2:
            raise InvalidParameterError("absorption table needs at least 2 rows")
        for f, k in rows:
            if not (math.isfinite(f) and math.isfinite(k)):
                raise InvalidParameterError("absorption table contains non-finite values")
            if k < 0.0:
                raise InvalidParameterError(f"absorption coefficient must be >= 0, got {k}")
        freqs = [f for f, _ in rows]
        if any(b <= a for a, b in zip(freqs, freqs[1:])):
            raise InvalidParameterError("absorption table frequencies must be strictly increasing")
        object.__setattr__(self, "rows", rows)

    @property
    def f_min(self) -> float:
        return self.rows[0][0]

    @property
    def f_max(self) -> float:
        return self.rows[-1][0]


AbsorptionProvider = Union[ConstantAbsorption, TabulatedAbsorption]


def absorption_at(provider: AbsorptionProvider, f: float) -> float:
    """Absorption coefficient k at frequency f (Hz), in 1/m."""
    if isinstance(provider, ConstantAbsorption):
        return provider.k
    if not (provider.f_min <= f <= provider.f_max):
        raise OutOfDomainError(
            f"frequency {f} Hz outside table range "
            f"[{provider.f_min}, {provider.f_max}] Hz; extrapolation is not supported"
        )
    rows = provider.rows
    # binary search for the bracketing segment
    lo, hi = 0, len(rows) - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if rows[mid][0] <= f:
            lo = mid
        else:
            hi = mid
    f0, k0 = rows[lo]
    f1, k1 = rows[hi]
    if f == f0:
        return k0
    if f == f1:
        return k1
    t = (f - f0) / (f1 - f0)
    return k0 + t * (k1 - k0)


def transmittance(k: float, d: float) -> float:
    """Fraction e^{-k d} of transmitted power surviving the LoS path."""
    if not (k >= 0.0 and math.isfinite(k)):
        raise InvalidParameterError(f"absorption coefficient must be >= 0, got {k}")
    if not (d > 0.0 and math.isfinite(d)):
        raise InvalidParameterError(f"link distance must be > 0, got {d}")
    return math.exp(-k * d)


@dataclass(frozen=True)
class MediumSpec:
    """Absorbing medium over a link of length d: coefficient k and transmittance a."""

    k: float  # 1/m
    d: float  # m
    a: float = field(init=False)  # unitless, e^{-k d}

    def __post_init__(self):
        object.__setattr__(self, "a", transmittance(self.k, self.d))


def load_absorption_table(path: Union[str, Path]) -> TabulatedAbsorption:
    """Parse a CSV absorption table with header ``frequency_hz,k_per_m``.

    Parsing is strict: the header must match exactly, rows must be finite,
    sorted ascending in frequency and free of duplicates.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InvalidParameterError(f"{path}: empty absorption table") from None
        if [c.strip() for c in header] != ["frequency_hz", "k_per_m"]:
            raise InvalidParameterError(
                f"{path}: expected header 'frequency_hz,k_per_m', got {','.join(header)!r}"
            )
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            if not rec or (len(rec) == 1 and not rec[0].strip()):
                continue
            if len(rec) != 2:
                raise InvalidParameterError(f"{path}:{lineno}: expected 2 columns, got {len(rec)}")
            try:
                f, k = float(rec[0]), float(rec[1])
            except ValueError:
                raise InvalidParameterError(f"{path}:{lineno}: non-numeric row {rec!r}") from None
            if math.isnan(f) or math.isnan(k):
                raise InvalidParameterError(f"{path}:{lineno}: NaN is not a valid table entry")
            rows.append((f, k))
    if len(rows) < 2:
        raise InvalidParameterError(f"{path}: absorption table needs at least 2 rows")
    freqs = [f for f, _ in rows]
    for a, b in zip(freqs, freqs[1:]):
        if b == a:
            raise InvalidParameterError(f"{path}: duplicate frequency {a}")
        if b < a:
            raise InvalidParameterError(f"{path}: frequencies must be sorted ascending")
    try:
        return TabulatedAbsorption(rows=tuple(rows))
    except InvalidParameterError as exc:
        raise InvalidParameterError(f"{path}: {exc}") from None
