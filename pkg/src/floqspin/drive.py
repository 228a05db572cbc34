"""Time-periodic magnetic drive fields.

A monochromatic drive is parameterized by its photon energy hbar*Omega
(ueV), amplitude B_F (mT), and a pair of real polarization vectors for the
cosine and sine quadratures.  The general representation is a table of
complex Fourier harmonics B^(m) with

    B(t) = sum_m B^(m) exp(-i m Omega t),

real for all t because B^(-m) is the conjugate of B^(m).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import HBAR

__all__ = [
    "POLARIZATION_NAMES",
    "polarization_from_name",
    "DriveSpec",
    "FourierField",
    "to_fourier",
    "field_at",
]

_AXIS_INDEX = {"x": 0, "y": 1, "z": 2}


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def _unit(axis: str) -> np.ndarray:
    e = np.zeros(3)
    e[_AXIS_INDEX[axis]] = 1.0
    return e


def _build_catalog() -> dict[str, tuple[np.ndarray, np.ndarray]]:
    zero = np.zeros(3)
    cat: dict[str, tuple[np.ndarray, np.ndarray]] = {}
    for a in "xyz":
        cat[a] = (_unit(a), zero)
    # 45-degree tilts between two principal axes, normalized to unit magnitude.
    for a, b in ("xy", "xz", "yz"):
        for sign, tag in ((1.0, "+"), (-1.0, "-")):
            cat[f"+{a}{tag}{b}"] = ((_unit(a) + sign * _unit(b)) / np.sqrt(2.0), zero)
    # Circular polarizations in a principal plane; for "(ab)+" the field points
    # along a at t = 0 and along b a quarter period later.
    for a, b in ("xy", "xz", "yz"):
        for sign, tag in ((1.0, "+"), (-1.0, "-")):
            cat[f"({a}{b}){tag}"] = (_unit(a), sign * _unit(b))
    return {name: (_readonly(pc), _readonly(ps)) for name, (pc, ps) in cat.items()}


_CATALOG = _build_catalog()

POLARIZATION_NAMES = tuple(_CATALOG)
"""Accepted polarization names, e.g. "z", "+x-y", "(xz)+"."""


def polarization_from_name(name: str) -> tuple[np.ndarray, np.ndarray]:
    """Cosine and sine polarization vectors for a named polarization.

    Linear polarizations lie along a principal axis, tilted ones at 45
    degrees between two axes (unit normalized), and circular ones rotate in
    a principal plane with the trailing sign selecting the sense of
    rotation.
    """
    try:
        p_cos, p_sin = _CATALOG[name]
    except KeyError:
        raise ValueError(
            f"unknown polarization {name!r}; expected one of: {', '.join(POLARIZATION_NAMES)}"
        ) from None
    return p_cos.copy(), p_sin.copy()


@dataclass(frozen=True)
class DriveSpec:
    """Monochromatic drive: photon energy (ueV), amplitude (mT), polarization.

    The field is B(t) = b_f * (p_cos cos(Omega t) + p_sin sin(Omega t)).
    """

    hbar_omega: float
    b_f: float = 0.0
    p_cos: np.ndarray = None  # type: ignore[assignment]
    p_sin: np.ndarray = None  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if not (np.isfinite(self.hbar_omega) and self.hbar_omega > 0):
            raise ValueError("hbar_omega must be positive and finite")
        if not np.isfinite(self.b_f):
            raise ValueError("b_f must be finite")
        p_cos = np.zeros(3) if self.p_cos is None else np.array(self.p_cos, dtype=float)
        p_sin = np.zeros(3) if self.p_sin is None else np.array(self.p_sin, dtype=float)
        for name, v in (("p_cos", p_cos), ("p_sin", p_sin)):
            if v.shape != (3,) or not np.all(np.isfinite(v)):
                raise ValueError(f"{name} must be a finite real 3-vector")
        object.__setattr__(self, "p_cos", _readonly(p_cos))
        object.__setattr__(self, "p_sin", _readonly(p_sin))

    @classmethod
    def from_name(cls, name: str, hbar_omega: float, b_f: float = 0.0) -> "DriveSpec":
        p_cos, p_sin = polarization_from_name(name)
        return cls(hbar_omega=hbar_omega, b_f=b_f, p_cos=p_cos, p_sin=p_sin)

    @property
    def p_plus(self) -> np.ndarray:
        """Complex polarization vector of the m = +1 harmonic."""
        return (self.p_cos + 1j * self.p_sin) / 2.0

    @property
    def p_minus(self) -> np.ndarray:
        """Complex polarization vector of the m = -1 harmonic (conjugate of p_plus)."""
        return (self.p_cos - 1j * self.p_sin) / 2.0

    @property
    def period(self) -> float:
        """Drive period 2 pi hbar / (hbar Omega), in ns."""
        return 2.0 * np.pi * HBAR / self.hbar_omega

    def with_amplitude(self, b_f: float) -> "DriveSpec":
        return DriveSpec(hbar_omega=self.hbar_omega, b_f=b_f, p_cos=self.p_cos, p_sin=self.p_sin)


class FourierField:
    """Fourier-harmonic table of a real time-periodic magnetic field.

    Harmonics are stored for m >= 0 only; B^(-m) is served as the conjugate
    of B^(m), which enforces reality of B(t) by construction.  Supplying
    both +m and -m entries that are not conjugates raises ValueError.
    """

    __slots__ = ("hbar_omega", "_table")

    def __init__(self, hbar_omega: float, harmonics=()) -> None:
        if not (np.isfinite(hbar_omega) and hbar_omega > 0):
            raise ValueError("hbar_omega must be positive and finite")
        table: dict[int, np.ndarray] = {}
        items = harmonics.items() if hasattr(harmonics, "items") else harmonics
        for m, vec in items:
            m = int(m)
            vec = np.asarray(vec, dtype=complex)
            if vec.shape != (3,) or not np.all(np.isfinite(vec)):
                raise ValueError(f"harmonic {m} must be a finite 3-vector")
            key, val = (m, vec) if m >= 0 else (-m, vec.conj())
            if key in table:
                scale = max(1.0, float(np.abs(val).max()))
                if np.abs(table[key] - val).max() > 1e-12 * scale:
                    raise ValueError(
                        f"harmonics +/-{key} violate the reality condition B(-m) = conj(B(m))"
                    )
            else:
                table[key] = val.copy()
        if 0 in table:
            scale = max(1.0, float(np.abs(table[0]).max()))
            if np.abs(table[0].imag).max() > 1e-12 * scale:
                raise ValueError("the m = 0 harmonic must be real")
            table[0] = table[0].real.astype(complex)
        self.hbar_omega = float(hbar_omega)
        self._table = {m: _readonly(v) for m, v in sorted(table.items())}

    @property
    def indices(self) -> tuple[int, ...]:
        """All harmonic indices represented, negative partners included."""
        out = set()
        for m in self._table:
            out.add(m)
            if m > 0:
                out.add(-m)
        return tuple(sorted(out))

    def harmonic(self, m: int) -> np.ndarray:
        """B^(m) as a complex 3-vector (mT); zero if not stored."""
        m = int(m)
        v = self._table.get(abs(m))
        if v is None:
            return np.zeros(3, dtype=complex)
        return v.copy() if m >= 0 else v.conj()

    def items(self):
        for m in self.indices:
            yield m, self.harmonic(m)

    @property
    def period(self) -> float:
        """Field period 2 pi hbar / (hbar Omega), in ns."""
        return 2.0 * np.pi * HBAR / self.hbar_omega

    def scaled(self, factor: float) -> "FourierField":
        """New table with every harmonic multiplied by ``factor``."""
        return FourierField(self.hbar_omega, {m: factor * v for m, v in self._table.items()})

    def amplitude_scale(self) -> float:
        """Rough peak-field magnitude (mT), used to size continuation ramps."""
        return float(
            sum(np.linalg.norm(v) * (2.0 if m != 0 else 1.0) for m, v in self._table.items())
        )

    def __repr__(self) -> str:
        return f"FourierField(hbar_omega={self.hbar_omega}, indices={self.indices})"


def to_fourier(drive: DriveSpec) -> FourierField:
    """Harmonic table of a monochromatic drive: B^(+-1) = b_f * (p_cos -+ i p_sin)/2.

    A zero-amplitude drive yields an empty table.
    """
    if drive.b_f == 0.0:
        return FourierField(drive.hbar_omega, {})
    return FourierField(drive.hbar_omega, {1: drive.b_f * drive.p_plus})


def field_at(field: FourierField, t: float) -> np.ndarray:
    """Real drive field (mT) at time ``t`` (ns)."""
    if not np.isfinite(t):
        raise ValueError("t must be finite")
    omega = field.hbar_omega / HBAR
    out = np.zeros(3, dtype=complex)
    for m, vec in field.items():
        out += vec * np.exp(-1j * m * omega * t)
    return out.real
