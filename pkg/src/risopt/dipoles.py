"""Multiport impedance model of the Tx / RIS / Rx scene.

Every antenna in the scene is a thin strip dipole carrying an assumed
sinusoidal current. Self and mutual impedances come from the induced-EMF
method: the exact near field of a sinusoidal filament reduces the coupling
integral to sine/cosine integrals for any parallel-in-echelon pair, which
covers side-by-side (axial offset 0), collinear (radial separation 0) and
everything in between. Strip conductors are mapped to equivalent cylinders
of radius strip_width/4.

Port convention: port 1 = Tx, port 2 = Rx, ports 3..N+2 = RIS elements in
row-major order.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.constants import c as C0, epsilon_0, mu_0
from scipy.special import sici

from .errors import ConfigurationError, DomainError, MatrixFormatError, ValidityWarning

ETA0 = math.sqrt(mu_0 / epsilon_0)

#: Reciprocity tolerance applied when validating matrices (relative).
SYMMETRY_RTOL = 1e-9


def sine_integral(u):
    """Si(u) = integral of sin(t)/t from 0 to u, for u >= 0."""
    u = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u)):
        raise DomainError("sine integral requires finite input")
    if np.any(u < 0):
        raise DomainError("sine integral requires u >= 0")
    si, _ = sici(u)
    return si if si.ndim else float(si)


def cosine_integral(u):
    """Ci(u) = gamma + ln u + integral of (cos t - 1)/t from 0 to u, for u > 0."""
    u = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u)):
        raise DomainError("cosine integral requires finite input")
    if np.any(u <= 0):
        raise DomainError("cosine integral requires u > 0")
    _, ci = sici(u)
    return ci if ci.ndim else float(ci)


@dataclass(frozen=True)
class DipoleSpec:
    """Flat strip dipole geometry. The equivalent wire radius is strip_width/4."""

    length: float
    strip_width: float
    feed_gap: float = 0.0

    def __post_init__(self):
        if not (self.length > 0 and self.strip_width > 0):
            raise ConfigurationError("dipole length and strip width must be positive")
        if self.strip_width >= self.length:
            raise ConfigurationError("strip width must be smaller than dipole length")
        if self.feed_gap < 0:
            raise ConfigurationError("feed gap must be non-negative")

    @property
    def radius(self):
        return self.strip_width / 4.0


#: Printed unit-cell conductor of the reference board: 32 mm x 5 mm strip
#: with a 2 mm feed gap. On its grounded FR4 substrate this element operates
#: near resonance at 3.55 GHz; in free space the same dims sit far below
#: resonance, so PRINTED_ELEMENT is kept for geometry tests while scenes
#: default to the free-space equivalent below.
PRINTED_ELEMENT = DipoleSpec(length=0.032, strip_width=0.005, feed_gap=0.002)

#: Free-space surrogate of the unit-cell element: same strip and feed gap,
#: length raised to 39.5 mm (0.47 wavelength at 3.55 GHz) so the varactor's
#: capacitive tuning range brackets the element resonance the way it does on
#: the substrate-backed board.
DEFAULT_ELEMENT = DipoleSpec(length=0.0395, strip_width=0.005, feed_gap=0.002)


@dataclass(frozen=True)
class SceneConfig:
    """Geometry and electrical description of the Tx, Rx and RIS element grid.

    The RIS sits in the z = 0 plane with element axes along x (the array's
    long axis). Tx and Rx are dipoles in the x-z plane at angles beta and
    alpha off the surface normal, axes parallel to the element axes. Gains
    are linear and only enter the radar-equation normalization.
    """

    frequency: float = 3.55e9
    rows: int = 2
    cols: int = 7
    col_spacing: float = 0.040
    row_spacing: float = 0.048
    element: DipoleSpec = DEFAULT_ELEMENT
    tx_angle_beta: float = -10.0
    rx_angle_alpha: float = 45.0
    tx_distance: float = 2.0
    rx_distance: float = 2.0
    tx_gain: float = 1.64
    rx_gain: float = 1.64
    source_impedance: complex = 50.0 + 0.0j
    receiver_impedance: complex = 50.0 + 0.0j
    tx_element: DipoleSpec | None = None
    rx_element: DipoleSpec | None = None

    def __post_init__(self):
        if self.frequency <= 0:
            raise ConfigurationError("frequency must be positive")
        if self.rows < 0 or self.cols < 0:
            raise ConfigurationError("rows/cols must be non-negative")
        if self.col_spacing <= 0 or self.row_spacing <= 0:
            raise ConfigurationError("element spacings must be positive")
        if self.tx_distance <= 0 or self.rx_distance <= 0:
            raise ConfigurationError("antenna distances must be positive")
        if abs(self.tx_angle_beta) >= 90 or abs(self.rx_angle_alpha) >= 90:
            raise ConfigurationError("angles must satisfy |angle| < 90 degrees")
        if self.tx_gain <= 0 or self.rx_gain <= 0:
            raise ConfigurationError("gains must be positive")
        if self.cols > 1 and self.col_spacing <= self.element.length:
            raise ConfigurationError(
                "collinear element spacing must exceed the element length "
                f"({self.col_spacing} m <= {self.element.length} m)"
            )

    @property
    def n_elements(self):
        return self.rows * self.cols

    @property
    def n_ports(self):
        return self.n_elements + 2

    @property
    def wavelength(self):
        return C0 / self.frequency

    @property
    def tx_spec(self):
        return self.tx_element if self.tx_element is not None else self.element

    @property
    def rx_spec(self):
        return self.rx_element if self.rx_element is not None else self.element

    def port_positions(self):
        """(N+2, 3) array of port positions: Tx, Rx, then elements row-major."""
        beta = math.radians(self.tx_angle_beta)
        alpha = math.radians(self.rx_angle_alpha)
        pts = [
            (self.tx_distance * math.sin(beta), 0.0, self.tx_distance * math.cos(beta)),
            (self.rx_distance * math.sin(alpha), 0.0, self.rx_distance * math.cos(alpha)),
        ]
        for r in range(self.rows):
            y = (r - (self.rows - 1) / 2.0) * self.row_spacing
            for c in range(self.cols):
                x = (c - (self.cols - 1) / 2.0) * self.col_spacing
                pts.append((x, y, 0.0))
        return np.asarray(pts)


@dataclass
class PortNetwork:
    """(N+2)-port impedance matrix with the fixed port-role convention."""

    z: np.ndarray
    los_zeroed: bool = False

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=complex)
        if self.z.ndim != 2 or self.z.shape[0] != self.z.shape[1]:
            raise MatrixFormatError("impedance matrix must be square")
        if self.z.shape[0] < 2:
            raise MatrixFormatError("network needs at least the Tx and Rx ports")
        scale = np.abs(self.z).max()
        asym = np.abs(self.z - self.z.T).max()
        if scale > 0 and asym > SYMMETRY_RTOL * scale:
            raise MatrixFormatError(
                f"impedance matrix violates reciprocity: max |z_ij - z_ji| = {asym:.3e} "
                f"(allowed {SYMMETRY_RTOL * scale:.3e})"
            )
        if np.any(self.z.real.diagonal() < 0):
            raise MatrixFormatError("diagonal entries must have non-negative real part")

    @property
    def n_ports(self):
        return self.z.shape[0]

    @property
    def n_elements(self):
        return self.n_ports - 2


# --- induced-EMF kernel ----------------------------------------------------
#
# The near field of a unit-amplitude sinusoidal filament of half-length h1
# along z is a sum of three spherical-wave terms centred on its two tips and
# its feed. Integrating that field against the sinusoidal current of a second
# parallel filament reduces, via the substitutions u = sqrt(d^2+t^2) +/- t,
# to the complex function E(u) = Ci(u) - j Si(u) at the integration limits.


def _expi(u):
    """E(u) = Ci(u) - j Si(u) for u > 0 (scalar or array)."""
    si, ci = sici(u)
    return ci - 1j * si


def _u_plus(d, t):
    """sqrt(d^2 + t^2) + t, cancellation-free for t < 0."""
    r = math.hypot(d, t)
    if t >= 0:
        return r + t
    return d * d / (r - t)


def _u_minus(d, t):
    """sqrt(d^2 + t^2) - t, cancellation-free for t > 0."""
    r = math.hypot(d, t)
    if t <= 0:
        return r - t
    return d * d / (r + t)


def _int_kernel(k, d, a, b, sign):
    """Integral of exp(-jk*sqrt(d^2+t^2))/sqrt(d^2+t^2) * exp(sign*jk*t) over [a, b].

    For d = 0 the limits must be positive (non-overlapping collinear case).
    """
    if d == 0.0:
        if a <= 0 or b <= 0:
            raise DomainError("collinear kernel requires strictly positive limits")
        if sign > 0:
            return complex(math.log(b / a))
        return _expi(2 * k * b) - _expi(2 * k * a)
    if sign > 0:
        return -(_expi(k * _u_minus(d, b)) - _expi(k * _u_minus(d, a)))
    return _expi(k * _u_plus(d, b)) - _expi(k * _u_plus(d, a))


def _half_convolution(k, d, h2, c):
    """Integral over [0, h2] of sin(k(h2-xi)) * [K(xi+c) + K(c-xi)] d(xi)."""
    e_p = complex(math.cos(k * c), math.sin(k * c))  # exp(+jkc)
    e_h = complex(math.cos(k * h2), math.sin(k * h2))  # exp(+jkh2)
    jm_hi = _int_kernel(k, d, c, c + h2, -1)
    jp_hi = _int_kernel(k, d, c, c + h2, +1)
    jm_lo = _int_kernel(k, d, c - h2, c, -1)
    jp_lo = _int_kernel(k, d, c - h2, c, +1)
    return (
        e_h * (e_p * jm_hi + jp_lo / e_p) - (e_p * jm_lo + jp_hi / e_p) / e_h
    ) / 2j


def _mutual_loop_referred(k, d, s, h1, h2):
    """Mutual impedance of two parallel sinusoidal filaments, unit loop currents.

    d: radial separation, s: axial offset between centres, h1/h2: half-lengths.
    """
    total = (
        _half_convolution(k, d, h2, s - h1)
        + _half_convolution(k, d, h2, s + h1)
        - 2.0 * math.cos(k * h1) * _half_convolution(k, d, h2, s)
    )
    return 1j * ETA0 / (4 * math.pi) * total


def _feed_referral(k, h1, h2):
    """Scale from loop-referred to feed-referred impedance: 1/(sin kh1 * sin kh2)."""
    s1 = math.sin(k * h1)
    s2 = math.sin(k * h2)
    if s1 == 0.0 or s2 == 0.0:
        raise DomainError("feed referral undefined for full-wave resonant lengths")
    return 1.0 / (s1 * s2)


def _check_validity(spec, wavelength):
    if spec.length >= wavelength:
        warnings.warn(
            f"dipole length {spec.length:.4g} m is >= one wavelength; the sinusoidal "
            "current assumption is outside its validated range",
            ValidityWarning,
            stacklevel=3,
        )


def self_impedance(spec: DipoleSpec, f: float) -> complex:
    """Induced-EMF self impedance of a centre-fed strip dipole at frequency f.

    The current filament sits on the axis and the field is taken on the
    equivalent cylinder surface (radius strip_width/4), which is the standard
    induced-EMF treatment of the finite conductor thickness.
    """
    if f <= 0:
        raise DomainError("frequency must be positive")
    lam = C0 / f
    _check_validity(spec, lam)
    k = 2 * math.pi / lam
    h = spec.length / 2.0
    zm = _mutual_loop_referred(k, spec.radius, 0.0, h, h)
    return zm * _feed_referral(k, h, h)


def mutual_impedance(
    a: DipoleSpec, b: DipoleSpec, radial_sep: float, axial_offset: float, f: float
) -> complex:
    """Mutual impedance of two parallel dipoles in echelon, feed-referred.

    radial_sep is the separation perpendicular to the dipole axes and
    axial_offset the centre-to-centre offset along them. Covers side-by-side
    (axial_offset = 0) and collinear (radial_sep = 0) as special cases. The
    result is reciprocal: the argument order does not matter.
    """
    if f <= 0:
        raise DomainError("frequency must be positive")
    d = abs(radial_sep)
    s = abs(axial_offset)
    if d == 0.0 and s == 0.0:
        raise DomainError("coincident dipoles have no mutual impedance; use self_impedance")
    # Canonical argument order makes reciprocity exact in floating point.
    ka = (a.length, a.strip_width, a.feed_gap)
    kb = (b.length, b.strip_width, b.feed_gap)
    if kb < ka:
        a, b = b, a
    lam = C0 / f
    _check_validity(a, lam)
    _check_validity(b, lam)
    h1 = a.length / 2.0
    h2 = b.length / 2.0
    if d == 0.0 and s <= h1 + h2:
        raise DomainError("collinear dipoles overlap; no valid echelon geometry")
    k = 2 * math.pi / lam
    zm = _mutual_loop_referred(k, d, s, h1, h2)
    return zm * _feed_referral(k, h1, h2)


def build_scene_matrix(scene: SceneConfig) -> PortNetwork:
    """Assemble the (N+2)x(N+2) impedance matrix of the full scene.

    Diagonal entries are self impedances; off-diagonal entries come from the
    echelon mutual with each pair's separation vector decomposed into its
    axial (x) and radial (y-z) components. The LOS entry is kept; use
    zero_los for the NLOS assumption.
    """
    pts = scene.port_positions()
    specs = [scene.tx_spec, scene.rx_spec] + [scene.element] * scene.n_elements
    n = scene.n_ports
    z = np.zeros((n, n), dtype=complex)
    cache: dict[tuple, complex] = {}
    for i in range(n):
        z[i, i] = self_impedance(specs[i], scene.frequency)
    for i in range(n):
        for j in range(i + 1, n):
            delta = pts[j] - pts[i]
            axial = float(delta[0])
            radial = float(math.hypot(delta[1], delta[2]))
            key = (
                round(abs(axial), 15),
                round(radial, 15),
                specs[i].length,
                specs[j].length,
            )
            zij = cache.get(key)
            if zij is None:
                try:
                    zij = mutual_impedance(specs[i], specs[j], radial, axial, scene.frequency)
                except DomainError as exc:
                    raise ConfigurationError(
                        f"ports {i + 1} and {j + 1} overlap: {exc}"
                    ) from exc
                cache[key] = zij
            z[i, j] = zij
            z[j, i] = zij
    return PortNetwork(z=z, los_zeroed=False)


def zero_los(net: PortNetwork) -> PortNetwork:
    """Copy of the network with the direct Tx-Rx coupling entries zeroed."""
    z = net.z.copy()
    z[0, 1] = 0.0
    z[1, 0] = 0.0
    return PortNetwork(z=z, los_zeroed=True)


# --- file formats -----------------------------------------------------------

MATRIX_HEADER = ["port_i", "port_j", "re_ohms", "im_ohms"]


def save_matrix(net: PortNetwork, destination) -> None:
    """Write the impedance matrix as CSV: one row per ordered port pair."""
    n = net.n_ports
    with open(destination, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(MATRIX_HEADER)
        for i in range(n):
            for j in range(n):
                zij = net.z[i, j]
                writer.writerow([i + 1, j + 1, repr(float(zij.real)), repr(float(zij.imag))])


def load_matrix(source) -> PortNetwork:
    """Read an impedance-matrix CSV written by save_matrix (or an external tool).

    Rejects non-square or incomplete files and matrices whose asymmetry
    exceeds the reciprocity tolerance. N is inferred as n_ports - 2, and the
    los_zeroed flag from the Tx-Rx entries being exactly zero.
    """
    entries = {}
    max_port = 0
    with open(source, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != MATRIX_HEADER:
            raise MatrixFormatError(f"expected header {','.join(MATRIX_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise MatrixFormatError(f"line {lineno}: expected 4 fields, got {len(row)}")
            try:
                i, j = int(row[0]), int(row[1])
                re, im = float(row[2]), float(row[3])
            except ValueError as exc:
                raise MatrixFormatError(f"line {lineno}: {exc}") from exc
            if i < 1 or j < 1:
                raise MatrixFormatError(f"line {lineno}: ports are 1-based")
            if (i, j) in entries:
                raise MatrixFormatError(f"line {lineno}: duplicate entry for pair ({i},{j})")
            entries[(i, j)] = complex(re, im)
            max_port = max(max_port, i, j)
    n = max_port
    if n < 2:
        raise MatrixFormatError("matrix must cover at least 2 ports")
    if len(entries) != n * n:
        raise MatrixFormatError(
            f"matrix incomplete: expected {n * n} ordered pairs for {n} ports, "
            f"found {len(entries)}"
        )
    z = np.zeros((n, n), dtype=complex)
    for (i, j), val in entries.items():
        z[i - 1, j - 1] = val
    scale = np.abs(z).max()
    asym = np.abs(z - z.T)
    worst = asym.max()
    if scale > 0 and worst > SYMMETRY_RTOL * scale:
        wi, wj = np.unravel_index(int(asym.argmax()), asym.shape)
        raise MatrixFormatError(
            f"matrix asymmetric: |z[{wi + 1},{wj + 1}] - z[{wj + 1},{wi + 1}]| = {worst:.6g} "
            f"exceeds {SYMMETRY_RTOL * scale:.6g}"
        )
    los_zeroed = bool(z[0, 1] == 0 and z[1, 0] == 0)
    return PortNetwork(z=z, los_zeroed=los_zeroed)


# --- scene JSON --------------------------------------------------------------


def _complex_to_json(value):
    value = complex(value)
    if value.imag == 0:
        return value.real
    return [value.real, value.imag]


def _complex_from_json(value, name):
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise ConfigurationError(f"{name} must be a number or a [re, im] pair")


def _spec_to_json(spec: DipoleSpec):
    return {"length": spec.length, "strip_width": spec.strip_width, "feed_gap": spec.feed_gap}


def _spec_from_json(obj, name):
    if not isinstance(obj, dict):
        raise ConfigurationError(f"{name} must be an object with dipole dimensions")
    try:
        return DipoleSpec(
            length=float(obj["length"]),
            strip_width=float(obj["strip_width"]),
            feed_gap=float(obj.get("feed_gap", 0.0)),
        )
    except KeyError as exc:
        raise ConfigurationError(f"{name} is missing field {exc}") from exc


def scene_to_json(scene: SceneConfig) -> dict:
    """JSON-ready dict with snake_case SceneConfig fields (SI units, degrees)."""
    out = {
        "frequency": scene.frequency,
        "rows": scene.rows,
        "cols": scene.cols,
        "col_spacing": scene.col_spacing,
        "row_spacing": scene.row_spacing,
        "element": _spec_to_json(scene.element),
        "tx_angle_beta": scene.tx_angle_beta,
        "rx_angle_alpha": scene.rx_angle_alpha,
        "tx_distance": scene.tx_distance,
        "rx_distance": scene.rx_distance,
        "tx_gain": scene.tx_gain,
        "rx_gain": scene.rx_gain,
        "source_impedance": _complex_to_json(scene.source_impedance),
        "receiver_impedance": _complex_to_json(scene.receiver_impedance),
    }
    if scene.tx_element is not None:
        out["tx_element"] = _spec_to_json(scene.tx_element)
    if scene.rx_element is not None:
        out["rx_element"] = _spec_to_json(scene.rx_element)
    return out


def scene_from_json(obj: dict) -> SceneConfig:
    """Parse a scene dict; unknown keys are rejected to catch typos."""
    if not isinstance(obj, dict):
        raise ConfigurationError("scene JSON must be an object")
    known = {
        "frequency", "rows", "cols", "col_spacing", "row_spacing", "element",
        "tx_angle_beta", "rx_angle_alpha", "tx_distance", "rx_distance",
        "tx_gain", "rx_gain", "source_impedance", "receiver_impedance",
        "tx_element", "rx_element",
    }
    unknown = set(obj) - known
    if unknown:
        raise ConfigurationError(f"unknown scene fields: {sorted(unknown)}")
    kwargs = {}
    for key in ("frequency", "col_spacing", "row_spacing", "tx_angle_beta",
                "rx_angle_alpha", "tx_distance", "rx_distance", "tx_gain", "rx_gain"):
        if key in obj:
            kwargs[key] = float(obj[key])
    for key in ("rows", "cols"):
        if key in obj:
            kwargs[key] = int(obj[key])
    if "element" in obj:
        kwargs["element"] = _spec_from_json(obj["element"], "element")
    for key in ("tx_element", "rx_element"):
        if key in obj:
            kwargs[key] = _spec_from_json(obj[key], key)
    for key in ("source_impedance", "receiver_impedance"):
        if key in obj:
            kwargs[key] = _complex_from_json(obj[key], key)
    return SceneConfig(**kwargs)


def save_scene(scene: SceneConfig, destination) -> None:
    with open(destination, "w") as fh:
        json.dump(scene_to_json(scene), fh, indent=2)
        fh.write("\n")


def load_scene(source) -> SceneConfig:
    with open(source) as fh:
        return scene_from_json(json.load(fh))
