"""Geometric multipath channel between the metasurface and the users.

The surface is a uniform planar array of M = m_x * m_z elements.  Each
user channel is a sum of L path contributions, path 0 being line-of-sight:

    h = sqrt(M / L) * sum_l  xi_l * a(azimuth_l, elevation_l)

with a(.) the unit-norm array response and xi_l a complex gain combining
distance attenuation and small-scale fading.
"""

from dataclasses import dataclass, field

import numpy as np

# Carrier wavelength default; with half-wavelength spacing the array
# response depends only on spacing/wavelength, so this is cosmetic.
DEFAULT_WAVELENGTH_M = 0.06

# Large-scale attenuation: gain_db(d) = REFERENCE_GAIN_DB - 10*alpha*log10(d/1m).
# The reference is calibrated so that, at the default cell size and power
# budget, the pre-beamforming SNR sits near 0 dB: beam optimization then
# separates the schemes instead of everything saturating on interference.
REFERENCE_GAIN_DB = -92.0
PATHLOSS_EXP_LOS = 2.2
PATHLOSS_EXP_NLOS = 2.8


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform planar array: m_x horizontal by m_z vertical elements."""

    m_x: int
    m_z: int
    spacing: float
    wavelength: float = DEFAULT_WAVELENGTH_M

    def __post_init__(self):
        if self.m_x < 1 or self.m_z < 1:
            raise ValueError(f"element counts must be >= 1, got {self.m_x}x{self.m_z}")
        if self.spacing <= 0 or self.wavelength <= 0:
            raise ValueError("spacing and wavelength must be positive")

    @property
    def n_elements(self):
        return self.m_x * self.m_z

    @classmethod
    def half_wavelength(cls, m_x, m_z, wavelength=DEFAULT_WAVELENGTH_M):
        return cls(m_x=m_x, m_z=m_z, spacing=wavelength / 2.0, wavelength=wavelength)


@dataclass(frozen=True)
class PathParams:
    """One propagation path: complex gain plus departure angles (radians)."""

    gain: complex
    azimuth: float
    elevation: float

    def __post_init__(self):
        if not (0.0 <= self.azimuth < 2.0 * np.pi):
            raise ValueError(f"azimuth must lie in [0, 2pi), got {self.azimuth}")
        if not (0.0 <= self.elevation <= np.pi):
            raise ValueError(f"elevation must lie in [0, pi], got {self.elevation}")


@dataclass(frozen=True)
class UserChannel:
    """Channel vector h (length M) of one user, with its path breakdown."""

    coefficients: np.ndarray
    paths: tuple
    position: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        if len(self.paths) == 0:
            raise ValueError("a channel needs at least one path")

    @property
    def n_elements(self):
        return self.coefficients.shape[0]


def array_response(geom, azimuth, elevation):
    """Unit-norm response of the planar array toward (azimuth, elevation).

    Element (mx, mz) contributes
        exp(-j * 2pi/wavelength * spacing * (mx*sin(az)*sin(el) + mz*cos(el)))
    scaled by 1/sqrt(M).  The M-vector is flattened with the horizontal
    index varying fastest.
    """
    if not (np.isfinite(azimuth) and np.isfinite(elevation)):
        raise ValueError("angles must be finite")
    mx = np.arange(geom.m_x)
    mz = np.arange(geom.m_z)
    wavenumber = 2.0 * np.pi / geom.wavelength * geom.spacing
    phase = wavenumber * (
        mx[None, :] * np.sin(azimuth) * np.sin(elevation)
        + mz[:, None] * np.cos(elevation)
    )
    response = np.exp(-1j * phase) / np.sqrt(geom.n_elements)
    return response.reshape(-1)


def path_gain_variance(distance, line_of_sight):
    """Mean square path gain E|xi|^2 at the given transmitter-user distance."""
    alpha = PATHLOSS_EXP_LOS if line_of_sight else PATHLOSS_EXP_NLOS
    return 10.0 ** (REFERENCE_GAIN_DB / 10.0) * float(distance) ** (-alpha)


def generate_channel(geom, l_paths, rng, user_position, rms_position):
    """Draw one user channel with l_paths paths (path 0 is line-of-sight).

    Gains are circularly-symmetric complex Gaussian scaled by the
    distance attenuation; azimuths are uniform on [0, 2pi) and elevations
    uniform on [0, pi].  The draw order is fixed per path (gain, azimuth,
    elevation) so the same generator state yields the same paths for any
    array size.
    """
    if l_paths < 1:
        raise ValueError("need at least one propagation path")
    user_position = np.asarray(user_position, dtype=float)
    rms_position = np.asarray(rms_position, dtype=float)
    distance = np.linalg.norm(user_position - rms_position)

    paths = []
    for l in range(l_paths):
        fading = (rng.standard_normal() + 1j * rng.standard_normal()) / np.sqrt(2.0)
        azimuth = rng.uniform(0.0, 2.0 * np.pi)
        elevation = rng.uniform(0.0, np.pi)
        scale = np.sqrt(path_gain_variance(distance, line_of_sight=(l == 0)))
        paths.append(PathParams(gain=complex(scale * fading), azimuth=azimuth, elevation=elevation))

    m = geom.n_elements
    h = np.zeros(m, dtype=complex)
    for p in paths:
        h += p.gain * array_response(geom, p.azimuth, p.elevation)
    h *= np.sqrt(m / l_paths)
    return UserChannel(coefficients=h, paths=tuple(paths), position=user_position)


def place_users(k_users, radius, rng):
    """Positions uniform over the ground-level disk of the given radius."""
    if k_users < 1:
        raise ValueError("need at least one user")
    if radius <= 0:
        raise ValueError("radius must be positive")
    positions = np.zeros((k_users, 3))
    for k in range(k_users):
        r = radius * np.sqrt(rng.uniform())
        phi = rng.uniform(0.0, 2.0 * np.pi)
        positions[k] = (r * np.cos(phi), r * np.sin(phi), 0.0)
    return positions
