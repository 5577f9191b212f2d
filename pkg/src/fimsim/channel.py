"""Sampled doubly-dispersive MIMO channel with morphable arrays at both ends.

Each propagation path contributes a rank-one spatial outer product (from
the transmit/receive steering vectors) and an N x N unitary time matrix
built from three factors: a prefix phase correction, a Doppler phase
ramp, and a cyclic delay shift.  The block transfer matrix over one frame
is the sum of Kronecker products of the two.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import FimGeometry, PathAngles, steering_vector, validate_surface

__all__ = [
    "SPEED_OF_LIGHT",
    "PropagationPath",
    "ChannelScenario",
    "ScenarioParams",
    "path_outer_matrix",
    "cyclic_shift_matrix",
    "doppler_matrix",
    "cp_phase_matrix",
    "path_time_matrix",
    "assemble_effective_td",
    "random_scenario",
]

SPEED_OF_LIGHT = 3.0e8  # m/s


@dataclass(frozen=True)
class PropagationPath:
    """One scatterer: complex gain, delay, Doppler shift, and its angles."""

    gain: complex
    delay_s: float
    doppler_hz: float
    angles_in: PathAngles    # arrival at the receive array
    angles_out: PathAngles   # departure from the transmit array

    def __post_init__(self):
        if self.delay_s < 0.0:
            raise ValueError("path delay must be nonnegative")

    def delay_taps(self, sampling_rate_hz: float) -> int:
        """Delay quantized to the nearest whole sample."""
        return int(round(self.delay_s * sampling_rate_hz))

    def normalized_doppler(self, block_length: int, sampling_rate_hz: float) -> float:
        """Doppler as cycles per frame (fractional values allowed)."""
        return block_length * self.doppler_hz / sampling_rate_hz


@dataclass(frozen=True)
class ChannelScenario:
    """Everything needed to assemble the block transfer matrix."""

    paths: tuple
    block_length: int         # samples per frame (N)
    sampling_rate_hz: float
    cp_length: int            # prefix length in samples, bounds the delay taps
    tx_geometry: FimGeometry
    rx_geometry: FimGeometry
    noise_var: float = 1.0
    max_delay_s: float | None = None    # generation bound, if drawn randomly
    max_doppler_hz: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(self.paths))
        if len(self.paths) < 1:
            raise ValueError("scenario needs at least one path")
        if self.block_length < 1 or self.sampling_rate_hz <= 0.0:
            raise ValueError("block length and sampling rate must be positive")
        if self.cp_length < 0:
            raise ValueError("prefix length must be nonnegative")
        if self.noise_var < 0.0:
            raise ValueError("noise variance must be nonnegative")
        for p in self.paths:
            tap = p.delay_taps(self.sampling_rate_hz)
            if tap > self.cp_length:
                raise ValueError(f"delay tap {tap} exceeds prefix length {self.cp_length}")
            if tap >= self.block_length:
                raise ValueError(f"delay tap {tap} must be below the block length")

    @property
    def num_streams(self) -> int:
        return min(self.tx_geometry.num_elements, self.rx_geometry.num_elements)

    @property
    def num_paths(self) -> int:
        return len(self.paths)

    def doppler_bound_hz(self) -> float:
        """Doppler magnitude bound: the stated one, else the largest path's."""
        if self.max_doppler_hz is not None:
            return self.max_doppler_hz
        return max(abs(p.doppler_hz) for p in self.paths)


def path_outer_matrix(path: PropagationPath, tx_geom: FimGeometry, tx_surface,
                      rx_geom: FimGeometry, rx_surface, num_paths: int) -> np.ndarray:
    """Rank-one spatial matrix of one path, scaled by sqrt(Nt*Nr/P) * gain."""
    if num_paths < 1:
        raise ValueError("num_paths must be >= 1")
    a_rx = steering_vector(rx_geom, rx_surface, path.angles_in)
    a_tx = steering_vector(tx_geom, tx_surface, path.angles_out)
    scaled = np.sqrt(tx_geom.num_elements * rx_geom.num_elements / num_paths) * path.gain
    return scaled * np.outer(a_rx, a_tx.conj())


def cyclic_shift_matrix(n: int, ell: int) -> np.ndarray:
    """Permutation matrix delaying a length-n vector circularly by ell samples."""
    if not 0 <= ell < n:
        raise ValueError(f"shift {ell} outside [0, {n})")
    return np.roll(np.eye(n), ell, axis=0)


def doppler_matrix(n: int, f: float) -> np.ndarray:
    """diag(exp(-j 2 pi f k / n)), k = 0..n-1; fractional f supported."""
    return np.diag(np.exp(-2j * np.pi * f * np.arange(n) / n))


def cp_phase_matrix(n: int, ell: int, phase_fn=None) -> np.ndarray:
    """Diagonal prefix correction for a path with delay tap ell.

    The first ell entries are exp(-j 2 pi phase_fn(m)) for m = ell, ..., 1;
    the rest are ones.  ``phase_fn=None`` means a phase-free prefix
    (plain cyclic prefix) and yields the identity.
    """
    if not 0 <= ell < n:
        raise ValueError(f"delay tap {ell} outside [0, {n})")
    diag = np.ones(n, dtype=complex)
    if phase_fn is not None and ell > 0:
        phases = np.array([phase_fn(ell - i) for i in range(ell)], dtype=float)
        diag[:ell] = np.exp(-2j * np.pi * phases)
    return np.diag(diag)


def path_time_matrix(scenario: ChannelScenario, path: PropagationPath,
                     phase_fn=None) -> np.ndarray:
    """Unitary N x N time response of one path: prefix * Doppler * shift."""
    n = scenario.block_length
    ell = path.delay_taps(scenario.sampling_rate_hz)
    f = path.normalized_doppler(n, scenario.sampling_rate_hz)
    return cp_phase_matrix(n, ell, phase_fn) @ doppler_matrix(n, f) @ cyclic_shift_matrix(n, ell)


def _reduced_outer(scenario: ChannelScenario, path: PropagationPath,
                   tx_surface, rx_surface) -> np.ndarray:
    """Stream-reduced spatial matrix: identity-selection beamformers keep the
    first d_s rows and columns (a no-op for square element counts)."""
    full = path_outer_matrix(path, scenario.tx_geometry, tx_surface,
                             scenario.rx_geometry, rx_surface, scenario.num_paths)
    d = scenario.num_streams
    return full[:d, :d]


def assemble_effective_td(scenario: ChannelScenario, tx_surface, rx_surface,
                          phase_fn=None) -> np.ndarray:
    """Block transfer matrix of the frame: sum_p kron(spatial_p, time_p).

    Shape is (N * d_s, N * d_s) with the per-stream sample blocks laid out
    stream-major, matching the stacked transmit/receive vectors.
    """
    tx_surface = validate_surface(scenario.tx_geometry, tx_surface)
    rx_surface = validate_surface(scenario.rx_geometry, rx_surface)
    n, d = scenario.block_length, scenario.num_streams
    out = np.zeros((n * d, n * d), dtype=complex)
    for path in scenario.paths:
        spatial = _reduced_outer(scenario, path, tx_surface, rx_surface)
        out += np.kron(spatial, path_time_matrix(scenario, path, phase_fn))
    return out


@dataclass(frozen=True)
class ScenarioParams:
    """Random-scenario generator configuration with the defaults used
    throughout the experiments (28 GHz carrier, 20 MHz sampling, 2x2
    arrays at both ends, morphing range of one wavelength each way)."""

    carrier_frequency_hz: float = 28e9
    sampling_rate_hz: float = 20e6
    block_length: int = 16
    num_paths: int = 2
    tx_elements_x: int = 2
    tx_elements_z: int = 2
    rx_elements_x: int = 2
    rx_elements_z: int = 2
    max_range_m: float = 120.0
    max_velocity_mps: float = 208.0
    y_min_m: float | None = None        # default: -wavelength
    y_max_m: float | None = None        # default: +wavelength
    element_spacing_m: float | None = None  # default: wavelength / 2
    noise_var: float = 1.0
    cp_length: int | None = None        # default: the largest possible delay tap

    def __post_init__(self):
        if self.carrier_frequency_hz <= 0 or self.sampling_rate_hz <= 0:
            raise ValueError("frequencies must be positive")
        if self.block_length < 1 or self.num_paths < 1:
            raise ValueError("block length and path count must be >= 1")
        if min(self.tx_elements_x, self.tx_elements_z,
               self.rx_elements_x, self.rx_elements_z) < 1:
            raise ValueError("element counts must be >= 1")
        if self.max_range_m < 0 or self.max_velocity_mps < 0:
            raise ValueError("range and velocity bounds must be nonnegative")
        if self.noise_var < 0:
            raise ValueError("noise variance must be nonnegative")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_frequency_hz

    @property
    def max_delay_s(self) -> float:
        return self.max_range_m / SPEED_OF_LIGHT

    @property
    def max_doppler_hz(self) -> float:
        return self.max_velocity_mps * self.carrier_frequency_hz / SPEED_OF_LIGHT

    @property
    def max_delay_taps(self) -> int:
        return int(round(self.max_delay_s * self.sampling_rate_hz))

    def _geometry(self, nx: int, nz: int) -> FimGeometry:
        lam = self.wavelength
        spacing = self.element_spacing_m if self.element_spacing_m is not None else lam / 2.0
        y_min = self.y_min_m if self.y_min_m is not None else -lam
        y_max = self.y_max_m if self.y_max_m is not None else lam
        return FimGeometry(bx=nx, bz=nz, dx=spacing, dz=spacing,
                           wavelength=lam, y_min=y_min, y_max=y_max)

    def tx_geometry(self) -> FimGeometry:
        return self._geometry(self.tx_elements_x, self.tx_elements_z)

    def rx_geometry(self) -> FimGeometry:
        return self._geometry(self.rx_elements_x, self.rx_elements_z)


def random_scenario(params: ScenarioParams, rng) -> ChannelScenario:
    """Draw a scenario: unit-variance complex Gaussian gains, uniform delays
    on [0, max_delay], uniform Dopplers on +-max_doppler, uniform angles."""
    rng = np.random.default_rng(rng)
    p = params.num_paths
    gains = (rng.standard_normal(p) + 1j * rng.standard_normal(p)) / np.sqrt(2.0)
    delays = rng.uniform(0.0, params.max_delay_s, p)
    dopplers = rng.uniform(-params.max_doppler_hz, params.max_doppler_hz, p)
    az_in = rng.uniform(-np.pi / 2, np.pi / 2, p)
    el_in = rng.uniform(0.0, np.pi, p)
    az_out = rng.uniform(-np.pi / 2, np.pi / 2, p)
    el_out = rng.uniform(0.0, np.pi, p)
    paths = tuple(
        PropagationPath(gain=complex(gains[i]), delay_s=float(delays[i]),
                        doppler_hz=float(dopplers[i]),
                        angles_in=PathAngles(float(az_in[i]), float(el_in[i])),
                        angles_out=PathAngles(float(az_out[i]), float(el_out[i])))
        for i in range(p))
    cp = params.cp_length if params.cp_length is not None else params.max_delay_taps
    return ChannelScenario(paths=paths,
                           block_length=params.block_length,
                           sampling_rate_hz=params.sampling_rate_hz,
                           cp_length=cp,
                           tx_geometry=params.tx_geometry(),
                           rx_geometry=params.rx_geometry(),
                           noise_var=params.noise_var,
                           max_delay_s=params.max_delay_s,
                           max_doppler_hz=params.max_doppler_hz)
