"""Independent oracles and small scenario builders shared by the tests.

Everything here is written from scratch (scalar loops, no reuse of the
library's matrix assembly) so it can serve as a second route against
which the production code is checked.
"""

import numpy as np

from fimsim import ScenarioParams, random_scenario

SMALL_MAX_RANGE_M = 90.0  # keeps delay taps below a block length of 8


def small_params(block_length=8, num_paths=2, **kwargs):
    kwargs.setdefault("max_range_m", SMALL_MAX_RANGE_M)
    return ScenarioParams(block_length=block_length, num_paths=num_paths, **kwargs)


def small_scenario(seed, block_length=8, num_paths=2, **kwargs):
    return random_scenario(small_params(block_length, num_paths, **kwargs), seed)


def oracle_steering(geom, surface, azimuth, elevation):
    """Per-element phase accumulation written out longhand."""
    y = np.asarray(surface, dtype=float)
    b = np.arange(geom.num_elements)
    x = geom.dx * (b % geom.bx)
    z = geom.dz * (b // geom.bx)
    phase = (2.0 * np.pi / geom.wavelength) * (
        x * np.sin(elevation) * np.cos(azimuth)
        + y * np.sin(elevation) * np.sin(azimuth)
        + z * np.cos(elevation))
    return np.exp(1j * phase) / np.sqrt(geom.num_elements)


def oracle_received(scenario, tx_surface, rx_surface, stacked_input, phase_fn=None):
    """Sample-by-sample circular-convolution evaluation of the frame map.

    For every receive stream v, transmit stream u, and path p, the
    contribution to sample k is

        gain_pvu * prefix_phase(k) * exp(-j 2 pi f_p k / N) * s_u[(k - l_p) mod N]

    with gain_pvu the (v, u) entry of the path's scaled steering outer
    product.  No matrices are formed.
    """
    n = scenario.block_length
    ds = scenario.num_streams
    fs = scenario.sampling_rate_hz
    num_paths = scenario.num_paths
    s = np.asarray(stacked_input, dtype=complex)
    out = np.zeros(n * ds, dtype=complex)
    scale = np.sqrt(scenario.tx_geometry.num_elements
                    * scenario.rx_geometry.num_elements / num_paths)
    for path in scenario.paths:
        a_rx = oracle_steering(scenario.rx_geometry, rx_surface,
                               path.angles_in.azimuth, path.angles_in.elevation)
        a_tx = oracle_steering(scenario.tx_geometry, tx_surface,
                               path.angles_out.azimuth, path.angles_out.elevation)
        ell = int(round(path.delay_s * fs))
        f = n * path.doppler_hz / fs
        for v in range(ds):
            for u in range(ds):
                gain = scale * path.gain * a_rx[v] * np.conj(a_tx[u])
                for k in range(n):
                    if phase_fn is not None and k < ell:
                        prefix = np.exp(-2j * np.pi * phase_fn(ell - k))
                    else:
                        prefix = 1.0
                    out[v * n + k] += (gain * prefix * np.exp(-2j * np.pi * f * k / n)
                                       * s[u * n + (k - ell) % n])
    return out


def oracle_td_channel(scenario, tx_surface, rx_surface, phase_fn=None):
    """Full block matrix recovered by pushing basis vectors through the
    sample-by-sample oracle, column by column."""
    size = scenario.block_length * scenario.num_streams
    cols = []
    for i in range(size):
        e = np.zeros(size, dtype=complex)
        e[i] = 1.0
        cols.append(oracle_received(scenario, tx_surface, rx_surface, e, phase_fn))
    return np.column_stack(cols)


def relative_error(a, b, floor=1e-30):
    a = np.asarray(a)
    b = np.asarray(b)
    denom = max(np.max(np.abs(a)), np.max(np.abs(b)), floor)
    return np.max(np.abs(a - b)) / denom
