"""Surface-shape optimization of the penalized achievable-rate objective.

The objective for a pair of surface shapes (y_t, y_r) is

    f = log2 det(I + H H^H / sigma^2) + beta * min(tr(H H^H) - psi, 0)

where H is the effective block channel of the chosen waveform, sigma^2
the noise variance, and psi a floor on the total channel power serving as
the sensing constraint.  The gradients of f with respect to each element
y coordinate are available in closed form because only the rank-one
spatial factors depend on the shapes; ascent uses simultaneous projected
updates with an Armijo backtracking line search.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .channel import ChannelScenario, path_time_matrix
from .geometry import (project_surface, random_surface, steering_derivative,
                       steering_vector, validate_surface)
from .waveforms import cp_phase_function, domain_transform

__all__ = [
    "OptimizerConfig",
    "OptimizerResult",
    "achievable_rate",
    "channel_power",
    "sensing_slack",
    "penalized_objective",
    "channel_grad_tx",
    "channel_grad_rx",
    "gram_grad",
    "objective_grad_element",
    "optimize",
]

LOG2 = np.log(2.0)


@dataclass(frozen=True)
class OptimizerConfig:
    """Ascent parameters.

    ``psi=None`` resolves to ``psi_fraction`` times the channel power of
    the flat-surface baseline; ``noise_var=None`` falls back to the
    scenario's; ``initial_step=None`` resolves to 1e-3 wavelengths.
    ``power_budget`` is checked once against the identity transmit
    covariance (N * d_s) and otherwise unused.
    """

    beta: float = 2.0
    psi: float | None = None
    psi_fraction: float = 0.8
    power_budget: float | None = None
    max_iters: int = 100
    initial_step: float | None = None
    backtrack_factor: float = 0.5
    sufficient_increase: float = 1e-4
    max_backtracks: int = 30
    min_step_norm: float = 1e-10
    noise_var: float | None = None

    def __post_init__(self):
        if self.beta < 0.0:
            raise ValueError("beta must be nonnegative")
        if self.psi is not None and self.psi < 0.0:
            raise ValueError("psi must be nonnegative")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.initial_step is not None and self.initial_step <= 0.0:
            raise ValueError("initial_step must be positive")
        if not 0.0 < self.backtrack_factor < 1.0:
            raise ValueError("backtrack_factor must be in (0, 1)")


@dataclass
class OptimizerResult:
    tx_surface: np.ndarray
    rx_surface: np.ndarray
    objective_trace: np.ndarray   # accepted objective values, initial point first
    rate_trace: np.ndarray
    slack_trace: np.ndarray
    iterations_run: int
    stop_reason: str
    psi: float                    # resolved sensing threshold


def achievable_rate(h_bar, noise_var: float) -> float:
    """log2 det(I + H H^H / sigma^2), in bits per channel use.

    Evaluated through a Cholesky factorization of the Hermitian
    positive-definite matrix I + H H^H / sigma^2.
    """
    h = np.asarray(h_bar, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"channel matrix must be square, got {h.shape}")
    if noise_var <= 0.0:
        raise ValueError("noise variance must be positive")
    m = np.eye(h.shape[0]) + h @ h.conj().T / noise_var
    chol = np.linalg.cholesky(m)
    return float(2.0 * np.sum(np.log2(np.real(np.diag(chol)))))


def channel_power(h_bar) -> float:
    """tr(H H^H), the squared Frobenius norm of the block channel."""
    h = np.asarray(h_bar)
    return float(np.real(np.vdot(h, h)))


def sensing_slack(h_bar, psi: float) -> float:
    """Clamped constraint violation min(tr(H H^H) - psi, 0); nonpositive."""
    if psi < 0.0:
        raise ValueError("psi must be nonnegative")
    return min(channel_power(h_bar) - psi, 0.0)


def penalized_objective(h_bar, noise_var: float, beta: float, psi: float):
    """Return (objective, rate, slack) at one channel matrix."""
    rate = achievable_rate(h_bar, noise_var)
    slack = sensing_slack(h_bar, psi)
    return rate + beta * slack, rate, slack


def _grad_channel(spec, scenario: ChannelScenario, tx_surface, rx_surface,
                  element: int, side: str, gbars=None) -> np.ndarray:
    tx_surface = validate_surface(scenario.tx_geometry, tx_surface)
    rx_surface = validate_surface(scenario.rx_geometry, rx_surface)
    if gbars is None:
        w = domain_transform(spec)
        wh = w.conj().T
        phase_fn = cp_phase_function(spec)
        gbars = [w @ path_time_matrix(scenario, p, phase_fn) @ wh for p in scenario.paths]
    n, d = scenario.block_length, scenario.num_streams
    scale = np.sqrt(scenario.tx_geometry.num_elements
                    * scenario.rx_geometry.num_elements / scenario.num_paths)
    out = np.zeros((n * d, n * d), dtype=complex)
    for path, gbar in zip(scenario.paths, gbars):
        a_rx = steering_vector(scenario.rx_geometry, rx_surface, path.angles_in)
        a_tx = steering_vector(scenario.tx_geometry, tx_surface, path.angles_out)
        if side == "tx":
            d_tx = steering_derivative(scenario.tx_geometry, tx_surface,
                                       path.angles_out, element)
            spatial = scale * path.gain * np.outer(a_rx, d_tx.conj())
        else:
            d_rx = steering_derivative(scenario.rx_geometry, rx_surface,
                                       path.angles_in, element)
            spatial = scale * path.gain * np.outer(d_rx, a_tx.conj())
        out += np.kron(spatial[:d, :d], gbar)
    return out


def channel_grad_tx(spec, scenario: ChannelScenario, tx_surface, rx_surface,
                    element: int) -> np.ndarray:
    """Partial derivative of the effective channel w.r.t. one transmit
    element's y coordinate (0-based).  The derivative lands on the
    conjugated transmit steering factor of every path."""
    if not 0 <= element < scenario.tx_geometry.num_elements:
        raise IndexError(f"tx element {element} out of range")
    return _grad_channel(spec, scenario, tx_surface, rx_surface, element, "tx")


def channel_grad_rx(spec, scenario: ChannelScenario, tx_surface, rx_surface,
                    element: int) -> np.ndarray:
    """Partial derivative of the effective channel w.r.t. one receive
    element's y coordinate (0-based)."""
    if not 0 <= element < scenario.rx_geometry.num_elements:
        raise IndexError(f"rx element {element} out of range")
    return _grad_channel(spec, scenario, tx_surface, rx_surface, element, "rx")


def gram_grad(h_bar, dh, noise_var: float) -> np.ndarray:
    """Derivative of H H^H / sigma^2 given dH: (dH H^H + H dH^H) / sigma^2."""
    h = np.asarray(h_bar, dtype=complex)
    d = np.asarray(dh, dtype=complex)
    if h.shape != d.shape:
        raise ValueError("channel and derivative shapes differ")
    return (d @ h.conj().T + h @ d.conj().T) / noise_var


def objective_grad_element(h_bar, gram, dh, beta: float, psi: float,
                           noise_var: float) -> float:
    """One scalar entry of the objective gradient.

    Rate part: Re tr((I + Q)^-1 dQ) / ln 2 with Q the noise-normalized
    Gram matrix.  Penalty part: beta * Re tr(dH H^H + H dH^H), active only
    while the power floor is violated (the clamped penalty is flat once
    satisfied, so its subgradient vanishes there).
    """
    h = np.asarray(h_bar, dtype=complex)
    d = np.asarray(dh, dtype=complex)
    m = np.eye(h.shape[0]) + np.asarray(gram, dtype=complex)
    solved = cho_solve(cho_factor(m), d)
    value = 2.0 * np.real(np.vdot(h, solved)) / (noise_var * LOG2)
    if sensing_slack(h, psi) < 0.0:
        value += beta * 2.0 * np.real(np.vdot(h, d))
    return float(value)


class _ChannelAssembler:
    """Caches the surface-independent per-path factors of one scenario."""

    def __init__(self, spec, scenario: ChannelScenario):
        w = domain_transform(spec)
        wh = w.conj().T
        phase_fn = cp_phase_function(spec)
        self.scenario = scenario
        self.gbars = [w @ path_time_matrix(scenario, p, phase_fn) @ wh
                      for p in scenario.paths]
        self.scale = np.sqrt(scenario.tx_geometry.num_elements
                             * scenario.rx_geometry.num_elements / scenario.num_paths)

    def channel(self, tx_surface, rx_surface) -> np.ndarray:
        sc = self.scenario
        n, d = sc.block_length, sc.num_streams
        out = np.zeros((n * d, n * d), dtype=complex)
        for path, gbar in zip(sc.paths, self.gbars):
            a_rx = steering_vector(sc.rx_geometry, rx_surface, path.angles_in)
            a_tx = steering_vector(sc.tx_geometry, tx_surface, path.angles_out)
            spatial = (self.scale * path.gain) * np.outer(a_rx, a_tx.conj())
            out += np.kron(spatial[:d, :d], gbar)
        return out

    def grad(self, tx_surface, rx_surface, element: int, side: str) -> np.ndarray:
        return _grad_channel(None, self.scenario, tx_surface, rx_surface,
                             element, side, gbars=self.gbars)


def optimize(scenario: ChannelScenario, spec, config: OptimizerConfig = OptimizerConfig(),
             init_tx=None, init_rx=None, rng=None) -> OptimizerResult:
    """Projected gradient ascent on both surface shapes.

    Each iteration computes every per-element gradient for the transmit
    and receive shapes, takes a simultaneous step, projects onto the
    morphing box, and accepts the step through an Armijo condition on the
    objective (measured against the projected displacement, so accepted
    objectives never decrease).  Stops at the iteration budget, on a line
    search failure, or when the projected step collapses.

    Missing initial shapes are drawn uniformly from the morphing range
    (one shared draw when both arrays have the same geometry).
    """
    tx_geom, rx_geom = scenario.tx_geometry, scenario.rx_geometry
    if init_tx is None or init_rx is None:
        rng = np.random.default_rng(rng)
        if init_tx is None and init_rx is None and tx_geom == rx_geom:
            init_tx = init_rx = random_surface(tx_geom, rng)
        else:
            if init_tx is None:
                init_tx = random_surface(tx_geom, rng)
            if init_rx is None:
                init_rx = random_surface(rx_geom, rng)
    y_t = validate_surface(tx_geom, init_tx, check_bounds=True).copy()
    y_r = validate_surface(rx_geom, init_rx, check_bounds=True).copy()

    noise_var = config.noise_var if config.noise_var is not None else scenario.noise_var
    if noise_var <= 0.0:
        raise ValueError("optimizer objective requires a positive noise variance")
    identity_cov_power = scenario.block_length * scenario.num_streams
    if config.power_budget is not None and identity_cov_power > config.power_budget:
        raise ValueError(
            f"identity transmit covariance needs power {identity_cov_power}, "
            f"budget is {config.power_budget}")

    assembler = _ChannelAssembler(spec, scenario)
    if config.psi is not None:
        psi = config.psi
    else:
        flat = assembler.channel(tx_geom.flat_surface(), rx_geom.flat_surface())
        psi = config.psi_fraction * channel_power(flat)

    step0 = (config.initial_step if config.initial_step is not None
             else 1e-3 * tx_geom.wavelength)
    n_t, n_r = tx_geom.num_elements, rx_geom.num_elements

    h = assembler.channel(y_t, y_r)
    f_cur, rate_cur, slack_cur = penalized_objective(h, noise_var, config.beta, psi)
    obj_trace, rate_trace, slack_trace = [f_cur], [rate_cur], [slack_cur]

    iterations = 0
    stop_reason = "iteration budget"
    for _ in range(config.max_iters):
        gram = h @ h.conj().T / noise_var
        factor = cho_factor(np.eye(h.shape[0]) + gram)
        penalty_active = slack_cur < 0.0

        grad = np.empty(n_t + n_r)
        for idx in range(n_t + n_r):
            side = "tx" if idx < n_t else "rx"
            dh = assembler.grad(y_t, y_r, idx if side == "tx" else idx - n_t, side)
            val = 2.0 * np.real(np.vdot(h, cho_solve(factor, dh))) / (noise_var * LOG2)
            if penalty_active:
                val += config.beta * 2.0 * np.real(np.vdot(h, dh))
            grad[idx] = val

        if not np.any(grad):
            stop_reason = "zero gradient"
            break

        step = step0
        accepted = False
        for _ in range(config.max_backtracks + 1):
            y_t_new = project_surface(tx_geom, y_t + step * grad[:n_t])
            y_r_new = project_surface(rx_geom, y_r + step * grad[n_t:])
            move = np.concatenate([y_t_new - y_t, y_r_new - y_r])
            h_new = assembler.channel(y_t_new, y_r_new)
            f_new, rate_new, slack_new = penalized_objective(
                h_new, noise_var, config.beta, psi)
            if f_new >= f_cur + config.sufficient_increase * float(grad @ move):
                accepted = True
                break
            step *= config.backtrack_factor
        if not accepted:
            stop_reason = "line search failed"
            break

        step_norm = float(np.linalg.norm(move))
        y_t, y_r, h = y_t_new, y_r_new, h_new
        f_cur, rate_cur, slack_cur = f_new, rate_new, slack_new
        obj_trace.append(f_cur)
        rate_trace.append(rate_cur)
        slack_trace.append(slack_cur)
        iterations += 1
        if step_norm < config.min_step_norm:
            stop_reason = "step below tolerance"
            break

    return OptimizerResult(tx_surface=y_t, rx_surface=y_r,
                           objective_trace=np.asarray(obj_trace),
                           rate_trace=np.asarray(rate_trace),
                           slack_trace=np.asarray(slack_trace),
                           iterations_run=iterations,
                           stop_reason=stop_reason,
                           psi=psi)
