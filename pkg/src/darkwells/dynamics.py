"""Single-particle dynamics of two wells decaying into a shared continuum.

Everything here lives in the wide-band limit, where tracing out the
reservoir is exact and leaves a 2x2 non-Hermitian effective Hamiltonian
for the well amplitudes and a closed linear master equation for the
reduced density matrix ``sigma``.  The convention for the coherence is
``sigma12 = b1 * conj(b2)``.

The module provides the closed-form amplitude propagator, the fixed-step
master-equation integrator, the fully analytic solution for the symmetric
case, trapped-fraction asymptotics, and the dwell time of the long-lived
superposition for slightly misaligned levels.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .model import NoBoundStateError, WellPair, derive
from .rotation import dark_state, rotate

__all__ = [
    "InfiniteDwellTimeError",
    "SingleParticleState",
    "Trajectory",
    "effective_hamiltonian",
    "evolve_amplitudes",
    "amplitude_trajectory",
    "master_rhs",
    "evolve_master",
    "master_trajectory",
    "analytic_sigma_symmetric",
    "asymptotic_probs",
    "asymptotic_sigma_left_start",
    "dwell_time",
    "slow_decay_rate",
    "fit_decay_rate",
    "format_float",
    "write_sigma_csv",
]

_NORM_TOL = 1e-9


class InfiniteDwellTimeError(ValueError):
    """Aligned levels support a true bound state: the dwell time diverges."""


def format_float(x: float) -> str:
    """Render a float with 17 significant digits (round-trip exact)."""
    return f"{x:.17g}"


@dataclass(frozen=True)
class SingleParticleState:
    """Reduced state of the two-well subsystem at one instant.

    ``sigma11``/``sigma22`` are the well occupations, ``sigma12`` the
    coherence ``b1 * conj(b2)``, and ``sigma00`` the probability already
    emitted into the reservoir.  ``b1``/``b2`` keep the underlying
    amplitudes when the state was built from a pure wavefunction and are
    ``None`` for genuinely mixed states.
    """

    sigma11: float
    sigma22: float
    sigma12: complex
    sigma00: float
    t: float = 0.0
    b1: complex | None = None
    b2: complex | None = None

    def __post_init__(self) -> None:
        for name in ("sigma11", "sigma22", "sigma00"):
            val = getattr(self, name)
            if not (-_NORM_TOL <= val <= 1.0 + _NORM_TOL):
                raise ValueError(f"{name} = {val} is not a probability")
        total = self.sigma11 + self.sigma22 + self.sigma00
        if abs(total - 1.0) > 1e-8:
            raise ValueError(f"probabilities sum to {total}, expected 1")
        bound = self.sigma11 * self.sigma22
        if abs(self.sigma12) ** 2 > bound + 1e-9 * (bound + 1.0):
            raise ValueError("coherence violates |sigma12|^2 <= sigma11*sigma22")

    @classmethod
    def from_amplitudes(
        cls, b1: complex, b2: complex, t: float = 0.0
    ) -> "SingleParticleState":
        b1 = complex(b1)
        b2 = complex(b2)
        w = abs(b1) ** 2 + abs(b2) ** 2
        if w > 1.0 + _NORM_TOL:
            raise ValueError(f"dot amplitudes carry weight {w} > 1")
        return cls(
            sigma11=abs(b1) ** 2,
            sigma22=abs(b2) ** 2,
            sigma12=b1 * b2.conjugate(),
            sigma00=max(0.0, 1.0 - w),
            t=float(t),
            b1=b1,
            b2=b2,
        )

    @classmethod
    def from_sigma(
        cls,
        sigma11: float,
        sigma22: float,
        sigma12: complex,
        sigma00: float | None = None,
        t: float = 0.0,
    ) -> "SingleParticleState":
        if sigma00 is None:
            sigma00 = 1.0 - sigma11 - sigma22
        if -_NORM_TOL <= sigma00 < 0.0:
            sigma00 = 0.0
        return cls(
            sigma11=float(sigma11),
            sigma22=float(sigma22),
            sigma12=complex(sigma12),
            sigma00=float(sigma00),
            t=float(t),
        )

    @property
    def occupation(self) -> float:
        """Probability of still finding the particle in either well."""
        return self.sigma11 + self.sigma22


def effective_hamiltonian(pair: WellPair) -> np.ndarray:
    """Non-Hermitian 2x2 generator of the well amplitudes.

    ``H_eff = diag(E1, E2) + F`` with the wide-band self-energy ``F``; the
    amplitudes obey ``i db/dt = H_eff b``.
    """
    from .model import wide_band_self_energy as f

    return np.array(
        [
            [pair.E1 + f(pair, 1, 1), f(pair, 1, 2)],
            [f(pair, 2, 1), pair.E2 + f(pair, 2, 2)],
        ],
        dtype=complex,
    )


def _propagator(pair: WellPair, t: float) -> np.ndarray:
    """Closed-form exp(-i H_eff t) for a 2x2 H_eff, overflow safe.

    Written in terms of the two eigen-exponentials exp(-i lambda_pm t),
    which decay for any passive system, so no intermediate cosh blowup
    occurs at large t.
    """
    h = effective_hamiltonian(pair)
    half_tr = 0.5 * (h[0, 0] + h[1, 1])
    m = h - half_tr * np.eye(2)
    mu = cmath.sqrt(m[0, 0] * m[0, 0] + m[0, 1] * m[1, 0])
    if abs(mu) * t < 1e-6:
        # series in (mu t); the overall decay sits in exp(-i tr t / 2)
        z2 = (mu * t) ** 2
        cos_term = 1.0 - z2 / 2.0 + z2 * z2 / 24.0
        sinc_term = t * (1.0 - z2 / 6.0 + z2 * z2 / 120.0)
        scale = cmath.exp(-1j * half_tr * t)
        return scale * (cos_term * np.eye(2) - 1j * sinc_term * m)
    e_minus = cmath.exp(-1j * (half_tr - mu) * t)
    e_plus = cmath.exp(-1j * (half_tr + mu) * t)
    cos_term = 0.5 * (e_minus + e_plus)
    sin_term = (e_minus - e_plus) / (2.0 * mu)
    return cos_term * np.eye(2) - sin_term * m


def _check_unit_norm(c1: complex, c2: complex) -> None:
    norm = abs(c1) ** 2 + abs(c2) ** 2
    if abs(norm - 1.0) > _NORM_TOL:
        raise ValueError(
            f"initial amplitudes have norm {norm}; normalize explicitly, "
            "no silent renormalization is done"
        )


def evolve_amplitudes(pair: WellPair, initial, t: float) -> np.ndarray:
    """Exact well amplitudes at time ``t`` for a normalized initial pair.

    Returns ``(b1(t), b2(t))``.  The lost norm is the emission probability;
    nothing ever returns from the wide-band reservoir.
    """
    c1, c2 = complex(initial[0]), complex(initial[1])
    _check_unit_norm(c1, c2)
    if t < 0.0:
        raise ValueError("backward evolution of a decaying system is not supported")
    return _propagator(pair, float(t)) @ np.array([c1, c2])

def amplitude_trajectory(pair: WellPair, initial, times) -> np.ndarray:
    """Stack of ``evolve_amplitudes`` results, shape (len(times), 2)."""
    c1, c2 = complex(initial[0]), complex(initial[1])
    _check_unit_norm(c1, c2)
    vec = np.array([c1, c2])
    times = np.asarray(times, dtype=float)
    if times.size and times.min() < 0.0:
        raise ValueError("backward evolution of a decaying system is not supported")
    return np.stack([_propagator(pair, float(t)) @ vec for t in times])


def _master_matrix(pair: WellPair) -> np.ndarray:
    """Generator of (sigma11, sigma22, Re sigma12, Im sigma12)."""
    d = derive(pair)
    g = math.sqrt(d.gamma1 * d.gamma2)
    if d.eta12 is not None:
        g *= d.eta12
    eps = d.epsilon
    half_width = 0.5 * (d.gamma1 + d.gamma2)
    return np.array(
        [
            [-d.gamma1, 0.0, -g, 0.0],
            [0.0, -d.gamma2, -g, 0.0],
            [-0.5 * g, -0.5 * g, -half_width, eps],
            [0.0, 0.0, -eps, -half_width],
        ]
    )


def master_rhs(pair: WellPair, sigma) -> tuple[float, float, complex]:
    """Right-hand side of the reduced master equation.

    ``sigma`` is ``(sigma11, sigma22, sigma12)``; returns the derivatives
    in the same layout.  The emitted weight needs no equation of its own:
    ``sigma00 = 1 - sigma11 - sigma22`` always.
    """
    s11, s22, s12 = sigma
    x = np.array([float(s11), float(s22), complex(s12).real, complex(s12).imag])
    dx = _master_matrix(pair) @ x
    return float(dx[0]), float(dx[1]), complex(dx[2], dx[3])


def default_master_step(pair: WellPair) -> float:
    """Pinned integrator step: dt = 0.01 / max(gamma2_prime, |eps|)."""
    d = derive(pair)
    scale = d.gamma1 + d.gamma2
    if d.epsilon != 0.0:
        scale = max(scale, abs(d.epsilon))
    return 0.01 / scale


def _rk4_step_matrix(a: np.ndarray, h: float) -> np.ndarray:
    """One classical RK4 step of x' = A x as a matrix.

    For a linear autonomous system RK4 is exactly the degree-4 Taylor
    polynomial of exp(hA); applying its matrix power reproduces the
    fixed-step loop to the last bit while costing O(log n) products.
    """
    ha = h * a
    term = np.eye(a.shape[0])
    out = term.copy()
    for k in (1.0, 2.0, 3.0, 4.0):
        term = term @ ha / k
        out += term
    return out


def _coerce_sigma(initial) -> np.ndarray:
    if isinstance(initial, SingleParticleState):
        s11, s22, s12 = initial.sigma11, initial.sigma22, initial.sigma12
    else:
        s11, s22, s12 = initial
    s12 = complex(s12)
    return np.array([float(s11), float(s22), s12.real, s12.imag])


def evolve_master(
    pair: WellPair, initial, t: float, dt: float | None = None
) -> SingleParticleState:
    """Integrate the master equation with fixed-step classical RK4.

    ``initial`` is a :class:`SingleParticleState` or a
    ``(sigma11, sigma22, sigma12)`` triple.  The step defaults to
    ``0.01 / max(gamma1+gamma2, |eps|)`` and is shrunk to divide ``t``
    exactly; a requested step with ``dt * (gamma1+gamma2) > 0.5`` is
    refused rather than silently producing garbage.
    """
    if t < 0.0:
        raise ValueError("backward evolution of a decaying system is not supported")
    if dt is None:
        dt = default_master_step(pair)
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    d = derive(pair)
    if dt * (d.gamma1 + d.gamma2) > 0.5:
        raise ValueError(
            f"step dt = {dt} is too large: dt * (gamma1 + gamma2) = "
            f"{dt * (d.gamma1 + d.gamma2)} exceeds 0.5"
        )
    x = _coerce_sigma(initial)
    if t > 0.0:
        n_steps = max(1, math.ceil(t / dt - 1e-12))
        step = _rk4_step_matrix(_master_matrix(pair), t / n_steps)
        x = np.linalg.matrix_power(step, n_steps) @ x
    return SingleParticleState.from_sigma(x[0], x[1], complex(x[2], x[3]), t=t)


@dataclass(frozen=True)
class Trajectory:
    """Reduced state sampled on a time grid."""

    times: np.ndarray
    sigma11: np.ndarray
    sigma22: np.ndarray
    sigma12: np.ndarray
    sigma00: np.ndarray

    @property
    def occupation(self) -> np.ndarray:
        return self.sigma11 + self.sigma22


def master_trajectory(pair: WellPair, initial, times, dt: float | None = None) -> Trajectory:
    """Sample :func:`evolve_master` on a grid of times (each from t = 0)."""
    times = np.asarray(times, dtype=float)
    states = [evolve_master(pair, initial, float(t), dt=dt) for t in times]
    return Trajectory(
        times=times,
        sigma11=np.array([s.sigma11 for s in states]),
        sigma22=np.array([s.sigma22 for s in states]),
        sigma12=np.array([s.sigma12 for s in states], dtype=complex),
        sigma00=np.array([s.sigma00 for s in states]),
    )


def _sigma_symmetric_scalar(gamma: float, eps: float, t: float):
    """Closed-form sigma for gamma1 = gamma2, eta = +1, left start."""
    om = cmath.sqrt(gamma * gamma - eps * eps)
    e0 = math.exp(-gamma * t)
    z = om * t
    if abs(z) < 1e-5:
        # series in (om t)^2; exact at om = 0 (critical alignment eps = gamma)
        z2 = z * z
        s22 = 0.25 * gamma * gamma * e0 * t * t * (1.0 + z2 / 12.0)
        s12 = 0.5 * gamma * e0 * (
            0.5j * eps * t * t * (1.0 + z2 / 12.0) - t * (1.0 + z2 / 6.0)
        )
    else:
        e_minus = cmath.exp(-(gamma - om) * t)
        e_plus = cmath.exp(-(gamma + om) * t)
        om2 = om * om
        s22 = gamma * gamma * (e_minus + e_plus - 2.0 * e0) / (4.0 * om2)
        s12 = -(gamma / (2.0 * om2)) * (
            1j * eps * e0
            - 0.5j * eps * (e_minus + e_plus)
            + 0.5 * om * (e_minus - e_plus)
        )
    s22 = float(s22.real) if isinstance(s22, complex) else float(s22)
    s11 = s22 + e0
    return s11, s22, complex(s12)


def analytic_sigma_symmetric(gamma: float, eps: float, t):
    """Exact reduced state for equal widths and positive coupling sign.

    Valid for ``gamma1 = gamma2 = gamma``, ``eta = +1``, particle starting
    in the first well.  ``t`` may be a scalar or an array; returns
    ``(sigma11, sigma22, sigma12)`` with matching shape.  The negative-sign
    case follows by flipping the sign of ``sigma12`` (covered by the
    integrator, not by this formula).
    """
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    if np.ndim(t) == 0:
        return _sigma_symmetric_scalar(gamma, eps, float(t))
    ts = np.asarray(t, dtype=float)
    out11 = np.empty(ts.shape)
    out22 = np.empty(ts.shape)
    out12 = np.empty(ts.shape, dtype=complex)
    for idx, tv in np.ndenumerate(ts):
        out11[idx], out22[idx], out12[idx] = _sigma_symmetric_scalar(
            gamma, eps, float(tv)
        )
    return out11, out22, out12


def asymptotic_probs(pair: WellPair, initial) -> tuple[float, float]:
    """Trapped and emitted probabilities at t -> infinity for aligned levels.

    Returns ``(p_trapped, p_emitted)``.  The trapped part is the squared
    overlap with the dark mode, ``|C1 eta sqrt(y) - C2|^2 / (1 + y)``.
    Misaligned levels have no bound state: everything eventually leaves,
    on the dwell-time scale; that regime is rejected here.
    """
    if pair.epsilon != 0.0:
        raise NoBoundStateError(
            "levels are misaligned (eps != 0): no trapped fraction exists; "
            "see dwell_time for the decay scale"
        )
    c1, c2 = complex(initial[0]), complex(initial[1])
    _check_unit_norm(c1, c2)
    dark = dark_state(pair)
    p0 = abs(dark[0] * c1 + dark[1] * c2) ** 2
    p0 = min(1.0, float(p0))
    return p0, 1.0 - p0


def asymptotic_sigma_left_start(y: float, eta: int = 1) -> SingleParticleState:
    """Long-time reduced state for a particle started in the first well.

    For aligned levels and width ratio ``y = gamma2/gamma1`` the survivor
    is the dark mode, giving
    ``sigma_bar = (y^2, y, -eta y^(3/2)) / (1+y)^2`` and emitted weight
    ``1/(1+y)``.
    """
    if y < 0.0:
        raise ValueError("width ratio y must be non-negative")
    if eta not in (1, -1):
        raise ValueError(f"eta must be +1 or -1, got {eta!r}")
    denom = (1.0 + y) ** 2
    return SingleParticleState.from_sigma(
        y * y / denom,
        y / denom,
        complex(-eta * y ** 1.5 / denom, 0.0),
        sigma00=1.0 / (1.0 + y),
        t=math.inf,
    )


def dwell_time(pair: WellPair) -> float:
    """Lifetime of the long-lived superposition for misaligned levels.

    Golden rule through the lossy bright mode:
    ``tau = gamma2_prime / (4 g12^2)``, equal to
    ``(1/gamma1) (1+y)^3 / (4 y) * (gamma1/eps)^2``.  Requires the
    detuning-induced mixing to exist: aligned levels (or a fully decoupled
    well) make tau infinite and raise instead of returning a float.
    """
    if pair.epsilon == 0.0:
        raise InfiniteDwellTimeError(
            "aligned levels (eps = 0) support a bound state: infinite dwell time"
        )
    rb = rotate(pair)
    if rb.g12 == 0.0:
        raise InfiniteDwellTimeError(
            "dark-bright mixing vanishes (a well is decoupled): infinite dwell time"
        )
    return rb.gamma2_prime / (4.0 * rb.g12 * rb.g12)


def slow_decay_rate(gamma: float, eps: float) -> float:
    """Slow pole of the symmetric two-well system.

    ``gamma - Re sqrt(gamma^2 - eps^2)``: for small misalignment this is
    ``~ eps^2 / (2 gamma)``, and for ``|eps| > gamma`` both poles decay at
    the full rate ``gamma``.
    """
    return gamma - cmath.sqrt(gamma * gamma - eps * eps).real


def fit_decay_rate(times, values) -> float:
    """Least-squares exponential rate of a decaying positive signal.

    Fits ``log(values)`` linearly in ``times`` and returns minus the slope.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.size < 2:
        raise ValueError("need at least two samples to fit a rate")
    if np.any(values <= 0.0):
        raise ValueError("decay fit requires strictly positive values")
    slope = np.polyfit(times, np.log(values), 1)[0]
    return -float(slope)


def write_sigma_csv(path, times, sigma11, sigma22, sigma12, sigma00, header_lines=()):
    """Write a trajectory as CSV with 17-digit floats and LF endings.

    Fixed column layout ``t, sigma11, sigma22, re_sigma12, im_sigma12,
    sigma00``.  ``header_lines`` are emitted first as ``#`` comments
    (manifest hash and friends).
    """
    sigma12 = np.asarray(sigma12, dtype=complex)
    with open(path, "w", newline="\n") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write("t,sigma11,sigma22,re_sigma12,im_sigma12,sigma00\n")
        for k in range(len(times)):
            row = (
                times[k],
                sigma11[k],
                sigma22[k],
                sigma12[k].real,
                sigma12[k].imag,
                sigma00[k],
            )
            fh.write(",".join(format_float(float(v)) for v in row) + "\n")
