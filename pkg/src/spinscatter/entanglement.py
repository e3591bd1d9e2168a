"""Logical-state control metrics built from the transmitted two-channel state.

The transmitted electron is measured along n = (theta, phi). A result of
-1/2 leaves the two moments in

    p(theta~) [cos(theta~/2) |0> + sin(theta~/2) e^{i phi~} |1>]

with |0> the unentangled and |1> the Bell state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .engine import ScatterOutcome
from .exceptions import UndefinedControlError

TWO_PI = 2 * np.pi


def logical_angles(T_i, T_plus, phi_plus, theta, phi=0.0):
    """Map measurement angles (theta, phi) to logical angles (theta~, phi~)."""
    theta = np.asarray(theta, dtype=float)
    if T_plus < 0 or T_i < 0:
        raise ValueError("transmissions must be non-negative")
    if T_i == 0 and np.any((theta > 0) & (theta < np.pi)):
        raise UndefinedControlError("T_i = 0: theta~ is pinned to pi for every theta")
    # atan2 keeps theta = pi -> pi without evaluating tan(pi/2)
    theta_t = 2 * np.arctan2(np.sqrt(T_plus) * np.sin(theta / 2), np.sqrt(T_i) * np.cos(theta / 2))
    theta_t = np.where(np.isclose(theta, np.pi, rtol=0, atol=1e-15) & (T_plus > 0), np.pi, theta_t)
    phi_t = np.mod(np.asarray(phi, dtype=float) + phi_plus + np.pi, TWO_PI)
    if theta_t.ndim == 0:
        return float(theta_t), float(phi_t)
    return theta_t, phi_t


def measurement_angle(T_i: float, T_plus: float, theta_tilde):
    """Inverse of :func:`logical_angles` for theta: the theta that yields ``theta_tilde``."""
    if T_i <= 0 or T_plus <= 0:
        raise UndefinedControlError("inversion needs T_i > 0 and T_plus > 0")
    theta_tilde = np.asarray(theta_tilde, dtype=float)
    out = 2 * np.arctan2(np.sqrt(T_i) * np.sin(theta_tilde / 2), np.sqrt(T_plus) * np.cos(theta_tilde / 2))
    return float(out) if out.ndim == 0 else out


def success_probability(T_i, T_plus, theta_tilde):
    """p^2(theta~): probability that the measurement projects onto the target state."""
    c2 = np.cos(np.asarray(theta_tilde, dtype=float) / 2) ** 2
    denom = T_plus * c2 + T_i * (1 - c2)
    if np.any(denom == 0):
        raise UndefinedControlError("success probability undefined: zero denominator")
    out = T_i * T_plus / denom
    return float(out) if np.ndim(out) == 0 else out


def p2_bar(T_i: float, T_plus: float) -> float:
    """theta~-averaged success probability."""
    return float(np.sqrt(T_i * T_plus))


def p2_bar_quadrature(T_i: float, T_plus: float, epsabs: float = 1e-10) -> float:
    """The same average by adaptive quadrature over theta~ in [0, pi]."""
    if T_i == 0 or T_plus == 0:
        return 0.0
    val, _ = quad(lambda th: success_probability(T_i, T_plus, th), 0.0, np.pi, epsabs=epsabs, epsrel=0)
    return val / np.pi


@dataclass(frozen=True)
class LogicalState:
    amplitudes: np.ndarray
    p2: float
    theta_tilde: float
    phi_tilde: float
    degenerate: bool = False


def _two_channel(outcome: ScatterOutcome) -> tuple[float, float, float]:
    if outcome.partner is None:
        raise ValueError("outcome has no partner channel for the logical analysis")
    T_i = float(outcome.T[outcome.incoming])
    T_p = float(outcome.T[outcome.partner])
    phase = outcome.phi_plus
    return T_i, T_p, 0.0 if phase is None else phase


def project_transmitted(outcome: ScatterOutcome, theta: float, phi: float = 0.0) -> LogicalState:
    """Project the transmitted state onto the -1/2 eigenstate of S_e.n.

    Amplitudes are returned in the Bloch gauge (real, non-negative |0>
    coefficient); their squared norm is p^2.
    """
    T_i, T_p, phi_p = _two_channel(outcome)
    raw = np.array(
        [
            np.cos(theta / 2) * np.exp(-1j * phi) * np.sqrt(T_i),
            -np.sin(theta / 2) * np.exp(1j * phi_p) * np.sqrt(T_p),
        ]
    )
    if abs(raw[0]) > 0:
        raw = raw * np.exp(-1j * np.angle(raw[0]))
    else:
        raw = raw * np.exp(1j * phi)
    p2 = float(np.vdot(raw, raw).real)
    if p2 == 0:
        raise UndefinedControlError("nothing is transmitted into the logical subspace")
    theta_t = 2 * np.arctan2(abs(raw[1]), abs(raw[0]))
    phi_t = float(np.mod(np.angle(raw[1]), TWO_PI)) if abs(raw[1]) > 0 else float(
        np.mod(phi + phi_p + np.pi, TWO_PI)
    )
    return LogicalState(
        amplitudes=raw,
        p2=p2,
        theta_tilde=float(theta_t),
        phi_tilde=phi_t,
        degenerate=not outcome.channels.open[outcome.partner],
    )


@dataclass(frozen=True)
class EntanglementResult:
    T_i: float
    T_plus: float
    phi_plus: float | None
    theta: np.ndarray
    theta_tilde: np.ndarray
    p2: np.ndarray
    p2_bar: float


def entanglement_metrics(outcome: ScatterOutcome, theta_tilde=None) -> EntanglementResult:
    """p^2 on a theta~ grid and its average for one scattering outcome."""
    T_i, T_p, _ = _two_channel(outcome)
    if theta_tilde is None:
        theta_tilde = np.linspace(0, np.pi, 5)
    theta_tilde = np.asarray(theta_tilde, dtype=float)
    if T_i > 0 and T_p > 0:
        theta = measurement_angle(T_i, T_p, theta_tilde)
        p2 = success_probability(T_i, T_p, theta_tilde)
    else:
        theta = np.full_like(theta_tilde, np.nan)
        p2 = np.zeros_like(theta_tilde)
    return EntanglementResult(
        T_i=T_i,
        T_plus=T_p,
        phi_plus=outcome.phi_plus,
        theta=np.atleast_1d(theta),
        theta_tilde=theta_tilde,
        p2=np.atleast_1d(p2),
        p2_bar=p2_bar(T_i, T_p),
    )
