"""Independent reference solutions.

* Continuum transmission for a delta-function exchange contact with a
  spin-1/2 impurity.
* A direct wavefunction-matching solver that writes the lattice Schroedinger
  equation at every site with plane-wave (or evanescent) lead forms and solves
  for the amplitudes, without any Green's function or self-energy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import ScatteringModel, ScatterOutcome
from .exceptions import ClosedChannelError, IllConditionedError
from .lead import ChannelTable


@dataclass(frozen=True)
class ContinuumParams:
    s: float
    J: float
    t_c: float
    ka: float

    def __post_init__(self):
        if not self.ka > 0:
            raise ValueError("k_i a_c must be positive")

    @property
    def J0(self) -> float:
        return np.sqrt(2 * self.s) * self.J / (4 * self.t_c * self.ka)


def continuum_coefficients(J0):
    """(T_flip, T_noflip) as functions of the dimensionless coupling J0."""
    J0 = np.asarray(J0, dtype=float)
    j2 = J0 * J0
    den = 1 + 2.5 * j2 + 0.5625 * j2 * j2
    return j2 / den, (1 + 0.25 * j2) / den


def continuum_Tf(p: ContinuumParams) -> float:
    return float(continuum_coefficients(p.J0)[0])


def continuum_Tnf(p: ContinuumParams) -> float:
    return float(continuum_coefficients(p.J0)[1])


def _lead_roots(E: float, eps0: float, t_s: float) -> tuple[complex, bool, float]:
    """Outgoing (or decaying) Bloch factor lambda, open flag and velocity."""
    # lead equation: (E - eps0) psi_j + t (psi_{j-1} + psi_{j+1}) = 0, psi_j ~ lambda^j
    c = (eps0 - E) / (2 * t_s)
    if abs(c) < 1:
        k = np.arccos(c)
        return np.exp(1j * k), True, 2 * t_s * np.sin(k)
    kappa = np.arccosh(abs(c))
    return np.sign(c) * np.exp(-kappa), False, 0.0


def wavefunction_matching_solve(
    model: ScatteringModel, K_i: float, incoming: int | None = None
) -> ScatterOutcome:
    i = model.incoming if incoming is None else model.channel(incoming)
    d, N, t = model.d, model.N, model.t
    eps0 = np.asarray(model.lead.eps0_diag, dtype=float) - model.lead.eps0_diag[i]
    onsite = [np.asarray(e) - model.lead.eps0_diag[i] * np.eye(d) for e in model.eps]
    hops = np.asarray(model.lead.hopping_mask) * t
    E = K_i - 2 * t

    lam = np.zeros(d, dtype=np.complex128)
    is_open = np.zeros(d, dtype=bool)
    vel = np.zeros(d)
    k = np.full(d, np.nan)
    for s in range(d):
        if hops[s] == 0:
            continue
        lam[s], is_open[s], vel[s] = _lead_roots(E, eps0[s], hops[s])
        if is_open[s]:
            k[s] = np.angle(lam[s])
    if not is_open[i]:
        raise ClosedChannelError(f"incoming channel {i} is closed at K_i={K_i}")

    n_sites = N + 2
    n_psi = n_sites * d
    size = n_psi + 2 * d
    ib, ic = n_psi, n_psi + d  # offsets of B and C unknowns
    M = np.zeros((size, size), dtype=np.complex128)
    rhs = np.zeros(size, dtype=np.complex128)

    def col(j, s):
        return j * d + s

    row = 0
    # left surface, site 0: psi_{-1} = A / lambda + B lambda per channel
    for s in range(d):
        M[row, col(0, s)] = E - eps0[s]
        M[row, col(1, s)] = hops[s]
        M[row, ib + s] = hops[s] * lam[s]
        if s == i:
            rhs[row] = -hops[s] / lam[s]
        row += 1
    # scattering sites
    for j in range(1, N + 1):
        h = onsite[j - 1]
        for s in range(d):
            for s2 in range(d):
                M[row, col(j, s2)] = -h[s, s2]
            M[row, col(j, s)] += E
            M[row, col(j - 1, s)] += hops[s]
            M[row, col(j + 1, s)] += hops[s]
            row += 1
    # right surface, site N+1: psi_{N+2} = C lambda
    for s in range(d):
        M[row, col(N + 1, s)] = E - eps0[s]
        M[row, col(N, s)] = hops[s]
        M[row, ic + s] = hops[s] * lam[s]
        row += 1
    # continuity: psi_0 = A + B, psi_{N+1} = C
    for s in range(d):
        M[row, col(0, s)] = 1.0
        M[row, ib + s] = -1.0
        rhs[row] = 1.0 if s == i else 0.0
        row += 1
    for s in range(d):
        M[row, col(N + 1, s)] = 1.0
        M[row, ic + s] = -1.0
        row += 1

    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > 1e14:
        raise IllConditionedError(f"matching system is singular (cond {cond:.3e})", cond)
    sol = np.linalg.solve(M, rhs)
    B = sol[ib:ib + d]
    C = sol[ic:ic + d]
    v_i = vel[i]
    T = np.where(is_open, np.abs(C) ** 2 * vel / v_i, 0.0)
    R = np.where(is_open, np.abs(B) ** 2 * vel / v_i, 0.0)
    x = np.where(hops > 0, (E - eps0) / np.where(hops > 0, -2 * hops, 1.0), np.nan)
    table = ChannelTable(
        K_i=float(K_i),
        x=x,
        open=is_open,
        k=k,
        v=np.where(is_open, vel, np.nan),
    )
    p = model.partner
    return ScatterOutcome(
        K_i=float(K_i),
        incoming=i,
        channels=table,
        T=T,
        R=R,
        C=C,
        B=B,
        N=N,
        partner=p if p != i else None,
        labels=model.labels,
    )
