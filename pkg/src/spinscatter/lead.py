"""Semi-infinite tight-binding leads: dispersion, channels and self-energies.

Energies are in meV and lengths in lattice spacings (hbar = a = 1). Kinetic
energies ``K`` are measured from the bottom of the band, so a channel with
lead on-site energy ``eps0`` carries a plane wave when

    K = eps0 + 2 t - 2 t cos(k).

Inside the Green's-function machinery the chain on-site energies sit at the
band centre, i.e. the energy argument is ``K - 2 t``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ConvergenceError


@dataclass(frozen=True)
class LeadSpec:
    """Identical left and right leads.

    ``hopping_mask`` scales the hopping per channel. A zero entry marks a
    channel that cannot leave the scattering region (e.g. doubly occupied
    states of an Anderson impurity).
    """

    t: float
    eps0_diag: tuple[float, ...]
    hopping_mask: tuple[float, ...] | None = None

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError(f"hopping t must be positive, got {self.t}")
        eps0 = tuple(float(e) for e in np.atleast_1d(np.asarray(self.eps0_diag, dtype=float)))
        object.__setattr__(self, "eps0_diag", eps0)
        if self.hopping_mask is None:
            object.__setattr__(self, "hopping_mask", (1.0,) * len(eps0))
        else:
            mask = tuple(float(m) for m in self.hopping_mask)
            if len(mask) != len(eps0):
                raise ValueError("hopping_mask length must match eps0_diag")
            if any(m < 0 for m in mask):
                raise ValueError("hopping_mask entries must be non-negative")
            object.__setattr__(self, "hopping_mask", mask)

    @property
    def n_channels(self) -> int:
        return len(self.eps0_diag)

    def hopping(self, channel: int) -> float:
        return self.t * self.hopping_mask[channel]

    @property
    def hoppings(self) -> np.ndarray:
        return self.t * np.asarray(self.hopping_mask)

    def shifted(self, delta: float) -> "LeadSpec":
        return LeadSpec(self.t, tuple(e - delta for e in self.eps0_diag), self.hopping_mask)


@dataclass(frozen=True)
class ChannelTable:
    """Per-channel lead kinematics at a fixed incoming kinetic energy.

    ``k`` and ``v`` are NaN for closed channels.
    """

    K_i: float
    x: np.ndarray
    open: np.ndarray
    k: np.ndarray
    v: np.ndarray

    def __len__(self) -> int:
        return self.x.size

    def velocity(self, channel: int) -> float:
        """Group velocity, zero for closed channels."""
        return float(self.v[channel]) if self.open[channel] else 0.0


def dispersion(k, t: float):
    """Kinetic energy 2t - 2t cos(k) of a lead plane wave."""
    return 2 * t - 2 * t * np.cos(k)


def band_energy(K_i: float, t: float) -> float:
    """Energy argument of the chain Green's function for kinetic energy ``K_i``."""
    return K_i - 2 * t


def _reduced_energy(K_i: float, lead: LeadSpec, channel: int) -> float:
    return (band_energy(K_i, lead.t) - lead.eps0_diag[channel]) / (-2 * lead.hopping(channel))


def channel_table(K_i: float, lead: LeadSpec) -> ChannelTable:
    n = lead.n_channels
    x = np.full(n, np.nan)
    is_open = np.zeros(n, dtype=bool)
    k = np.full(n, np.nan)
    v = np.full(n, np.nan)
    for sigma in range(n):
        t_s = lead.hopping(sigma)
        if t_s == 0:
            continue
        x[sigma] = _reduced_energy(K_i, lead, sigma)
        # |x| == 1 is the band edge: zero velocity, classified closed
        if abs(x[sigma]) < 1:
            is_open[sigma] = True
            k[sigma] = np.arccos(x[sigma])
            v[sigma] = 2 * t_s * np.sin(k[sigma])
    return ChannelTable(K_i=float(K_i), x=x, open=is_open, k=k, v=v)


def surface_gf_closed(K_i: float, lead: LeadSpec, channel: int) -> complex:
    """Retarded surface Green's function of one lead channel.

    Open channels take the root with Im(g) < 0; closed channels take the real,
    evanescent root with |t g| < 1.
    """
    t_s = lead.hopping(channel)
    if t_s == 0:
        return 0j
    x = _reduced_energy(K_i, lead, channel)
    if abs(x) < 1:
        lam = complex(x, np.sqrt(1 - x * x))
    else:
        lam = complex(x - np.copysign(np.sqrt(x * x - 1), x))
    return lam / (-t_s)


def surface_gf_iterative(
    K_i: float,
    lead: LeadSpec,
    channel: int,
    eta: float | None = None,
    tol: float = 1e-12,
    max_iter: int = 100_000,
    method: str = "newton",
) -> complex:
    """Surface Green's function from the self-consistency condition at E + i eta.

    ``method="newton"`` applies Newton steps to t^2 g^2 - (z - eps0) g + 1 = 0
    starting from 1 / (z - eps0), which stays in the basin of the retarded
    (or decaying) root. ``method="decimation"`` is the layer-doubling
    renormalization; its rounding error grows like 1 / eta^2.
    ``method="fixed_point"`` iterates g <- 1 / (z - eps0 - t^2 g) directly and
    needs on the order of t / eta steps inside the band.
    """
    t_s = lead.hopping(channel)
    if t_s == 0:
        return 0j
    if eta is None:
        eta = 1e-6 * lead.t
    if not eta > 0:
        raise ValueError("eta must be positive")
    z = complex(band_energy(K_i, lead.t), eta)
    eps0 = lead.eps0_diag[channel]
    if method == "fixed_point":
        g = 0j
        residual = np.inf
        for it in range(1, max_iter + 1):
            g_new = 1.0 / (z - eps0 - t_s * t_s * g)
            residual = abs(g_new - g)
            g = g_new
            if residual < tol:
                return g
        raise ConvergenceError(
            f"fixed-point surface GF did not converge in {max_iter} iterations",
            residual,
            max_iter,
        )
    if method == "newton":
        w = z - eps0
        t2 = t_s * t_s
        g = 1.0 / w
        residual = np.inf
        for it in range(1, max_iter + 1):
            step = (t2 * g * g - w * g + 1.0) / (2 * t2 * g - w)
            g = g - step
            residual = abs(step)
            if residual < tol * max(1.0, abs(g)):
                return g
        raise ConvergenceError(
            f"Newton surface GF did not converge in {max_iter} iterations", residual, max_iter
        )
    if method != "decimation":
        raise ValueError(f"unknown method {method!r}")
    eps_s = eps_b = complex(eps0)
    alpha = beta = complex(-t_s)
    residual = np.inf
    g_prev = 1.0 / (z - eps_s)
    for it in range(1, max_iter + 1):
        g_bulk = 1.0 / (z - eps_b)
        agb = alpha * g_bulk * beta
        eps_s = eps_s + agb
        eps_b = eps_b + 2 * agb
        alpha = alpha * g_bulk * alpha
        beta = beta * g_bulk * beta
        g = 1.0 / (z - eps_s)
        residual = abs(g - g_prev)
        g_prev = g
        if not np.isfinite(g):
            break
        if max(abs(alpha), abs(beta)) < tol and residual < tol:
            return g
    raise ConvergenceError(
        f"decimation surface GF did not converge in {it} iterations", residual, it
    )


def self_energy(K_i: float, lead: LeadSpec, channel: int) -> complex:
    """Retarded lead self-energy t^2 g (equals -t e^{ik} for open channels)."""
    t_s = lead.hopping(channel)
    return t_s * t_s * surface_gf_closed(K_i, lead, channel)


def self_energies(K_i: float, lead: LeadSpec) -> np.ndarray:
    return np.array([self_energy(K_i, lead, c) for c in range(lead.n_channels)])
