"""Green's-function solution of the spin-resolved scattering problem.

The chain has sites j = 0 .. N+1. Sites 0 and N+1 are the lead surfaces
(on-site eps0 plus the lead self-energy); sites 1 .. N carry the scattering
on-site operators. For an incoming wave of unit amplitude in channel i the
source vector is Q_{0 i} = i v_i and psi = G Q.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import warnings

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve
from scipy.linalg.lapack import zgecon

from .exceptions import ClosedChannelError, FluxConservationError, IllConditionedError
from .lead import LeadSpec, band_energy, channel_table, self_energies, ChannelTable
from .validation import check_hermitian

MAX_CONDITION = 1e14
FLUX_TOL = 1e-8


@dataclass(frozen=True)
class ScatteringModel:
    """Scattering-region on-site operators plus the lead description.

    ``eps`` holds one d x d Hermitian matrix per scattering site. ``incoming``
    and ``partner`` are default channel indices for solves and for the
    two-channel logical-state analysis.
    """

    eps: tuple[np.ndarray, ...]
    lead: LeadSpec
    labels: tuple[str, ...] | None = None
    incoming: int = 0
    partner: int = 1

    def __post_init__(self):
        mats = tuple(check_hermitian(e, f"eps[{j + 1}]") for j, e in enumerate(self.eps))
        if not mats:
            raise ValueError("scattering region needs at least one site")
        d = self.lead.n_channels
        for j, m in enumerate(mats):
            if m.shape != (d, d):
                raise ValueError(f"eps[{j + 1}] has shape {m.shape}, lead has {d} channels")
            m.setflags(write=False)
        object.__setattr__(self, "eps", mats)
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != d or len(set(labels)) != d:
                raise ValueError("labels must name each channel exactly once")
            object.__setattr__(self, "labels", labels)
        for name in ("incoming", "partner"):
            idx = getattr(self, name)
            if not 0 <= idx < d:
                raise ValueError(f"{name}={idx} outside 0..{d - 1}")

    @property
    def N(self) -> int:
        return len(self.eps)

    @property
    def d(self) -> int:
        return self.lead.n_channels

    @property
    def t(self) -> float:
        return self.lead.t

    @property
    def eps0(self) -> np.ndarray:
        return np.diag(np.asarray(self.lead.eps0_diag, dtype=np.complex128))

    def channel(self, label: str | int) -> int:
        if isinstance(label, (int, np.integer)):
            return int(label)
        if self.labels is None or label not in self.labels:
            raise KeyError(f"unknown channel {label!r}")
        return self.labels.index(label)

    def shifted(self, delta: float) -> "ScatteringModel":
        """Subtract ``delta`` from every on-site energy, leads included."""
        eye = np.eye(self.d)
        return replace(
            self,
            eps=tuple(e - delta * eye for e in self.eps),
            lead=self.lead.shifted(delta),
        )

    def zeroed(self, incoming: int) -> "ScatteringModel":
        """Energy origin moved so the incoming channel has eps0 = 0."""
        delta = self.lead.eps0_diag[incoming]
        return self if delta == 0 else self.shifted(delta)

    def mirrored(self) -> "ScatteringModel":
        return replace(self, eps=self.eps[::-1])


@dataclass(frozen=True)
class ScatterOutcome:
    K_i: float
    incoming: int
    channels: ChannelTable
    T: np.ndarray
    R: np.ndarray
    C: np.ndarray
    B: np.ndarray
    N: int
    partner: int | None = None
    labels: tuple[str, ...] | None = field(default=None, compare=False)

    @property
    def flux(self) -> float:
        return float(self.T.sum() + self.R.sum())

    @property
    def flux_violation(self) -> float:
        return abs(self.flux - 1.0)

    def relative_phase(self, sigma: int) -> float | None:
        """Phase of channel ``sigma`` relative to the incoming one at site N+1, in [0, 2pi)."""
        ch = self.channels
        i = self.incoming
        if not (ch.open[sigma] and ch.open[i]):
            return None
        phase = (
            np.angle(self.C[sigma])
            - np.angle(self.C[i])
            + (ch.k[sigma] - ch.k[i]) * (self.N + 1)
        )
        return float(np.mod(phase, 2 * np.pi))

    @property
    def phi_plus(self) -> float | None:
        if self.partner is None:
            return None
        return self.relative_phase(self.partner)

    def by_label(self, quantity: str = "T") -> dict[str, float]:
        values = getattr(self, quantity)
        names = self.labels or tuple(str(n) for n in range(values.size))
        return dict(zip(names, (float(v) for v in values)))


def build_effective_hamiltonian(model: ScatteringModel, K_i: float) -> np.ndarray:
    """Finite effective Hamiltonian over sites 0 .. N+1 with lead self-energies."""
    d, N = model.d, model.N
    sigma = np.diag(self_energies(K_i, model.lead))
    hop = np.diag(model.lead.hoppings).astype(np.complex128)
    size = (N + 2) * d
    h = np.zeros((size, size), dtype=np.complex128)
    diag_blocks = [model.eps0 + sigma, *model.eps, model.eps0 + sigma]
    for j, block in enumerate(diag_blocks):
        h[j * d:(j + 1) * d, j * d:(j + 1) * d] = block
    for j in range(N + 1):
        h[j * d:(j + 1) * d, (j + 1) * d:(j + 2) * d] = -hop
        h[(j + 1) * d:(j + 2) * d, j * d:(j + 1) * d] = -hop
    return h


def _factor(model: ScatteringModel, K_i: float):
    h = build_effective_hamiltonian(model, K_i)
    a = band_energy(K_i, model.t) * np.eye(h.shape[0]) - h
    anorm = float(np.max(np.sum(np.abs(a), axis=0)))
    with warnings.catch_warnings():
        # singularity is reported below through the condition estimate
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(a, check_finite=True)
    rcond, info = zgecon(lu, anorm, norm="1")
    if info != 0 or rcond == 0 or 1.0 / rcond > MAX_CONDITION:
        cond = np.inf if rcond == 0 else 1.0 / rcond
        raise IllConditionedError(
            f"E - H' is singular or ill-conditioned (condition ~ {cond:.3e}) at K_i={K_i}",
            cond,
        )
    return lu, piv


def retarded_gf(model: ScatteringModel, K_i: float) -> np.ndarray:
    """Full retarded Green's function (E - H')^-1 by LU with partial pivoting."""
    lu, piv = _factor(model, K_i)
    size = lu.shape[0]
    return lu_solve((lu, piv), np.eye(size, dtype=np.complex128))


def solve_scattering(
    model: ScatteringModel,
    K_i: float,
    incoming: int | str | None = None,
    partner: int | str | None = None,
    check_flux: bool = True,
) -> ScatterOutcome:
    """Spin-resolved transmission and reflection for one incoming channel."""
    i = model.incoming if incoming is None else model.channel(incoming)
    p = model.partner if partner is None else model.channel(partner)
    work = model.zeroed(i)
    table = channel_table(K_i, work.lead)
    if not table.open[i]:
        raise ClosedChannelError(f"incoming channel {i} is closed at K_i={K_i}")
    d, N = work.d, work.N
    lu, piv = _factor(work, K_i)
    # only the column of G fed by the source at (site 0, channel i) is needed
    unit = np.zeros(lu.shape[0], dtype=np.complex128)
    unit[i] = 1.0
    g_col = lu_solve((lu, piv), unit)
    v = np.where(table.open, table.v, 0.0)
    v_i = v[i]
    psi = 1j * v_i * g_col
    C = psi[(N + 1) * d:(N + 2) * d].copy()
    B = psi[:d].copy()
    B[i] -= 1.0
    g_t = g_col[(N + 1) * d:(N + 2) * d]
    g_r = g_col[:d]
    delta = np.zeros(d)
    delta[i] = 1.0
    T = v * v_i * np.abs(g_t) ** 2
    R = np.abs(1j * g_r * v_i - delta) ** 2 * v / v_i
    T[~table.open] = 0.0
    R[~table.open] = 0.0
    outcome = ScatterOutcome(
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
    if check_flux and outcome.flux_violation > FLUX_TOL:
        raise FluxConservationError(
            f"flux not conserved at K_i={K_i}: sum(T+R) = {outcome.flux:.12g}",
            outcome.flux_violation,
            outcome,
        )
    return outcome


def solve_many(
    model: ScatteringModel, energies: Sequence[float], incoming=None, partner=None
) -> list[ScatterOutcome]:
    return [solve_scattering(model, K, incoming, partner) for K in energies]
