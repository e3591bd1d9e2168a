"""Spin Hamiltonians for the scattering region.

Every builder returns a :class:`~spinscatter.engine.ScatteringModel`. Channel
labels are ("i", "plus", "minus") for an electron scattering off two spin-s
moments, and electron-first product labels ("uu", "ud", "du", "dd") for the
single spin-1/2 impurity examples.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .engine import ScatteringModel
from .exceptions import ModelRejectedError
from .lead import LeadSpec
from .spin_algebra import CHANNEL_LABELS, ProductSpace, project_mT_block
from .validation import check_spin

IMPURITY_LABELS = ("uu", "ud", "du", "dd")
ANDERSON_LABELS = ("20", "ud", "du", "02")
SW_LABELS = ("ud", "du")


@dataclass(frozen=True)
class MolecularParams:
    """Two identical spin-s moments with uniaxial anisotropy and exchange (meV)."""

    s: float
    D1: float
    D2: float
    J12x: float
    J12z: float
    J: float = -0.5

    def __post_init__(self):
        s = check_spin(self.s)
        if s <= 0:
            raise ValueError("molecular spins need s > 0")

    @classmethod
    def symmetric(cls, s, D, J12x, J12z, J=-0.5) -> "MolecularParams":
        return cls(s=s, D1=D, D2=D, J12x=J12x, J12z=J12z, J=J)

    @property
    def D(self) -> float:
        return (self.D1 + self.D2) / 2

    @property
    def delta_D(self) -> float:
        return self.D1 - self.D2

    @property
    def inversion_symmetric(self) -> bool:
        return self.D1 == self.D2


# Fitted parameters for real molecules, J12x = J12z and D1 = D2 in meV.
PRESETS: dict[str, MolecularParams] = {
    "MnPc": MolecularParams.symmetric(1.5, -0.99, -0.77, -0.77),
    "MnIII_dimer": MolecularParams.symmetric(4, -0.08, -0.53, -0.53),
    "Mn4_dimer": MolecularParams.symmetric(4.5, -0.06, 0.009, 0.009),
    "Mn3_dimer": MolecularParams.symmetric(6, -0.03, -0.006, -0.006),
}


def get_preset(name: str, J: float | None = None) -> MolecularParams:
    try:
        p = PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    if J is not None:
        p = MolecularParams(p.s, p.D1, p.D2, p.J12x, p.J12z, J)
    return p


def _three_channel_model(eps, eps0_diag, t: float) -> ScatteringModel:
    return ScatteringModel(
        eps=tuple(eps), lead=LeadSpec(t, tuple(eps0_diag)), labels=CHANNEL_LABELS
    )


def kondo_dot_blocks(s) -> tuple[np.ndarray, np.ndarray]:
    """S_e.S_1 and S_e.S_2 projected onto the (|i>, |+>, |->) block."""
    s = check_spin(s)
    space = ProductSpace((Fraction(1, 2), s, s))
    m_t = 2 * s - Fraction(1, 2)
    return (
        project_mT_block(space.dot(0, 1), m_t),
        project_mT_block(space.dot(0, 2), m_t),
    )


def kondo_contact_spread(s, J: float, N: int, t: float) -> ScatteringModel:
    """Electron couples to moment 1 on site 1 and to moment 2 on site N."""
    if N < 2:
        raise ValueError("the spread contact model needs N >= 2")
    dot1, dot2 = kondo_dot_blocks(s)
    eps = [np.zeros((3, 3), dtype=np.complex128) for _ in range(N)]
    eps[0] = eps[0] + J * dot1
    eps[-1] = eps[-1] + J * dot2
    return _three_channel_model(eps, (0.0, 0.0, 0.0), t)


def kondo_contact_combined(s, J: float) -> np.ndarray:
    """J S_e.S_12 in the (|i>, |+>, |->) basis, written out explicitly."""
    s = float(check_spin(s))
    r = np.sqrt(s)
    return J * np.array(
        [
            [-s, r, 0.0],
            [r, s - 0.5, 0.0],
            [0.0, 0.0, s - 0.5],
        ],
        dtype=np.complex128,
    )


def kondo_combined_model(s, J: float, N: int, t: float) -> ScatteringModel:
    """Combined-spin contact on site 1 of an N-site region."""
    eps = [np.zeros((3, 3), dtype=np.complex128) for _ in range(N)]
    eps[0] = kondo_contact_combined(s, J)
    return _three_channel_model(eps, (0.0, 0.0, 0.0), t)


def energy_splitting(p: MolecularParams) -> float:
    """Lead-level splitting eps0_++ - eps0_ii of the two s12 = 2s channels."""
    s = float(p.s)
    return (1 - 2 * s) * p.D + s * (p.J12x - p.J12z)


def molecular_background(p: MolecularParams) -> np.ndarray:
    """Anisotropy plus exchange terms in the (|i>, |+>, |->) basis, constant included."""
    s = float(p.s)
    const = 2 * s * s * p.D + (s * s - s) * p.J12z
    off = (s - 0.5) * p.delta_D
    block = np.array(
        [
            [s * p.J12z, 0.0, 0.0],
            [0.0, (1 - 2 * s) * p.D + s * p.J12x, off],
            [0.0, off, (1 - 2 * s) * p.D - s * p.J12x],
        ],
        dtype=np.complex128,
    )
    return const * np.eye(3) + block


def molecular_full_space(p: MolecularParams, with_kondo: bool = True) -> np.ndarray:
    """The same on-site operator built on the full product space and projected."""
    s = check_spin(p.s)
    space = ProductSpace((Fraction(1, 2), s, s))
    s1 = space.spin_vector(1)
    s2 = space.spin_vector(2)
    h = (
        p.D1 * s1[2] @ s1[2]
        + p.D2 * s2[2] @ s2[2]
        + p.J12x * (s1[0] @ s2[0] + s1[1] @ s2[1])
        + p.J12z * s1[2] @ s2[2]
    )
    if with_kondo:
        h = h + p.J * (space.dot(0, 1) + space.dot(0, 2))
    return project_mT_block(h, 2 * s - Fraction(1, 2))


def molecular_block(p: MolecularParams, N: int, t: float) -> ScatteringModel:
    """Two-moment molecular magnet with the combined contact on site 1.

    The background spin energies sit on every site, leads included, and the
    energy origin is the |i> channel.
    """
    if p.delta_D != 0:
        off = abs((float(p.s) - 0.5) * p.delta_D)
        if off > 0:
            raise ModelRejectedError(
                f"D1 != D2 couples |+> and |-> in the leads (off-diagonal {off:.6g} meV); "
                "scattering needs an inversion-symmetric molecule",
                off,
            )
    if N < 1:
        raise ValueError("N must be at least 1")
    bg = molecular_background(p)
    bg = bg - bg[0, 0].real * np.eye(3)
    eps0_diag = np.real(np.diag(bg))
    eps = [bg.copy() for _ in range(N)]
    eps[0] = eps[0] + kondo_contact_combined(p.s, p.J)
    return _three_channel_model(eps, eps0_diag, t)


def d_for_splitting(s, delta_E: float, J12x: float = 1.0, J12z: float = 1.0) -> float:
    """Anisotropy D that yields the lead splitting ``delta_E``."""
    s = float(check_spin(s))
    if s == 0.5:
        if abs(delta_E - 0.5 * (J12x - J12z)) > 1e-15:
            raise ValueError("for s = 1/2 the splitting is fixed by the exchange alone")
        return 0.0
    return (delta_E - s * (J12x - J12z)) / (1 - 2 * s)


def exchange_matrix() -> np.ndarray:
    """S_e.S_1 for two spin-1/2 particles in the (uu, ud, du, dd) basis."""
    return 0.25 * np.array(
        [[1, 0, 0, 0], [0, -1, 2, 0], [0, 2, -1, 0], [0, 0, 0, 1]], dtype=np.complex128
    )


def zeeman_impurity(J: float, Delta: float, t: float) -> ScatteringModel:
    """Electron exchange-coupled to one spin-1/2 carrying a Zeeman gap ``Delta``.

    The default incoming channel is |up>_e |down>_1, which must absorb
    ``Delta`` to flip into |down>_e |up>_1.
    """
    if Delta < 0:
        raise ValueError("Delta must be non-negative")
    zee = Delta * np.array([1.0, 0.0, 1.0, 0.0])
    eps1 = J * exchange_matrix() + np.diag(zee)
    return ScatteringModel(
        eps=(eps1,),
        lead=LeadSpec(t, tuple(zee)),
        labels=IMPURITY_LABELS,
        incoming=IMPURITY_LABELS.index("ud"),
        partner=IMPURITY_LABELS.index("du"),
    )


def single_impurity(J: float, t: float) -> ScatteringModel:
    """Contact exchange with one spin-1/2 on site 1; incoming |down>_e |up>_1."""
    return ScatteringModel(
        eps=(J * exchange_matrix(),),
        lead=LeadSpec(t, (0.0,) * 4),
        labels=IMPURITY_LABELS,
        incoming=IMPURITY_LABELS.index("du"),
        partner=IMPURITY_LABELS.index("ud"),
    )


@dataclass(frozen=True)
class AndersonParams:
    """Two-site Anderson impurity: hopping, on-site repulsions, level detuning (meV)."""

    t_h: float
    U1: float
    U2: float
    eps: float

    @property
    def sw_validity(self) -> tuple[float, float]:
        """t_h/|U1 - eps| and t_h/|U2 + eps|; both must be small for the SW reduction."""
        a, b = abs(self.U1 - self.eps), abs(self.U2 + self.eps)
        return (
            np.inf if a == 0 else self.t_h / a,
            np.inf if b == 0 else self.t_h / b,
        )

    @property
    def J(self) -> float:
        return sw_coupling(self)


def sw_coupling(p: AndersonParams) -> float:
    a, b = p.U1 - p.eps, p.U2 + p.eps
    if a == 0 or b == 0:
        raise ValueError(
            f"Schrieffer-Wolff coupling diverges: U1 - eps = {a}, U2 + eps = {b}"
        )
    return 2 * p.t_h**2 * (p.U1 + p.U2) / (a * b)


def anderson_hamiltonian(p: AndersonParams) -> tuple[np.ndarray, np.ndarray]:
    """H_A in the (20, ud, du, 02) basis and the per-channel hopping mask."""
    th, e = p.t_h, p.eps
    h = np.array(
        [
            [p.U1 - e, -th, th, 0.0],
            [-th, 0.0, 0.0, -th],
            [th, 0.0, 0.0, th],
            [0.0, -th, th, p.U2 + e],
        ],
        dtype=np.complex128,
    ) + e * np.eye(4)
    mask = np.array([0.0, 1.0, 1.0, 0.0])
    return h, mask


def anderson_model(p: AndersonParams, t: float) -> ScatteringModel:
    """Exact Anderson impurity on site 1; doubly occupied states cannot hop.

    Constant shifts are removed so the singly occupied states match the
    Schrieffer-Wolff payload: eps_1 = H_A - eps I + (J/4) I.
    """
    h, mask = anderson_hamiltonian(p)
    J = sw_coupling(p)
    eps1 = h - p.eps * np.eye(4) + J / 4 * np.eye(4)
    return ScatteringModel(
        eps=(eps1,),
        lead=LeadSpec(t, (0.0,) * 4, tuple(mask)),
        labels=ANDERSON_LABELS,
        incoming=ANDERSON_LABELS.index("du"),
        partner=ANDERSON_LABELS.index("ud"),
    )


def schrieffer_wolff(p: AndersonParams) -> tuple[np.ndarray, float]:
    """J (S1.S2 - 1/4) on (ud, du) and the coupling J."""
    J = sw_coupling(p)
    h = J * np.array([[-0.5, 0.5], [0.5, -0.5]], dtype=np.complex128)
    return h, J


def schrieffer_wolff_model(p: AndersonParams, t: float) -> ScatteringModel:
    h, J = schrieffer_wolff(p)
    return ScatteringModel(
        eps=(h + J / 4 * np.eye(2),),
        lead=LeadSpec(t, (0.0, 0.0)),
        labels=SW_LABELS,
        incoming=SW_LABELS.index("du"),
        partner=SW_LABELS.index("ud"),
    )
