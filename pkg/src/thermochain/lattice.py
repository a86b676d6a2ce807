"""One-dimensional lattice assembly for the doubled-chain geometry.

Site order is [C_{M2-1} ... C_0, S, B_0 ... B_{M1-1}]: the auxiliary
(negative-frequency) chain extends to the left of the system site, the
primary chain to the right, so every Hamiltonian term is nearest
neighbour.  Chain-2 on-site energies and hoppings enter with negative
sign.  Fermionic models are mapped to spin chains by a Jordan-Wigner
transformation along the site order; the impurity's two spin orbitals
share one 4-dimensional site, with parity strings resolved inside it, so
no long-range string operators survive.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chainmap import ChainCoefficients
from .errors import ValidationError
from .spectral import BOSONIC, FERMIONIC

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]])

# fermionic single-mode operators in the (|0>, |1>) occupation basis
FERMION_LOWER = np.array([[0.0, 1.0], [0.0, 0.0]])
FERMION_NUMBER = np.array([[0.0, 0.0], [0.0, 1.0]])
FERMION_PARITY = np.array([[1.0, 0.0], [0.0, -1.0]])

# impurity site = (up mode) x (down mode); down carries the intra-site string
DOT_LOWER_UP = np.kron(FERMION_LOWER, np.eye(2))
DOT_LOWER_DOWN = np.kron(FERMION_PARITY, FERMION_LOWER)
DOT_NUMBER_UP = np.kron(FERMION_NUMBER, np.eye(2))
DOT_NUMBER_DOWN = np.kron(np.eye(2), FERMION_NUMBER)
DOT_PARITY = np.kron(FERMION_PARITY, FERMION_PARITY)

DOT_STATE_INDEX = {"empty": 0, "down": 1, "up": 2, "double": 3}

SPIN_KINDS = ("spin_dephasing", "spin_transverse")
SYSTEM_KINDS = SPIN_KINDS + ("anderson_dot",)
COUPLING_OPS = {"sigma_z": SIGMA_Z, "sigma_x": SIGMA_X}


def boson_annihilator(dim: int) -> np.ndarray:
    """Truncated harmonic-oscillator annihilation operator, b|n> = sqrt(n)|n-1>."""
    if dim < 2:
        raise ValidationError(f"boson site needs dim >= 2, got {dim}")
    return np.diag(np.sqrt(np.arange(1.0, dim)), 1)


def top_level_projector(dim: int) -> np.ndarray:
    """Projector onto the highest retained local level (truncation monitor)."""
    proj = np.zeros((dim, dim))
    proj[dim - 1, dim - 1] = 1.0
    return proj


@dataclass(frozen=True)
class SystemSpec:
    """Impurity definition: a driven spin or an interacting dot.

    For spin kinds the initial state is amp0 |0> + amp1 |1> with |0> the
    sigma_z = +1 state, the Hamiltonian is (omega_s/2) sigma_z, and the
    bath couples through sigma_z (dephasing) or sigma_x (transverse),
    overridable via ``coupling_op``.  For the interacting dot the
    Hamiltonian is V (n_up + n_dn) + U n_up n_dn and the bath couples
    through the tunneling operator -t_hyb (d_up + d_dn).
    """

    kind: str
    omega_s: float = 0.0
    amp0: complex = 1.0
    amp1: complex = 0.0
    coupling_op: str | None = None
    coulomb_u: float = 0.0
    level: float = 0.0
    t_hyb: float = 0.0
    initial_dot: str = "up"

    def __post_init__(self):
        if self.kind not in SYSTEM_KINDS:
            raise ValidationError(f"unknown system kind {self.kind!r}")
        if self.kind in SPIN_KINDS:
            norm = abs(self.amp0) ** 2 + abs(self.amp1) ** 2
            if abs(norm - 1.0) > 1e-10:
                raise ValidationError(f"initial amplitudes not normalized: |a|^2+|b|^2 = {norm}")
            if self.coupling_op is not None and self.coupling_op not in COUPLING_OPS:
                raise ValidationError(f"coupling_op must be one of {tuple(COUPLING_OPS)}")
        else:
            if self.initial_dot not in DOT_STATE_INDEX:
                raise ValidationError(
                    f"initial_dot must be one of {tuple(DOT_STATE_INDEX)}, got {self.initial_dot!r}"
                )

    @property
    def dim(self) -> int:
        return 2 if self.kind in SPIN_KINDS else 4

    def hamiltonian(self) -> np.ndarray:
        if self.kind in SPIN_KINDS:
            return 0.5 * self.omega_s * SIGMA_Z
        return self.level * (DOT_NUMBER_UP + DOT_NUMBER_DOWN) + self.coulomb_u * (
            DOT_NUMBER_UP @ DOT_NUMBER_DOWN
        )

    def bath_coupling(self) -> np.ndarray:
        """The operator L appearing in L^dag B_0 + B_0^dag L."""
        if self.kind in SPIN_KINDS:
            name = self.coupling_op
            if name is None:
                name = "sigma_z" if self.kind == "spin_dephasing" else "sigma_x"
            return COUPLING_OPS[name]
        return -self.t_hyb * (DOT_LOWER_UP + DOT_LOWER_DOWN)

    def initial_vector(self) -> np.ndarray:
        if self.kind in SPIN_KINDS:
            return np.array([self.amp0, self.amp1], dtype=complex)
        vec = np.zeros(4, dtype=complex)
        vec[DOT_STATE_INDEX[self.initial_dot]] = 1.0
        return vec


@dataclass(frozen=True)
class SiteSpec:
    """Local Hilbert space of one lattice site."""

    label: str
    dim: int
    kind: str  # 'boson' | 'fermion' | 'spin' | 'dot'


@dataclass
class LatticeModel:
    """Sites plus on-site and nearest-neighbour Hamiltonian terms.

    ``onsite[i]`` is a dim_i x dim_i matrix (or None); ``bonds[i]`` acts
    on sites (i, i+1) as a (dim_i*dim_{i+1})^2 matrix.  All terms are
    validated Hermitian at construction.
    """

    sites: list[SiteSpec]
    onsite: list[np.ndarray | None]
    bonds: list[np.ndarray]
    system_index: int
    statistics: str
    system: SystemSpec
    couplings: tuple[float, float] = (0.0, 0.0)
    labels: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.sites)
        if len(self.onsite) != n:
            raise ValidationError("one onsite term slot per site required")
        if len(self.bonds) != max(n - 1, 0):
            raise ValidationError("expected one bond term per nearest-neighbour pair")
        for i, term in enumerate(self.onsite):
            if term is not None:
                _require_hermitian(term, f"onsite[{i}]", self.sites[i].dim)
        for i, term in enumerate(self.bonds):
            d = self.sites[i].dim * self.sites[i + 1].dim
            _require_hermitian(term, f"bond[{i}]", d)

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def dims(self) -> list[int]:
        return [s.dim for s in self.sites]

    def initial_product_state(self) -> list[np.ndarray]:
        """Local state vectors realizing (chain vacua) x (system state)."""
        vectors = []
        for i, site in enumerate(self.sites):
            if i == self.system_index:
                vectors.append(self.system.initial_vector())
            else:
                vec = np.zeros(site.dim, dtype=complex)
                vec[0] = 1.0
                vectors.append(vec)
        return vectors

    def default_observables(self) -> list[tuple[str, int, np.ndarray]]:
        """(name, site, operator) triples measured by the evolution CLI."""
        i = self.system_index
        if self.system.kind in SPIN_KINDS:
            return [("sx", i, SIGMA_X), ("sy", i, SIGMA_Y), ("sz", i, SIGMA_Z)]
        return [("n_up", i, DOT_NUMBER_UP), ("n_dn", i, DOT_NUMBER_DOWN)]


def _require_hermitian(mat: np.ndarray, what: str, dim: int, tol: float = 1e-12) -> None:
    if mat.shape != (dim, dim):
        raise ValidationError(f"{what}: expected shape {(dim, dim)}, got {mat.shape}")
    dev = np.abs(mat - mat.conj().T).max()
    if dev > tol * max(1.0, np.abs(mat).max()):
        raise ValidationError(f"{what}: not Hermitian (deviation {dev:.2e})")


def _chain_site_dims(m: int, n_max: int, n_max_first: int) -> list[int]:
    # first two sites of a chain (nearest the system) may carry more levels
    return [(n_max_first if n < 2 else n_max) + 1 for n in range(m)]


def _hop(op_left: np.ndarray, op_right: np.ndarray) -> np.ndarray:
    """kron(op_left, op_right) plus its Hermitian conjugate."""
    term = np.kron(op_left, op_right)
    return term + term.conj().T


def build_spin_boson(
    system: SystemSpec,
    chain1: ChainCoefficients,
    chain2: ChainCoefficients,
    n_max: int,
    n_max_first: int | None = None,
    allow_unequal: bool = False,
) -> LatticeModel:
    """Assemble the spin + doubled bosonic chain lattice.

    ``chain2`` may be empty (zero temperature), collapsing to a single
    chain.  Unequal chain lengths are rejected unless ``allow_unequal``
    is set, since they normally indicate a config mistake.
    """
    if system.kind not in SPIN_KINDS:
        raise ValidationError("build_spin_boson requires a spin system kind")
    if chain1.is_empty:
        raise ValidationError("chain 1 is empty; the bath must couple through it")
    if not chain2.is_empty and chain2.chain_length != chain1.chain_length and not allow_unequal:
        raise ValidationError(
            f"chain lengths differ ({chain1.chain_length} vs {chain2.chain_length}); "
            "unequal lengths require explicit opt-in"
        )
    if n_max < 1:
        raise ValidationError("n_max must be >= 1")
    if n_max_first is None:
        n_max_first = n_max
    if n_max_first < n_max:
        raise ValidationError("n_max_first must be >= n_max")

    m1, m2 = chain1.chain_length, chain2.chain_length
    dims1 = _chain_site_dims(m1, n_max, n_max_first)
    dims2 = _chain_site_dims(m2, n_max, n_max_first)

    sites: list[SiteSpec] = []
    onsite: list[np.ndarray | None] = []
    for n in reversed(range(m2)):
        sites.append(SiteSpec(label=f"C{n}", dim=dims2[n], kind="boson"))
        num = np.diag(np.arange(dims2[n], dtype=float))
        onsite.append(-chain2.alphas[n] * num)
    system_index = len(sites)
    sites.append(SiteSpec(label="S", dim=2, kind="spin"))
    onsite.append(system.hamiltonian())
    for n in range(m1):
        sites.append(SiteSpec(label=f"B{n}", dim=dims1[n], kind="boson"))
        num = np.diag(np.arange(dims1[n], dtype=float))
        onsite.append(chain1.alphas[n] * num)

    coupling_l = system.bath_coupling().astype(complex)
    bonds: list[np.ndarray] = []
    # auxiliary chain, left of the system: bond (C_{n+1}, C_n) with -sqrt(beta2)
    for n in reversed(range(m2 - 1)):
        a_left = boson_annihilator(dims2[n + 1])
        a_right = boson_annihilator(dims2[n])
        bonds.append(-chain2.hops[n] * _hop(a_left.conj().T, a_right))
    if m2:
        # g2 (L C_0 + C_0^dag L^dag): creation in chain 2 pairs with L^dag
        a0 = boson_annihilator(dims2[0])
        term = chain2.coupling * np.kron(a0, coupling_l)
        bonds.append(term + term.conj().T)
    # g1 (L^dag B_0 + B_0^dag L)
    a0 = boson_annihilator(dims1[0])
    term = chain1.coupling * np.kron(coupling_l.conj().T, a0)
    bonds.append(term + term.conj().T)
    for n in range(m1 - 1):
        a_left = boson_annihilator(dims1[n])
        a_right = boson_annihilator(dims1[n + 1])
        bonds.append(chain1.hops[n] * _hop(a_left, a_right.conj().T))
    model = LatticeModel(
        sites=sites,
        onsite=onsite,
        bonds=bonds,
        system_index=system_index,
        statistics=BOSONIC,
        system=system,
        couplings=(chain1.coupling, chain2.coupling),
    )
    return model


def build_anderson(
    system: SystemSpec,
    chain1: ChainCoefficients,
    chain2: ChainCoefficients,
    allow_unequal: bool = False,
) -> LatticeModel:
    """Assemble the interacting dot + doubled fermionic chain lattice.

    All fermionic bilinears are Jordan-Wigner transformed along the site
    order; because both dot orbitals live on one site, every surviving
    term is a plain nearest-neighbour matrix.
    """
    if system.kind != "anderson_dot":
        raise ValidationError("build_anderson requires the anderson_dot system kind")
    if chain1.is_empty:
        raise ValidationError("chain 1 is empty; the bath must couple through it")
    if not chain2.is_empty and chain2.chain_length != chain1.chain_length and not allow_unequal:
        raise ValidationError(
            f"chain lengths differ ({chain1.chain_length} vs {chain2.chain_length}); "
            "unequal lengths require explicit opt-in"
        )

    m1, m2 = chain1.chain_length, chain2.chain_length
    sites: list[SiteSpec] = []
    onsite: list[np.ndarray | None] = []
    for n in reversed(range(m2)):
        sites.append(SiteSpec(label=f"C{n}", dim=2, kind="fermion"))
        onsite.append(-chain2.alphas[n] * FERMION_NUMBER)
    system_index = len(sites)
    sites.append(SiteSpec(label="S", dim=4, kind="dot"))
    onsite.append(system.hamiltonian())
    for n in range(m1):
        sites.append(SiteSpec(label=f"B{n}", dim=2, kind="fermion"))
        onsite.append(chain1.alphas[n] * FERMION_NUMBER)

    sp, sm = FERMION_LOWER.conj().T, FERMION_LOWER
    # f_i^dag f_{i+1} + h.c. between adjacent single-mode sites; the
    # Jordan-Wigner string collapses to sigma^+ sigma^- + sigma^- sigma^+
    xy = np.kron(sp, sm) + np.kron(sm, sp)

    bonds: list[np.ndarray] = []
    for n in reversed(range(m2 - 1)):
        bonds.append(-chain2.hops[n] * xy)
    if m2:
        # g2 (L C_0 + C_0^dag L^dag), L = -t (d_up + d_dn); the anticommutation
        # through C_0 cancels the string sign: d_sigma C_0 -> sm x a_sigma
        term = np.zeros((8, 8), dtype=complex)
        for a_sigma in (DOT_LOWER_UP, DOT_LOWER_DOWN):
            term += -system.t_hyb * chain2.coupling * np.kron(sm, a_sigma)
        bonds.append(term + term.conj().T)
    # g1 (L^dag B_0 + B_0^dag L): d_sigma^dag B_0 -> (a_sigma^dag P_dot) x sm
    term = np.zeros((8, 8), dtype=complex)
    for a_sigma in (DOT_LOWER_UP, DOT_LOWER_DOWN):
        term += -system.t_hyb * chain1.coupling * np.kron(a_sigma.conj().T @ DOT_PARITY, sm)
    bonds.append(term + term.conj().T)
    for n in range(m1 - 1):
        bonds.append(chain1.hops[n] * xy)

    return LatticeModel(
        sites=sites,
        onsite=onsite,
        bonds=bonds,
        system_index=system_index,
        statistics=FERMIONIC,
        system=system,
        couplings=(chain1.coupling, chain2.coupling),
    )


def bond_hamiltonians(model: LatticeModel) -> list[np.ndarray]:
    """Bond terms with on-site energies folded in for gate generation.

    Interior sites contribute half their on-site term to each adjacent
    bond; boundary sites contribute their full term to their only bond.
    Summing the embedded results reproduces the total Hamiltonian.
    """
    n = model.n_sites
    if n < 2:
        raise ValidationError("bond Hamiltonians need at least two sites")
    dims = model.dims
    out: list[np.ndarray] = []
    for i in range(n - 1):
        dl, dr = dims[i], dims[i + 1]
        h = np.array(model.bonds[i], dtype=complex)
        left = model.onsite[i]
        if left is not None:
            w = 1.0 if i == 0 else 0.5
            h = h + w * np.kron(left, np.eye(dr))
        right = model.onsite[i + 1]
        if right is not None:
            w = 1.0 if i + 1 == n - 1 else 0.5
            h = h + w * np.kron(np.eye(dl), right)
        out.append(h)
    return out


def total_hamiltonian(model: LatticeModel) -> np.ndarray:
    """Dense Hamiltonian on the full tensor product (small lattices only)."""
    dims = model.dims
    total_dim = int(np.prod(dims))
    if total_dim > 2**14:
        raise ValidationError(f"dense assembly refused for dimension {total_dim}")
    ham = np.zeros((total_dim, total_dim), dtype=complex)
    for i, term in enumerate(model.onsite):
        if term is not None:
            ham += _embed(term, dims, i, i)
    for i, term in enumerate(model.bonds):
        ham += _embed(term, dims, i, i + 1)
    return ham


def _embed(term: np.ndarray, dims: list[int], first: int, last: int) -> np.ndarray:
    left = int(np.prod(dims[:first])) if first else 1
    right = int(np.prod(dims[last + 1:])) if last + 1 < len(dims) else 1
    return np.kron(np.kron(np.eye(left), term), np.eye(right))
