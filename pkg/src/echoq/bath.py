"""Nuclear spin bath construction.

A bath realization is a random occupation of diamond-lattice carbon
sites inside a hollow sphere around the defect, together with the
per-nucleus precession data: the shared bare precession (omega0, n0)
set by the external field, and the conditioned precession (omega1, n1)
set by field plus secular hyperfine vector.

Everything here is deterministic given (config, seed): identical inputs
reproduce identical realizations bit for bit, and realization ``i`` of a
sweep draws from an independent stream spawned as
``numpy.random.SeedSequence(entropy=base_seed, spawn_key=(i,))``.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from . import constants

# Unit-vector tolerance for config directions.
_UNIT_TOL = 1e-6


def _unit(vec, what: str) -> NDArray[np.float64]:
    v = np.asarray(vec, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"{what} must be a 3-vector")
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise ValueError(f"{what} must be nonzero")
    if abs(norm - 1.0) > _UNIT_TOL:
        raise ValueError(f"{what} must be a unit vector (|v| = {norm:.9g})")
    return v / norm


class BathSizeError(RuntimeError):
    """Raised when a lattice enumeration would exceed the site cap."""


@dataclass(frozen=True)
class BathConfig:
    """Geometry, field and sampling parameters of a bath realization.

    Attributes:
        abundance: isotopic occupation probability per site, in (0, 1].
        r_min_nm, r_max_nm: hollow-sphere radii bounds, nm.
        b_gauss: magnitude of the external field, gauss.
        b_direction: unit vector of the field; defaults to the defect axis.
        nv_axis: defect symmetry axis in the crystal frame.
        seed: base seed of the realization stream (64-bit integer).
        site_cap: refuse enumerations larger than this many sites.
    """

    abundance: float
    r_min_nm: float = 0.65
    r_max_nm: float = 5.5
    b_gauss: float = 10.0
    b_direction: tuple[float, float, float] | None = None
    nv_axis: tuple[float, float, float] = tuple(constants.NV_AXIS_DEFAULT)
    seed: int = 0
    site_cap: int = 10_000_000

    def __post_init__(self):
        if not (0.0 < self.abundance <= 1.0):
            raise ValueError(f"abundance must be in (0, 1], got {self.abundance}")
        if not (0.0 < self.r_min_nm < self.r_max_nm):
            raise ValueError("need 0 < r_min < r_max")
        if self.b_gauss <= 0.0:
            raise ValueError("field magnitude must be positive")

    @property
    def nv_axis_vec(self) -> NDArray[np.float64]:
        return _unit(self.nv_axis, "nv_axis")

    @property
    def b_direction_vec(self) -> NDArray[np.float64]:
        if self.b_direction is None:
            return self.nv_axis_vec
        return _unit(self.b_direction, "b_direction")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["b_direction"] = None if self.b_direction is None else list(self.b_direction)
        d["nv_axis"] = list(self.nv_axis)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "BathConfig":
        d = dict(d)
        if d.get("b_direction") is not None:
            d["b_direction"] = tuple(d["b_direction"])
        d["nv_axis"] = tuple(d["nv_axis"])
        return cls(**d)


@dataclass
class NucleusCoupling:
    """Precession data of one bath nucleus.

    ``omega0 * n0`` is the bare precession vector gamma_n * B shared by
    the whole bath; ``omega1 * n1`` reconstructs gamma_n * B + a_vec
    exactly.  ``p`` and ``m_dir`` give the initial polarization degree
    and direction.
    """

    position_nm: NDArray[np.float64]
    a_vec: NDArray[np.float64]        # rad/s, secular hyperfine vector
    omega0: float                     # rad/s
    n0: NDArray[np.float64]
    omega1: float                     # rad/s
    n1: NDArray[np.float64]
    p: float
    m_dir: NDArray[np.float64]

    @property
    def cross2(self) -> float:
        """|n0 x n1|^2, the geometric modulation depth of this nucleus."""
        return float(np.linalg.norm(np.cross(self.n0, self.n1)) ** 2)


@dataclass
class BathRealization:
    config: BathConfig
    couplings: list[NucleusCoupling]
    realization: int = 0

    def __len__(self) -> int:
        return len(self.couplings)

    # omega0 and n0 are shared bath-wide; prefer the couplings' own values
    # so hand-assembled realizations stay self-consistent.
    @property
    def omega0(self) -> float:
        if self.couplings:
            return self.couplings[0].omega0
        return constants.GAMMA_N_C13 * self.config.b_gauss

    @property
    def n0(self) -> NDArray[np.float64]:
        if self.couplings:
            return self.couplings[0].n0
        return self.config.b_direction_vec


def enumerate_lattice_sites(
    r_min_nm: float,
    r_max_nm: float,
    nv_axis=None,
    site_cap: int = 10_000_000,
) -> NDArray[np.float64]:
    """Diamond-lattice carbon sites with r_min <= |r| <= r_max.

    The defect vacancy sits at the origin and the substitutional
    nitrogen occupies the nearest-neighbor site along ``nv_axis``; both
    are excluded.  Sites are ordered lexicographically by (cell index,
    basis index), so the enumeration is reproducible.

    Args:
        r_min_nm, r_max_nm: shell radii in nm.
        nv_axis: defect axis used to locate the nitrogen site.
        site_cap: raise BathSizeError if the shell would contain more
            sites than this.

    Returns:
        (N, 3) array of positions in nm.
    """
    if not (0.0 < r_min_nm < r_max_nm):
        raise ValueError("need 0 < r_min < r_max")
    a0 = constants.LATTICE_CONSTANT_NM
    est = constants.SITE_DENSITY_NM3 * (4.0 * np.pi / 3.0) * r_max_nm**3
    if est > site_cap:
        raise BathSizeError(
            f"estimated {est:.3g} sites exceeds cap {site_cap}; "
            "raise site_cap or shrink r_max"
        )
    if nv_axis is None:
        nv_axis = constants.NV_AXIS_DEFAULT
    nv_axis = _unit(nv_axis, "nv_axis")

    ncell = int(np.ceil(r_max_nm / a0)) + 1
    cells = np.arange(-ncell, ncell + 1)
    # FCC translations plus the two-atom basis: 8 sites per conventional cell.
    fcc = np.array([[0, 0, 0], [0, 0.5, 0.5], [0.5, 0, 0.5], [0.5, 0.5, 0]])
    basis = np.array([[0, 0, 0], [0.25, 0.25, 0.25]])
    offsets = (fcc[:, None, :] + basis[None, :, :]).reshape(-1, 3)  # (8, 3)

    cx, cy, cz = np.meshgrid(cells, cells, cells, indexing="ij")
    corners = np.stack([cx, cy, cz], axis=-1).reshape(-1, 3).astype(float)
    pos = (corners[:, None, :] + offsets[None, :, :]).reshape(-1, 3) * a0

    r = np.linalg.norm(pos, axis=1)
    keep = (r >= r_min_nm) & (r <= r_max_nm)

    # Nitrogen site: nearest neighbor along the defect axis.
    nitrogen = (a0 * np.sqrt(3.0) / 4.0) * nv_axis
    keep &= np.linalg.norm(pos - nitrogen, axis=1) > 1e-9
    return pos[keep]


def sample_occupation(sites: NDArray[np.float64], abundance: float, seed) -> NDArray[np.float64]:
    """Occupy each site independently with probability ``abundance``.

    ``seed`` may be an integer or a numpy SeedSequence; identical seeds
    give identical occupations.
    """
    if not (0.0 < abundance <= 1.0):
        raise ValueError(f"abundance must be in (0, 1], got {abundance}")
    rng = np.random.default_rng(seed)
    mask = rng.random(len(sites)) < abundance
    return sites[mask]


def hyperfine_vector(position_nm, nv_axis) -> NDArray[np.float64]:
    """Secular point-dipole hyperfine vector, rad/s.

    A(r) = d(r) * [z_nv - 3 (z_nv . r_hat) r_hat] with
    d(r) = (mu0/4pi) gamma_e gamma_n hbar / r^3;  |A| ~ r^-3.
    """
    pos = np.atleast_2d(np.asarray(position_nm, dtype=float))
    z = _unit(nv_axis, "nv_axis")
    r = np.linalg.norm(pos, axis=1)
    if np.any(r == 0.0):
        raise ValueError("hyperfine vector undefined at zero radius")
    rhat = pos / r[:, None]
    d = constants.DIPOLE_COEF_NM3 / r**3
    a = d[:, None] * (z[None, :] - 3.0 * (rhat @ z)[:, None] * rhat)
    if np.asarray(position_nm).ndim == 1:
        return a[0]
    return a


def realization_seed(base_seed: int, realization: int) -> np.random.SeedSequence:
    """Independent stream for realization ``i`` of a sweep."""
    return np.random.SeedSequence(entropy=int(base_seed), spawn_key=(int(realization),))


def build_bath(
    config: BathConfig,
    p: float = 0.0,
    m_dir=None,
    realization: int = 0,
    sites: NDArray[np.float64] | None = None,
) -> BathRealization:
    """Build one random bath realization.

    Every occupied site gets omega0 n0 = gamma_n B and
    omega1 n1 = gamma_n B + A(site).  Polarization is shared: all nuclei
    carry degree ``p`` along ``m_dir`` (default: the field direction).
    Pass ``sites`` to reuse a previously enumerated shell.
    """
    if abs(p) > 1.0:
        raise ValueError("polarization degree must satisfy |p| <= 1")
    nv = config.nv_axis_vec
    if sites is None:
        sites = enumerate_lattice_sites(
            config.r_min_nm, config.r_max_nm, nv, config.site_cap
        )
    occupied = sample_occupation(
        sites, config.abundance, realization_seed(config.seed, realization)
    )

    b_vec = config.b_gauss * config.b_direction_vec
    omega0_vec = constants.GAMMA_N_C13 * b_vec
    omega0 = float(np.linalg.norm(omega0_vec))
    n0 = omega0_vec / omega0
    m = n0.copy() if m_dir is None else _unit(m_dir, "m_dir")

    couplings = []
    if len(occupied):
        a_all = hyperfine_vector(occupied, nv)
        v1 = omega0_vec[None, :] + a_all
        w1 = np.linalg.norm(v1, axis=1)
        n1 = v1 / w1[:, None]
        for i in range(len(occupied)):
            couplings.append(
                NucleusCoupling(
                    position_nm=occupied[i],
                    a_vec=a_all[i],
                    omega0=omega0,
                    n0=n0,
                    omega1=float(w1[i]),
                    n1=n1[i],
                    p=float(p),
                    m_dir=m,
                )
            )
    return BathRealization(config=config, couplings=couplings, realization=realization)


# ---------------------------------------------------------------------------
# Serialization: structured text for replay and cross-language checks
# ---------------------------------------------------------------------------

def save_bath(bath: BathRealization, path) -> None:
    """Write a bath realization to a structured text file."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# echoq bath v1\n")
        fh.write(f"# config: {json.dumps(bath.config.to_dict(), sort_keys=True)}\n")
        fh.write(f"# realization: {bath.realization}\n")
        fh.write("x_nm,y_nm,z_nm,Ax_rads,Ay_rads,Az_rads,P,mx,my,mz\n")
        for c in bath.couplings:
            row = np.concatenate([c.position_nm, c.a_vec, [c.p], c.m_dir])
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def load_bath(path) -> BathRealization:
    """Read a bath realization written by :func:`save_bath`."""
    config = None
    realization = 0
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line.startswith("# config:"):
                config = BathConfig.from_dict(json.loads(line.split(":", 1)[1]))
            elif line.startswith("# realization:"):
                realization = int(line.split(":", 1)[1])
            elif not line or line.startswith("#") or line.startswith("x_nm"):
                continue
            else:
                rows.append([float(v) for v in line.split(",")])
    if config is None:
        raise ValueError(f"{path}: missing config header line")

    b_vec = config.b_gauss * config.b_direction_vec
    omega0_vec = constants.GAMMA_N_C13 * b_vec
    omega0 = float(np.linalg.norm(omega0_vec))
    n0 = omega0_vec / omega0
    couplings = []
    for row in rows:
        pos = np.array(row[0:3])
        a = np.array(row[3:6])
        v1 = omega0_vec + a
        w1 = float(np.linalg.norm(v1))
        couplings.append(
            NucleusCoupling(
                position_nm=pos,
                a_vec=a,
                omega0=omega0,
                n0=n0,
                omega1=w1,
                n1=v1 / w1,
                p=row[6],
                m_dir=np.array(row[7:10]),
            )
        )
    return BathRealization(config=config, couplings=couplings, realization=realization)
