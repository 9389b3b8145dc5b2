"""Shared fixtures and the acceptance summary hook."""

import numpy as np
import pytest

from echoq.bath import NucleusCoupling


def make_coupling(
    omega0=1.0,
    omega1_ratio=6.0,
    cross2=0.5,
    p=0.0,
    m_dir=None,
    n0=None,
):
    """Synthetic coupling with prescribed geometry.

    n0 defaults to z; n1 lies in the xz-plane with |n0 x n1|^2 = cross2.
    """
    n0 = np.array([0.0, 0.0, 1.0]) if n0 is None else np.asarray(n0, float)
    sin_t = np.sqrt(cross2)
    cos_t = np.sqrt(1.0 - cross2)
    # orthonormal frame adapted to n0
    ref = np.array([1.0, 0.0, 0.0])
    if abs(n0 @ ref) > 0.9:
        ref = np.array([0.0, 1.0, 0.0])
    e1 = ref - (ref @ n0) * n0
    e1 /= np.linalg.norm(e1)
    n1 = cos_t * n0 + sin_t * e1
    omega1 = omega1_ratio * omega0
    m = n0.copy() if m_dir is None else np.asarray(m_dir, float)
    m = m / np.linalg.norm(m)
    return NucleusCoupling(
        position_nm=np.zeros(3),
        a_vec=omega1 * n1 - omega0 * n0,
        omega0=float(omega0),
        n0=n0,
        omega1=float(omega1),
        n1=n1,
        p=float(p),
        m_dir=m,
    )


def random_coupling(rng, p=None, m_parallel=True, omega0=None, n0=None):
    """Random geometry draw for oracle sweeps.

    Pass shared ``omega0`` and ``n0`` when assembling multi-nucleus baths
    (the bare precession is common to the whole bath by construction).
    """
    def unit():
        v = rng.normal(size=3)
        return v / np.linalg.norm(v)

    n0 = unit() if n0 is None else np.asarray(n0, float)
    n1 = unit()
    omega0 = rng.uniform(0.05, 10.0) if omega0 is None else float(omega0)
    omega1 = rng.uniform(0.05, 10.0)
    if p is None:
        p = rng.uniform(-1.0, 1.0)
    if m_parallel:
        m = n0 * rng.choice([-1.0, 1.0])
    else:
        m = unit()
    return NucleusCoupling(
        position_nm=np.zeros(3),
        a_vec=omega1 * n1 - omega0 * n0,
        omega0=omega0,
        n0=n0,
        omega1=omega1,
        n1=n1,
        p=float(p),
        m_dir=m,
    )


@pytest.fixture(scope="session")
def default_sites():
    """Hollow-sphere lattice shell shared by the slower tests."""
    from echoq.bath import enumerate_lattice_sites

    return enumerate_lattice_sites(0.65, 5.5)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion."""
    rows = []
    for status in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(status, []):
            if "test_acceptance" not in getattr(rep, "nodeid", ""):
                continue
            if getattr(rep, "when", "call") not in ("call", "setup"):
                continue
            name = rep.nodeid.split("::")[-1]
            rows.append((name, "PASS" if status == "passed" else "FAIL"))
    if rows:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, status in rows:
            terminalreporter.write_line(f"ACCEPTANCE {status}: {name}")
