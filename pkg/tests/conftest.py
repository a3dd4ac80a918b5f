"""Shared fixtures: potentials and the solved pipeline pieces they feed.

Session scope keeps the expensive objects (ball solutions, certificates,
autocorrelation splines) solved once across the whole run.
"""

import json

import numpy as np
import pytest

from boundcert.certifier import build_h, build_trial_profile, search_certificate
from boundcert.potential import barrier, gaussian, square_well, sum_of_gaussians, tabulated
from boundcert.scattering import find_negative_b_radius, limit_a


@pytest.fixture(scope="session")
def well4():
    return square_well(4.0, 1.0)


@pytest.fixture(scope="session")
def well_half():
    return square_well(0.5, 1.0)


@pytest.fixture(scope="session")
def barrier2():
    return barrier(2.0, 1.0)


@pytest.fixture(scope="session")
def deep_well():
    return square_well(12.0, 1.0)


@pytest.fixture(scope="session")
def gauss1():
    return gaussian(1.0, 1.0)


@pytest.fixture(scope="session")
def mix_sg():
    return sum_of_gaussians([(1.0, 0.7), (-0.4, 1.2)])


@pytest.fixture(scope="session")
def tab_gauss():
    r = np.linspace(0.0, 4.0, 600)
    return tabulated(r, -1.2 * np.exp(-0.5 * r**2))


@pytest.fixture(scope="session")
def suite_potentials(well4, well_half, barrier2, gauss1, mix_sg):
    """The five-potential suite used by the schedule-wide property tests."""
    return {
        "well4": well4,
        "well_half": well_half,
        "barrier2": barrier2,
        "gauss1": gauss1,
        "mix_sg": mix_sg,
    }


@pytest.fixture(scope="session")
def scat_well4(well4):
    return limit_a(well4)


@pytest.fixture(scope="session")
def pipeline_well4(well4, scat_well4):
    """(R, sol, hprof, profile) for the canonical attractive well."""
    R, sol = find_negative_b_radius(well4, a=scat_well4.a)
    profile = build_trial_profile("cos2_bump")
    hprof = build_h(sol, well4)
    return R, sol, hprof, profile


@pytest.fixture(scope="session")
def certificate_well4(well4):
    return search_certificate(well4)


@pytest.fixture()
def write_potential(tmp_path):
    def _write(v, name="potential.json"):
        path = tmp_path / name
        path.write_text(json.dumps(v.to_dict()))
        return str(path)

    return _write
