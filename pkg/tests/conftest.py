import numpy as np
import pytest

from secrecy_lab.infotheory import Channel, DistortionMeasure, Pmf
from secrecy_lab.regions import SchemeIISpec, SchemeISpec, SchemeOSpec


def random_rows(rng, n_rows, k, floor=0.0):
    rows = rng.dirichlet(np.ones(k), size=n_rows)
    return rows * (1 - floor * k) + floor


def random_bc(rng, nx=2, ny=2, nz=2):
    return Channel(random_rows(rng, nx, ny * nz), output_shape=(ny, nz))


def random_scheme_i(rng, ns=2, nu=2, nx=2, floor=0.0):
    return SchemeISpec(
        p_s=Pmf(random_rows(rng, 1, ns, floor)[0]),
        p_u_given_s=Channel(random_rows(rng, ns, nu, floor)),
        p_x_given_su=Channel(random_rows(rng, ns * nu, nx, floor)),
        p_yz_given_x=random_bc(rng, nx),
        phi=rng.integers(0, ns, size=(nu, 2)),
        dist=DistortionMeasure.hamming(ns),
    )


def random_scheme_ii(rng, ns=2, nv=2, nu=2, nx=2):
    return SchemeIISpec(
        p_s=Pmf(random_rows(rng, 1, ns)[0]),
        p_v_given_s=Channel(random_rows(rng, ns, nv)),
        p_u_given_v=Channel(random_rows(rng, nv, nu)),
        p_x_given_suv=Channel(random_rows(rng, ns * nu * nv, nx)),
        p_yz_given_x=random_bc(rng, nx),
        phi=rng.integers(0, ns, size=(nv, 2)),
        dist=DistortionMeasure(rng.random((ns, ns))),
    )


def random_scheme_o(rng, ns=2, n1=2, n2=2, nv2=2, nx=2):
    return SchemeOSpec(
        p_s=Pmf(random_rows(rng, 1, ns)[0]),
        p_shat_given_s=Channel(random_rows(rng, ns, ns)),
        p_u1_given_shat=Channel(random_rows(rng, ns, n1)),
        p_u2=Pmf(random_rows(rng, 1, n2)[0]),
        p_v2_given_u2=Channel(random_rows(rng, n2, nv2)),
        p_x_given_v2=Channel(random_rows(rng, nv2, nx)),
        p_yz_given_x=random_bc(rng, nx),
        dist=DistortionMeasure.hamming(ns),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
