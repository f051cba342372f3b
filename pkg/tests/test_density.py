import math

import numpy as np
import pytest

from gcmlab.basis import BasisSpec, QuantScheme, enumerate_basis
from gcmlab.density import boundary_polylines, density_at, density_grid
from gcmlab.eigensolver import solve
from gcmlab.hamiltonian import assemble
from gcmlab.model import ModelParams


def test_pure_oscillator_ground_state_closed_form():
    # 2D-even oscillator ground state: rho(x, y) = (k/pi) exp(-k beta^2)
    spec = BasisSpec(QuantScheme.TWO_D_EVEN, a_osc=1.5, K=1.0, hbar=1.0,
                     dimension=30)
    params = ModelParams(A=1.5, B=0.0, C=0.0)
    _, vecs = solve(assemble(params, spec), want_vectors=True, vector_range=(0, 0))
    vec = vecs.vectors[:, 0]
    k = spec.k
    rng = np.random.default_rng(0)
    pts = rng.uniform(-1.5, 1.5, (40, 2))
    rho = density_at(vec, spec, pts[:, 0], pts[:, 1])
    want = k / math.pi * np.exp(-k * (pts[:, 0] ** 2 + pts[:, 1] ** 2))
    np.testing.assert_allclose(rho, want, rtol=1e-10, atol=1e-14)
    # at hbar = 1 the Gaussian leaks past the classical turning surface, so
    # normalize on an explicit window instead of the accessible-region default
    grid = density_grid(vec, spec, params, energy=math.sqrt(3.0),
                        n_points=161, x_range=(-3.0, 3.0))
    assert 0.99 < grid.norm() < 1.01


def test_density_zero_rays():
    params = ModelParams(A=-1.0, B=1.09, C=1.0, hbar=0.5)
    for scheme, gammas in ((QuantScheme.FIVE_D, [0, math.pi / 3, 2 * math.pi / 3]),
                           (QuantScheme.TWO_D_ODD, [0.0, math.pi])):
        spec = BasisSpec(scheme, a_osc=1.0, K=1.0, hbar=0.5, dimension=120)
        _, vecs = solve(assemble(params, spec), want_vectors=True,
                        vector_range=(0, 0))
        vec = vecs.vectors[:, 0]
        peak = density_at(vec, spec, 0.7, 0.45)
        for g in gammas:
            for b in (0.3, 0.9, 1.4):
                x, y = b * math.cos(g), b * math.sin(g)
                # the ray angle itself rounds in atan2, so "exactly zero" means
                # machine zero relative to the density scale
                assert density_at(vec, spec, x, y) < 1e-14 * max(peak, 1.0)
        # on the positive x axis gamma evaluates to exactly 0
        assert density_at(vec, spec, 0.9, 0.0) == 0.0


def test_density_three_fold_symmetry_and_reflection():
    params = ModelParams(A=-1.0, B=1.09, C=1.0, hbar=0.4)
    rng = np.random.default_rng(5)
    for scheme in QuantScheme:
        spec = BasisSpec(scheme, a_osc=1.0, K=1.0, hbar=0.4, dimension=150)
        _, vecs = solve(assemble(params, spec), want_vectors=True,
                        vector_range=(3, 3))
        vec = vecs.vectors[:, 0]
        for _ in range(15):
            x, y = rng.uniform(-1.5, 1.5, 2)
            rho = density_at(vec, spec, x, y)
            c, s = math.cos(2 * math.pi / 3), math.sin(2 * math.pi / 3)
            rho_rot = density_at(vec, spec, c * x - s * y, s * x + c * y)
            assert rho_rot == pytest.approx(rho, rel=1e-10, abs=1e-13)
            rho_ref = density_at(vec, spec, x, -y)
            assert rho_ref == pytest.approx(rho, rel=1e-10, abs=1e-13)


def test_density_linearity_and_grid_symmetry():
    params = ModelParams(A=-1.0, B=0.62, C=1.0, hbar=0.5)
    spec = BasisSpec(QuantScheme.TWO_D_EVEN, a_osc=0.8, K=1.0, hbar=0.5,
                     dimension=100)
    levels, vecs = solve(assemble(params, spec), want_vectors=True,
                         vector_range=(2, 2))
    vec = vecs.vectors[:, 0]
    x, y = 0.43, -0.21
    assert density_at(3.0 * vec, spec, x, y) == pytest.approx(
        9.0 * density_at(vec, spec, x, y), rel=1e-12)

    grid = density_grid(vec, spec, params, energy=float(levels[2]),
                        level_index=2, n_points=121)
    assert np.all(grid.values >= 0)
    # interpolated grid keeps the 3-fold symmetry: rotate the grid indices
    # via direct evaluation comparison on a rotated point set
    xs, ys = np.meshgrid(grid.x[::10], grid.y[::10])
    c, s = math.cos(2 * math.pi / 3), math.sin(2 * math.pi / 3)
    r1 = density_at(vec, spec, xs.ravel(), ys.ravel())
    r2 = density_at(vec, spec, (c * xs - s * ys).ravel(), (s * xs + c * ys).ravel())
    np.testing.assert_allclose(r2, r1, rtol=1e-10, atol=1e-12)


def test_density_norm_converged_state():
    params = ModelParams(A=-1.0, B=1.09, C=1.0, hbar=0.5)
    for scheme in QuantScheme:
        spec = BasisSpec(scheme, a_osc=0.9, K=1.0, hbar=0.5, dimension=200)
        levels, vecs = solve(assemble(params, spec), want_vectors=True,
                             vector_range=(5, 5))
        grid = density_grid(vecs.vectors[:, 0], spec, params,
                            energy=float(levels[5]), level_index=5,
                            n_points=201)
        assert 0.98 < grid.norm() < 1.02, scheme


def test_density_decay_outside_accessible_region():
    # 1e-12 of peak at 1.5 x the accessible radius requires a semiclassical
    # state; measured decay: 4e-6 (hbar=0.4), 2e-10 (0.12), 6e-14 (0.07)
    params = ModelParams(A=-1.0, B=0.62, C=1.0, hbar=0.07)
    spec = BasisSpec(QuantScheme.TWO_D_EVEN, a_osc=0.8, K=1.0, hbar=0.07,
                     dimension=800)
    levels, vecs = solve(assemble(params, spec), want_vectors=True,
                         vector_range=(0, 0))
    vec = vecs.vectors[:, 0]
    e0 = float(levels[0])
    from gcmlab.model import accessible_boundary
    bmax = max(hi for g in np.linspace(0, 2 * math.pi / 3, 31)
               for _, hi in accessible_boundary(params, e0, g))
    peak = density_at(vec, spec, *max(
        ((b * math.cos(g), b * math.sin(g))
         for b in np.linspace(0, bmax, 20) for g in np.linspace(0, 2.1, 15)),
        key=lambda q: density_at(vec, spec, q[0], q[1])))
    far = density_at(vec, spec, 1.5 * bmax, 0.3)
    assert far < 1e-12 * peak


def test_boundary_polylines():
    params = ModelParams(A=-1.0, B=1.09, C=1.0)
    segs = boundary_polylines(params, -0.5)
    assert segs  # three disconnected wells below the saddle energy
    for seg in segs:
        for x, y in seg[:: max(1, len(seg) // 7)]:
            from gcmlab.model import potential_xy
            assert potential_xy(params, x, y) == pytest.approx(-0.5, abs=1e-6)
