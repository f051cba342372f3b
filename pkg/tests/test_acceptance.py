"""Acceptance gate: one test per criterion, one PASS/FAIL line each.

Criteria 7-9 are marked slow (minutes-to-hour scale on a workstation); run
them with ``pytest --run-slow``.  Every tolerance is pinned here.
"""

import math
import time

import numpy as np
import pytest

from conftest import angular_overlap_quad, radial_overlap_quad
from gcmlab.basis import (BasisSpec, BasisState, QuantScheme, enumerate_basis,
                          oscillator_energy)
from gcmlab.classical import regular_fraction, sample_energy_shell, classify_batch
from gcmlab.density import density_at, density_grid
from gcmlab.eigensolver import solve, stability_prefix
from gcmlab.hamiltonian import (angular_element, assemble, assemble_m_block,
                                optimize_a_osc, radial_element)
from gcmlab.model import ModelParams
from gcmlab.spectral_stats import (UnfoldedSpacings, bias_study, brody_sample,
                                   fit_brody, omega_vs_energy)
from test_classical import lyapunov_class

_RESULTS = []


def _report(num, name, ok, detail=""):
    line = f"ACCEPTANCE {num:02d} [{'PASS' if ok else 'FAIL'}] {name}" + \
        (f" -- {detail}" if detail else "")
    _RESULTS.append(line)
    print("\n" + line, flush=True)
    assert ok, line


@pytest.fixture(scope="session", autouse=True)
def _summary():
    yield
    if _RESULTS:
        print("\n" + "=" * 72)
        for line in sorted(_RESULTS):
            print(line)
        print("=" * 72, flush=True)


FIG1 = ModelParams(A=-1.0, B=1.09, C=1.0, K=1.0, hbar=0.05)  # kappa = 25e-4


def test_criterion_01_matrix_element_oracle():
    """Table formulas and angular overlaps vs quadrature, n<=20, m<=10."""
    t0 = time.time()
    worst = 0.0
    checked = 0
    for scheme in (QuantScheme.TWO_D_EVEN, QuantScheme.FIVE_D):
        spec = BasisSpec(scheme, a_osc=1.7, K=1.3, hbar=0.8, dimension=10)
        for m in range(0, 11):
            for n in range(0, 21):
                ket = BasisState(n, m)
                for power, dns, dm in ((2, (0, 1), 0), (4, (0, 1, 2), 0),
                                       (3, (0, -1, -2, -3), 1)):
                    for dn in dns:
                        if n + dn < 0:
                            continue
                        bra = BasisState(n + dn, m + dm)
                        got = radial_element(power, bra, ket, spec)
                        want = radial_overlap_quad(spec, bra.n_rad, bra.m_ang,
                                                   ket.n_rad, ket.m_ang, power)
                        err = abs(got - want) / max(abs(want), 1e-12)
                        worst = max(worst, err)
                        checked += 1
                        assert err < 1e-8, (scheme, power, n, m, dn, got, want)
    for scheme in QuantScheme:
        lo = 1 if scheme is QuantScheme.TWO_D_ODD else 0
        for m in range(lo, 11):
            got = angular_element(scheme, m + 1, m)
            want = angular_overlap_quad(scheme, m + 1, m)
            err = abs(got - want)
            worst = max(worst, err)
            checked += 1
            assert err < 1e-8, (scheme, m)
    dt = time.time() - t0
    _report(1, "matrix-element oracle equivalence",
            dt < 60.0, f"{checked} elements, worst rel err {worst:.2e}, {dt:.1f}s")


def test_criterion_02_oscillator_limit():
    """B=C=0, A=A_osc: lowest 500 levels exact with multiplicities."""
    t0 = time.time()
    worst = 0.0
    for scheme in QuantScheme:
        spec = BasisSpec(scheme, a_osc=1.7, K=1.0, hbar=1.0, dimension=600)
        levels, _ = solve(assemble(ModelParams(A=1.7, B=0.0, C=0.0), spec))
        exact = np.sort([oscillator_energy(s, spec) for s in enumerate_basis(spec)])
        err = np.max(np.abs(levels[:500] - exact[:500]) / exact[:500])
        worst = max(worst, float(err))
        assert err < 1e-10, scheme
    dt = time.time() - t0
    _report(2, "oscillator limit exactness",
            dt < 60.0, f"worst rel err {worst:.2e}, {dt:.1f}s")


def test_criterion_03_dense_oracle():
    """Banded pipeline vs quadrature-built dense Hamiltonian, dim 50."""
    t0 = time.time()
    params = ModelParams(A=-1.0, B=1.09, C=1.0)
    worst = 0.0
    for scheme in QuantScheme:
        spec = BasisSpec(scheme, a_osc=1.2, K=1.0, hbar=1.0, dimension=50)
        states = enumerate_basis(spec)
        n = len(states)
        dense = np.zeros((n, n))
        for i, bra in enumerate(states):
            for j, ket in enumerate(states[: i + 1]):
                val = 0.0
                if bra.m_ang == ket.m_ang:
                    val += (params.A - spec.a_osc) * radial_overlap_quad(
                        spec, bra.n_rad, bra.m_ang, ket.n_rad, ket.m_ang, 2)
                    val += params.C * radial_overlap_quad(
                        spec, bra.n_rad, bra.m_ang, ket.n_rad, ket.m_ang, 4)
                if abs(bra.m_ang - ket.m_ang) == 1:
                    val += params.B * angular_overlap_quad(scheme, bra.m_ang, ket.m_ang) \
                        * radial_overlap_quad(spec, bra.n_rad, bra.m_ang,
                                              ket.n_rad, ket.m_ang, 3)
                if i == j:
                    val += oscillator_energy(ket, spec)
                dense[i, j] = dense[j, i] = val
    # independent route: dense symmetric eigensolver on the quadrature matrix
        lam_dense = np.linalg.eigvalsh(dense)
        lam_band, _ = solve(assemble(params, spec))
        err = np.max(np.abs(lam_band - lam_dense) / np.maximum(np.abs(lam_dense), 1.0))
        worst = max(worst, float(err))
        assert err < 1e-8, scheme
    dt = time.time() - t0
    _report(3, "dense-oracle equivalence (dim 50, all schemes)",
            dt < 300.0, f"worst eigenvalue err {worst:.2e}, {dt:.1f}s")


def test_criterion_04_brody_calibration():
    """Fitter recovery at 1e4 samples; bias study windows at bin 1000."""
    t0 = time.time()
    recovery = []
    for w_true, seed in ((0.0, 101), (0.5, 102), (1.0, 103)):
        s = brody_sample(w_true, 10_000, seed=seed)
        fit = fit_brody(UnfoldedSpacings(s / s.mean()))
        recovery.append((w_true, fit.omega))
        assert abs(fit.omega - w_true) <= 0.05, (w_true, fit.omega)
    row = bias_study(1000, omegas=(0.5,), trials=500, seed=1)[0]
    dt = time.time() - t0
    stat_ok = 0.04 <= row["std_omega"] <= 0.10
    syst_ok = -0.12 <= row["bias"] <= -0.04
    detail = (f"recovery {['%.3f' % w for _, w in recovery]}, "
              f"bias {row['bias']:+.4f} (window [-0.12,-0.04]), "
              f"std {row['std_omega']:.4f} (window [0.04,0.10]), {dt:.1f}s")
    ok = dt < 600.0 and stat_ok and syst_ok
    # the linearized-CDF fitter defined by this artifact is nearly unbiased;
    # the quoted systematic offset is not reproducible together with the
    # recovery and synthetic-curve criteria (see decisions ledger)
    _report(4, "Brody fitter calibration", ok, detail)


def test_criterion_05_synthetic_curves():
    """Poisson and Wigner synthetic spectra: flat curves inside the bands."""
    t0 = time.time()
    rng = np.random.default_rng(3000)
    poisson_levels = np.cumsum(rng.exponential(1.0, 10_000)) ** (2.0 / 3.0)
    wigner_levels = np.cumsum(brody_sample(1.0, 10_000, seed=3000))
    cp = omega_vs_energy(poisson_levels, bin_size=3000, shift=300)
    cw = omega_vs_energy(wigner_levels, bin_size=3000, shift=300)
    op, ow = cp.omegas(), cw.omegas()
    dt = time.time() - t0
    ok = (np.isfinite(op).all() and np.isfinite(ow).all()
          and op.min() >= -0.1 and op.max() <= 0.15
          and ow.min() >= 0.85 and ow.max() <= 1.1 and dt < 300.0)
    _report(5, "Poisson/Wigner synthetic curves",
            ok, f"poisson [{op.min():+.3f},{op.max():+.3f}] in [-0.1,0.15], "
                f"wigner [{ow.min():.3f},{ow.max():.3f}] in [0.85,1.1], {dt:.1f}s")


def test_criterion_06_integrable_quantum_limit():
    """B=0, kappa=25e-4: merged m-block spectra give omega < 0.15 everywhere."""
    t0 = time.time()
    params = ModelParams(A=-1.0, B=0.0, C=1.0, K=1.0, hbar=0.05)
    spec = BasisSpec(QuantScheme.TWO_D_EVEN, a_osc=1.0, K=1.0, hbar=0.05,
                     dimension=12000)
    a = optimize_a_osc(params, spec)
    spec = spec.with_a_osc(a)
    n_count, grow = 700, 1000
    merged = []
    ceilings = []
    for m in range(0, 120):
        base, _ = solve(assemble_m_block(params, spec, m, n_count))
        big, _ = solve(assemble_m_block(params, spec, m, grow))
        good = stability_prefix(base, big)
        if good == 0 or base[0] > 20.0:
            break
        merged.append(base[:good])
        ceilings.append(base[good - 1])
    e_complete = min(ceilings)
    levels = np.sort(np.concatenate(merged))
    levels = levels[levels <= e_complete]
    assert len(levels) >= 5000, f"only {len(levels)} complete merged levels"
    curve = omega_vs_energy(levels[:5000], bin_size=1000, shift=100)
    om = curve.omegas()
    dt = time.time() - t0
    ok = np.isfinite(om).all() and om.max() < 0.15 and dt < 1800.0
    _report(6, "B=0 integrable quantum check",
            ok, f"{len(levels)} levels, max omega {om.max():+.3f} < 0.15, {dt:.1f}s")


def _converged_curve(params, scheme, dim, bin_size, shift, a_osc=None,
                     n_levels=None):
    spec = BasisSpec(scheme, a_osc=1.0, K=params.K, hbar=params.hbar,
                     dimension=dim)
    spec = spec.with_a_osc(a_osc if a_osc else optimize_a_osc(params, spec))
    base, _ = solve(assemble(params, spec))
    big, _ = solve(assemble(params, spec.with_dimension(int(dim * 1.5))))
    good = stability_prefix(base, big)
    levels = base[:good]
    if n_levels:
        levels = levels[:n_levels]
    return omega_vs_energy(levels, bin_size=bin_size, shift=shift), good


@pytest.mark.slow
def test_criterion_07_quantization_independence():
    """Three schemes at kappa=25e-4: omega(E) curves agree within 0.15."""
    t0 = time.time()
    curves = {}
    counts = {}
    for scheme in QuantScheme:
        curves[scheme], counts[scheme] = _converged_curve(
            FIG1, scheme, dim=9000, bin_size=1500, shift=150, n_levels=3000)
    assert all(c >= 3000 for c in counts.values()), counts
    worst = 0.0
    for s1 in QuantScheme:
        for s2 in QuantScheme:
            if s1.value >= s2.value:
                continue
            c1, c2 = curves[s1], curves[s2]
            e1, o1 = c1.centroids(), c1.omegas()
            e2, o2 = c2.centroids(), c2.omegas()
            lo, hi = max(e1.min(), e2.min()), min(e1.max(), e2.max())
            for e, o in zip(e1, o1):
                if lo <= e <= hi:
                    j = int(np.argmin(np.abs(e2 - e)))
                    worst = max(worst, abs(o - o2[j]))
    dt = time.time() - t0
    ok = worst <= 0.15 and np.isfinite(worst)
    _report(7, "quantization independence (desk scale)",
            ok, f"max |d omega| {worst:.3f} <= 0.15, converged {counts}, {dt:.0f}s")


@pytest.mark.slow
def test_criterion_08_classical_quantum_correspondence():
    """B=0.62: f_reg(E) and 1-omega(E) share structure, Pearson > 0.6."""
    t0 = time.time()
    params = ModelParams(A=-1.0, B=0.62, C=1.0, K=1.0, hbar=0.025)
    curve, good = _converged_curve(params, QuantScheme.TWO_D_EVEN, dim=7000,
                                   bin_size=800, shift=80)
    cen, om = curve.centroids(), curve.omegas()
    window = (cen >= -0.2) & (cen <= 2.0)
    cen, om = cen[window], om[window]
    assert len(cen) >= 8, f"only {len(cen)} quantum bins in the window"

    energies = np.linspace(-0.2, 2.0, 23)
    freg, sig = [], []
    for i, e in enumerate(energies):
        pt = regular_fraction(params, float(e), 240, seed=900 + i)
        freg.append(pt.f_reg)
        sig.append(pt.sigma)
    freg = np.array(freg)

    adj = 1.0 - om
    f_at_bins = np.interp(cen, energies, freg)
    r = float(np.corrcoef(adj, f_at_bins)[0, 1])

    # principal minimum (regularity breakdown) and the principal maximum
    # after it (the island) must coincide within one bin's energy span;
    # centroids step by `shift` levels, so one bin spans bin_size/shift steps
    bin_width = float(np.median(np.diff(cen))) * (800 / 80)
    e_min_f = energies[np.argmin(freg)]
    e_min_w = cen[np.argmin(adj)]
    after_f = energies >= e_min_f
    after_w = cen >= e_min_w
    e_max_f = energies[after_f][np.argmax(freg[after_f])]
    e_max_w = cen[after_w][np.argmax(adj[after_w])]
    d_min, d_max = abs(e_min_f - e_min_w), abs(e_max_f - e_max_w)
    dt = time.time() - t0
    ok = r > 0.6 and d_min <= bin_width and d_max <= bin_width
    _report(8, "classical-quantum correspondence at B=0.62",
            ok, f"pearson {r:.3f} > 0.6, min-pos gap {d_min:.3f}, "
                f"max-pos gap {d_max:.3f} <= bin width {bin_width:.3f}, {dt:.0f}s")


@pytest.mark.slow
def test_criterion_09_classical_integrity():
    """Integrable limit purity, drift bound, SALI vs Lyapunov agreement."""
    t0 = time.time()
    params0 = ModelParams(A=-1.0, B=0.0, C=1.0)
    all_regular = True
    for i, e in enumerate((-0.2, 0.0, 0.5)):
        pt = regular_fraction(params0, e, 500, seed=40 + i)
        all_regular &= (pt.f_reg == 1.0 and pt.n_chaotic == 0
                        and pt.n_undecided == 0)
    params1 = ModelParams(A=-1.0, B=1.09, C=1.0)
    pts = sample_energy_shell(params1, 0.0, 200, seed=777)
    res = classify_batch(pts, params1, t_max=10_000.0)
    drift_ok = all(r.energy_drift < 1e-9 for r in res
                   if r.classification != "undecided")
    agree = sum(1 for p, r in zip(pts, res)
                if r.classification == lyapunov_class(p, params1))
    frac = agree / len(pts)
    dt = time.time() - t0
    ok = all_regular and drift_ok and frac >= 0.95 and dt < 3600.0
    _report(9, "classical integrity suite",
            ok, f"B=0 all-regular {all_regular}, drift_ok {drift_ok}, "
                f"SALI/Lyapunov agreement {frac:.3f} >= 0.95, {dt:.0f}s")


def test_criterion_10_figure_structure():
    """5D ground-state density: zero rays, two maxima per well, symmetry."""
    t0 = time.time()
    spec = BasisSpec(QuantScheme.FIVE_D, a_osc=1.0, K=1.0, hbar=0.05,
                     dimension=3000)
    spec = spec.with_a_osc(optimize_a_osc(FIG1, spec))
    levels, vecs = solve(assemble(FIG1, spec), want_vectors=True,
                         vector_range=(0, 0))
    vec = vecs.vectors[:, 0]
    e0 = float(levels[0])

    beta_well = 1.2255  # deformed minimum radius of the Fig-1 potential
    peak = density_at(vec, spec, beta_well * math.cos(math.pi / 3),
                      beta_well * math.sin(math.pi / 3) + 0.05)
    zero_rays = all(
        density_at(vec, spec, b * math.cos(g), b * math.sin(g)) < 1e-12 * max(peak, 1e-3)
        for g in (0.0, math.pi / 3, 2 * math.pi / 3) for b in (0.6, 1.2255, 1.6))

    gs = np.linspace(0.02, 2 * math.pi / 3 - 0.02, 301)
    arc = density_at(vec, spec, beta_well * np.cos(gs), beta_well * np.sin(gs))
    interior = (arc[1:-1] > arc[:-2]) & (arc[1:-1] > arc[2:])
    n_maxima = int(interior.sum())

    rng = np.random.default_rng(8)
    sym_worst = 0.0
    for scheme in QuantScheme:
        sspec = BasisSpec(scheme, a_osc=spec.a_osc, K=1.0, hbar=0.05,
                          dimension=1500)
        lv, vv = solve(assemble(FIG1, sspec), want_vectors=True, vector_range=(2, 2))
        v = vv.vectors[:, 0]
        scale = density_at(v, sspec, 1.0, 0.4)
        for _ in range(10):
            x, y = rng.uniform(-1.3, 1.3, 2)
            c, s = math.cos(2 * math.pi / 3), math.sin(2 * math.pi / 3)
            d1 = density_at(v, sspec, x, y)
            d2 = density_at(v, sspec, c * x - s * y, s * x + c * y)
            sym_worst = max(sym_worst, abs(d1 - d2) / max(scale, 1e-12))
    grid = density_grid(vec, spec, FIG1, energy=e0, n_points=221)
    norm = grid.norm()
    dt = time.time() - t0
    ok = (zero_rays and n_maxima == 2 and sym_worst < 1e-10
          and 0.98 < norm < 1.02 and dt < 600.0)
    _report(10, "structural figure checks (5D ground state)",
            ok, f"zero rays {zero_rays}, maxima/well {n_maxima}, "
                f"symmetry dev {sym_worst:.1e} < 1e-10, norm {norm:.4f}, {dt:.1f}s")


def test_criterion_11_band_variational_structure():
    """Bandwidth bound and Cauchy interlacing on nested dims 100/200/400."""
    t0 = time.time()
    ok = True
    for params in (ModelParams(-1, 1.09, 1, hbar=0.5),
                   ModelParams(-1, 0.62, 1, hbar=0.5),
                   ModelParams(1, 0.3, 1, hbar=0.5)):
        prev = None
        for dim in (100, 200, 400):
            spec = BasisSpec(QuantScheme.TWO_D_EVEN, a_osc=1.0, K=1.0,
                             hbar=0.5, dimension=dim)
            mat = assemble(params, spec)
            n_r = max(s.n_rad for s in enumerate_basis(spec))
            ok &= mat.half_bandwidth <= 2 * n_r + 8
            levels, _ = solve(mat)
            if prev is not None:
                ok &= bool(np.all(levels[: len(prev)] <= prev + 1e-10))
            prev = levels
    dt = time.time() - t0
    ok = ok and dt < 120.0
    _report(11, "band/variational structure", ok, f"{dt:.1f}s")
