"""Acceptance criteria.  Each test prints one ``[PASS]``/``[FAIL]`` line."""
import numpy as np
import pytest

from tpgkin import suites

ENERGY_KINDS = ("rotational-linear", "harmonic-vibrational", "tabulated")


@pytest.fixture
def emit(capsys):
    def _emit(label, checks):
        ok = all(c.passed for c in checks)
        worst = [c for c in checks if not c.passed] or checks
        detail = "; ".join(f"{c.name}={c.value:.3g}" for c in worst[:4])
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        return ok
    return _emit


@pytest.fixture(scope="module")
def relax_checks():
    return suites.conservation_and_entropy(models=("bgk", "fp"),
                                           kinds=ENERGY_KINDS + ("rot-vib",),
                                           n_steps=1000, cons_tol=1e-11, h_tol=1e-12)


def test_criterion_01_appendix_a(emit):
    checks = suites.appendix_a(n=32, span=6.0, tol=1e-6)
    assert emit("criterion 1 Gaussian quadrature identities, span 6, n 32, tol 1e-6", checks)


def test_criterion_01_wider_span_informational(emit):
    checks = suites.appendix_a(n=32, span=8.0, tol=1e-6)
    assert emit("criterion 1 (informational) same identities at span 8, n 32", checks)


def test_criterion_02_conservation(emit, relax_checks):
    checks = [c for c in relax_checks if c.name.startswith("conservation")
              and not c.name.endswith("rot-vib")]
    assert len(checks) == 6
    assert emit("criterion 2 conservation, 1000 steps, drift <= 1e-11", checks)


def test_criterion_03_h_theorem(emit, relax_checks):
    checks = [c for c in relax_checks if c.name.startswith("H non-increasing")]
    assert len(checks) == 8
    assert emit("criterion 3 H non-increasing every step (+1e-12), incl. rot+vib", checks)


def test_criterion_04_equilibrium(emit):
    checks = suites.equilibrium_checks(kinds=ENERGY_KINDS, tol=1e-10, n_steps=100)
    assert emit("criterion 4 equilibrium residual and fixed point <= 1e-10", checks)


def test_criterion_05_bgk_analytic(emit):
    checks = suites.bgk_analytic(tol=1e-10)
    assert len(checks) == 5
    assert emit("criterion 5 BGK analytic relaxation <= 1e-10", checks)


def test_criterion_06_entropy_algebra(emit):
    checks = suites.entropy_algebra(n_states=100, tol=1e-12)
    assert emit("criterion 6 Hessian identities, determinant, definiteness", checks)


@pytest.fixture(scope="module")
def eigen_checks():
    return suites.fp_eigen(ns=(24, 32, 48), span=6.0, min_order=1.9)


def test_criterion_07_fp_eigenrelations(emit, eigen_checks):
    checks = [c for c in eigen_checks if not c.name.startswith("closure")]
    checks += [c for c in eigen_checks if c.name.startswith("closure a=-1/3 b=+0.5")]
    assert emit("criterion 7 FP eigenrelations and a=-1/3, b=1/2 closure, order >= 1.9",
                checks)


def test_criterion_07_consistent_closure_informational(emit, eigen_checks):
    checks = [c for c in eigen_checks if c.name.startswith("closure a=-1/3 b=-0.5")]
    assert emit("criterion 7 (informational) closure with b=-1/2, order >= 1.9", checks)


@pytest.mark.slow
def test_criterion_08_transport_coefficients(emit):
    checks, _ = suites.transport_coefficients(kn=0.005, n_cells=100, n_v=32)
    assert emit("criterion 8 mu_eff, Pr_eff (BGK, FP) and alpha formula", checks)


@pytest.mark.slow
def test_criterion_09_euler_limit(emit):
    checks, errs = suites.euler_limit(kns=(0.05, 0.01, 0.002), n_cells=200)
    assert np.all(np.isfinite(errs))
    assert emit("criterion 9 Sod L1(rho) decreasing in Kn; oracle p* to 1e-6", checks)


def test_criterion_10_vibrational_entropy(emit):
    checks = suites.vib_closed_form(n_states=100, tol=1e-12)
    assert emit("criterion 10 vibrational closed-form entropy <= 1e-12", checks)
