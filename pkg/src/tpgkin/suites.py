"""Verification suites: each returns a list of :class:`Check` records."""
from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass

import numpy as np

from .chapman import (ChannelConfig, ExactRiemann, closure_residuals, convergence_order,
                      couette_viscosity, eigen_residuals, fourier_conductivity, predict)
from .collide_bgk import TauLaw, bgk_rhs, bgk_step_exact
from .collide_fp import fp_rhs, fp_step
from .config import relax_initial_state
from .entropy import H_total, hessian
from .state import equilibrium_state, moments
from .thermo import default_gas
from .transport import SpatialMesh, Solver
from .vgrid import appendix_a_suite, build_grid, integrate

log = logging.getLogger(__name__)

ENERGY_KINDS = ("rotational-linear", "harmonic-vibrational", "tabulated")


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str = ""

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.name}: {self.value:.4g} (tol {self.tolerance:.3g}) {self.detail}"

    def as_dict(self):
        return asdict(self)


# -- quadrature ----------------------------------------------------------------------


def appendix_a(n=32, span=6.0, tol=1e-6):
    t0 = time.perf_counter()
    grid = build_grid(n=n, span=span)
    rows = appendix_a_suite(grid)
    elapsed = time.perf_counter() - t0
    checks = [Check(f"n={n} span={span:g} {name}", err <= tol, err, tol)
              for name, _, _, err in rows]
    checks.append(Check(f"n={n} span={span:g} runtime [s]", elapsed < 5.0, elapsed, 5.0))
    return checks


# -- homogeneous relaxation ---------------------------------------------------------


def relax_run(model, kind, n_steps=1000, dt=0.05, tau=1.0, n=24, span=6.0, seed=7):
    """0D relaxation history: ``(rho, rho u, E, H)`` before and after every step."""
    gas = default_gas(kind)
    grid = build_grid(n=n, span=span)
    rng = np.random.default_rng(seed)
    st = relax_initial_state(gas, grid, 1.0, np.array([0.2, -0.1, 0.05]), 1.0, rng)
    step = bgk_step_exact if model == "bgk" else fp_step
    hist = []

    def record(s):
        m = moments(s, grid, gas)
        hist.append((float(m.rho), m.rho * m.u, float(m.E), float(H_total(s, grid, gas)[0])))

    record(st)
    for _ in range(n_steps):
        st = step(st, dt, tau, grid, gas)
        record(st)
    return hist


def conservation_and_entropy(models=("bgk", "fp"), kinds=ENERGY_KINDS + ("rot-vib",),
                             n_steps=1000, cons_tol=1e-11, h_tol=1e-12):
    checks = []
    for model in models:
        for kind in kinds:
            h = relax_run(model, kind, n_steps)
            r0, p0, E0, _ = h[0]
            drift_r = max(abs(r - r0) / r0 for r, _, _, _ in h)
            drift_p = max(float(np.max(np.abs(p - p0))) / r0 for _, p, _, _ in h)
            drift_E = max(abs(E - E0) / abs(E0) for _, _, E, _ in h)
            drift = max(drift_r, drift_p, drift_E)
            checks.append(Check(f"conservation {model}/{kind}", drift <= cons_tol, drift,
                                cons_tol, f"rho {drift_r:.2g} mom {drift_p:.2g} E {drift_E:.2g}"))
            inc = max(h[k + 1][3] - h[k][3] for k in range(len(h) - 1))
            checks.append(Check(f"H non-increasing {model}/{kind}", inc <= h_tol, inc, h_tol,
                                f"H {h[0][3]:.6g} -> {h[-1][3]:.6g}"))
    return checks


def equilibrium_checks(kinds=ENERGY_KINDS + ("rot-vib",), tol=1e-10, n_steps=100):
    checks = []
    grid = build_grid(n=24, span=6.0)
    for kind in kinds:
        gas = default_gas(kind)
        st0 = equilibrium_state(1.2, [0.1, 0.0, -0.2], 1.1, grid, gas)
        m = moments(st0, grid, gas)
        for model, rhs, step in (("bgk", bgk_rhs, bgk_step_exact), ("fp", fp_rhs, fp_step)):
            dF, dG = rhs(st0, m, 1.0, grid, gas)
            res = (float(integrate(grid, np.abs(dF))) + sum(float(integrate(grid, np.abs(g)))
                                                            for g in dG)) / float(m.rho)
            checks.append(Check(f"equilibrium rhs {model}/{kind}", res <= tol, res, tol))
            st = st0
            for _ in range(n_steps):
                st = step(st, 0.1, 1.0, grid, gas)
            diff = max(float(np.max(np.abs(a - b))) / float(np.max(b))
                       for a, b in zip(st.arrays(), st0.arrays()))
            checks.append(Check(f"equilibrium fixed point {model}/{kind}", diff <= tol, diff,
                                tol, f"{n_steps} steps"))
    return checks


def bgk_analytic(kind="rot-vib", tol=1e-10, times=(0.1, 0.3, 0.7, 1.5, 4.0), tau=0.5):
    gas = default_gas(kind)
    grid = build_grid(n=24, span=6.0)
    st0 = relax_initial_state(gas, grid, 1.0, np.zeros(3), 1.0)
    m = moments(st0, grid, gas)
    M = equilibrium_state(m.rho, m.u, m.T, grid, gas)
    checks = []
    st, t = st0, 0.0
    for ts in times:
        st = bgk_step_exact(st, ts - t, tau, grid, gas)
        t = ts
        decay = np.exp(-t / tau)
        err = 0.0
        for a, a0, eq in zip(st.arrays(), st0.arrays(), M.arrays()):
            ref = eq + (a0 - eq) * decay
            err = max(err, float(np.max(np.abs(a - ref))))
        checks.append(Check(f"BGK analytic relaxation t={ts:g}", err <= tol, err, tol))
    return checks


# -- entropy algebra --------------------------------------------------------------------


def entropy_algebra(n_states=100, tol=1e-12, seed=3):
    rng = np.random.default_rng(seed)
    gas = default_gas("rot-vib")
    models = gas.modes
    worst_id, worst_det, min_eig = 0.0, 0.0, np.inf
    for _ in range(n_states):
        F = rng.uniform(0.05, 3.0)
        T = rng.uniform(0.3, 4.0, size=2)
        G = [F * m.e_int(t) for m, t in zip(models, T)]
        Hs = hessian(F, G, models)
        id1 = F * Hs[0, 0] + G[0] * Hs[0, 1] + G[1] * Hs[0, 2] - 1.0
        id2 = [abs(F * Hs[0, i] + G[i - 1] * Hs[i, i]) / abs(F * Hs[0, i]) for i in (1, 2)]
        worst_id = max(worst_id, abs(id1), *id2)
        det = np.linalg.det(Hs)
        ref = Hs[1, 1] * Hs[2, 2] / F
        worst_det = max(worst_det, abs(det - ref) / abs(ref))
        min_eig = min(min_eig, float(np.min(np.linalg.eigvalsh(Hs))))
    return [Check("Hessian identities (relative)", worst_id <= tol, worst_id, tol),
            Check("Hessian determinant (relative)", worst_det <= tol, worst_det, tol),
            Check("Hessian min eigenvalue > 0", min_eig > 0, min_eig, 0.0)]


def vib_closed_form(n_states=100, tol=1e-12, seed=5):
    from .entropy import H_density
    rng = np.random.default_rng(seed)
    gas = default_gas("rot-vib")
    rot, vib = gas.modes
    RT0 = vib.R * vib.T0
    worst = 0.0
    for _ in range(n_states):
        F = rng.uniform(0.05, 3.0)
        Gr = F * rng.uniform(0.1, 5.0)
        Gv = F * rng.uniform(0.01, 5.0)
        generic = H_density(F, [Gr, Gv], gas.modes)
        closed = (F * np.log(F) + F * np.log(F / Gr)
                  + F * np.log(RT0 * F / (RT0 * F + Gv)) + Gv / RT0 * np.log(Gv / (RT0 * F + Gv)))
        worst = max(worst, abs(generic - closed) / max(1.0, abs(closed)))
    return [Check("vibrational closed-form entropy", worst <= tol, worst, tol)]


# -- FP eigenrelations ----------------------------------------------------------------


def fp_eigen(ns=(24, 32, 48), span=6.0, min_order=1.9, kind="rot-vib"):
    gas = default_gas(kind)
    res = {}
    clos = {0.5: [], -0.5: []}
    for n in ns:
        g = build_grid(n=n, span=span)
        for k, v in eigen_residuals(g, gas).items():
            res.setdefault(k, []).append(v)
        for b in clos:
            clos[b].append(closure_residuals(g, gas, a=-1.0 / 3.0, b=b))
    checks = []
    for k, errs in res.items():
        if max(errs) < 1e-12:
            checks.append(Check(f"{k} (exact on grid)", True, max(errs), 1e-12))
            continue
        o = convergence_order(ns, errs)
        checks.append(Check(f"{k} order", o >= min_order, o, min_order,
                            "residuals " + " ".join(f"{e:.3g}" for e in errs)))
    for b, errs in clos.items():
        for j, lab in enumerate(("F", "G")):
            e = [x[j] for x in errs]
            o = convergence_order(ns, e)
            checks.append(Check(f"closure a=-1/3 b={b:+g} {lab}-equation order", o >= min_order,
                                o, min_order, "residuals " + " ".join(f"{x:.3g}" for x in e)))
    return checks


# -- transport coefficients ------------------------------------------------------------


def alpha_check(tol=1e-12):
    worst = 0.0
    for kind in ENERGY_KINDS:
        gas = default_gas(kind)
        for T in (0.5, 1.0, 2.0):
            c_v = float(gas.c_v(T))
            for model in ("bgk", "fp"):
                a = predict(model, 1.0, 1.0, T, gas).alpha
                worst = max(worst, abs(a - ((c_v + gas.R) / c_v - 1.0)))
    mono = predict("bgk", 1.0, 1.0, 1.0, default_gas("monatomic")).alpha
    worst = max(worst, abs(mono - 2.0 / 3.0))
    return [Check("alpha = c_p/c_v - 1", worst <= tol, worst, tol)]


def transport_coefficients(kn=0.005, n_cells=100, n_v=32, cfl=None):
    checks = []
    results = {}
    for model, lo, hi, plo, phi in (("bgk", 0.95, 1.05, 0.95, 1.05),
                                     ("fp", 0.475, 0.525, 1.40, 1.60)):
        c = cfl if cfl is not None else (0.9 if model == "bgk" else 0.6)
        base = dict(model=model, kn=kn, n_cells=n_cells, n_v=n_v, cfl=c)
        cou = couette_viscosity(ChannelConfig(**base), require_steady=False)
        tau_p = kn * 1.0
        r = cou.measured / tau_p
        checks.append(Check(f"{model} Couette mu_eff/(tau p)", lo <= r <= hi and cou.steady, r,
                            hi - lo, f"range [{lo}, {hi}], steady={cou.steady}, "
                            f"{cou.steps} steps, {cou.wall_clock:.0f}s"))
        fou, Pr = fourier_conductivity(ChannelConfig(**base), mu_eff=cou.measured,
                                       require_steady=False)
        checks.append(Check(f"{model} Fourier Pr_eff", plo <= Pr <= phi and fou.steady, Pr,
                            phi - plo, f"range [{plo}, {phi}], steady={fou.steady}, "
                            f"kappa ratio {fou.ratio:.4f}, {fou.steps} steps, "
                            f"{fou.wall_clock:.0f}s"))
        results[model] = (cou, fou, Pr)
    return checks + alpha_check(), results


# -- Euler limit -----------------------------------------------------------------------


SOD_LEFT = (1.0, 0.0, 1.0)
SOD_RIGHT = (0.125, 0.0, 0.1)


def sod_run(kn, n_cells=200, t_end=0.2, model="bgk", n_v=(48, 16, 16), span=(7.5, 6.6, 6.6)):
    gas = default_gas("rotational-linear")
    grid = build_grid(n=n_v, span=span)
    mesh = SpatialMesh(n_cells, -0.5, 0.5, "inflow-outflow")
    x = mesh.x
    rho = np.where(x < 0, SOD_LEFT[0], SOD_RIGHT[0])
    p = np.where(x < 0, SOD_LEFT[2], SOD_RIGHT[2])
    st = equilibrium_state(rho, np.zeros((n_cells, 3)), p / rho, grid, gas)
    solver = Solver(gas, grid, mesh, st, model, TauLaw("constant", 1.0, Kn=kn))
    solver.advance_to(t_end, chunk=50)
    return x, solver.moments()


def euler_limit(kns=(0.05, 0.01, 0.002), n_cells=200, tol=1e-6):
    ex = ExactRiemann(SOD_LEFT, SOD_RIGHT, 1.4)
    p_ref = 0.30313
    checks = [Check("Sod star pressure", abs(ex.p_star - p_ref) <= 1e-6, ex.p_star, 1e-6,
                    f"reference {p_ref}")]
    errs = []
    for kn in kns:
        x, m = sod_run(kn, n_cells)
        rho_e, u_e, p_e = ex.sample(x / 0.2)
        dx = x[1] - x[0]
        errs.append(float(np.sum(np.abs(m.rho - rho_e)) * dx))
    mono = all(errs[k + 1] < errs[k] for k in range(len(errs) - 1))
    checks.append(Check("Sod L1(rho) strictly decreasing in Kn", mono, errs[-1], 0.0,
                        " ".join(f"Kn={k:g}:{e:.4g}" for k, e in zip(kns, errs))))
    return checks, errs
