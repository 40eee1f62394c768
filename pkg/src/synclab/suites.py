"""Built-in verification packs for the command line front end.

Each pack is a list of named checks.  Scenario-shaped checks run through the
ordinary scenario machinery (and leave their artifacts in the output
directory); reduction and equilibrium checks call the library directly since
they compare co-integrated systems rather than a single trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import equilibria, reduce_kuramoto, reduce_sphere
from .integrate import IntegratorSettings
from .scenario import run_scenario
from .state import Flavor, make_phase_config, make_sphere_config, make_unitary_config


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def _scenario_check(name: str, doc: dict, out_dir, seed, quiet) -> CheckResult:
    res = run_scenario(doc, out_dir, seed_override=seed, quiet=True)
    if res.error is not None:
        return CheckResult(name, False, f"error: {res.error}")
    if res.failed_checks:
        return CheckResult(name, False, f"failed: {', '.join(res.failed_checks)}")
    return CheckResult(name, True, "all drift verdicts pass")


def _conservation_scenario(sid, model, t_final, observables, dt=1e-3,
                           record_every=10, seed=12345):
    return {
        "id": sid,
        "seed": seed,
        "t_final": t_final,
        "model": model,
        "integrator": {"dt": dt, "record_every": record_every},
        "observables": observables,
    }


def _kuramoto_pack(out_dir, quiet):
    checks = []
    base = {"kind": "kuramoto", "kappa": 2.0, "flavor": "cosine",
            "initial": {"random": {"n": 6}}}
    doc = _conservation_scenario(
        "suite-kuramoto-I", {**base, "alpha": 0.0}, 5.0,
        [{"name": "kuramoto_I", "tolerance": 1e-6}])
    checks.append(("kuramoto I conserved (alpha=0)", doc))
    doc = _conservation_scenario(
        "suite-kuramoto-J", {**base, "kappa": 1.0, "alpha": 0.3}, 5.0,
        [{"name": "kuramoto_J", "tolerance": 1e-6},
         {"name": "total_phase", "tolerance": 1e-9}])
    checks.append(("kuramoto J_alpha conserved (alpha=0.3)", doc))
    quads = [{"name": "kuramoto_K", "indices": list(q), "tolerance": 1e-6}
             for q in combinations(range(6), 4)]
    doc = _conservation_scenario(
        "suite-kuramoto-K", {**base, "kappa": 1.0, "alpha": np.pi / 2}, 5.0, quads)
    checks.append(("kuramoto K conserved at alpha=pi/2 (15 quadruples)", doc))
    results = [_scenario_check(n, d, out_dir, None, quiet) for n, d in checks]

    r = reduce_kuramoto.dichotomy_check(np.linspace(0.0, 0.9, 6), 0.5, 1.0, 60.0)
    results.append(CheckResult("dichotomy branch 1 -> sync",
                               r.verdict == "SyncR1" and r.precondition_ok,
                               f"R(60) = {r.r_final:.6f}"))
    rng = np.random.default_rng(2024)
    r = reduce_kuramoto.dichotomy_check(np.sort(rng.uniform(0, 2 * np.pi, 6)),
                                        -0.5, 1.0, 200.0)
    results.append(CheckResult(
        "dichotomy branch 2 -> incoherence",
        r.verdict == "IncoherenceR0" and r.total_phase_monotone,
        f"R(200) = {r.r_final:.3e}, total phase monotone: {r.total_phase_monotone}"))
    return results


def _sphere_pack(out_dir, quiet):
    rng = np.random.default_rng(7)
    skew = rng.standard_normal((3, 3))
    checks = []
    quads = [{"name": "sphere_H", "indices": list(q), "tolerance": 1e-6}
             for q in combinations(range(6), 4)]
    doc = _conservation_scenario(
        "suite-sphere-H",
        {"kind": "sphere", "kappa": 1.0, "omega": skew.tolist(),
         "initial": {"random": {"n": 6, "d": 2}}},
        5.0, quads)
    checks.append(("sphere H conserved (shared Omega)", doc))
    doc = _conservation_scenario(
        "suite-sphere-mono",
        {"kind": "sphere", "kappa": 1.0, "initial": {"random": {"n": 6, "d": 2}}},
        5.0,
        [{"name": "sphere_DM", "tolerance": 1e-9},
         {"name": "sphere_rho_sq", "tolerance": 1e-9}])
    checks.append(("sphere D_M / rho^2 monotone (kappa=+1)", doc))
    doc = _conservation_scenario(
        "suite-sphere-mono-neg",
        {"kind": "sphere", "kappa": -1.0, "initial": {"random": {"n": 6, "d": 2}}},
        5.0,
        [{"name": "sphere_DM", "check": "non-decreasing", "tolerance": 1e-9}])
    checks.append(("sphere D_M monotone (kappa=-1)", doc))
    w = rng.standard_normal((3, 3))
    doc = _conservation_scenario(
        "suite-sphere-skew",
        {"kind": "sphere", "kappa": 1.0, "a": 0.0, "w": w.tolist(),
         "initial": {"random": {"n": 5, "d": 2}}},
        5.0,
        [{"name": "pair_distance_product", "tolerance": 1e-6}])
    checks.append(("skew-frustration distance product conserved", doc))
    results = [_scenario_check(n, d, out_dir, None, quiet) for n, d in checks]

    x = rng.standard_normal((6, 3))
    x = 2.0 * np.array([0.0, 0.0, 1.0]) + 0.5 * x
    cfg = make_sphere_config(x, None, 1.0, 1.0, 0.08 * (skew - skew.T))
    r = reduce_sphere.sphere_aggregation_check(cfg, 30.0)
    results.append(CheckResult(
        "sphere aggregation (Gronwall-consistent rate)",
        r.verdict == "Aggregated" and r.rate_consistent,
        f"max dist = {r.final_max_distance:.2e}, rate {r.fitted_rate:.2f} "
        f"vs predicted {r.predicted_rate:.2f}"))
    return results


def _matrix_pack(out_dir, quiet):
    results = []
    rng = np.random.default_rng(8)
    u0 = equilibria.spread_unitary_family(rng, 5, 2, 1.2)
    cfg = make_unitary_config(u0, None, 1.0, None)
    r = equilibria.matrix_aggregation_check(
        cfg, 40.0, IntegratorSettings(dt=2e-3, record_every=1))
    results.append(CheckResult(
        "matrix aggregation V=I (D0 = 1.2)",
        r.verdict == "Aggregated" and r.riccati_ok,
        f"D(T) = {r.final_diameter:.2e}, riccati excess {r.max_riccati_excess:.2e}"))

    quads = [{"name": "matrix_cross_ratio", "indices": list(q), "tolerance": 1e-5}
             for q in [(0, 1, 2, 3), (0, 2, 1, 4), (1, 3, 0, 4)]]
    doc = _conservation_scenario(
        "suite-matrix-crossratio",
        {"kind": "matrix", "kappa": 1.0, "initial": {"random": {"n": 5, "d": 2}}},
        3.0, quads, seed=8)
    results.append(_scenario_check("matrix cross-ratio spectra conserved",
                                   doc, out_dir, None, quiet))
    return results


def _reductions_pack(out_dir, quiet):
    results = []
    rng = np.random.default_rng(42)
    theta0 = np.sort(rng.uniform(0.3, 5.9, 6))
    cfg = make_phase_config(theta0, 0.0, 1.0, 0.4, Flavor.SINE)
    rep = reduce_kuramoto.co_integrate(cfg, IntegratorSettings(dt=1e-3,
                                                               record_every=10), 3.0)
    results.append(CheckResult(
        "kuramoto (f,g) reconstruction (N=6, alpha=0.4)",
        rep.max_error < 1e-5 and rep.affine_identity_residual < 1e-6,
        f"recon err = {rep.max_error:.2e}, affine identity "
        f"{rep.affine_identity_residual:.2e}"))

    x0 = rng.standard_normal((5, 3))
    cfg_s = make_sphere_config(x0, None, 1.0)
    srep = reduce_sphere.reduction_chain_report(
        cfg_s, IntegratorSettings(dt=1e-3, record_every=30), 3.0)
    results.append(CheckResult(
        "sphere reduction chain (N=5, d=2)",
        srep.three_way_max < 1e-4 and srep.m_orthogonality < 1e-8
        and srep.a_min > 0,
        f"three-way = {srep.three_way_max:.2e}, "
        f"M orth = {srep.m_orthogonality:.2e}"))
    return results


def _equilibria_pack(out_dir, quiet):
    results = []
    for n in (3, 4, 5):
        rep = equilibria.cyclic_rep(n)
        cfg = equilibria.config_from_rep(rep)
        ok, res = equilibria.is_equilibrium(cfg)
        results.append(CheckResult(f"cyclic rep Z_{n} equilibrium (V=I)",
                                   ok and res < 1e-12, f"residual = {res:.2e}"))
    rng = np.random.default_rng(5)
    for n in (3, 4):
        rep = equilibria.symmetric_standard_rep(n)
        from .state import random_unitary
        v = random_unitary(rng, n - 1)
        cfg = equilibria.config_from_rep(rep, v=v)
        ok, res = equilibria.is_equilibrium(cfg)
        from .invariants import matrix_diameter
        diam_ok = abs(matrix_diameter(rep.matrices) - np.sqrt(2 * n)) < 1e-10
        results.append(CheckResult(
            f"S_{n} standard rep equilibrium (random V), D = sqrt(2n)",
            ok and res < 1e-10 and diam_ok, f"residual = {res:.2e}"))
    return results


_PACKS = {
    "kuramoto-invariants": _kuramoto_pack,
    "sphere-invariants": _sphere_pack,
    "matrix": _matrix_pack,
    "reductions": _reductions_pack,
    "equilibria": _equilibria_pack,
}

SUITE_NAMES = tuple(_PACKS) + ("all",)


def run_suite(name: str, out_dir, quiet: bool = False) -> list[CheckResult]:
    if name == "all":
        results = []
        for pack in _PACKS.values():
            results.extend(pack(out_dir, quiet))
        return results
    if name not in _PACKS:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITE_NAMES)}")
    return _PACKS[name](out_dir, quiet)
