"""Self-check suites run by ``alpha-vortex verify <suite>``.

Each suite returns a list of :class:`Check` rows (name, pass flag, measured
value, threshold).  ``tamper=True`` flips the sign of one kernel evaluation
inside the suite; it exists so the negative control can show the suite
actually fails when the physics is wrong.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bessel import bessel_k0, bessel_k1
from .config import preset_document, SimConfig
from .diagnostics import (eta, filtered_inertia, filtered_tail, fit_tail_constant, lambda_for,
                          loglog_slope, mass_outside, mass_tail, moments, radial_speed_profile,
                          support_radius, tail_transfer_bound)
from .dynamics import IntegratorConfig, default_dt, rhs, simulate, velocity_at
from .exceptions import DomainError
from .kernels import Blob, Family, gamma, gamma_complement, k_reg
from .measures import DiskPatch, ParticleSystem, VorticitySpec, discretize, recenter
from .oracles import bessel_k_quadrature, gamma_quadrature, normalization_quadrature

SUITES = ("kernels", "conservation", "decay", "tail")
EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    measured: float
    threshold: float
    relation: str = "<="

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.name}: measured={self.measured:.6g} {self.relation} {self.threshold:.6g}"


def _le(name, value, bound):
    return Check(name, bool(value <= bound), float(value), float(bound), "<=")


def _ge(name, value, bound):
    return Check(name, bool(value >= bound), float(value), float(bound), ">=")


# -- kernels -------------------------------------------------------------------

def random_gamma_cases(rng, count=100):
    families = list(Family)
    out = []
    for _ in range(count):
        fam = families[rng.integers(len(families))]
        scale = float(rng.uniform(0.05, 1.0))
        out.append((Blob(fam, scale), float(rng.uniform(0.0, 30.0 * scale))))
    return out


def suite_kernels(seed: int = 0, tamper: bool = False) -> list[Check]:
    rng = np.random.default_rng(seed)
    sign = -1.0 if tamper else 1.0
    checks = []

    xs = [1e-6, 1e-3, 0.1, 1.0, 2.0, 5.0, 10.0, 50.0]
    err0 = max(abs(bessel_k0(x) - bessel_k_quadrature(0, x)) for x in xs)
    err1 = max(abs(bessel_k1(x) - bessel_k_quadrature(1, x)) for x in xs)
    checks.append(_le("bessel_k0 vs integral oracle (abs)", err0, 1e-9))
    checks.append(_le("bessel_k1 vs integral oracle (abs)", err1, 1e-9))
    ratios = [bessel_k0(x) / math.log(1.0 / x) for x in (1e-3, 1e-4, 1e-5)]
    checks.append(Check("k0/log(1/x) approaches 1 as x -> 0", bool(abs(ratios[2] - 1) < abs(ratios[1] - 1) < abs(ratios[0] - 1)),
                        abs(ratios[2] - 1), abs(ratios[0] - 1), "<"))
    checks.append(_le("|x k1(x) - 1| at x=1e-3", abs(1e-3 * bessel_k1(1e-3) - 1), 1e-4))

    worst = 0.0
    for fam in (Family.EULER_ALPHA, Family.GAUSSIAN):
        for scale in (0.05, 0.1, 1.0):
            worst = max(worst, abs(normalization_quadrature(Blob(fam, scale), 50 * scale) - 1))
    checks.append(_le("unit mass within 50 scales (euler-alpha, gaussian)", worst, 1e-6))
    kras = max(abs(normalization_quadrature(Blob("krasny", s), 1000 * s) - 1) for s in (0.05, 0.1, 1.0))
    checks.append(_le("unit mass within 1000 scales (krasny)", kras, 1e-3))

    lo_viol = 0.0
    for fam in Family:
        b = Blob(fam, 0.3)
        r = np.linspace(0.0, 30.0, 3001)
        g = sign * np.asarray(gamma(b, r))
        lo_viol = max(lo_viol, float(np.max(np.maximum(-g[1:], 0.0))), float(np.max(g - 1.0)),
                      abs(g[0]), float(np.max(np.maximum(-np.diff(g), 0.0))), float(np.any(g[1:] <= 0)))
    checks.append(_le("0 < gamma <= 1, gamma(0) = 0, nondecreasing", lo_viol, 0.0))

    for scale in (0.05, 1.0):
        b = Blob("euler-alpha", scale)
        r = np.linspace(1e-3 * scale, 100.0, 20001)
        ratio = np.asarray(gamma(b, r)) / r
        i = int(np.argmax(ratio))
        checks.append(Check(f"sup gamma(r)/r is interior and finite (alpha={scale:g})",
                            bool(0 < i < r.size - 1 and math.isfinite(ratio[i])), float(ratio[i]), math.inf, "<"))

    for fam in (Family.EULER_ALPHA, Family.GAUSSIAN):
        for scale in (0.05, 1.0):
            b = Blob(fam, scale)
            r = np.linspace(5 * scale, 30 * scale, 200)
            tail = gamma_complement(b, r)
            keep = tail > 1e-300
            slope = np.polyfit(r[keep], np.log(tail[keep]), 1)[0]
            checks.append(_le(f"log(1-gamma) slope on [5s,30s], {fam.value} s={scale:g}",
                              slope * scale, -0.5))
            rg = np.linspace(0, 50 * scale, 5001)
            prod = rg * gamma_complement(b, rg)
            j = int(np.argmax(prod))
            tail_ok = bool(np.all(np.diff(prod[j:]) <= 0) and 0 < j < rg.size - 1)
            checks.append(Check(f"r(1-gamma) peaks then decreases, {fam.value} s={scale:g}",
                                tail_ok, float(prod[j]), math.inf, "<"))

    b = Blob("krasny", 0.3)
    r = np.linspace(5 * b.scale, 30 * b.scale, 200)
    y = np.log(gamma_complement(b, r))
    p = np.polyfit(r, y, 1)
    rms = float(np.sqrt(np.mean((y - np.polyval(p, r)) ** 2)))
    checks.append(_ge("krasny tail is not exponential (fit residual)", rms, 0.1))
    checks.append(_ge("krasny tail misses the exponential slope bound", p[0] * b.scale, -0.5))

    cases = random_gamma_cases(rng)
    err = max(abs(sign * gamma(b, r) - gamma_quadrature(b, r)) for b, r in cases)
    checks.append(_le("closed-form gamma vs quadrature (100 random cases)", err, 1e-8))

    x = rng.normal(size=(1000, 2)) * rng.uniform(0.01, 5.0, size=(1000, 1))
    worst_anti, worst_tan = 0.0, 0.0
    for fam in Family:
        b = Blob(fam, 0.2)
        kp = k_reg(b, x)
        km = sign * k_reg(b, -x)
        worst_anti = max(worst_anti, float(np.max(np.abs(kp + km))))
        dot = np.abs(np.sum(x * kp, axis=1)) / (np.hypot(*x.T) * np.hypot(*kp.T))
        worst_tan = max(worst_tan, float(np.max(dot)))
    checks.append(_le("k_reg(-x) = -k_reg(x)", worst_anti, 0.0))
    checks.append(_le("x . k_reg(x) / (|x||k|)", worst_tan, 4 * EPS))
    d = 0.7
    b = Blob("euler-alpha", 0.1)
    v = k_reg(b, [d, 0.0])
    checks.append(_le("k_reg((d,0)) = (0, gamma(d)/(2 pi d))", float(np.max(np.abs(v - [0.0, gamma(b, d) / (2 * math.pi * d)]))), 1e-16))
    return checks


# -- conservation ------------------------------------------------------------

def random_system(seed: int, n: int = 50, blob: Blob | None = None, min_sep: float = 0.15) -> ParticleSystem:
    """``n`` particles uniform in [-1, 1]^2 with pairwise distance >= ``min_sep``.

    The separation keeps the fastest pair rotation slow enough that RK4 is in
    its asymptotic regime at steps where the drift is still above rounding.
    """
    rng = np.random.default_rng(seed)
    pos = []
    while len(pos) < n:
        p = rng.uniform(-1.0, 1.0, size=2)
        if all(math.hypot(p[0] - q[0], p[1] - q[1]) >= min_sep for q in pos):
            pos.append(p)
    m = rng.uniform(0.5, 1.5, size=n)
    return ParticleSystem(np.array(pos), m / m.sum(), blob or Blob("euler-alpha", 0.1))


def _drifts(traj):
    first = moments(traj.snapshots[0])
    out = {"mass": 0.0, "center": 0.0, "inertia": 0.0}
    for s in traj.snapshots:
        mo = moments(s)
        out["mass"] = max(out["mass"], abs(mo.mass - first.mass))
        out["center"] = max(out["center"], float(np.max(np.abs(mo.center - first.center))))
        out["inertia"] = max(out["inertia"], abs(mo.inertia - first.inertia))
    final = moments(traj.final)
    out["center_final"] = float(np.max(np.abs(final.center - first.center)))
    out["inertia_final"] = abs(final.inertia - first.inertia)
    return first, out


def halving_ratio(coarse: float, fine: float, floor: float) -> float:
    """Drift reduction when dt is halved; ``inf`` when both drifts sit at the rounding floor."""
    if coarse <= floor and fine <= floor:
        return math.inf
    return coarse / max(fine, floor)


def suite_conservation(seed: int = 0, tamper: bool = False) -> list[Check]:
    sys0 = random_system(seed)
    checks = []
    v = rhs(sys0)
    if tamper:
        v = v.copy()
        v[1::2] *= -1.0
    m = sys0.masses
    scale = float(np.sum(np.abs(m)) * np.max(np.abs(v)))
    mom = float(np.max(np.abs(np.sum(m[:, None] * v, axis=0))))
    checks.append(_le("|sum m_i rhs_i| / (sum|m| max|rhs|)", mom / scale, 1e-12))
    xdot = float(abs(np.sum(m * np.sum(sys0.positions * v, axis=1))))
    xscale = float(np.sum(np.abs(m) * np.hypot(*sys0.positions.T) * np.hypot(*v.T)))
    checks.append(_le("|sum m_i X_i . rhs_i| / scale", xdot / xscale, 1e-12))

    t_end = 2.0
    dt_h = default_dt(sys0)

    def run(steps, rows=20):
        return simulate(sys0, IntegratorConfig(t_end / steps, t_end, record_stride=max(1, steps // rows)))

    n_h = 64 * math.ceil(t_end / (64 * dt_h))  # keeps every halving of the step exact
    fine = run(n_h)
    first, d = _drifts(fine)
    R0 = support_radius(sys0, 1.0, centered=True)
    checks.append(_le("mass drift (exact)", d["mass"], 0.0))
    checks.append(_le("|dZ0| / (m0 R0)", d["center"] / (first.mass * R0), 1e-6))
    checks.append(_le("|di0| / i0", d["inertia"] / first.inertia, 1e-6))
    # dt^4 study: coarsen the step by halves from the heuristic until the i0
    # drift is well clear of rounding, then report the mean reduction per
    # halving over the levels whose finer drift exceeds ten times the floor.
    z_floor = 64 * EPS * first.mass * R0
    i_floor = 64 * EPS * first.inertia
    levels = {n_h: d}
    n = n_h
    while levels[n]["inertia"] <= 1e3 * i_floor and n >= 8:
        n //= 2
        levels[n] = _drifts(run(n))[1]
    ns = sorted(levels)
    z_ratio = halving_ratio(levels[ns[0]]["center"], levels[ns[1]]["center"], z_floor)
    ratios = [levels[c]["inertia"] / levels[f]["inertia"] for c, f in zip(ns, ns[1:])
              if levels[f]["inertia"] > 10 * i_floor]
    i_ratio = math.exp(float(np.mean(np.log(ratios)))) if ratios else math.inf
    checks.append(_ge("Z0 drift reduction when dt halves (inf = rounding floor)", z_ratio, 8.0))
    checks.append(_ge(f"i0 drift reduction per dt halving (mean over {len(ratios)}, {ns[0]}..{ns[-1]} steps)",
                      i_ratio, 8.0))

    offs = [filtered_inertia(s) - moments(s).inertia for s in fine.snapshots]
    spread = max(offs) - min(offs)
    checks.append(_le("filtered_inertia - i0 constant", spread, 4 * EPS * filtered_inertia(sys0)))
    excess = max(moments(s).first_abs_moment - 0.5 * (moments(s).mass + moments(s).inertia) for s in fine.snapshots)
    checks.append(_le("sum m|X| - (m0 + i0)/2", excess, 0.0))

    again = run(n_h)
    same = all(np.array_equal(a.positions, b.positions) for a, b in zip(fine.snapshots, again.snapshots))
    checks.append(Check("deterministic reduction is bit-reproducible", same, 0.0 if same else 1.0, 0.0))
    return checks


# -- decay -------------------------------------------------------------------

def two_patch_system() -> ParticleSystem:
    cfg = SimConfig.from_dict(preset_document("two-patch"))
    return recenter(cfg.initial_system())


def suite_decay(seed: int = 0, tamper: bool = False) -> list[Check]:
    checks = []
    b = Blob("euler-alpha", 0.1)
    a = 0.5
    radii = np.geomspace(10 * a, 40 * a, 9)

    single = ParticleSystem([[0.0, 0.0]], [1.0], b)
    peak = float(np.max(radial_speed_profile(single, radii).max_radial_speed))
    speed = float(np.max(np.hypot(*velocity_at(single, radii[:, None] * [1.0, 0.0]).T)))
    checks.append(_le("single atom: max radial / tangential speed", peak / speed, 4 * EPS))

    pair = ParticleSystem([[-a, 0.0], [a, 0.0]], [1.0, 1.0], b)
    if tamper:
        pair = ParticleSystem([[-a, 0.0], [a, 0.0]], [1.0, -1.0], b)
    slope = radial_speed_profile(pair, radii).loglog_slope()
    checks.append(_le("centered pair: log-log slope on [10a, 40a]", slope, -3 + 0.2))

    off = ParticleSystem([[a, 0.0]], [1.0], b)
    slope_off = radial_speed_profile(off, radii).loglog_slope()
    checks.append(_le("uncentered atom: |slope + 2|", abs(slope_off + 2.0), 0.2))

    tp = two_patch_system()
    R = support_radius(tp)
    prof = radial_speed_profile(tp, np.geomspace(10 * R, 40 * R, 9))
    checks.append(_le("two-patch (recentered): slope on [10R, 40R]", prof.loglog_slope(), -2.8))

    spec = VorticitySpec.analytic(DiskPatch((0.0, 0.0), 1.0, 1.0))
    speeds = []
    for n in (8, 16, 32):
        s = discretize(spec, n, b)
        speeds.append(float(np.max(np.hypot(*rhs(s).T)) / np.sum(np.abs(s.masses))))
    variation = (max(speeds) - min(speeds)) / max(speeds)
    checks.append(_le("max|u| / sum|m| variation under refinement n=8,16,32", variation, 0.10))

    checks.extend(eta_checks(tamper))
    return checks


def eta_checks(tamper: bool = False) -> list[Check]:
    h = 1e-4
    s = np.linspace(-20, 20, 4001)
    e = eta(s)
    if tamper:
        e = 1.0 - e
    ep = (eta(s + h) - eta(s - h)) / (2 * h) * (-1.0 if tamper else 1.0)
    epp = (eta(s + h) - 2 * eta(s) + eta(s - h)) / (h * h)
    return [
        _le("eta(0) = 1/2", abs(eta(0.0) - 0.5), 0.0),
        _le("1 - eta(40)", 1.0 - eta(40.0), 1e-17),
        _le("eta(-40)", eta(-40.0), 1e-17),
        _le("min eta'(s) > 0 (negated)", -float(np.min(ep)), 0.0),
        _le("max eta' - min(eta, e^-|s|)", float(np.max(ep - np.minimum(e, np.exp(-np.abs(s))))), 1e-6),
        _le("max |eta''| - eta", float(np.max(np.abs(epp) - e)), 1e-6),
    ]


# -- tail --------------------------------------------------------------------

def suite_tail(seed: int = 0, tamper: bool = False) -> list[Check]:
    rng = np.random.default_rng(seed)
    checks = []
    sign = -1.0 if tamper else 1.0
    b = Blob("euler-alpha", 0.1)

    checks.append(_le("lambda_for(e R0, R0, 6) - 1/32", abs(lambda_for(math.e * 2.0, 2.0, 6) - 1 / 32), 1e-15))
    rs = np.linspace(1.2, 10, 50)
    lam = [lambda_for(r, 1.0, 6) for r in rs]
    lam_k = [lambda_for(3.0, 1.0, k) for k in range(1, 10)]
    mono = bool(np.all(np.diff(lam) < 0) and np.all(np.diff(lam_k) < 0))
    checks.append(Check("lambda decreasing in r and k", mono, 0.0, 0.0))
    try:
        lambda_for(math.exp(1 / 32), 1.0, 6)
        edge = False
    except DomainError:
        edge = True
    checks.append(Check("lambda edge r = R0 e^(1/(4(k+2))) rejected", edge, 0.0, 0.0))

    worst = -math.inf
    for _ in range(100):
        n = int(rng.integers(1, 60))
        s = ParticleSystem(rng.normal(size=(n, 2)) * 2, rng.uniform(0, 1, n), b)
        r = float(rng.uniform(0.5, 4.0))
        worst = max(worst, 0.5 * mass_outside(s, r) - sign * mass_tail(s, r, float(rng.uniform(0.01, 0.99))))
    checks.append(_le("(1/2) mass outside r - f_r over 100 random systems", worst, 0.0))
    one = ParticleSystem([[3.0, 4.0]], [1.0], b)
    checks.append(_le("atom on |x| = r gives f_r = 1/2", abs(mass_tail(one, 5.0, 0.1) - 0.5), 1e-15))

    disk = discretize(VorticitySpec.analytic(DiskPatch((0.0, 0.0), 1.0, 1.0)), 16, b)
    R0 = support_radius(disk, 1.0, centered=True)
    m0 = disk.total_mass
    excess = -math.inf
    for r in (2.05 * R0, 2.5 * R0, 3 * R0, 4 * R0):
        lam = lambda_for(r, R0, 6)
        excess = max(excess, sign * mass_tail(disk, r, lam, centered=True) / (m0 * math.exp(-1 / (2 * lam))))
    checks.append(_le("f_r(0) / (m0 e^(-1/(2 lambda))) for r > 2 R0", excess, 1.0))

    g = Blob("gaussian", 0.2)
    at0 = ParticleSystem([[0.0, 0.0]], [1.0], g)
    err = max(abs(filtered_tail(at0, r) - math.exp(-(r / g.scale) ** 2)) for r in (0.1, 0.2, 0.4))
    checks.append(_le("gaussian blob tail = exp(-(r/eps)^2)", err, 1e-10))
    two = ParticleSystem([[0.1, 0.0], [0.0, -0.3]], [0.4, 0.6], g)
    parts = [ParticleSystem([p], [m], g) for p, m in zip(two.positions, two.masses)]
    add = abs(filtered_tail(two, 0.5) - sum(filtered_tail(p, 0.5) for p in parts))
    checks.append(_le("filtered tail additivity", add, 1e-14))

    c = fit_tail_constant(b, np.linspace(2 * b.scale, 60 * b.scale, 200))
    inner = ParticleSystem(rng.uniform(-0.2, 0.2, size=(20, 2)), rng.uniform(0, 1, 20), b)
    margins = []
    for r in (1.0, 1.5, 2.0, 3.0):
        lhs = filtered_tail(inner, r)
        rhs_ = tail_transfer_bound(inner, r, c)
        margins.append(sign * lhs - rhs_)
    checks.append(_le("filtered tail - transfer bound (blob well inside r/2)", max(margins), 0.0))
    return checks


def run_suite(name: str, seed: int = 0, tamper: bool = False) -> list[Check]:
    fn = {"kernels": suite_kernels, "conservation": suite_conservation,
          "decay": suite_decay, "tail": suite_tail}[name]
    return fn(seed=seed, tamper=tamper)
