"""Critical-orbit activity maps, Newton certification of Misiurewicz
parameters (critical points preperiodic to repelling cycles) and
transversality measurement.

The activity map chi has one coordinate per tracked critical point.  The
algebraic form is chi_i = f^{k0+n_i}(c_i) - f^{k0}(c_i); the motion form
replaces the second term with the holomorphically continued landing
point.  Near a zero of chi with landing multiplier m the two forms are
proportional: chi_alg = (m - 1) chi_mot + O(chi_mot^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CriticalOnOrbit, NoConvergence, NonRepellingTarget
from .families import family_to_json, multiplier as segment_multiplier, orbit

DELTA_REP = 1e-3
N_CERT = 60
FD_STEP = 1e-7


@dataclass(frozen=True)
class Preperiodic:
    """Algebraic pattern: the orbit of the critical point closes after k0
    steps with lag n (chi = f^{k0+n}(c) - f^{k0}(c)); the landing cycle
    has period p."""
    n: int
    p: int

    def __post_init__(self):
        if self.n < 1 or self.p < 1:
            raise ValueError("pattern requires n >= 1 and p >= 1")


@dataclass(frozen=True)
class MotionTarget:
    """Motion pattern: chi = f^{k0}(c) - x(lambda), where x is the landing
    point continued from (base_param, base_point) along a straight
    parameter segment; p is its period."""
    base_param: tuple
    base_point: complex
    p: int


@dataclass(frozen=True)
class ActivitySpec:
    tracked: tuple
    k0: int
    patterns: tuple

    def __post_init__(self):
        if self.k0 < 1:
            raise ValueError("k0 must be >= 1")
        if len(self.tracked) != len(self.patterns):
            raise ValueError("one pattern per tracked critical point")


@dataclass
class MisiurewiczCertificate:
    lam: np.ndarray
    residual: float
    multipliers: list          # per tracked index, (log-modulus, argument)
    sigma_min: float
    m_plus: np.ndarray         # log m_n^+ for n = 1..N_CERT
    spec: ActivitySpec


def _critical_point(family, lam, index):
    pts = family.marked_critical_points(lam)
    if index >= len(pts):
        raise ValueError(f"critical index {index} out of range")
    return complex(pts[index][0])


def _iterate(family, lam, z, n):
    for _ in range(n):
        z = complex(family.eval(lam, z))
    return z


def activity_chi(family, lam, spec, steps=8):
    """Activity vector chi in C^k at the parameter lam."""
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    out = np.empty(len(spec.tracked), dtype=complex)
    for i, (idx, pat) in enumerate(zip(spec.tracked, spec.patterns)):
        c = _critical_point(family, lam, idx)
        land = _iterate(family, lam, c, spec.k0)
        if isinstance(pat, Preperiodic):
            out[i] = _iterate(family, lam, land, pat.n) - land
        elif isinstance(pat, MotionTarget):
            from .hyperbolic import continue_orbit
            base = np.atleast_1d(np.asarray(pat.base_param, dtype=complex))
            seg = orbit(family, base, complex(pat.base_point), pat.p)
            track = continue_orbit(family, base, lam, seg.points,
                                   period=pat.p, steps=steps)
            out[i] = land - track.moved_points[0]
        else:
            raise TypeError(f"unknown pattern {pat!r}")
    return out


def _chi_jacobian(family, lam, spec, step=FD_STEP):
    """Central finite-difference Jacobian of chi; chi is holomorphic in
    lam, so one complex direction per coordinate suffices."""
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    k = len(spec.tracked)
    m = len(lam)
    J = np.empty((k, m), dtype=complex)
    for j in range(m):
        h = step * max(1.0, abs(lam[j]))
        lp, lm = lam.copy(), lam.copy()
        lp[j] += h
        lm[j] -= h
        J[:, j] = (activity_chi(family, lp, spec)
                   - activity_chi(family, lm, spec)) / (2.0 * h)
    return J


def transversality(family, lam, spec, step=FD_STEP):
    """Smallest singular value of the finite-difference Jacobian of chi
    at lam.  A value near zero is reported, not raised."""
    J = _chi_jacobian(family, lam, spec, step=step)
    return float(np.linalg.svd(J, compute_uv=False)[-1])


def _landing_multiplier(family, lam, spec, i):
    idx, pat = spec.tracked[i], spec.patterns[i]
    c = _critical_point(family, lam, idx)
    land = _iterate(family, lam, c, spec.k0 + (pat.n if isinstance(pat, Preperiodic) else 0))
    seg = orbit(family, lam, land, pat.p)
    return segment_multiplier(family, lam, seg.points[:-1])


def _m_plus(family, lam, spec, n_max=N_CERT):
    """log m_n^+ = log max_i |(f^n)'(f^{k0}(c_i))| over tracked indices.

    The landing point is periodic at a certified parameter, so the
    per-step log-derivatives are folded over one period; naive forward
    iteration would amplify roundoff by the repelling multiplier per
    step and lose the orbit within a few dozen steps.
    """
    logs = np.full((len(spec.tracked), n_max), -math.inf)
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    for i, (idx, pat) in enumerate(zip(spec.tracked, spec.patterns)):
        c = _critical_point(family, lam, idx)
        land = _iterate(family, lam, c, spec.k0)
        q = pat.n if isinstance(pat, Preperiodic) else pat.p
        ob = orbit(family, lam, land, q)
        step = np.diff(ob.log_deriv[: q + 1])
        reps = -(-n_max // q)
        logs[i] = np.cumsum(np.tile(step, reps))[:n_max]
    return np.max(logs, axis=0)


def solve_misiurewicz(family, seed, spec, tol=1e-12, maxiter=60,
                      delta_rep=DELTA_REP):
    """Damped Newton on chi = 0 from the seed, followed by certification.

    The parameter slice must be square (k tracked points, k coordinates).
    Landing cycles with |multiplier| <= 1 + delta_rep are refused
    (NonRepellingTarget) rather than certified.
    """
    lam = np.atleast_1d(np.asarray(seed, dtype=complex)).copy()
    k = len(spec.tracked)
    if k != len(lam):
        raise ValueError(f"square solve requires {k} parameter coordinates, got {len(lam)}")
    chi = activity_chi(family, lam, spec)
    res = float(np.linalg.norm(chi))
    for _ in range(maxiter):
        if res <= tol:
            break
        J = _chi_jacobian(family, lam, spec)
        try:
            step = np.linalg.solve(J, chi)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence(f"singular activity Jacobian: {exc}") from exc
        for damping in (1.0, 0.5, 0.25, 0.125, 0.0625):
            trial = lam - damping * step
            chi_t = activity_chi(family, trial, spec)
            res_t = float(np.linalg.norm(chi_t))
            if res_t < res:
                lam, chi, res = trial, chi_t, res_t
                break
        else:
            raise NoConvergence(f"damped Newton stalled at residual {res:.3g}")
    if res > 1e-10:
        raise NoConvergence(f"residual {res:.3g} > 1e-10 after {maxiter} iterations")
    mults = []
    for i in range(k):
        try:
            ml = _landing_multiplier(family, lam, spec, i)
        except CriticalOnOrbit as exc:
            raise NonRepellingTarget(f"landing cycle passes through a critical point: {exc}") from exc
        if ml[0] <= math.log1p(delta_rep):
            raise NonRepellingTarget(
                f"landing cycle multiplier {math.exp(ml[0]):.6g} <= 1 + {delta_rep}")
        mults.append(ml)
    sigma = transversality(family, lam, spec)
    return MisiurewiczCertificate(
        lam=lam, residual=res, multipliers=mults, sigma_min=sigma,
        m_plus=_m_plus(family, lam, spec), spec=spec)


def verify_certificate(cert, family, spec=None, closure_tol=1e-8,
                       delta_rep=DELTA_REP):
    """Independent re-check of a certificate: orbit closure, repelling
    multipliers, transversality (fresh finite-difference step) and the
    m_n^+ profile.  Failures land in the report, never as exceptions."""
    spec = cert.spec if spec is None else spec
    lam = cert.lam
    checks = {}
    worst = 0.0
    for i, (idx, pat) in enumerate(zip(spec.tracked, spec.patterns)):
        c = _critical_point(family, lam, idx)
        if isinstance(pat, Preperiodic):
            z = _iterate(family, lam, c, spec.k0 + pat.n)
            gap = abs(_iterate(family, lam, z, pat.p) - z)
        else:
            z = _iterate(family, lam, c, spec.k0)
            gap = abs(_iterate(family, lam, z, pat.p) - z)
        worst = max(worst, gap)
    checks["orbit_closure"] = worst <= closure_tol
    repelling = True
    drift = 0.0
    for i in range(len(spec.tracked)):
        try:
            ml = _landing_multiplier(family, lam, spec, i)
        except Exception:
            repelling = False
            break
        if ml[0] <= math.log1p(delta_rep):
            repelling = False
        drift = max(drift, abs(ml[0] - cert.multipliers[i][0]))
    checks["repelling_landing"] = repelling
    checks["multiplier_match"] = repelling and drift <= 1e-6
    sigma = transversality(family, lam, spec, step=2e-7)
    checks["sigma_min_match"] = abs(sigma - cert.sigma_min) <= 1e-4 * max(1.0, cert.sigma_min)
    mp = _m_plus(family, lam, spec)
    checks["m_plus_match"] = bool(np.max(np.abs(mp - cert.m_plus)) <= 1e-8 * max(1.0, float(np.max(np.abs(mp)))))
    return {
        "passed": all(checks.values()),
        "checks": checks,
        "closure_gap": worst,
        "sigma_min": sigma,
    }


def certificate_to_json(cert, family):
    """One NDJSON object per certificate."""
    spec = cert.spec
    return {
        "lambda": [[float(v.real), float(v.imag)] for v in cert.lam],
        "residual": cert.residual,
        "multipliers": [{"log_mod": lm, "arg": ar} for lm, ar in cert.multipliers],
        "sigma_min": cert.sigma_min,
        "m_plus": [float(v) for v in cert.m_plus],
        "pattern": {
            "k0": spec.k0,
            "tracked": list(spec.tracked),
            "patterns": [{"n": p.n, "p": p.p} if isinstance(p, Preperiodic)
                         else {"p": p.p, "motion": True} for p in spec.patterns],
        },
        "family": family_to_json(family),
    }
