"""Parameter-grid scans of Lyapunov and per-critical Green fields,
discrete dd^c and two-parameter Monge-Ampere measures, radial mass
profiles and dimension estimators.

Grids live over boxes in C^m (m = 1 or 2); value arrays carry one real
axis pair per complex coordinate, in the order (x1, y1[, x2, y2]) with
"ij" indexing.  The mass normalization is fixed so that dd^c log|l - l0|
carries total mass 1 in one complex parameter; every other stated
density follows from that choice.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import gaussian_filter

from .errors import (
    DegenerateProfile,
    InsufficientScales,
    NotPlurisubharmonic,
    ResolutionExceeded,
)

PLANE_BIG = 1e12
SCAN_MAXITER = 512


@dataclass(frozen=True)
class Box:
    """Axis-aligned box in C^m: one center, one half-width (real axis) and
    optionally one half-height (imaginary axis) per complex coordinate;
    half-heights default to the half-widths (square planes)."""
    centers: tuple
    half_widths: tuple
    half_heights: tuple = None

    def __post_init__(self):
        if self.half_heights is None:
            object.__setattr__(self, "half_heights", tuple(self.half_widths))
        if not (len(self.centers) == len(self.half_widths) == len(self.half_heights)):
            raise ValueError("one half-width and half-height per center")
        if any(h <= 0 for h in self.half_widths + self.half_heights):
            raise ValueError("half-widths must be positive")

    @property
    def m(self):
        return len(self.centers)

    @property
    def is_square(self):
        return all(abs(w - h) <= 1e-12 * max(w, h)
                   for w, h in zip(self.half_widths, self.half_heights))

    def cell_widths(self, resolution):
        return tuple(2.0 * h / resolution for h in self.half_widths)

    def cell_heights(self, resolution):
        return tuple(2.0 * h / resolution for h in self.half_heights)

    def axes(self, resolution):
        """Cell-center coordinates, one (x, y) pair per complex coordinate."""
        out = []
        t = (np.arange(resolution) + 0.5) / resolution
        for c, hw, hh in zip(self.centers, self.half_widths, self.half_heights):
            out.append((complex(c).real - hw + 2.0 * hw * t,
                        complex(c).imag - hh + 2.0 * hh * t))
        return out

    def param_grids(self, resolution):
        """Complex coordinate arrays of shape (resolution,) * 2m."""
        flats = []
        for x, y in self.axes(resolution):
            flats.extend([x, y])
        mesh = np.meshgrid(*flats, indexing="ij")
        return [mesh[2 * i] + 1j * mesh[2 * i + 1] for i in range(self.m)]


@dataclass
class GridField:
    box: Box
    resolution: int
    values: np.ndarray
    meta: dict = field(default_factory=dict)
    nan_count: int = 0


@dataclass
class MeasureField:
    """Discrete measure on the cells of a grid.  ``cell_mass`` is the
    clamped (nonnegative) mass; ``raw_mass`` keeps the signed stencil
    output and ``clamp_total`` the amount removed by clamping."""
    box: Box
    resolution: int
    cell_mass: np.ndarray
    raw_mass: np.ndarray
    clamp_total: float
    meta: dict = field(default_factory=dict)

    @property
    def total_mass(self):
        return float(np.sum(self.cell_mass))


@dataclass(frozen=True)
class RadialMassProfile:
    center: tuple
    radii: np.ndarray
    masses: np.ndarray


@dataclass(frozen=True)
class DimensionEstimate:
    slope: float
    stderr: float
    fit_range: tuple
    n_points: int


@dataclass(frozen=True)
class MassScalingResult:
    slope: float
    stderr: float
    expected: float
    deviation: float
    n_used: int
    radii: np.ndarray
    masses: np.ndarray


# ----------------------------------------------------------------------
# vectorized polynomial iteration over parameter grids

def _sigma_arrays(cs):
    """Elementary symmetric functions sigma_0..sigma_k of the arrays cs."""
    sig = [np.ones_like(cs[0])] if cs else [np.array(1.0 + 0j)]
    for c in cs:
        new = [sig[0]]
        for k in range(1, len(sig) + 1):
            prev = sig[k] if k < len(sig) else 0.0
            new.append(prev + c * sig[k - 1])
        sig = new
    return sig


def _grid_apply(family, lams, z, sig=None):
    """f applied cellwise: z and every entry of lams share a shape."""
    d = family.degree
    if family.kind == "unicritical":
        return z ** d + lams[0]
    if family.kind == "branner_hubbard":
        if sig is None:
            sig = _sigma_arrays(lams[:-1])
        out = z ** d / d + lams[-1] ** d
        for j in range(2, d):
            out = out + ((-1.0) ** (d - j)) * sig[d - j] / j * z ** j
        return out
    raise ValueError(f"grid scans require a polynomial kind, got {family.kind!r}")


def _grid_critical(family, lams, index):
    if index == 0:
        return np.zeros_like(lams[0])
    if family.kind == "branner_hubbard" and index <= family.degree - 2:
        return lams[index - 1]
    raise ValueError(f"critical index {index} out of range")


def _grid_green(family, lams, z0, maxiter=SCAN_MAXITER, big=PLANE_BIG):
    """Escape-rate Green value of the orbit of z0, cellwise."""
    d = family.degree
    lead = 1.0 / d if family.kind == "branner_hubbard" else 1.0
    gamma = math.log(abs(lead)) / (d - 1)
    shape = z0.shape
    g = np.zeros(shape, dtype=float).ravel()
    z = z0.ravel().copy()
    lam_flat = [l.ravel() for l in lams]
    sig_flat = _sigma_arrays(lam_flat[:-1]) if family.kind == "branner_hubbard" else None
    active = np.arange(z.size)
    for n in range(maxiter + 1):
        out = np.abs(z[active]) > big
        if np.any(out):
            hit = active[out]
            g[hit] = d ** (-float(n)) * (np.log(np.abs(z[hit])) + gamma)
            active = active[~out]
        if active.size == 0 or n == maxiter:
            break
        cur = [l[active] for l in lam_flat]
        sig = ([s[active] if np.ndim(s) else s for s in sig_flat]
               if sig_flat is not None else None)
        z[active] = _grid_apply(family, cur, z[active], sig=sig)
    return g.reshape(shape)


def _local_mass(values, resolution, weights=None):
    """Unscaled 5-point mass per complex coordinate, (1/2pi)(sum of the 4
    in-plane neighbors - 4 center), summed over coordinates; boundary
    cells get 0.  ``weights`` rescale each axis's second difference for
    rectangular cells (weight = h_other / h_axis per coordinate plane)."""
    u = values
    out = np.zeros_like(u)
    ndim = u.ndim
    if weights is None:
        weights = [1.0] * ndim
    for ax in range(ndim):
        lo = [slice(1, -1) if a == ax else slice(None) for a in range(ndim)]
        up = [slice(2, None) if a == ax else slice(None) for a in range(ndim)]
        dn = [slice(0, -2) if a == ax else slice(None) for a in range(ndim)]
        out[tuple(lo)] += weights[ax] * (u[tuple(up)] + u[tuple(dn)] - 2.0 * u[tuple(lo)])
    mass = out / (2.0 * math.pi)
    # zero out the boundary ring where the stencil is one-sided
    for ax in range(ndim):
        edge0 = [0 if a == ax else slice(None) for a in range(ndim)]
        edge1 = [-1 if a == ax else slice(None) for a in range(ndim)]
        mass[tuple(edge0)] = 0.0
        mass[tuple(edge1)] = 0.0
    return mass


def scan_field(family, box, resolution, which, maxiter=SCAN_MAXITER,
               activity_threshold=1e-8):
    """Grid scan of a parameter field.

    ``which``: "L" (Lyapunov, log d + sum of critical Green values at the
    critical values), "G<j>" (Green value of marked critical point j,
    taken at its critical value) or "activity<j>" (0/1 flag, local dd^c
    mass of G_j above the threshold).
    """
    if resolution < 8:
        raise ValueError("resolution must be >= 8")
    lams = box.param_grids(resolution)
    d = family.degree
    meta = {"which": which, "maxiter": maxiter}

    def green_field(j):
        c = _grid_critical(family, lams, j)
        cv = _grid_apply(family, lams, c)
        return _grid_green(family, lams, cv, maxiter=maxiter)

    if which == "L":
        n_marked = 1 if family.kind == "unicritical" else d - 1
        mults = [d - 1] if family.kind == "unicritical" else [1] * n_marked
        vals = np.full(lams[0].shape, math.log(d))
        for j in range(n_marked):
            vals = vals + mults[j] * green_field(j)
    elif which.startswith("activity"):
        j = int(which[len("activity"):])
        g = green_field(j)
        ws = []
        for hx, hy in zip(box.cell_widths(resolution), box.cell_heights(resolution)):
            ws.extend([hy / hx, hx / hy])
        mass = _local_mass(g, resolution, weights=ws)
        vals = (np.abs(mass) > activity_threshold).astype(float)
        meta["threshold"] = activity_threshold
    elif which.startswith("G"):
        vals = green_field(int(which[1:]))
    else:
        raise ValueError(f"unknown field {which!r}")
    nan_count = int(np.sum(~np.isfinite(vals)))
    return GridField(box=box, resolution=resolution, values=vals,
                     meta=meta, nan_count=nan_count)


# ----------------------------------------------------------------------
# discrete dd^c and Monge-Ampere

def ddc(gfield):
    """Discrete bifurcation-type measure of a one-parameter field:
    interior cell mass (1/2pi)(sum of 4 neighbors - 4 center)."""
    if gfield.box.m != 1:
        raise ValueError("ddc requires one complex parameter")
    hx = gfield.box.cell_widths(gfield.resolution)[0]
    hy = gfield.box.cell_heights(gfield.resolution)[0]
    raw = _local_mass(gfield.values, gfield.resolution, weights=[hy / hx, hx / hy])
    clamped = np.maximum(raw, 0.0)
    clamp_total = float(np.sum(clamped - raw))
    return MeasureField(box=gfield.box, resolution=gfield.resolution,
                        cell_mass=clamped, raw_mass=raw, clamp_total=clamp_total,
                        meta={"op": "ddc", "source": dict(gfield.meta)})


def _hessian_fields(u, h1, h2):
    """Complex-Hessian entries (d^2 u / dl_j dl_k-bar) of a 4D grid with
    axis order (x1, y1, x2, y2)."""
    def d2(a, ax):
        out = np.zeros_like(a)
        ndim = a.ndim
        lo = [slice(1, -1) if b == ax else slice(None) for b in range(ndim)]
        up = [slice(2, None) if b == ax else slice(None) for b in range(ndim)]
        dn = [slice(0, -2) if b == ax else slice(None) for b in range(ndim)]
        out[tuple(lo)] = a[tuple(up)] + a[tuple(dn)] - 2.0 * a[tuple(lo)]
        return out

    def dxy(a, ax, ay):
        out = np.zeros_like(a)
        ndim = a.ndim
        def sl(axis, s):
            return tuple(s if b == axis else slice(None) for b in range(ndim))
        mid = tuple(slice(1, -1) if b in (ax, ay) else slice(None) for b in range(ndim))
        pp = a[tuple(slice(2, None) if b in (ax, ay) else slice(None) for b in range(ndim))]
        mm = a[tuple(slice(0, -2) if b in (ax, ay) else slice(None) for b in range(ndim))]
        pm = a[tuple(slice(2, None) if b == ax else (slice(0, -2) if b == ay else slice(None))
                     for b in range(ndim))]
        mp = a[tuple(slice(0, -2) if b == ax else (slice(2, None) if b == ay else slice(None))
                     for b in range(ndim))]
        out[mid] = (pp + mm - pm - mp) / 4.0
        return out

    A11 = 0.25 * (d2(u, 0) + d2(u, 1)) / h1 ** 2
    A22 = 0.25 * (d2(u, 2) + d2(u, 3)) / h2 ** 2
    A12 = 0.25 * (dxy(u, 0, 2) + dxy(u, 1, 3)
                  + 1j * (dxy(u, 0, 3) - dxy(u, 1, 2))) / (h1 * h2)
    return A11, A22, A12


def _mollify(values, box, resolution, radius):
    h = box.cell_widths(resolution)
    sig = []
    for i in range(box.m):
        sig.extend([radius / (2.0 * h[i])] * 2)
    return gaussian_filter(values, sigma=sig, mode="nearest", truncate=2.0)


def wedge_pair(field_a, field_b, mollify_radius=None):
    """Mixed Monge-Ampere measure of two fields over C^2.

    Cell mass (8/pi^2) M(A, B) h1^2 h2^2 with the polarized determinant
    M(A,B) = (A11 B22 + B11 A22 - A12 conj(B12) - B12 conj(A12)) / 2, so
    wedge_pair(u, u) reproduces monge_ampere2(u) exactly.
    """
    box, res = field_a.box, field_a.resolution
    if box.m != 2:
        raise ValueError("wedge_pair requires two complex parameters")
    if not box.is_square:
        raise ValueError("wedge stencils require square coordinate planes")
    if field_b.box != box or field_b.resolution != res:
        raise ValueError("fields must share box and resolution")
    h1, h2 = box.cell_widths(res)
    if mollify_radius is None:
        mollify_radius = 3.0 * max(h1, h2)
    if mollify_radius < 2.0 * min(h1, h2):
        raise ValueError("mollify_radius must be >= 2 cell widths")
    ua = _mollify(field_a.values, box, res, mollify_radius)
    ub = (ua if field_b is field_a or np.array_equal(field_b.values, field_a.values)
          else _mollify(field_b.values, box, res, mollify_radius))
    A11, A22, A12 = _hessian_fields(ua, h1, h2)
    if ub is ua:
        B11, B22, B12 = A11, A22, A12
    else:
        B11, B22, B12 = _hessian_fields(ub, h1, h2)
    M = 0.5 * (A11 * B22 + B11 * A22 - A12 * np.conj(B12) - B12 * np.conj(A12))
    raw = (8.0 / math.pi ** 2) * M.real * (h1 ** 2) * (h2 ** 2)
    # drop the shell whose stencil sees padded (edge-replicated) data
    shells = []
    for h in (h1, h1, h2, h2):
        shells.append(int(math.ceil(2.0 * mollify_radius / (2.0 * h))) + 1)
    valid = np.zeros(raw.shape, dtype=bool)
    valid[tuple(slice(s, -s) for s in shells)] = True
    raw = np.where(valid, raw, 0.0)
    clamped = np.maximum(raw, 0.0)
    clamp_total = float(np.sum(clamped - raw))
    # significance floor: second differences of u carry roundoff of order
    # eps * max|u|, which enters M through products with the Hessians
    eps_m = np.finfo(float).eps
    err_a = 16.0 * eps_m * float(np.max(np.abs(ua))) / min(h1, h2) ** 2
    err_b = err_a if ub is ua else \
        16.0 * eps_m * float(np.max(np.abs(ub))) / min(h1, h2) ** 2
    amax = max(float(np.max(np.abs(A11))), float(np.max(np.abs(A22))),
               float(np.max(np.abs(A12))))
    bmax = amax if ub is ua else \
        max(float(np.max(np.abs(B11))), float(np.max(np.abs(B22))),
            float(np.max(np.abs(B12))))
    floor = 8.0 * (8.0 / math.pi ** 2) * (h1 ** 2) * (h2 ** 2) \
        * (amax * err_b + bmax * err_a + err_a * err_b)
    eps_neg = max(1e-12 * float(np.max(np.abs(raw))), floor, 1e-300)
    n_clamped = int(np.sum(raw < -eps_neg))
    if n_clamped > 0.01 * int(np.sum(valid)):
        warnings.warn(f"{n_clamped} of {int(np.sum(valid))} interior cells clamped negative",
                      NotPlurisubharmonic)
    return MeasureField(box=box, resolution=res, cell_mass=clamped,
                        raw_mass=raw, clamp_total=clamp_total,
                        meta={"op": "wedge_pair", "mollify_radius": mollify_radius,
                              "boundary_shell": shells,
                              "a": dict(field_a.meta), "b": dict(field_b.meta)})


def monge_ampere2(gfield, mollify_radius=None):
    """(dd^c u)^2 measure of a field over C^2 (self-wedge)."""
    out = wedge_pair(gfield, gfield, mollify_radius=mollify_radius)
    out.meta = {"op": "monge_ampere2",
                "mollify_radius": out.meta["mollify_radius"],
                "boundary_shell": out.meta["boundary_shell"],
                "source": dict(gfield.meta)}
    return out


# ----------------------------------------------------------------------
# radial masses and dimension estimators

def _cell_center_coords(box, resolution):
    flats = []
    for x, y in box.axes(resolution):
        flats.extend([x, y])
    return flats


def radial_masses(measure, center, radii, subsample=None):
    """mu(ball(center, r_k)) by cell summation; cells cut by the sphere
    contribute their subsampled covered fraction."""
    box, res = measure.box, measure.resolution
    hs = []
    for w, h in zip(box.cell_widths(res), box.cell_heights(res)):
        hs.extend([w, h])
    hs = np.array(hs)
    radii = np.asarray(radii, dtype=float)
    if np.any(np.diff(radii) >= 0):
        raise ValueError("radii must be strictly decreasing")
    hmax = float(np.max(hs))
    if radii[-1] < 3.0 * hmax:
        raise ResolutionExceeded(
            f"r_min = {radii[-1]:.3g} below 3 cell widths ({3 * hmax:.3g})")
    ctr = np.atleast_1d(np.asarray(center, dtype=complex))
    cvec = []
    for v in ctr:
        cvec.extend([v.real, v.imag])
    cvec = np.array(cvec)
    flats = _cell_center_coords(box, res)
    mesh = np.meshgrid(*flats, indexing="ij")
    dist2 = np.zeros(mesh[0].shape)
    for k, g in enumerate(mesh):
        dist2 += (g - cvec[k]) ** 2
    dist = np.sqrt(dist2)
    half_diag = 0.5 * float(np.linalg.norm(hs))
    if subsample is None:
        subsample = 8 if box.m == 1 else 4
    offs = [(np.arange(subsample) + 0.5) / subsample - 0.5 for _ in hs]
    off_mesh = np.meshgrid(*offs, indexing="ij")
    masses = np.empty(len(radii))
    mass_flat = measure.cell_mass.ravel()
    dist_flat = dist.ravel()
    for i, r in enumerate(radii):
        inner = dist_flat <= r - half_diag
        band = (~inner) & (dist_flat < r + half_diag)
        total = float(np.sum(mass_flat[inner]))
        idx = np.nonzero(band)[0]
        if idx.size:
            centers = np.stack([g.ravel()[idx] for g in mesh], axis=-1)
            off_flat = np.stack([om.ravel() for om in off_mesh], axis=0)
            sub2 = np.zeros((idx.size, off_flat.shape[1]))
            for k in range(len(hs)):
                sub2 += (centers[:, k: k + 1] + off_flat[k][None, :] * hs[k]
                         - cvec[k]) ** 2
            frac = np.mean(sub2 <= r * r, axis=1)
            total += float(np.sum(mass_flat[idx] * frac))
        masses[i] = total
    return RadialMassProfile(center=tuple(ctr), radii=radii, masses=masses)


def _ols(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    resid = y - (ym + slope * (x - xm))
    dof = max(len(x) - 2, 1)
    stderr = math.sqrt(float(np.sum(resid ** 2)) / dof / sxx)
    return slope, stderr


def pointwise_dimension(profile):
    """Least-squares slope of log mu(ball(r)) against log r."""
    keep = profile.masses > 0
    radii = profile.radii[keep]
    masses = profile.masses[keep]
    if len(radii) < 4:
        raise DegenerateProfile(f"only {len(radii)} radii with positive mass")
    slope, stderr = _ols(np.log(radii), np.log(masses))
    return DimensionEstimate(slope=slope, stderr=stderr,
                             fit_range=(float(radii[0]), float(radii[-1])),
                             n_points=len(radii))


def mass_scaling(measure, center, m_plus, q, d, eps=0.25, n_max=None):
    """Regression slope of log mu(ball(center, eps/m_n^+)) against n,
    compared with the -q log d scaling law.

    ``m_plus``: log m_n^+ values for n = 1, 2, ...; ``measure`` may also
    be a callable r -> mass (synthetic laws).
    """
    m_plus = np.asarray(m_plus, dtype=float)
    if n_max is not None:
        m_plus = m_plus[:n_max]
    radii = eps * np.exp(-m_plus)
    if callable(measure):
        usable = len(radii)
        masses = np.array([float(measure(r)) for r in radii])
    else:
        h = max(measure.box.cell_widths(measure.resolution)
                + measure.box.cell_heights(measure.resolution))
        usable = int(np.sum(radii >= 3.0 * h))
        if usable < 3:
            raise ResolutionExceeded(
                f"only {usable} usable scales at this resolution")
        radii = radii[:usable]
        masses = radial_masses(measure, center, radii).masses
    keep = masses > 0
    if int(np.sum(keep)) < 3:
        raise DegenerateProfile("fewer than 3 positive masses")
    ns = np.arange(1, usable + 1)[keep]
    slope, stderr = _ols(ns, np.log(masses[keep]))
    expected = -q * math.log(d)
    return MassScalingResult(slope=slope, stderr=stderr, expected=expected,
                             deviation=slope - expected, n_used=int(ns[-1]),
                             radii=radii, masses=masses)


def box_dimension(points, scales, min_points=1000):
    """Box-counting slope of log N(eps) against log(1/eps) for a planar
    point cloud."""
    pts = np.asarray(points, dtype=complex).ravel()
    if len(pts) < min_points:
        raise ValueError(f"need >= {min_points} points, got {len(pts)}")
    scales = np.asarray(sorted(set(float(s) for s in scales), reverse=True))
    from scipy.spatial import cKDTree
    xy = np.column_stack([pts.real, pts.imag])
    tree = cKDTree(xy)
    dd, _ = tree.query(xy[: min(len(xy), 2000)], k=2)
    spacing = float(np.median(dd[:, 1]))
    usable = scales[scales >= 2.0 * spacing]
    if len(usable) < 4:
        raise InsufficientScales(
            f"only {len(usable)} scales above 2x point spacing {spacing:.3g}")
    counts = []
    for eps in usable:
        cells = np.unique(np.floor(xy / eps).astype(np.int64), axis=0)
        counts.append(len(cells))
    slope, stderr = _ols(np.log(1.0 / usable), np.log(counts))
    return DimensionEstimate(slope=slope, stderr=stderr,
                             fit_range=(float(usable[0]), float(usable[-1])),
                             n_points=len(usable))
