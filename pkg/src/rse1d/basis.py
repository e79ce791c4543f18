"""Resonant states of the symmetric double-delta quantum well.

The basis system is V(x) = -gamma [delta(x-a) + delta(x+a)] in units
hbar = 1, m = 1/2 (so E = k^2).  Its resonant states have wavenumbers k
solving the secular relation

    1 + 2ik/gamma = -exp(2ika)   (even parity)
    1 + 2ik/gamma = +exp(2ika)   (odd parity)

and piecewise-exponential wavefunctions normalized with the Siegert rule
(volume integral over |x| <= a plus a boundary term).  This module finds
*all* roots inside a disk |k| <= R, classifies them (bound / antibound /
normal), normalizes them in closed form, and certifies completeness of
the search with an argument-principle winding count.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    ContourTooClose,
    DegenerateNorm,
    IncompleteBasis,
    NoConvergence,
    NonIntegerWinding,
    ZeroWavenumber,
)

# Numerical policy.  Tolerances with dimension 1/length are in units of 1/a
# and get rescaled by the geometry where they are used.
ROOT_TOL = 1e-12          # relative secular residual at accepted roots
DEDUP_TOL = 1e-9          # minimum distance between distinct roots, 1/a
QUAD_TOL = 1e-8           # Siegert-norm quadrature check
DEGENERATE_TOL = 1e-10    # normalization radicand floor
CONTOUR_MARGIN = 1e-3     # root clearance required at the winding contour, 1/a
K_FLOOR = 1e-8            # wavenumbers below this are rejected as k = 0, 1/a
WINDING_NODES = 4096      # starting trapezoid node count for winding integrals
MAX_WINDING_NODES = 2 ** 22
ESCAPE_FACTOR = 10.0      # Newton escape radius = ESCAPE_FACTOR * search radius
ENRICH_ROUNDS = 3         # midpoint-seed rounds when the audit disagrees


class Parity(Enum):
    EVEN = "even"
    ODD = "odd"

    @property
    def sign(self) -> int:
        """+1 for even, -1 for odd: the sign in front of exp(2ika)."""
        return 1 if self is Parity.EVEN else -1


class StateClass(Enum):
    BOUND = "bound"          # k on the positive imaginary axis
    ANTIBOUND = "antibound"  # k on the negative imaginary axis
    NORMAL = "normal"        # Re k != 0; mirror pairs (k, -k*)


@dataclass(frozen=True)
class SystemGeometry:
    """Double well with spikes of strength gamma at x = -a and x = +a.

    a is the half separation (unit of length); gamma > 0 makes wells,
    gamma < 0 barriers, in units of 1/a.
    """

    a: float
    gamma: float

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"half-width a must be positive, got {self.a}")
        if self.gamma == 0:
            raise ValueError("spike strength gamma must be nonzero")


@dataclass(frozen=True)
class ResonantState:
    """One normalized resonant state of the double well."""

    k: complex
    parity: Parity
    kind: StateClass
    amp_in: complex   # B: amplitude of exp(+-ikx) inside |x| <= a
    amp_out: complex  # A: outgoing amplitude for x > a


@dataclass(frozen=True)
class ParityAudit:
    """Argument-principle bookkeeping for one parity channel.

    winding_count is the number of *physical* roots in the disk: the raw
    contour integral minus the known non-physical zero of the odd secular
    function at k = 0 (origin_zero_count, measured on a tiny contour).
    """

    parity: Parity
    winding_count: int
    found_count: int
    contour_radius: float
    contour_nodes: int
    origin_zero_count: int

    @property
    def passed(self) -> bool:
        return self.winding_count == self.found_count


@dataclass(frozen=True)
class CompletenessReport:
    even: ParityAudit
    odd: ParityAudit

    @property
    def passed(self) -> bool:
        return self.even.passed and self.odd.passed


@dataclass(frozen=True)
class BasisSet:
    """All resonant states of a double well inside the disk |k| <= radius."""

    geometry: SystemGeometry
    radius: float
    states: tuple[ResonantState, ...]
    audit: CompletenessReport

    @property
    def size(self) -> int:
        return len(self.states)

    @property
    def wavenumbers(self) -> np.ndarray:
        return np.array([s.k for s in self.states], dtype=complex)

    def of_parity(self, parity: Parity) -> tuple[ResonantState, ...]:
        return tuple(s for s in self.states if s.parity is parity)

    def count(self, kind: StateClass) -> int:
        return sum(1 for s in self.states if s.kind is kind)

    def subset(self, states: tuple[ResonantState, ...], radius: float) -> "BasisSet":
        return BasisSet(self.geometry, radius, states, self.audit)


def secular(k: complex, parity: Parity, geom: SystemGeometry) -> complex:
    """Secular function f(k) = 1 + 2ik/gamma +- exp(2ika); roots are the RSs."""
    return 1.0 + 2j * k / geom.gamma + parity.sign * cmath.exp(2j * k * geom.a)


def secular_derivative(k: complex, parity: Parity, geom: SystemGeometry) -> complex:
    """Analytic df/dk for the secular function."""
    return 2j / geom.gamma + parity.sign * 2j * geom.a * cmath.exp(2j * k * geom.a)


def secular_scale(k: complex, parity: Parity, geom: SystemGeometry) -> float:
    """Magnitude scale of the secular terms, for relative residual checks.

    exp(2ika) is capped at its value on the root curve (|1 + 2ik/gamma|)
    so the scale stays finite deep in the lower half-plane.
    """
    lin = abs(1.0 + 2j * k / geom.gamma)
    w = 2j * k * geom.a
    expo = math.exp(min(w.real, math.log(lin + 1.0) + 1.0))
    return 1.0 + lin + expo


def secular_logderiv(k, parity: Parity, geom: SystemGeometry):
    """f'(k)/f(k), evaluated without overflowing exp(2ika) below the axis.

    Where |exp(2ika)| > 1 the ratio is computed with exp(-2ika) instead,
    so the contour integrand stays finite arbitrarily deep in the lower
    half-plane.  Accepts a scalar or an ndarray.
    """
    s = parity.sign
    k = np.asarray(k, dtype=complex)
    g = 1.0 + 2j * k / geom.gamma
    dg = 2j / geom.gamma
    w = 2j * k * geom.a
    grow = w.real > 0.0
    e = np.exp(np.where(grow, -w, w))
    num = np.where(grow, dg * e + s * 2j * geom.a, dg + s * 2j * geom.a * e)
    den = np.where(grow, g * e + s, g + s * e)
    out = num / den
    if out.ndim == 0:
        return complex(out)
    return out


def newton_refine(f, df, k0: complex, root_tol: float = ROOT_TOL,
                  max_iter: int = 60, escape_radius: float | None = None,
                  scale=None) -> complex:
    """Polish a root of f by Newton-Raphson from seed k0.

    Converged when |f(k)| < root_tol * scale(k); scale defaults to 1
    (absolute residual).  Raises NoConvergence if the iterate escapes
    beyond escape_radius, hits a non-finite value, or runs out of steps.
    """
    if root_tol <= 0:
        raise ValueError("root_tol must be positive")
    k = complex(k0)
    if not cmath.isfinite(k):
        raise NoConvergence(k, math.inf)
    fk = f(k)
    for _ in range(max_iter):
        if not cmath.isfinite(fk):
            raise NoConvergence(k, math.inf)
        tol = root_tol * (scale(k) if scale is not None else 1.0)
        if abs(fk) < tol:
            return k
        d = df(k)
        if d == 0 or not cmath.isfinite(d):
            raise NoConvergence(k, abs(fk))
        k = k - fk / d
        if escape_radius is not None and abs(k) > escape_radius:
            raise NoConvergence(k, abs(fk))
        fk = f(k)
    tol = root_tol * (scale(k) if scale is not None else 1.0)
    if cmath.isfinite(fk) and abs(fk) < tol:
        return k
    raise NoConvergence(k, abs(fk) if cmath.isfinite(fk) else math.inf)


def seed_grid(geom: SystemGeometry, radius: float, parity: Parity) -> list[complex]:
    """Newton seeds covering the disk |k| <= radius for one parity.

    Two families: (i) an asymptotic ladder along the normal-state branch,
    Re k stepped by pi/(4a) (double the nominal pi/(2a) state spacing, so
    every root has a seed within half a step) at the asymptotic depth
    Im k = -ln(2 Re k/|gamma|)/(2a), plus mirror images; (ii) a scan of the
    imaginary axis for bound/antibound candidates.  The parity argument only
    selects which secular function the seeds will be refined against.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    a, gamma = geom.a, geom.gamma
    seeds: list[complex] = []
    step = math.pi / (4 * a)
    n_max = math.ceil(4 * a * radius / math.pi) + 4
    for n in range(1, n_max + 1):
        x = n * step
        y = -math.log(2 * x / abs(gamma)) / (2 * a)
        seeds.append(complex(x, y))
        seeds.append(complex(-x, y))
    axis_step = min(math.pi / (8 * a), abs(gamma) / 8)
    q = -radius
    while q <= radius:
        seeds.append(complex(0.0, q))
        q += axis_step
    return seeds


def _eval_logderiv(logderiv, z: np.ndarray) -> np.ndarray:
    """Evaluate a log-derivative callable on an array, vectorized when possible."""
    try:
        vals = np.asarray(logderiv(z), dtype=complex)
        if vals.shape == z.shape:
            return vals
    except (TypeError, ValueError):
        pass
    return np.array([logderiv(zj) for zj in z], dtype=complex)


def _winding_integral(logderiv, radius: float, nodes: int,
                      center: complex = 0j) -> complex:
    """Trapezoid quadrature of (1/2pi i) contour-integral f'/f dk on a circle."""
    theta = 2 * math.pi * np.arange(nodes) / nodes
    z = center + radius * np.exp(1j * theta)
    vals = _eval_logderiv(logderiv, z)
    # dz = i z dtheta for a centered circle; (1/2pi i) sum f'/f * i(z-c) dtheta
    return np.sum(vals * (z - center)) / nodes


def count_roots_in_disk(f, df, radius: float, nodes: int = WINDING_NODES,
                        logderiv=None, center: complex = 0j,
                        contour_margin: float = CONTOUR_MARGIN) -> int:
    """Number of zeros of an entire function f inside |k - center| = radius.

    Evaluates the argument-principle integral by trapezoid quadrature.  If a
    root sits within contour_margin of the contour (detected by the Newton
    step length |f/f'| at the contour nodes), the radius is nudged outward
    by contour_margin and retried, at most 5 times.  The pre-rounding value
    must land within 0.25 of an integer, else NonIntegerWinding is raised
    (callers respond by doubling nodes).
    """
    if logderiv is None:
        def logderiv(z):
            return df(z) / f(z)

    r = radius
    for _ in range(6):
        probe = min(nodes, 4096)
        theta = 2 * math.pi * np.arange(probe) / probe
        z = center + r * np.exp(1j * theta)
        ld = np.abs(np.array([logderiv(zj) for zj in z], dtype=complex))
        dist = np.min(1.0 / np.maximum(ld, 1e-300))
        if dist >= contour_margin:
            break
        r += contour_margin
    else:
        raise ContourTooClose(
            f"could not place contour: root within {contour_margin} after 5 nudges"
        )

    w = _winding_integral(logderiv, r, nodes, center)
    n = round(w.real)
    if abs(w - n) > 0.25:
        raise NonIntegerWinding(w, nodes)
    return n


def winding_count(logderiv, radius: float, nodes: int = WINDING_NODES,
                  center: complex = 0j) -> tuple[int, int]:
    """Winding integral with node doubling until the 0.25 check passes.

    Returns (count, nodes_used).  Unlike count_roots_in_disk this does not
    nudge the radius: callers pick contours away from roots beforehand.
    """
    while nodes <= MAX_WINDING_NODES:
        w = _winding_integral(logderiv, radius, nodes, center)
        n = round(w.real)
        if abs(w - n) <= 0.25:
            return n, nodes
        nodes *= 2
    raise ContourTooClose(
        f"winding integral at radius {radius} not integral up to {MAX_WINDING_NODES} nodes"
    )


def classify(k: complex, axis_tol: float) -> StateClass:
    """Bound / antibound / normal from the position of k in the plane."""
    if abs(k.real) <= axis_tol:
        return StateClass.BOUND if k.imag > 0 else StateClass.ANTIBOUND
    return StateClass.NORMAL


def normalize_state(k: complex, parity: Parity,
                    geom: SystemGeometry) -> tuple[complex, complex]:
    """Siegert normalization constants (A, B) of a resonant state.

    B = 1/(2 sqrt(+-[a - 1/(gamma + 2ik)])) with + for even, - for odd
    (principal square root), and A = B/(1 + gamma/(2ik)).  Together with
    the secular relation these make the volume-plus-boundary norm equal 1.
    """
    a, gamma = geom.a, geom.gamma
    if abs(k) < K_FLOOR / a:
        raise ZeroWavenumber(f"cannot normalize state at k = {k}")
    radicand = parity.sign * (a - 1.0 / (gamma + 2j * k))
    if abs(radicand) < DEGENERATE_TOL * a:
        raise DegenerateNorm(f"normalization radicand {radicand} at k = {k}")
    B = 1.0 / (2.0 * cmath.sqrt(radicand))
    A = B / (1.0 + gamma / (2j * k))
    return A, B


def wavefunction(state: ResonantState, x, geom: SystemGeometry):
    """Evaluate the piecewise resonant-state wavefunction at x.

    Inside |x| <= a: B (exp(ikx) +- exp(-ikx)); outgoing waves A exp(+-ikx)
    outside, with the odd branch picking up a sign on the left.  Accepts a
    scalar or an ndarray of positions.
    """
    k, A, B = state.k, state.amp_out, state.amp_in
    s = state.parity.sign
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(xa.shape, dtype=complex)
    inner = np.abs(xa) <= geom.a
    right = xa > geom.a
    left = xa < -geom.a
    xi = xa[inner]
    out[inner] = B * (np.exp(1j * k * xi) + s * np.exp(-1j * k * xi))
    out[right] = A * np.exp(1j * k * xa[right])
    out[left] = s * A * np.exp(-1j * k * xa[left])
    if np.ndim(x) == 0:
        return complex(out[0])
    return out


def siegert_norm(state: ResonantState, geom: SystemGeometry,
                 panels: int = 20000) -> complex:
    """Volume integral of phi^2 over [-a, a] plus the Siegert boundary term.

    Composite Gauss-Legendre quadrature; equals 1 for a correctly
    normalized state.  Used by audits and tests.
    """
    a = geom.a
    nodes, weights = np.polynomial.legendre.leggauss(12)
    edges = np.linspace(-a, a, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1] - edges[0])
    x = (mid[:, None] + half * nodes[None, :]).ravel()
    w = np.broadcast_to(half * weights[None, :], (panels, weights.size)).ravel()
    phi = wavefunction(state, x, geom)
    volume = np.sum(w * phi * phi)
    phi_a = wavefunction(state, a, geom)
    phi_ma = wavefunction(state, -a, geom)
    boundary = (phi_a ** 2 + phi_ma ** 2) / (2j * state.k)
    return volume - boundary


def _dedup(roots: list[complex], tol: float) -> list[complex]:
    out: list[complex] = []
    for r in sorted(roots, key=lambda z: (z.real, z.imag)):
        if all(abs(r - p) > tol for p in out):
            out.append(r)
    return out


def _polish_parity_roots(geom: SystemGeometry, radius: float, parity: Parity,
                         seeds: list[complex], axis_tol: float) -> list[complex]:
    """Newton-refine seeds and keep deduplicated in-disk roots.

    Imaginary-axis roots are snapped to the axis; normal roots are folded
    to Re k > 0 and re-emitted as exact mirror pairs (k, -k*), which the
    secular function permits identically for real gamma.
    """
    a = geom.a

    def f(z):
        return secular(z, parity, geom)

    def df(z):
        return secular_derivative(z, parity, geom)

    def scl(z):
        return secular_scale(z, parity, geom)

    escape = ESCAPE_FACTOR * radius
    capture = radius + 10 * CONTOUR_MARGIN / a
    found: list[complex] = []
    for s in seeds:
        try:
            r = newton_refine(f, df, s, ROOT_TOL, 60, escape, scale=scl)
        except NoConvergence:
            continue
        if abs(r) < K_FLOOR / a or abs(r) > capture:
            continue
        found.append(r)

    axis = [complex(0.0, r.imag) for r in found if abs(r.real) <= axis_tol]
    normal = [r if r.real > 0 else -r.conjugate()
              for r in found if abs(r.real) > axis_tol]
    tol = DEDUP_TOL / a
    axis = _dedup(axis, tol)
    normal = _dedup(normal, tol)
    roots = axis + [z for r in normal for z in (r, -r.conjugate())]
    return roots


def _enrich_seeds(roots: list[complex], axis_tol: float) -> list[complex]:
    """Midpoint seeds between adjacent found roots, for audit-mismatch retries."""
    seeds: list[complex] = []
    normal = sorted((r for r in roots if r.real > axis_tol), key=lambda z: z.real)
    for lo, hi in zip(normal, normal[1:]):
        mid = 0.5 * (lo + hi)
        seeds.append(mid)
        seeds.append(-mid.conjugate())
    axis = sorted((r for r in roots if abs(r.real) <= axis_tol), key=lambda z: z.imag)
    for lo, hi in zip(axis, axis[1:]):
        seeds.append(0.5 * (lo + hi))
    return seeds


def _origin_zero_count(geom: SystemGeometry, parity: Parity) -> tuple[int, int]:
    """Multiplicity of the non-physical k = 0 zero of the secular function.

    The odd secular function vanishes identically at k = 0 (a simple zero,
    double exactly at gamma = 1/a); measured with a tiny winding contour of
    radius K_FLOOR so the bookkeeping matches the k-floor rejection rule.
    The even function has f(0) = 2 and needs no correction.
    """
    if parity is Parity.EVEN:
        return 0, 0
    r0 = K_FLOOR / geom.a
    n, nodes = winding_count(
        lambda z: secular_logderiv(z, parity, geom), r0, nodes=512)
    return n, nodes


def _pick_contour_radius(geom: SystemGeometry, radius: float,
                         roots_by_parity: dict[Parity, list[complex]]) -> float:
    """Nudge the audit radius outward until it clears all found roots."""
    margin = CONTOUR_MARGIN / geom.a
    all_roots = [r for roots in roots_by_parity.values() for r in roots]
    r = radius
    for _ in range(6):
        if all(abs(abs(k) - r) >= margin for k in all_roots):
            return r
        r += margin
    raise ContourTooClose(
        f"roots within {margin} of every candidate contour near radius {radius}"
    )


def build_basis(geom: SystemGeometry, radius: float) -> BasisSet:
    """Find, audit, classify, and normalize all resonant states with |k| <= radius.

    Root search: asymptotic + axis seeds, Newton refinement, mirror folding,
    then an argument-principle audit per parity.  On a count mismatch the
    search is retried with midpoint seeds between adjacent found roots
    (ENRICH_ROUNDS times) before raising IncompleteBasis.  The returned
    radius is the audited contour radius (equal to the request unless the
    contour had to be nudged off a root).
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    a = geom.a
    axis_tol = DEDUP_TOL / a

    roots_by_parity: dict[Parity, list[complex]] = {}
    for parity in Parity:
        seeds = seed_grid(geom, radius, parity)
        roots_by_parity[parity] = _polish_parity_roots(
            geom, radius, parity, seeds, axis_tol)

    r_eff = _pick_contour_radius(geom, radius, roots_by_parity)

    audits: dict[Parity, ParityAudit] = {}
    for parity in Parity:
        origin, _ = _origin_zero_count(geom, parity)
        raw, nodes = winding_count(
            lambda z, p=parity: secular_logderiv(z, p, geom), r_eff)
        expected = raw - origin
        in_disk = [r for r in roots_by_parity[parity] if abs(r) <= r_eff]
        for _ in range(ENRICH_ROUNDS):
            if len(in_disk) >= expected:
                break
            extra = _enrich_seeds(in_disk, axis_tol)
            merged = _polish_parity_roots(geom, radius, parity, extra, axis_tol)
            pool = _dedup(in_disk + merged, DEDUP_TOL / a)
            in_disk = [r for r in pool if abs(r) <= r_eff]
        if len(in_disk) != expected:
            raise IncompleteBasis(len(in_disk), expected, parity.value)
        roots_by_parity[parity] = in_disk
        audits[parity] = ParityAudit(
            parity=parity, winding_count=expected, found_count=len(in_disk),
            contour_radius=r_eff, contour_nodes=nodes, origin_zero_count=origin)

    states: list[ResonantState] = []
    for parity in Parity:
        for k in roots_by_parity[parity]:
            A, B = normalize_state(k, parity, geom)
            states.append(ResonantState(
                k=k, parity=parity, kind=classify(k, axis_tol),
                amp_in=B, amp_out=A))

    kind_rank = {StateClass.BOUND: 0, StateClass.ANTIBOUND: 1, StateClass.NORMAL: 2}
    states.sort(key=lambda s: (kind_rank[s.kind], -s.k.imag, s.k.real,
                               s.parity.value))
    report = CompletenessReport(even=audits[Parity.EVEN], odd=audits[Parity.ODD])
    return BasisSet(geometry=geom, radius=r_eff, states=tuple(states),
                    audit=report)


def shrink_basis(basis: BasisSet, target_m: int) -> BasisSet:
    """Restrict a basis to the smallest audited disk holding >= target_m states.

    States are ranked by |k|; the cut radius is placed mid-gap between
    consecutive |k| shells (never splitting a mirror pair, whose members
    share |k|), then the winding audit is re-run at the cut.
    """
    if target_m < 1:
        raise ValueError("target_m must be at least 1")
    if basis.size < target_m:
        raise ValueError(
            f"basis holds {basis.size} states, cannot shrink to {target_m}")
    if basis.size == target_m:
        return basis
    geom = basis.geometry
    by_mod = sorted(basis.states, key=lambda s: abs(s.k))
    mods = [abs(s.k) for s in by_mod]
    j = target_m
    while j < len(mods) and mods[j] - mods[j - 1] < 3 * CONTOUR_MARGIN / geom.a:
        j += 1
    if j == len(mods):
        return basis
    r_cut = 0.5 * (mods[j - 1] + mods[j])
    kept = tuple(s for s in basis.states if abs(s.k) <= r_cut)

    audits = {}
    for parity in Parity:
        origin, _ = _origin_zero_count(geom, parity)
        raw, nodes = winding_count(
            lambda z, p=parity: secular_logderiv(z, p, geom), r_cut)
        expected = raw - origin
        found = sum(1 for s in kept if s.parity is parity)
        if expected != found:
            raise IncompleteBasis(found, expected, parity.value)
        audits[parity] = ParityAudit(
            parity=parity, winding_count=expected, found_count=found,
            contour_radius=r_cut, contour_nodes=nodes, origin_zero_count=origin)
    report = CompletenessReport(even=audits[Parity.EVEN], odd=audits[Parity.ODD])
    return BasisSet(geometry=geom, radius=r_cut, states=kept, audit=report)


def build_basis_with_size(geom: SystemGeometry, target_m: int) -> BasisSet:
    """Build a basis of at least target_m states in the smallest audited disk."""
    radius = max(math.pi * target_m / (8 * geom.a), 3.0 / geom.a)
    for _ in range(6):
        basis = build_basis(geom, radius)
        if basis.size >= target_m:
            return shrink_basis(basis, target_m)
        radius *= 1.3
    raise IncompleteBasis(basis.size, target_m, "target_m resolution")
