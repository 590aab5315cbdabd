"""Numerical evaluation of Z(c) and its moments over decay contours.

The integration contour is a product of two-ray contours, one per variable:
variable j runs from infinity along direction exp(i*theta_minus_j) through
the origin and back out to infinity along exp(i*theta_plus_j). The real
axes are the pair (pi, 0). A contour is admissible when Re S -> -infinity
along every asymptotic direction of the product contour, which makes
int x^j exp(S(x)) dx converge for every monomial prefactor.

Admissibility is certified, not assumed: the leading coefficients of Re S
restricted to a grid of asymptotic directions must be strictly negative,
and numeric probes at large radii must confirm decay. Silent non-decay
would produce garbage values that falsely refute identities which hold
analytically.

Quadrature policy, per one-dimensional ray pair:

  * truncate at the radius where the integrand envelope (|x|^p * e^{Re S})
    has fallen below a small multiple of the requested tolerance times its
    peak, scanning a fixed geometric grid of radii;
  * integrate the two rays as one function of the radius with a globally
    adaptive nested Clenshaw-Curtis rule (33-point panels, embedded
    17-point error estimate), refining the worst panel until every
    component of the (vector-valued) integrand meets tolerance;
  * afterwards check that the outermost part of the range contributes
    negligibly; if not, the truncation radius was too small and the ray is
    re-integrated on an extended range.

For n > 1 the quadrature is iterated; each inner integral is itself a ray
pair, evaluated per outer node, with per-dimension tolerance tol/(2n) so
the stagewise errors sum to at most about tol/2. Separable integrands
(every exponent touching at most one variable) factor into a product of
one-dimensional integrals and skip the iteration entirely.

All evaluation orders are fixed, reductions run over position-sorted
panels, and nothing here threads internally, so results are bitwise
deterministic for fixed inputs and tolerance.
"""

from __future__ import annotations

import cmath
import heapq
import itertools
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .support import CoefficientVector, ExponentIndex, InputError

DEFAULT_MAX_EVALS = 3_000_000

_EXP_CLIP = 700.0  # exp overflow guard; e^700 is still finite in binary64
_TRUNC_FACTOR = 1e-3  # envelope cutoff is tol * this, relative to the peak
_RADIUS_MARGIN = 1.25
_MAX_SEGMENTS = 512
_SCAN_RADII = np.geomspace(2.0**-12, 2.0**40, 209)
_CERT_MARGIN = 1e-9


class ContourError(RuntimeError):
    """No admissible contour, or a proposed contour fails its certificate."""


class FdPerturbationError(ContourError):
    """A finite-difference perturbation left the contour's admissibility class."""


class UnconvergedError(RuntimeError):
    """A quadrature did not reach tolerance within its evaluation budget."""


# ---------------------------------------------------------------------------
# Contours


@dataclass(frozen=True)
class Contour:
    """Product of per-variable ray pairs (theta_minus_j, theta_plus_j)."""

    kind: str
    angles: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if self.kind not in ("real_axes", "rotated_rays"):
            raise InputError(f"unknown contour kind {self.kind!r}")
        angles = []
        for pair in self.angles:
            tm, tp = (float(pair[0]), float(pair[1]))
            if not (math.isfinite(tm) and math.isfinite(tp)):
                raise InputError("contour angles must be finite")
            if abs((tm - tp) % (2.0 * math.pi)) < 1e-12 or abs(
                ((tm - tp) % (2.0 * math.pi)) - 2.0 * math.pi
            ) < 1e-12:
                raise InputError("the two rays of a contour factor must be distinct")
            angles.append((tm, tp))
        object.__setattr__(self, "angles", tuple(angles))

    @classmethod
    def real_axes(cls, n: int) -> "Contour":
        return cls("real_axes", ((math.pi, 0.0),) * n)

    @property
    def n(self) -> int:
        return len(self.angles)

    def to_document(self) -> dict:
        return {"kind": self.kind, "angles": [[tm, tp] for tm, tp in self.angles]}


@dataclass(frozen=True)
class IntegralResult:
    """A quadrature value with its internal error estimate."""

    value: complex
    error: float
    converged: bool
    evals: int

    def to_document(self) -> dict:
        return {
            "re": self.value.real,
            "im": self.value.imag,
            "err": self.error,
            "converged": self.converged,
        }


@dataclass
class MomentTable:
    """Numerically evaluated moments M_j keyed by multi-index; M_0 is Z."""

    coeffs: CoefficientVector
    contour: Contour
    tol: float
    entries: dict[tuple[int, ...], IntegralResult] = field(default_factory=dict)

    def __contains__(self, j) -> bool:
        return tuple(int(x) for x in j) in self.entries

    def result(self, j) -> IntegralResult:
        key = tuple(int(x) for x in j)
        if key not in self.entries:
            raise KeyError(f"missing moment entry {key}")
        return self.entries[key]

    def value(self, j) -> complex:
        return self.result(j).value

    @property
    def z(self) -> IntegralResult:
        return self.result((0,) * self.coeffs.support.n)

    def all_converged(self, indices: Iterable) -> bool:
        return all(self.result(j).converged for j in indices)

    def to_document(self) -> dict:
        keys = sorted(self.entries, key=lambda k: (sum(k), k))
        return {",".join(map(str, k)): self.entries[k].to_document() for k in keys}


# ---------------------------------------------------------------------------
# Nested Clenshaw-Curtis panel rule


def _cc_weights(panels: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes cos(j*pi/panels) and weights integrating Chebyshev exactly."""
    j = np.arange(panels + 1)
    theta = j * math.pi / panels
    nodes = np.cos(theta)
    m = np.arange(panels + 1)
    system = np.cos(np.outer(m, theta))
    rhs = np.zeros(panels + 1)
    rhs[0] = 2.0
    rhs[2::2] = 2.0 / (1.0 - m[2::2] ** 2)
    weights = np.linalg.solve(system, rhs)
    return nodes, weights


_CC_NODES, _CC_W_FINE = _cc_weights(32)
_CC_W_COARSE = _cc_weights(16)[1]


class _EvalBudget:
    __slots__ = ("limit", "used")

    def __init__(self, limit: int) -> None:
        self.limit = int(limit)
        self.used = 0

    def spend(self, k: int) -> None:
        self.used += int(k)

    @property
    def exhausted(self) -> bool:
        return self.used > self.limit


_NOISE_FLOOR = 1e-15  # relative to the uncancelled magnitude scale


def _quadrature_target(tol: float, value_abs, l1) -> np.ndarray:
    """Per-component stopping/convergence threshold.

    The relative tolerance applies against the larger of the value and a
    small multiple of the uncancelled L1 mass (so components that vanish by
    symmetry converge on their absolute scale); the additive noise term
    recognizes that panel sums cannot beat floating-point noise on the L1
    scale, which matters when the two rays cancel each other to rounding.
    """
    return tol * np.maximum(value_abs, 1e-3 * l1) + _NOISE_FLOOR * l1 + 1e-300


def _adaptive_segments(
    f: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray, np.ndarray]],
    a: float,
    b: float,
    tol: float,
    budget: _EvalBudget,
):
    """Globally adaptive panel quadrature of a vector-valued integrand.

    ``f`` returns per point three arrays: the integrand values, their
    uncancelled magnitudes (sum of the two ray magnitudes, the conditioning
    scale accumulated into L1), and a pointwise noise level (inner-stage
    error estimates of an iterated quadrature; zero at the innermost
    level). Refinement targets the rule error only, since the integrated
    noise is irreducible from this level; the returned error includes both.
    Panel reductions run in position order, so the result does not depend
    on the refinement schedule's internal bookkeeping.
    """
    segs: dict[int, tuple] = {}
    heap: list[tuple[float, int]] = []
    counter = itertools.count()

    def make(lo: float, hi: float):
        half = 0.5 * (hi - lo)
        x = 0.5 * (hi + lo) + half * _CC_NODES
        fx, mag, noise = f(x)
        budget.spend(x.size)
        fine = half * np.sum(_CC_W_FINE[:, None] * fx, axis=0)
        coarse = half * np.sum(_CC_W_COARSE[:, None] * fx[::2], axis=0)
        l1 = half * np.sum(_CC_W_FINE[:, None] * mag, axis=0)
        noise_int = half * np.sum(_CC_W_FINE[:, None] * noise, axis=0)
        err = np.abs(fine - coarse)
        return (lo, hi, fine, err, l1, noise_int)

    def push(seg) -> None:
        sid = next(counter)
        segs[sid] = seg
        heapq.heappush(heap, (-float(np.max(seg[3])), sid))

    span = b - a
    cuts = [a, a + span / 16.0, a + span / 4.0, a + span / 2.0, b]
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        push(make(lo, hi))

    converged = False
    while True:
        tot_i = np.sum([s[2] for s in segs.values()], axis=0)
        tot_err = np.sum([s[3] for s in segs.values()], axis=0)
        tot_l1 = np.sum([s[4] for s in segs.values()], axis=0)
        if np.all(tot_err <= _quadrature_target(tol, np.abs(tot_i), tot_l1)):
            converged = True
            break
        if budget.exhausted or len(segs) >= _MAX_SEGMENTS:
            break
        while heap and heap[0][1] not in segs:
            heapq.heappop(heap)
        if not heap:
            break
        _, sid = heapq.heappop(heap)
        lo, hi = segs.pop(sid)[:2]
        mid = 0.5 * (lo + hi)
        push(make(lo, mid))
        push(make(mid, hi))

    ordered = sorted(segs.values(), key=lambda s: s[0])
    value = np.sum([s[2] for s in ordered], axis=0)
    error = np.sum([s[3] for s in ordered], axis=0) + np.sum(
        [s[5] for s in ordered], axis=0
    )
    l1 = np.sum([s[4] for s in ordered], axis=0)
    return value, error, l1, converged, ordered


# ---------------------------------------------------------------------------
# One-dimensional ray pairs


def _accumulate_poly(powers: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Ascending coefficient array of sum values[t] * r**powers[t]."""
    if powers.size == 0:
        return np.zeros(1, dtype=np.complex128)
    out = np.zeros(int(powers.max()) + 1, dtype=np.complex128)
    np.add.at(out, powers.astype(np.int64), values.astype(np.complex128))
    return out


def _ray_pair(cpoly: np.ndarray, pows: np.ndarray, th_minus: float, th_plus: float):
    """Integrand and log-envelope for one ray pair.

    The contour factor contributes, for moment power p,

        f(r) = r^p * (e^{i th_plus (p+1)} e^{S+} - e^{i th_minus (p+1)} e^{S-})

    where S+/- is the slice polynomial evaluated at r * exp(i theta). The
    log-envelope bounds |f| componentwise and stays finite where the direct
    evaluation would overflow or underflow.
    """
    ar = np.arange(len(cpoly))
    cp_p = cpoly * np.exp(1j * th_plus * ar)
    cp_m = cpoly * np.exp(1j * th_minus * ar)
    pw = np.asarray(pows, dtype=np.float64)
    dir_p = np.exp(1j * th_plus * (pw + 1.0))
    dir_m = np.exp(1j * th_minus * (pw + 1.0))

    def f(r: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        sp = npoly.polyval(r, cp_p)
        sm = npoly.polyval(r, cp_m)
        ep = np.exp(np.minimum(sp.real, _EXP_CLIP) + 1j * sp.imag)
        em = np.exp(np.minimum(sm.real, _EXP_CLIP) + 1j * sm.imag)
        rp = r[:, None] ** pw[None, :]
        values = rp * (dir_p[None, :] * ep[:, None] - dir_m[None, :] * em[:, None])
        mags = rp * (np.abs(ep) + np.abs(em))[:, None]
        return values, mags, np.zeros_like(mags)

    def log_envelope(r: np.ndarray) -> np.ndarray:
        re_p = npoly.polyval(r, cp_p).real
        re_m = npoly.polyval(r, cp_m).real
        base = np.logaddexp(re_p, re_m)
        return pw[None, :] * np.log(r)[:, None] + base[:, None]

    return f, log_envelope


def _truncation_radius(log_envelope, tol: float) -> float | None:
    """Radius beyond which every component's envelope is negligible.

    Scans a fixed geometric grid; per component, takes the last radius at
    which the log-envelope is above its peak plus log(tol * _TRUNC_FACTOR).
    Returns None when some component never falls below the cutoff inside
    the scan range (no usable decay).
    """
    env = log_envelope(_SCAN_RADII)
    cutoff = math.log(tol * _TRUNC_FACTOR)
    radius = 0.0
    for c in range(env.shape[1]):
        col = env[:, c]
        peak = float(np.max(col))
        if peak == -math.inf:
            continue  # component is identically zero
        above = np.nonzero(col > peak + cutoff)[0]
        if above.size == 0:
            continue
        last = int(above[-1])
        if last >= len(_SCAN_RADII) - 1:
            return None
        radius = max(radius, float(_SCAN_RADII[last + 1]))
    if radius == 0.0:
        radius = 1.0
    return _RADIUS_MARGIN * radius


def _integrate_ray(f, log_envelope, tol: float, budget: _EvalBudget):
    """Truncate, adapt, and tail-check one ray-pair integral (vector-valued)."""
    radius = None if budget.exhausted else _truncation_radius(log_envelope, tol)
    if radius is None:
        ncomp = log_envelope(_SCAN_RADII[:1]).shape[1]
        return (
            np.zeros(ncomp, dtype=np.complex128),
            np.full(ncomp, np.inf),
            np.zeros(ncomp),
            False,
        )
    for _ in range(3):
        value, error, l1, converged, panels = _adaptive_segments(
            f, 0.0, radius, tol, budget
        )
        tail = np.zeros_like(l1)
        for panel in panels:
            if panel[0] >= 0.72 * radius:
                tail += np.abs(panel[2])
        bound = 10.0 * tol * np.maximum(np.abs(value), 1e-2 * l1) + 1e-300
        if not converged or np.all(tail <= bound):
            break
        radius *= 2.2
    return value, error, l1, converged


# ---------------------------------------------------------------------------
# Admissibility certificate


def _direction_grid(n: int) -> list[tuple[float, ...]]:
    if n == 1:
        return [(1.0,)]
    if n == 2:
        ts = (0.0, 0.25, 0.5, 0.75, 1.0)
        dirs = {(1.0, t) for t in ts} | {(t, 1.0) for t in ts}
        return sorted(dirs)
    if n == 3:
        ts = (0.0, 0.5, 1.0)
        dirs = set()
        for t in ts:
            for u in ts:
                dirs |= {(1.0, t, u), (t, 1.0, u), (t, u, 1.0)}
        return sorted(dirs)
    dirs = set()
    for j in range(n):
        e = [0.0] * n
        e[j] = 1.0
        dirs.add(tuple(e))
        for l in range(n):
            if l != j:
                d = list(e)
                d[l] = 1.0
                dirs.add(tuple(d))
    dirs.add((1.0,) * n)
    return sorted(dirs)


def _nonconstant_terms(coeffs: CoefficientVector):
    exps = coeffs.support.exponent_rows()
    cs = coeffs.vector()
    keep = (cs != 0) & exps.any(axis=1)
    return exps[keep], cs[keep]


def _re_s(exps: np.ndarray, cs: np.ndarray, x: np.ndarray) -> float:
    vals = cs * np.prod(x[None, :] ** exps, axis=1)
    return float(np.sum(vals).real)


def _classify_direction(exps, cs, z: np.ndarray) -> tuple[int, float, dict]:
    """Leading behaviour of Re S(R * z) as R -> infinity.

    Returns (verdict, probe_radius, per_degree) where verdict is +1 for
    certified decay, -1 for certified growth or no decay, per_degree maps
    total degree to (real_sum, abs_scale). Levels whose real part cancels
    to zero within the margin are oscillatory and defer to lower degrees.
    """
    w = cs * np.prod(z[None, :] ** exps, axis=1)
    degs = exps.sum(axis=1)
    per: dict[int, tuple[float, float]] = {}
    for d in sorted(set(int(x) for x in degs)):
        mask = degs == d
        per[d] = (float(np.sum(w[mask]).real), float(np.sum(np.abs(w[mask]))))
    decided = None
    for d in sorted(per, reverse=True):
        re_sum, scale = per[d]
        if scale < 1e-300:
            continue
        if re_sum < -_CERT_MARGIN * scale:
            decided = d
            break
        if re_sum > _CERT_MARGIN * scale:
            return -1, 0.0, per
        # oscillatory level: no real growth, look below
    if decided is None:
        return -1, 0.0, per
    re_star, scale_star = per[decided]
    radius = 2.0
    for d, (_re, scale) in per.items():
        if d < decided and scale > 0.0:
            radius = max(radius, (3.0 * scale / abs(re_star)) ** (1.0 / (decided - d)))
    return 1, min(radius, 1e6), per


def _decay_certificate(
    coeffs: CoefficientVector, angles: Sequence[tuple[float, float]]
) -> tuple[bool, str]:
    """Certify Re S -> -infinity along the product contour's asymptotics."""
    exps, cs = _nonconstant_terms(coeffs)
    n = coeffs.support.n
    if exps.shape[0] == 0:
        return False, "polynomial has no nonconstant terms"
    grid = _direction_grid(n)
    probes: list[tuple[np.ndarray, float]] = []
    for signs in itertools.product((0, 1), repeat=n):
        thetas = np.array([angles[j][signs[j]] for j in range(n)])
        phase = np.exp(1j * thetas)
        for s in grid:
            z = np.asarray(s) * phase
            verdict, radius, _ = _classify_direction(exps, cs, z)
            if verdict < 0:
                return (
                    False,
                    f"no decay along direction {list(s)} with ray signs {list(signs)}",
                )
            probes.append((z, radius))
    for z, radius in probes:
        r1 = _re_s(exps, cs, radius * z)
        r2 = _re_s(exps, cs, 2.0 * radius * z)
        if not (r2 < r1 and r2 < 0.0):
            return False, f"numeric probe failed at radius {radius:.3g}"
    # Slice probes: one variable large, the others pinned at moderate values,
    # guarding the iterated quadrature whose inner variables sit at fixed
    # outer nodes.
    for j in range(n):
        others = [l for l in range(n) if l != j]
        pin_choices = [(0.0, 0.7 * cmath.exp(1j * angles[l][1])) for l in others]
        for sign in (0, 1):
            theta = angles[j][sign]
            z = np.zeros(n, dtype=np.complex128)
            z[j] = cmath.exp(1j * theta)
            verdict, radius, _ = _classify_direction(exps, cs, z)
            if verdict < 0:
                return False, f"no decay along axis {j + 1} ray {theta:.6g}"
            for combo in itertools.product(*pin_choices) if others else [()]:
                x1 = np.zeros(n, dtype=np.complex128)
                x2 = np.zeros(n, dtype=np.complex128)
                for l, val in zip(others, combo):
                    x1[l] = val
                    x2[l] = val
                x1[j] = radius * cmath.exp(1j * theta)
                x2[j] = 2.0 * radius * cmath.exp(1j * theta)
                r1 = _re_s(exps, cs, x1)
                r2 = _re_s(exps, cs, x2)
                if not (r2 < r1 and r2 < 0.0):
                    return (
                        False,
                        f"slice probe failed on axis {j + 1} ray {theta:.6g}",
                    )
    return True, "ok"


def _sector_separated(
    coeffs: CoefficientVector, angles: Sequence[tuple[float, float]]
) -> tuple[bool, str]:
    """Require the two rays of each variable to end in different decay sectors.

    For the top term c * x^d of a variable's one-variable restriction, the
    decay sectors at infinity are the d arcs where cos(d*theta + arg c) < 0.
    If both rays end in the same arc the contour deforms to a point within
    that sector and the integral vanishes identically; such a contour is
    admissible in the decay sense but useless, so it is rejected. Rays
    sitting on a sector boundary (oscillatory top term) are left alone;
    lower-degree terms decide their decay and the sector picture does not
    apply cleanly.
    """
    exps = coeffs.support.exponent_rows()
    cs = coeffs.vector()
    n = coeffs.support.n
    two_pi = 2.0 * math.pi
    for v in range(n):
        pure = (cs != 0) & (exps[:, v] > 0)
        for w in range(n):
            if w != v:
                pure &= exps[:, w] == 0
        cpoly = _accumulate_poly(exps[pure, v], cs[pure])
        mags = np.abs(cpoly)
        if mags[1:].max(initial=0.0) == 0.0:
            continue
        d = int(np.nonzero(mags > 1e-14 * mags.max())[0][-1])
        if d < 1:
            continue
        phi = cmath.phase(complex(cpoly[d]))
        ids = []
        for theta in angles[v]:
            u_total = (d * theta + phi - 0.5 * math.pi) % (two_pi * d)
            u_local = u_total % two_pi
            if not (1e-9 < u_local < math.pi - 1e-9):
                ids = []
                break  # boundary or non-decaying under the top term: no claim
            ids.append(int(u_total // two_pi))
        if len(ids) == 2 and ids[0] == ids[1]:
            return (
                False,
                f"both rays of variable {v + 1} lie in one decay sector; "
                f"the integral vanishes identically on this contour",
            )
    return True, "ok"


def _univariate_ray_ok(cpoly: np.ndarray, theta: float) -> bool:
    """Decay of the top nonvanishing level of a one-variable restriction."""
    mags = np.abs(cpoly)
    if mags[1:].max(initial=0.0) == 0.0:
        return False
    top_scale = mags[1:].max()
    for d in range(len(cpoly) - 1, 0, -1):
        if mags[d] <= 1e-14 * top_scale:
            continue
        re = (cpoly[d] * cmath.exp(1j * d * theta)).real
        if re < -_CERT_MARGIN * mags[d]:
            return True
        if re > _CERT_MARGIN * mags[d]:
            return False
    return False


def _rotation_pairs() -> list[tuple[float, float]]:
    pi = math.pi
    bends = [pi / 4, pi / 8, pi / 6, pi / 12, pi / 3, 3 * pi / 8, 5 * pi / 12]
    straights = [pi / 2, pi / 4, pi / 8, pi / 6, pi / 3]
    pairs: list[tuple[float, float]] = []
    for d in bends:
        pairs.append((pi - d, d))
        pairs.append((pi + d, -d))
    for d in straights:
        pairs.append((pi + d, d))
    seen = set()
    out = []
    for p in pairs:
        if p not in seen:
            seen.add(p)
            out.append(p)
    return out


_ROTATION_PAIRS = _rotation_pairs()


def _contour_from_angles(angles: Sequence[tuple[float, float]]) -> Contour:
    pi = math.pi
    if all(tm == pi and tp == 0.0 for tm, tp in angles):
        return Contour("real_axes", tuple(angles))
    return Contour("rotated_rays", tuple(angles))


def admissible_contour(coeffs: CoefficientVector, policy="auto") -> Contour:
    """Find or certify a decay contour for the given coefficients.

    ``policy`` is "auto" (try the real axes, then a fixed grid of
    rotations), an explicit Contour, or a sequence of per-variable angle
    pairs. Explicit contours are certified and rejected with a reason when
    the certificate fails. Auto search failure means the polynomial has no
    admissible contour in the product-ray search class, not that the
    integral is meaningless; the error says so.
    """
    n = coeffs.support.n
    if isinstance(policy, Contour):
        if policy.n != n:
            raise InputError(f"contour has {policy.n} factors, expected {n}")
        ok, why = _decay_certificate(coeffs, policy.angles)
        if ok:
            ok, why = _sector_separated(coeffs, policy.angles)
        if not ok:
            raise ContourError(f"contour rejected: {why}")
        return policy
    if isinstance(policy, (list, tuple)):
        contour = _contour_from_angles(tuple((float(a), float(b)) for a, b in policy))
        return admissible_contour(coeffs, contour)
    if policy != "auto":
        raise InputError(f"unknown contour policy {policy!r}")

    tried = 0
    seen: set[tuple] = set()

    def attempt(angles) -> Contour | None:
        nonlocal tried
        key = tuple(angles)
        if key in seen:
            return None
        seen.add(key)
        tried += 1
        ok, _why = _decay_certificate(coeffs, angles)
        if ok:
            ok, _why = _sector_separated(coeffs, angles)
        if ok:
            return _contour_from_angles(angles)
        return None

    real_pair = (math.pi, 0.0)
    found = attempt((real_pair,) * n)
    if found:
        return found
    for pair in _ROTATION_PAIRS:
        found = attempt((pair,) * n)
        if found:
            return found
    if n > 1:
        # Per-variable shortlists from the one-variable restrictions of S.
        exps = coeffs.support.exponent_rows()
        cs = coeffs.vector()
        shortlists: list[list[tuple[float, float]]] = []
        for v in range(n):
            pure = (cs != 0) & (exps[:, v] > 0)
            for w in range(n):
                if w != v:
                    pure &= exps[:, w] == 0
            cpoly = _accumulate_poly(exps[pure, v], cs[pure])
            options = []
            for pair in [real_pair] + _ROTATION_PAIRS:
                if len(cpoly) > 1 and _univariate_ray_ok(cpoly, pair[0]) and _univariate_ray_ok(cpoly, pair[1]):
                    options.append(pair)
                if len(options) >= 4:
                    break
            if not options:
                options = [real_pair] + _ROTATION_PAIRS[:3]
            shortlists.append(options)
        for combo in itertools.islice(itertools.product(*shortlists), 256):
            found = attempt(tuple(combo))
            if found:
                return found
    raise ContourError(
        f"no admissible contour in the product-ray search class "
        f"({tried} candidates tried); the polynomial/contour class is unsupported"
    )


# ---------------------------------------------------------------------------
# Moment engine


def _validate_indices(indices, n: int) -> list[tuple[int, ...]]:
    out = []
    for j in indices:
        key = tuple(int(x) for x in j)
        if len(key) != n:
            raise InputError(f"moment index {key} has length {len(key)}, expected {n}")
        if any(x < 0 for x in key):
            raise InputError(f"moment index {key} has negative entries")
        out.append(key)
    return out


def _variable_components(exps: np.ndarray, n: int) -> list[list[int]]:
    """Connected components of variables under 'appears in a common term'."""
    parent = list(range(n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for row in exps:
        touched = np.nonzero(row)[0]
        for v in touched[1:]:
            ra, rb = find(int(touched[0])), find(int(v))
            if ra != rb:
                parent[rb] = ra
    groups: dict[int, list[int]] = {}
    for v in range(n):
        groups.setdefault(find(v), []).append(v)
    return [sorted(g) for g in sorted(groups.values())]


class _MomentEngine:
    """Evaluates a batch of moments sharing one contour and coefficient set.

    The integrand factors over connected components of variables (variables
    coupled by a shared term); each one-variable factor is a single batched
    ray-pair quadrature and each larger factor is an iterated quadrature
    over its own variables. Only genuinely coupled variables pay the
    iterated cost.
    """

    def __init__(
        self,
        coeffs: CoefficientVector,
        contour: Contour,
        indices: Sequence[tuple[int, ...]],
        tol: float,
        max_evals: int,
    ) -> None:
        support = coeffs.support
        if contour.n != support.n:
            raise InputError("contour dimension does not match the support")
        if not (tol > 0.0):
            raise InputError("tolerance must be positive")
        self.n = support.n
        exps = support.exponent_rows()
        cs = coeffs.vector()
        keep = cs != 0
        self.exps = exps[keep]
        self.cs = cs[keep]
        self.angles = contour.angles
        self.indices = _validate_indices(indices, self.n)
        self.pows = np.array(self.indices, dtype=np.int64).reshape(
            len(self.indices), self.n
        )
        self.tol = float(tol)
        self.tol_dim = float(tol) / (2.0 * self.n)
        self.budget = _EvalBudget(max_evals)

    def run(self) -> list[IntegralResult]:
        if self.exps.shape[0] == 0:
            raise InputError("all coefficients vanish; nothing to integrate")
        const_mask = ~self.exps.any(axis=1)
        c0 = complex(np.sum(self.cs[const_mask])) if const_mask.any() else 0j
        factor = cmath.exp(c0)
        ncomp = len(self.indices)
        groups = _variable_components(self.exps, self.n)
        part_vals = np.empty((len(groups), ncomp), dtype=np.complex128)
        part_errs = np.empty((len(groups), ncomp))
        part_l1 = np.empty((len(groups), ncomp))
        for gi, group in enumerate(groups):
            vv, ee, ll, _cv = self._run_group(group)
            part_vals[gi], part_errs[gi], part_l1[gi] = vv, ee, ll
        vals = factor * np.prod(part_vals, axis=0)
        l1s = abs(factor) * np.prod(part_l1, axis=0)
        errs = np.zeros(ncomp)
        for gi in range(len(groups)):
            others = abs(factor) * np.prod(
                np.abs(np.delete(part_vals, gi, axis=0)), axis=0
            )
            errs += part_errs[gi] * others
        targets = _quadrature_target(self.tol, np.abs(vals), l1s)
        out = []
        for c in range(ncomp):
            # Convergence is judged per component: a hard-to-resolve high
            # moment in the batch must not discredit the others. Hard
            # failures (no decay radius, exhausted budget) surface as
            # infinite error estimates and fail this test on their own.
            out.append(
                IntegralResult(
                    value=complex(vals[c]),
                    error=float(errs[c]),
                    converged=bool(errs[c] <= targets[c]),
                    evals=self.budget.used,
                )
            )
        return out

    def _run_group(self, group: list[int]):
        term_mask = self.exps[:, group].any(axis=1)
        sub_exps = self.exps[term_mask][:, group]
        sub_cs = self.cs[term_mask]
        sub_angles = tuple(self.angles[v] for v in group)
        sub_pows = self.pows[:, group]
        if len(group) == 1:
            pows_needed = sorted({int(p) for p in sub_pows[:, 0]})
            cpoly = _accumulate_poly(sub_exps[:, 0], sub_cs)
            th_m, th_p = sub_angles[0]
            f, env = _ray_pair(
                cpoly, np.array(pows_needed, dtype=np.int64), th_m, th_p
            )
            vv, ee, ll, cv = _integrate_ray(f, env, self.tol_dim, self.budget)
            pos = {p: i for i, p in enumerate(pows_needed)}
            sel = [pos[int(p)] for p in sub_pows[:, 0]]
            return vv[sel], ee[sel], ll[sel], cv
        return self._dim(sub_exps, sub_angles, sub_pows, 0, sub_cs.copy())

    # -- iterated path: integrate variable d with earlier ones pinned ------

    def _dim(self, exps, angles, pows, d: int, folded: np.ndarray):
        th_m, th_p = angles[d]
        pw = pows[:, d]
        ndim = exps.shape[1]
        if d == ndim - 1:
            cpoly = _accumulate_poly(exps[:, d], folded)
            f, env = _ray_pair(cpoly, pw, th_m, th_p)
            return _integrate_ray(f, env, self.tol_dim, self.budget)

        # Truncation proxy: the slice's dependence on x_d through terms not
        # involving the inner variables. Admissibility guarantees this proxy
        # carries decaying leading behaviour; the tail re-check in
        # _integrate_ray covers the gap between proxy and true inner decay.
        proxy_mask = (exps[:, d + 1 :] == 0).all(axis=1)
        cproxy = _accumulate_poly(exps[proxy_mask, d], folded[proxy_mask])
        _fp, env = _ray_pair(cproxy, pw, th_m, th_p)

        expcol = exps[:, d]
        dir_p = np.exp(1j * th_p * (pw + 1.0))
        dir_m = np.exp(1j * th_m * (pw + 1.0))
        phase_p = cmath.exp(1j * th_p)
        phase_m = cmath.exp(1j * th_m)
        inner_conv = [True]

        def f(r: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
            out = np.empty((len(r), pows.shape[0]), dtype=np.complex128)
            mags = np.empty((len(r), pows.shape[0]))
            noise = np.empty((len(r), pows.shape[0]))
            for t, rv in enumerate(r):
                vp, ep, lp, cp = self._dim(
                    exps, angles, pows, d + 1, folded * ((rv * phase_p) ** expcol)
                )
                vm, em, lm, cm = self._dim(
                    exps, angles, pows, d + 1, folded * ((rv * phase_m) ** expcol)
                )
                rpw = rv ** pw
                out[t] = rpw * (dir_p * vp - dir_m * vm)
                mags[t] = rpw * (lp + lm)
                # Inner error estimates ride along as a pointwise noise level
                # and are integrated with the same positive weights; a hard
                # inner failure (infinite estimate) poisons exactly the
                # components it affects. Where the monomial prefactor is
                # exactly zero the integrand vanishes regardless of the
                # inner state, so 0 * inf resolves to 0 there.
                with np.errstate(invalid="ignore"):
                    nz = rpw * (ep + em)
                noise[t] = np.where(rpw == 0.0, 0.0, nz)
                inner_conv[0] = inner_conv[0] and cp and cm
            return out, mags, noise

        vals, errs, l1s, conv = _integrate_ray(f, env, self.tol_dim, self.budget)
        return vals, errs, l1s, conv and inner_conv[0]


# ---------------------------------------------------------------------------
# Public entry points


def compute_moments(
    indices: Iterable,
    coeffs: CoefficientVector,
    contour: Contour,
    tol: float = 1e-9,
    *,
    max_evals: int = DEFAULT_MAX_EVALS,
) -> MomentTable:
    """Evaluate a batch of moments in one pass; the zero index is always added."""
    n = coeffs.support.n
    keys = _validate_indices(indices, n)
    zero = (0,) * n
    ordered = sorted(set(keys) | {zero}, key=lambda k: (sum(k), k))
    engine = _MomentEngine(coeffs, contour, ordered, tol, max_evals)
    results = engine.run()
    table = MomentTable(coeffs=coeffs, contour=contour, tol=tol)
    for key, res in zip(ordered, results):
        table.entries[key] = res
    return table


def integrate_Z(
    coeffs: CoefficientVector,
    contour: Contour,
    tol: float = 1e-9,
    *,
    max_evals: int = DEFAULT_MAX_EVALS,
) -> IntegralResult:
    """Z(c) = int exp(S(x)) dx over the contour, with an error estimate."""
    zero = (0,) * coeffs.support.n
    engine = _MomentEngine(coeffs, contour, [zero], tol, max_evals)
    return engine.run()[0]


def moment(
    j,
    coeffs: CoefficientVector,
    contour: Contour,
    tol: float = 1e-9,
    *,
    max_evals: int = DEFAULT_MAX_EVALS,
) -> IntegralResult:
    """int x^j exp(S(x)) dx; the monomial prefactor never affects admissibility."""
    engine = _MomentEngine(coeffs, contour, [tuple(j)], tol, max_evals)
    return engine.run()[0]


def _central_stencil(order: int) -> list[tuple[int, int]]:
    """(offset in half-steps, weight) for the order-th central difference."""
    return [(order - 2 * i, (-1) ** i * math.comb(order, i)) for i in range(order + 1)]


def _normalize_derivs(derivs) -> dict[ExponentIndex, int]:
    if isinstance(derivs, Mapping):
        counted: dict[ExponentIndex, int] = {}
        for k, m in derivs.items():
            m = int(m)
            if m < 0:
                raise InputError(f"negative multiplicity for {tuple(k)}")
            if m:
                counted[tuple(int(x) for x in k)] = m
        return counted
    counted = {}
    for k in derivs:
        key = tuple(int(x) for x in k)
        counted[key] = counted.get(key, 0) + 1
    return counted


def fd_derivative(
    derivs,
    coeffs: CoefficientVector,
    contour: Contour,
    h_rel: float = 1e-5,
    tol: float = 1e-9,
    *,
    richardson: bool | None = None,
    max_evals: int = DEFAULT_MAX_EVALS,
) -> complex:
    """Mixed central finite difference of Z with respect to coefficients.

    ``derivs`` is a multiset of exponents (iterable with repetition, or a
    map exponent -> multiplicity); the empty multiset returns Z itself.
    Steps are h * max(1, |c_k|) per coefficient with one Richardson
    extrapolation level by default for orders up to two. Higher orders are
    allowed but warn: the noise floor of the quadrature is amplified by
    h^-order, so the step is widened to tol^(1/(order+2)) and Richardson is
    skipped.

    Every perturbed coefficient point is re-certified against the contour;
    losing admissibility raises FdPerturbationError naming the perturbation.
    """
    counted = _normalize_derivs(derivs)
    for k in counted:
        coeffs.support.index_of(k)  # raises KeyError for foreign exponents
    order = sum(counted.values())
    if order == 0:
        res = integrate_Z(coeffs, contour, tol, max_evals=max_evals)
        if not res.converged:
            raise UnconvergedError("quadrature budget exhausted for Z")
        return res.value
    if order > 2:
        warnings.warn(
            f"finite difference of order {order}: truncation/noise trade-off "
            f"limits accuracy to about tol^(2/(order+2))",
            stacklevel=2,
        )
    use_rich = richardson if richardson is not None else (order <= 2)
    h_eff = h_rel if order <= 2 else max(h_rel, tol ** (1.0 / (order + 2)))
    ks = sorted(counted, key=lambda k: (sum(k), k))
    steps = {k: h_eff * max(1.0, abs(coeffs.get(k))) for k in ks}
    stencils = [_central_stencil(counted[k]) for k in ks]
    cache: dict[tuple, complex] = {}

    def z_at(quarter_units: tuple[int, ...]) -> complex:
        if quarter_units in cache:
            return cache[quarter_units]
        offsets = {
            k: units * steps[k] * 0.25 for k, units in zip(ks, quarter_units) if units
        }
        shifted = coeffs.with_offsets(offsets)
        if offsets:
            ok, why = _decay_certificate(shifted, contour.angles)
            if not ok:
                raise FdPerturbationError(
                    f"perturbation {offsets} loses contour admissibility: {why}"
                )
        res = integrate_Z(shifted, contour, tol, max_evals=max_evals)
        if not res.converged:
            raise UnconvergedError(
                f"quadrature budget exhausted at perturbed point {offsets}"
            )
        cache[quarter_units] = res.value
        return res.value

    def estimate(scale: int) -> complex:
        # Stencil offsets are in half-steps of h_k; at scale 2 that is the
        # full-step rule D(h), at scale 1 the half-step rule D(h/2).
        total = 0j
        for combo in itertools.product(*stencils):
            units = tuple(off * scale for off, _w in combo)
            weight = 1
            for _off, w in combo:
                weight *= w
            total += weight * z_at(units)
        denom = 1.0
        for k in ks:
            denom *= (steps[k] * scale * 0.5) ** counted[k]
        return total / denom

    d_full = estimate(2)
    if not use_rich:
        return d_full
    d_half = estimate(1)
    return (4.0 * d_half - d_full) / 3.0
