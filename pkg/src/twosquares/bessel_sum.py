"""The Gaussian-weighted Bessel sum, its dual forms and L2 functionals.

S(n, m) = sum_k r2(k) J0(2 pi sqrt(n k)) exp(-pi k/m) is computed three
independent ways: the direct sum, the circle average of a product of
periodized Gaussians, and a dual sum over scaled modified Bessel terms.  All
exponentials that pair a huge I0 against a tiny Gaussian are combined
analytically first (the exp(-pi n (sqrt a - sqrt b)^2) form), since the raw
factors overflow doubles already for moderate parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .numerics import (
    DEFAULT_QUADRATURE,
    QuadratureSpec,
    bessel_i0_scaled,
    bessel_j0,
    circle_average,
    gauss_legendre_adaptive,
    theta_direct,
)
from .sieve import R2Table

__all__ = [
    "SumParams",
    "IdentityReport",
    "R2_LINEAR_BOUND",
    "truncation_index",
    "bessel_sum_direct",
    "theta_circle_average",
    "bessel_sum_dual",
    "weber_integral_check",
    "l2_deviation",
    "l2_deviation_weighted",
    "cutoff_from_height",
    "l2_coupling",
]

# sum_{k <= x} r2(k) <= C x for all x >= 1: every lattice point in the disk of
# radius sqrt(x) owns a unit square inside the disk of radius sqrt(x) + 1/sqrt2,
# so the count is at most pi (sqrt x + 1/sqrt2)^2 <= 4 (1 + sqrt2)^2 x.
R2_LINEAR_BOUND = 4.0 * (1.0 + math.sqrt(2.0)) ** 2

# lattice points with radius in [a, a+1) fit in an annulus of width 1 + sqrt2
_ANNULUS_BOUND = 16.0


def truncation_index(scale: float, tail_tol: float) -> int:
    """Smallest cut T with sum_{k > T} r2(k) exp(-pi k/scale) certified below tail_tol.

    The tail is covered block by block: the terms with k in [j*scale, (j+1)*scale)
    are at most exp(-pi j) times the linear r2 partial-sum bound, which leaves a
    closed-form geometric majorant to scan.
    """
    if not (scale > 0 and tail_tol > 0):
        raise ValueError("truncation_index requires scale > 0 and tail_tol > 0")
    q = math.exp(-math.pi)
    lead = R2_LINEAR_BOUND * max(scale, 1.0) / (1.0 - q) ** 2
    j = 0
    while lead * q**j * ((j + 1) - j * q) >= tail_tol:
        j += 1
        if j > 200_000:
            raise ValueError("tail tolerance unreachably small")
    return max(1, math.ceil(j * scale))


@dataclass(frozen=True)
class SumParams:
    """Evaluation point, Gaussian cutoff scale and the certified truncation tail."""

    point: float
    scale: float
    tail_tol: float = 1e-12

    def __post_init__(self):
        if not (math.isfinite(self.point) and self.point >= 0):
            raise ValueError("point must be finite and >= 0")
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise ValueError("scale must be finite and > 0")
        if not (self.tail_tol > 0):
            raise ValueError("tail_tol must be positive")

    @property
    def truncation(self) -> int:
        return truncation_index(self.scale, self.tail_tol)


def _require_r2(r2_table: R2Table, needed: int, who: str) -> None:
    if r2_table.limit < needed:
        raise ValueError(f"{who} needs r2 counts up to {needed}, table stops at {r2_table.limit}")


def bessel_sum_direct(params: SumParams, r2_table: R2Table) -> float:
    """Direct evaluation of the weighted Bessel sum, k = 0 term included."""
    trunc = params.truncation
    _require_r2(r2_table, trunc, "bessel_sum_direct")
    counts = r2_table.counts[: trunc + 1]
    k = np.flatnonzero(counts)
    weights = counts[k] * np.exp(-np.pi * k / params.scale)
    return float(np.sum(weights * bessel_j0(2.0 * np.pi * np.sqrt(params.point * k))))


def theta_circle_average(point: float, scale: float,
                         tail_tol: float = 1e-15,
                         spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Circle average of theta(sqrt(point) sin phi) * theta(sqrt(point) cos phi).

    Equals S(point, scale)/scale; evaluated through theta_direct only, so it is
    an oracle for both Bessel routes.
    """
    if not (point >= 0):
        raise ValueError("point must be >= 0")
    root = math.sqrt(point)

    def integrand(phi):
        return (theta_direct(scale, root * np.sin(phi), tail_tol)
                * theta_direct(scale, root * np.cos(phi), tail_tol))

    return circle_average(integrand, spec)


def _dual_window(point: float, scale: float, tail_tol: float) -> float:
    """Half-width w so that dual-sum terms with |sqrt k - sqrt(point)| > w sum below tail_tol.

    Radii are grouped into unit bands; each band carries at most
    _ANNULUS_BOUND * (radius + 1) lattice points and a Gaussian factor
    exp(-pi scale (w + j)^2), leaving a geometric series in j.
    """
    root = math.sqrt(point)
    w = 0.5
    while True:
        decay = math.exp(-2.0 * math.pi * scale * w)
        lead = (root + w + 2.0) / (1.0 - decay) + decay / (1.0 - decay) ** 2
        bound = 2.0 * scale * _ANNULUS_BOUND * math.exp(-math.pi * scale * w * w) * lead
        if bound < tail_tol:
            return w
        w += 0.25
        if w > 1e6:
            raise ValueError("tail tolerance unreachably small")


def bessel_sum_dual(params: SumParams, r2_table: R2Table) -> float:
    """Dual-side evaluation through scaled modified Bessel terms.

    Each term is r2(k) exp(-pi scale (sqrt k - sqrt point)^2) i0_scaled(...),
    the algebraically stabilized form of the I0 sum; only the radii inside the
    certified Gaussian window contribute.
    """
    n, m = params.point, params.scale
    w = _dual_window(n, m, params.tail_tol)
    root = math.sqrt(n)
    k_lo = int(max(root - w, 0.0) ** 2)
    k_hi = math.ceil((root + w) ** 2)
    _require_r2(r2_table, k_hi, "bessel_sum_dual")
    counts = r2_table.counts[k_lo: k_hi + 1]
    k = np.flatnonzero(counts) + k_lo
    if k.size == 0:
        return 0.0
    roots_k = np.sqrt(k.astype(float))
    gauss = np.exp(-np.pi * m * (roots_k - root) ** 2)
    return float(m * np.sum(counts[k - k_lo] * gauss
                            * bessel_i0_scaled(2.0 * np.pi * m * root * roots_k)))


# ----------------------------------------------------------------------------
# Identity reports
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class IdentityReport:
    """Two routes to one number, with their absolute and relative discrepancy."""

    name: str
    methods: tuple
    lhs: float
    rhs: float
    abs_err: float = field(init=False)
    rel_err: float = field(init=False)

    def __post_init__(self):
        abs_err = abs(self.lhs - self.rhs)
        object.__setattr__(self, "abs_err", abs_err)
        object.__setattr__(self, "rel_err",
                           abs_err / max(1.0, abs(self.lhs), abs(self.rhs)))

    @property
    def label(self) -> str:
        return f"{self.name}[{self.methods[0]} vs {self.methods[1]}]"

    def as_row(self):
        return {"label": self.label, "lhs": self.lhs, "rhs": self.rhs,
                "abs_err": self.abs_err, "rel_err": self.rel_err}


def weber_integral_check(alpha: float, beta: float, gamma: float,
                         spec: QuadratureSpec = DEFAULT_QUADRATURE) -> IdentityReport:
    """Second exponential integral of Weber type, quadrature against closed form.

    int_0^inf exp(-alpha x) J0(2 beta sqrt x) J0(2 gamma sqrt x) dx
        = (1/alpha) exp(-(beta - gamma)^2/alpha) * i0_scaled(2 beta gamma / alpha).
    """
    if not (alpha > 0 and beta >= 0 and gamma >= 0):
        raise ValueError("weber_integral_check requires alpha > 0, beta, gamma >= 0")
    rhs = math.exp(-((beta - gamma) ** 2) / alpha) * bessel_i0_scaled(2.0 * beta * gamma / alpha) / alpha
    # substitute x = u^2: the integrand becomes analytic and Gaussian-decaying
    upper = math.sqrt(math.log(1e14) / alpha)

    def integrand(u):
        return (2.0 * u * np.exp(-alpha * u * u)
                * bessel_j0(2.0 * beta * u) * bessel_j0(2.0 * gamma * u))

    panels = max(8, math.ceil(upper * (2.0 * (beta + gamma) + math.sqrt(alpha)) / 2.0))
    lhs = gauss_legendre_adaptive(integrand, 0.0, upper, spec, initial_panels=panels)
    return IdentityReport("weber", ("quadrature", "closed-form"), lhs, rhs)


# ----------------------------------------------------------------------------
# L2 functionals of S(x, m) - 1
# ----------------------------------------------------------------------------

def _sum_minus_one(u: np.ndarray, scale: float, r2_table: R2Table, trunc: int) -> np.ndarray:
    """S(u^2, scale) - 1 on an array of u = sqrt(x) values."""
    counts = r2_table.counts[: trunc + 1]
    k = np.flatnonzero(counts[1:]) + 1
    if k.size == 0:
        return np.zeros_like(u)
    weights = counts[k] * np.exp(-np.pi * k / scale)
    freq = 2.0 * np.pi * np.sqrt(k.astype(float))
    out = np.empty_like(u)
    chunk = max(1, (1 << 21) // k.size)
    for lo in range(0, u.size, chunk):
        seg = u[lo: lo + chunk]
        out[lo: lo + chunk] = bessel_j0(seg[:, None] * freq[None, :]) @ weights
    return out


def l2_deviation(point: float, scale: float, r2_table: R2Table,
                 spec: QuadratureSpec | None = None,
                 tail_tol: float = 1e-12) -> float:
    """Mean-square deviation of the Bessel sum from 1 over [0, point].

    Integrated in the variable u = sqrt(x), where every term oscillates with a
    fixed frequency at most 2 pi sqrt(truncation); panels are sized to that
    frequency and then doubled until stable.
    """
    if not (point > 0 and scale > 0):
        raise ValueError("l2_deviation requires point > 0 and scale > 0")
    if spec is None:
        spec = QuadratureSpec(target_abs_error=1e-10, target_rel_error=1e-9)
    trunc = truncation_index(scale, tail_tol)
    _require_r2(r2_table, trunc, "l2_deviation")
    upper = math.sqrt(point)

    def integrand(u):
        dev = _sum_minus_one(u, scale, r2_table, trunc)
        return dev * dev * 2.0 * u

    panels = max(4, math.ceil(upper * 2.0 * np.pi * math.sqrt(trunc) / 2.5))
    return gauss_legendre_adaptive(integrand, 0.0, upper, spec, initial_panels=panels)


def l2_deviation_weighted(point: float, scale: float, r2_table: R2Table,
                          tail_tol: float = 1e-12) -> float:
    """Exponentially weighted mean-square deviation over [0, inf), in closed form.

    The double sum (point/pi) * sum r2(j) r2(k) exp(-pi (j+k)/scale)
    exp(-pi point (sqrt j - sqrt k)^2) i0_scaled(2 pi point sqrt(jk)); the
    window covers 100 * scale * ln(point) as in the diagonal/off-diagonal
    split, further cut where the exponential weights certify irrelevance.
    """
    if not (point > 0 and scale > 0):
        raise ValueError("l2_deviation_weighted requires point > 0 and scale > 0")
    if not (tail_tol > 0):
        raise ValueError("tail_tol must be positive")
    window = math.ceil(100.0 * scale * math.log(max(point, 3.0)))
    weight_cut = math.ceil(scale * (math.log(1.0 / tail_tol) + 30.0) / math.pi)
    limit = min(window, weight_cut)
    _require_r2(r2_table, limit, "l2_deviation_weighted")
    counts = r2_table.counts[: limit + 1]
    k = np.flatnonzero(counts[1:]) + 1
    if k.size == 0:
        return 0.0
    r2k = counts[k].astype(float)
    roots = np.sqrt(k.astype(float))
    expo = (-np.pi * (k[:, None] + k[None, :]) / scale
            - np.pi * point * (roots[:, None] - roots[None, :]) ** 2)
    keep = expo > -744.0  # exp underflows to 0 beyond this anyway
    terms = np.zeros_like(expo)
    args = 2.0 * np.pi * point * (roots[:, None] * roots[None, :])
    terms[keep] = (r2k[:, None] * r2k[None, :])[keep] * np.exp(expo[keep]) * bessel_i0_scaled(args[keep])
    return float(point / math.pi * np.sum(terms))


def cutoff_from_height(point: float, height: float) -> float:
    """Cutoff scale 2 n ln(n)/h^2 tuned so the sum reacts to distance-h excursions."""
    if not (point > 1 and height > 0):
        raise ValueError("cutoff_from_height requires point > 1 and height > 0")
    return 2.0 * point * math.log(point) / (height * height)


def l2_coupling(point: float) -> tuple:
    """Height threshold 40 (ln n)^{3/2} and its matching cutoff scale.

    The L2 bound also requires scale >= 1; at desk sizes the raw formula dips
    below 1, so the scale is clamped there to stay inside the hypothesis.
    """
    height = 40.0 * math.log(point) ** 1.5
    return height, max(1.0, cutoff_from_height(point, height))
