"""Curves and quadrature contours in the complex w-plane.

Curve family
------------
All contours are assembled from the one-parameter family

    Gamma_alpha(omega) = { w1 + i*(g(w1) + alpha) : w1 real },
    g(w1) = arctan((Re omega / Im omega) * tanh(w1)),

which degenerates to horizontal lines when Re omega = 0.  The integrand of
the field representation is e^{-omega*rho*sinh(w)} times a kernel of at most
linear growth, and on every curve used here the exponential obeys

    |e^{-omega*rho*sinh(w - i*tau)}| <= e^{-C*rho*cosh(Re w)},
    C = (Im omega)^2 * sin(tau0) / |omega|,

uniformly over the relevant tau-window, which is what certifies truncation
of the infinite tails at a computable abscissa Wmax.

Contours provided:

* the Sommerfeld double loop C(omega) = C1 u C2, where C2 descends the strip
  between Gamma_{-5pi/2} and Gamma_{-pi/2} on the left (tails at Re w <= -b,
  vertical link at Re w = -b) and C1 is its image under w -> -w - 3pi*i,
  the right-hand loop between the same two curves;
* the decomposition contour Gamma_{-5pi/2} (left to right) followed by
  Gamma_{-pi/2} (right to left), on which the plane/diffracted splitting of
  the field is computed;
* the arc beta_hat = { w in Gamma_{pi/2-Phi} : Re w >= 0 }, the carrier of
  the jump problem solved by the kernel module.

Quadrature is composite Gauss-Legendre per panel; tail panels are spaced
uniformly in sinh(Re w) so that the oscillation of the exponential factor is
resolved evenly.
"""

from __future__ import annotations

import math
from typing import Callable, Iterable, Optional, Sequence, Tuple

import numpy as np

from .core import PI, TWO_PI, ProblemParams, branch_point, gamma_height, validate_params
from .errors import DomainError, GeometryError, PoleError

_GAUSS_N = 16
_GX, _GW = np.polynomial.legendre.leggauss(_GAUSS_N)


def gamma_point(omega: complex, alpha: float, w1: float) -> complex:
    """Point of Gamma_alpha(omega) at abscissa w1."""
    om = complex(omega)
    if not om.imag > 0.0:
        raise DomainError("gamma_point requires Im omega > 0")
    return w1 + 1j * (gamma_height(om, w1) + alpha)


def _gamma_points(omega: complex, alpha: float, w1: np.ndarray) -> np.ndarray:
    om = complex(omega)
    ratio = om.real / om.imag
    return w1 + 1j * (np.arctan(ratio * np.tanh(w1)) + alpha)


def _gamma_slope(omega: complex, w1: np.ndarray) -> np.ndarray:
    """d/dw1 of the height of Gamma_alpha (independent of alpha)."""
    om = complex(omega)
    ratio = om.real / om.imag
    th = np.tanh(w1)
    return ratio * (1.0 - th * th) / (1.0 + (ratio * th) ** 2)


def decay_rate(omega: complex, tau0: float = PI / 2.0) -> float:
    """The constant C in the tail bound exp(-C*rho*cosh(Re w))."""
    om = complex(omega)
    return om.imag * math.sin(tau0) * om.imag / abs(om)


def truncation_cutoff(omega: complex, tau0: float, rho: float, tol: float) -> float:
    """Smallest Wmax with exp(-C(omega,tau0)*rho*cosh(Wmax)) <= tol."""
    if not (0.0 < tau0 <= PI / 2.0):
        raise DomainError(f"tau0 must be in (0, pi/2], got {tau0}")
    if not rho > 0.0:
        raise DomainError(f"rho must be > 0, got {rho}")
    if not 0.0 < tol < 1.0:
        raise DomainError(f"tol must be in (0,1), got {tol}")
    target = math.log(1.0 / tol) / (decay_rate(omega, tau0) * rho)
    return math.acosh(max(target, 1.0))


class ContourPolyline:
    """Discretized oriented contour with Gauss quadrature data.

    nodes carry (w, dw, weight): the integral of f along the contour is
    sum(f(w) * dw * weight), with dw the tangent times the panel scale and
    weight the reference Gauss-Legendre weight.
    """

    def __init__(
        self,
        w: np.ndarray,
        dw: np.ndarray,
        weight: np.ndarray,
        label: str,
        components: Sequence[Tuple[str, slice]] = (),
        refiner: Optional[Callable[[], "ContourPolyline"]] = None,
    ):
        self.w = np.asarray(w, dtype=complex)
        self.dw = np.asarray(dw, dtype=complex)
        self.weight = np.asarray(weight, dtype=float)
        self.label = label
        self.components = tuple(components)
        self._refiner = refiner
        self._refined: Optional[ContourPolyline] = None
        self.cache: dict = {}
        self.meta: dict = {}

    def __len__(self) -> int:
        return self.w.size

    def integrate(self, fvals: np.ndarray) -> complex:
        return complex(np.sum(np.asarray(fvals) * self.dw * self.weight))

    def component(self, name: str) -> "ContourPolyline":
        for label, sl in self.components:
            if label == name:
                return ContourPolyline(
                    self.w[sl], self.dw[sl], self.weight[sl], f"{self.label}:{name}"
                )
        raise KeyError(f"no component {name!r} in contour {self.label!r}")

    def refined(self) -> "ContourPolyline":
        if self._refiner is None:
            raise GeometryError(f"contour {self.label!r} is not refinable")
        if self._refined is None:
            self._refined = self._refiner()
        return self._refined

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("re_w,im_w,re_dw,im_dw,weight\n")
            for w, dw, wt in zip(self.w, self.dw, self.weight):
                fh.write(
                    f"{w.real:.17g},{w.imag:.17g},{dw.real:.17g},"
                    f"{dw.imag:.17g},{wt:.17g}\n"
                )


def _panel_nodes(breaks: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Composite Gauss nodes/scales/weights on the panels given by breaks."""
    a = np.asarray(breaks[:-1], dtype=float)
    b = np.asarray(breaks[1:], dtype=float)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    s = (mid[:, None] + half[:, None] * _GX[None, :]).ravel()
    scale = np.repeat(half, _GAUSS_N)
    wt = np.tile(_GW, a.size)
    return s, scale, wt


def _tail_breaks(w1_from: float, w1_to: float, n_panels: int) -> np.ndarray:
    """Panel breaks between two abscissas, uniform in sinh(w1)."""
    s0, s1 = math.sinh(w1_from), math.sinh(w1_to)
    return np.arcsinh(np.linspace(s0, s1, n_panels + 1))


def _insert_refinement(breaks: np.ndarray, center: float, min_width: float) -> np.ndarray:
    """Add geometrically shrinking panels around an interior abscissa."""
    lo, hi = breaks[0], breaks[-1]
    if not (lo < center < hi):
        return breaks
    extra = []
    width = 0.4
    while width > min_width:
        extra.extend((center - width, center + width))
        width *= 0.5
    pts = np.concatenate([breaks, [center - min_width, center + min_width], extra])
    pts = pts[(pts >= lo) & (pts <= hi)]
    return np.unique(pts)


def _gamma_piece(
    omega: complex,
    alpha: float,
    w1_from: float,
    w1_to: float,
    n_panels: int,
    refine_centers: Iterable[float] = (),
    min_width: float = 0.02,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    reverse = w1_to < w1_from
    lo, hi = sorted((w1_from, w1_to))
    breaks = _tail_breaks(lo, hi, n_panels)
    for c in refine_centers:
        breaks = _insert_refinement(breaks, c, min_width)
    if reverse:
        breaks = breaks[::-1]
    s, scale, wt = _panel_nodes(breaks)
    w = _gamma_points(omega, alpha, s)
    dw = (1.0 + 1j * _gamma_slope(omega, s)) * scale
    return w, dw, wt


def _vertical_piece(
    x: float, y_from: float, y_to: float, n_panels: int
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    breaks = np.linspace(y_from, y_to, n_panels + 1)
    s, scale, wt = _panel_nodes(breaks)
    w = x + 1j * s
    dw = 1j * scale
    return w, dw, wt


def default_b(p: ProblemParams) -> float:
    """Vertical-link abscissa: the loops need b >= 2|Re p1|; add margin.

    The margin is kept small on purpose: the exponential factor reaches
    magnitude e^{rho*cosh(b)} on parts of the vertical links, so every bit
    of b costs accuracy at large rho through cancellation.
    """
    b1 = abs(branch_point(p, p.k1).p1.real)
    b2 = abs(branch_point(p, p.k2).p1.real)
    return max(2.0 * b1, 2.0 * b2, 0.25) + 0.25


def _concat(pieces):
    ws, dws, wts, comps = [], [], [], []
    pos = 0
    for name, (w, dw, wt) in pieces:
        ws.append(w)
        dws.append(dw)
        wts.append(wt)
        comps.append((name, slice(pos, pos + w.size)))
        pos += w.size
    return (
        np.concatenate(ws),
        np.concatenate(dws),
        np.concatenate(wts),
        comps,
    )


def _certify_tail(
    p: ProblemParams, Wmax: float, rho_min: float, tol: float
) -> None:
    """Check the truncation bound (kernel growth included) at the cut point."""
    C = decay_rate(p.omega)
    kernel_growth = abs(math.sin(p.phi)) / p.phi * (Wmax + TWO_PI) + 3.0
    bound = math.exp(-C * rho_min * math.cosh(Wmax)) * kernel_growth
    if bound > tol:
        raise GeometryError(
            f"tail bound {bound:.3e} exceeds tol {tol:.3e} at Wmax={Wmax:.3f} "
            f"(rho_min={rho_min:g})"
        )


def _check_pole_distance(p: ProblemParams, w: np.ndarray, k: float) -> None:
    """Distance from nodes to the moving kernel pole -p1+pi*i-i*theta.

    As theta sweeps the wedge the pole traces a vertical segment; every
    contour node must clear it by pole_clearance.
    """
    bp = branch_point(p, k)
    x = -bp.p1.real
    y_hi = -bp.p1.imag + PI - p.theta_min
    y_lo = -bp.p1.imag + PI - p.theta_max
    dx = np.abs(w.real - x)
    dy = np.maximum(np.maximum(y_lo - w.imag, w.imag - y_hi), 0.0)
    dist = np.hypot(dx, dy)
    dmin = float(np.min(dist))
    if dmin < p.tol.pole_clearance:
        j = int(np.argmin(dist))
        raise PoleError(
            f"contour node {w[j]:.6g} within {dmin:.3e} of the moving pole "
            f"segment at Re w = {x:.6g}",
            nearest=complex(x, np.clip(w[j].imag, y_lo, y_hi)),
            distance=dmin,
        )


def sommerfeld_double_loop(
    p: ProblemParams,
    b: Optional[float] = None,
    Wmax: Optional[float] = None,
    n: int = 400,
    rho_min: float = 0.25,
    tol: Optional[float] = None,
    rectilinear: bool = False,
) -> ContourPolyline:
    """The double-loop contour C(omega) = C1 u C2.

    C2: along Gamma_{-5pi/2} from -Wmax to -b, up the vertical Re w = -b,
    back along Gamma_{-pi/2} to -Wmax.  C1 is the pointwise image
    -C2 - 3pi*i, i.e. the mirror loop at Re w >= b between the same two
    curve levels, traversed so that both far tails decay.

    With rectilinear=True the Gamma curves are replaced by the horizontal
    lines of the omega=i geometry (the classical rectilinear Sommerfeld
    contour); the integrand still uses the true omega.
    """
    validate_params(p)
    if tol is None:
        tol = p.tol.quad_rel
    if b is None:
        b = default_b(p)
    bmin = max(
        2.0 * abs(branch_point(p, p.k1).p1.real),
        2.0 * abs(branch_point(p, p.k2).p1.real),
    )
    if b < bmin:
        raise DomainError(f"b={b} violates b >= 2|Re p1| = {bmin}")
    if Wmax is None:
        Wmax = truncation_cutoff(p.omega, PI / 2.0, rho_min, tol * 1e-2)
    Wmax = max(Wmax, b + 1.0)
    _certify_tail(p, Wmax, rho_min, tol)

    geom_omega = 1j if rectilinear else p.omega
    n_tail = max(12, n // 24)
    n_vert = max(8, n // 48)

    def build(n_tail=n_tail, n_vert=n_vert):
        a_lo = -5.0 * PI / 2.0
        a_hi = -PI / 2.0
        y_lo = gamma_height(geom_omega, -b) + a_lo
        y_hi = gamma_height(geom_omega, -b) + a_hi
        c2 = [
            ("lower_left_tail", _gamma_piece(geom_omega, a_lo, -Wmax, -b, n_tail)),
            ("left_vertical", _vertical_piece(-b, y_lo, y_hi, n_vert)),
            ("upper_left_tail", _gamma_piece(geom_omega, a_hi, -b, -Wmax, n_tail)),
        ]
        w2, dw2, wt2, comps2 = _concat(c2)
        # C1 = -C2 - 3pi*i, same node order (tangents flip sign with the map).
        w1c = -w2 - 3j * PI
        dw1c = -dw2
        comps1 = [(f"mirror_{name}", slice(sl.start + w2.size, sl.stop + w2.size))
                  for name, sl in comps2]
        w = np.concatenate([w2, w1c])
        dw = np.concatenate([dw2, dw1c])
        wt = np.concatenate([wt2, wt2])
        return w, dw, wt, comps2 + comps1

    w, dw, wt, comps = build()
    _check_pole_distance(p, w, p.k1)
    _check_pole_distance(p, w, p.k2)
    label = "sommerfeld_rectilinear" if rectilinear else "sommerfeld"

    def refine():
        wr, dwr, wtr, compr = build(n_tail * 2, n_vert * 2)
        return ContourPolyline(wr, dwr, wtr, label + "_fine", compr)

    return ContourPolyline(w, dw, wt, label, comps, refiner=refine)


def decomposition_contour(
    p: ProblemParams,
    Wmax: Optional[float] = None,
    n: int = 400,
    rho_min: float = 0.25,
    tol: Optional[float] = None,
) -> ContourPolyline:
    """Gamma_{-5pi/2} traversed left-to-right then Gamma_{-pi/2} right-to-left.

    The second component is refined near Re w = -Re p1, above which the
    moving kernel pole passes when theta crosses 3pi/2.
    """
    validate_params(p)
    if tol is None:
        tol = p.tol.quad_rel
    if Wmax is None:
        Wmax = truncation_cutoff(p.omega, PI / 2.0, rho_min, tol * 1e-2)
    Wmax = max(Wmax, 3.0)
    _certify_tail(p, Wmax, rho_min, tol)
    x_pole = -branch_point(p, p.k1).p1.real
    n_half = max(10, n // 32)

    def build(n_half=n_half):
        lower = _gamma_piece(p.omega, -5.0 * PI / 2.0, -Wmax, Wmax, 2 * n_half)
        upper = _gamma_piece(
            p.omega, -PI / 2.0, Wmax, -Wmax, 2 * n_half,
            refine_centers=(x_pole,), min_width=0.01,
        )
        return _concat([("lower_line", lower), ("upper_line", upper)])

    w, dw, wt, comps = build()
    label = "decomposition"
    # True curve endpoints of the upper line (in traversal order): the Gauss
    # nodes are interior, so near-pole polyline corrections need these.
    ends = (_gamma_points(p.omega, -PI / 2.0, np.array([Wmax, -Wmax])))

    def refine():
        wr, dwr, wtr, compr = build(n_half * 2)
        fine = ContourPolyline(wr, dwr, wtr, label + "_fine", compr)
        fine.meta["upper_ends"] = (complex(ends[0]), complex(ends[1]))
        return fine

    cont = ContourPolyline(w, dw, wt, label, comps, refiner=refine)
    cont.meta["upper_ends"] = (complex(ends[0]), complex(ends[1]))
    return cont


def beta_hat(p: ProblemParams, Wmax: float, n: int) -> ContourPolyline:
    """The jump arc beta_hat: Gamma_{pi/2-Phi} restricted to Re w >= 0.

    Nodes are graded toward both ends (endpoint behavior of the jump density
    and of the conformal image near t=1 is the delicate part).
    """
    validate_params(p)
    if Wmax <= 0 or n <= 0:
        raise DomainError("beta_hat requires Wmax > 0 and n > 0")
    alpha = PI / 2.0 - p.phi
    # Sinusoidal grading of n nodes toward both endpoints.
    u = (1.0 - np.cos(np.linspace(0.0, PI, n))) / 2.0
    w1 = Wmax * u
    w = _gamma_points(p.omega, alpha, w1)
    dw = np.empty(n, dtype=complex)
    tangent = 1.0 + 1j * _gamma_slope(p.omega, w1)
    # Trapezoid-style weights on the irregular grid.
    h = np.diff(w1)
    wt = np.empty(n)
    wt[0] = h[0] / 2.0
    wt[-1] = h[-1] / 2.0
    wt[1:-1] = (h[:-1] + h[1:]) / 2.0
    dw[:] = tangent
    return ContourPolyline(w, dw, wt, "beta_hat")
