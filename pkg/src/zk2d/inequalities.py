"""Property tests for the functional inequalities behind the energy
estimates, plus the decay rate chi and the smallness threshold m.

Test functions are exact sine polynomials in both variables, so vanishing
on the boundary is structural rather than numerical, and the L2 / gradient
norms follow from Parseval without quadrature error.  L4/L8 norms use a
midpoint tensor grid oversampled past the Nyquist band of u^8, which makes
them exact up to rounding as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import CanonicalData, DomainSpec, InitialData

MARGIN_FLOOR = -1e-10  # quadrature noise floor for "no violation"


def compute_chi(domain: DomainSpec) -> float:
    """Guaranteed exponential decay rate pi^2/(2(1+L)) * [5/L^2 + 1/B^2]."""
    L, B = domain.L, domain.B
    return math.pi ** 2 / (2.0 * (1.0 + L)) * (5.0 / L ** 2 + 1.0 / B ** 2)


@dataclass(frozen=True)
class SinePoly:
    """u(x,y) = sum_{p,q} a[p-1,q-1] sin(p pi x / L) sin(q pi y / B)."""

    domain: DomainSpec
    coeffs: np.ndarray  # (P, Q)

    @property
    def bands(self):
        return self.coeffs.shape

    def _freqs(self):
        P, Q = self.coeffs.shape
        kx = np.arange(1, P + 1) * np.pi / self.domain.L
        ky = np.arange(1, Q + 1) * np.pi / self.domain.B
        return kx, ky

    # Parseval: each product mode carries weight (L/2)(B/2)
    def norm2_l2(self) -> float:
        L, B = self.domain.L, self.domain.B
        return 0.25 * L * B * float((self.coeffs ** 2).sum())

    def norm2_grad(self) -> tuple[float, float]:
        kx, ky = self._freqs()
        L, B = self.domain.L, self.domain.B
        a2 = self.coeffs ** 2
        ux2 = 0.25 * L * B * float((kx[:, None] ** 2 * a2).sum())
        uy2 = 0.25 * L * B * float((ky[None, :] ** 2 * a2).sum())
        return ux2, uy2

    def norm2_uxy(self) -> float:
        kx, ky = self._freqs()
        L, B = self.domain.L, self.domain.B
        return 0.25 * L * B * float((kx[:, None] ** 2 * ky[None, :] ** 2 * self.coeffs ** 2).sum())

    def values(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        P, Q = self.coeffs.shape
        L, B = self.domain.L, self.domain.B
        Sx = np.sin(np.outer(np.asarray(x), np.arange(1, P + 1) * np.pi / L))  # (nx, P)
        Sy = np.sin(np.outer(np.asarray(y), np.arange(1, Q + 1) * np.pi / B))  # (ny, Q)
        return Sy @ self.coeffs.T @ Sx.T  # (ny, nx)

    def _quad_grid(self, oversample: int = 1):
        P, Q = self.coeffs.shape
        L, B = self.domain.L, self.domain.B
        Kx = oversample * (4 * P + 2)
        Ky = oversample * (4 * Q + 2)
        x = (np.arange(1, Kx + 1) - 0.5) * (L / Kx)
        y = (np.arange(1, Ky + 1) - 0.5) * (B / Ky)
        return x, y, (L / Kx) * (B / Ky)

    def lp_norm(self, p: int) -> float:
        """||u||_{L^p} for even p <= 8, exact via the oversampled midpoint rule."""
        x, y, w = self._quad_grid()
        vals = self.values(x, y)
        return float((w * (vals ** p).sum()) ** (1.0 / p))

    def sup2(self) -> float:
        """Grid sup of u^2 (a lower bound on the true sup)."""
        x, y, _ = self._quad_grid(oversample=2)
        return float((self.values(x, y) ** 2).max())


@dataclass(frozen=True)
class SineLine:
    """v(x) = sum_p a[p-1] sin(p pi x / L) on (0, L), v(0) = v(L) = 0."""

    L: float
    coeffs: np.ndarray

    def norm2_l2(self) -> float:
        return 0.5 * self.L * float((self.coeffs ** 2).sum())

    def norm2_dx(self) -> float:
        k = np.arange(1, self.coeffs.size + 1) * np.pi / self.L
        return 0.5 * self.L * float((k ** 2 * self.coeffs ** 2).sum())


@dataclass(frozen=True)
class TestFunctionFamily:
    """Seeded generator of random boundary-vanishing sine polynomials."""

    domain: DomainSpec
    band_x: int = 6
    band_y: int = 6
    amplitude: float = 1.0
    seed: int = 0

    def sample(self, k: int) -> SinePoly:
        rng = np.random.default_rng((self.seed, k))
        coeffs = self.amplitude * rng.standard_normal((self.band_x, self.band_y))
        return SinePoly(self.domain, coeffs)

    def sample_line(self, k: int) -> SineLine:
        rng = np.random.default_rng((self.seed, k, 1))
        return SineLine(self.domain.L, self.amplitude * rng.standard_normal(self.band_x))


def check_ladyzhenskaya(sample: SinePoly, which: str = "l4") -> float:
    """RHS - LHS of the interpolation inequality (nonnegative when it holds).

    l4: ||u||_L4 <= 2^{1/2} ||grad u||^{1/2} ||u||^{1/2}
    l8: ||u||_L8 <= 4^{3/4} ||grad u||^{3/4} ||u||^{1/4}
    """
    l2 = math.sqrt(sample.norm2_l2())
    ux2, uy2 = sample.norm2_grad()
    grad = math.sqrt(ux2 + uy2)
    if which == "l4":
        return 2.0 ** 0.5 * grad ** 0.5 * l2 ** 0.5 - sample.lp_norm(4)
    if which == "l8":
        return 4.0 ** 0.75 * grad ** 0.75 * l2 ** 0.25 - sample.lp_norm(8)
    raise ValueError(f"which must be 'l4' or 'l8', got {which!r}")


def check_steklov(sample: SineLine, L: float | None = None) -> float:
    """||v_x||^2 - (pi/L)^2 ||v||^2 >= 0, with equality exactly on sin(pi x/L)."""
    L = sample.L if L is None else L
    return sample.norm2_dx() - (math.pi / L) ** 2 * sample.norm2_l2()


def check_sup_bound(sample: SinePoly) -> float:
    """2[||u||^2_{H1_0} + ||u_xy||^2] - sup u^2 (sup measured on a fine grid)."""
    ux2, uy2 = sample.norm2_grad()
    bound = 2.0 * (sample.norm2_l2() + ux2 + uy2 + sample.norm2_uxy())
    return bound - sample.sup2()


def run_inequality_suite(family: TestFunctionFamily, n_samples: int) -> dict:
    """Margins of every inequality over n seeded samples.

    Returns arrays keyed 'l4', 'l8', 'sup', 'steklov' plus the violation
    count against the quadrature noise floor.
    """
    out = {name: np.empty(n_samples) for name in ("l4", "l8", "sup", "steklov")}
    for k in range(n_samples):
        u = family.sample(k)
        v = family.sample_line(k)
        out["l4"][k] = check_ladyzhenskaya(u, "l4")
        out["l8"][k] = check_ladyzhenskaya(u, "l8")
        out["sup"][k] = check_sup_bound(u)
        out["steklov"][k] = check_steklov(v)
    out["violations"] = int(sum(int((m < MARGIN_FLOOR).sum()) for m in
                                (out["l4"], out["l8"], out["sup"], out["steklov"])))
    return out


# --- smallness threshold ---------------------------------------------------

@dataclass(frozen=True)
class ThresholdReport:
    """Smallness threshold m, the decay rate chi, and the admissibility flag
    ||u0|| < min(1/2, m), plus the constants fed by the initial data."""

    chi: float
    m: float
    u0_norm: float
    ut0_norm: float
    C0: float
    Cs: float
    admissible: bool


def _threshold_from_quantities(domain, u0_norm, ut0_norm, C0, Cs) -> ThresholdReport:
    L, B = domain.L, domain.B
    chi = compute_chi(domain)
    if ut0_norm == 0.0:
        m = math.inf  # zero datum: admissible by convention
    else:
        num = (math.pi ** 2 / (4.0 * (1.0 + L) ** 2)) * (1.0 / L ** 2 + 1.0 / B ** 2)
        den = 5.0 * 2.0 ** 7 * (1.0 + L) * ut0_norm * (1.0 + 5.0 ** 2 * 2.0 ** 15 * (1.0 + L) ** 6 * ut0_norm)
        m = (num / den) ** (1.0 / 3.0)
    admissible = u0_norm < min(0.5, m)
    return ThresholdReport(chi=chi, m=m, u0_norm=u0_norm, ut0_norm=ut0_norm,
                           C0=C0, Cs=Cs, admissible=admissible)


def _gauss_legendre(n, a, b):
    nodes, weights = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * nodes + 0.5 * (a + b), 0.5 * (b - a) * weights


def _threshold_exact_canonical(u0: CanonicalData, domain: DomainSpec) -> ThresholdReport:
    # all x-integrands are polynomials of degree <= 15: 32-point Gauss is exact
    L, B = domain.L, domain.B
    A, j = u0.A, u0.j
    lam = (j * math.pi / B) ** 2
    x, w = _gauss_legendre(32, 0.0, L)
    p = x * (L - x) ** 2
    dp = (L - x) * (L - 3.0 * x)
    e = 6.0 - lam * dp  # (d_xxx - lam d_x) applied to the x-profile
    iy2, iy4, iy6 = B / 2.0, 3.0 * B / 8.0, 5.0 * B / 16.0

    delta_ux_sq = A ** 2 * float(w @ e ** 2) * iy2
    cubic_sq = A ** 6 * float(w @ (p ** 4 * dp ** 2)) * iy6
    ut0_norm = math.sqrt(delta_ux_sq) + math.sqrt(cubic_sq)

    # C0 = ((1+x), u_t^2)(0) with u_t(0) = -(u0^2 u0x + Delta u0x)
    wx = 1.0 + x
    C0 = (A ** 2 * float(w @ (wx * e ** 2)) * iy2
          + 2.0 * A ** 4 * float(w @ (wx * e * p ** 2 * dp)) * iy4
          + A ** 6 * float(w @ (wx * p ** 4 * dp ** 2)) * iy6)

    u0_norm = math.sqrt(A ** 2 * float(w @ p ** 2) * iy2)
    l2 = A ** 2 * float(w @ p ** 2) * iy2
    ux2 = A ** 2 * float(w @ dp ** 2) * iy2
    uy2 = A ** 2 * lam * float(w @ p ** 2) * iy2
    uxy2 = A ** 2 * lam * float(w @ dp ** 2) * iy2
    Cs = 2.0 * (l2 + ux2 + uy2 + uxy2)
    return _threshold_from_quantities(domain, u0_norm, ut0_norm, C0, Cs)


def _fd_axis(vals: np.ndarray, h: float, deriv: int, axis: int) -> np.ndarray:
    """Sixth-order-accurate derivative along one axis, biased near the edges."""
    from .operators import fd_weights
    half = (deriv + 5) // 2 + 1
    npts = 2 * half + 1
    vals = np.moveaxis(vals, axis, -1)
    n = vals.shape[-1]
    if n < npts:
        raise ValueError(f"need at least {npts} samples along the axis, got {n}")
    out = np.empty_like(vals, dtype=float)
    c_center = fd_weights(np.arange(-half, half + 1), deriv) / h ** deriv
    stacked = np.stack([vals[..., k:n - 2 * half + k] for k in range(npts)], axis=-1)
    out[..., half:n - half] = stacked @ c_center
    for i in range(half):
        c = fd_weights(np.arange(npts) - i, deriv) / h ** deriv
        out[..., i] = vals[..., :npts] @ c
        c = fd_weights(np.arange(npts) - (npts - 1 - i), deriv) / h ** deriv
        out[..., n - 1 - i] = vals[..., n - npts:] @ c
    return np.moveaxis(out, -1, axis)


def _threshold_fd(u0: InitialData, domain: DomainSpec, nx: int = 1024, ny: int = 256) -> ThresholdReport:
    """Oversampled finite-difference evaluation path; works for any datum."""
    L, B = domain.L, domain.B
    x = np.linspace(0.0, L, nx + 1)
    hx = L / nx
    y = (np.arange(1, ny + 1) - 0.5) * (B / ny)
    hy = B / ny
    U = u0.sample(domain, x, y)  # (ny, nx+1)
    ux = _fd_axis(U, hx, 1, axis=1)
    delta_ux = _fd_axis(U, hx, 3, axis=1) + _fd_axis(_fd_axis(U, hy, 2, axis=0), hx, 1, axis=1)
    cubic = U ** 2 * ux
    uy = _fd_axis(U, hy, 1, axis=0)
    uxy = _fd_axis(ux, hy, 1, axis=0)

    def integral(field):
        # midpoint in y, Simpson in x (nx is even)
        col = field.sum(axis=0) * hy
        return float(hx / 3.0 * (col[0] + col[-1] + 4.0 * col[1:-1:2].sum() + 2.0 * col[2:-1:2].sum()))

    ut0 = delta_ux + cubic
    ut0_norm = math.sqrt(integral(delta_ux ** 2)) + math.sqrt(integral(cubic ** 2))
    C0 = integral((1.0 + x)[None, :] * ut0 ** 2)
    u0_norm = math.sqrt(integral(U ** 2))
    Cs = 2.0 * (integral(U ** 2) + integral(ux ** 2) + integral(uy ** 2) + integral(uxy ** 2))
    return _threshold_from_quantities(domain, u0_norm, ut0_norm, C0, Cs)


def compute_threshold_m(u0: InitialData, domain: DomainSpec, method: str = "exact") -> ThresholdReport:
    """Evaluate the smallness threshold m and its ingredients for a datum.

    method='exact' uses analytic derivatives (canonical family only);
    method='fd' differentiates samples with 6th-order stencils on an
    oversampled grid and works for any evaluable datum.  The two paths are
    independent and agree to ~1e-8 relative for analytic data, which is the
    cross-check the test suite pins.
    """
    if method == "exact":
        if isinstance(u0, CanonicalData):
            return _threshold_exact_canonical(u0, domain)
        return _threshold_fd(u0, domain)
    if method == "fd":
        return _threshold_fd(u0, domain)
    raise ValueError(f"method must be 'exact' or 'fd', got {method!r}")
