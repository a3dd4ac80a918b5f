"""Radial pair potentials and the integral quantities the energy bounds consume.

Units: hbar = 1 and the one-particle kinetic operator is -Laplacian, so the
relative two-body operator is -2 Laplacian + v and every energy is 1/length^2.
All integrals below are over R^3, reduced to 4 pi int ... r^2 dr.

Supported kinds:
    square_well       v(r) = -V0 for r <= R0, 0 beyond
    barrier           v(r) = +V0 for r <= R0, 0 beyond
    gaussian          v(r) = -V0 exp(-r^2 / (2 sigma^2))
    sum_of_gaussians  sum of gaussian terms (V0 may be negative for bumps)
    tabulated         monotone piecewise-cubic through (r, v) samples,
                      constant below the first sample, zero beyond the last
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq
from scipy.special import erfc

from .errors import ConfigError, DivergentNorm

QUAD_ABS_TOL = 1e-12          # declared absolute tolerance of all norm quadratures
DEFAULT_TAIL_TOLERANCE = 1e-12

_KINDS = ("square_well", "barrier", "gaussian", "sum_of_gaussians", "tabulated")


@dataclass(frozen=True)
class RadialPotential:
    """Immutable radial pair potential; construct via the `make` helpers or `from_dict`."""

    kind: str
    V0: float = 0.0
    R0: float = 0.0
    sigma: float = 0.0
    terms: tuple = ()                 # sum_of_gaussians: ((V0, sigma), ...)
    r_table: tuple = ()
    v_table: tuple = ()
    tail_tolerance: float = DEFAULT_TAIL_TOLERANCE

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ConfigError(f"unknown potential kind {self.kind!r}")
        if self.kind in ("square_well", "barrier"):
            if self.R0 <= 0:
                raise ConfigError("R0 must be positive")
        elif self.kind == "gaussian":
            if self.sigma <= 0:
                raise ConfigError("sigma must be positive")
        elif self.kind == "sum_of_gaussians":
            if not self.terms:
                raise ConfigError("sum_of_gaussians needs at least one term")
            for V0, sigma in self.terms:
                if sigma <= 0:
                    raise ConfigError("every term needs sigma > 0")
        elif self.kind == "tabulated":
            r = np.asarray(self.r_table, dtype=float)
            v = np.asarray(self.v_table, dtype=float)
            if r.ndim != 1 or r.size < 2 or r.shape != v.shape:
                raise ConfigError("tabulated kind needs matching 1-d r and v arrays")
            if not np.all(np.diff(r) > 0):
                raise ConfigError("tabulated r grid must be strictly increasing")
            if not (np.all(np.isfinite(r)) and np.all(np.isfinite(v))):
                raise ConfigError("tabulated samples must be finite")
            if r[0] < 0:
                raise ConfigError("tabulated r grid must be nonnegative")

    # -- basic geometry ----------------------------------------------------

    @property
    def scale(self):
        """Characteristic length used for grids and schedules."""
        if self.kind in ("square_well", "barrier"):
            return self.R0
        if self.kind == "gaussian":
            return self.sigma
        if self.kind == "sum_of_gaussians":
            return max(s for _, s in self.terms)
        return float(self.r_table[-1])

    @property
    def support_radius(self):
        """Radius beyond which |4 pi int_R^inf v r^2 dr| <= tail_tolerance."""
        if self.kind in ("square_well", "barrier"):
            return self.R0
        if self.kind == "tabulated":
            return float(self.r_table[-1])
        terms = self.terms if self.kind == "sum_of_gaussians" else ((self.V0, self.sigma),)
        total = sum(_gauss_l1(abs(V0), s) for V0, s in terms)
        if total <= self.tail_tolerance:
            return max(s for _, s in terms)

        def excess(R):
            return sum(abs(_gauss_tail(V0, s, R)) for V0, s in terms) - self.tail_tolerance

        hi = max(s for _, s in terms)
        while excess(hi) > 0:
            hi *= 2.0
        return brentq(excess, hi / 2.0, hi, xtol=1e-12)

    def discontinuities(self):
        """Jump radii of v, used to split steppers and align grids."""
        if self.kind in ("square_well", "barrier"):
            return (self.R0,)
        return ()

    def _interp(self):
        if not hasattr(self, "_pchip"):
            object.__setattr__(
                self,
                "_pchip",
                PchipInterpolator(np.asarray(self.r_table, float), np.asarray(self.v_table, float), extrapolate=False),
            )
        return self._pchip

    # -- evaluation ----------------------------------------------------------

    def __call__(self, r):
        return self.eval_v(r)

    def eval_v(self, r):
        """v(r); accepts scalars or arrays, r >= 0 is the caller's contract."""
        r = np.asarray(r, dtype=float)
        scalar = r.ndim == 0
        r = np.atleast_1d(r)
        if self.kind == "square_well":
            out = np.where(r <= self.R0, -self.V0, 0.0)
        elif self.kind == "barrier":
            out = np.where(r <= self.R0, self.V0, 0.0)
        elif self.kind == "gaussian":
            out = -self.V0 * np.exp(-0.5 * (r / self.sigma) ** 2)
        elif self.kind == "sum_of_gaussians":
            out = np.zeros_like(r)
            for V0, s in self.terms:
                out -= V0 * np.exp(-0.5 * (r / s) ** 2)
        else:
            rt = np.asarray(self.r_table, float)
            vt = np.asarray(self.v_table, float)
            out = np.where(r < rt[0], vt[0], 0.0)
            inside = (r >= rt[0]) & (r <= rt[-1])
            if np.any(inside):
                out = out.astype(float)
                out[inside] = self._interp()(r[inside])
        return float(out[0]) if scalar else out

    # -- integral quantities ---------------------------------------------------

    def l1_norm(self):
        """|v| integrated over R^3."""
        return self.l1_norm_with_error()[0]

    def l1_norm_with_error(self):
        """(norm, quadrature error); the error is 0 for closed-form kinds."""
        if self.kind in ("square_well", "barrier"):
            return abs(self.V0) * (4.0 * math.pi / 3.0) * self.R0**3, 0.0
        if self.kind == "gaussian":
            return _gauss_l1(abs(self.V0), self.sigma), 0.0
        return self._quad_norm(absolute=True, with_error=True)

    def integral_v(self):
        """Signed integral of v over R^3."""
        if self.kind == "square_well":
            return -self.V0 * (4.0 * math.pi / 3.0) * self.R0**3
        if self.kind == "barrier":
            return self.V0 * (4.0 * math.pi / 3.0) * self.R0**3
        if self.kind == "gaussian":
            return -self.V0 * (2.0 * math.pi) ** 1.5 * self.sigma**3
        if self.kind == "sum_of_gaussians":
            return -sum(V0 * (2.0 * math.pi) ** 1.5 * s**3 for V0, s in self.terms)
        return self._quad_norm(absolute=False)

    def tail_integral(self, R):
        """4 pi int_R^inf v r^2 dr."""
        if R <= 0:
            raise ConfigError("tail radius must be positive")
        if self.kind in ("square_well", "barrier"):
            if R >= self.R0:
                return 0.0
            sign = -1.0 if self.kind == "square_well" else 1.0
            return sign * self.V0 * (4.0 * math.pi / 3.0) * (self.R0**3 - R**3)
        if self.kind == "gaussian":
            return _gauss_tail(self.V0, self.sigma, R)
        if self.kind == "sum_of_gaussians":
            return sum(_gauss_tail(V0, s, R) for V0, s in self.terms)
        if R >= self.r_table[-1]:
            return 0.0
        return self._quad_norm(absolute=False, lo=R)

    def _quad_norm(self, absolute, lo=0.0, with_error=False):
        hi = self.support_radius
        if lo >= hi:
            return (0.0, 0.0) if with_error else 0.0
        if absolute:
            integrand = lambda r: 4.0 * math.pi * abs(self.eval_v(r)) * r * r
        else:
            integrand = lambda r: 4.0 * math.pi * self.eval_v(r) * r * r
        pts = [p for p in self.discontinuities() if lo < p < hi]
        val, err = quad(integrand, lo, hi, points=pts or None, epsabs=QUAD_ABS_TOL, epsrel=1e-11, limit=400)
        if not math.isfinite(val) or err > max(1e-9, 1e-8 * abs(val)):
            raise DivergentNorm(f"norm quadrature error {err:.2e} exceeds budget for kind {self.kind}")
        # remaining true tail is below tail_tolerance by construction of support_radius
        err = err + self.tail_tolerance
        return (val, err) if with_error else val

    def check_assumptions(self):
        """Finiteness report for the integrability requirements on v and v_-.

        Returns a dict with the computed values and pass flags; never raises.
        The 3/2-power check on the attractive part looks for blow-up of the
        head of the integral as the lower cutoff shrinks, which is how a
        divergent sampled power law manifests through a bounded interpolant.
        """
        report = {"l1_pass": True, "l1_norm": None, "l32_pass": True, "l32_integral": None}
        try:
            report["l1_norm"] = self.l1_norm()
        except DivergentNorm:
            report["l1_pass"] = False

        def neg_part_pow(r):
            v = np.minimum(np.asarray(self.eval_v(r), dtype=float), 0.0)
            return 4.0 * math.pi * np.abs(v) ** 1.5 * np.asarray(r) ** 2

        hi = self.support_radius
        if self.kind == "tabulated":
            lo0 = max(float(self.r_table[0]), 1e-300)
        else:
            lo0 = 1e-8 * self.scale
        # dyadic head increments toward the origin end of the data
        anchor = min(hi, 64.0 * lo0) if self.kind == "tabulated" else min(hi, 1e-2 * self.scale)
        heads = []
        edges = [anchor]
        while edges[-1] / 2.0 > lo0:
            edges.append(edges[-1] / 2.0)
        edges.append(lo0)
        for a, b in zip(edges[1:], edges[:-1]):
            val = quad(lambda r: float(neg_part_pow(r)), a, b, epsabs=1e-13, epsrel=1e-9, limit=200)[0]
            heads.append(val)
        growth = [heads[i + 1] / heads[i] for i in range(len(heads) - 1) if heads[i] > 0]
        diverging = len(growth) >= 3 and all(g > 1.15 for g in growth[-3:])
        body = quad(lambda r: float(neg_part_pow(r)), anchor, hi, epsabs=1e-13, epsrel=1e-9, limit=400)[0]
        report["l32_integral"] = body + sum(heads)
        report["l32_pass"] = not diverging and math.isfinite(report["l32_integral"])
        report["passed"] = bool(report["l1_pass"] and report["l32_pass"])
        return report

    # -- serialization ---------------------------------------------------------

    def to_dict(self):
        d = {"kind": self.kind}
        if self.kind in ("square_well", "barrier"):
            d.update(V0=self.V0, R0=self.R0)
        elif self.kind == "gaussian":
            d.update(V0=self.V0, sigma=self.sigma)
        elif self.kind == "sum_of_gaussians":
            d["terms"] = [{"V0": V0, "sigma": s} for V0, s in self.terms]
        else:
            d.update(r=list(self.r_table), v=list(self.v_table))
        return d

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict) or "kind" not in d:
            raise ConfigError("potential description must be an object with a 'kind' field")
        kind = d["kind"]
        try:
            if kind in ("square_well", "barrier"):
                return cls(kind=kind, V0=float(d["V0"]), R0=float(d["R0"]))
            if kind == "gaussian":
                return cls(kind=kind, V0=float(d["V0"]), sigma=float(d["sigma"]))
            if kind == "sum_of_gaussians":
                terms = tuple((float(t["V0"]), float(t["sigma"])) for t in d["terms"])
                return cls(kind=kind, terms=terms)
            if kind == "tabulated":
                return cls(kind=kind, r_table=tuple(map(float, d["r"])), v_table=tuple(map(float, d["v"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad potential description: {exc}") from exc
        raise ConfigError(f"unknown potential kind {kind!r}")


def load_potential(path):
    """Read a potential description from a JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        return RadialPotential.from_dict(json.load(fh))


def square_well(V0, R0):
    return RadialPotential(kind="square_well", V0=V0, R0=R0)


def barrier(V0, R0):
    return RadialPotential(kind="barrier", V0=V0, R0=R0)


def gaussian(V0, sigma):
    return RadialPotential(kind="gaussian", V0=V0, sigma=sigma)


def sum_of_gaussians(terms):
    return RadialPotential(kind="sum_of_gaussians", terms=tuple((float(a), float(b)) for a, b in terms))


def tabulated(r, v):
    return RadialPotential(kind="tabulated", r_table=tuple(map(float, r)), v_table=tuple(map(float, v)))


def _gauss_l1(V0, sigma):
    return abs(V0) * (2.0 * math.pi) ** 1.5 * sigma**3


def _gauss_tail(V0, sigma, R):
    x = R / sigma
    shell = x * math.exp(-0.5 * x * x) + math.sqrt(math.pi / 2.0) * erfc(x / math.sqrt(2.0))
    return -V0 * 4.0 * math.pi * sigma**3 * shell
