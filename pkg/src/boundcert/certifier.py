"""Rigorous negative upper bound for the N-boson ground-state energy.

The trial state is phi(t) prod_k g(x_k) with t the minimum pairwise distance,
phi the extended ball minimizer (equal to 1 beyond its radius R), and g a
smooth normalized bump of width L >> R. Expanding the energy of that state
gives the closed-form bound

    B(N, L) = N(N-1)/2 * I_L
            + (1+c) N [ lap_neg / L^2
                        + (pi/3) N^2 R^3 ||v||_1 q_L (N q_L + 4 m_L) ]

with I_L the pair-kernel integral int h(r) C_L(r) d^3r, h = 2 phi'^2 + v phi^2,
C_L the autocorrelation of g^2, q_L = ||g||_4^4, m_L = ||g||_inf^2, c the
excess sup of phi^2 above 1, and lap_neg the L^1 norm of the negative part of
g Lap g. Every N- and L-dependence is explicit, so B < 0 at a concrete (N, L)
is a finite computation: since I_L -> b / L^3 with b = 8 pi a_R + tail < 0
while the error terms decay faster in L per particle pair, certifying windows
always open once the scattering length is negative.

All g-dependent constants are evaluated for the unit profile g0 and scaled
exactly: g(x) = L^{-3/2} g0(x/L) gives q_L = q0/L^3, m_L = m0/L^3,
lap_neg = lap0/L^2 and C_L(r) = C0(r/L)/L^3.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .errors import (
    ConfigError,
    InconsistentB,
    NotCertifiable,
    NotConverged,
    SearchExhausted,
)
from .scattering import find_negative_b_radius, limit_a

PROFILE_NAMES = ("cos2_bump", "quartic_bump")
_C0_GRID_SIZE = 2049
_C0_CACHE = {}
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(40)


@dataclass(frozen=True)
class TrialProfile:
    """Unit-width bump g0 with every constant the energy bound consumes.

    g0 is supported on the unit ball and normalized to int g0^2 = 1; the
    closed-form pieces (amplitude, cumulative weight W, derivative ratios)
    are exact, the remaining constants are fixed-order quadratures far below
    the bound tolerances.
    """

    name: str
    amplitude_sq: float          # g0(0)^2
    norm4_4: float               # int g0^4 d3x, written q0
    norm_inf_sq: float           # sup g0^2, written m0
    lap_neg_l1: float            # int max(0, -g0 Lap g0) d3x
    grad_sq: float               # int |grad g0|^2 d3x
    lip_C: float                 # Lipschitz constant of C0
    lap_sign_radius: float       # g0 Lap g0 < 0 exactly inside this radius
    g0: object = field(repr=False)
    dlog_g0: object = field(repr=False)       # g0'/g0
    lap_ratio: object = field(repr=False)     # Lap g0 / g0
    cumweight: object = field(repr=False)     # W(t) = int_0^t tau g0(tau)^2 dtau

    def c0_spline(self):
        """Cubic interpolant of the unit autocorrelation C0 on [0, 2]."""
        cached = _C0_CACHE.get(self.name)
        if cached is None:
            s = np.linspace(0.0, 2.0, _C0_GRID_SIZE)
            vals = np.array([self._c0_exact(x) for x in s])
            spline = CubicSpline(s, vals, bc_type=((1, 0.0), (1, 0.0)))
            cached = (s, vals, spline)
            _C0_CACHE[self.name] = cached
        return cached

    def _c0_exact(self, rho):
        """C0(rho) = int g0^2(x) g0^2(x + rho e) d3x by bipolar reduction."""
        if rho <= 0.0:
            return self.norm4_4
        if rho >= 2.0:
            return 0.0
        lo, hi = max(0.0, rho - 1.0), 1.0
        if hi <= lo:
            return 0.0
        W = self.cumweight
        g0 = self.g0

        def integrand(s):
            upper = W(np.minimum(s + rho, 1.0))
            lower = W(np.abs(s - rho))
            return s * g0(s) ** 2 * (upper - lower)

        # split at the kinks of the W arguments so every piece is analytic
        pts = sorted({lo, hi, *(p for p in (1.0 - rho, rho) if lo < p < hi)})
        total = 0.0
        for a, b in zip(pts[:-1], pts[1:]):
            x = 0.5 * (b - a) * _GL_NODES + 0.5 * (a + b)
            total += 0.5 * (b - a) * float(np.dot(_GL_WEIGHTS, integrand(x)))
        return 2.0 * math.pi / rho * total


def _build_cos2():
    A2 = 1.0 / (4.0 * math.pi * (0.125 - 15.0 / (16.0 * math.pi**2)))
    A = math.sqrt(A2)

    def g0(s):
        s = np.asarray(s, dtype=float)
        return np.where(s < 1.0, A * np.cos(np.pi * np.minimum(s, 1.0) / 2.0) ** 2, 0.0)

    def dlog(s):
        s = np.asarray(s, dtype=float)
        return -np.pi * np.tan(np.pi * s / 2.0)

    def lap_ratio(s):
        s = np.asarray(s, dtype=float)
        num = -(np.pi**2 / 2.0) * np.cos(np.pi * s) - np.pi**2 * np.sinc(s)
        return num / np.cos(np.pi * s / 2.0) ** 2

    def W(t):
        t = np.minimum(np.asarray(t, dtype=float), 1.0)
        pi = np.pi
        part1 = 3.0 * t**2 / 16.0
        part2 = 0.5 * ((np.cos(pi * t) - 1.0) / pi**2 + t * np.sin(pi * t) / pi)
        part3 = 0.125 * ((np.cos(2 * pi * t) - 1.0) / (4 * pi**2) + t * np.sin(2 * pi * t) / (2 * pi))
        return A2 * (part1 + part2 + part3)

    return A2, g0, dlog, lap_ratio, W


def _build_quartic():
    A2 = 3465.0 / (512.0 * math.pi)
    A = math.sqrt(A2)

    def g0(s):
        s = np.asarray(s, dtype=float)
        return np.where(s < 1.0, A * (1.0 - np.minimum(s, 1.0) ** 2) ** 2, 0.0)

    def dlog(s):
        s = np.asarray(s, dtype=float)
        return -4.0 * s / (1.0 - s**2)

    def lap_ratio(s):
        s = np.asarray(s, dtype=float)
        return 4.0 * (5.0 * s**2 - 3.0) / (1.0 - s**2) ** 2

    def W(t):
        t = np.minimum(np.asarray(t, dtype=float), 1.0)
        return A2 * (1.0 - (1.0 - t**2) ** 5) / 10.0

    return A2, g0, dlog, lap_ratio, W


def _radial_gl(fn, a, b, panels=32):
    """Fixed-order panel quadrature, exact to machine for smooth radial factors."""
    edges = np.linspace(a, b, panels + 1)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        x = 0.5 * (hi - lo) * _GL_NODES + 0.5 * (lo + hi)
        total += 0.5 * (hi - lo) * float(np.dot(_GL_WEIGHTS, fn(x)))
    return total


def build_trial_profile(name="cos2_bump"):
    if name == "cos2_bump":
        A2, g0, dlog, lap_ratio, W = _build_cos2()

        def glapg(s):
            c2 = np.cos(np.pi * s / 2.0) ** 2
            return A2 * c2 * (-(np.pi**2 / 2.0) * np.cos(np.pi * s) - np.pi**2 * np.sinc(s))

        def grad_integrand(s):
            return (A2 * (np.pi / 2.0) ** 2) * np.sin(np.pi * s) ** 2 * s * s

    elif name == "quartic_bump":
        A2, g0, dlog, lap_ratio, W = _build_quartic()

        def glapg(s):
            return A2 * (1.0 - s**2) ** 2 * 4.0 * (5.0 * s**2 - 3.0)

        def grad_integrand(s):
            return A2 * 16.0 * s**2 * (1.0 - s**2) ** 2 * s * s

    else:
        raise ConfigError(f"unknown trial profile {name!r}; choose from {PROFILE_NAMES}")

    r_star = brentq(lambda s: float(glapg(s)), 1e-9, 1.0 - 1e-12)
    lap_neg = 4.0 * math.pi * _radial_gl(lambda s: -glapg(s) * s * s, 0.0, r_star)
    grad_sq = 4.0 * math.pi * _radial_gl(grad_integrand, 0.0, 1.0)
    norm4_4 = 4.0 * math.pi * _radial_gl(lambda s: g0(s) ** 4 * s * s, 0.0, 1.0)
    norm2 = 4.0 * math.pi * _radial_gl(lambda s: g0(s) ** 2 * s * s, 0.0, 1.0)
    # |C0'| <= ||grad g0^2||_2 ||g0^2||_2 by Cauchy-Schwarz on the shifted product
    grad_g2_sq = 4.0 * math.pi * _radial_gl(
        lambda s: (2.0 * g0(s)) ** 2 * (g0(s) * dlog(s)) ** 2 * s * s, 0.0, 1.0 - 1e-14
    )
    lip_C = math.sqrt(grad_g2_sq * norm4_4)
    if abs(norm2 - 1.0) > 1e-10:
        raise ConfigError(f"profile {name} normalization drifted: int g0^2 = {norm2!r}")

    return TrialProfile(
        name=name,
        amplitude_sq=float(g0(0.0) ** 2),
        norm4_4=norm4_4,
        norm_inf_sq=float(g0(0.0) ** 2),
        lap_neg_l1=lap_neg,
        grad_sq=grad_sq,
        lip_C=lip_C,
        lap_sign_radius=r_star,
        g0=g0,
        dlog_g0=dlog,
        lap_ratio=lap_ratio,
        cumweight=W,
    )


@dataclass(frozen=True)
class CLFunction:
    """Autocorrelation of g_L^2 as a callable of physical separation."""

    profile: TrialProfile
    L: float

    def __call__(self, r):
        _, _, spline = self.profile.c0_spline()
        s = np.asarray(r, dtype=float) / self.L
        out = np.where(s < 2.0, spline(np.minimum(s, 2.0)), 0.0)
        return np.maximum(out, 0.0) / self.L**3

    @property
    def value_at_zero(self):
        return self.profile.norm4_4 / self.L**3

    def total_mass(self):
        """int C_L d3x; must equal (int g_L^2)^2 = 1 up to spline error."""
        s, vals, _ = self.profile.c0_spline()
        from scipy.integrate import simpson

        return 4.0 * math.pi * float(simpson(vals * s * s, x=s))

    def lipschitz(self):
        return self.profile.lip_C / self.L**4


def autocorrelation_g2(profile, L):
    if L <= 0:
        raise ConfigError("L must be positive")
    return CLFunction(profile=profile, L=L)


@dataclass(frozen=True)
class HProfile:
    """Exact cell masses of h = 2 phi'^2 + v phi^2 against the 3-d measure.

    masses[i] integrates h over the radial cell exactly for the piecewise
    linear ball minimizer (the kinetic part via the summation-by-parts
    boundary identity, the potential part by the same midpoint rule the
    solver minimized), so the masses telescope to b with no quadrature gap.
    """

    edges: np.ndarray
    mids: np.ndarray
    widths: np.ndarray
    masses: np.ndarray
    masses_abs: np.ndarray
    b_check: float
    R: float
    r_outer: float
    metadata: dict = field(default_factory=dict)


def build_h(sol, v, extend_cells=512):
    """Cell-mass representation of the pair kernel for a solved ball profile."""
    h, g, ubar, mid = sol.cell_quantities()
    edges = sol.edges
    u_sq_over_r = np.zeros_like(sol.u)
    u_sq_over_r[1:] = sol.u[1:] ** 2 / edges[1:]
    m_kin = 8.0 * math.pi * (g * g * h - np.diff(u_sq_over_r))
    vm = np.asarray(v(mid), dtype=float)
    m_pot = 4.0 * math.pi * vm * ubar * ubar * h
    masses = m_kin + m_pot
    masses_abs = np.maximum(m_kin, 0.0) + np.abs(m_pot)

    all_edges = edges
    residual = v.tail_integral(sol.R)
    if v.support_radius > sol.R * (1.0 + 1e-12):
        ext = np.linspace(sol.R, v.support_radius, extend_cells + 1)
        tails = np.array([v.tail_integral(p) for p in ext])
        m_ext = tails[:-1] - tails[1:]
        masses = np.concatenate([masses, m_ext])
        masses_abs = np.concatenate([masses_abs, np.abs(m_ext)])
        all_edges = np.concatenate([edges, ext[1:]])
        residual = tails[-1]

    b_check = float(np.sum(masses)) + residual
    if abs(b_check - sol.b) > 1e-8 * max(1e-12, abs(sol.b)):
        raise InconsistentB(
            f"cell masses sum to {b_check!r} but the solver reported b = {sol.b!r}"
        )
    return HProfile(
        edges=all_edges,
        mids=0.5 * (all_edges[:-1] + all_edges[1:]),
        widths=np.diff(all_edges),
        masses=masses,
        masses_abs=masses_abs,
        b_check=b_check,
        R=sol.R,
        r_outer=float(all_edges[-1]),
        metadata={"tail_residual": residual, "n_cells": masses.size},
    )


def first_term(hprof, C_L):
    """(I_L, error): pair-kernel integral int h(r) C_L(r) d3x.

    The value pairs exact cell masses with the kernel at cell midpoints; the
    error estimate adds a pair-merged coarse difference to the rigorous
    Lipschitz midpoint bound sum |m_i| lip(C_L) w_i / 2.
    """
    masses, mids, widths = hprof.masses, hprof.mids, hprof.widths
    I = float(np.dot(masses, C_L(mids)))

    n = masses.size
    pairs = n // 2
    mc = masses[0 : 2 * pairs : 2] + masses[1 : 2 * pairs : 2]
    centers = 0.5 * (hprof.edges[0 : 2 * pairs : 2] + hprof.edges[2 : 2 * pairs + 1 : 2])
    I_coarse = float(np.dot(mc, C_L(centers)))
    if n % 2:
        I_coarse += float(masses[-1] * C_L(mids[-1]))

    err = abs(I - I_coarse) + C_L.lipschitz() * float(np.dot(hprof.masses_abs, widths)) / 2.0
    if I != 0.0 and err > 1e-3 * abs(I):
        raise NotConverged(f"pair-kernel integral error {err:.3e} against value {I:.3e}")
    return I, err


@dataclass(frozen=True)
class BoundEvaluation:
    """The explicit energy bound at one (N, L), with its numerical budget."""

    N: int
    L: float
    B: float
    term_main: float
    term_kinetic: float
    term_threebody: float
    I_L: float
    quadrature_error: float
    error_breakdown: dict
    c: float
    R: float
    profile_name: str

    @property
    def certifies(self):
        return self.B + self.quadrature_error < 0.0


def _evaluate_bound(N, L, profile, sol, v1, v1_err, I_L, I_err):
    c = sol.c
    R = sol.R
    q_L = profile.norm4_4 / L**3
    m_L = profile.norm_inf_sq / L**3
    term_main = 0.5 * N * (N - 1) * I_L
    term_kinetic = (1.0 + c) * N * profile.lap_neg_l1 / L**2
    term_three = (1.0 + c) * N * (math.pi / 3.0) * N**2 * R**3 * v1 * q_L * (N * q_L + 4.0 * m_L)
    B = term_main + term_kinetic + term_three

    err_main = 0.5 * N * (N - 1) * I_err
    c_delta = sol.metadata.get("c_delta", 0.0)
    err_c = c_delta * (term_kinetic + abs(term_three)) / (1.0 + c)
    err_v1 = abs(term_three) * (v1_err / v1) if v1 > 0 else 0.0
    err_const = 1e-12 * (abs(term_main) + term_kinetic + abs(term_three))
    budget = err_main + err_c + err_v1 + err_const
    return BoundEvaluation(
        N=N,
        L=L,
        B=B,
        term_main=term_main,
        term_kinetic=term_kinetic,
        term_threebody=term_three,
        I_L=I_L,
        quadrature_error=budget,
        error_breakdown={
            "first_term": err_main,
            "c_refinement": err_c,
            "l1_norm": err_v1,
            "profile_constants": err_const,
        },
        c=c,
        R=R,
        profile_name=profile.name,
    )


def bound_B(N, L, profile, hprof, sol, v, I_pack=None):
    """Evaluate the energy bound B(N, L) with its error budget."""
    if not isinstance(N, (int, np.integer)) or N < 2:
        raise ConfigError("N must be an integer >= 2")
    if L <= 0:
        raise ConfigError("L must be positive")
    if I_pack is None:
        I_pack = first_term(hprof, autocorrelation_g2(profile, L))
    I_L, I_err = I_pack
    v1, v1_err = v.l1_norm_with_error()
    return _evaluate_bound(int(N), L, profile, sol, v1, v1_err, I_L, I_err)


def threebody_sharper(N, L, profile, v_l1, R, c):
    """Factorial-counting variant of the triple-overlap term.

    Counts ordered triples exactly, so it vanishes at N = 2 and is dominated
    by the power-counting term used in bound_B for every N.
    """
    if N < 2:
        raise ConfigError("N must be >= 2")
    q_L = profile.norm4_4 / L**3
    m_L = profile.norm_inf_sq / L**3
    return (
        (1.0 + c)
        * (math.pi / 3.0)
        * N
        * (N - 1)
        * (N - 2)
        * R**3
        * v_l1
        * ((N - 3) * q_L**2 + 4.0 * m_L * q_L)
    )


@dataclass(frozen=True)
class SearchConfig:
    margin_frac: float = 0.5
    profile_name: str = "cos2_bump"
    l_factors: tuple = tuple(2.0**k for k in range(2, 17))
    cells_per_scale: int = 4096
    tol_a: float = None
    n_geom: int = 24
    l_max: float = None
    collect_sweep: bool = False


@dataclass(frozen=True)
class Certificate:
    """Verified witness that the N-body ground-state energy is negative."""

    N: int
    L: float
    B: float
    error_budget: float
    a: float
    R: float
    b: float
    c: float
    profile_name: str
    potential: dict
    term_main: float
    term_kinetic: float
    term_threebody: float
    margin_frac: float
    metadata: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "N": self.N,
            "L": self.L,
            "B": self.B,
            "error_budget": self.error_budget,
            "a": self.a,
            "R": self.R,
            "b": self.b,
            "c": self.c,
            "profile": self.profile_name,
            "potential": self.potential,
            "terms": {
                "main": self.term_main,
                "kinetic": self.term_kinetic,
                "threebody": self.term_threebody,
            },
            "margin_frac": self.margin_frac,
        }


def _candidate_Ns(L, I_L, I_err, profile, sol, v1, n_geom):
    N_lo = max(2, int(math.ceil(L)))
    N_hi = int(math.floor(L**1.5))
    if N_hi < N_lo:
        return []
    cands = set(np.unique(np.round(np.geomspace(N_lo, N_hi, n_geom)).astype(int)))
    anchor = int(round(L**1.25))
    cands.update(n for n in (anchor - 1, anchor, anchor + 1) if N_lo <= n <= N_hi)

    # stationary points of the quartic B(N): the certifying window, when it
    # exists, always contains the interior minimum
    c = sol.c
    pref = (1.0 + c) * (math.pi / 3.0) * sol.R**3 * v1
    q_L = profile.norm4_4 / L**3
    m_L = profile.norm_inf_sq / L**3
    p4 = pref * q_L * q_L
    p3 = 4.0 * pref * q_L * m_L
    p2 = 0.5 * I_L
    p1 = -0.5 * I_L + (1.0 + c) * profile.lap_neg_l1 / L**2
    roots = np.roots([4.0 * p4, 3.0 * p3, 2.0 * p2, p1])
    for z in roots:
        if abs(z.imag) < 1e-9 * max(1.0, abs(z.real)) and z.real > 1:
            base = int(round(z.real))
            cands.update(n for n in (base - 1, base, base + 1) if N_lo <= n <= N_hi)
    cands.add(N_lo)
    cands.add(N_hi)
    return sorted(int(n) for n in cands)


def search_certificate(v, config=None, **overrides):
    """Smallest certifying (L, then N) over the dyadic L schedule.

    Raises NotCertifiable when the scattering length is nonnegative or a
    two-body bound state already exists, and SearchExhausted (with sweep
    diagnostics) when the schedule ends with every bound still positive.
    """
    if config is None:
        config = SearchConfig(**overrides)
    elif overrides:
        raise ConfigError("pass either a config object or keyword overrides, not both")

    scat = limit_a(v, cells_per_scale=config.cells_per_scale, tol_a=config.tol_a)
    if scat.node_flag:
        raise NotCertifiable(
            "a two-body bound state already exists; the pair problem is negative "
            "before any collective construction",
            diagnostics={"node_flag": True, "a": scat.a},
        )
    if not scat.a < 0:
        raise NotCertifiable(
            f"scattering length {scat.a!r} is nonnegative",
            diagnostics={"node_flag": False, "a": scat.a},
        )

    R, sol = find_negative_b_radius(
        v, a=scat.a, margin_frac=config.margin_frac, cells_per_scale=config.cells_per_scale
    )
    profile = build_trial_profile(config.profile_name)
    hprof = build_h(sol, v)
    v1, v1_err = v.l1_norm_with_error()

    sweep = []
    best = None
    for factor in config.l_factors:
        L = factor * R
        if config.l_max is not None and L > config.l_max:
            break
        C_L = autocorrelation_g2(profile, L)
        I_L, I_err = first_term(hprof, C_L)
        winners = []
        for N in _candidate_Ns(L, I_L, I_err, profile, sol, v1, config.n_geom):
            ev = _evaluate_bound(N, L, profile, sol, v1, v1_err, I_L, I_err)
            if config.collect_sweep:
                sweep.append(ev)
            if best is None or ev.B + ev.quadrature_error < best.B + best.quadrature_error:
                best = ev
            if ev.certifies:
                winners.append(ev)
        if winners:
            win = min(winners, key=lambda e: e.N)
            cert = Certificate(
                N=win.N,
                L=win.L,
                B=win.B,
                error_budget=win.quadrature_error,
                a=scat.a,
                R=R,
                b=sol.b,
                c=sol.c,
                profile_name=config.profile_name,
                potential=v.to_dict(),
                term_main=win.term_main,
                term_kinetic=win.term_kinetic,
                term_threebody=win.term_threebody,
                margin_frac=config.margin_frac,
                metadata={
                    "l_factor": factor,
                    "I_L": win.I_L,
                    "error_breakdown": win.error_breakdown,
                    "discrepancy": scat.discrepancy,
                    "sweep": sweep if config.collect_sweep else None,
                },
            )
            return cert
    raise SearchExhausted(
        "every scheduled (N, L) kept the bound positive",
        diagnostics={
            "best_B": None if best is None else best.B + best.quadrature_error,
            "best_N": None if best is None else best.N,
            "best_L": None if best is None else best.L,
            "a": scat.a,
            "R": R,
            "b": sol.b,
            "sweep": sweep if config.collect_sweep else None,
        },
    )
