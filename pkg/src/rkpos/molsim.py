"""Direct method-of-lines simulation on a periodic 1D grid.

The semi-discrete systems all take the form

    u_k'(t) = q_k(u, t) * (S u)_k / dx^p

with a nonnegative coefficient q_k, where S is a difference stencil
((S u)_k = sum_o c_o u_{k-o}) and p its dx power.  The q coefficient can
come from a flux-limited advection or conservation-law discretization, a
per-cell diffusion coefficient, a constant, or an externally scripted
table.  Explicit Runge-Kutta stepping keeps the increment structure
explicit, so runs can be exact (Fraction state) or floating point with
the same code path.
"""

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

from .errors import InputError, LimiterContractError, PreconditionError
from .polygen import StencilSpec, upwind
from .tableau import ButcherTableau

__all__ = [
    "Limiter",
    "LIMITERS",
    "RunReport",
    "SemiDiscreteProblem",
    "StepTrace",
    "advection",
    "conservation_law",
    "constant_q",
    "erk_step",
    "heat_q",
    "koren",
    "max_step",
    "mc",
    "minmod",
    "psi",
    "q_advection",
    "run",
    "scripted",
    "tau0",
]

Number = Union[Fraction, float, int]


@dataclass(frozen=True)
class Limiter:
    """A slope limiter psi with its positivity bookkeeping.

    mu bounds the ratio psi(theta)/theta.  The limit fields pin down the
    degenerate slope-ratio cases: ratio_at_zero is lim psi(theta)/theta
    as theta -> 0, and the two infinity values are the limits of psi
    itself (used when the local denominator slope vanishes).
    """

    name: str
    psi_fn: Callable[[Number], Number]
    mu: Fraction
    ratio_at_zero: Fraction
    psi_at_plus_inf: Fraction
    psi_at_minus_inf: Fraction


minmod = Limiter(
    "minmod", lambda t: max(0, min(1, t)),
    mu=Fraction(1), ratio_at_zero=Fraction(1),
    psi_at_plus_inf=Fraction(1), psi_at_minus_inf=Fraction(0),
)
koren = Limiter(
    "koren", lambda t: max(0, min(1, Fraction(1, 3) + t / 6, t)),
    mu=Fraction(1), ratio_at_zero=Fraction(1),
    psi_at_plus_inf=Fraction(1), psi_at_minus_inf=Fraction(0),
)
mc = Limiter(
    "mc", lambda t: max(0, min(2 * t, (1 + t) / 2, 2)),
    mu=Fraction(2), ratio_at_zero=Fraction(2),
    psi_at_plus_inf=Fraction(2), psi_at_minus_inf=Fraction(0),
)
LIMITERS = {"minmod": minmod, "koren": koren, "mc": mc}


def psi(limiter: Limiter, theta: Number) -> tuple[Number, Number]:
    """(psi(theta), psi(theta)/theta), with the ratio at 0 by its limit."""
    value = limiter.psi_fn(theta)
    if theta == 0:
        return value, limiter.ratio_at_zero
    return value, value / theta


def _limiter_terms(limiter: Limiter, s: Number, d: Number) -> tuple[Number, Number]:
    """psi value and ratio for the slope ratio theta = s/d, handling the
    degenerate denominators without ever dividing by zero.

    d = 0, s != 0: theta is +-inf, so psi takes its limit and the ratio
    term (which multiplies d in flux form) is 0.  d = s = 0: flat data,
    both contributions vanish.
    """
    if d != 0:
        return psi(limiter, s / d)
    if s != 0:
        lim = limiter.psi_at_plus_inf if s > 0 else limiter.psi_at_minus_inf
        return lim, 0
    return Fraction(0), Fraction(0)


def _slopes(u: Sequence[Number], k: int) -> tuple[Number, Number]:
    # theta_k = s_k / d_k with s_k = u_k - u_{k-1}, d_k = u_{k+1} - u_k.
    n = len(u)
    return u[k] - u[k - 1], u[(k + 1) % n] - u[k]


def q_advection(
    u: Sequence[Number], t: Number, a, limiter: Limiter
) -> list[Number]:
    """q_k = a(t) * (1 - psi(theta_{k-1}) + psi(theta_k)/theta_k).

    Periodic indexing.  A negative q_k means the limiter left the
    positivity contract (possible for MC) and raises.
    """
    at = a(t) if callable(a) else a
    out = []
    for k in range(len(u)):
        s_prev, d_prev = _slopes(u, k - 1)
        s_here, d_here = _slopes(u, k)
        psi_prev, _ = _limiter_terms(limiter, s_prev, d_prev)
        _, ratio_here = _limiter_terms(limiter, s_here, d_here)
        q = at * (1 - psi_prev + ratio_here)
        if q < 0:
            raise LimiterContractError(
                f"limiter {limiter.name!r} produced q[{k}] = {q} < 0; "
                f"psi lies outside the positivity contract for this data"
            )
        out.append(q)
    return out


# --- q providers ------------------------------------------------------------


class _Advection:
    def __init__(self, a, limiter: Limiter, a_sup: Optional[Number] = None):
        self.a = a
        self.limiter = limiter
        if a_sup is None and not callable(a):
            a_sup = a
        self.q_bound = None if a_sup is None else (limiter.mu + 1) * a_sup

    def q(self, u, t):
        return q_advection(u, t, self.a, self.limiter)


def advection(a, limiter: Limiter, a_sup: Optional[Number] = None) -> _Advection:
    """Flux-limited advection coefficients; `a` is a constant or a
    callable a(t) >= 0 (then pass a_sup for step-size budgeting)."""
    return _Advection(a, limiter, a_sup)


class _ConservationLaw:
    def __init__(self, f, fprime, limiter, fprime_sup=None):
        self.f = f
        self.fprime = fprime
        self.limiter = limiter
        self.fprime_sup = fprime_sup
        self.q_bound = None if fprime_sup is None else (limiter.mu + 1) * fprime_sup

    def q(self, u, t):
        n = len(u)
        # Interface states u_{k+1/2} = u_k + psi(theta_k)(u_{k+1} - u_k).
        iface = []
        for k in range(n):
            s, d = _slopes(u, k)
            pv, _ = _limiter_terms(self.limiter, s, d)
            iface.append(u[k] + pv * d)
        out = []
        for k in range(n):
            # Local wave speed from the mean-value form, bounded over the
            # bracket endpoints of the two neighboring interface states.
            lam = max(self.fprime(iface[k - 1]), self.fprime(iface[k]))
            if lam < 0:
                raise InputError(
                    "conservation-law provider requires f' >= 0 on the data range"
                )
            s_prev, d_prev = _slopes(u, k - 1)
            s_here, d_here = _slopes(u, k)
            psi_prev, _ = _limiter_terms(self.limiter, s_prev, d_prev)
            _, ratio_here = _limiter_terms(self.limiter, s_here, d_here)
            q = lam * (1 - psi_prev + ratio_here)
            if q < 0:
                raise LimiterContractError(
                    f"limiter {self.limiter.name!r} produced q[{k}] = {q} < 0"
                )
            out.append(q)
        return out


def conservation_law(f, fprime, limiter: Limiter, fprime_sup=None) -> _ConservationLaw:
    return _ConservationLaw(f, fprime, limiter, fprime_sup)


class _Scripted:
    def __init__(self, script):
        # `script` is a mapping {(cell index, time): value} or an object
        # with a .value(k, t) method (see the counterexample tooling).
        self.script = script
        self.q_bound = None

    def _value(self, k, t):
        if hasattr(self.script, "value"):
            return self.script.value(k, t)
        return self.script.get((k, t), Fraction(0))

    def q(self, u, t):
        out = []
        for k in range(len(u)):
            v = self._value(k, t)
            if v < 0:
                raise InputError(f"scripted q[{k}] = {v} is negative")
            out.append(v)
        return out


def scripted(script) -> _Scripted:
    return _Scripted(script)


class _Constant:
    def __init__(self, value):
        if value < 0:
            raise InputError("constant q must be nonnegative")
        self.value = value
        self.q_bound = value

    def q(self, u, t):
        return [self.value] * len(u)


def constant_q(value) -> _Constant:
    return _Constant(value)


class _Heat:
    def __init__(self, kappa: Sequence[Number]):
        if any(v < 0 for v in kappa):
            raise InputError("diffusion coefficients must be nonnegative")
        self.kappa = list(kappa)
        self.q_bound = max(self.kappa) if self.kappa else Fraction(0)

    def q(self, u, t):
        if len(u) != len(self.kappa):
            raise InputError("per-cell kappa length does not match the grid")
        return list(self.kappa)


def heat_q(kappa: Sequence[Number]) -> _Heat:
    return _Heat(kappa)


@dataclass(frozen=True)
class SemiDiscreteProblem:
    n: int
    dx: Number
    stencil: StencilSpec
    q_provider: object
    u0: tuple

    def __post_init__(self):
        if self.n < 1 or self.dx <= 0:
            raise InputError("need n >= 1 and dx > 0")
        if len(self.u0) != self.n:
            raise InputError("initial data length does not match the grid")


def tau0(p: SemiDiscreteProblem, q_bound: Optional[Number] = None) -> Number:
    """Forward-Euler positivity threshold dx^pow / sup q.

    For advection this is dx / ((mu+1) sup a); for a conservation law the
    f' sup defaults to the maximum of f' over the initial data values.
    Scripted providers carry no bound: pass q_bound explicitly.
    """
    if q_bound is None:
        q_bound = getattr(p.q_provider, "q_bound", None)
    if q_bound is None and isinstance(p.q_provider, _ConservationLaw):
        q_bound = (p.q_provider.limiter.mu + 1) * max(
            p.q_provider.fprime(v) for v in p.u0
        )
    if q_bound is None:
        raise InputError(
            "q provider declares no bound; pass q_bound explicitly"
        )
    if q_bound <= 0:
        raise InputError("sup q must be positive for a finite threshold")
    return p.dx ** p.stencil.dx_power / q_bound


def max_step(gamma: Fraction, p: SemiDiscreteProblem,
             q_bound: Optional[Number] = None) -> Number:
    """Largest certified step size gamma * tau0 (0 when gamma = 0)."""
    if gamma == 0:
        return Fraction(0)
    return gamma * tau0(p, q_bound)


@dataclass(frozen=True)
class StepTrace:
    stages: tuple          # y^1 .. y^m, each a tuple of cell values
    xis: tuple             # per stage: tuple of dt*q_k/dx^pow
    u_next: tuple


def _apply_stencil(stencil: StencilSpec, y: Sequence[Number]) -> list[Number]:
    n = len(y)
    return [
        sum(c * y[(k - o) % n] for o, c in stencil.coeffs.items())
        for k in range(n)
    ]


def erk_step(
    p: SemiDiscreteProblem,
    t: ButcherTableau,
    dt: Number,
    u: Sequence[Number],
    t0: Number = Fraction(0),
) -> StepTrace:
    """One explicit Runge-Kutta step in increment form.

    Stage j's coefficient vector is xi^j_k = dt * q_k(y^j, t0 + c_j dt)
    / dx^pow, and every state is u plus a combination of the per-stage
    increments xi^j * (S y^j) -- so flat regions are preserved exactly in
    either arithmetic.
    """
    if dt <= 0:
        raise PreconditionError("step size must be positive")
    m = t.m
    scale = p.dx ** p.stencil.dx_power
    increments: list[list[Number]] = []
    stages = []
    xis = []
    for j in range(m):
        y = list(u)
        for l in range(j):
            if t.a[j][l] == 0:
                continue
            for k in range(p.n):
                y[k] = y[k] + t.a[j][l] * increments[l][k]
        qs = p.q_provider.q(y, t0 + t.c[j] * dt)
        xi = [dt * q / scale for q in qs]
        sy = _apply_stencil(p.stencil, y)
        increments.append([xi[k] * sy[k] for k in range(p.n)])
        stages.append(tuple(y))
        xis.append(tuple(xi))
    u1 = list(u)
    for j in range(m):
        if t.b[j] == 0:
            continue
        for k in range(p.n):
            u1[k] = u1[k] + t.b[j] * increments[j][k]
    return StepTrace(tuple(stages), tuple(xis), tuple(u1))


@dataclass
class RunReport:
    steps_run: int
    mins: list
    maxs: list
    tvs: list
    first_violation: Optional[tuple]  # (step, index, value, kind)
    final_state: tuple
    mode: str
    initial_range: tuple = field(default=(None, None))


def _total_variation(u: Sequence[Number]) -> Number:
    return sum(abs(u[k] - u[k - 1]) for k in range(len(u)))


# Rational-mode states whose denominators pass this size switch to float
# with a warning; exact runs are meant for short verification horizons.
_RATIONAL_BIT_LIMIT = 1 << 14


def run(
    p: SemiDiscreteProblem,
    t: ButcherTableau,
    dt: Number,
    steps: int,
    monitors: tuple[str, ...] = ("positivity", "interval"),
    stop_on_violation: bool = True,
    mode: Optional[str] = None,
    t_start: Number = Fraction(0),
) -> RunReport:
    """Advance `steps` ERK steps with per-step min/max/TV monitoring.

    Violations (a negative value, or escape from the initial data range)
    are detected with zero tolerance in both arithmetic modes; the first
    one is recorded and, by default, stops the run.
    """
    if dt <= 0:
        raise PreconditionError(
            "no positive step size certified for this problem"
        )
    if steps < 1:
        raise PreconditionError("need at least one step")
    if mode is None:
        mode = "rational" if all(
            isinstance(v, (Fraction, int)) for v in p.u0
        ) and isinstance(dt, (Fraction, int)) else "float"
    u = list(p.u0)
    if mode == "float":
        u = [float(v) for v in u]
        dt = float(dt)
        p = SemiDiscreteProblem(p.n, float(p.dx), p.stencil, p.q_provider, tuple(u))
    umin, umax = min(u), max(u)
    mins, maxs, tvs = [], [], []
    violation = None
    now = t_start if mode == "rational" else float(t_start)
    step = 0
    while step < steps:
        u = list(erk_step(p, t, dt, u, now).u_next)
        now = now + dt
        step += 1
        if mode == "rational" and max(
            v.denominator.bit_length() if isinstance(v, Fraction) else 1
            for v in u
        ) > _RATIONAL_BIT_LIMIT:
            warnings.warn(
                "rational state size exceeded the practical limit; "
                "switching to float arithmetic", RuntimeWarning,
            )
            mode = "float"
            u = [float(v) for v in u]
            dt = float(dt)
            now = float(now)
        mins.append(min(u))
        maxs.append(max(u))
        tvs.append(_total_variation(u))
        if violation is None:
            for k, v in enumerate(u):
                if "positivity" in monitors and umin >= 0 and v < 0:
                    violation = (step, k, v, "positivity")
                    break
                if "interval" in monitors and not (umin <= v <= umax):
                    violation = (step, k, v, "interval")
                    break
            if violation is not None and stop_on_violation:
                break
    return RunReport(
        steps_run=step, mins=mins, maxs=maxs, tvs=tvs,
        first_violation=violation, final_state=tuple(u), mode=mode,
        initial_range=(umin, umax),
    )
