"""Temperature, energy and entropy relations of thermally perfect gases.

A thermally perfect gas obeys ``p = rho R T`` while its internal energy is an
arbitrary strictly increasing function of temperature.  The translational part
is always ``e_tr = 3/2 R T``; everything else is carried by one or more
:class:`EnergyModel` instances grouped in a :class:`Gas`.

All evaluation methods accept scalars or numpy arrays and broadcast.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import DomainError, NumericalError, RangeError

KINDS = ("rotational-linear", "harmonic-vibrational", "polynomial", "tabulated")

TOL_REL = 1e-12
MAX_NEWTON = 100

_DEFAULT_RANGE = (10.0, 20000.0)


def _as_float(x):
    a = np.asarray(x, dtype=float)
    return a


def _solve_increasing(
    f: Callable[[np.ndarray], np.ndarray],
    df: Callable[[np.ndarray], np.ndarray],
    y: np.ndarray,
    lo: float,
    hi: float,
    guess: np.ndarray,
    tol_abs: float,
) -> np.ndarray:
    """Safeguarded Newton for ``f(T) = y`` with ``f`` strictly increasing.

    Newton iterates that leave the current bracket are replaced by bisection.
    An infinite upper bound is first replaced by doubling the guess.
    """
    y = np.asarray(y, dtype=float)
    T = np.broadcast_to(np.asarray(guess, dtype=float), y.shape).copy()
    lo_a = np.full(y.shape, float(lo))
    if np.isfinite(hi):
        hi_a = np.full(y.shape, float(hi))
    else:
        hi_a = np.maximum(T, 1.0)
        for _ in range(2100):
            short = f(hi_a) < y
            if not short.any():
                break
            hi_a = np.where(short, 2.0 * hi_a, hi_a)
        else:
            raise NumericalError("could not bracket the energy inversion")
    T = np.clip(T, lo_a, hi_a)
    tol = tol_abs + TOL_REL * np.abs(y)
    for _ in range(MAX_NEWTON):
        r = f(T) - y
        done = np.abs(r) <= tol
        if done.all():
            return T
        lo_a = np.where(r < 0.0, T, lo_a)
        hi_a = np.where(r > 0.0, T, hi_a)
        with np.errstate(divide="ignore", invalid="ignore"):
            Tn = T - r / df(T)
        bad = ~np.isfinite(Tn) | (Tn <= lo_a) | (Tn >= hi_a)
        Tn = np.where(bad, 0.5 * (lo_a + hi_a), Tn)
        collapsed = (hi_a - lo_a) <= 4.0 * np.finfo(float).eps * np.abs(hi_a)
        T = np.where(done, T, Tn)
        if (done | collapsed).all():
            return T
    raise NumericalError(
        "energy inversion did not converge in %d iterations" % MAX_NEWTON)


@dataclass(frozen=True, eq=False)
class EnergyModel:
    """Internal-energy law ``e_int(T)`` of one group of internal modes.

    Use the constructors :meth:`rotational`, :meth:`vibrational`,
    :meth:`polynomial`, :meth:`tabulated` and :meth:`from_file` rather than
    filling the fields by hand.

    ``coefficients`` holds ``(a0, a1, ...)`` with ``e_int = sum a_k T**k`` for
    the polynomial kind, and ``((T, e), ...)`` knots for the tabulated kind.
    ``T_ref`` is the temperature at which numerically defined entropies vanish
    (before ``s_ref`` is added).
    """

    kind: str
    R: float
    T0: float = 0.0
    coefficients: tuple = ()
    s_ref: float = 0.0
    T_min: float | None = None
    T_max: float | None = None
    T_ref: float | None = None
    _interp: PchipInterpolator | None = field(default=None, repr=False)
    _s_knots: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown energy model kind {self.kind!r}")
        if not self.R > 0:
            raise ValueError("gas constant R must be positive")
        analytic = self.kind in ("rotational-linear", "harmonic-vibrational")
        if self.kind == "harmonic-vibrational" and not self.T0 > 0:
            raise ValueError("harmonic-vibrational model needs T0 > 0")
        if self.kind == "tabulated":
            knots = np.asarray(self.coefficients, dtype=float)
            if knots.ndim != 2 or knots.shape[1] != 2 or len(knots) < 2:
                raise ValueError("tabulated model needs at least two (T, e_int) knots")
            Tk, ek = knots[:, 0], knots[:, 1]
            if np.any(np.diff(Tk) <= 0):
                raise ValueError("tabulated temperatures must be strictly increasing")
            if np.any(np.diff(ek) <= 0):
                raise ValueError("tabulated energies must be strictly increasing")
            object.__setattr__(self, "coefficients", tuple(map(tuple, knots)))
            object.__setattr__(self, "_interp", PchipInterpolator(Tk, ek, extrapolate=False))
            lo, hi = Tk[0], Tk[-1]
        elif analytic:
            lo, hi = 0.0, np.inf
        else:
            lo, hi = _DEFAULT_RANGE
        T_min = lo if self.T_min is None else float(self.T_min)
        T_max = hi if self.T_max is None else float(self.T_max)
        if not (T_max > T_min >= 0):
            raise ValueError("validity range needs 0 <= T_min < T_max")
        object.__setattr__(self, "T_min", T_min)
        object.__setattr__(self, "T_max", T_max)
        if self.T_ref is None:
            object.__setattr__(self, "T_ref", T_min if T_min > 0 else 1.0)
        if self.kind == "polynomial":
            a = np.asarray(self.coefficients, dtype=float)
            if a.ndim != 1 or len(a) < 2:
                raise ValueError("polynomial model needs coefficients (a0, a1, ...)")
            object.__setattr__(self, "coefficients", tuple(a))
            probe = np.linspace(T_min, T_max if np.isfinite(T_max) else 10 * T_min + 1, 2001)
            if np.any(self.c_v_int(probe) <= 0):
                raise ValueError("polynomial model has c_v_int <= 0 inside its range")
        if self.kind == "tabulated":
            self._build_entropy_table()

    # -- constructors ----------------------------------------------------------

    @classmethod
    def rotational(cls, R, s_ref=0.0, **kw):
        """Fully excited rotation, ``e_int = R T``."""
        return cls("rotational-linear", R, s_ref=s_ref, **kw)

    @classmethod
    def vibrational(cls, R, T0, s_ref=0.0, **kw):
        """Harmonic oscillator, ``e_int = R T0 / (exp(T0/T) - 1)``."""
        return cls("harmonic-vibrational", R, T0=T0, s_ref=s_ref, **kw)

    @classmethod
    def polynomial(cls, R, coefficients, T_min=None, T_max=None, s_ref=0.0, T_ref=None):
        return cls("polynomial", R, coefficients=tuple(coefficients), T_min=T_min,
                   T_max=T_max, s_ref=s_ref, T_ref=T_ref)

    @classmethod
    def tabulated(cls, R, T, e_int, s_ref=0.0, T_ref=None):
        knots = tuple(zip(np.asarray(T, float), np.asarray(e_int, float)))
        return cls("tabulated", R, coefficients=knots, s_ref=s_ref, T_ref=T_ref)

    @classmethod
    def from_file(cls, path, R, s_ref=0.0, T_ref=None):
        """Load a two-column ``T e_int`` table; ``#`` starts a comment."""
        data = np.loadtxt(Path(path), comments="#", ndmin=2)
        if data.shape[1] != 2:
            raise ValueError(f"{path}: expected two columns (T, e_int)")
        return cls.tabulated(R, data[:, 0], data[:, 1], s_ref=s_ref, T_ref=T_ref)

    # -- range handling --------------------------------------------------------

    def check_T(self, T):
        T = _as_float(T)
        if np.any(T < self.T_min) or (self.T_min == 0.0 and np.any(T <= 0.0)):
            raise RangeError(f"temperature below T_min={self.T_min:g} "
                             f"(min value {np.min(T):g})")
        if np.any(T > self.T_max):
            raise RangeError(f"temperature above T_max={self.T_max:g} "
                             f"(max value {np.max(T):g})")
        return T

    def e_int_range(self):
        lo = 0.0 if self.T_min == 0.0 else float(self._e_int(self.T_min))
        hi = np.inf if not np.isfinite(self.T_max) else float(self._e_int(self.T_max))
        return lo, hi

    # -- forward relations ---------------------------------------------------------

    def _e_int(self, T):
        T = _as_float(T)
        if self.kind == "rotational-linear":
            return self.R * T
        if self.kind == "harmonic-vibrational":
            with np.errstate(divide="ignore", over="ignore"):
                return self.R * self.T0 / np.expm1(self.T0 / T)
        if self.kind == "polynomial":
            return np.polynomial.polynomial.polyval(T, self.coefficients)
        Tk = self._interp.x
        return self._interp(np.clip(T, Tk[0], Tk[-1]))

    def _c_v_int(self, T):
        T = _as_float(T)
        if self.kind == "rotational-linear":
            return np.full_like(T, self.R)
        if self.kind == "harmonic-vibrational":
            x = self.T0 / T
            with np.errstate(over="ignore", invalid="ignore"):
                em = np.exp(-x)
                cv = self.R * x * x * em / (-np.expm1(-x)) ** 2
            return np.where(np.isfinite(cv), cv, 0.0)
        if self.kind == "polynomial":
            d = np.polynomial.polynomial.polyder(self.coefficients)
            return np.polynomial.polynomial.polyval(T, d)
        Tk = self._interp.x
        return self._interp.derivative()(np.clip(T, Tk[0], Tk[-1]))

    def e_int(self, T):
        """Internal energy at temperature ``T``; raises RangeError outside range."""
        return self._e_int(self.check_T(T))

    def c_v_int(self, T):
        """Specific heat ``d e_int / dT``."""
        return self._c_v_int(self.check_T(T))

    # -- inverse relations -------------------------------------------------------

    def _check_e(self, e):
        e = _as_float(e)
        lo, hi = self.e_int_range()
        if np.any(e < lo) or (self.T_min == 0.0 and np.any(e <= 0.0)):
            raise RangeError(f"internal energy below attainable minimum {lo:g}")
        if np.any(e > hi):
            raise RangeError(f"internal energy above attainable maximum {hi:g}")
        return e

    def T_int(self, e_int):
        """Internal temperature: the inverse of :meth:`e_int`."""
        e = self._check_e(e_int)
        if self.kind == "rotational-linear":
            return e / self.R
        if self.kind == "harmonic-vibrational":
            return self.T0 / np.log1p(self.R * self.T0 / e)
        guess = self._guess_T(e)
        T = _solve_increasing(self._e_int, self._c_v_int, e, self.T_min, self.T_max,
                              guess, TOL_REL * self.R * self._T_scale())
        if self.kind == "tabulated":
            Tk, ek = self._interp.x, self._interp(self._interp.x)
            idx = np.searchsorted(ek, e)
            idx = np.clip(idx, 0, len(ek) - 1)
            T = np.where(ek[idx] == e, Tk[idx], T)
        return T

    def _T_scale(self):
        if self.T0 > 0:
            return self.T0
        return max(self.T_ref, 1.0)

    def _guess_T(self, e):
        if self.kind == "tabulated":
            Tk = self._interp.x
            ek = self._interp(Tk)
            return np.interp(e, ek, Tk)
        lo = self.T_min
        hi = self.T_max if np.isfinite(self.T_max) else 10 * max(lo, 1.0)
        Ts = np.linspace(lo, hi, 257)
        return np.interp(e, self._e_int(Ts), Ts)

    # -- entropy -------------------------------------------------------------------

    def _build_entropy_table(self):
        # cumulative int c_v/T dT over each pchip segment, exact for the cubic
        h = np.diff(self._interp.x)
        seg = self._segment_entropy(np.arange(len(h)), h)
        s_knots = np.concatenate([[0.0], np.cumsum(seg)])
        object.__setattr__(self, "_s_knots", s_knots)
        object.__setattr__(self, "_s_knots", s_knots - self._s_tab_raw(np.array(self.T_ref)))

    def _segment_entropy(self, k, t):
        x = self._interp.x[k]
        c = self._interp.c[:, k]
        a, b, cc = 3.0 * c[0], 2.0 * c[1], c[2]
        lin = b - a * x
        rest = cc - lin * x
        return a * t * t / 2.0 + lin * t + rest * np.log1p(t / x)

    def _s_tab_raw(self, T):
        x = self._interp.x
        k = np.clip(np.searchsorted(x, T, side="right") - 1, 0, len(x) - 2)
        s0 = self._s_knots if self._s_knots is not None else np.zeros(len(x))
        return s0[k] + self._segment_entropy(k, T - x[k])

    def s_of_T(self, T):
        """Internal entropy expressed through the internal temperature."""
        T = _as_float(T)
        if self.kind == "rotational-linear":
            return self.s_int(self.R * T)
        if self.kind == "harmonic-vibrational":
            return self.s_int(self._e_int(T))
        if self.kind == "polynomial":
            a = np.asarray(self.coefficients)
            Tr = self.T_ref
            s = a[1] * np.log(T / Tr)
            for k in range(2, len(a)):
                s = s + k * a[k] * (T ** (k - 1) - Tr ** (k - 1)) / (k - 1)
            return s + self.s_ref
        return self._s_tab_raw(T) + self.s_ref

    def s_int(self, e_int):
        """Entropy of the internal modes with ``ds = de / T_int(e)``."""
        e = _as_float(e_int)
        if self.kind == "rotational-linear":
            if np.any(e <= 0):
                raise DomainError("rotational entropy needs e_int > 0")
            return self.R * np.log(e) + self.s_ref
        if self.kind == "harmonic-vibrational":
            if np.any(e < 0):
                raise DomainError("vibrational entropy needs e_int >= 0")
            RT0 = self.R * self.T0
            with np.errstate(divide="ignore", invalid="ignore"):
                tail = np.where(e > 0, (e / self.T0) * np.log(e / RT0), 0.0)
            return (e / self.T0 + self.R) * np.log1p(e / RT0) - tail + self.s_ref
        return self.s_of_T(self.T_int(e))


# -- spec-level functional API ------------------------------------------------


def e_int_of_T(model: EnergyModel, T):
    return model.e_int(T)


def T_int_of_e_int(model: EnergyModel, e_int):
    return model.T_int(e_int)


def s_int_of_e_int(model: EnergyModel, e_int):
    return model.s_int(e_int)


def c_v_int_of_T(model: EnergyModel, T):
    return model.c_v_int(T)


def c_p_of_T(model: EnergyModel | None, T, R=None):
    """``c_p = 3/2 R + c_v_int + R``; ``model=None`` means monatomic."""
    gas = Gas(R if model is None else model.R, () if model is None else (model,))
    return gas.c_p(T)


def T_of_e(model: EnergyModel | None, e, R=None):
    """Temperature from total specific energy ``e = 3/2 R T + e_int(T)``."""
    gas = Gas(R if model is None else model.R, () if model is None else (model,))
    return gas.T_of_e(e)


@dataclass(frozen=True)
class ThermoPoint:
    T: float
    e_tr: float
    e_int: float
    e: float
    c_v: float
    c_p: float


@dataclass(frozen=True)
class Gas:
    """A thermally perfect gas: gas constant plus zero or more internal modes.

    With no modes the gas is monatomic.
    """

    R: float
    modes: tuple[EnergyModel, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        for m in self.modes:
            if not np.isclose(m.R, self.R, rtol=1e-14, atol=0):
                raise ValueError("all energy modes must share the gas constant R")

    @property
    def n_modes(self):
        return len(self.modes)

    @property
    def T_range(self):
        lo = max([0.0] + [m.T_min for m in self.modes])
        hi = min([np.inf] + [m.T_max for m in self.modes])
        return lo, hi

    def check_T(self, T):
        for m in self.modes:
            m.check_T(T)
        T = _as_float(T)
        if not self.modes and np.any(T <= 0):
            raise RangeError("temperature below T_min=0")
        return T

    def e_tr(self, T):
        return 1.5 * self.R * _as_float(T)

    def e_int_modes(self, T):
        return [m.e_int(T) for m in self.modes]

    def e_int(self, T):
        T = _as_float(T)
        out = np.zeros_like(T)
        for m in self.modes:
            out = out + m.e_int(T)
        return out

    def e(self, T):
        return self.e_tr(self.check_T(T)) + self.e_int(T)

    def c_v(self, T):
        T = self.check_T(T)
        out = np.full_like(T, 1.5 * self.R)
        for m in self.modes:
            out = out + m.c_v_int(T)
        return out

    def c_p(self, T):
        return self.c_v(T) + self.R

    def gamma(self, T):
        return self.c_p(T) / self.c_v(T)

    def point(self, T) -> ThermoPoint:
        T = float(T)
        e_int = float(self.e_int(T))
        return ThermoPoint(T, 1.5 * self.R * T, e_int, 1.5 * self.R * T + e_int,
                           float(self.c_v(T)), float(self.c_p(T)))

    def _e_raw(self, T):
        out = 1.5 * self.R * T
        for m in self.modes:
            out = out + m._e_int(T)
        return out

    def _cv_raw(self, T):
        out = np.full_like(T, 1.5 * self.R)
        for m in self.modes:
            out = out + m._c_v_int(T)
        return out

    def T_of_e(self, e):
        """Invert ``e(T)``; raises RangeError when ``e`` is not attainable."""
        e = _as_float(e)
        lo, hi = self.T_range
        e_lo = float(self._e_raw(np.array(lo))) if lo > 0 else 0.0
        if np.any(e < e_lo) or (lo == 0 and np.any(e <= 0)):
            raise RangeError(f"energy below the value at T_min={lo:g}")
        if np.isfinite(hi) and np.any(e > self._e_raw(np.array(hi))):
            raise RangeError(f"energy above the value at T_max={hi:g}")
        if all(m.kind == "rotational-linear" for m in self.modes):
            return e / ((1.5 + self.n_modes) * self.R)
        guess = e / self._cv_raw(np.asarray(np.clip(e / (2.5 * self.R), max(lo, 1e-300), hi)))
        scale = max([1.0] + [m._T_scale() for m in self.modes])
        return _solve_increasing(self._e_raw, self._cv_raw, e, lo, hi,
                                 np.clip(guess, lo, hi), TOL_REL * self.R * scale)


def load_table(path) -> tuple[np.ndarray, np.ndarray]:
    """Read a ``T e_int`` table file as two arrays."""
    data = np.loadtxt(Path(path), comments="#", ndmin=2)
    return data[:, 0], data[:, 1]


def default_gas(kind: str, R: float = 1.0, T0: float = 2.0,
                table: Sequence[tuple[float, float]] | None = None) -> Gas:
    """Convenience constructor used by the case library and tests."""
    if kind == "monatomic":
        return Gas(R)
    if kind == "rotational-linear":
        return Gas(R, (EnergyModel.rotational(R),))
    if kind == "harmonic-vibrational":
        return Gas(R, (EnergyModel.vibrational(R, T0),))
    if kind == "rot-vib":
        return Gas(R, (EnergyModel.rotational(R), EnergyModel.vibrational(R, T0)))
    if kind == "tabulated":
        if table is None:
            Ts = np.linspace(0.05, 20.0, 60) * T0 / 2.0
            vib = EnergyModel.vibrational(R, T0)
            table = list(zip(Ts, R * Ts + vib.e_int(Ts)))
        T, e = np.asarray(table, float).T
        return Gas(R, (EnergyModel.tabulated(R, T, e),))
    raise ValueError(f"unknown gas kind {kind!r}")
