"""Model definitions: the diagonal Hamiltonian H0 and the fluctuation term.

The Hamiltonians treated by this package have the form

    H = H0(sigma) - N * f(mhat_x),    mhat_x = (1/N) sum_i sigma_i^x

with a diagonal classical part

    H0 = - sum_{i<j} J_ij s_i s_j - sum_i h_i s_i - J_ir * N * m_z^2

where m_z = (1/N) sum_i s_i.  The infinite-range term is written with an
explicit 1/N so the energy stays extensive; the default strength used by
the uniform benchmark model is J_ir = 1/2, which places the zero-field
critical point of the transverse-field model at Gamma_c = 1 (checked
against the exact solver, see README).

The collective function f is represented by a small class hierarchy
(`Linear`, `LinearQuadratic`, `Polynomial`) exposing value, derivative,
second_derivative and inverse_derivative.  f(0) = 0 for every variant.
f must decay fast enough that exp(-N*beta*(m*y - f(m))) is normalizable
in m; the library documents this requirement and validates variants only
on [-1, 1], the physical range of the transverse magnetization.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import brentq

try:
    import tomllib as _toml
except ImportError:  # Python 3.10
    import tomli as _toml

from .errors import ConfigError, UnsupportedInverseError

__all__ = [
    "Fluctuation",
    "Linear",
    "LinearQuadratic",
    "Polynomial",
    "ClassicalIsing",
    "NonStoqModel",
    "classical_energy",
    "energy_delta",
    "f_eval",
    "f_prime",
    "f_prime_inverse",
    "uniform_model",
    "load_model_file",
]


# ---------------------------------------------------------------------------
# fluctuation functions


class Fluctuation:
    """Base class for the collective function f acting on m_x."""

    def value(self, m):
        raise NotImplementedError

    def derivative(self, m):
        raise NotImplementedError

    def second_derivative(self, m):
        raise NotImplementedError

    def inverse_derivative(self, y):
        """Return m with f'(m) = y."""
        raise NotImplementedError

    @property
    def constant_derivative(self) -> bool:
        """True when f' does not depend on m (purely linear f)."""
        return False


@dataclass(frozen=True)
class Linear(Fluctuation):
    """f(m) = Gamma * m, the plain transverse-field term."""

    Gamma: float

    def value(self, m):
        return self.Gamma * np.asarray(m, dtype=float) if np.ndim(m) else self.Gamma * float(m)

    def derivative(self, m):
        return np.full(np.shape(m), self.Gamma) if np.ndim(m) else self.Gamma

    def second_derivative(self, m):
        return np.zeros(np.shape(m)) if np.ndim(m) else 0.0

    def inverse_derivative(self, y):
        raise UnsupportedInverseError(
            "Linear fluctuation has a constant derivative; f' cannot be inverted"
        )

    @property
    def constant_derivative(self) -> bool:
        return True


@dataclass(frozen=True)
class LinearQuadratic(Fluctuation):
    """f(m) = Gamma*m - gamma*m^2/2.

    gamma > 0 is the antiferromagnetic collective-x coupling; gamma < 0
    (ferromagnetic) is also accepted. gamma = 0 degenerates to Linear.
    """

    Gamma: float
    gamma: float

    def value(self, m):
        m = np.asarray(m, dtype=float) if np.ndim(m) else float(m)
        return self.Gamma * m - 0.5 * self.gamma * m * m

    def derivative(self, m):
        m = np.asarray(m, dtype=float) if np.ndim(m) else float(m)
        return self.Gamma - self.gamma * m

    def second_derivative(self, m):
        return np.full(np.shape(m), -self.gamma) if np.ndim(m) else -self.gamma

    def inverse_derivative(self, y):
        if self.gamma == 0.0:
            raise UnsupportedInverseError(
                "LinearQuadratic with gamma=0 has a constant derivative"
            )
        y = np.asarray(y, dtype=float) if np.ndim(y) else float(y)
        return (self.Gamma - y) / self.gamma

    @property
    def constant_derivative(self) -> bool:
        return self.gamma == 0.0


@dataclass(frozen=True)
class Polynomial(Fluctuation):
    """f(m) = sum_p c_p m^p with coefficients (c_1, ..., c_P), no constant term.

    The inverse derivative has no closed form; it is found by safeguarded
    root finding inside `inverse_bracket`.  f' should be monotone on the
    bracket, otherwise whichever root brentq isolates is returned.
    """

    coefficients: Tuple[float, ...]
    inverse_bracket: Tuple[float, float] = (-8.0, 8.0)

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        lo, hi = self.inverse_bracket
        if not lo < hi:
            raise ValueError("inverse_bracket must be an increasing pair")

    def _poly(self):
        # polyval coefficient layout: [c_0, c_1, ...]; c_0 = 0 by construction
        return np.concatenate(([0.0], self.coefficients))

    def value(self, m):
        out = np.polynomial.polynomial.polyval(m, self._poly())
        return out if np.ndim(m) else float(out)

    def derivative(self, m):
        d = np.polynomial.polynomial.polyder(self._poly())
        out = np.polynomial.polynomial.polyval(m, d)
        return out if np.ndim(m) else float(out)

    def second_derivative(self, m):
        d2 = np.polynomial.polynomial.polyder(self._poly(), 2)
        out = np.polynomial.polynomial.polyval(m, d2)
        return out if np.ndim(m) else float(out)

    def inverse_derivative(self, y):
        if self.constant_derivative:
            raise UnsupportedInverseError(
                "Polynomial reduces to a linear f; f' cannot be inverted"
            )
        y = float(y)
        lo, hi = self.inverse_bracket
        glo = self.derivative(lo) - y
        ghi = self.derivative(hi) - y
        if glo == 0.0:
            return lo
        if ghi == 0.0:
            return hi
        if np.sign(glo) == np.sign(ghi):
            raise UnsupportedInverseError(
                f"f'(m) = {y} has no sign change on bracket [{lo}, {hi}]"
            )
        return brentq(lambda m: self.derivative(m) - y, lo, hi, xtol=1e-10)

    @property
    def constant_derivative(self) -> bool:
        return all(c == 0.0 for c in self.coefficients[1:])


def f_eval(f: Fluctuation, m):
    return f.value(m)


def f_prime(f: Fluctuation, m):
    return f.derivative(m)


def f_prime_inverse(f: Fluctuation, y):
    return f.inverse_derivative(y)


# ---------------------------------------------------------------------------
# classical Hamiltonian


def _normalize_couplings(n_spins: int, couplings) -> dict:
    out: dict = {}
    for key, J in dict(couplings).items():
        i, j = int(key[0]), int(key[1])
        if i == j:
            raise ValueError(f"coupling ({i},{j}) couples a spin to itself")
        if not (0 <= i < n_spins and 0 <= j < n_spins):
            raise ValueError(f"coupling ({i},{j}) out of range for N={n_spins}")
        pair = (i, j) if i < j else (j, i)
        if pair in out:
            raise ValueError(f"pair {pair} listed more than once (both orders?)")
        out[pair] = float(J)
    return out


@dataclass(frozen=True)
class ClassicalIsing:
    """Diagonal Hamiltonian H0 with pair couplings, local fields and an
    optional uniform infinite-range term -J_ir * N * m_z^2.

    Each unordered pair appears exactly once in `couplings`; passing both
    (i, j) and (j, i) is an error rather than a silent sum.  Instances are
    immutable and safe to share across concurrent runs.
    """

    n_spins: int
    couplings: Mapping[Tuple[int, int], float] = field(default_factory=dict)
    fields: Union[float, Sequence[float], np.ndarray] = 0.0
    infinite_range_coupling: float = 0.0

    def __post_init__(self):
        if self.n_spins < 1:
            raise ValueError("n_spins must be >= 1")
        object.__setattr__(
            self, "couplings", _normalize_couplings(self.n_spins, self.couplings)
        )
        h = np.asarray(self.fields, dtype=float)
        if h.ndim == 0:
            h = np.full(self.n_spins, float(h))
        if h.shape != (self.n_spins,):
            raise ValueError("fields must be scalar or length n_spins")
        h = h.copy()
        h.setflags(write=False)
        object.__setattr__(self, "fields", h)
        object.__setattr__(self, "infinite_range_coupling", float(self.infinite_range_coupling))

        # adjacency in CSR layout, used by energy_delta and the sweep kernels
        pairs = sorted(self.couplings.items())
        pi = np.array([p[0][0] for p in pairs], dtype=np.int64)
        pj = np.array([p[0][1] for p in pairs], dtype=np.int64)
        pw = np.array([p[1] for p in pairs], dtype=float)
        counts = np.zeros(self.n_spins + 1, dtype=np.int64)
        for a, b in zip(pi, pj):
            counts[a + 1] += 1
            counts[b + 1] += 1
        indptr = np.cumsum(counts)
        indices = np.zeros(indptr[-1], dtype=np.int64)
        weights = np.zeros(indptr[-1], dtype=float)
        cursor = indptr[:-1].copy()
        for a, b, w in zip(pi, pj, pw):
            indices[cursor[a]] = b
            weights[cursor[a]] = w
            cursor[a] += 1
            indices[cursor[b]] = a
            weights[cursor[b]] = w
            cursor[b] += 1
        for arr in (pi, pj, pw, indptr, indices, weights):
            arr.setflags(write=False)
        object.__setattr__(self, "_pair_i", pi)
        object.__setattr__(self, "_pair_j", pj)
        object.__setattr__(self, "_pair_w", pw)
        object.__setattr__(self, "_indptr", indptr)
        object.__setattr__(self, "_indices", indices)
        object.__setattr__(self, "_weights", weights)

    def energy(self, spins) -> float:
        spins = np.asarray(spins)
        if spins.shape != (self.n_spins,):
            raise ValueError(f"spins must have shape ({self.n_spins},)")
        s = spins.astype(float)
        e = -float(self._pair_w @ (s[self._pair_i] * s[self._pair_j]))
        e -= float(self.fields @ s)
        if self.infinite_range_coupling != 0.0:
            M = s.sum()
            e -= self.infinite_range_coupling * M * M / self.n_spins
        return e

    def energy_delta(self, spins, flip_index: int) -> float:
        spins = np.asarray(spins)
        if not 0 <= flip_index < self.n_spins:
            raise ValueError(f"flip_index {flip_index} out of range")
        i = flip_index
        si = float(spins[i])
        lo, hi = self._indptr[i], self._indptr[i + 1]
        local = float(self._weights[lo:hi] @ spins[self._indices[lo:hi]].astype(float))
        delta = 2.0 * si * (local + self.fields[i])
        if self.infinite_range_coupling != 0.0:
            M = float(spins.sum())
            delta += 4.0 * self.infinite_range_coupling * (si * M - 1.0) / self.n_spins
        return delta

    def slice_energies(self, spins_nt: np.ndarray) -> np.ndarray:
        """H0 evaluated on every column of an (N, tau) array of +-1 spins."""
        s = spins_nt.astype(float)
        e = -self._pair_w @ (s[self._pair_i] * s[self._pair_j])
        e -= self.fields @ s
        if self.infinite_range_coupling != 0.0:
            M = s.sum(axis=0)
            e -= self.infinite_range_coupling * M * M / self.n_spins
        return np.atleast_1d(e)


@dataclass(frozen=True)
class NonStoqModel:
    """H = H0(sigma) - N * f(mhat_x)."""

    classical: ClassicalIsing
    fluctuation: Fluctuation

    @property
    def n_spins(self) -> int:
        return self.classical.n_spins


def classical_energy(model: ClassicalIsing, spins) -> float:
    return model.energy(spins)


def energy_delta(model: ClassicalIsing, spins, flip_index: int) -> float:
    return model.energy_delta(spins, flip_index)


def uniform_model(n_spins: int, h: float = 0.1, j_ir: float = 0.5) -> ClassicalIsing:
    """The uniform benchmark H0: no pair couplings, uniform field h,
    infinite-range coupling j_ir (default 1/2, i.e. Gamma_c = 1)."""
    return ClassicalIsing(n_spins=n_spins, fields=h, infinite_range_coupling=j_ir)


# ---------------------------------------------------------------------------
# model files

_FLUCT_KEYS = {
    "linear": {"Gamma"},
    "linear_quadratic": {"Gamma", "gamma"},
    "polynomial": {"coefficients", "inverse_bracket"},
}


def _build_fluctuation(spec: dict) -> Fluctuation:
    spec = dict(spec)
    variant = spec.pop("variant", None)
    if variant not in _FLUCT_KEYS:
        raise ConfigError(
            f"fluctuation variant must be one of {sorted(_FLUCT_KEYS)}, got {variant!r}"
        )
    unknown = set(spec) - _FLUCT_KEYS[variant]
    if unknown:
        raise ConfigError(f"unknown fluctuation keys for {variant}: {sorted(unknown)}")
    if variant == "linear":
        return Linear(Gamma=float(spec.get("Gamma", 0.0)))
    if variant == "linear_quadratic":
        return LinearQuadratic(
            Gamma=float(spec.get("Gamma", 0.0)), gamma=float(spec.get("gamma", 0.0))
        )
    coeffs = spec.get("coefficients", [])
    kwargs = {}
    if "inverse_bracket" in spec:
        lo, hi = spec["inverse_bracket"]
        kwargs["inverse_bracket"] = (float(lo), float(hi))
    return Polynomial(coefficients=tuple(coeffs), **kwargs)


def load_model_file(path) -> Tuple[ClassicalIsing, Optional[Fluctuation]]:
    """Parse a TOML model file.

    Schema::

        n_spins = 8                      # required
        infinite_range_coupling = 0.5    # optional, default 0
        fields = 0.1                     # scalar, or [[i, h], ...] pairs
        couplings = [[0, 1, 1.0], ...]   # optional triplets, each pair once

        [fluctuation]                    # optional
        variant = "linear_quadratic"     # or "linear", "polynomial"
        Gamma = 1.0
        gamma = 1.0
        # coefficients = [1.0, -0.5]     # polynomial only

    Returns (ClassicalIsing, Fluctuation or None).  Listing a coupling
    pair twice, in either order, is rejected.
    """
    try:
        with open(path, "rb") as fh:
            data = _toml.load(fh)
    except _toml.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: invalid TOML: {exc}") from exc

    allowed = {"n_spins", "infinite_range_coupling", "fields", "couplings", "fluctuation"}
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    if "n_spins" not in data:
        raise ConfigError(f"{path}: missing required key n_spins")
    n = int(data["n_spins"])
    if n < 1:
        raise ConfigError(f"{path}: n_spins must be >= 1")

    couplings = {}
    for row in data.get("couplings", []):
        if len(row) != 3:
            raise ConfigError(f"{path}: coupling rows must be [i, j, J], got {row}")
        i, j, J = int(row[0]), int(row[1]), float(row[2])
        pair = (i, j) if i < j else (j, i)
        if i == j or not (0 <= i < n and 0 <= j < n):
            raise ConfigError(f"{path}: bad coupling pair ({i},{j}) for N={n}")
        if pair in couplings:
            raise ConfigError(
                f"{path}: coupling pair {pair} listed more than once "
                "(both orders are rejected, not summed)"
            )
        couplings[pair] = J

    raw_fields = data.get("fields", 0.0)
    if isinstance(raw_fields, (int, float)):
        fields = float(raw_fields)
    else:
        h = np.zeros(n)
        seen = set()
        for row in raw_fields:
            if len(row) != 2:
                raise ConfigError(f"{path}: field rows must be [i, h], got {row}")
            i = int(row[0])
            if not 0 <= i < n:
                raise ConfigError(f"{path}: field index {i} out of range")
            if i in seen:
                raise ConfigError(f"{path}: field for site {i} listed twice")
            seen.add(i)
            h[i] = float(row[1])
        fields = h

    try:
        classical = ClassicalIsing(
            n_spins=n,
            couplings=couplings,
            fields=fields,
            infinite_range_coupling=float(data.get("infinite_range_coupling", 0.0)),
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    fluct = None
    if "fluctuation" in data:
        fluct = _build_fluctuation(data["fluctuation"])
    return classical, fluct
