"""Problem instance and the closed-form constants derived from it.

A problem instance is the quintuple ``(n, m, rho1, beta, lambda)`` plus the
extinction horizon ``T``.  Every constant used elsewhere in the package is
computed here once, directly from the formulas (``m = 0`` is an ordinary
value, never a limit).
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Any, Mapping

from .errors import ConfigError

PARAM_KEYS = ("n", "m", "rho1", "beta", "lambda", "T")


@dataclass(frozen=True)
class Params:
    n: int
    m: float
    rho1: float
    beta: float
    lam: float
    T: float = 1.0

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "Params":
        """Build from a JSON-style mapping with exactly the keys of PARAM_KEYS."""
        missing = [k for k in PARAM_KEYS if k not in data]
        if missing:
            raise ConfigError(f"missing parameter key(s): {', '.join(missing)}")
        extra = sorted(set(data) - set(PARAM_KEYS))
        if extra:
            raise ConfigError(f"unknown parameter key(s): {', '.join(extra)}")
        n = data["n"]
        if isinstance(n, bool) or not float(n).is_integer():
            raise ConfigError(f"n must be an integer, got {n!r}")
        try:
            return cls(
                n=int(n),
                m=float(data["m"]),
                rho1=float(data["rho1"]),
                beta=float(data["beta"]),
                lam=float(data["lambda"]),
                T=float(data["T"]),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"non-numeric parameter: {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> "Params":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("parameter JSON must be an object")
        return cls.from_mapping(data)

    def to_dict(self) -> dict[str, Any]:
        return {"n": self.n, "m": self.m, "rho1": self.rho1, "beta": self.beta,
                "lambda": self.lam, "T": self.T}

    def with_(self, **changes: Any) -> "Params":
        fields = asdict(self)
        fields.update(changes)
        return Params(**fields)


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations

    def raise_if_invalid(self) -> None:
        if self.violations:
            raise ConfigError("; ".join(self.violations))


def m_upper(n: int) -> float:
    """Critical exponent (n-2)/n; admissible m lie in [0, m_upper)."""
    return (n - 2) / n


def beta0(n: int, m: float, rho1: float) -> float:
    denom = n - 2 - n * m
    if denom <= 0:
        raise ConfigError(f"n-2-n*m = {denom} <= 0; m must be below (n-2)/n")
    return m * rho1 / denom


def validate(p: Params, strict: bool = True) -> ValidationReport:
    """List every violated regime constraint.

    ``strict`` demands beta > beta0(m), which the blow-up expansion and the
    uniqueness-based features need; otherwise beta >= beta0(m) is accepted.
    """
    bad: list[str] = []
    if p.n < 3:
        bad.append(f"n = {p.n} < 3")
    if not p.m >= 0:
        bad.append(f"m = {p.m} < 0")
    if p.n >= 3 and not p.m < m_upper(p.n):
        bad.append(f"m = {p.m} >= (n-2)/n = {m_upper(p.n)!r}")
    if not p.rho1 > 0:
        bad.append(f"rho1 = {p.rho1} <= 0")
    if not p.lam > 0:
        bad.append(f"lambda = {p.lam} <= 0")
    if not p.T > 0:
        bad.append(f"T = {p.T} <= 0")
    if not bad:
        b0 = beta0(p.n, p.m, p.rho1)
        if strict and not p.beta > b0:
            bad.append(f"beta = {p.beta} <= beta0 = {b0!r} (strict regime)")
        elif not strict and not p.beta >= b0:
            bad.append(f"beta = {p.beta} < beta0 = {b0!r}")
    return ValidationReport(tuple(bad))


@dataclass(frozen=True)
class DerivedConstants:
    alpha_m: float
    alpha0: float
    beta0: float
    beta1_0: float
    a1: float
    a2: float
    a3: float
    A1: float
    A2: float
    Cm: float
    C0: float
    w_inf: float
    w1: float | None

    def to_dict(self) -> dict[str, float | None]:
        return asdict(self)


def derive(p: Params) -> DerivedConstants:
    n, m, rho1, beta = p.n, p.m, p.rho1, p.beta
    b0 = beta0(n, m, rho1)
    if beta == 0:
        raise ConfigError("beta = 0 makes the expansion constants singular")
    alpha_m = (2 * beta + rho1) / (1 - m)
    alpha0 = 2 * beta + rho1
    a1 = ((n - 2) * beta - 2 * m * alpha_m + rho1) / rho1
    a2 = beta**2 / rho1
    a3 = (alpha_m * beta * (n - 2) - m * alpha_m**2) / rho1**2
    return DerivedConstants(
        alpha_m=alpha_m,
        alpha0=alpha0,
        beta0=b0,
        beta1_0=rho1 / (n - 2),
        a1=a1,
        a2=a2,
        a3=a3,
        A1=a3 / a2,
        A2=a3 * (m * a3 - a1) / a2**2,
        Cm=alpha_m / (rho1 * beta) * (n - 2 - m * alpha_m / beta),
        C0=alpha0 * (n - 2) / (rho1 * beta),
        w_inf=2 * (n - 2) / (alpha0 - 2 * beta),
        w1=2 / beta if beta > 0 else None,
    )


def envelope_admissible(p: Params) -> bool:
    """Whether m lies below the threshold where the two-sided envelope is proven.

    The upper envelope needs n - 2 - 2*m*alpha_m/beta > 0.
    """
    alpha_m = (2 * p.beta + p.rho1) / (1 - p.m)
    return p.beta > 0 and p.n - 2 - 2 * p.m * alpha_m / p.beta > 0


def origin_value(p: Params) -> float:
    """Limit of r**(alpha_m/beta) * v(r) as r -> 0."""
    return p.lam ** (-p.rho1 / ((1 - p.m) * p.beta))


def origin_slope(p: Params, c: DerivedConstants) -> float:
    return c.A1 * p.lam ** (-p.m * p.rho1 / ((1 - p.m) * p.beta))


def origin_curvature(p: Params, c: DerivedConstants) -> float:
    return c.A2 * p.lam ** (-(2 * p.m - 1) * p.rho1 / ((1 - p.m) * p.beta))

