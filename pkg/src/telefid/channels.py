"""Channel families: pure partially entangled, X-state and Werner."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .qkernel import ATOL, StateError, projector

SQRT_HALF = math.sqrt(0.5)

# Bell states in the order (phi+, phi-, psi+, psi-)
BELL_STATES = {
    "phi+": np.array([1, 0, 0, 1], dtype=complex) * SQRT_HALF,
    "phi-": np.array([1, 0, 0, -1], dtype=complex) * SQRT_HALF,
    "psi+": np.array([0, 1, 1, 0], dtype=complex) * SQRT_HALF,
    "psi-": np.array([0, 1, -1, 0], dtype=complex) * SQRT_HALF,
}


class ChannelError(ValueError):
    """Invalid channel parameters; the message names the violated invariant."""


@dataclass(frozen=True)
class PureChannel:
    """alpha|01> + beta|10> with 0 <= alpha <= beta."""

    alpha: float
    beta: float
    reordered: bool = False

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ChannelError("pure channel amplitudes must be non-negative")
        if abs(self.alpha**2 + self.beta**2 - 1.0) > ATOL:
            raise ChannelError(
                f"pure channel not normalized: alpha^2 + beta^2 = {self.alpha**2 + self.beta**2!r}"
            )
        if self.alpha > self.beta:
            a, b = self.alpha, self.beta
            object.__setattr__(self, "alpha", b)
            object.__setattr__(self, "beta", a)
            object.__setattr__(self, "reordered", True)

    @classmethod
    def from_alpha(cls, alpha: float) -> "PureChannel":
        if not 0.0 <= alpha <= 1.0:
            raise ChannelError(f"alpha must lie in [0, 1], got {alpha!r}")
        return cls(alpha, math.sqrt(1.0 - alpha * alpha))

    @classmethod
    def from_concurrence(cls, c: float) -> "PureChannel":
        alpha, beta = split_concurrence(c)
        return cls(alpha, beta)

    @property
    def concurrence(self) -> float:
        return pure_concurrence(self)

    def ket(self) -> np.ndarray:
        return np.array([0.0, self.alpha, self.beta, 0.0], dtype=complex)


def split_concurrence(c: float) -> tuple[float, float]:
    """Return (a, b), a <= b, a^2 + b^2 = 1 and 2ab = c."""
    if not 0.0 <= c <= 1.0:
        raise ChannelError(f"concurrence must lie in [0, 1], got {c!r}")
    a = math.sqrt((1.0 - math.sqrt(1.0 - c * c)) / 2.0)
    b = math.sqrt(1.0 - a * a)
    return min(a, b), max(a, b)


def pure_channel_density(ch: PureChannel) -> np.ndarray:
    return projector(ch.ket())


def pure_concurrence(ch: PureChannel) -> float:
    return 2.0 * ch.alpha * ch.beta


@dataclass(frozen=True)
class XStateParams:
    """Populations and (real, non-negative) coherences of an X-state.

    ``phases`` records the phases of complex coherences removed by
    ``from_complex``; it is (0, 0) for states built directly from reals.
    """

    rho11: float
    rho22: float
    rho33: float
    rho44: float
    rho14: float = 0.0
    rho23: float = 0.0
    phases: tuple[float, float] = field(default=(0.0, 0.0), compare=False)

    def __post_init__(self):
        for name in ("rho11", "rho22", "rho33", "rho44", "rho14", "rho23"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ChannelError(f"{name} is not finite")
            if v < -ATOL:
                raise ChannelError(f"{name} must be non-negative, got {v!r}")
            object.__setattr__(self, name, max(float(v), 0.0))
        tr = self.rho11 + self.rho22 + self.rho33 + self.rho44
        if abs(tr - 1.0) > ATOL:
            raise ChannelError(f"X-state trace is {tr!r}, expected 1")
        if self.rho23 > math.sqrt(self.rho22 * self.rho33) + ATOL:
            raise ChannelError(
                "block-PSD violated in the |01>,|10> block: rho23 > sqrt(rho22*rho33)"
            )
        if self.rho14 > math.sqrt(self.rho11 * self.rho44) + ATOL:
            raise ChannelError(
                "block-PSD violated in the |00>,|11> block: rho14 > sqrt(rho11*rho44)"
            )

    @classmethod
    def from_complex(cls, rho11, rho22, rho33, rho44, rho14=0.0, rho23=0.0) -> "XStateParams":
        """Accept complex coherences and strip their phases.

        The phases are removable by local Z rotations; they are kept on the
        returned record as ``phases = (arg rho14, arg rho23)``.
        """
        r14, p14 = cmath.polar(complex(rho14))
        r23, p23 = cmath.polar(complex(rho23))
        return cls(float(rho11), float(rho22), float(rho33), float(rho44), r14, r23, (p14, p23))

    @classmethod
    def from_pure(cls, ch: PureChannel) -> "XStateParams":
        return cls(0.0, ch.alpha**2, ch.beta**2, 0.0, 0.0, ch.alpha * ch.beta)

    @property
    def sqrt_corners(self) -> float:
        """sqrt(rho11 * rho44)."""
        return math.sqrt(self.rho11 * self.rho44)

    @property
    def corner_population(self) -> float:
        """rho11 + rho44, the weight on |00>, |11>."""
        return self.rho11 + self.rho44

    @property
    def principal_term(self) -> float:
        """2(rho23 - sqrt(rho11 rho44)); the concurrence when the |01>,|10> block dominates."""
        return 2.0 * (self.rho23 - self.sqrt_corners)

    @property
    def concurrence(self) -> float:
        return xstate_concurrence(self)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("rho11", "rho22", "rho33", "rho44", "rho14", "rho23")}


def xstate_density(p: XStateParams) -> np.ndarray:
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0], rho[1, 1], rho[2, 2], rho[3, 3] = p.rho11, p.rho22, p.rho33, p.rho44
    rho[0, 3] = rho[3, 0] = p.rho14
    rho[1, 2] = rho[2, 1] = p.rho23
    return rho


def xstate_concurrence(p: XStateParams) -> float:
    c = 2.0 * max(
        0.0,
        p.rho23 - math.sqrt(p.rho11 * p.rho44),
        p.rho14 - math.sqrt(p.rho22 * p.rho33),
    )
    return min(c, 1.0)


def principal_subspace_ok(p: XStateParams) -> bool:
    """True when the |01>,|10> block carries the entanglement and the other block none."""
    return (p.rho23 - math.sqrt(p.rho11 * p.rho44) > 0.0
            and p.rho14 - math.sqrt(p.rho22 * p.rho33) <= 0.0)


@dataclass(frozen=True)
class WernerParams:
    gamma: float

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ChannelError(f"Werner gamma must lie in [0, 1], got {self.gamma!r}")


def werner_xstate(w: WernerParams | float) -> XStateParams:
    """(1 - g) I/4 + g |psi+><psi+| as X-state parameters."""
    if not isinstance(w, WernerParams):
        w = WernerParams(float(w))
    g = w.gamma
    return XStateParams(
        rho11=(1.0 - g) / 4.0,
        rho22=(1.0 + g) / 4.0,
        rho33=(1.0 + g) / 4.0,
        rho44=(1.0 - g) / 4.0,
        rho14=0.0,
        rho23=g / 2.0,
    )


def bell_diagonal_weights(p: XStateParams) -> tuple[float, float, float, float] | None:
    """Weights on (phi+, phi-, psi+, psi-) when the X-state is Bell diagonal, else None."""
    if abs(p.rho11 - p.rho44) > ATOL or abs(p.rho22 - p.rho33) > ATOL:
        return None
    return (p.rho11 + p.rho14, p.rho11 - p.rho14, p.rho22 + p.rho23, p.rho22 - p.rho23)


def bell_mixture(weights) -> np.ndarray:
    return sum(w * projector(BELL_STATES[k]) for w, k in zip(weights, BELL_STATES))


def random_xstate(rng: np.random.Generator, principal: bool = False) -> XStateParams:
    """Random valid X-state: Dirichlet populations, coherences uniform within block bounds.

    With ``principal=True`` the result satisfies ``principal_subspace_ok``; the
    populations are sorted so the |01>,|10> block is the larger one.
    """
    while True:
        d = rng.dirichlet(np.ones(4))
        r11, r22, r33, r44 = d
        b23 = math.sqrt(r22 * r33)
        b14 = math.sqrt(r11 * r44)
        if not principal:
            return XStateParams(r11, r22, r33, r44,
                                rng.uniform(0.0, b14), rng.uniform(0.0, b23))
        if b23 <= b14:
            r11, r22, r33, r44 = r22, r11, r44, r33
            b23, b14 = b14, b23
        if b23 - b14 < 1e-9:
            continue
        rho23 = rng.uniform(b14, b23)
        if rho23 <= b14:
            continue
        return XStateParams(r11, r22, r33, r44, rng.uniform(0.0, b14), rho23)


def channel_from_spec(spec: dict) -> tuple[np.ndarray, XStateParams]:
    """Parse ``{"kind": "pure"|"xstate"|"werner", ...}`` into (density, X-state params).

    Every supported family is an X-state, so the params are always returned.
    """
    kind = spec.get("kind")
    try:
        if kind == "pure":
            if "alpha" in spec:
                alpha = float(spec["alpha"])
                beta = float(spec["beta"]) if "beta" in spec else math.sqrt(max(0.0, 1 - alpha**2))
                ch = PureChannel(alpha, beta)
            elif "concurrence" in spec:
                ch = PureChannel.from_concurrence(float(spec["concurrence"]))
            else:
                raise ChannelError("pure channel needs 'alpha' or 'concurrence'")
            return pure_channel_density(ch), XStateParams.from_pure(ch)
        if kind == "werner":
            p = werner_xstate(WernerParams(float(spec["gamma"])))
            return xstate_density(p), p
        if kind == "xstate":
            vals = {k: spec.get(k, 0.0) for k in ("rho11", "rho22", "rho33", "rho44", "rho14", "rho23")}
            p = XStateParams.from_complex(**{k: _number(v) for k, v in vals.items()})
            return xstate_density(p), p
    except KeyError as exc:
        raise ChannelError(f"{kind} channel is missing parameter {exc.args[0]!r}") from None
    except StateError as exc:
        raise ChannelError(str(exc)) from None
    raise ChannelError(f"unknown channel kind {kind!r}")


def _number(v):
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, str):
        return complex(v.replace(" ", "")) if "j" in v else float(v)
    return v
