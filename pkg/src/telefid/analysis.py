"""Closed-form average fidelities and the threshold algebra built on them.

Notation used throughout:
  c_meas / c_meas_x   concurrence of the measurement basis (pure / noisy lab)
  c_chan              concurrence of the pure channel
  cbar                concurrence carried by the |01>,|10> block of the X-state
  s = sqrt(rho11 rho44),  n = rho11 + rho44
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

from .channels import XStateParams, werner_xstate

CLASSICAL_LIMIT = 2.0 / 3.0
BOUNDARY_BAND = 1e-9
_RANGE_TOL = 1e-12


class AnalysisError(ValueError):
    pass


class NoRootError(AnalysisError):
    pass


def _check_unit(name: str, v: float) -> float:
    if not (-_RANGE_TOL <= v <= 1.0 + _RANGE_TOL):
        raise AnalysisError(f"{name} must lie in [0, 1], got {v!r}")
    return min(1.0, max(0.0, float(v)))


def fp_closed(c_meas: float, c_chan: float) -> float:
    """Average fidelity with a pure channel: 2/3 + c_meas c_chan / 3."""
    c_meas = _check_unit("c_meas", c_meas)
    c_chan = _check_unit("c_chan", c_chan)
    return 2.0 / 3.0 + c_meas * c_chan / 3.0


def fx_closed(c_meas: float, p: XStateParams) -> float:
    """Average fidelity with an X-state channel.

    Uses cbar = 2(rho23 - s), which is the concurrence whenever the state is
    entangled in the |01>,|10> block and the (non-positive) signed term when it
    is separable; the expression is exact in both cases. States whose
    entanglement lives in the |00>,|11> block are rejected.
    """
    c_meas = _check_unit("c_meas", c_meas)
    if p.rho14 - math.sqrt(p.rho22 * p.rho33) > 0.0:
        raise AnalysisError(
            "X-state is entangled in the |00>,|11> block (rho14 > sqrt(rho22*rho33)); "
            "the closed form assumes the |01>,|10> block carries the entanglement"
        )
    s = math.sqrt(p.rho11 * p.rho44)
    cbar = 2.0 * (p.rho23 - s)
    return 2.0 / 3.0 + (c_meas * (cbar + 2.0 * s) - (p.rho11 + p.rho44)) / 3.0


def frak_C(c: float, rho11: float, rho44: float) -> float:
    """Channel-concurrence threshold as a function of a measurement concurrence c."""
    if not 0.0 < c <= 1.0 + _RANGE_TOL:
        raise AnalysisError(f"threshold argument must lie in (0, 1], got {c!r}")
    s = math.sqrt(rho11 * rho44)
    return ((math.sqrt(rho11) - math.sqrt(rho44)) ** 2 + 2.0 * (1.0 - c) * s) / c


def cal_C(c: float, rho11: float, rho44: float) -> float:
    """Measurement-concurrence threshold as a function of a channel concurrence c."""
    den = c + 2.0 * math.sqrt(rho11 * rho44)
    if den == 0.0:
        raise AnalysisError("threshold undefined: c + 2 sqrt(rho11 rho44) = 0")
    return (rho11 + rho44) / den


def _frak_or_inf(c: float, rho11: float, rho44: float) -> float:
    # c <= 0 makes "value > threshold" unsatisfiable
    return frak_C(c, rho11, rho44) if c > 0.0 else math.inf


def _cal_or_inf(c: float, rho11: float, rho44: float) -> float:
    # a non-positive denominator makes "value > threshold" unsatisfiable
    if c + 2.0 * math.sqrt(rho11 * rho44) <= 0.0:
        return math.inf
    return cal_C(c, rho11, rho44)


def equal_concurrence_threshold(rho11: float, rho44: float) -> float:
    """Common value cbar = c_meas must exceed for F_X > 2/3 when the two are equal."""
    s = math.sqrt(rho11 * rho44)
    return math.sqrt(rho11 + rho44 + rho11 * rho44) - s


def classify_margin(margin: float, band: float = BOUNDARY_BAND) -> str:
    if abs(margin) <= band:
        return "boundary"
    return "above" if margin > 0 else "below"


@dataclass
class RegimeReport:
    """Outcome of one inequality system with the thresholds and margins behind it.

    ``status`` is "above", "below" or "boundary" for the headline comparison
    (F_X vs 2/3 for the quantum-feature check, F_X vs F_p for B1/B2).
    """

    kind: str
    classical_limit_exceeded: bool
    status: str
    satisfied_branch: str | None
    consistent: bool
    improvement: bool | None = None
    threshold_values: dict[str, float] = field(default_factory=dict)
    margins: dict[str, float] = field(default_factory=dict)
    conditions: dict[str, bool] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("threshold_values", "margins"):
            d[key] = {k: _json_float(v) for k, v in d[key].items()}
        return d


def _json_float(v: float):
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


class _Ineq(NamedTuple):
    lhs: float
    rhs: float

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs

    @property
    def holds(self) -> bool:
        return self.lhs > self.rhs


def _branch_name(prefix: str, first: bool, second: bool) -> str | None:
    if first and second:
        return f"{prefix}-both"
    if first:
        return f"{prefix}-set-1"
    if second:
        return f"{prefix}-set-2"
    return None


def _consistent(status: str, verdict: bool) -> bool:
    if status == "boundary":
        return True
    return verdict == (status == "above")


def quantum_feature_check(p: XStateParams, c_meas: float) -> RegimeReport:
    """Does F_X exceed the classical limit, and through which threshold pair."""
    fx = fx_closed(c_meas, p)
    r11, r44 = p.rho11, p.rho44
    s, n = math.sqrt(r11 * r44), r11 + r44
    cbar = 2.0 * (p.rho23 - s)
    direct = c_meas * (cbar + 2.0 * s) - n

    thr = {
        "frak_C(1)": frak_C(1.0, r11, r44),
        "frak_C(c_meas)": _frak_or_inf(c_meas, r11, r44),
        "cal_C(1)": cal_C(1.0, r11, r44),
        "cal_C(cbar)": _cal_or_inf(cbar, r11, r44),
        "equal_concurrence": equal_concurrence_threshold(r11, r44),
    }
    ineq = {
        "set1_channel": _Ineq(cbar, thr["frak_C(1)"]),
        "set1_measurement": _Ineq(c_meas, thr["cal_C(cbar)"]),
        "set2_channel": _Ineq(cbar, thr["frak_C(c_meas)"]),
        "set2_measurement": _Ineq(c_meas, thr["cal_C(1)"]),
    }
    set1 = ineq["set1_channel"].holds and ineq["set1_measurement"].holds
    set2 = ineq["set2_channel"].holds and ineq["set2_measurement"].holds
    status = classify_margin(fx - CLASSICAL_LIMIT)

    margins = {k: v.margin for k, v in ineq.items()}
    margins["direct"] = direct
    margins["fidelity_excess"] = fx - CLASSICAL_LIMIT
    notes = []
    if cbar <= 0.0:
        notes.append("channel is separable; cbar is the signed |01>,|10> term")
    return RegimeReport(
        kind="quantum_feature",
        classical_limit_exceeded=fx > CLASSICAL_LIMIT,
        status=status,
        satisfied_branch=_branch_name("feature", set1, set2),
        consistent=_consistent(status, set1 or set2) and _consistent(status, direct > 0),
        threshold_values=thr,
        margins=margins,
        conditions={k: v.holds for k, v in ineq.items()} | {"set1": set1, "set2": set2},
        notes=notes,
    )


class Improvement(NamedTuple):
    improves: bool
    margin: float


def improvement_check(c_meas_pure: float, c_chan_pure: float, c_meas_x: float,
                      p: XStateParams) -> Improvement:
    """F_X > F_p by direct evaluation of both closed forms; margin is F_X - F_p."""
    margin = fx_closed(c_meas_x, p) - fp_closed(c_meas_pure, c_chan_pure)
    return Improvement(margin > 0.0, margin)


def situation_b1_report(c_meas_pure: float, c_chan_pure: float, c_meas_x: float,
                        p: XStateParams) -> RegimeReport:
    """Improvement analysis when the two labs measure with different concurrences."""
    r11, r44 = p.rho11, p.rho44
    s, n = math.sqrt(r11 * r44), r11 + r44
    cbar = 2.0 * (p.rho23 - s)
    prod = c_meas_pure * c_chan_pure
    cm = c_meas_x
    frak1 = frak_C(1.0, r11, r44)
    frak_cm = _frak_or_inf(cm, r11, r44)

    den2 = cbar + 2.0 * s
    thr = {
        "frak_C(1)": frak1,
        "frak_C(c_meas_x)": frak_cm,
        "product_bound": 1.0 - frak1,
        "less_entangled_bound": c_chan_pure - frak1,
        "set1_channel": prod / cm + frak_cm if cm > 0 else math.inf,
        "set1_measurement": (n + prod) / (1.0 + 2.0 * s),
        "set2_channel": prod + frak1,
        "set2_measurement": (n + prod) / den2 if den2 > 0 else math.inf,
    }
    ineq = {
        "product_bound": _Ineq(thr["product_bound"], prod),
        "less_entangled_bound": _Ineq(thr["less_entangled_bound"], prod),
        "set1_channel": _Ineq(cbar, thr["set1_channel"]),
        "set1_measurement": _Ineq(cm, thr["set1_measurement"]),
        "set2_channel": _Ineq(cbar, thr["set2_channel"]),
        "set2_measurement": _Ineq(cm, thr["set2_measurement"]),
    }
    if n == 0.0:
        ineq["reduced"] = _Ineq(cm * cbar, prod)
    set1 = ineq["set1_channel"].holds and ineq["set1_measurement"].holds
    set2 = ineq["set2_channel"].holds and ineq["set2_measurement"].holds
    verdict = ineq["product_bound"].holds and (set1 or set2)

    direct = improvement_check(c_meas_pure, c_chan_pure, cm, p)
    status = classify_margin(direct.margin)
    consistent = _consistent(status, verdict)
    if "reduced" in ineq:
        consistent = consistent and _consistent(status, ineq["reduced"].holds)

    notes = []
    if not ineq["product_bound"].holds:
        notes.append("c_meas*c_chan >= 1 - frak_C(1): no X-state with these populations can improve")
    band = ineq["product_bound"].holds and not ineq["less_entangled_bound"].holds
    if band:
        notes.append("product lies between c_chan - frak_C(1) and 1 - frak_C(1): "
                     "improvement requires cbar > c_chan")
    if cm == c_meas_pure:
        notes.append("equal measurement concurrences; situation B2 applies")

    margins = {k: v.margin for k, v in ineq.items()}
    margins["fx_minus_fp"] = direct.margin
    conditions = {k: v.holds for k, v in ineq.items()}
    conditions.update(set1=set1, set2=set2, requires_more_entangled_channel=band,
                      noisy_channel_less_entangled=cbar < c_chan_pure)
    fx = fx_closed(cm, p)
    return RegimeReport(
        kind="B1",
        classical_limit_exceeded=fx > CLASSICAL_LIMIT,
        status=status,
        satisfied_branch=_branch_name("B1", set1, set2),
        consistent=consistent,
        improvement=direct.improves,
        threshold_values=thr,
        margins=margins,
        conditions=conditions,
        notes=notes,
    )


def situation_b2_report(c_meas_shared: float, c_chan_pure: float,
                        p: XStateParams) -> RegimeReport:
    """Improvement analysis when both labs measure with the same concurrence."""
    r11, r44 = p.rho11, p.rho44
    s = math.sqrt(r11 * r44)
    cbar = 2.0 * (p.rho23 - s)
    cm, cc = c_meas_shared, c_chan_pure
    frak1 = frak_C(1.0, r11, r44)

    thr = {
        "frak_C(1)": frak1,
        "frak_C(c_meas)": _frak_or_inf(cm, r11, r44),
        "pure_channel_bound": 1.0 - frak1,
        "cal_C(1)": cal_C(1.0, r11, r44),
        "cal_C(1-c_chan)": _cal_or_inf(1.0 - cc, r11, r44),
        "cal_C(cbar-c_chan)": _cal_or_inf(cbar - cc, r11, r44),
        "cal_C(cbar)": _cal_or_inf(cbar, r11, r44),
    }
    ineq = {
        "pure_channel_bound": _Ineq(thr["pure_channel_bound"], cc),
        "set1_channel": _Ineq(cbar, cc + thr["frak_C(c_meas)"]),
        "set1_measurement": _Ineq(cm, thr["cal_C(1-c_chan)"]),
        "set2_channel": _Ineq(cbar, cc + frak1),
        "set2_measurement": _Ineq(cm, thr["cal_C(cbar-c_chan)"]),
    }
    set1 = ineq["set1_channel"].holds and ineq["set1_measurement"].holds
    set2 = ineq["set2_channel"].holds and ineq["set2_measurement"].holds
    verdict = ineq["pure_channel_bound"].holds and (set1 or set2)

    direct = improvement_check(cm, cc, cm, p)
    status = classify_margin(direct.margin)

    total = cbar + cc
    notes = ["'cal_C(cbar)' is the largest quantum-feature threshold on the measurement"]
    if frak1 == 0.0:
        notes.append("frak_C(1) = 0: the bound on the pure-channel concurrence is vacuous")
    if cm == cc:
        notes.append("corner case: c_meas equals the pure-channel concurrence")
    if cm == cbar:
        notes.append("corner case: c_meas equals the X-state concurrence")

    margins = {k: v.margin for k, v in ineq.items()}
    margins["fx_minus_fp"] = direct.margin
    margins["concurrence_sum_minus_one"] = total - 1.0
    conditions = {k: v.holds for k, v in ineq.items()}
    conditions.update(
        set1=set1,
        set2=set2,
        concurrence_sum_exceeds_one=total > 1.0,
        small_threshold_below_feature_threshold=thr["cal_C(1-c_chan)"] < thr["cal_C(cbar)"],
    )
    fx = fx_closed(cm, p)
    return RegimeReport(
        kind="B2",
        classical_limit_exceeded=fx > CLASSICAL_LIMIT,
        status=status,
        satisfied_branch=_branch_name("B2", set1, set2),
        consistent=_consistent(status, verdict),
        improvement=direct.improves,
        threshold_values=thr,
        margins=margins,
        conditions=conditions,
        notes=notes,
    )


def werner_crossover(c_meas_x: float, fp_target: float, tol: float = 1e-15) -> float:
    """Werner mixing parameter at which F_X reaches ``fp_target`` (bisection on [0, 1])."""
    if not 0.0 < c_meas_x <= 1.0:
        raise AnalysisError(f"c_meas_x must lie in (0, 1], got {c_meas_x!r}")
    if not CLASSICAL_LIMIT - _RANGE_TOL <= fp_target <= 1.0:
        raise AnalysisError(f"fp_target must lie in [2/3, 1], got {fp_target!r}")

    def f(g: float) -> float:
        return fx_closed(c_meas_x, werner_xstate(g)) - fp_target

    lo, hi = 0.0, 1.0
    if f(hi) < 0.0:
        raise NoRootError(
            f"F_X(c_meas={c_meas_x}, gamma=1) = {f(hi) + fp_target!r} < target {fp_target!r}"
        )
    if f(lo) >= 0.0:
        return lo
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol:
            break
    return 0.5 * (lo + hi)


def regime_label(fx: float, fp_ref: float, band: float = BOUNDARY_BAND) -> str:
    """Sweep label: classical, quantum, improved, or the boundary it sits on."""
    if abs(fx - CLASSICAL_LIMIT) <= band:
        return "boundary-classical"
    if abs(fx - fp_ref) <= band:
        return "boundary-improved"
    if fx < CLASSICAL_LIMIT:
        return "classical"
    return "improved" if fx > fp_ref else "quantum"
