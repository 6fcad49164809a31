"""Randomized self-checks run by ``telefid validate``."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import analysis, channels, protocol, qkernel


@dataclass
class SuiteResult:
    name: str
    cases: int
    passed: bool
    max_error: float = 0.0
    failure: dict | None = field(default=None)


class _Fail(Exception):
    def __init__(self, inputs: dict, error: float):
        super().__init__(inputs)
        self.inputs = inputs
        self.error = error


def _run(name: str, n: int, rng: np.random.Generator, case: Callable) -> SuiteResult:
    worst = 0.0
    for i in range(n):
        try:
            worst = max(worst, case(rng))
        except _Fail as f:
            return SuiteResult(name, i + 1, False, f.error, f.inputs)
    return SuiteResult(name, n, True, worst)


def _pure_oracle(rng):
    alpha, c = rng.uniform(0, 1), rng.uniform(0, 1)
    ch = channels.PureChannel.from_alpha(alpha)
    basis = protocol.basis_from_concurrence(c)
    err = abs(protocol.average_fidelity_quadrature(ch, basis)
              - analysis.fp_closed(basis.concurrence, ch.concurrence))
    if err > 1e-10:
        raise _Fail({"alpha": alpha, "basis_concurrence": c}, err)
    return err


def _xstate_oracle(rng):
    p = channels.random_xstate(rng, principal=True)
    c = rng.uniform(0, 1)
    basis = protocol.basis_from_concurrence(c)
    err = abs(protocol.average_fidelity_quadrature(p, basis) - analysis.fx_closed(c, p))
    if err > 1e-10:
        raise _Fail({"xstate": p.to_dict(), "basis_concurrence": c}, err)
    return err


def _identity(rng):
    psi = qkernel.haar_random_qubit(rng)
    ch = channels.PureChannel.from_alpha(rng.uniform(0, 1))
    basis = protocol.build_basis(*sorted(_unit_pair(rng)))
    err = protocol.decomposition_identity_check(psi, ch, basis)
    if err >= 1e-12:
        raise _Fail({"psi": [str(a) for a in psi], "alpha": ch.alpha, "x": basis.x}, err)
    return err


def _unit_pair(rng):
    t = rng.uniform(0, math.pi / 2)
    return abs(math.cos(t)), abs(math.sin(t))


def _concurrence(rng):
    p = channels.random_xstate(rng, principal=bool(rng.integers(2)))
    err = abs(channels.xstate_concurrence(p)
              - qkernel.wootters_concurrence(channels.xstate_density(p)))
    if err > 1e-10:
        raise _Fail({"xstate": p.to_dict()}, err)
    return err


def _thresholds(rng):
    p = channels.random_xstate(rng, principal=True)
    c_x, c_p, cc = rng.uniform(0, 1, size=3)
    reports = [
        analysis.quantum_feature_check(p, c_x),
        analysis.situation_b1_report(c_p, cc, c_x, p),
        analysis.situation_b2_report(c_x, cc, p),
    ]
    for r in reports:
        if not r.consistent:
            raise _Fail({"xstate": p.to_dict(), "c_meas_x": c_x, "c_meas_pure": c_p,
                         "c_chan_pure": cc, "report": r.kind}, 1.0)
    return 0.0


SUITES = {
    "oracle-pure": _pure_oracle,
    "oracle-xstate": _xstate_oracle,
    "identity": _identity,
    "concurrence": _concurrence,
    "thresholds": _thresholds,
}


def run_all(depth: str = "quick", seed: int = 0, stop_on_failure: bool = True) -> list[SuiteResult]:
    n = {"quick": 100, "full": 10_000}[depth]
    results = []
    for i, (name, case) in enumerate(SUITES.items()):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i,)))
        res = _run(name, n, rng, case)
        results.append(res)
        if not res.passed and stop_on_failure:
            break
    return results
