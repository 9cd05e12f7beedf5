"""Closed-form constants, feasibility conditions, error envelopes and diagnostics.

Notation: ``|.|`` is the L^2 norm, ``||.||`` the gradient norm and ``|A .|``
the Stokes-operator norm. ``f_sup_sq`` stands for sup_t |f(t)|^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import spectral_core as sc
from .dynamics import AssimilationParams, ModelParams, TwinState
from .spectral_core import SpectralVectorField

# Gagliardo-Nirenberg constant used for the condition checks
GN_CONSTANT = (4.0 / (3.0 * math.sqrt(3.0))) ** 0.75


@dataclass(frozen=True)
class Inequality:
    """A named scalar inequality ``lhs <relation> rhs`` with its verdict."""

    name: str
    lhs: float
    rhs: float
    relation: str  # one of "<", "<=", ">"

    @property
    def ok(self) -> bool:
        if self.relation == "<":
            return self.lhs < self.rhs
        if self.relation == "<=":
            return self.lhs <= self.rhs
        return self.lhs > self.rhs

    @property
    def verdict(self) -> str:
        return "PASS" if self.ok else "FAIL"

    def items(self) -> list[tuple[str, object]]:
        return [
            (f"{self.name}.lhs", self.lhs),
            (f"{self.name}.relation", self.relation),
            (f"{self.name}.rhs", self.rhs),
            (f"{self.name}.verdict", self.verdict),
        ]


@dataclass(frozen=True)
class ConditionReport:
    lambda1: float
    M1: float
    C1: float
    regularity: tuple[Inequality, Inequality]
    hyp1: Inequality
    hyp2: Inequality
    hyp3: Inequality
    M_alpha: float
    c: float
    c1: float
    c2: float
    # provenance of M1 and diagnostics logged next to the verdicts
    M1_source: str = "computed"
    extras: dict[str, object] = field(default_factory=dict, compare=False)

    @property
    def regularity_ok(self) -> bool:
        return all(q.ok for q in self.regularity)

    @property
    def hypotheses_ok(self) -> bool:
        return self.hyp1.ok and self.hyp2.ok and self.hyp3.ok

    def items(self) -> list[tuple[str, object]]:
        out: list[tuple[str, object]] = [
            ("lambda1", self.lambda1),
            ("M1", self.M1),
            ("M1_source", self.M1_source),
            ("C1", self.C1),
            ("M_alpha", self.M_alpha),
            ("c", self.c),
            ("c1", self.c1),
            ("c2", self.c2),
        ]
        for q in (*self.regularity, self.hyp1, self.hyp2, self.hyp3):
            out.extend(q.items())
        out.append(("regularity_ok", self.regularity_ok))
        out.append(("hypotheses_ok", self.hypotheses_ok))
        out.extend(sorted(self.extras.items()))
        return out

    def to_text(self) -> str:
        """Flat ``key=value`` block, one entry per line."""
        return "".join(f"{k}={_fmt(v)}\n" for k, v in self.items())


def _fmt(v: object) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


# --- a-priori bounds -------------------------------------------------------------


def poincare_constant(L: float) -> float:
    return 4 * math.pi**2 / L**2


def combined_norm_sq(u: SpectralVectorField, scale: float) -> float:
    """|u|^2 + scale^2 ||u||^2."""
    return sc.norm_sq(u.grid, u.coeffs, 0) + scale**2 * sc.norm_sq(u.grid, u.coeffs, 1)


def compute_M1(u0: SpectralVectorField, f_sup_sq: float, p: ModelParams) -> float:
    lam1 = poincare_constant(p.L)
    return combined_norm_sq(u0, p.alpha) + f_sup_sq / (lam1**2 * p.nu**2)


def check_regularity_conditions(
    p: ModelParams, a: AssimilationParams, c1: float, c2: float
) -> tuple[Inequality, Inequality]:
    """Nudging-strength bounds under which the assimilated system is well posed."""
    bound = 0.5 * p.nu * min(1.0 / (c1**2 * a.h**2), a.beta**2 / (c2**2 * a.h**4))
    first = Inequality("regularity1", a.eta, bound, "<=")
    second = Inequality("regularity2", a.eta**2 * c2**2 * a.h**4, p.nu**2 / 4, "<")
    return first, second


def hypothesis_threshold(p: ModelParams, M1: float, c: float) -> float:
    """C1 = (4/3) 15^3 M1^2 c^4 / (2^11 nu^3 alpha^4)."""
    return (4.0 / 3.0) * 15**3 * M1**2 * c**4 / (2**11 * p.nu**3 * p.alpha**4)


def check_convergence_hypotheses(
    p: ModelParams, a: AssimilationParams, M1: float, c: float, c1: float, c2: float
) -> tuple[float, Inequality, Inequality, Inequality]:
    """(C1, hyp1, hyp2, hyp3) for the long-time error estimate."""
    nu, eta, beta, h = p.nu, a.eta, a.beta, a.h
    C1 = hypothesis_threshold(p, M1, c)
    hyp1 = Inequality("hyp1", eta, C1, ">")
    lhs2 = (
        eta * c1**2 * h**2
        + 5 * eta**2 * beta**2 / (2 * nu) * c1**2 * h**2
        + 30**3 * c**4 * M1**2 / (4**4 * nu**3 * p.alpha**4)
        - eta * beta**2
    )
    hyp2 = Inequality("hyp2", lhs2, nu / 4, "<")
    lhs3 = eta * c2**2 * h**4 + 5 * c2**2 * eta**2 * beta**2 * h**4 / (2 * nu)
    hyp3 = Inequality("hyp3", lhs3, nu * beta**2 / 4, "<")
    return C1, hyp1, hyp2, hyp3


def compute_M_alpha(
    p: ModelParams, a: AssimilationParams, M1: float, f_sup_sq: float, c: float = GN_CONSTANT
) -> float:
    """Asymptotic error constant, transcribed term by term with T = 1/(nu lambda1)."""
    nu, al, be = p.nu, p.alpha, a.beta
    lam1 = poincare_constant(p.L)
    S = f_sup_sq
    pi4 = math.pi**4
    prefactor = 5 * abs(be**2 - al**2) ** 2 / be
    bracket = (
        (1 / (nu * be))
        * (6 * M1 / (nu * al**2) + 6 * S / (nu**3 * lam1**2 * al**2))
        * (nu**2 + c**2 * M1 / (16 * pi4 * math.sqrt(lam1) * al**2))
        + 3 * c**2 * M1**2 / (16 * nu**2 * be * pi4 * al**6 * lam1**1.5)
        + 3 * S / (nu**2 * lam1 * be)
        + (nu / be) * (M1 / (nu * al**2) + S / (nu**3 * al**2 * lam1**2))
        + (c**2 * M1 / (2 * nu * al**2)) * (M1 / (nu * al**2) + S / (lam1**2 * nu**3 * al**2))
    )
    return prefactor * bracket


def derivative_budget(
    p: ModelParams, M1: float, f_sup_sq: float, T: float, c: float = GN_CONSTANT
) -> float:
    """Ceiling for the integral of |du/dt|^2 over a window of length T."""
    nu, al = p.nu, p.alpha
    lam1 = poincare_constant(p.L)
    S = f_sup_sq
    pi4 = math.pi**4
    return (
        (6 * M1 / (nu * al**2) + 6 * T * S / (nu**2 * lam1 * al**2))
        * (nu**2 + c**2 * M1 / (16 * pi4 * math.sqrt(lam1) * al**2))
        + 3 * c**2 * M1**2 * T / (16 * pi4 * al**6 * math.sqrt(lam1))
        + 3 * T * S
    )


# name used by the operation list this package implements
lemma_LEM2_budget = derivative_budget


# --- envelopes -------------------------------------------------------------------


def gronwall_envelope(xi0: float, C: float, M: float, T: float, t: float, t0: float = 0.0) -> float:
    """Bound on xi(t) when xi' + C xi <= b(t) and every T-window of b integrates to <= M."""
    if not (C > 0 and T > 0):
        raise ValueError("C and T must be positive")
    if t < t0:
        raise ValueError("t must not precede t0")
    # e^{2CT}/(e^{CT}-1) = e^{CT}/(1-e^{-CT}), stable for large CT
    return math.exp(-C * (t - t0)) * xi0 + M * math.exp(C * T) / -math.expm1(-C * T)


def envelope_factor() -> float:
    """e/(e^{1/2}-1), the Gronwall factor at C T = 1/2."""
    return math.e / math.expm1(0.5)


def theorem_envelope(
    g0_combined: float, p: ModelParams, a: AssimilationParams, M_alpha: float, t: float
) -> float:
    """Bound on |g|^2 + beta^2 ||g||^2 at time t (decay rate lambda1 nu / 2)."""
    lam1 = poincare_constant(p.L)
    return math.exp(-lam1 * p.nu * t / 2) * g0_combined + M_alpha * envelope_factor()


# --- run diagnostics -------------------------------------------------------------


@dataclass(frozen=True)
class ErrorRecord:
    t: float
    err_L2sq: float
    err_H1sq: float
    combined: float
    normalized: float
    envelope: float | None


def error_record(
    state: TwinState,
    a: AssimilationParams,
    p: ModelParams | None = None,
    report: ConditionReport | None = None,
    g0_combined: float | None = None,
) -> ErrorRecord:
    """Norms of g = w - u at the state's time.

    The envelope is filled only when ``report`` says every hypothesis holds;
    it then needs ``p`` and the initial combined error ``g0_combined``.
    """
    grid = state.grid
    g = state.w.coeffs - state.u.coeffs
    u = state.u.coeffs
    e_l2 = sc.norm_sq(grid, g, 0)
    e_h1 = sc.norm_sq(grid, g, 1)
    stored_combined = e_l2 + a.beta**2 * e_h1
    truth = sc.norm_sq(grid, u, 0) + a.beta**2 * sc.norm_sq(grid, u, 1)
    normalized = stored_combined / truth if truth > 0 else (0.0 if stored_combined == 0 else math.inf)
    # stored fields carry a factor 2**scale_exp, squared norms 2**(2 scale_exp)
    shift = -2 * state.scale_exp
    e_l2, e_h1 = math.ldexp(e_l2, shift), math.ldexp(e_h1, shift)
    combined = e_l2 + a.beta**2 * e_h1
    envelope = None
    if report is not None and report.hypotheses_ok:
        if p is None or g0_combined is None:
            raise ValueError("an envelope needs the model parameters and the initial error")
        envelope = theorem_envelope(g0_combined, p, a, report.M_alpha, state.t)
    return ErrorRecord(state.t, e_l2, e_h1, combined, normalized, envelope)


def build_report(
    p: ModelParams,
    a: AssimilationParams,
    u0: SpectralVectorField,
    c: float = GN_CONSTANT,
    M1_override: float | None = None,
) -> ConditionReport:
    """Evaluate every condition and constant for one experiment.

    ``M1_override`` replaces the a-priori bound computed from ``u0``; the
    computed value and the verdicts it would give are kept in ``extras``.
    """
    f_sq = _forcing_sup_sq(p)
    M1_computed = compute_M1(u0, f_sq, p)
    M1 = M1_computed if M1_override is None else float(M1_override)
    C1, h1, h2, h3 = check_convergence_hypotheses(p, a, M1, c, a.c1, a.c2)
    extras: dict[str, object] = {"M1_computed": M1_computed, "forcing_sup_sq": f_sq}
    if M1_override is not None:
        C1c, h1c, h2c, h3c = check_convergence_hypotheses(p, a, M1_computed, c, a.c1, a.c2)
        extras.update(
            {
                "computed_M1.C1": C1c,
                "computed_M1.hyp1.verdict": h1c.verdict,
                "computed_M1.hyp2.verdict": h2c.verdict,
                "computed_M1.hyp3.verdict": h3c.verdict,
                "computed_M1.M_alpha": compute_M_alpha(p, a, M1_computed, f_sq, c),
            }
        )
    return ConditionReport(
        lambda1=poincare_constant(p.L),
        M1=M1,
        C1=C1,
        regularity=check_regularity_conditions(p, a, a.c1, a.c2),
        hyp1=h1,
        hyp2=h2,
        hyp3=h3,
        M_alpha=compute_M_alpha(p, a, M1, f_sq, c),
        c=c,
        c1=a.c1,
        c2=a.c2,
        M1_source="computed" if M1_override is None else "configured",
        extras=extras,
    )


def _forcing_sup_sq(p: ModelParams) -> float:
    return 0.0 if p.forcing is None else sc.norm_sq(p.forcing.grid, p.forcing.coeffs, 0)


def derivative_energy(rates: np.ndarray, dt: float) -> float:
    """Trapezoidal integral of sampled |du/dt|^2 values spaced dt apart."""
    rates = np.asarray(rates, dtype=float)
    if rates.size < 2:
        return 0.0
    return float(dt * (rates.sum() - 0.5 * (rates[0] + rates[-1])))
