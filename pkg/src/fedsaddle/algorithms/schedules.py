"""Hyperparameter schedules from the convergence guarantees.

Both schedules treat the loop counts as real numbers; an implementation has
to choose, so integers are rounded half-up with a floor of one, and step
sizes that reference a loop count use the rounded value.
"""
import math

from ..errors import ConfigError
from .params import HyperParams


def _cbrt(x):
    r = float(x) ** (1.0 / 3.0)
    ri = round(r)
    if ri >= 1 and abs(ri**3 - x) <= 1e-9 * max(1.0, abs(x)):
        return float(ri)
    return r


def _round_half_up(x, at_least=1):
    return max(at_least, math.floor(x + 0.5))


def theorem_schedule_ncpl(kappa, L, N, b, nu, T0):
    """Constant-parameter schedule for the variance-reduced driver.

    Derived quantities:  Q = T0^(1/3) / N^(2/3),  eta = 1 / (20 Q L),
    alpha = 30 L^2 eta^2 / (b N kappa^(1-nu)),  beta likewise with
    kappa^(2-2nu),  c = 1 / (6 kappa^(1-nu)),  c_hat = 1 / (54 kappa^(3-nu)),
    B = T0^(1/3) b kappa^(1-nu) / N^(2/3), and the implied horizon
    T = kappa^(3-nu) T0.
    """
    if kappa < 1:
        raise ConfigError("kappa must be >= 1", field="schedule.kappa")
    if not 0.0 <= nu <= 1.0:
        raise ConfigError("nu must lie in [0, 1]", field="schedule.nu")
    if L <= 0 or N < 1 or b < 1 or T0 < 1:
        raise ConfigError("need L > 0, N >= 1, b >= 1, T0 >= 1", field="schedule")
    q_pre = _cbrt(T0) / N ** (2.0 / 3.0)
    if q_pre < 1.0:
        raise ConfigError(
            f"T0^(1/3)/N^(2/3) = {q_pre:.3f} < 1: raise T0 to at least N^2",
            field="schedule.T0",
        )
    Q = _round_half_up(q_pre)
    eta = 1.0 / (20.0 * Q * L)
    alpha = 30.0 * L**2 * eta**2 / (b * N * kappa ** (1.0 - nu))
    beta = 30.0 * L**2 * eta**2 / (b * N * kappa ** (2.0 - 2.0 * nu))
    if alpha > 1.0 or beta > 1.0:
        raise ConfigError(
            f"momentum coefficients exceed 1 (alpha={alpha:.3g}, beta={beta:.3g})",
            field="schedule",
        )
    hp = HyperParams(
        T=_round_half_up(kappa ** (3.0 - nu) * T0),
        Q=Q,
        b=int(b),
        B=_round_half_up(_cbrt(T0) * b * kappa ** (1.0 - nu) / N ** (2.0 / 3.0)),
        eta=eta,
        c_hat=1.0 / (54.0 * kappa ** (3.0 - nu)),
        c=1.0 / (6.0 * kappa ** (1.0 - nu)),
        alpha=alpha,
        beta=beta,
        notes={"schedule": "ncpl", "kappa": kappa, "L": L, "N": N, "nu": nu, "T0": T0},
    )
    return hp.validate()


def theorem_schedule_ncc(L, N, T):
    """Snapshot-family schedule:  Q = T^(1/3)/N,  S = T^(1/3),
    c = c_hat = 1/(10 L Q T^(1/3)),  c_hat*eta_x = N/(10 L T),
    c*eta_y = 1/(10 L Q)."""
    if L <= 0 or N < 1 or T < 1:
        raise ConfigError("need L > 0, N >= 1, T >= 1", field="schedule")
    t3 = _cbrt(T)
    q_pre = t3 / N
    if q_pre < 1.0:
        raise ConfigError(
            f"T^(1/3)/N = {q_pre:.3f} < 1: raise T to at least N^3",
            field="schedule.T",
        )
    Q = _round_half_up(q_pre)
    S = _round_half_up(t3)
    c = 1.0 / (10.0 * L * Q * t3)
    step_y = 1.0 / (10.0 * L * Q)  # the rounded-Q form keeps max{c eta_y, c} <= 1/(10 Q L)
    step_x = N / (10.0 * L * T)
    hp = HyperParams(
        T=int(T),
        Q=Q,
        S=S,
        b=1,
        c_hat=c,
        c=c,
        eta_x=step_x / c,
        eta_y=step_y / c,
        notes={"schedule": "ncc", "L": L, "N": N},
    )
    return hp.validate()
