"""Hyperparameter container shared by every driver."""
from dataclasses import dataclass, field, fields

from ..errors import ConfigError


@dataclass
class HyperParams:
    """All step sizes, loop counts, momentum coefficients, and batch sizes.

    The descent/ascent drivers step with the composites c_hat * eta and
    c * eta; the snapshot-family drivers use local steps (c_hat, c) plus
    global steps (eta_x, eta_y) and snapshot period S.
    """

    T: int
    Q: int = 1
    S: int = 1
    b: int = 1
    B: int | None = None  # estimator init batch; defaults to b
    eta: float = 1.0
    c_hat: float = 0.1
    c: float = 0.1
    eta_x: float = 1.0
    eta_y: float = 1.0
    alpha: float = 1.0
    beta: float = 1.0
    momentum: float = 0.0
    notes: dict = field(default_factory=dict, compare=False)

    @property
    def step_x(self):
        return self.c_hat * self.eta

    @property
    def step_y(self):
        return self.c * self.eta

    @property
    def init_batch(self):
        return self.b if self.B is None else self.B

    def validate(self):
        ints = {"T": self.T, "Q": self.Q, "S": self.S, "b": self.b}
        for name, val in ints.items():
            if int(val) != val or val < 1:
                raise ConfigError("must be an integer >= 1", field=f"hyperparams.{name}")
        if self.B is not None and (int(self.B) != self.B or self.B < 1):
            raise ConfigError("must be an integer >= 1", field="hyperparams.B")
        for name in ("eta", "c_hat", "c", "eta_x", "eta_y"):
            if getattr(self, name) <= 0:
                raise ConfigError("must be positive", field=f"hyperparams.{name}")
        for name in ("alpha", "beta"):
            if not 0.0 < getattr(self, name) <= 1.0:
                raise ConfigError("must lie in (0, 1]", field=f"hyperparams.{name}")
        if not 0.0 <= self.momentum < 1.0:
            raise ConfigError("must lie in [0, 1)", field="hyperparams.momentum")
        return self

    def replace(self, **kw):
        vals = {f.name: getattr(self, f.name) for f in fields(self)}
        vals.update(kw)
        return HyperParams(**vals)

    def as_dict(self):
        out = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "notes"}
        if self.notes:
            out["derived_from"] = dict(self.notes)
        return out
