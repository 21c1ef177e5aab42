"""Gate records for the CV gate set.

A gate is an immutable value: a kind, a tuple of real parameters in a fixed
order per kind, the modes it acts on, and a per-parameter trainable mask.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

GATE_PARAMS: dict[str, tuple[str, ...]] = {
    "Rotation": ("phi",),
    "Displacement": ("re", "im"),
    "Squeezing": ("r", "phi"),
    "Beamsplitter": ("theta", "phi"),
    "CubicPhase": ("gamma",),
    "Kerr": ("kappa",),
}

GAUSSIAN_KINDS = frozenset({"Rotation", "Displacement", "Squeezing", "Beamsplitter"})
NON_GAUSSIAN_KINDS = frozenset({"CubicPhase", "Kerr"})
TWO_MODE_KINDS = frozenset({"Beamsplitter"})


@dataclass(frozen=True)
class Gate:
    kind: str
    params: tuple[float, ...]
    modes: tuple[int, ...]
    trainable: tuple[bool, ...] = field(default=())

    def __post_init__(self):
        if self.kind not in GATE_PARAMS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        names = GATE_PARAMS[self.kind]
        params = tuple(float(p) for p in self.params)
        if len(params) != len(names):
            raise ValueError(f"{self.kind} takes parameters {names}, got {len(params)} values")
        modes = tuple(int(m) for m in self.modes)
        arity = 2 if self.kind in TWO_MODE_KINDS else 1
        if len(modes) != arity:
            raise ValueError(f"{self.kind} acts on {arity} mode(s), got {modes}")
        if len(set(modes)) != len(modes):
            raise ValueError(f"repeated mode index in {modes}")
        if any(m < 0 for m in modes):
            raise IndexError(f"negative mode index in {modes}")
        trainable = tuple(bool(t) for t in self.trainable) if self.trainable else (True,) * len(names)
        if len(trainable) != len(names):
            raise ValueError(f"trainable mask length {len(trainable)} != {len(names)}")
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "trainable", trainable)

    @property
    def names(self) -> tuple[str, ...]:
        return GATE_PARAMS[self.kind]

    @property
    def is_gaussian(self) -> bool:
        return self.kind in GAUSSIAN_KINDS

    def __getitem__(self, name: str) -> float:
        return self.params[self.names.index(name)]

    def with_param(self, index: int, value: float) -> "Gate":
        params = list(self.params)
        params[index] = float(value)
        return replace(self, params=tuple(params))

    def on(self, *modes: int) -> "Gate":
        return replace(self, modes=tuple(modes))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "params": dict(zip(self.names, self.params)),
            "modes": list(self.modes),
            "trainable": list(self.trainable),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Gate":
        kind = d["kind"]
        if kind not in GATE_PARAMS:
            raise ValueError(f"unknown gate kind {kind!r}")
        names = GATE_PARAMS[kind]
        given = d["params"]
        extra = set(given) - set(names)
        if extra:
            raise ValueError(f"{kind}: unknown parameter(s) {sorted(extra)}")
        missing = set(names) - set(given)
        if missing:
            raise ValueError(f"{kind}: missing parameter(s) {sorted(missing)}")
        return cls(kind, tuple(given[n] for n in names), tuple(d["modes"]),
                   tuple(d.get("trainable", ())))


def Rgate(phi: float, mode: int = 0, trainable=(True,)) -> Gate:
    return Gate("Rotation", (phi,), (mode,), tuple(trainable))


def Dgate(re: float, im: float = 0.0, mode: int = 0, trainable=(True, True)) -> Gate:
    return Gate("Displacement", (re, im), (mode,), tuple(trainable))


def Sgate(r: float, phi: float = 0.0, mode: int = 0, trainable=(True, False)) -> Gate:
    # direction frozen by default: with phi = 0, r alone sets the x-variance
    return Gate("Squeezing", (r, phi), (mode,), tuple(trainable))


def BSgate(theta: float, phi: float = 0.0, modes=(0, 1), trainable=(True, True)) -> Gate:
    return Gate("Beamsplitter", (theta, phi), tuple(modes), tuple(trainable))


def Vgate(gamma: float, mode: int = 0, trainable=(True,)) -> Gate:
    return Gate("CubicPhase", (gamma,), (mode,), tuple(trainable))


def Kgate(kappa: float, mode: int = 0, trainable=(True,)) -> Gate:
    return Gate("Kerr", (kappa,), (mode,), tuple(trainable))
