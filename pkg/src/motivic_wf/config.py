"""Run configuration: residue field, precision window, budgets and sweep parameters."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .local_field import DEFAULT_MODULI, FieldInputError, LocalField, ResidueField, Window


class ConfigError(ValueError):
    """Invalid configuration values."""


@dataclass(frozen=True)
class Config:
    p: int = 3
    f: int = 1
    modulus: tuple[int, ...] | None = None
    v_min: int = -40
    v_max: int = 60
    budget: int = 500_000
    K: int = 6
    n: int = 1
    r: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.budget <= 0:
            raise ConfigError("budget must be positive")
        if self.v_min >= self.v_max:
            raise ConfigError("precision window must satisfy v_min < v_max")
        if self.K < 0 or self.n < 1:
            raise ConfigError("need K >= 0 and n >= 1")
        try:
            self.residue_field()
        except FieldInputError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def q(self) -> int:
        return self.p**self.f

    def residue_field(self) -> ResidueField:
        return ResidueField(self.p, self.f, self.modulus)

    def field(self) -> LocalField:
        return LocalField(self.residue_field(), Window(self.v_min, self.v_max), self.budget)

    @classmethod
    def for_q(cls, q: int, **kw) -> Config:
        if q not in DEFAULT_MODULI:
            raise ConfigError(f"no default residue field for q={q}")
        p, f, mod = DEFAULT_MODULI[q]
        return cls(p=p, f=f, modulus=mod, **kw)

    @classmethod
    def from_dict(cls, data: dict) -> Config:
        known = {f.name for f in fields(cls)}
        extra = set(data) - known - {"q"}
        if extra:
            raise ConfigError(f"unknown config fields {sorted(extra)}")
        data = dict(data)
        if "q" in data:
            q = data.pop("q")
            base = cls.for_q(q)
            data.setdefault("p", base.p)
            data.setdefault("f", base.f)
            data.setdefault("modulus", base.modulus)
            if data["p"] ** data["f"] != q:
                raise ConfigError(f"q={q} does not match p^f")
        if data.get("modulus") is not None:
            data["modulus"] = tuple(data["modulus"])
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path: str | Path) -> Config:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["modulus"] = list(self.residue_field().modulus)
        d["q"] = self.q
        return d
