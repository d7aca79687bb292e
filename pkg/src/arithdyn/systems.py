"""JSON descriptors for self-maps, points and campaign specs."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ArithDynError, SpecError
from .maps import (LinearUnipotentMap, MonomialMap, ProductMap,
                   ProjectiveMorphism, SelfMap)

DENSITY_TAGS = ("dense-verified", "dense-heuristic", "not-dense")


def parse_system(desc: dict, base_dir: str | os.PathLike | None = None) -> SelfMap:
    """Build a SelfMap from its JSON descriptor."""
    if not isinstance(desc, dict) or "kind" not in desc:
        raise SpecError("system descriptor must be an object with a 'kind'")
    kind = desc["kind"]
    try:
        if kind == "projective":
            polys = [[(c, e) for c, e in poly] for poly in desc["polys"]]
            f = ProjectiveMorphism(int(desc["N"]), polys)
            if "degree" in desc and int(desc["degree"]) != f.degree:
                raise SpecError(f"declared degree {desc['degree']} != actual {f.degree}")
            return f
        if kind == "monomial":
            return MonomialMap(desc["A"])
        if kind == "unipotent":
            return LinearUnipotentMap(desc["L"])
        if kind == "product":
            return ProductMap(tuple(parse_system(c, base_dir) for c in desc["components"]),
                              desc.get("height_mode", "max"))
        if kind == "toric":
            from .toric import Fan, ToricEndo

            fan = desc["fan"]
            if isinstance(fan, str):
                path = Path(base_dir or ".") / fan
                fan = json.loads(path.read_text(encoding="utf-8"))
            return ToricEndo(Fan.from_json(fan), desc["phi"])
    except KeyError as exc:
        raise SpecError(f"{kind} descriptor missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ArithDynError):
            raise
        raise SpecError(f"bad {kind} descriptor: {exc}") from None
    raise SpecError(f"unknown system kind {kind!r}")


@dataclass
class Budgets:
    max_iters: int = 25
    bit_budget: int = 10**7
    precision: float = 1e-9
    tolerance: float = 1e-3
    window: int = 5
    hhat_target: float = 1e-6

    ENV_PREFIX = "ARITHDYN_"

    def updated(self, values: dict) -> "Budgets":
        out = Budgets(**self.__dict__)
        for k, v in values.items():
            if v is None:
                continue
            if not hasattr(out, k):
                raise SpecError(f"unknown budget {k!r}")
            setattr(out, k, type(getattr(Budgets(), k))(v))
        return out

    def with_env(self, environ=None) -> "Budgets":
        environ = os.environ if environ is None else environ
        vals = {}
        for k in self.__dict__:
            key = self.ENV_PREFIX + k.upper()
            if key in environ:
                vals[k] = float(environ[key]) if k in ("precision", "tolerance", "hhat_target") \
                    else int(float(environ[key]))
        return self.updated(vals)

    def to_json(self) -> dict:
        return {k: (repr(v) if isinstance(v, float) else v) for k, v in self.__dict__.items()}


@dataclass
class PointSpec:
    state: object
    raw: object
    density: str | None = None


@dataclass
class SystemSpec:
    name: str
    descriptor: dict
    system: SelfMap
    points: list = field(default_factory=list)
    budgets: Budgets = field(default_factory=Budgets)
    path: str | None = None

    def to_json(self) -> dict:
        return {"name": self.name, "system": self.descriptor,
                "points": [{"coords": p.raw, **({"density": p.density} if p.density else {})}
                           for p in self.points],
                "budgets": self.budgets.to_json()}


def parse_point(f: SelfMap, data):
    try:
        return f.parse_point(data)
    except ArithDynError:
        raise
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise SpecError(f"bad point {data!r}: {exc}") from None


def load_spec(path: str | os.PathLike, budgets: Budgets | None = None) -> SystemSpec:
    """Read a campaign spec, or a bare system descriptor (no points)."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError(f"cannot read {path}: {exc}") from None
    return spec_from_json(data, budgets, base_dir=path.parent, name=path.stem, path=str(path))


def spec_from_json(data: dict, budgets: Budgets | None = None, base_dir=None, name="system",
                   path=None) -> SystemSpec:
    if "kind" in data:
        data = {"system": data}
    if "system" not in data:
        raise SpecError("spec needs a 'system' descriptor")
    f = parse_system(data["system"], base_dir)
    b = (budgets or Budgets()).updated(data.get("budgets", {}))
    points = []
    for entry in data.get("points", []):
        if isinstance(entry, dict):
            raw, tag = entry.get("coords"), entry.get("density")
        else:
            raw, tag = entry, None
        if tag is not None and tag not in DENSITY_TAGS:
            raise SpecError(f"unknown density tag {tag!r}")
        points.append(PointSpec(parse_point(f, raw), raw, tag))
    return SystemSpec(data.get("name", name), data["system"], f, points, b, path)
