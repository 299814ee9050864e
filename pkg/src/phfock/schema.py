"""Validated JSON documents: measure specifications and run configuration.

Complex points are written as flat real arrays ``[re_1, im_1, ..., re_n, im_n]``.
Atoms append their weight: ``[re_1, im_1, ..., re_n, im_n, weight]``.
"""

from __future__ import annotations

import json
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, field_validator, model_validator

from . import measures as ms

DEGREE_CAP = 16


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


def _pairs_to_point(values):
    if len(values) % 2:
        raise ValueError("a complex point needs an even number of reals (re, im pairs)")
    return tuple(complex(values[i], values[i + 1]) for i in range(0, len(values), 2))


def point_to_list(z):
    out = []
    for c in z:
        out += [float(complex(c).real), float(complex(c).imag)]
    return out


class ScaledLebesgueModel(_Strict):
    type: Literal["ScaledLebesgue"]
    c: PositiveFloat


class GaussianDensityModel(_Strict):
    type: Literal["GaussianDensity"]
    c: PositiveFloat
    beta: PositiveFloat
    center: list[float] | None = None


class RadialPowerGaussianModel(_Strict):
    type: Literal["RadialPowerGaussian"]
    c: PositiveFloat
    k: int = Field(ge=0)
    s: PositiveFloat


class BallIndicatorModel(_Strict):
    type: Literal["BallIndicator"]
    c: PositiveFloat
    radius: PositiveFloat
    center: list[float] | None = None


class AtomSetModel(_Strict):
    type: Literal["AtomSet"]
    atoms: list[list[float]] = Field(min_length=1)

    @field_validator("atoms")
    @classmethod
    def _odd_rows(cls, rows):
        for row in rows:
            if len(row) < 3 or len(row) % 2 == 0:
                raise ValueError("each atom is [re_1, im_1, ..., re_n, im_n, weight]")
            if not row[-1] > 0:
                raise ValueError("atom weights must be positive")
        return rows


class RadialShellsModel(_Strict):
    type: Literal["RadialShells"]
    shells: list[tuple[Annotated[float, Field(ge=0)], PositiveFloat]] = Field(min_length=1)


MeasureModel = Annotated[
    Union[ScaledLebesgueModel, GaussianDensityModel, RadialPowerGaussianModel,
          BallIndicatorModel, AtomSetModel, RadialShellsModel],
    Field(discriminator="type"),
]


def _check_dim(values, n, what):
    if values is not None and len(values) != 2 * n:
        raise ValueError(f"{what} needs {2 * n} reals for n={n}, got {len(values)}")


def measure_from_model(model, n):
    """Build the immutable measure object from a validated model."""
    if isinstance(model, ScaledLebesgueModel):
        return ms.ScaledLebesgue(model.c)
    if isinstance(model, GaussianDensityModel):
        _check_dim(model.center, n, "center")
        center = _pairs_to_point(model.center) if model.center else None
        return ms.GaussianDensity(model.c, model.beta, center)
    if isinstance(model, RadialPowerGaussianModel):
        return ms.RadialPowerGaussian(model.c, model.k, model.s)
    if isinstance(model, BallIndicatorModel):
        _check_dim(model.center, n, "center")
        center = _pairs_to_point(model.center) if model.center else None
        return ms.BallIndicator(model.c, model.radius, center)
    if isinstance(model, AtomSetModel):
        atoms = []
        for row in model.atoms:
            _check_dim(row[:-1], n, "atom position")
            atoms.append((_pairs_to_point(row[:-1]), row[-1]))
        return ms.AtomSet(tuple(atoms))
    return ms.RadialShells(tuple(model.shells))


def measure_to_dict(spec):
    """JSON-ready dict for a measure object (inverse of :func:`measure_from_dict`)."""
    name = type(spec).__name__
    if isinstance(spec, ms.ScaledLebesgue):
        return {"type": name, "c": spec.c}
    if isinstance(spec, ms.GaussianDensity):
        out = {"type": name, "c": spec.c, "beta": spec.beta}
        if spec.center is not None:
            out["center"] = point_to_list(spec.center)
        return out
    if isinstance(spec, ms.RadialPowerGaussian):
        return {"type": name, "c": spec.c, "k": spec.k, "s": spec.s}
    if isinstance(spec, ms.BallIndicator):
        out = {"type": name, "c": spec.c, "radius": spec.radius}
        if spec.center is not None:
            out["center"] = point_to_list(spec.center)
        return out
    if isinstance(spec, ms.AtomSet):
        return {"type": name, "atoms": [point_to_list(w) + [c] for w, c in spec.atoms]}
    if isinstance(spec, ms.RadialShells):
        return {"type": name, "shells": [[r, c] for r, c in spec.shells]}
    raise TypeError(f"unsupported measure {spec!r}")


class _MeasureDoc(_Strict):
    measure: MeasureModel


def measure_from_dict(doc, n):
    return measure_from_model(_MeasureDoc(measure=doc).measure, n)


class WindowModel(_Strict):
    r: PositiveFloat = 1.0
    L: PositiveFloat = 8.0

    @model_validator(mode="after")
    def _wide_enough(self):
        if self.L < self.r:
            raise ValueError("window half-width L must be at least the spacing r")
        return self


class PairModel(_Strict):
    z: list[float]
    w: list[float]


class RunConfig(_Strict):
    """Everything a CLI verb needs.  Flags override the matching fields."""

    alpha: PositiveFloat = 1.0
    n: int = Field(1, ge=1)
    measure: MeasureModel | None = None
    degrees: list[int] = Field(default_factory=lambda: [4, 8])
    degree_cap: int = Field(DEGREE_CAP, ge=0)
    window: WindowModel = Field(default_factory=WindowModel)
    p_list: list[float] = Field(default_factory=lambda: [1.0, 2.0])
    tol: PositiveFloat = 1e-9
    check_tol: PositiveFloat | None = None
    seed: int = 0
    threads: int = Field(1, ge=1)
    max_lattice_points: int = Field(200_000, ge=1)
    pairs: list[PairModel] = Field(default_factory=list)
    radii: list[Annotated[float, Field(ge=0)]] = Field(default_factory=lambda: [0.0, 1.0, 2.0, 3.0, 4.0])
    samples: int = Field(16, ge=1)
    trace: bool = False
    only: list[str] | None = None

    @field_validator("p_list")
    @classmethod
    def _p_at_least_one(cls, ps):
        for p in ps:
            if not p >= 1:
                raise ValueError(f"p must be >= 1, got {p}")
        return ps

    @model_validator(mode="after")
    def _degrees_in_cap(self):
        for d in self.degrees:
            if d < 0 or d > self.degree_cap:
                raise ValueError(f"degree {d} outside [0, {self.degree_cap}]")
        for pair in self.pairs:
            _check_dim(pair.z, self.n, "pair point z")
            _check_dim(pair.w, self.n, "pair point w")
        if self.measure is not None:
            measure_from_model(self.measure, self.n)
        return self

    def spec(self):
        if self.measure is None:
            raise ValueError("this command needs a 'measure' entry in the config")
        return measure_from_model(self.measure, self.n)


def load_config(text):
    """Parse and validate a JSON config document."""
    return RunConfig.model_validate(json.loads(text))


def measure_schema():
    defs = _MeasureDoc.model_json_schema()["$defs"]
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "Measure",
        "oneOf": [{"$ref": f"#/$defs/{name}"} for name in sorted(defs)],
        "$defs": defs,
    }


def config_schema():
    return RunConfig.model_json_schema()
