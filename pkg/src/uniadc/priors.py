"""Anomaly priors: per-category text descriptions plus optional shape/size hints.

The priors file is YAML with extension ``.priors``; one file covers every
image class::

    canvas:
    - category: scratch
      descriptions: [Bright thin scratch]
      shapes: [line]
      sizes: [small]
    - category: spot
      descriptions: [Dark spot]

Unset ``shapes``/``sizes`` mean "any". ``detection_only: true`` marks a
category that is scored for detection but excluded from classification
metrics (mixed-defect categories). Category ids are assigned 1..Y in
lexicographic name order within each image class.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import yaml

from .errors import (
    ConfigError,
    DuplicateCategoryError,
    UnknownShapeNameError,
    UnknownSizeNameError,
)
from .masks import MaskShape, SizeClass


@dataclass(frozen=True)
class AnomalyPrior:
    image_class: str
    category_id: int
    category_name: str
    descriptions: tuple[str, ...]
    shapes: tuple[MaskShape, ...] = ()
    sizes: tuple[SizeClass, ...] = ()
    detection_only: bool = False

    def __post_init__(self):
        if not self.descriptions:
            raise ValueError(f"category {self.category_name!r} has no descriptions")
        if self.category_id < 1:
            raise ValueError("category ids start at 1")


def _parse_shape(name: str) -> MaskShape:
    key = name.strip().lower().replace(" ", "_").replace("-", "_")
    aliases = {"foreground": "foreground_mask", "perlin": "perlin_noise", "brush": "random_brush"}
    key = aliases.get(key, key)
    try:
        return MaskShape(key)
    except ValueError:
        raise UnknownShapeNameError(f"unknown mask shape {name!r}") from None


def _parse_size(name: str) -> SizeClass:
    try:
        return SizeClass(name.strip().lower())
    except ValueError:
        raise UnknownSizeNameError(f"unknown size class {name!r}") from None


@dataclass
class PriorsTable:
    """Map image class -> category priors, with category ids resolved."""

    classes: dict[str, list[AnomalyPrior]] = field(default_factory=dict)

    def for_class(self, image_class: str) -> list[AnomalyPrior]:
        return self.classes[image_class]

    def detection_only_categories(self, image_class: str) -> set[int]:
        return {p.category_id for p in self.classes[image_class] if p.detection_only}

    @staticmethod
    def from_raw(raw: dict) -> "PriorsTable":
        classes: dict[str, list[AnomalyPrior]] = {}
        for image_class, rows in raw.items():
            seen: set[str] = set()
            priors = []
            for row in rows:
                name = str(row["category"])
                if name in seen:
                    raise DuplicateCategoryError(
                        f"category {name!r} appears twice in class {image_class!r}"
                    )
                seen.add(name)
                descs = row.get("descriptions") or []
                if isinstance(descs, str):
                    descs = [descs]
                priors.append(
                    AnomalyPrior(
                        image_class=str(image_class),
                        category_id=1,  # reassigned below
                        category_name=name,
                        descriptions=tuple(str(d) for d in descs),
                        shapes=tuple(_parse_shape(s) for s in row.get("shapes") or ()),
                        sizes=tuple(_parse_size(s) for s in row.get("sizes") or ()),
                        detection_only=bool(row.get("detection_only", False)),
                    )
                )
            priors.sort(key=lambda p: p.category_name)
            priors = [replace(p, category_id=i + 1) for i, p in enumerate(priors)]
            classes[str(image_class)] = priors
        return PriorsTable(classes)

    def to_raw(self) -> dict:
        raw: dict = {}
        for image_class, priors in self.classes.items():
            rows = []
            for p in sorted(priors, key=lambda p: p.category_id):
                row: dict = {"category": p.category_name, "descriptions": list(p.descriptions)}
                if p.shapes:
                    row["shapes"] = [s.value for s in p.shapes]
                if p.sizes:
                    row["sizes"] = [s.value for s in p.sizes]
                if p.detection_only:
                    row["detection_only"] = True
                rows.append(row)
            raw[image_class] = rows
        return raw


def load_priors(path) -> PriorsTable:
    with open(path, "r", encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ConfigError(f"priors file {path} does not hold a class mapping")
    return PriorsTable.from_raw(raw)


def save_priors(path, table: PriorsTable) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(table.to_raw(), fh, sort_keys=False)
