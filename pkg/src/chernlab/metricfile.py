"""JSON metric files.

::

    {
      "name": "hopf",
      "dimension": 2,
      "parameters": {},
      "components": [["1/(z1*zb1 + z2*zb2)", "0"], ["0", "1/(z1*zb1 + z2*zb2)"]],
      "valid_region": "z1*zb1 + z2*zb2"
    }

``valid_region`` is optional; a point is valid where its real part is
positive.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from . import expr as ex
from .curvature import MetricSpec


class MetricFileError(ValueError):
    pass


@dataclass(frozen=True)
class MetricFile:
    name: str
    dimension: int
    components: tuple[tuple[str, ...], ...]
    parameters: Mapping[str, float] = field(default_factory=dict)
    valid_region: str | None = None

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "MetricFile":
        try:
            n = int(data["dimension"])
            comps = tuple(tuple(str(s) for s in row) for row in data["components"])
            name = str(data.get("name", "metric"))
        except (KeyError, TypeError, ValueError) as exc:
            raise MetricFileError(f"malformed metric file: {exc}") from None
        if n < 1 or len(comps) != n or any(len(row) != n for row in comps):
            raise MetricFileError(f"components must form a {n}x{n} array")
        params = {str(k): float(v) for k, v in dict(data.get("parameters") or {}).items()}
        region = data.get("valid_region")
        return cls(name, n, comps, params, None if region is None else str(region))

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "dimension": self.dimension,
            "parameters": dict(self.parameters),
            "components": [list(row) for row in self.components],
        }
        if self.valid_region is not None:
            out["valid_region"] = self.valid_region
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def digest(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()

    def to_spec(self) -> MetricSpec:
        """Parse the components; raises ``ExpressionSyntaxError`` on bad input."""
        return MetricSpec.from_strings(self.components, name=self.name, params=self.parameters)

    def region_expr(self) -> ex.Expr | None:
        return None if self.valid_region is None else ex.parse_expression(self.valid_region, self.dimension)

    @classmethod
    def from_spec(cls, spec: MetricSpec, valid_region: ex.Expr | None = None) -> "MetricFile":
        region = None if valid_region is None else ex.to_string(valid_region)
        comps = tuple(tuple(row) for row in spec.component_strings())
        return cls(spec.name, spec.n, comps, dict(spec.params), region)


def load_metric_file(path: str | Path) -> MetricFile:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise MetricFileError(f"{path}: invalid JSON: {exc}") from None
    return MetricFile.from_dict(data)


def emit_zoo(name: str, n: int = 2, params: Mapping[str, float] | None = None) -> MetricFile:
    from .zoo import zoo_metric

    entry = zoo_metric(name, n, params)
    return MetricFile.from_spec(entry.spec, entry.valid_region)
