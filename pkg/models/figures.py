"""
Figure Models
Plot-ready data series (no rendering)
"""

from typing import List, Tuple

from pydantic import BaseModel, ConfigDict, model_validator

from models.types import AxisTransform


class FigureSeries(BaseModel):
    """Ordered (x, y) points with the axis scaling they are meant for"""
    model_config = ConfigDict(frozen=True)

    label: str
    points: List[Tuple[float, float]]
    axis_transform: AxisTransform = AxisTransform.LINEAR

    @model_validator(mode='after')
    def _check_points(self):
        xs = [x for x, _ in self.points]
        if any(b < a for a, b in zip(xs, xs[1:])):
            raise ValueError("points must be ordered by x")
        if self.axis_transform is AxisTransform.LOG10:
            if any(x <= 0 or y <= 0 for x, y in self.points):
                raise ValueError("log10 axes require positive coordinates")
        return self

    @property
    def xs(self) -> List[float]:
        return [x for x, _ in self.points]

    @property
    def ys(self) -> List[float]:
        return [y for _, y in self.points]

    def __len__(self) -> int:
        return len(self.points)
