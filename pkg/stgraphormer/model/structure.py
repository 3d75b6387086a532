from dataclasses import asdict, dataclass
from typing import Any, Dict

from ..graph import (DegreeVector, SpdMatrix, SpatialBiasIndex, TokenLayout, WeightedAdjacency,
                     build_bias_index, compute_degrees, compute_spd)


@dataclass(frozen=True)
class GraphMaxima:
    """决定编码表大小的图统计量."""
    max_in: int
    max_out: int
    max_spd: int
    directed: bool = True

    @property
    def num_buckets(self) -> int:
        return self.max_spd + 3

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class GraphStructure:
    """前向计算需要的与时间无关的图结构: 度与空间偏置索引."""
    degrees: DegreeVector
    spd: SpdMatrix
    bias_index: SpatialBiasIndex

    @classmethod
    def build(cls, adjacency: WeightedAdjacency, layout: TokenLayout) -> 'GraphStructure':
        spd = compute_spd(adjacency)
        return cls(degrees=compute_degrees(adjacency), spd=spd, bias_index=build_bias_index(spd, layout))

    @property
    def layout(self) -> TokenLayout:
        return self.bias_index.layout

    @property
    def maxima(self) -> GraphMaxima:
        return GraphMaxima(max_in=self.degrees.max_in,
                           max_out=self.degrees.max_out,
                           max_spd=self.spd.max_spd,
                           directed=self.degrees.directed)

    def relayout(self, layout: TokenLayout) -> 'GraphStructure':
        """换用另一种 token 布局 (例如消融特殊 token 时)."""
        return GraphStructure(degrees=self.degrees, spd=self.spd, bias_index=build_bias_index(self.spd, layout))
