from enum import Enum

from ..graph.layout import TokenMode
from .preset_template import AblationTemplate as Template


class Ablations(Enum):
    NO_POSITIONAL = Template('drop the positional encoding', use_positional=False)
    NO_CENTRALITY = Template('drop the centrality encoding', use_centrality=False)
    NO_SPATIAL = Template('drop the shortest-path attention bias', use_spatial_bias=False)
    TOKEN_CLS = Template('one cls token for the whole sequence', token_mode=TokenMode.CLS)
    TOKEN_GRAPH = Template('one graph token heading each time step', token_mode=TokenMode.GRAPH)
    TOKEN_NONE = Template('no special token', token_mode=TokenMode.NONE)

    @property
    def id(self) -> str:
        return self.name.lower()
