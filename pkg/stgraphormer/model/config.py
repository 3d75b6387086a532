from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict

from ..errors import ConfigError
from ..graph import TokenMode, TokenLayout


@dataclass(frozen=True)
class EncodingFlags:
    """消融开关: 关闭某项编码等价于把对应的表置零."""
    use_positional: bool = True
    use_centrality: bool = True
    use_spatial_bias: bool = True
    final_norm: bool = True


@dataclass(frozen=True)
class ModelConfig:
    """T-Graphormer 网络结构与输入形状.

    Attributes:
        d: 隐藏维度.
        layers: 编码器层数 k.
        heads: 注意力头数, 必须整除 d.
        ffn_ratio: 前馈网络隐藏层相对 d 的倍数.
        dropout: dropout 概率.
        token_mode: 特殊 token 方式.
        flags: 消融开关.
        input_steps: 上下文长度 T′.
        horizon: 预测步数 T, 必须等于 T′.
        num_nodes: 节点数 N.
        channels: 输入通道数 C.
        out_channels: 输出通道数 C_out.
    """
    d: int = 64
    layers: int = 6
    heads: int = 2
    ffn_ratio: int = 4
    dropout: float = 0.1
    token_mode: TokenMode = TokenMode.CLS
    flags: EncodingFlags = field(default_factory=EncodingFlags)
    input_steps: int = 12
    horizon: int = 12
    num_nodes: int = 1
    channels: int = 1
    out_channels: int = 1
    ln_eps: float = 1e-5

    def __post_init__(self) -> None:
        object.__setattr__(self, 'token_mode', TokenMode(self.token_mode))
        for name in ('d', 'layers', 'heads', 'ffn_ratio', 'input_steps', 'horizon', 'num_nodes', 'channels', 'out_channels'):
            if getattr(self, name) <= 0:
                raise ConfigError(f'Model config "{name}" must be positive, got {getattr(self, name)}.')
        if self.d % self.heads != 0:
            raise ConfigError(f'Hidden width d={self.d} is not divisible by heads={self.heads}.')
        if self.d % 2 != 0:
            raise ConfigError(f'Hidden width d={self.d} must be even for the d -> d/2 prediction head.')
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError(f'Dropout must lie in [0, 1), got {self.dropout}.')
        if self.horizon != self.input_steps:
            raise ConfigError(f'Horizon T={self.horizon} must equal the context length T\'={self.input_steps}: '
                              f'each context token predicts one horizon step.')

    @property
    def head_dim(self) -> int:
        return self.d // self.heads

    @property
    def ffn_dim(self) -> int:
        return self.ffn_ratio * self.d

    def layout(self) -> TokenLayout:
        return TokenLayout(self.token_mode, self.input_steps, self.num_nodes)

    def with_changes(self, **changes: Any) -> 'ModelConfig':
        """返回修改了部分字段的新配置; 消融开关可以直接以字段名给出."""
        flag_names = set(EncodingFlags.__dataclass_fields__)
        flags = {k: changes.pop(k) for k in list(changes) if k in flag_names}
        if flags:
            changes['flags'] = replace(self.flags, **flags)
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['token_mode'] = self.token_mode.value
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ModelConfig':
        data = dict(data)
        data['flags'] = EncodingFlags(**data.get('flags', {}))
        return cls(**data)
