from typing import Any, Callable


class PresetTemplate:
    """预设模板: 一个配置类与它的一组字段取值, 构造时可以覆盖或补全字段."""

    def __init__(self,
                 factory: Callable[..., Any],
                 **attributes) -> None:
        self.factory = factory
        self.attributes = attributes

    def build(self, **overrides) -> Any:
        return self.factory(**{**self.attributes, **overrides})


class AblationTemplate:
    """消融变体: 相对基础模型配置的单项修改."""

    def __init__(self,
                 description: str,
                 **changes) -> None:
        self.description = description
        self.changes = changes
