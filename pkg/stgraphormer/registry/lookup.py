from enum import Enum
from typing import Type, TypeVar, Union

from ..errors import ConfigError


E = TypeVar('E', bound=Enum)


def lookup(registry: Type[E], key: Union[str, E]) -> E:
    """按名称 (不区分大小写, ``-`` 与 ``_`` 等价) 查找注册表成员.

    Raises:
        ConfigError: 如果名称不存在.
    """
    if isinstance(key, registry):
        return key
    name = str(key).strip().replace('-', '_').upper()
    try:
        return registry[name]
    except KeyError as e:
        choices = ', '.join(member.name.lower() for member in registry)
        raise ConfigError(f'Unknown {registry.__name__} entry {key!r}; expected one of: {choices}.') from e
