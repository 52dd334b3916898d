# Copyright (c) The market-efficiency authors.
# All rights reserved.
#
# This source code is licensed under the terms described in the LICENSE file in
# the root directory of this source tree.

from typing import Callable, Dict, List, Optional, Type, TypeVar, Union

from pydantic import BaseModel

# a JSON type with possible `null` values
JsonType = Union[
    None,
    bool,
    int,
    float,
    str,
    Dict[str, "JsonType"],
    List["JsonType"],
]

# a meta-type that captures the object type in a JSON schema
Schema = Dict[str, JsonType]


T = TypeVar("T")

_REGISTRY: Dict[str, type] = {}
_OVERRIDES: Dict[str, Schema] = {}


def register_schema(
    data_type: T,
    schema: Optional[Schema] = None,
    name: Optional[str] = None,
) -> T:
    """
    Associates a type with a JSON schema definition.

    :param data_type: The type to associate with a JSON schema.
    :param schema: Extra schema keys merged over the derived schema. Derived automatically if omitted.
    :param name: The name used for looking up the type. Determined automatically if omitted.
    :returns: The input type.
    """
    key = name or data_type.__name__
    _REGISTRY[key] = data_type
    if schema:
        _OVERRIDES[key] = schema
    return data_type


def json_schema_type(
    cls: Optional[Type[T]] = None,
    *,
    schema: Optional[Schema] = None,
) -> Union[Type[T], Callable[[Type[T]], Type[T]]]:
    """Decorator to add user-defined schema definition to a class."""

    def wrap(cls: Type[T]) -> Type[T]:
        return register_schema(cls, schema)

    # see if decorator is used as @json_schema_type or @json_schema_type()
    if cls is None:
        # called with parentheses
        return wrap
    else:
        # called as @json_schema_type without parentheses
        return wrap(cls)


def registered_types() -> Dict[str, type]:
    return dict(_REGISTRY)


def registered_schemas() -> Dict[str, Schema]:
    """JSON schema of every registered configuration model, keyed by type name.

    Enums are described by their values; models by pydantic's generated schema.
    """
    schemas: Dict[str, Schema] = {}
    for key in sorted(_REGISTRY):
        data_type = _REGISTRY[key]
        if isinstance(data_type, type) and issubclass(data_type, BaseModel):
            schema = data_type.model_json_schema()
        else:
            schema = {"enum": [m.value for m in data_type]}
        schema.update(_OVERRIDES.get(key, {}))
        schemas[key] = schema
    return schemas
