import json

from typing import Any

from .types import ArrayValue, Environment, EnvValue, ObjectValue, ShapeError

CLASS_KEY = "$class"


def value_to_json(value: EnvValue) -> Any:
    """
    ints as numbers, null as null, arrays as lists,
    objects as {"$class": name, fields...}
    """
    match value:
        case ArrayValue(elems=elems):
            return [value_to_json(v) for v in elems]
        case ObjectValue(cls=cls, fields=fields):
            out: dict[str, Any] = {CLASS_KEY: cls}
            for name, v in fields:
                out[name] = value_to_json(v)
            return out
    return value


def value_from_json(data: Any) -> EnvValue:
    match data:
        case None | bool() | int():
            return data
        case list():
            return ArrayValue(tuple(value_from_json(v) for v in data))
        case dict() if CLASS_KEY in data:
            fields = tuple((k, value_from_json(v))
                           for k, v in data.items() if k != CLASS_KEY)
            return ObjectValue(data[CLASS_KEY], fields)
    raise ShapeError(f"not an environment value: {data!r}")


def env_to_json(env: Environment) -> list[Any]:
    return [value_to_json(v) for v in env.args]


def env_from_json(data: Any) -> Environment:
    if not isinstance(data, list):
        raise ShapeError(f"environment must be a list, got {data!r}")
    return Environment(tuple(value_from_json(v) for v in data))


def dumps(data: Any) -> str:
    """
    Canonical JSON used for every artifact (sorted keys, stable layout)
    """
    return json.dumps(data, sort_keys=True)
