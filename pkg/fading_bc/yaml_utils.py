"""
YAML utilities for run configs.
Custom loader and dumper so that numbers survive a round trip bit for bit.
"""

import re
from decimal import Decimal, InvalidOperation

import numpy as np
import yaml


class ConfigLoader(yaml.SafeLoader):
    pass


class ConfigDumper(yaml.SafeDumper):
    pass


# YAML 1.1 only resolves floats with a dot; also accept 1e-6, 2E+3
EXPONENT_FLOAT = re.compile(r"^[-+]?(?:[0-9][0-9_]*)(?:\.[0-9_]*)?[eE][-+]?[0-9]+$")


def to_decimal(text: str) -> Decimal:
    try:
        return Decimal(str(text).strip().replace("_", ""))
    except InvalidOperation as exc:
        raise ValueError(f"not a decimal number: {text!r}") from exc


# Custom constructor for floats: go through Decimal, keep .inf / .nan as YAML does
def decimal_float_constructor(loader, node):
    text = loader.construct_scalar(node)
    if text.lower().lstrip("+-") in (".inf", ".nan"):
        return loader.construct_yaml_float(node)
    return float(to_decimal(text))


# Custom constructor for !decimal tags
def decimal_constructor(loader, node):
    return float(to_decimal(loader.construct_scalar(node)))


ConfigLoader.add_constructor("tag:yaml.org,2002:float", decimal_float_constructor)
ConfigLoader.add_constructor("!decimal", decimal_constructor)
ConfigLoader.add_implicit_resolver(
    "tag:yaml.org,2002:float", EXPONENT_FLOAT, list("-+0123456789")
)


# Custom representer for floats: shortest repr, which parses back exactly
def float_representer(dumper, data):
    value = float(data)
    if value != value:
        text = ".nan"
    elif value in (float("inf"), float("-inf")):
        text = ".inf" if value > 0 else "-.inf"
    else:
        text = repr(value)
    return dumper.represent_scalar("tag:yaml.org,2002:float", text)


# Custom representer for numpy integers
def integer_representer(dumper, data):
    return dumper.represent_int(int(data))


# Custom representer for tuples
def tuple_representer(dumper, data):
    return dumper.represent_list(list(data))


ConfigDumper.add_representer(float, float_representer)
ConfigDumper.add_multi_representer(np.floating, float_representer)
ConfigDumper.add_multi_representer(np.integer, integer_representer)
ConfigDumper.add_representer(tuple, tuple_representer)


def load_yaml(text: str):
    return yaml.load(text, Loader=ConfigLoader)


def dump_yaml(data) -> str:
    return yaml.dump(
        data,
        Dumper=ConfigDumper,
        sort_keys=False,
        width=88,
        default_flow_style=False,
        allow_unicode=True,
    )
