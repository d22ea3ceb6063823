from functools import cache
from pathlib import Path

import yaml

CONFIG_DIR = Path(__file__).parent.parent / "config"


def load_yaml_resource(name: str) -> dict:
    """Load a YAML file shipped under app/config."""
    config_path = CONFIG_DIR / name
    with open(config_path, "r", encoding="utf-8") as file:
        return yaml.safe_load(file)


@cache
def load_messages() -> dict:
    return load_yaml_resource("messages.yaml")


def render_message(key: str, **kwargs) -> str:
    template = load_messages().get(key, key)
    return template.format(**kwargs)
