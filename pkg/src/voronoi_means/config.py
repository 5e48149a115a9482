import copy
import os
import yaml
from pathlib import Path
from typing import Dict, Any, Optional
from deepmerge import Merger

from .errors import ParameterError

PROJECT_CONFIG_NAME = ".voronoi-means.yaml"

# Lists (seeds, lambda grids) replace rather than append.
config_merger = Merger(
    [(list, ["override"]), (dict, ["merge"]), (set, ["union"])],
    ["override"],
    ["override"],
)


def load_yaml_config(file_path):
    """Load a YAML config file if it exists, otherwise return empty dict."""
    if os.path.exists(file_path):
        with open(file_path, "r") as f:
            return yaml.safe_load(f) or {}
    return {}


def _get_project_config_file() -> Optional[str]:
    """Find the project config file by traversing up from current directory."""
    current_path = Path.cwd()
    while True:
        config_path = current_path / PROJECT_CONFIG_NAME
        if config_path.is_file():
            return str(config_path)
        if current_path == current_path.parent:
            return None
        current_path = current_path.parent


def _get_project_config():
    """Get project-specific configuration."""
    project_config_file = _get_project_config_file()
    if project_config_file:
        return load_yaml_config(project_config_file)
    return {}


# Get the directory of the current file for global config
_current_dir = os.path.dirname(os.path.abspath(__file__))
_global_config_file = os.path.join(_current_dir, "config.yaml")

# User config in home directory
_user_config_file = os.path.expanduser("~/.config/voronoi-means/config.yaml")

# Load individual config files
global_config = load_yaml_config(_global_config_file)
user_config = load_yaml_config(_user_config_file)


def merged_config(extra_file: Optional[str] = None) -> Dict[str, Any]:
    """
    Get a merged configuration from global, user, project and explicit configs.

    The merge is performed with the following precedence (highest to lowest):
    1. Explicit config file (``--config``)
    2. Project config (``.voronoi-means.yaml`` in the working tree)
    3. User config
    4. Global config

    Returns:
        Dict[str, Any]: Merged configuration dictionary
    """
    result = copy.deepcopy(global_config)
    result = config_merger.merge(result, copy.deepcopy(user_config))
    result = config_merger.merge(result, _get_project_config())

    if extra_file:
        if not os.path.exists(extra_file):
            raise ParameterError(f"config file not found: {extra_file}")
        result = config_merger.merge(result, load_yaml_config(extra_file))

    return result


def section(config: Dict[str, Any], name: str) -> Dict[str, Any]:
    """Return a config section with packaged defaults filled in."""
    defaults = copy.deepcopy(global_config.get(name) or {})
    return config_merger.merge(defaults, copy.deepcopy(config.get(name) or {}))
