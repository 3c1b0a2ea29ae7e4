"""Config-driven command-line front end."""

from prevopt.cli.config import ExperimentConfig, load_config, parse_text

__all__ = ["ExperimentConfig", "load_config", "parse_text"]
