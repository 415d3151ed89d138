"""CTPoIR: proportion of infected lung regions from CT volumes"""

import importlib.metadata
import json
from pathlib import Path

import flask

import marshmallow as ma

from .exceptions import ConfigError
from .extensions import Schema

__version__ = importlib.metadata.version("ctpoir")

REPORT_SCHEMA_VERSION = "1.0"


class SettingsSchema(Schema):
    """Validates the merged configuration"""

    class Meta:
        unknown = ma.INCLUDE

    LUNG_THRESHOLD = ma.fields.Integer(validate=ma.validate.Range(-1200, 600))
    INFECTED_THRESHOLD = ma.fields.Integer(validate=ma.validate.Range(-1200, 600))
    FILL_LUNG_HOLES = ma.fields.Boolean()
    BINARIZE_TAU = ma.fields.Float(validate=ma.validate.Range(0, 1))
    FILTER_THRESHOLD = ma.fields.Float(validate=ma.validate.Range(0, 1))
    MIN_REGION_VOXELS = ma.fields.Integer(validate=ma.validate.Range(min=1))
    PATCH_SIZE = ma.fields.Integer(validate=ma.validate.Range(min=1))
    HISTOGRAM_BIN_WIDTH = ma.fields.Float(
        validate=ma.validate.Range(min=0, min_inclusive=False)
    )
    THREADS = ma.fields.Integer(validate=ma.validate.Range(min=1))
    SEED = ma.fields.Integer(allow_none=True, validate=ma.validate.Range(min=0))
    LOG_LEVEL = ma.fields.String(
        validate=ma.validate.OneOf(("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"))
    )


def create_config(config_file=None):
    """Create configuration

    Defaults from settings.Config, overridden by the Python settings file
    pointed to by CTPOIR_SETTINGS_FILE, then by the JSON config_file.
    """
    config = flask.Config(Path(__file__).parent)
    config.from_object("ctpoir.settings.Config")
    config.from_envvar("CTPOIR_SETTINGS_FILE", silent=True)
    if config_file is not None:
        try:
            config.from_file(str(Path(config_file).resolve()), load=json.load)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"Can't load config file {config_file}: {exc}") from exc
    validate_config(config)
    return config


def validate_config(config):
    """Check configuration values, raise ConfigError if invalid"""
    errors = SettingsSchema().validate(dict(config))
    if errors:
        raise ConfigError(f"Invalid configuration: {errors}")
