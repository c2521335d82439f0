import json
import logging
import os
import shutil
from datetime import datetime

import appdirs

from quasigroup_prolong.utils.core import QuasigroupError, parse_square
from quasigroup_prolong.utils.isotopy import MAX_ORDER as ISOTOPY_MAX_ORDER

logger = logging.getLogger(__name__)

FIXTURE_SUFFIX = '.txt'

DEFAULT_CONFIG = {
    "threads": 1,
    "progress": False,
    "mapping_limit": None,
    "isotopy_max_order": ISOTOPY_MAX_ORDER,
}


def _is_count(value):
    # bool is an int subclass; true/false is not a count
    return isinstance(value, int) and not isinstance(value, bool)


CONFIG_CHECKS = {
    "threads": _is_count,
    "progress": lambda value: isinstance(value, bool),
    "mapping_limit": lambda value: value is None or _is_count(value),
    "isotopy_max_order": _is_count,
}


class DataManager:
    """Handles all file operations: configuration, square tables and bundled fixtures"""

    def __init__(self, base_dir=None):
        """Initialize the data manager

        Args:
            base_dir: Directory holding config.json; defaults to the user data directory
        """
        if base_dir is None:
            base_dir = appdirs.user_data_dir("QuasigroupProlong", "QuasigroupTools")
        self.base_dir = base_dir
        os.makedirs(self.base_dir, exist_ok=True)

        self.config_path = os.path.join(self.base_dir, 'config.json')

        # Fixture tables ship inside the package
        self.fixtures_dir = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'data')

    def load_config(self):
        """Load the configuration file

        Missing keys are filled from the defaults, so an older file keeps working.
        Values of the wrong type are replaced by their defaults and the original
        file is backed up.

        Returns:
            dict: The configuration data
        """
        if not os.path.exists(self.config_path):
            return self._create_default_config()

        try:
            with open(self.config_path, 'r') as f:
                stored = json.load(f)
        except json.JSONDecodeError:
            logger.warning("Config file %s is not valid JSON, recreating it", self.config_path)
            return self._create_default_config()

        if not isinstance(stored, dict):
            logger.warning("Config file %s does not hold an object, recreating it", self.config_path)
            return self._create_default_config()

        invalid = sorted(key for key, check in CONFIG_CHECKS.items() if key in stored and not check(stored[key]))
        config = dict(DEFAULT_CONFIG)
        config.update({key: value for key, value in stored.items() if key not in invalid})
        if invalid:
            logger.warning("Config file %s has invalid %s, using defaults", self.config_path, ", ".join(invalid))
            self._backup_config()
            self.save_config(config)
        return config

    def save_config(self, config):
        """Save the configuration data

        Args:
            config: The configuration data to save
        """
        with open(self.config_path, 'w') as f:
            json.dump(config, f, indent=2)

    def _create_default_config(self):
        """Create a default configuration, backing up any unreadable file first

        Returns:
            dict: The default configuration
        """
        if os.path.exists(self.config_path):
            self._backup_config()

        default_config = dict(DEFAULT_CONFIG)
        self.save_config(default_config)
        return default_config

    def _backup_config(self):
        """Copy the current config file to config_backup_<timestamp>.json"""
        try:
            timestamp = datetime.now().strftime('%Y%m%d_%H%M%S')
            backup_path = os.path.join(self.base_dir, f'config_backup_{timestamp}.json')
            shutil.copy2(self.config_path, backup_path)
            logger.info("Backed up config to %s", backup_path)
        except OSError as e:
            logger.warning("Could not back up config: %s", e)

    def read_text(self, path):
        """Read a table file

        Returns:
            tuple: (success, message, text)
        """
        if not os.path.exists(path):
            return False, f"File {path} does not exist", None
        try:
            with open(path, 'r') as f:
                return True, f"Read {path}", f.read()
        except (OSError, UnicodeDecodeError) as e:
            return False, f"Error reading {path}: {e}", None

    def load_square(self, path):
        """Read and validate a Latin square file

        Returns:
            tuple: (success, message, square)
        """
        success, message, text = self.read_text(path)
        if not success:
            return False, message, None
        try:
            square = parse_square(text)
        except QuasigroupError as e:
            return False, f"{path}: {e}", None
        logger.debug("Loaded order-%d square from %s", square.order, path)
        return True, f"Loaded order-{square.order} square from {path}", square

    def save_text(self, text, path):
        """Write a result file, creating parent directories as needed

        Returns:
            tuple: (success, message)
        """
        try:
            parent = os.path.dirname(os.path.abspath(path))
            os.makedirs(parent, exist_ok=True)
            with open(path, 'w') as f:
                f.write(text)
            return True, f"Saved to {path}"
        except OSError as e:
            return False, f"Error saving {path}: {e}"

    def list_fixtures(self):
        """List the bundled fixture names, sorted

        Returns:
            list: Fixture names without the file suffix
        """
        try:
            return sorted(
                f[:-len(FIXTURE_SUFFIX)] for f in os.listdir(self.fixtures_dir) if f.endswith(FIXTURE_SUFFIX)
            )
        except OSError:
            return []

    def fixture_path(self, name):
        return os.path.join(self.fixtures_dir, name + FIXTURE_SUFFIX)

    def read_fixture_text(self, name):
        """Raw text of a fixture, exactly as stored

        Returns:
            tuple: (success, message, text)
        """
        if name not in self.list_fixtures():
            return False, f"Unknown fixture {name!r}; available: {', '.join(self.list_fixtures())}", None
        return self.read_text(self.fixture_path(name))

    def load_fixture(self, name):
        """Parse and validate a fixture

        Returns:
            tuple: (success, message, square)
        """
        if name not in self.list_fixtures():
            return False, f"Unknown fixture {name!r}", None
        return self.load_square(self.fixture_path(name))
