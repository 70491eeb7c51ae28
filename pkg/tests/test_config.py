import os
import tempfile
import unittest

from sknorm.config import load_config, setting
from sknorm.errors import ConfigError


class test_config(unittest.TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        self._tmp.cleanup()

    def write(self, text):
        path = os.path.join(self._tmp.name, "config.yaml")
        with open(path, "w") as f:
            f.write(text)
        return path

    def test_defaults(self):
        config = load_config()
        self.assertEqual(config["solver"]["backend"], "builtin")
        self.assertEqual(config["brute_force"]["max_bits"], 18)
        self.assertEqual(config["oracle"]["max_vars"], 20)
        self.assertEqual(setting("reductions", "encoding"), "onehot")

    def test_defaults_are_copies(self):
        load_config()["solver"]["max_steps"] = 1
        self.assertEqual(load_config()["solver"]["max_steps"], setting("solver", "max_steps"))

    def test_override_merges(self):
        config = load_config(self.write("solver:\n  max_steps: 50\n"))
        self.assertEqual(config["solver"]["max_steps"], 50)
        self.assertEqual(config["solver"]["backend"], "builtin")

    def test_empty_file(self):
        self.assertEqual(load_config(self.write("")), load_config())

    def test_errors(self):
        for text in ("solver:\n  speed: 1\n", "colour: red\n", "solver: 3\n", "- a\n", "a: [\n"):
            with self.assertRaises(ConfigError):
                load_config(self.write(text))

    def test_logging_settings(self):
        config = load_config(self.write("logging:\n  level: DEBUG\n"))
        self.assertEqual(config["logging"]["level"], "DEBUG")
        for text in (
            "logging:\n  level: LOUD\n",
            "logging:\n  level: 10\n",
            "logging:\n  format: '%(levelname'\n",
        ):
            with self.assertRaises(ConfigError):
                load_config(self.write(text))

    def test_undecodable_file(self):
        path = os.path.join(self._tmp.name, "config.yaml")
        with open(path, "wb") as f:
            f.write(b"solver:\n  backend: \xff\n")
        with self.assertRaises(ConfigError):
            load_config(path)
