"""
Unit tests for training/src/utils/logger.py module.
"""

import importlib
import json
from datetime import datetime
from unittest.mock import patch

import pytest
from src.utils.logger import configure_logging, json_serializer, logger, setup_file_logging

logger_module = importlib.import_module("src.utils.logger")


class TestLogger:
    """Tests for logger configuration."""

    def test_logger_exists(self):
        """Test logger is available for import."""
        assert logger is not None

    def test_logger_has_stderr_handler(self):
        """Test logger has stderr handler configured."""
        assert len(logger._core.handlers) > 0


class TestConfigureLogging:
    """Tests for configure_logging function."""

    @pytest.fixture(autouse=True)
    def keep_handler_id(self, monkeypatch):
        """Restore the console handler id replaced under the mock."""
        monkeypatch.setattr(logger_module, "_console_handler_id", logger_module._console_handler_id)

    @patch.object(logger_module, "logger")
    def test_text_format(self, mock_logger):
        """Test text format adds a coloured stderr handler at the given level."""
        configure_logging("WARNING")
        call_kwargs = mock_logger.add.call_args[1]
        assert call_kwargs["level"] == "WARNING"
        assert call_kwargs["colorize"] is True

    @patch.object(logger_module, "logger")
    def test_json_format(self, mock_logger):
        """Test json format adds the JSON sink."""
        configure_logging("INFO", fmt="json")
        sink = mock_logger.add.call_args[0][0]
        assert callable(sink)

    def test_json_serializer(self):
        """Test records serialize to one JSON object."""

        class Level:
            name = "INFO"

        record = {
            "time": datetime(2024, 1, 2, 3, 4, 5),
            "level": Level(),
            "message": "hello",
            "name": "src.cli",
            "function": "main",
            "line": 10,
            "exception": None,
            "extra": {"run": 1},
        }
        payload = json.loads(json_serializer(record))
        assert payload["message"] == "hello"
        assert payload["level"] == "INFO"
        assert payload["extra"] == {"run": 1}


class TestSetupFileLogging:
    """Tests for setup_file_logging function."""

    @patch.object(logger_module, "logger")
    def test_creates_log_directory(self, mock_logger, tmp_path):
        """Test setup_file_logging creates parent directory."""
        log_file = tmp_path / "logs" / "test.log"

        setup_file_logging(str(log_file))

        assert log_file.parent.exists()

    @patch.object(logger_module, "logger")
    def test_adds_file_handler(self, mock_logger, tmp_path):
        """Test setup_file_logging adds file handler."""
        setup_file_logging(str(tmp_path / "test.log"))

        mock_logger.add.assert_called_once()

    @patch.object(logger_module, "logger")
    def test_default_level_is_debug(self, mock_logger, tmp_path):
        """Test default logging level is DEBUG."""
        setup_file_logging(str(tmp_path / "test.log"))

        call_kwargs = mock_logger.add.call_args[1]
        assert call_kwargs["level"] == "DEBUG"
        assert call_kwargs["rotation"] == "10 MB"

    @patch.object(logger_module, "logger")
    def test_logs_file_path(self, mock_logger, tmp_path):
        """Test setup_file_logging logs the file path."""
        log_file = tmp_path / "test.log"

        setup_file_logging(str(log_file))

        mock_logger.info.assert_called_once()
        assert str(log_file) in mock_logger.info.call_args[0][0]
