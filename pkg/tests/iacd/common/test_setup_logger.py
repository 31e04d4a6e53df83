from unittest.mock import patch

from loguru import logger

from iacd.common.setup_logger import FILE_ROTATION, setup_logger


# Test setup_logger replaces the default handler with a stderr handler at the given level
@patch("iacd.common.setup_logger.logger")
def test_setup_logger(mock_logger):
    setup_logger("DEBUG")
    mock_logger.remove.assert_called_once_with()
    mock_logger.add.assert_called_once()
    assert mock_logger.add.call_args.kwargs["level"] == "DEBUG"
    assert mock_logger.add.call_args.kwargs["colorize"] is True

# Test a log file adds a second, rotating handler
@patch("iacd.common.setup_logger.logger")
def test_setup_logger_with_file(mock_logger):
    setup_logger("WARNING", log_file="iacd.log")
    assert mock_logger.add.call_count == 2
    file_handler = mock_logger.add.call_args_list[1].kwargs
    assert file_handler["sink"] == "iacd.log"
    assert file_handler["level"] == "WARNING"
    assert file_handler["rotation"] == FILE_ROTATION

# Test messages at or above the level reach the log file
def test_setup_logger_writes_file(tmp_path):
    path = tmp_path / "iacd.log"
    setup_logger("INFO", log_file=str(path))
    logger.debug("hidden message")
    logger.info("corpus written")
    logger.complete()
    setup_logger("INFO")
    text = path.read_text()
    assert "corpus written" in text
    assert "hidden message" not in text
