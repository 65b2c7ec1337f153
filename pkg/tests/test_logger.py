import json
import logging

from util.logger import LOGGER_NAME, JsonFormatter, get_logger, setup_logger


def test_component_loggers_are_children():
    assert get_logger("pipeline").name == "fairorder.pipeline"
    assert get_logger("pipeline").parent is logging.getLogger(LOGGER_NAME)


def test_json_lines():
    record = logging.LogRecord("fairorder.data", logging.WARNING, __file__, 1, "rows=%d", (3,), None)
    entry = json.loads(JsonFormatter().format(record))
    assert entry["level"] == "WARNING"
    assert entry["name"] == "fairorder.data"
    assert entry["message"] == "rows=3"


def test_reconfiguring_replaces_handlers(tmp_path):
    log_file = tmp_path / "run.log"
    setup_logger(logging.INFO)
    logger = setup_logger(logging.INFO, log_file=str(log_file), json_format=True)
    try:
        assert len(logger.handlers) == 2
        get_logger("test").info("hello")
        for handler in logger.handlers:
            handler.flush()
        (line,) = log_file.read_text(encoding="utf-8").splitlines()
        assert json.loads(line)["message"] == "hello"
    finally:
        setup_logger(logging.WARNING)
