import pytest

from utils.logger import LoggerMixin, log_critical_error, log_function_call, setup_logger


class Counter(LoggerMixin):
    def __init__(self, log_dir):
        self.setup_logging("INFO", log_dir, console=False)


def test_component_log_file(tmp_path):
    logger = setup_logger("gathering.engine", "DEBUG", str(tmp_path), console=False)
    logger.debug("round 1")
    assert "round 1" in (tmp_path / "engine.log").read_text(encoding="utf-8")
    assert len(logger.handlers) == 1


def test_rebuilding_replaces_handlers(tmp_path):
    setup_logger("rebuilt", log_dir=str(tmp_path), console=True)
    logger = setup_logger("rebuilt", log_dir=str(tmp_path), console=True)
    assert len(logger.handlers) == 2


def test_progress_is_sampled(tmp_path):
    counter = Counter(str(tmp_path))
    for done in range(1, 101):
        counter.log_progress(done, 100, "placements")
    lines = (tmp_path / "counter.log").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 10
    assert lines[-1].endswith("100/100 placements")
    assert not counter.debug_enabled


def test_mixin_without_setup_is_silent():
    LoggerMixin().log_info("nothing happens")


def test_decorated_failure_is_logged_and_raised(tmp_path):
    logger = setup_logger("decorated", log_dir=str(tmp_path), console=False)

    @log_function_call(logger)
    def explode():
        raise RuntimeError("table has a cycle")

    with pytest.raises(RuntimeError):
        explode()
    assert "explode failed" in (tmp_path / "decorated.log").read_text(encoding="utf-8")


def test_critical_errors_go_to_errors_log(isolated_dirs):
    log_critical_error("sweep failed", ValueError("bad bounds"))
    text = (isolated_dirs / "logs" / "errors.log").read_text(encoding="utf-8")
    assert "sweep failed: bad bounds" in text
