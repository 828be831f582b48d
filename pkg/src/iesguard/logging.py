import logging
from typing import Optional

_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def _formatter() -> logging.Formatter:
    return logging.Formatter(_FORMAT)


class IesGuardLogger:
    """Package logger shared by the simulator, the trainer and the harness.

    Modules log through the singleton ``logger`` below; long-running parts
    (trainer, matrix) use a named child so their lines can be filtered.

    Attributes:
        logger: The underlying ``logging.Logger`` named ``iesguard``
    """

    def __init__(self, name: str = 'iesguard', level: int = logging.INFO):
        self.logger = logging.getLogger(name)
        self.logger.setLevel(level)

        # one console handler, also across re-imports in worker processes
        if not self.logger.handlers:
            console = logging.StreamHandler()
            console.setFormatter(_formatter())
            self.logger.addHandler(console)

    def set_level(self, level: int):
        self.logger.setLevel(level)

    def add_file_handler(self, filename: str, level: Optional[int] = None):
        """Also write records to ``filename``.

        Args:
            filename: Path of the log file (appended to)
            level: Level for this handler only (defaults to the logger level)
        """
        handler = logging.FileHandler(filename)
        handler.setFormatter(_formatter())
        if level is not None:
            handler.setLevel(level)
        self.logger.addHandler(handler)

    def configure(self, verbose: bool = False, log_file: Optional[str] = None):
        """Apply the command line logging flags (``--verbose``, ``--log-file``)."""
        if verbose:
            self.set_level(logging.DEBUG)
        if log_file:
            self.add_file_handler(log_file)

    def child(self, suffix: str) -> logging.Logger:
        """Return a stdlib child logger, e.g. ``iesguard.trainer``."""
        return self.logger.getChild(suffix)

    def debug(self, msg: str, *args, **kwargs):
        self.logger.debug(msg, *args, **kwargs)

    def info(self, msg: str, *args, **kwargs):
        self.logger.info(msg, *args, **kwargs)

    def warning(self, msg: str, *args, **kwargs):
        self.logger.warning(msg, *args, **kwargs)

    def error(self, msg: str, *args, **kwargs):
        self.logger.error(msg, *args, **kwargs)

    def exception(self, msg: str, *args, **kwargs):
        self.logger.exception(msg, *args, **kwargs)

    def log(self, level: int, msg: str, *args, **kwargs):
        self.logger.log(level, msg, *args, **kwargs)


logger = IesGuardLogger()
