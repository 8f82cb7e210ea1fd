import logging
import os
from datetime import datetime


class Logger:
    _instance = None
    _initialized = False
    _error_logs = []

    # Default log levels
    DEFAULT_FILE_LEVEL = "DEBUG"
    DEFAULT_CONSOLE_LEVEL = "INFO"

    LOGGER_NAME = "FundTails"

    # Map string levels to logging constants
    LOG_LEVELS = {
        "DEBUG": logging.DEBUG,
        "INFO": logging.INFO,
        "WARNING": logging.WARNING,
        "ERROR": logging.ERROR,
        "CRITICAL": logging.CRITICAL
    }

    def __new__(cls, *args, **kwargs):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __init__(self, log_path=None, file_level=None, console_level=None):
        if not Logger._initialized:
            Logger._error_logs = []
            self.logger = logging.getLogger(self.LOGGER_NAME)

            # Set propagate to False to prevent duplicate logs
            self.logger.propagate = False
            self.logger.setLevel(logging.DEBUG)

            self._build_handlers(log_path, file_level, console_level)
            Logger._initialized = True

    def _build_handlers(self, log_path, file_level, console_level):
        """
        (Re)create the console handler and, when a log path is given, the file handler

        Args:
            log_path: Directory for the timestamped log file, or None for console only
            file_level: Level name for the file handler
            console_level: Level name for the console handler
        """
        self.logger.handlers.clear()

        file_log_level = self.LOG_LEVELS.get(
            (file_level or self.DEFAULT_FILE_LEVEL).upper(),
            self.LOG_LEVELS[self.DEFAULT_FILE_LEVEL]
        )
        console_log_level = self.LOG_LEVELS.get(
            (console_level or self.DEFAULT_CONSOLE_LEVEL).upper(),
            self.LOG_LEVELS[self.DEFAULT_CONSOLE_LEVEL]
        )

        formatter = logging.Formatter(
            '%(asctime)s - %(levelname)s - %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        )

        # Console goes to stderr so command output on stdout stays clean
        console_handler = logging.StreamHandler()
        console_handler.setLevel(console_log_level)
        console_handler.setFormatter(formatter)
        self.logger.addHandler(console_handler)

        self.log_dir = log_path
        self.log_file = None
        if log_path:
            os.makedirs(log_path, exist_ok=True)
            timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
            self.log_file = os.path.join(log_path, f'fundtails_run_{timestamp}.log')

            file_handler = logging.FileHandler(self.log_file)
            file_handler.setLevel(file_log_level)
            file_handler.setFormatter(formatter)
            self.logger.addHandler(file_handler)

    @classmethod
    def get_instance(cls, log_path=None, file_level=None, console_level=None):
        if cls._instance is None or not cls._initialized:
            cls._instance = Logger(log_path, file_level, console_level)
        return cls._instance

    @classmethod
    def configure(cls, log_path=None, file_level=None, console_level=None):
        """
        Reconfigure handlers of the existing instance

        The CLI calls this once its flags are parsed; library use can rely on
        the console-only default.

        Args:
            log_path: Directory for the log file (None disables file logging)
            file_level: File handler level name
            console_level: Console handler level name
        """
        instance = cls.get_instance()
        instance._build_handlers(log_path, file_level, console_level)
        return instance

    @classmethod
    def _log(cls, level, message):
        cls.get_instance().logger.log(level, message)

    @classmethod
    def debug(cls, message):
        """
        Log debug level message

        Args:
            message: The message to log
        """
        cls._log(logging.DEBUG, message)

    @classmethod
    def info(cls, message):
        """
        Log info level message

        Args:
            message: The message to log
        """
        cls._log(logging.INFO, message)

    @classmethod
    def warning(cls, message):
        """Log warning level message"""
        cls._log(logging.WARNING, message)

    @classmethod
    def error(cls, message):
        """Log error level message"""
        cls._error_logs.append(message)
        cls._log(logging.ERROR, message)

    @classmethod
    def critical(cls, message):
        """Log critical level message"""
        cls._error_logs.append(message)
        cls._log(logging.CRITICAL, message)

    @classmethod
    def init_error_collection(cls):
        """Initialize or reset the error collection"""
        cls._error_logs = []

    @classmethod
    def has_errors(cls):
        return bool(cls._error_logs)

    @classmethod
    def get_error_summary(cls):
        """
        Return all collected error messages as a summary string.

        Returns:
            str: A formatted string containing all error messages
        """
        if not cls._error_logs:
            return "No errors collected during the run"

        summary_lines = ["\n===== ERROR SUMMARY ====="]
        summary_lines.extend(str(error_msg) for error_msg in cls._error_logs)
        summary_lines.append("===== END ERROR SUMMARY =====")

        return "\n".join(summary_lines)
