import logging
import os
import tarfile
import zipfile
from datetime import datetime
from logging.handlers import TimedRotatingFileHandler

from app.config import LoggingConfig, memory_handler
from app.planner.utils.constants import LOG_GZ_ARCHIVE_FORMAT, LOG_ZIP_ARCHIVE_FORMAT

LOG_FILENAME = "planner.log"
LOG_WHEN = "midnight"
LOG_INTERVAL = 1
LOG_ENCODING = "utf-8"

logger = logging.getLogger(__name__)


class ArchiveRotatingFileHandler(TimedRotatingFileHandler):
    """Timed rotation that packs each rolled-over log into a zip or tar.gz archive."""

    def __init__(
        self,
        filename: str,
        when: str = "h",
        interval: int = 1,
        backupCount: int = 0,
        encoding: str | None = None,
        archive_format: str = LOG_ZIP_ARCHIVE_FORMAT,
    ) -> None:
        super().__init__(filename, when, interval, backupCount, encoding, delay=True)
        if archive_format not in {LOG_ZIP_ARCHIVE_FORMAT, LOG_GZ_ARCHIVE_FORMAT}:
            raise ValueError(f"archive_format must be either 'zip' or 'gz', got {archive_format}")
        self.archive_format = archive_format

    def doRollover(self) -> None:
        super().doRollover()

        timestamp = datetime.now().strftime("%Y-%m-%d_%H-%M-%S")
        dir_name = os.path.dirname(self.baseFilename)
        archive_name = os.path.join(dir_name, f"{timestamp}.{self.archive_format}")

        rolled = self.getFilesToDelete()
        if rolled:
            self._archive(rolled[0], archive_name)
        else:
            logger.warning(f"No rolled-over log next to {self.baseFilename}, skipping archive.")
        self._remove_old_logs()

    def _archive(self, log: str, archive_name: str) -> None:
        arcname = os.path.splitext(os.path.basename(archive_name))[0] + ".log"
        logger.info(f"Archiving {log} to {archive_name}")
        if self.archive_format == LOG_ZIP_ARCHIVE_FORMAT:
            with zipfile.ZipFile(archive_name, "w", zipfile.ZIP_DEFLATED) as archive:
                archive.write(filename=log, arcname=arcname)
        else:
            with tarfile.open(archive_name, "w:gz") as archive:
                archive.add(name=log, arcname=arcname)

    def _remove_old_logs(self) -> None:
        for file in self.getFilesToDelete():
            try:
                os.remove(file)
                logger.debug(f"Deleted rolled-over log file: {file}")
            except OSError as exception:
                logger.error(f"Error deleting {file}: {exception}")


def setup_logging(config: LoggingConfig) -> None:
    handlers: list[logging.Handler] = [logging.StreamHandler()]
    if config.TO_FILE:
        os.makedirs(config.DIR, exist_ok=True)
        handlers.append(
            ArchiveRotatingFileHandler(
                filename=os.path.join(config.DIR, LOG_FILENAME),
                when=LOG_WHEN,
                interval=LOG_INTERVAL,
                encoding=LOG_ENCODING,
                archive_format=config.ARCHIVE_FORMAT,
            )
        )

    logging.basicConfig(
        level=getattr(logging, config.LEVEL.upper(), logging.INFO),
        format=config.FORMAT,
        handlers=handlers,
        force=True,
    )

    for record in memory_handler.buffer:
        logger.handle(record)
    memory_handler.buffer.clear()

    logger.debug(
        f"Logging configuration: level={config.LEVEL}, format={config.FORMAT}, "
        f"archive_format={config.ARCHIVE_FORMAT}, dir={config.DIR}, to_file={config.TO_FILE}"
    )

    # Suppresses logs to avoid unnecessary output
    logging.getLogger("matplotlib").setLevel(logging.WARNING)
    logging.getLogger("PIL").setLevel(logging.WARNING)
