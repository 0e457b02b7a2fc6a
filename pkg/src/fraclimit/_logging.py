#   Copyright 2020-present Michael Hall
#
#   Licensed under the Apache License, Version 2.0 (the "License");
#   you may not use this file except in compliance with the License.
#   You may obtain a copy of the License at
#
#       http://www.apache.org/licenses/LICENSE-2.0
#
#   Unless required by applicable law or agreed to in writing, software
#   distributed under the License is distributed on an "AS IS" BASIS,
#   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#   See the License for the specific language governing permissions and
#   limitations under the License.

"""Logging setup for the command line entrypoint.

The library itself only ever calls ``logging.getLogger(__name__)``.
Everything goes to stderr so that stdout stays byte-reproducible.
"""

from __future__ import annotations

import logging
import logging.handlers
import queue
import sys
from collections.abc import Generator
from contextlib import contextmanager

from . import _typings as t

__all__ = ["with_logging"]

_DT_FMT = "%Y-%m-%d %H:%M:%S"
_MSG_PREFIX = "\x1b[30;1m%(asctime)s\x1b[0m "
_MSG_POSTFIX = "%(levelname)-8s\x1b[0m \x1b[35m%(name)s\x1b[0m %(message)s"

PLAIN = logging.Formatter("[%(asctime)s] [%(levelname)-8s] %(name)s: %(message)s", _DT_FMT)

LC = (
    (logging.DEBUG, "\x1b[40;1m"),
    (logging.INFO, "\x1b[34;1m"),
    (logging.WARNING, "\x1b[33;1m"),
    (logging.ERROR, "\x1b[31m"),
    (logging.CRITICAL, "\x1b[41m"),
)

FORMATS = {
    level: logging.Formatter(_MSG_PREFIX + color + _MSG_POSTFIX, _DT_FMT)
    for level, color in LC
}


class _AnsiTermFormatter(logging.Formatter):
    def format(self, record: logging.LogRecord) -> str:  # noqa: PLR6301
        formatter = FORMATS.get(record.levelno)
        if formatter is None:
            formatter = FORMATS[logging.DEBUG]
        if record.exc_info:
            text = formatter.formatException(record.exc_info)
            record.exc_text = f"\x1b[31m{text}\x1b[0m"
        output = formatter.format(record)
        record.exc_text = None
        return output


@contextmanager
def with_logging(level: int = logging.INFO) -> Generator[None]:
    """Route log records through a queue to a stderr handler.

    Worker threads only pay for a queue put; formatting and IO happen on the
    listener thread. Warnings issued with :func:`warnings.warn` are captured
    into the ``py.warnings`` logger as well.
    """
    q: queue.SimpleQueue[t.Any] = queue.SimpleQueue()
    q_handler = logging.handlers.QueueHandler(q)

    stream_h = logging.StreamHandler(sys.stderr)
    stream_h.setFormatter(_AnsiTermFormatter() if sys.stderr.isatty() else PLAIN)
    q_listener = logging.handlers.QueueListener(q, stream_h)
    root_logger = logging.getLogger()
    previous_level = root_logger.level
    root_logger.setLevel(level)
    root_logger.addHandler(q_handler)
    logging.captureWarnings(True)

    try:
        q_listener.start()
        yield
    finally:
        q_listener.stop()
        logging.captureWarnings(False)
        root_logger.removeHandler(q_handler)
        root_logger.setLevel(previous_level)
