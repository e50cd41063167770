import logging
from logging.handlers import RotatingFileHandler
import os
import sys

__version__ = '0.1.0'


def configure_logging(config):
    """Configure package logging"""
    logger = logging.getLogger('faironb')
    level = getattr(logging, str(config.LOG_LEVEL).upper(), logging.INFO)
    logger.setLevel(level)

    # One stream handler, bound to whatever sys.stderr is now
    for handler in [h for h in logger.handlers if getattr(h, '_faironb_stream', False)]:
        logger.removeHandler(handler)
    stream_handler = logging.StreamHandler(sys.stderr)
    stream_handler.setFormatter(logging.Formatter('%(levelname)s %(name)s: %(message)s'))
    stream_handler.setLevel(level)
    stream_handler._faironb_stream = True
    logger.addHandler(stream_handler)

    has_file = any(isinstance(h, RotatingFileHandler) for h in logger.handlers)
    if not config.DEBUG and not config.TESTING and not has_file:
        if not os.path.exists(config.LOG_DIR):
            os.mkdir(config.LOG_DIR)

        file_handler = RotatingFileHandler(
            os.path.join(config.LOG_DIR, 'faironb.log'),
            maxBytes=10240000,
            backupCount=10
        )

        formatter = logging.Formatter(
            '%(asctime)s %(levelname)s: %(message)s [in %(pathname)s:%(lineno)d]'
        )
        file_handler.setFormatter(formatter)
        file_handler.setLevel(logging.INFO)

        logger.addHandler(file_handler)
        logger.info('fair-onb startup')

    return logger
