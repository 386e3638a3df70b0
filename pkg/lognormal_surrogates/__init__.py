from .configuration import CONF

__version__ = CONF.version.lstrip("v")
