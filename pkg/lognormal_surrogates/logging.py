import logging
from contextlib import contextmanager


logger = logging.getLogger("lognormal-surrogates")


def init_logging(level):
    logging.basicConfig(
        level=level.upper(),
        format="{asctime}|{levelname:7}|{thread:X}|{name:15}| {message}",
        style="{"
    )


@contextmanager
def capture_integration_warnings(what):
    """Route scipy IntegrationWarnings to our logger instead of stderr"""
    import warnings
    from scipy.integrate import IntegrationWarning

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", IntegrationWarning)
        yield
    for w in caught:
        if issubclass(w.category, IntegrationWarning):
            logger.warning(f"{what}: {str(w.message).splitlines()[0]}")
        else:
            warnings.warn(w.message, w.category)
