"""BLAS thread limiting for the many small dense solves.

At the matrix sizes used here (tens of elements) multi-threaded BLAS is
pure overhead; worse, rapid sequences of tiny calls can stall for
milliseconds in the thread pool.  Solvers wrap their hot loops in
``single_threaded_blas()``.
"""

from contextlib import contextmanager

try:
    from threadpoolctl import ThreadpoolController

    _CONTROLLER = ThreadpoolController()

    @contextmanager
    def single_threaded_blas():
        with _CONTROLLER.limit(limits=1, user_api="blas"):
            yield

except ImportError:  # pragma: no cover - threadpoolctl ships with scipy installs

    @contextmanager
    def single_threaded_blas():
        yield
