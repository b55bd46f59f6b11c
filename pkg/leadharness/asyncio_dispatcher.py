import asyncio
import atexit
import inspect
import logging
import threading


class AsyncioDispatcher:
    def __init__(self, loop=None, debug=False):
        """Runs coroutines on an asyncio event loop from ordinary threads.
        Used by `leadharness.endpoint.LlmAgent` so that the synchronous
        executors can fan a voting round out as concurrent requests.

        If a ``loop`` is provided it must already be running. Otherwise a new
        Event Loop will be created and run in a dedicated thread.
        ``debug`` is passed through to ``asyncio.run()``.
        """
        self.__worker = None
        self.__atexit = None
        if loop is None:
            # will wait until worker is executing the new loop
            started = threading.Event()
            # Make one and run it in a background thread
            self.__worker = threading.Thread(
                target=asyncio.run,
                args=(self.__inloop(started),),
                kwargs={'debug': debug})
            # Explicitly manage worker thread as part of interpreter shutdown.
            # Otherwise threading module will deadlock trying to join()
            # before our atexit hook runs, while the loop is still running.
            self.__worker.daemon = True

            self.__worker.start()
            started.wait()

            self.__atexit = atexit.register(self.__shutdown)

            assert self.loop is not None and self.loop.is_running()

        elif not loop.is_running():
            raise ValueError("Provided asyncio event loop is not running")
        else:
            self.loop = loop

    def close(self):
        if self.__atexit is not None:
            atexit.unregister(self.__atexit)
            self.__atexit = None

        self.__shutdown()

    async def __inloop(self, started):
        self.loop = asyncio.get_running_loop()
        self.__interrupt = asyncio.Event()
        started.set()
        del started
        await self.__interrupt.wait()

    def __shutdown(self):
        if self.__worker is not None:
            self.loop.call_soon_threadsafe(self.__interrupt.set)
            self.__worker.join()
            self.__worker = None

    def submit(self, func, *args):
        """Schedules ``func(*args)`` on the loop and returns a
        `concurrent.futures.Future` for its result. ``func`` may return an
        awaitable, which is awaited. Exceptions are logged here and also
        passed on to whoever waits on the future."""
        async def async_wrapper():
            try:
                ret = func(*args)
                if inspect.isawaitable(ret):
                    ret = await ret
                return ret
            except Exception:
                logging.exception("Exception when running dispatched call")
                raise
        return asyncio.run_coroutine_threadsafe(async_wrapper(), self.loop)

    def __call__(self, func, *args):
        """Runs ``func(*args)`` on the loop and waits for its result."""
        return self.submit(func, *args).result()

    def gather(self, calls):
        """Runs every ``(func, args)`` pair of ``calls`` concurrently and
        returns their results in order. The first exception is raised once
        every call has finished."""
        futures = [self.submit(func, *args) for func, args in calls]
        results = []
        error = None
        for future in futures:
            try:
                results.append(future.result())
            except Exception as exception:
                if error is None:
                    error = exception
        if error is not None:
            raise error
        return results

    def __enter__(self):
        return self

    def __exit__(self, A, B, C):
        self.close()
