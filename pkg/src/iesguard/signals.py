"""
Signal support for iesguard.

This module provides signal support using the blinker library. Signal
support is optional and requires the blinker library to be installed; without
it every signal is a no-op and the core algorithms run unchanged.
"""

try:
    from blinker import signal  # type: ignore
    SIGNAL_SUPPORT = True
except ImportError:
    SIGNAL_SUPPORT = False

    def signal(*args, **kwargs):
        """Dummy signal function when blinker is not available."""
        class DummySignal:
            receivers: dict = {}

            def connect(self, receiver, *args, **kwargs):
                return receiver

            def disconnect(self, *args, **kwargs):
                pass

            def send(self, *args, **kwargs):
                return []

        return DummySignal()


# Field signals
pre_validate = signal('pre_validate')
post_validate = signal('post_validate')

# Training lifecycle
training_started = signal('training_started')
episode_completed = signal('episode_completed')
phase_changed = signal('phase_changed')
gradient_step_completed = signal('gradient_step_completed')
training_finished = signal('training_finished')

# Evaluation and harness
evaluation_completed = signal('evaluation_completed')
matrix_cell_completed = signal('matrix_cell_completed')
report_emitted = signal('report_emitted')


def receiver(signal, **kwargs):
    """Decorator to register a signal receiver.

    Args:
        signal: The signal to connect to
        **kwargs: Additional arguments for signal.connect (e.g. sender)

    Example:
        @receiver(episode_completed)
        def log_episode(sender, row, **kwargs): ...
    """
    def decorator(fn):
        signal.connect(fn, **kwargs)
        return fn
    return decorator


class SignalProxy:
    """Wraps a signal so it can also be used directly as a decorator.

    ``@episode_completed`` and ``@episode_completed(sender=Trainer)`` both
    connect the decorated function.
    """

    def __init__(self, signal):
        self.signal = signal

    def __getattr__(self, name):
        return getattr(self.signal, name)

    def connect(self, *args, **kw):
        return self.signal.connect(*args, **kw)

    def send(self, *args, **kw):
        return self.signal.send(*args, **kw)

    def __call__(self, fn=None, **kwargs):
        if fn is None:
            return receiver(self.signal, **kwargs)
        return receiver(self.signal, **kwargs)(fn)


if SIGNAL_SUPPORT:
    training_started = SignalProxy(training_started)
    episode_completed = SignalProxy(episode_completed)
    phase_changed = SignalProxy(phase_changed)
    gradient_step_completed = SignalProxy(gradient_step_completed)
    training_finished = SignalProxy(training_finished)
    evaluation_completed = SignalProxy(evaluation_completed)
    matrix_cell_completed = SignalProxy(matrix_cell_completed)
    report_emitted = SignalProxy(report_emitted)
