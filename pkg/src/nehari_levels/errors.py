"""Exception hierarchy shared by all modules."""


class NehariLevelsError(Exception):
    """Base class for every error raised by the package."""


class NoGroundState(NehariLevelsError):
    """Amplitude bisection could not bracket a decaying positive solution."""


class TruncationTooSmall(NehariLevelsError):
    """The profile has not decayed below threshold at the truncation radius."""


class NoPlateaus(NehariLevelsError):
    """The decay-constant window does not show a plateau."""


class QuadratureNotConverged(NehariLevelsError):
    """Two successive refinement levels disagree beyond tolerance."""


class DegenerateFunction(NehariLevelsError):
    """A Nehari projection was requested for a function with no nonlinear mass."""


class DegenerateField(NehariLevelsError):
    """The barycenter of a (numerically) vanishing field was requested."""


class PlateauNotReached(NehariLevelsError):
    """An asymptotic sequence has not settled over the requested range."""


class NoSignChange(NehariLevelsError):
    """A bisection bracket has the same sign at both ends."""


class ConfigError(NehariLevelsError):
    """Invalid experiment configuration; carries field-level messages."""

    def __init__(self, messages):
        if isinstance(messages, str):
            messages = [messages]
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))
