"""Exception types raised across the package.

Every error condition named in a module contract gets its own class so
callers can catch precisely; all inherit from GarbleError.
"""


class GarbleError(Exception):
    """Base class for all package errors."""


# --- audio file I/O ---

class MalformedHeaderError(GarbleError):
    """File is not laid out as RIFF/WAVE with fmt/data chunks."""


class UnsupportedFormatError(GarbleError):
    """WAV file is not 16-bit PCM mono; caller must pre-convert."""


# --- signal operations ---

class RateMismatchError(GarbleError):
    """Two buffers with different sample rates were combined."""


class SilentSignalError(GarbleError):
    """An operation needing non-zero power received a silent signal."""


class NotPowerOfTwoError(GarbleError):
    """FFT length is not a power of two."""


class SignalTooShortError(GarbleError):
    """Signal shorter than one analysis frame."""


# --- metrics ---

class EmptyReferenceError(GarbleError):
    """Reference transcript has no words; WER is undefined."""


class EmptyInputError(GarbleError):
    """Aggregate statistics requested over an empty sequence."""


# --- transcribers ---

class CommandFailedError(GarbleError):
    """External transcriber command exited nonzero."""

    def __init__(self, message: str, returncode: int = -1, stderr: str = ""):
        super().__init__(message)
        self.returncode = returncode
        self.stderr = stderr


class TranscriberTimeoutError(GarbleError):
    """External transcriber command exceeded its time budget."""


class MissingFixtureError(GarbleError):
    """Mock transcriber has no fixture for the requested audio."""


class DescriptorInvalidError(GarbleError):
    """Transcriber descriptor file is malformed."""


# --- harness ---

class EmptyCorpusError(GarbleError):
    """Corpus directory contains no (wav, reference) pairs."""


class ConfigInvalidError(GarbleError):
    """Experiment configuration violates an invariant."""


# --- annotation service ---

class DuplicateAnnotatorError(GarbleError):
    """Annotator already has a session (one condition per annotator)."""


class UnknownConditionError(GarbleError):
    """Requested condition does not exist among generated conditions."""


class UnknownAnnotatorError(GarbleError):
    """No session exists for this annotator."""


class NotAssignedError(GarbleError):
    """Submission for an audio id outside the annotator's assignment."""


class NoRecordsError(GarbleError):
    """Export requested but no annotation records exist."""
