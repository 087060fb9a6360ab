"""Exception hierarchy shared by every pipeline stage."""

from typing import Optional


class SpectraError(ValueError):
    """Base error; `code` is the short machine-readable category printed by the CLI."""

    code = "error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message

    def one_line(self) -> str:
        """Render as the single line the CLI prints on failure."""
        text = " ".join(self.message.split())
        return f"error: {self.code}: {text}"


class ConfigError(SpectraError):
    code = "config"


class DataFormatError(SpectraError):
    code = "data"

    def __init__(self, message: str, row: Optional[int] = None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class PreprocessError(SpectraError):
    code = "preprocess"


class LearnerError(SpectraError):
    code = "learner"


class EnsembleError(SpectraError):
    code = "ensemble"


class EvaluationError(SpectraError):
    code = "evaluation"


class PhenologyError(SpectraError):
    code = "phenology"


class SynthError(SpectraError):
    code = "synth"
