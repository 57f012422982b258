"""Exception and warning types shared across the digitization pipeline.

Every error carries a ``stage`` attribute naming the pipeline stage it
belongs to, so batch drivers can report per-image failures uniformly.
"""


class DigitizationError(Exception):
    """Base class for all pipeline failures."""

    stage = "pipeline"


class FormatError(DigitizationError):
    """Input file is not a readable PNG or JPEG raster."""

    stage = "io"


class LayoutError(DigitizationError):
    """Page structure (baselines, separators, crops) could not be recovered."""

    stage = "layout"


class TraceNotFoundError(DigitizationError):
    """No trace pixels where a waveform was expected."""

    stage = "trace"


class CalibrationError(DigitizationError):
    """Reference pulse missing or unusable and no fallback scales available."""

    stage = "calibration"


class RenderError(DigitizationError):
    """Synthetic page parameters are geometrically impossible."""

    stage = "synth"


class RecordSchemaError(DigitizationError):
    """A record or annotation file violates its schema."""

    stage = "io"


class AlignmentError(DigitizationError):
    """Truth and prediction collections cannot be paired up."""

    stage = "qa"


class UndefinedResultError(DigitizationError):
    """A statistic is undefined for the given input (e.g. < 2 peaks)."""

    stage = "qa"


class DegenerateThresholdWarning(UserWarning):
    """Otsu ran on a (near-)constant image; the mask is all background."""


class UpsamplingWarning(UserWarning):
    """Native column rate is far below the 200 Hz target."""
