"""diecg: digitize scanned 12-lead ECG printouts into calibrated signals.

The pipeline goes image -> binary mask -> page layout -> per-lead trace
-> calibrated millivolt series at 200 Hz, with a synthetic printout
renderer as its test oracle and an RR-interval quality check.
"""
from ._version import __version__
from .calibrate import (
    Calibration,
    EcgSignal,
    RefPulse,
    TARGET_FS,
    calibration_from_pulse,
    fallback_calibration,
    measure_ref_pulse,
    resample_to_200hz,
    to_physical,
)
from .errors import (
    AlignmentError,
    CalibrationError,
    DigitizationError,
    FormatError,
    LayoutError,
    RecordSchemaError,
    RenderError,
    TraceNotFoundError,
    UndefinedResultError,
)
from .layout import (
    CropRect,
    LeadLayout,
    STANDARD_LEADS,
    TemplateConfig,
    bundled_template,
    bundled_template_ids,
    crop_leads,
    detect_column_separators,
    detect_isoelectric_lines,
    extract_crop,
    load_template,
)
from .pipeline import DigitizeOptions, DigitizeResult, digitize_image, digitize_page
from .quality import (
    QaReport,
    RPeakSet,
    build_qa_report,
    detect_r_peaks,
    mae_rr,
    rr_mean_ms,
)
from .raster import (
    BinaryImage,
    GrayImage,
    Histogram,
    load_grayscale,
    otsu_binarize,
    projection_histogram,
)
from .signalio import (
    CLASS_NAMES,
    ConcatSequence,
    EcgRecord,
    concat_leads,
    export_csv,
    read_record,
    write_record,
)
from .synth import SynthSpec, generate_corpus, perturb, render, write_page
from .trace import (
    RawTrace,
    TraceMask,
    TraceParams,
    choose_start_column,
    despeckle,
    extract_waveform,
    keep_largest_component,
    remove_isolated_pixels,
    remove_noise,
)

__all__ = [name for name in dir() if not name.startswith("_")]
