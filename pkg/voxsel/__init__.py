"""voxsel: speaker-similarity corpus selection and vocoder evaluation toolkit."""

__version__ = "0.1.0"

REPORT_FORMAT_VERSION = "voxsel-report/1"
